//! Dense exact simplex over an equality system `A x = b, x >= 0`.
//!
//! Phase 1 minimizes the sum of artificial variables. Pivoting follows
//! Bland's rule (lowest eligible column index enters; ratio ties leave by
//! lowest basic index), so it terminates and is deterministic. When phase 1
//! ends with a positive optimum, the phase-1 duals give a Farkas vector `y`
//! with `y^T A >= 0` and `y^T b < 0`.


use crate::scalar::Scalar;

/// Linear equality constraints over non-negative variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EqualitySystem<T> {
    pub rows: Vec<Vec<T>>,
    pub rhs: Vec<T>,
    pub vars: usize,
}

impl<T: Scalar> EqualitySystem<T> {
    pub fn new(vars: usize) -> Self {
        Self {
            rows: Vec::new(),
            rhs: Vec::new(),
            vars,
        }
    }

    pub fn push_row(&mut self, row: Vec<T>, rhs: T) {
        assert_eq!(row.len(), self.vars, "row width");
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    /// True iff `y` proves infeasibility: `y^T A_j >= 0` for every column
    /// and `y^T b < 0`.
    pub fn is_farkas_certificate(&self, y: &[T]) -> bool {
        if y.len() != self.rows.len() {
            return false;
        }
        let yb = dot(y, &self.rhs);
        if !yb.is_negative() {
            return false;
        }
        (0..self.vars).all(|j| {
            let col = y
                .iter()
                .zip(&self.rows)
                .fold(T::zero(), |acc, (yi, row)| acc + yi.clone() * row[j].clone());
            !col.is_negative()
        })
    }

    pub fn is_solution(&self, x: &[T]) -> bool {
        x.len() == self.vars
            && x.iter().all(|v| !v.is_negative())
            && self.rows.iter().zip(&self.rhs).all(|(row, b)| dot(row, x) == *b)
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility<T> {
    Feasible(Vec<T>),
    Infeasible(Vec<T>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Optimum<T> {
    Optimal { x: Vec<T>, value: T },
    Infeasible(Vec<T>),
    Unbounded,
}

struct Tableau<T> {
    /// `rows x (cols + 1)`, last column is the right-hand side.
    t: Vec<Vec<T>>,
    /// Reduced costs; last entry is minus the objective value.
    z: Vec<T>,
    basis: Vec<usize>,
    cols: usize,
}

impl<T: Scalar> Tableau<T> {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c].clone();
        for v in self.t[r].iter_mut() {
            *v = v.clone() / p.clone();
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v = v.clone() - f.clone() * pv.clone();
                }
            }
        }
        if !self.z[c].is_zero() {
            let f = self.z[c].clone();
            for (v, pv) in self.z.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v = v.clone() - f.clone() * pv.clone();
                }
            }
        }
        self.basis[r] = c;
    }

    /// Bland iterations restricted to columns `< allowed`. Returns false if
    /// the objective is unbounded below.
    fn run(&mut self, allowed: usize) -> bool {
        loop {
            let Some(c) = (0..allowed).find(|&j| self.z[j].is_negative()) else {
                return true;
            };
            let rhs = self.cols;
            let mut best: Option<(usize, T)> = None;
            for (i, row) in self.t.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = row[rhs].clone() / row[c].clone();
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }

    fn values(&self, vars: usize) -> Vec<T> {
        let mut x = vec![T::zero(); vars];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < vars {
                x[b] = self.t[i][self.cols].clone();
            }
        }
        x
    }
}

/// Phase 1 on `sys`. On success returns the tableau positioned at a basic
/// feasible solution (artificials may remain basic at zero).
fn phase_one<T: Scalar>(sys: &EqualitySystem<T>) -> Result<Tableau<T>, Vec<T>> {
    let m = sys.rows.len();
    let n = sys.vars;
    let cols = n + m;
    let mut signs = Vec::with_capacity(m);
    let mut t = Vec::with_capacity(m);
    for (i, (row, b)) in sys.rows.iter().zip(&sys.rhs).enumerate() {
        let flip = b.is_negative();
        signs.push(if flip { -T::one() } else { T::one() });
        let mut line: Vec<T> = row
            .iter()
            .map(|v| if flip { -v.clone() } else { v.clone() })
            .collect();
        line.extend((0..m).map(|k| if k == i { T::one() } else { T::zero() }));
        line.push(if flip { -b.clone() } else { b.clone() });
        t.push(line);
    }
    let mut z = vec![T::zero(); cols + 1];
    for line in &t {
        for j in 0..n {
            z[j] = z[j].clone() - line[j].clone();
        }
        z[cols] = z[cols].clone() - line[cols].clone();
    }
    let mut tab = Tableau {
        t,
        z,
        basis: (n..cols).collect(),
        cols,
    };
    tab.run(n);
    if tab.z[cols].is_zero() {
        return Ok(tab);
    }
    // Phase-1 duals: reduced cost of artificial i equals 1 - y_i.
    let y: Vec<T> = (0..m)
        .map(|i| -(T::one() - tab.z[n + i].clone()) * signs[i].clone())
        .collect();
    Err(y)
}

pub fn solve_feasibility<T: Scalar>(sys: &EqualitySystem<T>) -> Feasibility<T> {
    match phase_one(sys) {
        Ok(tab) => Feasibility::Feasible(tab.values(sys.vars)),
        Err(y) => Feasibility::Infeasible(y),
    }
}

/// Maximizes `objective . x` subject to `sys`.
pub fn maximize<T: Scalar>(sys: &EqualitySystem<T>, objective: &[T]) -> Optimum<T> {
    assert_eq!(objective.len(), sys.vars, "objective width");
    let mut tab = match phase_one(sys) {
        Ok(tab) => tab,
        Err(y) => return Optimum::Infeasible(y),
    };
    let n = sys.vars;
    let cols = tab.cols;
    // Drive zero-valued artificials out of the basis; rows where that is
    // impossible are linear combinations of the others and are dropped.
    let mut r = 0;
    while r < tab.basis.len() {
        if tab.basis[r] >= n {
            match (0..n).find(|&j| !tab.t[r][j].is_zero()) {
                Some(c) => tab.pivot(r, c),
                None => {
                    tab.t.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }
    // Minimize -objective over the structural columns.
    let mut z = vec![T::zero(); cols + 1];
    for j in 0..n {
        z[j] = -objective[j].clone();
    }
    for (row, &b) in tab.t.iter().zip(&tab.basis) {
        let cb = -objective[b].clone();
        if cb.is_zero() {
            continue;
        }
        for (zj, v) in z.iter_mut().zip(row) {
            *zj = zj.clone() - cb.clone() * v.clone();
        }
    }
    tab.z = z;
    if !tab.run(n) {
        return Optimum::Unbounded;
    }
    let x = tab.values(n);
    let value = dot(objective, &x);
    Optimum::Optimal { x, value }
}
