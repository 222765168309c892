//! JSON encoding of the domain types.
//!
//! Scalars are written as exact `"p/q"` strings (integers without the
//! denominator) and read back from strings or JSON numbers, so decimal
//! literals such as `0.35` parse exactly. A belief is an array of state
//! probabilities; wherever a belief is expected, a bare scalar `p` is read
//! as the binary belief `[1 - p, p]`.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::feasibility::FeasibilityVerdict;
use crate::measures::{
    Belief, DiscreteMeasure, EmpiricalDistribution, Measure, PopulationLaw, Prior, ScalarMeasure,
};
use crate::mps::{InfeasibilityCertificate, SpreadDecomposition, SpreadTarget};
use crate::persuasion::{PersuasionSolution, SenderUtility};
use crate::polarization::PolarizationReport;
use crate::product::SymmetricProduct;
use crate::scalar::Scalar;
use crate::structures::{InformationStructure, SymmetricScheme};

/// How scalars are rendered. `Decimal` is for display and does not
/// round-trip.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NumberFormat {
    #[default]
    Exact,
    Decimal(usize),
}

pub trait Json: Sized {
    fn encode(&self, f: NumberFormat) -> Value;
    fn decode(v: &Value) -> Result<Self>;

    fn to_json(&self) -> Value {
        self.encode(NumberFormat::Exact)
    }
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| parse_err(format!("missing field {key:?}")))
}

fn opt_field<'a>(v: &'a Value, key: &str) -> Option<&'a Value> {
    v.get(key).filter(|x| !x.is_null())
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| parse_err(format!("{what} must be an array")))
}

fn count(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .and_then(|c| usize::try_from(c).ok())
        .ok_or_else(|| parse_err(format!("{what} must be a non-negative integer")))
}

pub fn encode_scalar<T: Scalar>(x: &T, f: NumberFormat) -> Value {
    match f {
        NumberFormat::Exact => Value::String(x.to_canonical_string()),
        NumberFormat::Decimal(d) => serde_json::from_str(&x.to_decimal_string(d))
            .unwrap_or_else(|_| Value::String(x.to_decimal_string(d))),
    }
}

pub fn decode_scalar<T: Scalar>(v: &Value) -> Result<T> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        other => return Err(parse_err(format!("expected a number, got {other}"))),
    };
    T::parse_exact(&text).ok_or_else(|| parse_err(format!("not an exact number: {text:?}")))
}

fn encode_scalars<T: Scalar>(xs: &[T], f: NumberFormat) -> Value {
    Value::Array(xs.iter().map(|x| encode_scalar(x, f)).collect())
}

fn decode_scalars<T: Scalar>(v: &Value, what: &str) -> Result<Vec<T>> {
    array(v, what)?.iter().map(decode_scalar).collect()
}

impl<T: Scalar> Json for Belief<T> {
    fn encode(&self, f: NumberFormat) -> Value {
        encode_scalars(self.coords(), f)
    }

    fn decode(v: &Value) -> Result<Self> {
        match v {
            Value::Array(_) => Belief::new(decode_scalars(v, "belief")?),
            _ => Belief::binary(decode_scalar(v)?),
        }
    }
}

impl<T: Scalar> Json for Prior<T> {
    fn encode(&self, f: NumberFormat) -> Value {
        self.belief().encode(f)
    }

    fn decode(v: &Value) -> Result<Self> {
        Prior::new(Belief::decode(v)?)
    }
}

fn encode_measure<P, T: Scalar>(
    m: &Measure<P, T>,
    key: &str,
    point: impl Fn(&P) -> Value,
    f: NumberFormat,
) -> Value
where
    P: Ord + Clone + std::fmt::Debug,
{
    Value::Array(
        m.atoms()
            .iter()
            .map(|(x, w)| {
                let mut o = Map::new();
                o.insert(key.into(), point(x));
                o.insert("weight".into(), encode_scalar(w, f));
                Value::Object(o)
            })
            .collect(),
    )
}

fn decode_measure<P, T: Scalar>(
    v: &Value,
    key: &str,
    point: impl Fn(&Value) -> Result<P>,
) -> Result<Measure<P, T>>
where
    P: Ord + Clone + std::fmt::Debug,
{
    let atoms = array(v, "measure")?
        .iter()
        .map(|a| Ok((point(field(a, key)?)?, decode_scalar(field(a, "weight")?)?)))
        .collect::<Result<Vec<_>>>()?;
    Measure::from_weights(atoms)
}

impl<T: Scalar> Json for DiscreteMeasure<T> {
    fn encode(&self, f: NumberFormat) -> Value {
        encode_measure(self, "belief", |x| x.encode(f), f)
    }

    fn decode(v: &Value) -> Result<Self> {
        decode_measure(v, "belief", Belief::decode)
    }
}

/// Scalar laws use `value` as the point key.
pub fn encode_scalar_measure<T: Scalar>(m: &ScalarMeasure<T>, f: NumberFormat) -> Value {
    encode_measure(m, "value", |x| encode_scalar(x, f), f)
}

pub fn decode_scalar_measure<T: Scalar>(v: &Value) -> Result<ScalarMeasure<T>> {
    decode_measure(v, "value", decode_scalar)
}

impl<T: Scalar> Json for EmpiricalDistribution<T> {
    fn encode(&self, f: NumberFormat) -> Value {
        json!({
            "n": self.n(),
            "counts": self.counts().iter().map(|(x, c)| json!({"belief": x.encode(f), "count": c})).collect::<Vec<_>>(),
        })
    }

    /// Also accepts a bare array of beliefs, read as a profile.
    fn decode(v: &Value) -> Result<Self> {
        if let Value::Array(profile) = v {
            return EmpiricalDistribution::from_profile(
                profile.iter().map(Belief::decode).collect::<Result<Vec<_>>>()?,
            );
        }
        let counts = array(field(v, "counts")?, "counts")?
            .iter()
            .map(|c| Ok((Belief::decode(field(c, "belief")?)?, count(field(c, "count")?, "count")?)))
            .collect::<Result<Vec<_>>>()?;
        let n = match opt_field(v, "n") {
            Some(n) => count(n, "n")?,
            None => counts.iter().map(|(_, c)| c).sum(),
        };
        EmpiricalDistribution::new(n, counts)
    }
}

impl<T: Scalar> Json for PopulationLaw<T> {
    fn encode(&self, f: NumberFormat) -> Value {
        json!({
            "n": self.n(),
            "atoms": self.atoms().iter().map(|(h, w)| json!({"empirical": h.encode(f), "weight": encode_scalar(w, f)})).collect::<Vec<_>>(),
        })
    }

    fn decode(v: &Value) -> Result<Self> {
        let atoms = array(field(v, "atoms")?, "atoms")?
            .iter()
            .map(|a| {
                Ok((
                    EmpiricalDistribution::decode(field(a, "empirical")?)?,
                    decode_scalar(field(a, "weight")?)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let law = PopulationLaw::from_measure(Measure::from_weights(atoms)?)?;
        if let Some(n) = opt_field(v, "n") {
            let n = count(n, "n")?;
            if n != law.n() {
                return Err(parse_err(format!("law declares n = {n} but its atoms have n = {}", law.n())));
            }
        }
        Ok(law)
    }
}

impl<T: Scalar> Json for SpreadTarget<T> {
    fn encode(&self, f: NumberFormat) -> Value {
        Value::Array(
            self.components()
                .iter()
                .map(|(w, m)| json!({"weight": encode_scalar(w, f), "target": m.encode(f)}))
                .collect(),
        )
    }

    fn decode(v: &Value) -> Result<Self> {
        SpreadTarget::new(
            array(v, "base")?
                .iter()
                .map(|c| Ok((decode_scalar(field(c, "weight")?)?, DiscreteMeasure::decode(field(c, "target")?)?)))
                .collect::<Result<Vec<_>>>()?,
        )
    }
}

impl<T: Scalar> Json for SpreadDecomposition<T> {
    fn encode(&self, f: NumberFormat) -> Value {
        Value::Array(
            self.components
                .iter()
                .map(|(w, q)| json!({"weight": encode_scalar(w, f), "law": q.encode(f)}))
                .collect(),
        )
    }

    fn decode(v: &Value) -> Result<Self> {
        Ok(SpreadDecomposition {
            components: array(v, "decomposition")?
                .iter()
                .map(|c| Ok((decode_scalar(field(c, "weight")?)?, PopulationLaw::decode(field(c, "law")?)?)))
                .collect::<Result<Vec<_>>>()?,
        })
    }
}

impl<T: Scalar> Json for InfeasibilityCertificate<T> {
    fn encode(&self, f: NumberFormat) -> Value {
        let mut o = match self {
            Self::MeanMismatch { law_mean, target_mean } => {
                json!({"law_mean": encode_scalars(law_mean, f), "target_mean": encode_scalars(target_mean, f)})
            }
            Self::QuantileViolation { alpha, quantile_mean, threshold } => json!({
                "alpha": encode_scalar(alpha, f),
                "quantile_mean": encode_scalar(quantile_mean, f),
                "threshold": encode_scalar(threshold, f),
            }),
            Self::Farkas { dual } => json!({"dual": encode_scalars(dual, f)}),
        };
        o["kind"] = Value::String(self.kind().into());
        o
    }

    fn decode(v: &Value) -> Result<Self> {
        let kind = field(v, "kind")?.as_str().unwrap_or_default();
        match kind {
            "MeanMismatch" => Ok(Self::MeanMismatch {
                law_mean: decode_scalars(field(v, "law_mean")?, "law_mean")?,
                target_mean: decode_scalars(field(v, "target_mean")?, "target_mean")?,
            }),
            "QuantileViolation" => Ok(Self::QuantileViolation {
                alpha: decode_scalar(field(v, "alpha")?)?,
                quantile_mean: decode_scalar(field(v, "quantile_mean")?)?,
                threshold: decode_scalar(field(v, "threshold")?)?,
            }),
            "FarkasCertificate" => Ok(Self::Farkas {
                dual: decode_scalars(field(v, "dual")?, "dual")?,
            }),
            other => Err(parse_err(format!("unknown certificate kind {other:?}"))),
        }
    }
}

impl<T: Scalar> Json for FeasibilityVerdict<T> {
    fn encode(&self, f: NumberFormat) -> Value {
        let mut o = json!({
            "feasible": self.feasible,
            "prior_consistent": self.prior_consistent,
            "base": self.base.as_ref().map_or(Value::Null, |b| b.encode(f)),
        });
        if let Some(d) = &self.decomposition {
            o["decomposition"] = d.encode(f);
        }
        if let Some(c) = &self.certificate {
            o["certificate"] = c.encode(f);
        }
        o
    }

    fn decode(v: &Value) -> Result<Self> {
        let flag = |key| {
            field(v, key)?
                .as_bool()
                .ok_or_else(|| parse_err(format!("{key} must be a boolean")))
        };
        Ok(FeasibilityVerdict {
            feasible: flag("feasible")?,
            prior_consistent: flag("prior_consistent")?,
            base: opt_field(v, "base").map(SpreadTarget::decode).transpose()?,
            decomposition: opt_field(v, "decomposition").map(SpreadDecomposition::decode).transpose()?,
            certificate: opt_field(v, "certificate").map(InfeasibilityCertificate::decode).transpose()?,
        })
    }
}

fn strings(v: &Value, what: &str) -> Result<Vec<String>> {
    array(v, what)?
        .iter()
        .map(|s| {
            s.as_str()
                .map(str::to_owned)
                .ok_or_else(|| parse_err(format!("{what} entries must be strings")))
        })
        .collect()
}

impl<T: Scalar> Json for InformationStructure<T> {
    fn encode(&self, f: NumberFormat) -> Value {
        let kernel: Vec<Value> = (0..self.states())
            .map(|w| {
                json!({
                    "state": w,
                    "profiles": self.kernel(w).iter().map(|(s, p)| json!({"signals": s, "prob": encode_scalar(p, f)})).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "n": self.agents(),
            "m": self.states(),
            "mu": self.prior().encode(f),
            "signal_sets": self.signal_sets(),
            "kernel": kernel,
        })
    }

    fn decode(v: &Value) -> Result<Self> {
        let mu = Prior::decode(field(v, "mu")?)?;
        let signal_sets = array(field(v, "signal_sets")?, "signal_sets")?
            .iter()
            .map(|s| strings(s, "signal set"))
            .collect::<Result<Vec<_>>>()?;
        let mut kernel = vec![Vec::new(); mu.states()];
        for entry in array(field(v, "kernel")?, "kernel")? {
            let w = count(field(entry, "state")?, "state")?;
            if w >= mu.states() {
                return Err(parse_err(format!("kernel state {w} out of range")));
            }
            for p in array(field(entry, "profiles")?, "profiles")? {
                kernel[w].push((strings(field(p, "signals")?, "signals")?, decode_scalar(field(p, "prob")?)?));
            }
        }
        let g = InformationStructure::new(mu, signal_sets, kernel)?;
        for (key, expected) in [("n", g.agents()), ("m", g.states())] {
            if let Some(x) = opt_field(v, key) {
                if count(x, key)? != expected {
                    return Err(parse_err(format!("declared {key} disagrees with the structure")));
                }
            }
        }
        Ok(g)
    }
}

impl<T: Scalar> Json for SymmetricScheme<T> {
    fn encode(&self, f: NumberFormat) -> Value {
        json!({
            "mu": self.prior().encode(f),
            "per_state": self.per_state().iter().map(|q| q.encode(f)).collect::<Vec<_>>(),
        })
    }

    fn decode(v: &Value) -> Result<Self> {
        SymmetricScheme::new(
            Prior::decode(field(v, "mu")?)?,
            array(field(v, "per_state")?, "per_state")?
                .iter()
                .map(PopulationLaw::decode)
                .collect::<Result<Vec<_>>>()?,
        )
    }
}

impl<T: Scalar> Json for PolarizationReport<T> {
    fn encode(&self, f: NumberFormat) -> Value {
        let mut o = json!({
            "value": encode_scalar(&self.value, f),
            "lower_bound": encode_scalar(&self.lower_bound, f),
            "upper_bound": encode_scalar(&self.upper_bound, f),
        });
        if let Some(g) = &self.structure {
            o["structure"] = g.encode(f);
        }
        o
    }

    fn decode(v: &Value) -> Result<Self> {
        Ok(PolarizationReport {
            value: decode_scalar(field(v, "value")?)?,
            lower_bound: decode_scalar(field(v, "lower_bound")?)?,
            upper_bound: decode_scalar(field(v, "upper_bound")?)?,
            structure: opt_field(v, "structure").map(InformationStructure::decode).transpose()?,
        })
    }
}

impl<T: Scalar> Json for SenderUtility<T> {
    fn encode(&self, f: NumberFormat) -> Value {
        encode_scalars(self.values(), f)
    }

    fn decode(v: &Value) -> Result<Self> {
        SenderUtility::new(decode_scalars(v, "utility")?)
    }
}

impl<T: Scalar> Json for PersuasionSolution<T> {
    fn encode(&self, f: NumberFormat) -> Value {
        json!({
            "value": encode_scalar(&self.value, f),
            "Q": encode_scalar_measure(&self.adoption_law_omega0, f),
            "scheme": self.scheme.encode(f),
        })
    }

    fn decode(v: &Value) -> Result<Self> {
        Ok(PersuasionSolution {
            value: decode_scalar(field(v, "value")?)?,
            adoption_law_omega0: decode_scalar_measure(field(v, "Q")?)?,
            scheme: SymmetricScheme::decode(field(v, "scheme")?)?,
        })
    }
}

impl<T: Scalar> Json for SymmetricProduct<T> {
    fn encode(&self, f: NumberFormat) -> Value {
        json!({"n": self.n(), "q": self.q().encode(f)})
    }

    fn decode(v: &Value) -> Result<Self> {
        SymmetricProduct::new(DiscreteMeasure::decode(field(v, "q")?)?, count(field(v, "n")?, "n")?)
    }
}

/// A law together with the prior it is judged against.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem<T> {
    pub mu: Prior<T>,
    pub law: PopulationLaw<T>,
}

impl<T: Scalar> Json for Problem<T> {
    fn encode(&self, f: NumberFormat) -> Value {
        json!({"mu": self.mu.encode(f), "law": self.law.encode(f)})
    }

    fn decode(v: &Value) -> Result<Self> {
        Ok(Problem {
            mu: Prior::decode(field(v, "mu")?)?,
            law: PopulationLaw::decode(field(v, "law")?)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::check_feasible;
    use crate::Rational;

    fn r(s: &str) -> Rational {
        Rational::parse_exact(s).unwrap()
    }

    fn roundtrip<X: Json + PartialEq + std::fmt::Debug>(x: &X) {
        let text = serde_json::to_string(&x.to_json()).unwrap();
        let back = X::decode(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(&back, x);
    }

    #[test]
    fn scalars_parse_exactly() {
        let v: Value = serde_json::from_str(r#"[0.35, "7/20", 1, "1e-2"]"#).unwrap();
        let xs: Vec<Rational> = decode_scalars(&v, "xs").unwrap();
        assert_eq!(xs, vec![r("7/20"), r("7/20"), r("1"), r("1/100")]);
        assert_eq!(encode_scalar(&r("1/8"), NumberFormat::Decimal(3)).to_string(), "0.125");
        assert!(decode_scalar::<Rational>(&json!(true)).is_err());
    }

    #[test]
    fn binary_shorthand() {
        let b: Belief<Rational> = Belief::decode(&json!("1/4")).unwrap();
        assert_eq!(b, Belief::binary(r("1/4")).unwrap());
    }

    #[test]
    fn verdicts_roundtrip() {
        let text = r#"{"mu": "1/2", "law": {"n": 3, "atoms": [
            {"empirical": ["1/3", "1/3", "2/3"], "weight": "1/2"},
            {"empirical": {"counts": [{"belief": "2/3", "count": 2}, {"belief": "1/3", "count": 1}]}, "weight": "1/2"}
        ]}}"#;
        let pr: Problem<Rational> = Problem::decode(&serde_json::from_str(text).unwrap()).unwrap();
        roundtrip(&pr);
        let v = check_feasible(&pr.law, &pr.mu);
        assert!(v.feasible);
        roundtrip(&v);
        let bad = check_feasible(&pr.law, &Prior::binary(r("1/3")).unwrap());
        roundtrip(&bad);
        assert_eq!(bad.to_json()["certificate"]["kind"], "MeanMismatch");
    }

    #[test]
    fn declared_n_must_match() {
        let text = r#"{"n": 4, "atoms": [{"empirical": ["1/2", "1/2"], "weight": 1}]}"#;
        assert!(PopulationLaw::<Rational>::decode(&serde_json::from_str(text).unwrap()).is_err());
    }
}
