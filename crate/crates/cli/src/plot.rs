//! Minimal SVG charts: labelled bars and step/polyline curves.

use std::fmt::Write;

const W: f64 = 480.0;
const H: f64 = 300.0;
const PAD: f64 = 40.0;

fn frame(x_label: &str, y_label: &str, body: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{PAD},{PAD} V{b} H{r}" fill="none" stroke="black"/>"#,
        b = H - PAD,
        r = W - PAD
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, W / 2.0, H - 8.0);
    let _ = writeln!(s, r#"<text x="12" y="{}" transform="rotate(-90 12 {})" text-anchor="middle">{y_label}</text>"#, H / 2.0, H / 2.0);
    s.push_str(body);
    s.push_str("</svg>\n");
    s
}

fn y_pos(y: f64, (lo, hi): (f64, f64)) -> f64 {
    let t = if hi > lo { (y - lo) / (hi - lo) } else { 0.0 };
    H - PAD - t * (H - 2.0 * PAD)
}

pub fn bars(rows: &[(String, f64)], x_label: &str, y_label: &str, range: (f64, f64)) -> String {
    let mut body = String::new();
    let slot = (W - 2.0 * PAD) / rows.len().max(1) as f64;
    for (i, (label, y)) in rows.iter().enumerate() {
        let x = PAD + slot * i as f64 + slot * 0.15;
        let top = y_pos(*y, range);
        let _ = writeln!(
            body,
            r#"<rect x="{x:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="steelblue"><title>{y:.4}</title></rect>"#,
            slot * 0.7,
            H - PAD - top
        );
        let _ = writeln!(body, r#"<text x="{:.2}" y="{}" text-anchor="middle">{label}</text>"#, x + slot * 0.35, H - PAD + 14.0);
    }
    frame(x_label, y_label, &body)
}

/// Each series is (name, points, stepped). Points are in the unit square.
pub fn lines(series: &[(&str, Vec<(f64, f64)>, bool)], x_label: &str, y_label: &str) -> String {
    let colours = ["steelblue", "firebrick", "darkgreen"];
    let x_pos = |x: f64| PAD + x * (W - 2.0 * PAD);
    let (lo, hi) = series
        .iter()
        .flat_map(|(_, pts, _)| pts.iter().map(|p| p.1))
        .fold((0.0f64, 1.0f64), |(lo, hi), y| (lo.min(y), hi.max(y)));
    let mut body = String::new();
    for (k, (name, pts, stepped)) in series.iter().enumerate() {
        let mut d = String::new();
        for (i, &(x, y)) in pts.iter().enumerate() {
            let (px, py) = (x_pos(x), y_pos(y, (lo, hi)));
            if i == 0 {
                let _ = write!(d, "M{px:.2},{py:.2}");
            } else if *stepped {
                let _ = write!(d, " H{px:.2} V{py:.2}");
            } else {
                let _ = write!(d, " L{px:.2},{py:.2}");
            }
        }
        let colour = colours[k % colours.len()];
        let _ = writeln!(body, r#"<path d="{d}" fill="none" stroke="{colour}" stroke-width="2"><title>{name}</title></path>"#);
        let _ = writeln!(body, r#"<text x="{}" y="{}" fill="{colour}">{name}</text>"#, W - PAD + 4.0, PAD + 14.0 * k as f64);
    }
    frame(x_label, y_label, &body)
}
