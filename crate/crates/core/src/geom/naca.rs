//! Closed-form NACA four-digit sections (closed trailing edge variant).

use super::{AirfoilSection, RawAirfoil};

/// Full thickness `t(x)` of a NACA 00xx section with thickness ratio `tc`.
pub fn naca4_thickness(tc: f64, x: f64) -> f64 {
    10.0 * tc
        * (0.2969 * x.sqrt() - 0.1260 * x - 0.3516 * x * x + 0.2843 * x.powi(3) - 0.1036 * x.powi(4))
}

/// Mean line `(c, dc/dx)` for maximum camber `m` at chordwise position `p`.
pub fn naca4_camber(m: f64, p: f64, x: f64) -> (f64, f64) {
    if m == 0.0 || p <= 0.0 {
        return (0.0, 0.0);
    }
    if x < p {
        (m / (p * p) * (2.0 * p * x - x * x), 2.0 * m / (p * p) * (p - x))
    } else {
        let q = (1.0 - p).powi(2);
        (m / q * ((1.0 - 2.0 * p) + 2.0 * p * x - x * x), 2.0 * m / q * (p - x))
    }
}

/// Leading-edge radius of the four-digit family, `1.1019 tc^2`.
pub fn naca4_le_radius(tc: f64) -> f64 {
    1.1019 * tc * tc
}

/// Section with thickness stacked vertically on the mean line, sampled at
/// the given abscissae. Thickness/camber of the result are exactly the
/// closed-form distributions.
pub fn naca4_section(m: f64, p: f64, tc: f64, x: &[f64]) -> AirfoilSection {
    let mut yu = Vec::with_capacity(x.len());
    let mut yl = Vec::with_capacity(x.len());
    for &xi in x {
        let (c, _) = naca4_camber(m, p, xi);
        let t = naca4_thickness(tc, xi);
        yu.push(c + t / 2.0);
        yl.push(c - t / 2.0);
    }
    AirfoilSection::new(x.to_vec(), yu, yl)
}

/// Classic construction with thickness applied normal to the mean line,
/// in Selig order with `n` cosine-spaced stations per surface.
pub fn naca4_raw(m: f64, p: f64, tc: f64, n: usize) -> RawAirfoil {
    let stations: Vec<f64> = (0..n)
        .map(|i| (1.0 - (std::f64::consts::PI * i as f64 / (n - 1) as f64).cos()) / 2.0)
        .collect();
    let mut upper = Vec::with_capacity(n);
    let mut lower = Vec::with_capacity(n);
    for &x in &stations {
        let (c, dc) = naca4_camber(m, p, x);
        let yt = naca4_thickness(tc, x) / 2.0;
        let th = dc.atan();
        upper.push((x - yt * th.sin(), c + yt * th.cos()));
        lower.push((x + yt * th.sin(), c - yt * th.cos()));
    }
    let mut points: Vec<(f64, f64)> = upper.into_iter().rev().collect();
    points.extend(lower.into_iter().skip(1));
    let name = format!(
        "NACA {}{}{:02}",
        (m * 100.0).round() as i64,
        (p * 10.0).round() as i64,
        (tc * 100.0).round() as i64
    );
    RawAirfoil { name, points }
}
