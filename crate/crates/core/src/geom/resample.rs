use super::{cosine_grid, AirfoilSection, GeomError, Pchip, RawAirfoil};

/// Backwards steps in x smaller than this are treated as digitisation noise
/// and dropped; larger ones make the surface multi-valued.
const X_REVERSAL_TOL: f64 = 1e-7;

/// Resample raw coordinates onto the canonical cosine grid.
///
/// The section is translated, rotated and scaled so the LE (the point
/// farthest from the TE midpoint) lands on (0,0) and the TE on (1,0). Each
/// surface is interpolated with a monotone cubic in `sqrt(x)`, which keeps
/// the round nose well resolved on sparse files.
pub fn resample_to_section(raw: &RawAirfoil) -> Result<AirfoilSection, GeomError> {
    resample_with_residual(raw).map(|(s, _)| s)
}

/// As [`resample_to_section`], also returning the largest deviation of the
/// resampled section from the aligned raw points.
pub fn resample_with_residual(raw: &RawAirfoil) -> Result<(AirfoilSection, f64), GeomError> {
    let pts = &raw.points;
    if pts.len() < 3 {
        return Err(GeomError::MalformedFile("fewer than three points".into()));
    }
    let first = pts[0];
    let last = pts[pts.len() - 1];
    let te = ((first.0 + last.0) / 2.0, (first.1 + last.1) / 2.0);
    let (le_idx, chord) = pts
        .iter()
        .enumerate()
        .map(|(i, p)| (i, ((p.0 - te.0).powi(2) + (p.1 - te.1).powi(2)).sqrt()))
        .fold((0, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
    if chord < 1e-6 {
        return Err(GeomError::DegenerateChord);
    }
    let le = pts[le_idx];
    let (cos_a, sin_a) = ((te.0 - le.0) / chord, (te.1 - le.1) / chord);
    let align = |p: &(f64, f64)| {
        let dx = p.0 - le.0;
        let dy = p.1 - le.1;
        ((cos_a * dx + sin_a * dy) / chord, (-sin_a * dx + cos_a * dy) / chord)
    };
    let aligned: Vec<(f64, f64)> = pts.iter().map(align).collect();

    let mut first_half: Vec<(f64, f64)> = aligned[..=le_idx].iter().rev().copied().collect();
    let mut second_half: Vec<(f64, f64)> = aligned[le_idx..].to_vec();
    if first_half.len() < 2 || second_half.len() < 2 {
        return Err(GeomError::NonFunctionSurface("upper"));
    }
    if mean_y(&first_half) < mean_y(&second_half) {
        std::mem::swap(&mut first_half, &mut second_half);
    }
    let upper = clean_surface(first_half, "upper")?;
    let lower = clean_surface(second_half, "lower")?;

    let x = cosine_grid();
    let up = surface_interpolant(&upper);
    let lo = surface_interpolant(&lower);
    let n = x.len();
    let mut y_upper: Vec<f64> = x.iter().map(|&xi| up.eval(xi.sqrt())).collect();
    let mut y_lower: Vec<f64> = x.iter().map(|&xi| lo.eval(xi.sqrt())).collect();
    y_upper[0] = 0.0;
    y_lower[0] = 0.0;
    y_upper[n - 1] = 0.0;
    y_lower[n - 1] = 0.0;
    let section = AirfoilSection::new(x, y_upper, y_lower);

    let su: Vec<f64> = section.x.iter().map(|v| v.sqrt()).collect();
    let back_u = Pchip::new(su.clone(), section.y_upper.clone());
    let back_l = Pchip::new(su, section.y_lower.clone());
    let residual = upper
        .iter()
        .map(|p| (back_u.eval(p.0.sqrt()) - p.1).abs())
        .chain(lower.iter().map(|p| (back_l.eval(p.0.sqrt()) - p.1).abs()))
        .fold(0.0, f64::max);
    Ok((section, residual))
}

fn mean_y(pts: &[(f64, f64)]) -> f64 {
    pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64
}

/// Order check, TE closure and x-stretch so the surface spans exactly [0, 1].
fn clean_surface(pts: Vec<(f64, f64)>, which: &'static str) -> Result<Vec<(f64, f64)>, GeomError> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for p in pts {
        match out.last() {
            None => out.push(p),
            Some(prev) => {
                let dx = p.0 - prev.0;
                if dx > 1e-12 {
                    out.push(p);
                } else if dx < -X_REVERSAL_TOL {
                    return Err(GeomError::NonFunctionSurface(which));
                }
            }
        }
    }
    if out.len() < 2 {
        return Err(GeomError::NonFunctionSurface(which));
    }
    let (x0, y0) = out[0];
    let (x_end, _) = out[out.len() - 1];
    let span = x_end - x0;
    if span <= 0.0 {
        return Err(GeomError::NonFunctionSurface(which));
    }
    for p in out.iter_mut() {
        p.0 = (p.0 - x0) / span;
        p.1 -= y0;
    }
    // close a blunt trailing edge with a linear shear
    let y_end = out[out.len() - 1].1;
    for p in out.iter_mut() {
        p.1 -= p.0 * y_end;
    }
    let last = out.len() - 1;
    out[0] = (0.0, 0.0);
    out[last] = (1.0, 0.0);
    Ok(out)
}

fn surface_interpolant(pts: &[(f64, f64)]) -> Pchip {
    Pchip::new(pts.iter().map(|p| p.0.sqrt()).collect(), pts.iter().map(|p| p.1).collect())
}
