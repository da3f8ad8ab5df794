use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::geom::AirfoilSection;
use crate::param::{DesignVector, ParamError, Parameterization};

/// Mean airfoil plus orthonormal modes of the concatenated
/// `(y_upper, y_lower)` vectors of a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdModel {
    pub x: Vec<f64>,
    pub mean: Vec<f64>,
    /// One mode per entry, each of length `2 * x.len()`.
    pub modes: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
    pub bounds: Option<Vec<(f64, f64)>>,
}

fn stack(s: &AirfoilSection) -> Vec<f64> {
    s.y_upper.iter().chain(&s.y_lower).copied().collect()
}

/// Numerical rank used to reject over-long mode requests.
fn rank(sv: &[f64], dims: (usize, usize)) -> usize {
    let tol = sv.first().copied().unwrap_or(0.0) * dims.0.max(dims.1) as f64 * f64::EPSILON * 16.0;
    sv.iter().filter(|&&s| s > tol && s > 0.0).count()
}

/// Fit the `m` leading modes.
pub fn svd_fit(sections: &[AirfoilSection], m: usize) -> Result<SvdModel, ParamError> {
    if sections.is_empty() || sections.len() < m {
        return Err(ParamError::RankDeficient { requested: m, rank: sections.len() });
    }
    let x = sections[0].x.clone();
    let rows: Vec<Vec<f64>> = sections.iter().map(stack).collect();
    let d = rows[0].len();
    let n = rows.len() as f64;
    let mut mean = vec![0.0; d];
    for r in &rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v / n;
        }
    }
    let data = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j] - mean[j]);
    let svd = data.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let r = rank(&sv, (rows.len(), d));
    if m > r {
        return Err(ParamError::RankDeficient { requested: m, rank: r });
    }
    let modes = order[..m].iter().map(|&i| v_t.row(i).iter().copied().collect()).collect();
    Ok(SvdModel { x, mean, modes, singular_values: sv[..m].to_vec(), bounds: None })
}

/// Mean plus weighted modes.
pub fn svd_eval(model: &SvdModel, dv: &DesignVector) -> AirfoilSection {
    let mut y = model.mean.clone();
    for (a, phi) in dv.values.iter().zip(&model.modes) {
        for (yi, p) in y.iter_mut().zip(phi) {
            *yi += a * p;
        }
    }
    let n = model.x.len();
    AirfoilSection::new(model.x.clone(), y[..n].to_vec(), y[n..].to_vec())
}

impl SvdModel {
    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// Orthogonal projection of a section onto the modes.
    pub fn project(&self, s: &AirfoilSection) -> DesignVector {
        let y = stack(s);
        self.modes
            .iter()
            .map(|phi| phi.iter().zip(y.iter().zip(&self.mean)).map(|(p, (a, m))| p * (a - m)).sum())
            .collect::<Vec<f64>>()
            .into()
    }

    /// Keep only the leading `m` modes.
    pub fn truncated(&self, m: usize) -> Self {
        let mut t = self.clone();
        t.modes.truncate(m);
        t.singular_values.truncate(m);
        t.bounds = t.bounds.map(|mut b| {
            b.truncate(m);
            b
        });
        t
    }
}

impl Parameterization for SvdModel {
    fn name(&self) -> String {
        format!("SVD-{}", self.modes.len())
    }

    fn n_dv(&self) -> usize {
        self.modes.len()
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        self.bounds.clone().unwrap_or_else(|| {
            self.singular_values.iter().map(|s| (-s, *s)).collect()
        })
    }

    fn decode(&self, dv: &DesignVector) -> Result<AirfoilSection, ParamError> {
        self.check_len(dv)?;
        Ok(svd_eval(self, dv))
    }

    fn fit(&self, section: &AirfoilSection) -> Result<DesignVector, ParamError> {
        Ok(self.project(section))
    }
}
