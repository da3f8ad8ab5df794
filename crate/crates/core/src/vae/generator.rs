use super::latent::LatentBox;
use super::model::Model;
use crate::geom::{decompose, AirfoilSection};
use crate::param::{DesignVector, ParamError, Parameterization};

/// A trained model used as a parameterization: the design vector is the
/// full latent vector and the search box defaults to the latent box.
#[derive(Debug, Clone)]
pub struct AirfoilGenerator {
    pub model: Model,
    pub latent_box: LatentBox,
    bounds: Vec<(f64, f64)>,
}

impl AirfoilGenerator {
    pub fn new(model: Model, latent_box: LatentBox) -> Self {
        let bounds = latent_box.bounds();
        Self { model, latent_box, bounds }
    }

    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.bounds = bounds;
        self
    }
}

impl Parameterization for AirfoilGenerator {
    fn name(&self) -> String {
        format!("AG-{}", self.model.latent_dim())
    }

    fn n_dv(&self) -> usize {
        self.model.latent_dim()
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        self.bounds.clone()
    }

    fn decode(&self, dv: &DesignVector) -> Result<AirfoilSection, ParamError> {
        self.check_len(dv)?;
        self.model.decode_section(&dv.values).map_err(|e| ParamError::Model(e.to_string()))
    }

    /// Encoder means, the natural starting point for an inverse fit.
    fn fit(&self, section: &AirfoilSection) -> Result<DesignVector, ParamError> {
        let code = self.model.encode(&decompose(section)).map_err(|e| ParamError::Model(e.to_string()))?;
        Ok(code.means().into())
    }
}
