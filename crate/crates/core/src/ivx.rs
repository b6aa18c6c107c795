//! IVX instruments.
//!
//! The instrument filters the regressor differences through a mildly
//! integrated autoregression, `z̃_t = R z̃_{t-1} + Δx_t` with
//! `R = 1 - c_z / T^δ` and `z̃_0 = 0`. Since `x_0 = 0` the first difference
//! is `Δx_1 = x_1`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernels::Mat;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IvxError {
    #[error("invalid IVX configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IvxConfig {
    pub delta: f64,
    pub c_z: f64,
}

impl Default for IvxConfig {
    fn default() -> Self {
        Self { delta: 0.95, c_z: 5.0 }
    }
}

impl IvxConfig {
    pub fn new(delta: f64, c_z: f64) -> Result<Self, IvxError> {
        let cfg = Self { delta, c_z };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), IvxError> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(IvxError::InvalidConfig(format!("delta = {} not in (0, 1)", self.delta)));
        }
        if !(self.c_z > 0.0 && self.c_z.is_finite()) {
            return Err(IvxError::InvalidConfig(format!("c_z = {} must be positive", self.c_z)));
        }
        Ok(())
    }

    /// Instrument root `1 - c_z / T^δ`.
    pub fn root(&self, t: usize) -> f64 {
        1.0 - self.c_z / (t as f64).powf(self.delta)
    }
}

/// IVX instruments for every column of `x`, using `T = x.rows()`.
pub fn build_instruments(x: &Mat, cfg: &IvxConfig) -> Mat {
    let (t, p) = (x.rows(), x.cols());
    let rho = cfg.root(t);
    let mut z = Mat::zeros(t, p);
    for j in 0..p {
        let mut prev_x = 0.0;
        let mut prev_z = 0.0;
        for s in 0..t {
            let cur = rho * prev_z + (x[(s, j)] - prev_x);
            z[(s, j)] = cur;
            prev_z = cur;
            prev_x = x[(s, j)];
        }
    }
    z
}

/// Prepends a column of ones.
pub fn augment_with_intercept(z: &Mat) -> Mat {
    let ones = Mat::column(&vec![1.0; z.rows()]);
    ones.hcat(z).expect("same row count")
}
