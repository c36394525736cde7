//! Pass thresholds shared by `verify` and the acceptance suite.

pub const STAR_VS_QUADRATURE: f64 = 1e-8;
pub const ASSOCIATIVITY: f64 = 1e-8;
pub const TRACE_CYCLIC: f64 = 1e-9;
pub const TRACE_POINTWISE: f64 = 1e-8;
pub const INVOLUTION: f64 = 1e-8;
pub const REPRESENTATION: f64 = 1e-7;
pub const CSTAR: f64 = 1e-6;
pub const WIGNER: f64 = 1e-8;
pub const MARGINAL: f64 = 1e-8;
pub const EIGEN_STAR: f64 = 1e-9;
pub const EIGEN_QHAT: f64 = 1e-10;
pub const ML_CLOSED_FORM: f64 = 1e-4;
pub const ML_CONVERGENCE_RATIO: f64 = 3.0;
pub const ML_MEANS: f64 = 1e-8;
pub const ML_SPREAD: f64 = 1e-6;
pub const ML_ORIGIN: f64 = 1e-10;
pub const GUP_SLACK_FLOOR: f64 = -1e-9;
pub const ASYMPTOTIC_SLOPE: f64 = 3.0;
pub const ASYMPTOTIC_SLOPE_TOL: f64 = 0.3;
pub const ML_GRID_REAL: f64 = 1e-12;
pub const ML_GRID_ODD: f64 = 1e-10;

/// Threshold set with a common multiplier, as set by `--tol-scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled(pub f64);

impl Scaled {
    pub fn of(&self, tol: f64) -> f64 {
        tol * self.0
    }
}

impl Default for Scaled {
    fn default() -> Self {
        Scaled(1.0)
    }
}
