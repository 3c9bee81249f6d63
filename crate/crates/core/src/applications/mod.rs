//! Extensions built on the square-root loss: calibrated multivariate
//! regression, node-wise sparse precision matrix estimation and the plug-in
//! noise level estimate.

pub mod cmr;
pub mod precision;

pub use cmr::{default_cmr_lambda, solve_cmr, CmrResult, CoefMatrix, MultiResponse};
pub use precision::{estimate_precision, PrecisionEstimate};

use crate::error::Result;
use crate::linalg::{norm2, Problem};

/// `||y - X theta_hat|| / sqrt(n)`.
pub fn estimate_sigma(problem: &Problem, theta_hat: &[f64]) -> Result<f64> {
    Ok(norm2(&problem.residual(theta_hat)?) / problem.sqrt_n())
}

/// Proximal map of `t ||.||_2`: `max(1 - t / ||row||, 0) row`.
pub fn group_soft_threshold(row: &[f64], t: f64) -> Vec<f64> {
    let mut out = row.to_vec();
    group_soft_threshold_in_place(&mut out, t);
    out
}

pub(crate) fn group_soft_threshold_in_place(row: &mut [f64], t: f64) {
    let norm = norm2(row);
    let scale = if norm > t { 1.0 - t / norm } else { 0.0 };
    row.iter_mut().for_each(|v| *v *= scale);
}
