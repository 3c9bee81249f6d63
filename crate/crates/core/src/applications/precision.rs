//! Node-wise sparse precision matrix estimation.
//!
//! Each standardized column is regressed on all the others with a pathwise
//! square-root Lasso. With coefficients `b^(j)` and noise estimate
//! `sigma_j`, column `j` of the raw estimate is `1 / sigma_j^2` on the
//! diagonal and `-b^(j)_k / sigma_j^2` elsewhere. The estimate is then
//! symmetrized by averaging, and an edge is kept only when both directed
//! regressions selected it.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{norm2, DenseMatrix, Problem};
use crate::loss::LossKind;
use crate::path::{solve_path, PathConfig, PathOutcome};

#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionEstimate {
    pub d: usize,
    /// Symmetric `d x d`, row-major, in the units of the original data.
    pub omega: Vec<f64>,
    /// Symmetric `d x d` edge indicator; the diagonal is `false`.
    pub support: Vec<bool>,
    /// Noise estimate of every standardized node-wise regression.
    pub sigma_hat: Vec<f64>,
    /// Columns whose regression failed; they fall back to a diagonal-only entry.
    pub failed_columns: Vec<usize>,
}

impl PrecisionEstimate {
    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.omega[k * self.d + j]
    }

    pub fn is_edge(&self, k: usize, j: usize) -> bool {
        self.support[k * self.d + j]
    }

    /// Edges `(k, j)` with `k < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let d = self.d;
        (0..d)
            .flat_map(|k| (k + 1..d).map(move |j| (k, j)))
            .filter(|&(k, j)| self.is_edge(k, j))
            .collect()
    }

    /// Fraction of the `d (d - 1) / 2` possible edges that are present.
    pub fn sparsity(&self) -> f64 {
        let pairs = self.d * (self.d - 1) / 2;
        self.edges().len() as f64 / pairs as f64
    }
}

/// Centers every column and scales it to `||column|| = sqrt(n)`. Returns the
/// standardized matrix and the scale factors.
pub fn standardize(data: &DenseMatrix) -> Result<(DenseMatrix, Vec<f64>)> {
    let (n, d) = (data.rows(), data.cols());
    let mut means = vec![0.0; d];
    for i in 0..n {
        for (m, v) in means.iter_mut().zip(data.row(i)) {
            *m += v / n as f64;
        }
    }
    let mut scales = vec![0.0; d];
    for i in 0..n {
        for ((s, v), m) in scales.iter_mut().zip(data.row(i)).zip(&means) {
            *s += (v - m) * (v - m);
        }
    }
    for (j, s) in scales.iter_mut().enumerate() {
        *s = (*s / n as f64).sqrt();
        if !(*s > 0.0) {
            return Err(Error::invalid(format!("column {j} has zero variance")));
        }
    }
    let out = DenseMatrix::from_fn(n, d, |i, j| (data.get(i, j) - means[j]) / scales[j])?;
    Ok((out, scales))
}

struct NodeFit {
    coefficients: Vec<f64>,
    sigma: f64,
    failed: bool,
}

fn fit_node(z: &DenseMatrix, j: usize, cfg: &PathConfig) -> Result<NodeFit> {
    let target = z.column(j);
    let design = z.without_column(j)?;
    let n = z.rows();
    let fallback = || NodeFit {
        coefficients: vec![0.0; design.cols()],
        sigma: norm2(&target) / (n as f64).sqrt(),
        failed: true,
    };
    let problem = Problem::new(design.clone(), target.clone())?;
    let path = match solve_path(&problem, LossKind::SqrtL2, cfg) {
        Ok(p) => p,
        Err(Error::NonsmoothRegion { .. }) => return Ok(fallback()),
        Err(e) => return Err(e),
    };
    match (path.outcome, path.final_result()) {
        (PathOutcome::Completed, Some(res)) => Ok(NodeFit {
            sigma: res.sigma_hat(n),
            coefficients: res.theta_hat.clone(),
            failed: false,
        }),
        _ => Ok(fallback()),
    }
}

/// Estimates the precision matrix of the rows of `data` with the target
/// regularization `lambda` for every node-wise regression.
///
/// Column regressions run on the current rayon pool.
pub fn estimate_precision(data: &DenseMatrix, lambda: f64, path_cfg: &PathConfig) -> Result<PrecisionEstimate> {
    let (n, d) = (data.rows(), data.cols());
    if d < 2 {
        return Err(Error::invalid("precision estimation needs at least two columns"));
    }
    if n < 2 {
        return Err(Error::invalid("precision estimation needs at least two samples"));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda must be finite and positive"));
    }
    let (z, scales) = standardize(data)?;
    let cfg = PathConfig {
        lambda_target: Some(lambda),
        ..path_cfg.clone()
    };
    let fits: Vec<NodeFit> = (0..d)
        .into_par_iter()
        .map(|j| fit_node(&z, j, &cfg))
        .collect::<Result<_>>()?;

    // raw[k][j]: entry k of column j in standardized units
    let mut raw = vec![0.0; d * d];
    for (j, fit) in fits.iter().enumerate() {
        let inv = 1.0 / (fit.sigma * fit.sigma);
        raw[j * d + j] = inv;
        for (pos, &b) in fit.coefficients.iter().enumerate() {
            let k = if pos < j { pos } else { pos + 1 };
            raw[k * d + j] = -b * inv;
        }
    }

    let mut omega = vec![0.0; d * d];
    let mut support = vec![false; d * d];
    for k in 0..d {
        omega[k * d + k] = raw[k * d + k] / (scales[k] * scales[k]);
        for j in k + 1..d {
            let (a, b) = (raw[k * d + j], raw[j * d + k]);
            let edge = a != 0.0 && b != 0.0;
            let v = if edge { 0.5 * (a + b) / (scales[k] * scales[j]) } else { 0.0 };
            omega[k * d + j] = v;
            omega[j * d + k] = v;
            support[k * d + j] = edge;
            support[j * d + k] = edge;
        }
    }
    Ok(PrecisionEstimate {
        d,
        omega,
        support,
        sigma_hat: fits.iter().map(|f| f.sigma).collect(),
        failed_columns: fits.iter().enumerate().filter(|(_, f)| f.failed).map(|(j, _)| j).collect(),
    })
}
