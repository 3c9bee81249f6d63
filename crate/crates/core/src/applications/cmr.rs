//! Calibrated multivariate regression:
//!
//! ```text
//! min_Theta  (1/sqrt(n)) sum_k ||Y_k - X Theta_k||_2 + lambda sum_j ||Theta_j.||_2
//! ```
//!
//! solved by proximal gradient with row-wise group soft-thresholding, the same
//! adaptive step search as the single-task solver and pathwise warm starts.

use crate::error::{Error, Result};
use crate::linalg::{norm2, DenseMatrix};
use crate::path::{default_stages, lambda_grid, PathConfig};
use crate::loss::sqrt_bregman;

use super::group_soft_threshold_in_place;

const MAJORIZATION_SLACK: f64 = 1e-12;
const L_MAX: f64 = 1e8;
const L_MIN: f64 = 1e-12;
const MAX_HALVINGS: usize = 64;
const DEFAULT_MAX_ITER: usize = 100_000;

/// `n x m` response matrix stored by column.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiResponse {
    columns: Vec<Vec<f64>>,
}

impl MultiResponse {
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        if columns.is_empty() || n == 0 {
            return Err(Error::invalid("response matrix must be non-empty"));
        }
        for c in &columns {
            Error::check_len("response column", n, c.len())?;
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("response matrix"));
            }
        }
        Ok(Self { columns })
    }

    pub fn n(&self) -> usize {
        self.columns[0].len()
    }

    pub fn m(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, k: usize) -> &[f64] {
        &self.columns[k]
    }
}

/// `d x m` coefficient matrix, row-major so that each row `Theta_j.` is contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefMatrix {
    d: usize,
    m: usize,
    data: Vec<f64>,
}

impl CoefMatrix {
    pub fn zeros(d: usize, m: usize) -> Self {
        Self {
            d,
            m,
            data: vec![0.0; d * m],
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.data[j * self.m + k]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.data[j * self.m..(j + 1) * self.m]
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.d).map(|j| self.get(j, k)).collect()
    }

    /// Indices of rows with at least one nonzero entry.
    pub fn row_support(&self) -> Vec<usize> {
        (0..self.d).filter(|&j| self.row(j).iter().any(|v| *v != 0.0)).collect()
    }

    fn group_norm(&self) -> f64 {
        self.data.chunks_exact(self.m).map(norm2).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmrResult {
    pub theta: CoefMatrix,
    pub lambdas: Vec<f64>,
    /// Group KKT residual at the final stage.
    pub omega: f64,
    pub objective: f64,
    /// Iterations per stage.
    pub stage_iterations: Vec<usize>,
    pub converged: bool,
    /// Objective after every accepted iteration, per stage (when tracing).
    pub objective_trace: Option<Vec<Vec<f64>>>,
}

impl CmrResult {
    pub fn total_iterations(&self) -> usize {
        self.stage_iterations.iter().sum()
    }
}

struct Eval {
    theta: CoefMatrix,
    residuals: Vec<Vec<f64>>,
    norms: Vec<f64>,
    objective: f64,
}

struct Cmr<'a> {
    x: &'a DenseMatrix,
    y: &'a MultiResponse,
    sqrt_n: f64,
    floor: f64,
}

impl Cmr<'_> {
    fn eval(&self, theta: CoefMatrix, lambda: f64, stage: usize) -> Result<Eval> {
        let mut residuals = Vec::with_capacity(theta.m);
        let mut norms = Vec::with_capacity(theta.m);
        for k in 0..theta.m {
            let mut r = self.x.mat_vec(&theta.column(k))?;
            for (ri, yi) in r.iter_mut().zip(self.y.column(k)) {
                *ri = yi - *ri;
            }
            let nr = norm2(&r);
            if nr / self.sqrt_n < self.floor {
                return Err(Error::TaskNonsmooth { task: k, stage });
            }
            residuals.push(r);
            norms.push(nr);
        }
        let loss = norms.iter().sum::<f64>() / self.sqrt_n;
        Ok(Eval {
            objective: loss + lambda * theta.group_norm(),
            theta,
            residuals,
            norms,
        })
    }

    fn gradient(&self, e: &Eval) -> CoefMatrix {
        let (d, m) = (e.theta.d, e.theta.m);
        let mut g = CoefMatrix::zeros(d, m);
        for k in 0..m {
            let col = self.x.mat_t_vec(&e.residuals[k]).expect("dimensions checked");
            let s = -1.0 / (self.sqrt_n * e.norms[k]);
            for j in 0..d {
                g.data[j * m + k] = s * col[j];
            }
        }
        g
    }
}

fn group_kkt(grad: &CoefMatrix, theta: &CoefMatrix, lambda: f64) -> f64 {
    (0..theta.d)
        .map(|j| {
            let g = grad.row(j);
            let t = theta.row(j);
            let tn = norm2(t);
            if tn > 0.0 {
                let v: Vec<f64> = g.iter().zip(t).map(|(a, b)| a + lambda * b / tn).collect();
                norm2(&v)
            } else {
                (norm2(g) - lambda).max(0.0)
            }
        })
        .fold(0.0_f64, f64::max)
}

fn prox_step(theta: &CoefMatrix, grad: &CoefMatrix, l: f64, lambda: f64) -> CoefMatrix {
    let mut out = theta.clone();
    for (o, g) in out.data.iter_mut().zip(&grad.data) {
        *o -= g / l;
    }
    for row in out.data.chunks_exact_mut(theta.m) {
        group_soft_threshold_in_place(row, lambda / l);
    }
    out
}

/// `Q - F` at `new`, summed over tasks without cancelling loss values.
fn majorization_gap(x: &DenseMatrix, sqrt_n: f64, base: &Eval, new: &CoefMatrix, l: f64) -> f64 {
    let delta: Vec<f64> = new.data.iter().zip(&base.theta.data).map(|(a, b)| a - b).collect();
    let m = new.m;
    let mut divergence = 0.0;
    for k in 0..m {
        let col: Vec<f64> = delta.iter().skip(k).step_by(m).copied().collect();
        let z = x.mat_vec_sparse(&col);
        divergence += sqrt_bregman(&base.residuals[k], base.norms[k], &z);
    }
    0.5 * l * delta.iter().map(|v| v * v).sum::<f64>() - divergence / sqrt_n
}

struct StageOutcome {
    point: Eval,
    omega: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

impl Cmr<'_> {
    fn solve_stage(&self, start: Eval, lambda: f64, eps: f64, stage: usize, max_iter: usize) -> Result<StageOutcome> {
        let mut point = self.eval(start.theta, lambda, stage)?;
        let mut grad = self.gradient(&point);
        let mut omega = group_kkt(&grad, &point.theta, lambda);
        let mut trace = vec![point.objective];
        let mut l: f64 = 1.0;
        let mut t = 0;
        while omega > eps && t < max_iter {
            t += 1;
            let mut trials: Vec<(f64, Eval, f64)> = Vec::new();
            let eval_at = |l: f64, trials: &mut Vec<(f64, Eval, f64)>| -> Result<usize> {
                if let Some(i) = trials.iter().position(|tr| tr.0 == l) {
                    return Ok(i);
                }
                let cand = prox_step(&point.theta, &grad, l, lambda);
                let gap = majorization_gap(self.x, self.sqrt_n, &point, &cand, l);
                trials.push((l, self.eval(cand, lambda, stage)?, gap));
                Ok(trials.len() - 1)
            };
            let mut lt = l;
            let mut halvings = 0;
            loop {
                let i = eval_at(lt, &mut trials)?;
                if trials[i].2 > 0.0 && halvings < MAX_HALVINGS && lt / 2.0 >= L_MIN {
                    lt /= 2.0;
                    halvings += 1;
                } else {
                    break;
                }
            }
            l = (2.0 * lt).min(L_MAX);
            let i = loop {
                let i = eval_at(l, &mut trials)?;
                if trials[i].2 < -MAJORIZATION_SLACK && l < L_MAX {
                    l = (2.0 * l).min(L_MAX);
                } else {
                    break i;
                }
            };
            point = trials.swap_remove(i).1;
            grad = self.gradient(&point);
            omega = group_kkt(&grad, &point.theta, lambda);
            trace.push(point.objective);
        }
        Ok(StageOutcome {
            converged: omega <= eps,
            point,
            omega,
            iterations: t,
            trace,
        })
    }
}

/// `(sqrt(m) + sqrt(2 log d)) / sqrt(n)`: the level above which the row
/// norms of `m` pure-noise gradient coordinates stay with high probability.
pub fn default_cmr_lambda(n: usize, d: usize, m: usize) -> f64 {
    ((m as f64).sqrt() + (2.0 * (d.max(2) as f64).ln()).sqrt()) / (n as f64).sqrt()
}

/// Row-wise `l_{1,2}` penalized multitask square-root regression along a
/// pathwise schedule ending at `lambda`. `path_cfg.algo` is ignored: the
/// solver is proximal gradient only.
///
/// A task whose residual reaches the nonsmooth region aborts the solve with
/// [`Error::TaskNonsmooth`].
pub fn solve_cmr(x: &DenseMatrix, y: &MultiResponse, lambda: f64, path_cfg: &PathConfig) -> Result<CmrResult> {
    path_cfg.validate()?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda must be finite and positive"));
    }
    Error::check_len("multitask response rows", x.rows(), y.n())?;
    let (d, m) = (x.cols(), y.m());
    let sqrt_n = (y.n() as f64).sqrt();
    let y_scale = (0..m).map(|k| norm2(y.column(k)) / sqrt_n).fold(0.0, f64::max);
    let solver = Cmr {
        x,
        y,
        sqrt_n,
        floor: 1e-8 * (y_scale + 1.0),
    };

    let zero = solver.eval(CoefMatrix::zeros(d, m), lambda, 0)?;
    let g0 = solver.gradient(&zero);
    let lambda0 = (0..d).map(|j| norm2(g0.row(j))).fold(0.0, f64::max);
    let lambdas = if lambda >= lambda0 {
        vec![lambda]
    } else {
        let stages = path_cfg.n_stages.unwrap_or_else(|| default_stages(lambda0, lambda));
        lambda_grid(lambda0, lambda, stages)?
    };
    let stage_lambdas: Vec<f64> = if lambdas.len() == 1 { lambdas.clone() } else { lambdas[1..].to_vec() };

    let max_iter = path_cfg.max_iter.unwrap_or(DEFAULT_MAX_ITER);
    let mut point = zero;
    let mut stage_iterations = Vec::with_capacity(stage_lambdas.len());
    let mut traces = Vec::new();
    let mut last = None;
    for (k, &lam) in stage_lambdas.iter().enumerate() {
        let is_last = k + 1 == stage_lambdas.len();
        let out = solver.solve_stage(point, lam, path_cfg.stage_eps(lam, is_last), k + 1, max_iter)?;
        stage_iterations.push(out.iterations);
        if path_cfg.trace {
            traces.push(out.trace.clone());
        }
        point = out.point;
        last = Some((out.omega, out.converged));
    }
    let (omega, converged) = last.expect("at least one stage");
    Ok(CmrResult {
        objective: point.objective,
        theta: point.theta,
        lambdas,
        omega,
        stage_iterations,
        converged,
        objective_trace: path_cfg.trace.then_some(traces),
    })
}
