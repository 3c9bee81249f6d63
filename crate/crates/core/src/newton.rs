//! Proximal Newton with a coordinate-descent subproblem solver.
//!
//! The l1-regularized quadratic model
//!
//! ```text
//! g^T (theta - theta_t) + 1/2 (theta - theta_t)^T H (theta - theta_t) + lambda ||theta||_1
//! ```
//!
//! is minimized with `H = c (X^T X - w w^T)` held implicitly. The solver keeps
//! `z = X (theta - theta_t)` and `s = w^T (theta - theta_t)` up to date so a
//! coordinate step costs `O(n)`. Sweeps alternate between the active set and
//! full passes that look for KKT violators.

use crate::error::{Error, Result};
use crate::linalg::{dot, nnz, norm1, DenseMatrix, Problem};
use crate::loss::{HessianFactors, LossKind, LossState};
use crate::prox::{directional, kkt_residual_from_grad, objective_of, soft_threshold_scalar, Regularizer};
use crate::solver::{IterRecord, SolveResult, SolveStatus, Tracer};

const REFRESH_EVERY: usize = 1000;
const DEGENERATE_RATIO: f64 = 1e-12;
const RIDGE_RATIO: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonConfig {
    pub lambda: f64,
    pub eps: f64,
    pub max_outer: usize,
    /// Backtracking factor.
    pub mu: f64,
    /// Armijo sufficient-decrease constant.
    pub alpha: f64,
    /// Subproblem KKT tolerance; `None` means `min(1e-8, 0.1 * eps)`.
    pub sub_tol: Option<f64>,
    pub max_sweeps: usize,
    pub max_backtracks: usize,
    pub trace: bool,
}

impl NewtonConfig {
    pub fn new(lambda: f64, eps: f64) -> Self {
        Self {
            lambda,
            eps,
            max_outer: 200,
            mu: 0.9,
            alpha: 0.25,
            sub_tol: None,
            max_sweeps: 10_000,
            max_backtracks: 100,
            trace: false,
        }
    }

    pub fn with_trace(mut self, trace: bool) -> Self {
        self.trace = trace;
        self
    }

    pub fn with_sub_tol(mut self, tol: f64) -> Self {
        self.sub_tol = Some(tol);
        self
    }

    pub fn sub_tol(&self) -> f64 {
        self.sub_tol.unwrap_or_else(|| (0.1 * self.eps).min(1e-8))
    }

    fn validate(&self) -> Result<Regularizer> {
        let reg = Regularizer::new(self.lambda)?;
        if !(self.eps > 0.0) {
            return Err(Error::invalid("eps must be positive"));
        }
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(Error::invalid("mu must lie in (0, 1)"));
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(Error::invalid("alpha must lie in (0, 1/2)"));
        }
        if !(self.sub_tol() > 0.0) {
            return Err(Error::invalid("subproblem tolerance must be positive"));
        }
        if self.max_outer == 0 || self.max_sweeps == 0 {
            return Err(Error::invalid("iteration budgets must be at least 1"));
        }
        Ok(reg)
    }
}

/// Running state of the coordinate-descent subproblem solver.
#[derive(Debug, Clone)]
pub struct SubproblemState {
    /// `theta - theta_t`
    pub d_vec: Vec<f64>,
    /// `X d_vec`
    pub z: Vec<f64>,
    /// `w^T d_vec`
    pub s: f64,
    pub active_set: Vec<usize>,
}

/// Outcome of [`solve_quadratic_l1`].
#[derive(Debug, Clone)]
pub struct SubproblemSolution {
    pub theta: Vec<f64>,
    /// Subproblem KKT residual at `theta`.
    pub kkt: f64,
    pub sweeps: usize,
    pub converged: bool,
}

struct Cd<'a> {
    x: &'a DenseMatrix,
    grad: &'a [f64],
    f: &'a HessianFactors,
    theta_t: &'a [f64],
    lambda: f64,
    curvature: Vec<f64>,
    theta: Vec<f64>,
    state: SubproblemState,
    updates: usize,
}

impl<'a> Cd<'a> {
    fn new(x: &'a DenseMatrix, grad: &'a [f64], f: &'a HessianFactors, theta_t: &'a [f64], lambda: f64) -> Self {
        let col_norms = x.col_sq_norms();
        let curvature = f
            .diag
            .iter()
            .zip(col_norms)
            .map(|(&h, &nj)| {
                let scale = f.c * nj;
                if h <= DEGENERATE_RATIO * scale {
                    h + RIDGE_RATIO * scale
                } else {
                    h
                }
            })
            .collect();
        Self {
            x,
            grad,
            f,
            theta_t,
            lambda,
            curvature,
            theta: theta_t.to_vec(),
            state: SubproblemState {
                d_vec: vec![0.0; theta_t.len()],
                z: vec![0.0; x.rows()],
                s: 0.0,
                active_set: Vec::new(),
            },
            updates: 0,
        }
    }

    fn refresh(&mut self) {
        let st = &mut self.state;
        for ((dv, th), t0) in st.d_vec.iter_mut().zip(&self.theta).zip(self.theta_t) {
            *dv = th - t0;
        }
        self.x.mat_vec_into(&st.d_vec, &mut st.z);
        st.s = dot(&self.f.w, &st.d_vec);
    }

    #[inline]
    fn coord_grad(&self, j: usize) -> f64 {
        self.grad[j] + self.f.c * (self.x.col_dot(j, &self.state.z) - self.f.w[j] * self.state.s)
    }

    /// Exact minimization along coordinate `j`; returns `h_j |delta|`.
    fn update(&mut self, j: usize) -> f64 {
        let h = self.curvature[j];
        if h <= 0.0 {
            // zero column: only the penalty depends on this coordinate
            self.theta[j] = 0.0;
            self.state.d_vec[j] = -self.theta_t[j];
            return 0.0;
        }
        let g = self.coord_grad(j);
        let old = self.theta[j];
        let new = soft_threshold_scalar(old - g / h, self.lambda / h);
        let delta = new - old;
        if delta == 0.0 {
            return 0.0;
        }
        self.theta[j] = new;
        self.state.d_vec[j] += delta;
        self.x.col_axpy(j, delta, &mut self.state.z);
        self.state.s += self.f.w[j] * delta;
        self.updates += 1;
        if self.updates % REFRESH_EVERY == 0 {
            self.refresh();
        }
        h * delta.abs()
    }

    fn violation(&self, j: usize) -> f64 {
        let g = if self.curvature[j] > 0.0 {
            self.coord_grad(j)
        } else {
            self.grad[j]
        };
        kkt_residual_from_grad(&[g], &self.theta[j..=j], self.lambda)
    }

    fn sweep(&mut self, coords: &[usize]) -> f64 {
        coords.iter().fold(0.0, |m, &j| m.max(self.update(j)))
    }

    fn solve(mut self, tol: f64, max_sweeps: usize) -> SubproblemSolution {
        let d = self.theta.len();
        let all: Vec<usize> = (0..d).collect();
        self.sweep(&all);
        let mut sweeps = 1;
        loop {
            self.refresh();
            let violations: Vec<f64> = (0..d).map(|j| self.violation(j)).collect();
            let kkt = violations.iter().copied().fold(0.0, f64::max);
            if kkt <= tol || sweeps >= max_sweeps {
                return SubproblemSolution {
                    theta: self.theta,
                    kkt,
                    sweeps,
                    converged: kkt <= tol,
                };
            }
            let active: Vec<usize> = (0..d)
                .filter(|&j| self.theta[j] != 0.0 || violations[j] > tol)
                .collect();
            self.state.active_set.clone_from(&active);
            while sweeps < max_sweeps {
                sweeps += 1;
                if self.sweep(&active) <= tol {
                    break;
                }
            }
        }
    }
}

/// Coordinate descent on the l1-regularized quadratic model at `theta_t`
/// with gradient `grad` and implicit Hessian `factors`. Starts from
/// `theta = theta_t`.
pub fn solve_quadratic_l1(
    x: &DenseMatrix,
    grad: &[f64],
    factors: &HessianFactors,
    theta_t: &[f64],
    lambda: f64,
    tol: f64,
    max_sweeps: usize,
) -> Result<SubproblemSolution> {
    let d = x.cols();
    Error::check_len("subproblem gradient", d, grad.len())?;
    Error::check_len("subproblem center", d, theta_t.len())?;
    Error::check_len("hessian deflation vector", d, factors.w.len())?;
    Error::check_len("hessian diagonal", d, factors.diag.len())?;
    Ok(Cd::new(x, grad, factors, theta_t, lambda).solve(tol, max_sweeps.max(1)))
}

/// Approximate minimizer of the Newton model at `theta_t`, the point `state`
/// was evaluated at.
pub fn solve_subproblem(
    problem: &Problem,
    kind: LossKind,
    reg: Regularizer,
    state: &LossState,
    theta_t: &[f64],
    cfg: &NewtonConfig,
) -> Result<Vec<f64>> {
    let grad = kind.gradient(problem, state)?;
    let factors = kind.hessian_factors(problem, state)?;
    Ok(solve_quadratic_l1(problem.x(), &grad, &factors, theta_t, reg.lambda(), cfg.sub_tol(), cfg.max_sweeps)?.theta)
}

pub fn solve_newton(problem: &Problem, kind: LossKind, cfg: &NewtonConfig, theta0: &[f64]) -> Result<SolveResult> {
    let reg = cfg.validate()?;
    Error::check_len("initial estimate", problem.d(), theta0.len())?;
    let lambda = reg.lambda();
    let tol = cfg.sub_tol();

    let mut tracer = Tracer::new(cfg.trace);
    let mut state = kind.eval(problem, theta0)?;
    let mut grad = kind.gradient(problem, &state)?;
    let mut omega = kkt_residual_from_grad(&grad, &state.theta, lambda);
    let mut obj = objective_of(&state, reg);
    let record = |iter, state: &LossState, obj, omega, step| IterRecord {
        iter,
        objective: obj,
        omega,
        residual_norm: state.residual_norm,
        step,
        nnz: nnz(&state.theta),
    };
    tracer.push(record(0, &state, obj, omega, 1.0));

    let finish = |state: LossState, obj, omega, iterations, status, tracer: Tracer| SolveResult {
        omega,
        objective: obj,
        residual_norm: state.residual_norm,
        theta_hat: state.theta,
        iterations,
        status,
        trace: tracer.finish(),
    };
    if omega <= cfg.eps {
        return Ok(finish(state, obj, omega, 0, SolveStatus::Converged, tracer));
    }

    for t in 1..=cfg.max_outer {
        let factors = kind.hessian_factors(problem, &state)?;
        let sub = solve_quadratic_l1(problem.x(), &grad, &factors, &state.theta, lambda, tol, cfg.max_sweeps)?;
        let delta: Vec<f64> = sub.theta.iter().zip(&state.theta).map(|(a, b)| a - b).collect();
        let gamma = directional(&grad, &sub.theta, &state.theta) + lambda * (norm1(&sub.theta) - norm1(&state.theta));

        // a few ulps of slack so rounding alone cannot reject a descent step
        let slack = 4.0 * f64::EPSILON * obj.abs().max(1.0);
        let mut eta = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_backtracks {
            let trial: Vec<f64> = state.theta.iter().zip(&delta).map(|(th, dl)| th + eta * dl).collect();
            let trial_state = match kind.eval(problem, &trial) {
                Ok(s) => s,
                Err(Error::NonsmoothRegion { .. }) => {
                    return Ok(finish(state, obj, omega, t - 1, SolveStatus::NonsmoothStop, tracer));
                }
                Err(e) => return Err(e),
            };
            let trial_obj = objective_of(&trial_state, reg);
            if trial_obj <= obj + cfg.alpha * eta * gamma + slack {
                accepted = Some((trial_state, trial_obj));
                break;
            }
            eta *= cfg.mu;
        }
        let Some((new_state, new_obj)) = accepted else {
            return Ok(finish(state, obj, omega, t - 1, SolveStatus::LineSearchFail, tracer));
        };

        state = new_state;
        obj = new_obj;
        grad = kind.gradient(problem, &state)?;
        omega = kkt_residual_from_grad(&grad, &state.theta, lambda);
        tracer.push(record(t, &state, obj, omega, eta));
        if omega <= cfg.eps {
            return Ok(finish(state, obj, omega, t, SolveStatus::Converged, tracer));
        }
    }
    Ok(finish(state, obj, omega, cfg.max_outer, SolveStatus::MaxIter, tracer))
}
