//! Proximal gradient descent with an adaptive step parameter and
//! approximate-KKT termination.
//!
//! Each iteration starts from the previous step parameter `L` and halves it
//! while the quadratic model still majorizes the objective at the prox step.
//! Once majorization fails (or the halving budget is spent) the step is taken
//! at `min(2 L, L_max)`. If majorization still fails there, `L` keeps doubling
//! until it holds or `L_max` is reached, so accepted iterates never increase
//! the objective.

use crate::error::{Error, Result};
use crate::linalg::{dot, nnz, Problem};
use crate::loss::{LossKind, LossState};
use crate::prox::{kkt_residual_from_grad, objective_of, prox_map, Regularizer};
use crate::solver::{IterRecord, SolveResult, SolveStatus, Tracer};

/// Slack allowed when checking majorization after the step-size search.
const MAJORIZATION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct GdConfig {
    pub lambda: f64,
    pub eps: f64,
    /// Step parameter for the first iteration.
    pub l_init: f64,
    pub l_max: f64,
    pub l_min: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    pub trace: bool,
}

impl GdConfig {
    pub fn new(lambda: f64, eps: f64) -> Self {
        Self {
            lambda,
            eps,
            l_init: 1.0,
            l_max: 1e8,
            l_min: 1e-12,
            max_iter: 100_000,
            max_halvings: 64,
            trace: false,
        }
    }

    pub fn with_trace(mut self, trace: bool) -> Self {
        self.trace = trace;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub(crate) fn validate(&self) -> Result<Regularizer> {
        let reg = Regularizer::new(self.lambda)?;
        if !(self.eps > 0.0) {
            return Err(Error::invalid("eps must be positive"));
        }
        if !(self.l_min > 0.0 && self.l_min <= self.l_max && self.l_max.is_finite()) {
            return Err(Error::invalid("step bounds must satisfy 0 < l_min <= l_max < inf"));
        }
        if !(self.l_init > 0.0) {
            return Err(Error::invalid("initial step parameter must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        Ok(reg)
    }
}

struct Trial {
    l: f64,
    state: LossState,
    /// `Q - F` at the prox step, computed without cancellation.
    gap: f64,
}

/// Iterate with its cached gradient.
struct Point {
    state: LossState,
    grad: Vec<f64>,
    objective: f64,
    omega: f64,
}

impl Point {
    fn new(problem: &Problem, kind: LossKind, reg: Regularizer, state: LossState) -> Result<Self> {
        let grad = kind.gradient(problem, &state)?;
        let omega = kkt_residual_from_grad(&grad, &state.theta, reg.lambda());
        Ok(Self {
            objective: objective_of(&state, reg),
            state,
            grad,
            omega,
        })
    }

    fn record(&self, iter: usize, step: f64) -> IterRecord {
        IterRecord {
            iter,
            objective: self.objective,
            omega: self.omega,
            residual_norm: self.state.residual_norm,
            step,
            nnz: nnz(&self.state.theta),
        }
    }

    fn into_result(self, iterations: usize, status: SolveStatus, tracer: Tracer) -> SolveResult {
        SolveResult {
            omega: self.omega,
            objective: self.objective,
            residual_norm: self.state.residual_norm,
            theta_hat: self.state.theta,
            iterations,
            status,
            trace: tracer.finish(),
        }
    }
}

pub fn solve_gd(problem: &Problem, kind: LossKind, cfg: &GdConfig, theta0: &[f64]) -> Result<SolveResult> {
    let reg = cfg.validate()?;
    Error::check_len("initial estimate", problem.d(), theta0.len())?;

    let mut tracer = Tracer::new(cfg.trace);
    let mut point = Point::new(problem, kind, reg, kind.eval(problem, theta0)?)?;
    let mut l = cfg.l_init.clamp(cfg.l_min, cfg.l_max);
    tracer.push(point.record(0, l));
    if point.omega <= cfg.eps {
        return Ok(point.into_result(0, SolveStatus::Converged, tracer));
    }

    let mut trials: Vec<Trial> = Vec::new();
    for t in 1..=cfg.max_iter {
        trials.clear();
        let eval_at = |l: f64, trials: &mut Vec<Trial>| -> Result<usize> {
            if let Some(i) = trials.iter().position(|tr| tr.l == l) {
                return Ok(i);
            }
            let theta = prox_map(&point.state.theta, &point.grad, l, reg.lambda());
            let state = kind.eval(problem, &theta)?;
            let delta: Vec<f64> = theta.iter().zip(&point.state.theta).map(|(a, b)| a - b).collect();
            let z = problem.x().mat_vec_sparse(&delta);
            let gap = 0.5 * l * dot(&delta, &delta) - kind.bregman_from_image(problem, &point.state, &z);
            trials.push(Trial { l, state, gap });
            Ok(trials.len() - 1)
        };

        // downward search while the model still majorizes
        let mut l_trial = l;
        let mut halvings = 0;
        let searched = loop {
            let i = match eval_at(l_trial, &mut trials) {
                Ok(i) => i,
                Err(Error::NonsmoothRegion { .. }) => break None,
                Err(e) => return Err(e),
            };
            let tr = &trials[i];
            if tr.gap > 0.0 && halvings < cfg.max_halvings && l_trial / 2.0 >= cfg.l_min {
                l_trial /= 2.0;
                halvings += 1;
            } else {
                break Some(l_trial);
            }
        };
        let Some(l_trial) = searched else {
            return Ok(point.into_result(t - 1, SolveStatus::NonsmoothStop, tracer));
        };

        l = (2.0 * l_trial).min(cfg.l_max);
        let accepted = loop {
            let i = match eval_at(l, &mut trials) {
                Ok(i) => i,
                Err(Error::NonsmoothRegion { .. }) => break None,
                Err(e) => return Err(e),
            };
            let tr = &trials[i];
            if tr.gap < -MAJORIZATION_SLACK && l < cfg.l_max {
                l = (2.0 * l).min(cfg.l_max);
            } else {
                break Some(i);
            }
        };
        let Some(i) = accepted else {
            return Ok(point.into_result(t - 1, SolveStatus::NonsmoothStop, tracer));
        };

        let state = trials.swap_remove(i).state;
        point = Point::new(problem, kind, reg, state)?;
        tracer.push(point.record(t, l));
        if point.omega <= cfg.eps {
            return Ok(point.into_result(t, SolveStatus::Converged, tracer));
        }
    }
    Ok(point.into_result(cfg.max_iter, SolveStatus::MaxIter, tracer))
}
