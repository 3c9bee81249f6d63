//! l1 proximal machinery: soft-thresholding, the proximal gradient map, the
//! composite objective `F(theta) = loss(theta) + lambda ||theta||_1`, its
//! quadratic model and the approximate KKT residual.

use crate::error::{Error, Result};
use crate::linalg::{norm1, Problem};
use crate::loss::{LossKind, LossState};

/// Weight of the l1 penalty.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Regularizer {
    lambda: f64,
}

impl Regularizer {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda > 0.0 && lambda.is_finite() {
            Ok(Self { lambda })
        } else {
            Err(Error::invalid(format!("lambda must be finite and positive, got {lambda}")))
        }
    }

    #[inline]
    pub fn lambda(self) -> f64 {
        self.lambda
    }

    #[inline]
    pub fn penalty(self, theta: &[f64]) -> f64 {
        self.lambda * norm1(theta)
    }
}

#[inline]
pub fn soft_threshold_scalar(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

pub fn soft_threshold(x: &[f64], t: f64) -> Vec<f64> {
    x.iter().map(|&v| soft_threshold_scalar(v, t)).collect()
}

/// `S_{lambda/L}(theta - grad / L)`.
pub fn prox_map(theta: &[f64], grad: &[f64], l: f64, lambda: f64) -> Vec<f64> {
    let t = lambda / l;
    theta
        .iter()
        .zip(grad)
        .map(|(&th, &g)| soft_threshold_scalar(th - g / l, t))
        .collect()
}

/// Coordinate-wise closed form of `min_{g in d||theta||_1} ||grad + lambda g||_inf`.
pub fn kkt_residual_from_grad(grad: &[f64], theta: &[f64], lambda: f64) -> f64 {
    grad.iter()
        .zip(theta)
        .map(|(&g, &th)| {
            if th > 0.0 {
                (g + lambda).abs()
            } else if th < 0.0 {
                (g - lambda).abs()
            } else {
                (g.abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Quadratic model value from cached loss and gradient at `theta_old`.
pub(crate) fn model_from_parts(
    loss_old: f64,
    grad_old: &[f64],
    theta_new: &[f64],
    theta_old: &[f64],
    l: f64,
    reg: Regularizer,
) -> f64 {
    let mut lin = 0.0;
    let mut sq = 0.0;
    for ((&a, &b), &g) in theta_new.iter().zip(theta_old).zip(grad_old) {
        let delta = a - b;
        lin += g * delta;
        sq += delta * delta;
    }
    loss_old + lin + 0.5 * l * sq + reg.penalty(theta_new)
}

pub fn objective(problem: &Problem, kind: LossKind, reg: Regularizer, theta: &[f64]) -> Result<f64> {
    Ok(kind.eval(problem, theta)?.loss_value + reg.penalty(theta))
}

pub(crate) fn objective_of(state: &LossState, reg: Regularizer) -> f64 {
    state.loss_value + reg.penalty(&state.theta)
}

pub fn prox_grad_step(
    problem: &Problem,
    kind: LossKind,
    reg: Regularizer,
    theta: &[f64],
    l: f64,
) -> Result<Vec<f64>> {
    if !(l > 0.0) {
        return Err(Error::invalid("step parameter L must be positive"));
    }
    let state = kind.eval(problem, theta)?;
    let grad = kind.gradient(problem, &state)?;
    Ok(prox_map(theta, &grad, l, reg.lambda()))
}

/// `loss(old) + grad(old)^T (new - old) + L/2 ||new - old||^2 + lambda ||new||_1`.
pub fn quadratic_model(
    problem: &Problem,
    kind: LossKind,
    reg: Regularizer,
    theta_new: &[f64],
    theta_old: &[f64],
    l: f64,
) -> Result<f64> {
    Error::check_len("quadratic model point", theta_old.len(), theta_new.len())?;
    let state = kind.eval(problem, theta_old)?;
    let grad = kind.gradient(problem, &state)?;
    Ok(model_from_parts(state.loss_value, &grad, theta_new, theta_old, l, reg))
}

pub fn kkt_residual(problem: &Problem, kind: LossKind, reg: Regularizer, theta: &[f64]) -> Result<f64> {
    let state = kind.eval(problem, theta)?;
    let grad = kind.gradient(problem, &state)?;
    Ok(kkt_residual_from_grad(&grad, theta, reg.lambda()))
}

/// `grad^T (new - old)`.
pub(crate) fn directional(grad: &[f64], theta_new: &[f64], theta_old: &[f64]) -> f64 {
    grad.iter()
        .zip(theta_new.iter().zip(theta_old))
        .map(|(g, (a, b))| g * (a - b))
        .sum::<f64>()
}
