//! Smooth losses: the square-root loss `||y - X theta|| / sqrt(n)` and the
//! least-squares loss `||y - X theta||^2 / n`.
//!
//! The square-root loss is differentiable wherever the residual is nonzero.
//! Every derivative here refuses to run once `||r|| / sqrt(n)` falls below
//! [`Problem::smooth_floor`], reporting [`Error::NonsmoothRegion`] instead.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, Problem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LossKind {
    #[default]
    SqrtL2,
    LeastSquares,
}

/// Loss value together with the residual it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct LossState {
    pub theta: Vec<f64>,
    /// `y - X theta`
    pub residual: Vec<f64>,
    pub residual_norm: f64,
    pub loss_value: f64,
}

impl LossState {
    pub fn scaled_residual(&self, problem: &Problem) -> f64 {
        self.residual_norm / problem.sqrt_n()
    }
}

/// Implicit Hessian `c * (X^T X - w w^T)` with its diagonal.
///
/// For the least-squares loss `w` is zero and `c = 2 / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianFactors {
    pub c: f64,
    pub w: Vec<f64>,
    pub diag: Vec<f64>,
}

impl HessianFactors {
    /// Dense `d x d` Hessian, row-major. Only for small problems and tests.
    pub fn to_dense(&self, problem: &Problem) -> Vec<f64> {
        let x = problem.x();
        let d = x.cols();
        let mut h = vec![0.0; d * d];
        for i in 0..x.rows() {
            let row = x.row(i);
            for a in 0..d {
                for b in 0..d {
                    h[a * d + b] += row[a] * row[b];
                }
            }
        }
        for a in 0..d {
            for b in 0..d {
                h[a * d + b] = self.c * (h[a * d + b] - self.w[a] * self.w[b]);
            }
        }
        h
    }
}

fn check_smooth(problem: &Problem, residual_norm: f64) -> Result<()> {
    let scaled = residual_norm / problem.sqrt_n();
    if scaled < problem.smooth_floor() || !scaled.is_finite() {
        Err(Error::NonsmoothRegion {
            scaled_residual: scaled,
            floor: problem.smooth_floor(),
        })
    } else {
        Ok(())
    }
}

impl LossKind {
    /// Loss value from a residual vector, without any smoothness check.
    pub(crate) fn value_from_residual(self, problem: &Problem, residual_norm: f64) -> f64 {
        match self {
            LossKind::SqrtL2 => residual_norm / problem.sqrt_n(),
            LossKind::LeastSquares => residual_norm * residual_norm / problem.n() as f64,
        }
    }

    pub(crate) fn state_from_residual(
        self,
        problem: &Problem,
        theta: Vec<f64>,
        residual: Vec<f64>,
    ) -> Result<LossState> {
        let residual_norm = norm2(&residual);
        if self == LossKind::SqrtL2 {
            check_smooth(problem, residual_norm)?;
        }
        Ok(LossState {
            loss_value: self.value_from_residual(problem, residual_norm),
            theta,
            residual,
            residual_norm,
        })
    }

    pub fn eval(self, problem: &Problem, theta: &[f64]) -> Result<LossState> {
        let residual = problem.residual(theta)?;
        self.state_from_residual(problem, theta.to_vec(), residual)
    }

    fn guard(self, problem: &Problem, state: &LossState) -> Result<()> {
        Error::check_len("loss state residual", problem.n(), state.residual.len())?;
        if self == LossKind::SqrtL2 {
            check_smooth(problem, state.residual_norm)?;
        }
        Ok(())
    }

    /// Scalar `s` such that `grad = s * X^T r`.
    fn gradient_scale(self, problem: &Problem, state: &LossState) -> f64 {
        match self {
            LossKind::SqrtL2 => -1.0 / (problem.sqrt_n() * state.residual_norm),
            LossKind::LeastSquares => -2.0 / problem.n() as f64,
        }
    }

    /// `-X^T r / (sqrt(n) ||r||)` for the square-root loss, `-2 X^T r / n` for least squares.
    pub fn gradient(self, problem: &Problem, state: &LossState) -> Result<Vec<f64>> {
        self.guard(problem, state)?;
        let mut g = problem.x().mat_t_vec(&state.residual)?;
        let s = self.gradient_scale(problem, state);
        g.iter_mut().for_each(|v| *v *= s);
        Ok(g)
    }

    /// Hessian factors at `state`; see [`HessianFactors`].
    pub fn hessian_factors(self, problem: &Problem, state: &LossState) -> Result<HessianFactors> {
        self.guard(problem, state)?;
        let col_norms = problem.x().col_sq_norms();
        match self {
            LossKind::SqrtL2 => {
                let c = 1.0 / (problem.sqrt_n() * state.residual_norm);
                let mut w = problem.x().mat_t_vec(&state.residual)?;
                let inv = 1.0 / state.residual_norm;
                w.iter_mut().for_each(|v| *v *= inv);
                let diag = col_norms
                    .iter()
                    .zip(&w)
                    .map(|(nj, wj)| c * (nj - wj * wj).max(0.0))
                    .collect();
                Ok(HessianFactors { c, w, diag })
            }
            LossKind::LeastSquares => {
                let c = 2.0 / problem.n() as f64;
                Ok(HessianFactors {
                    c,
                    w: vec![0.0; problem.d()],
                    diag: col_norms.iter().map(|nj| c * nj).collect(),
                })
            }
        }
    }

    /// `loss(old + delta) - loss(old) - grad(old)^T delta` from `z = X delta`.
    ///
    /// Computed from the geometry of the residual rather than as a difference
    /// of loss values, so it stays accurate when `delta` is tiny.
    pub(crate) fn bregman_from_image(self, problem: &Problem, old: &LossState, z: &[f64]) -> f64 {
        match self {
            LossKind::SqrtL2 => sqrt_bregman(&old.residual, old.residual_norm, z) / problem.sqrt_n(),
            LossKind::LeastSquares => dot(z, z) / problem.n() as f64,
        }
    }

    /// `H v` without forming `H`: `c * (X^T (X v) - w (w^T v))`.
    pub fn hessian_apply(self, problem: &Problem, state: &LossState, v: &[f64]) -> Result<Vec<f64>> {
        let factors = self.hessian_factors(problem, state)?;
        apply_factors(problem, &factors, v)
    }
}

/// `||r - z|| - ||r|| + r^T z / ||r||`, evaluated without cancellation.
pub(crate) fn sqrt_bregman(residual: &[f64], residual_norm: f64, z: &[f64]) -> f64 {
    let a = dot(residual, z);
    let proj = a / (residual_norm * residual_norm);
    let perp_sq: f64 = z.iter().zip(residual).map(|(zi, ri)| (zi - proj * ri).powi(2)).sum();
    let along = residual_norm - a / residual_norm;
    let new_norm = along.hypot(perp_sq.sqrt());
    if along > 0.0 {
        perp_sq / (new_norm + along)
    } else {
        new_norm - along
    }
}

pub(crate) fn apply_factors(problem: &Problem, f: &HessianFactors, v: &[f64]) -> Result<Vec<f64>> {
    let z = problem.x().mat_vec(v)?;
    let mut out = problem.x().mat_t_vec(&z)?;
    let wv = dot(&f.w, v);
    for (o, wj) in out.iter_mut().zip(&f.w) {
        *o = f.c * (*o - wj * wv);
    }
    Ok(out)
}

/// Square-root loss Hessian as `(diag, w, c)` with `H = c (X^T X - w w^T)`.
pub fn hessian_diag_and_deflation(problem: &Problem, state: &LossState) -> Result<HessianFactors> {
    LossKind::SqrtL2.hessian_factors(problem, state)
}
