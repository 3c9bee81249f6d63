//! Pathwise optimization: solve along a geometrically decreasing sequence of
//! regularization parameters, warm-starting every stage at the previous
//! stage's solution.

use crate::error::{Error, Result};
use crate::gd::{solve_gd, GdConfig};
use crate::linalg::{norm2, norm_inf, Problem};
use crate::loss::LossKind;
use crate::newton::{solve_newton, NewtonConfig};
use crate::solver::{SolveResult, SolveStatus};

/// Ratio that the default stage count keeps `eta_lambda` at or above.
pub const DEFAULT_STAGE_RATIO: f64 = 0.9;
pub const MAX_DEFAULT_STAGES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Algo {
    #[default]
    Gd,
    Newton,
}

/// Tolerance used for stages before the last one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum EpsRule {
    /// `eps_K = lambda_K / 4` for `K < N`.
    #[default]
    QuarterLambda,
    /// Every stage uses the final tolerance.
    FinalEps,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathConfig {
    /// Number of stages `N`; `None` picks the smallest `N` with `eta_lambda >= 0.9`.
    pub n_stages: Option<usize>,
    /// Final regularization parameter; `None` means `sqrt(log d / n)`.
    pub lambda_target: Option<f64>,
    pub eps_final: f64,
    pub algo: Algo,
    pub eps_rule: EpsRule,
    pub trace: bool,
    /// Per-stage iteration cap (GD iterations or Newton outer iterations).
    pub max_iter: Option<usize>,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            n_stages: None,
            lambda_target: None,
            eps_final: 1e-6,
            algo: Algo::Gd,
            eps_rule: EpsRule::QuarterLambda,
            trace: false,
            max_iter: None,
        }
    }
}

impl PathConfig {
    pub fn new(algo: Algo, eps_final: f64) -> Self {
        Self {
            algo,
            eps_final,
            ..Self::default()
        }
    }

    pub fn with_stages(mut self, n: usize) -> Self {
        self.n_stages = Some(n);
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda_target = Some(lambda);
        self
    }

    pub fn with_eps_rule(mut self, rule: EpsRule) -> Self {
        self.eps_rule = rule;
        self
    }

    pub fn with_trace(mut self, trace: bool) -> Self {
        self.trace = trace;
        self
    }

    pub fn lambda_target_for(&self, n: usize, d: usize) -> f64 {
        self.lambda_target.unwrap_or_else(|| default_lambda(n, d))
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.eps_final > 0.0) {
            return Err(Error::invalid("final tolerance must be positive"));
        }
        if self.n_stages == Some(0) {
            return Err(Error::invalid("number of stages must be at least 1"));
        }
        if let Some(l) = self.lambda_target {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::invalid("target lambda must be finite and positive"));
            }
        }
        Ok(())
    }

    /// Tolerance for a stage at `lambda`.
    pub fn stage_eps(&self, lambda: f64, is_last: bool) -> f64 {
        match (self.eps_rule, is_last) {
            (EpsRule::QuarterLambda, false) => lambda / 4.0,
            _ => self.eps_final,
        }
    }
}

/// `sqrt(log d / n)`, clamped away from zero for `d = 1`.
pub fn default_lambda(n: usize, d: usize) -> f64 {
    ((d.max(2) as f64).ln() / n as f64).sqrt()
}

/// Smallest stage count with `(target / lambda0)^(1/N) >= 0.9`, capped at 200.
pub fn default_stages(lambda0: f64, target: f64) -> usize {
    let n = ((lambda0 / target).ln() / (1.0 / DEFAULT_STAGE_RATIO).ln()).ceil();
    (n.max(1.0) as usize).min(MAX_DEFAULT_STAGES)
}

/// `||grad loss(0)||_inf`: the smallest lambda for which `theta = 0` is optimal.
/// For the square-root loss this is `||X^T y||_inf / (sqrt(n) ||y||)`.
pub fn lambda_zero_for(problem: &Problem, kind: LossKind) -> Result<f64> {
    let y_norm = norm2(problem.y());
    if y_norm == 0.0 {
        return Err(Error::ZeroResponse);
    }
    let xty = problem.x().mat_t_vec(problem.y())?;
    let scale = match kind {
        LossKind::SqrtL2 => 1.0 / (problem.sqrt_n() * y_norm),
        LossKind::LeastSquares => 2.0 / problem.n() as f64,
    };
    Ok(norm_inf(&xty) * scale)
}

pub fn lambda_zero(problem: &Problem) -> Result<f64> {
    lambda_zero_for(problem, LossKind::SqrtL2)
}

/// `[lambda0, lambda0 eta, ..., lambda_target]` with `eta = (target / lambda0)^(1/n)`.
pub fn lambda_grid(lambda0: f64, lambda_target: f64, n: usize) -> Result<Vec<f64>> {
    if !(lambda_target > 0.0 && lambda_target < lambda0 && lambda0.is_finite()) {
        return Err(Error::invalid(format!(
            "lambda grid needs 0 < target < lambda0, got target {lambda_target}, lambda0 {lambda0}"
        )));
    }
    if n == 0 {
        return Err(Error::invalid("number of stages must be at least 1"));
    }
    let eta = (lambda_target / lambda0).powf(1.0 / n as f64);
    let mut grid = Vec::with_capacity(n + 1);
    grid.push(lambda0);
    for k in 1..n {
        grid.push(grid[k - 1] * eta);
    }
    grid.push(lambda_target);
    Ok(grid)
}

/// How a path run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathOutcome {
    Completed,
    /// Stage `stage` (1-based) stopped with `status`; results cover stages before it.
    Aborted { stage: usize, status: SolveStatus },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    /// `lambda_0, ..., lambda_N`. When the target is at or above `lambda_0`
    /// the grid collapses to the single entry `[lambda_target]`.
    pub lambdas: Vec<f64>,
    /// One entry per solved stage; entry `K - 1` belongs to `lambdas[K]`.
    pub stage_results: Vec<SolveResult>,
    pub eta_lambda: f64,
    /// Minimum over stages of `||y - X theta_K||^2 / n`.
    pub minimal_mse: f64,
    pub total_inner_iterations: usize,
    pub outcome: PathOutcome,
}

impl PathResult {
    pub fn final_result(&self) -> Option<&SolveResult> {
        self.stage_results.last()
    }

    pub fn final_theta(&self) -> Option<&[f64]> {
        self.final_result().map(|r| r.theta_hat.as_slice())
    }

    /// Lambda used by stage `k` (0-based index into `stage_results`).
    pub fn stage_lambda(&self, k: usize) -> f64 {
        if self.lambdas.len() == 1 {
            self.lambdas[0]
        } else {
            self.lambdas[k + 1]
        }
    }

    /// True when every stage converged.
    pub fn all_converged(&self) -> bool {
        self.outcome == PathOutcome::Completed && self.stage_results.iter().all(SolveResult::converged)
    }
}

pub(crate) fn run_stage(
    problem: &Problem,
    kind: LossKind,
    cfg: &PathConfig,
    lambda: f64,
    eps: f64,
    theta0: &[f64],
) -> Result<SolveResult> {
    match cfg.algo {
        Algo::Gd => {
            let mut c = GdConfig::new(lambda, eps).with_trace(cfg.trace);
            if let Some(m) = cfg.max_iter {
                c.max_iter = m;
            }
            solve_gd(problem, kind, &c, theta0)
        }
        Algo::Newton => {
            let mut c = NewtonConfig::new(lambda, eps).with_trace(cfg.trace);
            if let Some(m) = cfg.max_iter {
                c.max_outer = m;
            }
            solve_newton(problem, kind, &c, theta0)
        }
    }
}

pub fn solve_path(problem: &Problem, kind: LossKind, cfg: &PathConfig) -> Result<PathResult> {
    cfg.validate()?;
    let lambda0 = lambda_zero_for(problem, kind)?;
    let target = cfg.lambda_target_for(problem.n(), problem.d());
    let n = problem.n();

    let (lambdas, eta) = if target >= lambda0 {
        // null fit already optimal at the target
        (vec![target], 1.0)
    } else {
        let stages = cfg.n_stages.unwrap_or_else(|| default_stages(lambda0, target));
        let grid = lambda_grid(lambda0, target, stages)?;
        (grid, (target / lambda0).powf(1.0 / stages as f64))
    };

    let stage_lambdas: &[f64] = if lambdas.len() == 1 { &lambdas } else { &lambdas[1..] };
    let mut theta = vec![0.0; problem.d()];
    let mut stage_results = Vec::with_capacity(stage_lambdas.len());
    let mut outcome = PathOutcome::Completed;
    for (k, &lambda) in stage_lambdas.iter().enumerate() {
        let is_last = k + 1 == stage_lambdas.len();
        let res = run_stage(problem, kind, cfg, lambda, cfg.stage_eps(lambda, is_last), &theta)?;
        match res.status {
            SolveStatus::NonsmoothStop | SolveStatus::LineSearchFail => {
                outcome = PathOutcome::Aborted {
                    stage: k + 1,
                    status: res.status,
                };
                break;
            }
            _ => {
                theta.clone_from(&res.theta_hat);
                stage_results.push(res);
            }
        }
    }

    let minimal_mse = stage_results
        .iter()
        .map(|r| r.mse(n))
        .fold(f64::INFINITY, f64::min);
    Ok(PathResult {
        total_inner_iterations: stage_results.iter().map(|r| r.iterations).sum(),
        lambdas,
        stage_results,
        eta_lambda: eta,
        minimal_mse,
        outcome,
    })
}
