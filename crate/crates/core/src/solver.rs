//! Result types shared by the proximal solvers.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    /// `omega <= eps` was reached.
    Converged,
    /// Iteration budget exhausted before the KKT tolerance was met.
    MaxIter,
    /// An iterate (or a trial point) entered the nonsmooth region of the
    /// square-root loss; the returned estimate is the last smooth iterate.
    NonsmoothStop,
    /// Newton line search ran out of backtracks.
    LineSearchFail,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIter => "max_iter",
            SolveStatus::NonsmoothStop => "nonsmooth_stop",
            SolveStatus::LineSearchFail => "line_search_fail",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One row of an iteration trace. Iteration 0 is the initializer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterRecord {
    pub iter: usize,
    pub objective: f64,
    pub omega: f64,
    pub residual_norm: f64,
    /// Step parameter `L` for proximal gradient, step length `eta` for Newton.
    pub step: f64,
    pub nnz: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub theta_hat: Vec<f64>,
    /// Final approximate KKT residual.
    pub omega: f64,
    pub objective: f64,
    /// `||y - X theta_hat||`
    pub residual_norm: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    pub trace: Option<Vec<IterRecord>>,
}

impl SolveResult {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    /// `||y - X theta_hat||^2 / n`
    pub fn mse(&self, n: usize) -> f64 {
        self.residual_norm * self.residual_norm / n as f64
    }

    /// `||y - X theta_hat|| / sqrt(n)`
    pub fn sigma_hat(&self, n: usize) -> f64 {
        self.residual_norm / (n as f64).sqrt()
    }
}

pub(crate) struct Tracer {
    records: Option<Vec<IterRecord>>,
}

impl Tracer {
    pub(crate) fn new(enabled: bool) -> Self {
        Self {
            records: enabled.then(Vec::new),
        }
    }

    pub(crate) fn push(&mut self, rec: IterRecord) {
        if let Some(r) = self.records.as_mut() {
            r.push(rec);
        }
    }

    pub(crate) fn finish(self) -> Option<Vec<IterRecord>> {
        self.records
    }
}
