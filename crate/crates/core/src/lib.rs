//! Square-root Lasso estimation with proximal gradient and proximal Newton
//! solvers, a pathwise warm-start scheme, and two extensions: calibrated
//! multivariate regression and node-wise precision matrix estimation.
//!
//! ```
//! use sqrtlasso_core::{generate, solve_path, Algo, GenSpec, LossKind, PathConfig};
//!
//! let data = generate(&GenSpec::new(100, 50, 0.5, 7)).unwrap();
//! let problem = data.problem().unwrap();
//! let cfg = PathConfig::new(Algo::Newton, 1e-6);
//! let path = solve_path(&problem, LossKind::SqrtL2, &cfg).unwrap();
//! assert!(path.all_converged());
//! ```

pub mod applications;
pub mod datagen;
pub mod error;
pub mod gd;
pub mod linalg;
pub mod loss;
pub mod newton;
pub mod path;
pub mod prox;
pub mod solver;

pub use applications::{
    default_cmr_lambda, estimate_precision, estimate_sigma, solve_cmr, CmrResult, CoefMatrix, MultiResponse, PrecisionEstimate,
};
pub use datagen::{generate, generate_chain_graph, generate_multitask, Dataset, GenSpec, MultitaskDataset};
pub use error::{Error, Result};
pub use gd::{solve_gd, GdConfig};
pub use linalg::{DenseMatrix, Problem};
pub use loss::{HessianFactors, LossKind, LossState};
pub use newton::{solve_newton, NewtonConfig};
pub use path::{
    default_lambda, lambda_grid, lambda_zero, solve_path, Algo, EpsRule, PathConfig, PathOutcome, PathResult,
};
pub use prox::Regularizer;
pub use solver::{IterRecord, SolveResult, SolveStatus};
