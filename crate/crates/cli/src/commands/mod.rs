mod apps;
mod bench;
mod gen;
mod solve;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sqrtlasso_core::{Algo, EpsRule, IterRecord, LossKind, Problem};

use crate::error::{CliError, CliResult};
use crate::io::{fmt_real, read_matrix, read_vector, write_table};

/// Version of the result.json / path.json layouts.
pub const SCHEMA_VERSION: u32 = 1;

pub const SEED_ENV: &str = "SQRTLASSO_SEED";

#[derive(Debug, Parser)]
#[command(name = "sqrtlasso", version, about = "Square-root Lasso solvers and experiments")]
pub struct Cli {
    /// Seed for all random draws. The SQRTLASSO_SEED environment variable takes precedence.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic data set.
    Gen(gen::GenArgs),
    /// Solve at a single regularization parameter.
    Solve(solve::SolveArgs),
    /// Run the pathwise scheme down to a target regularization parameter.
    Path(solve::PathArgs),
    /// Sweep noise level, stage count and tolerance; write timings.
    Bench(bench::BenchArgs),
    /// Estimate a sparse precision matrix by node-wise regression.
    Graph(apps::GraphArgs),
    /// Fit a multitask model with a shared row support.
    Cmr(apps::CmrArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgoArg {
    Gd,
    Newton,
}

impl From<AlgoArg> for Algo {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Gd => Algo::Gd,
            AlgoArg::Newton => Algo::Newton,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossArg {
    /// `||y - X theta|| / sqrt(n)`
    Sqrt,
    /// `||y - X theta||^2 / n`
    LeastSquares,
}

impl From<LossArg> for LossKind {
    fn from(l: LossArg) -> Self {
        match l {
            LossArg::Sqrt => LossKind::SqrtL2,
            LossArg::LeastSquares => LossKind::LeastSquares,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpsRuleArg {
    QuarterLambda,
    FinalEps,
}

impl From<EpsRuleArg> for EpsRule {
    fn from(r: EpsRuleArg) -> Self {
        match r {
            EpsRuleArg::QuarterLambda => EpsRule::QuarterLambda,
            EpsRuleArg::FinalEps => EpsRule::FinalEps,
        }
    }
}

/// One nonzero coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseEntry {
    pub index: usize,
    pub value: f64,
}

pub fn sparse(theta: &[f64]) -> Vec<SparseEntry> {
    theta
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(index, &value)| SparseEntry { index, value })
        .collect()
}

pub fn run(cli: Cli) -> CliResult<()> {
    let seed = effective_seed(cli.seed)?;
    match cli.command {
        Command::Gen(a) => gen::run(&a, seed),
        Command::Solve(a) => solve::run_solve(&a, seed),
        Command::Path(a) => solve::run_path(&a, seed),
        Command::Bench(a) => bench::run(&a, seed),
        Command::Graph(a) => apps::run_graph(&a, seed),
        Command::Cmr(a) => apps::run_cmr(&a, seed),
    }
}

fn effective_seed(flag: u64) -> CliResult<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(flag),
    }
}

pub fn load_problem(data: &Path) -> CliResult<Problem> {
    let x = read_matrix(&data.join("X.csv"))?;
    let y = read_vector(&data.join("y.csv"))?;
    Ok(Problem::new(x, y)?)
}

pub fn check_positive(name: &str, v: Option<f64>) -> CliResult<()> {
    match v {
        Some(v) if !(v > 0.0 && v.is_finite()) => Err(CliError::Usage(format!("--{name} must be positive, got {v}"))),
        _ => Ok(()),
    }
}

/// Relative output paths are placed inside the output directory.
pub fn resolve(out: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        out.join(p)
    }
}

pub const TRACE_HEADER: [&str; 5] = ["iter", "objective", "omega", "residual_norm", "nnz"];

pub fn write_trace(path: &Path, trace: &[IterRecord]) -> CliResult<()> {
    write_table(
        path,
        &TRACE_HEADER,
        trace.iter().map(|r| {
            vec![
                r.iter.to_string(),
                fmt_real(r.objective),
                fmt_real(r.omega),
                fmt_real(r.residual_norm),
                r.nnz.to_string(),
            ]
        }),
    )
}
