use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;
use sqrtlasso_core::{generate, generate_chain_graph, generate_multitask, GenSpec};

use super::{sparse, SparseEntry};
use crate::error::{CliError, CliResult};
use crate::io::{ensure_dir, fmt_real, write_json, write_matrix, write_rows, write_vector};
use crate::manifest::RunManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenKind {
    /// Equicorrelated design with a sparse linear response.
    Linear,
    /// Shared design, one response per task, shared row support.
    Multitask,
    /// Samples from a Gaussian graphical model with a chain graph.
    Chain,
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value_t = GenKind::Linear)]
    pub kind: GenKind,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 2000)]
    pub d: usize,
    /// Support size of the true coefficient vector.
    #[arg(long = "s", default_value_t = 3)]
    pub s: usize,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 0.5)]
    pub sigma: f64,
    /// Design correlation; the chain correlation for `--kind chain`.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub rho: f64,
    /// Number of tasks for `--kind multitask`.
    #[arg(long, default_value_t = 2)]
    pub tasks: usize,
    /// Comma-separated noise levels, one per task; defaults to `--sigma` for all.
    #[arg(long, value_delimiter = ',')]
    pub task_sigmas: Vec<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct GenMeta {
    kind: GenKind,
    n: usize,
    d: usize,
    s: usize,
    sigma: f64,
    rho: f64,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    support: Option<Vec<SparseEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    task_sigmas: Option<Vec<f64>>,
}

pub fn run(args: &GenArgs, seed: u64) -> CliResult<()> {
    ensure_dir(&args.out)?;
    let mut manifest = RunManifest::new("gen", args, seed)?;
    let out = &args.out;
    let mut meta = GenMeta {
        kind: args.kind,
        n: args.n,
        d: args.d,
        s: args.s,
        sigma: args.sigma,
        rho: args.rho,
        seed,
        support: None,
        task_sigmas: None,
    };
    let spec = GenSpec {
        s_star: args.s,
        rho: args.rho,
        ..GenSpec::new(args.n, args.d, args.sigma, seed)
    };
    match args.kind {
        GenKind::Linear => {
            let ds = generate(&spec)?;
            write_matrix(&out.join("X.csv"), &ds.x)?;
            write_vector(&out.join("y.csv"), &ds.y)?;
            write_vector(&out.join("theta_star.csv"), &ds.theta_star)?;
            meta.support = Some(sparse(&ds.theta_star));
            manifest.artifacts.extend(["X.csv", "y.csv", "theta_star.csv"].map(String::from));
        }
        GenKind::Multitask => {
            if args.tasks == 0 {
                return Err(CliError::Usage("--tasks must be at least 1".into()));
            }
            let sigmas = if args.task_sigmas.is_empty() {
                vec![args.sigma; args.tasks]
            } else if args.task_sigmas.len() == args.tasks {
                args.task_sigmas.clone()
            } else {
                return Err(CliError::Usage(format!(
                    "--task-sigmas has {} entries for {} tasks",
                    args.task_sigmas.len(),
                    args.tasks
                )));
            };
            // every task shares the support; task k rotates the values by k
            let base = spec.support()?;
            let coefficients: Vec<Vec<(usize, f64)>> = (0..args.tasks)
                .map(|k| {
                    (0..base.len())
                        .map(|i| (base[i].0, base[(i + k) % base.len()].1))
                        .collect()
                })
                .collect();
            let ds = generate_multitask(&spec, &coefficients, &sigmas)?;
            let m = args.tasks;
            write_matrix(&out.join("X.csv"), &ds.x)?;
            write_rows(
                &out.join("y.csv"),
                (0..args.n).map(|i| (0..m).map(|k| fmt_real(ds.y[k][i])).collect::<Vec<_>>()),
            )?;
            write_rows(
                &out.join("theta_star.csv"),
                (0..args.d).map(|j| (0..m).map(|k| fmt_real(ds.theta_star[k][j])).collect::<Vec<_>>()),
            )?;
            meta.task_sigmas = Some(sigmas);
            manifest.artifacts.extend(["X.csv", "y.csv", "theta_star.csv"].map(String::from));
        }
        GenKind::Chain => {
            let x = generate_chain_graph(args.n, args.d, args.rho, seed)?;
            write_matrix(&out.join("X.csv"), &x)?;
            write_rows(
                &out.join("edges_true.csv"),
                (1..args.d).map(|j| [(j - 1).to_string(), j.to_string()]),
            )?;
            manifest.artifacts.extend(["X.csv", "edges_true.csv"].map(String::from));
        }
    }
    write_json(&out.join("meta.json"), &meta)?;
    manifest.add("meta.json");
    manifest.write(out)
}
