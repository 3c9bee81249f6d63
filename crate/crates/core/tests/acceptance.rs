//! End-to-end acceptance suite.
//!
//! `cargo test -p sqrtlasso-core --test acceptance` runs every criterion and
//! prints one PASS/FAIL line each. Criterion numbers given as arguments
//! (`-- 4 5`) restrict the run. Criterion 10 is assembled from the runs of
//! criteria 4 to 9, which are pulled in whenever it is selected.

use std::collections::BTreeSet;
use std::panic::AssertUnwindSafe;
use std::process::ExitCode;
use std::sync::Mutex;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use sqrtlasso_core::datagen::rng_for;
use sqrtlasso_core::linalg::{norm2, norm_inf};
use sqrtlasso_core::newton::solve_subproblem;
use sqrtlasso_core::prox::{kkt_residual, objective};
use sqrtlasso_core::*;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

/// Residual-floor observations shared by criteria 4 to 9.
#[derive(Default)]
struct FloorLog {
    runs: usize,
    min_ratio: f64,
    worst: String,
    nonsmooth: usize,
}

struct Ctx {
    floor: Mutex<FloorLog>,
}

impl Ctx {
    fn observe_solve(&self, label: &str, res: &SolveResult, n: usize, sigma: f64) {
        let mut log = self.floor.lock().unwrap();
        if log.runs == 0 {
            log.min_ratio = f64::INFINITY;
        }
        log.runs += 1;
        if res.status == SolveStatus::NonsmoothStop {
            log.nonsmooth += 1;
        }
        let scale = (n as f64).sqrt() * sigma;
        let trace = res.trace.as_deref().unwrap_or(&[]);
        let min_resid = trace
            .iter()
            .map(|r| r.residual_norm)
            .chain(std::iter::once(res.residual_norm))
            .fold(f64::INFINITY, f64::min);
        if min_resid / scale < log.min_ratio {
            log.min_ratio = min_resid / scale;
            log.worst = label.to_string();
        }
    }

    fn observe_path(&self, label: &str, path: &PathResult, n: usize, sigma: f64) {
        for r in &path.stage_results {
            self.observe_solve(label, r, n, sigma);
        }
        if let PathOutcome::Aborted { status, .. } = path.outcome {
            if status == SolveStatus::NonsmoothStop {
                self.floor.lock().unwrap().nonsmooth += 1;
            }
        }
    }
}

fn gaussian(rng: &mut ChaCha20Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn random_problem(n: usize, d: usize, sigma: f64, seed: u64) -> (Problem, Vec<f64>) {
    let mut rng = rng_for(seed, 77);
    let x = DenseMatrix::from_fn(n, d, |_, _| gaussian(&mut rng)).unwrap();
    let beta: Vec<f64> = (0..d)
        .map(|j| if j % 3 == 0 { gaussian(&mut rng) } else { 0.0 })
        .collect();
    let mut y = x.mat_vec(&beta).unwrap();
    y.iter_mut().for_each(|v| *v += sigma * gaussian(&mut rng));
    (Problem::new(x, y).unwrap(), beta)
}

fn default_data(n: usize, d: usize, sigma: f64, seed: u64) -> Dataset {
    generate(&GenSpec::new(n, d, sigma, seed)).unwrap()
}

fn path_cfg(algo: Algo, eps: f64) -> PathConfig {
    PathConfig::new(algo, eps).with_trace(true)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn support(theta: &[f64]) -> Vec<usize> {
    (0..theta.len()).filter(|&j| theta[j] != 0.0).collect()
}

// --- oracles ---------------------------------------------------------------

/// Square-root loss evaluated directly from its definition.
fn sqrt_loss(p: &Problem, theta: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..p.n() {
        let fit: f64 = (0..p.d()).map(|j| p.x().get(i, j) * theta[j]).sum();
        s += (p.y()[i] - fit).powi(2);
    }
    s.sqrt() / (p.n() as f64).sqrt()
}

fn fd_gradient(p: &Problem, theta: &[f64], h: f64) -> Vec<f64> {
    (0..theta.len())
        .map(|j| {
            let mut a = theta.to_vec();
            let mut b = theta.to_vec();
            a[j] += h;
            b[j] -= h;
            (sqrt_loss(p, &a) - sqrt_loss(p, &b)) / (2.0 * h)
        })
        .collect()
}

/// Dense Hessian of the square-root loss: `(X^T X - X^T r r^T X / ||r||^2) / (sqrt(n) ||r||)`.
fn dense_hessian(p: &Problem, theta: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (n, d) = (p.n(), p.d());
    let r: Vec<f64> = (0..n)
        .map(|i| p.y()[i] - (0..d).map(|j| p.x().get(i, j) * theta[j]).sum::<f64>())
        .collect();
    let rn = norm2(&r);
    let xtr: Vec<f64> = (0..d).map(|j| (0..n).map(|i| p.x().get(i, j) * r[i]).sum()).collect();
    let c = 1.0 / ((n as f64).sqrt() * rn);
    let mut h = vec![0.0; d * d];
    for a in 0..d {
        for b in 0..d {
            let g: f64 = (0..n).map(|i| p.x().get(i, a) * p.x().get(i, b)).sum();
            h[a * d + b] = c * (g - xtr[a] * xtr[b] / (rn * rn));
        }
    }
    let grad = xtr.iter().map(|v| -c * v).collect();
    (h, grad)
}

/// Proximal gradient on the dense quadratic model, run to a fixed point.
fn dense_quadratic_oracle(h: &[f64], grad: &[f64], center: &[f64], lambda: f64) -> Vec<f64> {
    let d = center.len();
    let lip = (0..d)
        .map(|a| (0..d).map(|b| h[a * d + b].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let model_grad = |theta: &[f64]| -> Vec<f64> {
        (0..d)
            .map(|a| grad[a] + (0..d).map(|b| h[a * d + b] * (theta[b] - center[b])).sum::<f64>())
            .collect()
    };
    let shrink = |v: f64, t: f64| v.signum() * (v.abs() - t).max(0.0);
    // accelerated phase, then plain steps to settle on the exact fixed point
    let mut theta = center.to_vec();
    let mut prev = theta.clone();
    let mut mom = theta.clone();
    let mut t = 1.0f64;
    for _ in 0..200_000 {
        let g = model_grad(&mom);
        let next: Vec<f64> = (0..d).map(|j| shrink(mom[j] - g[j] / lip, lambda / lip)).collect();
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        mom = (0..d).map(|j| next[j] + (t - 1.0) / t_next * (next[j] - prev[j])).collect();
        prev = next;
        t = t_next;
    }
    theta.clone_from(&prev);
    for _ in 0..200_000 {
        let g = model_grad(&theta);
        let next: Vec<f64> = (0..d).map(|j| shrink(theta[j] - g[j] / lip, lambda / lip)).collect();
        let change = dist(&next, &theta);
        theta = next;
        if change < 1e-15 {
            break;
        }
    }
    theta
}

fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Grid scan followed by (nested) golden-section search over `[-bound, bound]^d`.
fn brute_force_min(f: &dyn Fn(&[f64]) -> f64, d: usize, bound: f64) -> f64 {
    let steps = if d == 1 { 4001 } else { 301 };
    let at = |k: usize| -bound + 2.0 * bound * k as f64 / (steps - 1) as f64;
    let mut best = f64::INFINITY;
    if d == 1 {
        for k in 0..steps {
            best = best.min(f(&[at(k)]));
        }
        best.min(golden(|t| f(&[t]), -bound, bound).1)
    } else {
        for a in 0..steps {
            for b in 0..steps {
                best = best.min(f(&[at(a), at(b)]));
            }
        }
        let inner = |t: f64| golden(|u| f(&[t, u]), -bound, bound).1;
        best.min(golden(inner, -bound, bound).1)
    }
}

// --- criteria --------------------------------------------------------------

fn c1_derivatives(_: &Ctx) -> Outcome {
    let (mut worst_g, mut worst_h) = (0.0f64, 0.0f64);
    let mut instances = 0;
    let mut seed = 0;
    while instances < 100 {
        seed += 1;
        let sigma = 0.5;
        let (p, beta) = random_problem(50, 20, sigma, 1000 + seed);
        let mut rng = rng_for(seed, 5);
        let theta: Vec<f64> = beta.iter().map(|b| b + 0.3 * gaussian(&mut rng)).collect();
        let state = LossKind::SqrtL2.eval(&p, &theta).unwrap();
        if state.scaled_residual(&p) < 0.1 * sigma {
            continue;
        }
        instances += 1;
        let g = LossKind::SqrtL2.gradient(&p, &state).unwrap();
        let g_fd = fd_gradient(&p, &theta, 1e-5);
        let rel = dist(&g, &g_fd) / norm2(&g_fd);
        worst_g = worst_g.max(rel);

        let v: Vec<f64> = (0..20).map(|_| gaussian(&mut rng)).collect();
        let hv = LossKind::SqrtL2.hessian_apply(&p, &state, &v).unwrap();
        let h = 1e-5;
        let plus: Vec<f64> = theta.iter().zip(&v).map(|(t, e)| t + h * e).collect();
        let minus: Vec<f64> = theta.iter().zip(&v).map(|(t, e)| t - h * e).collect();
        let gp = LossKind::SqrtL2.gradient(&p, &LossKind::SqrtL2.eval(&p, &plus).unwrap()).unwrap();
        let gm = LossKind::SqrtL2.gradient(&p, &LossKind::SqrtL2.eval(&p, &minus).unwrap()).unwrap();
        let hv_fd: Vec<f64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        worst_h = worst_h.max(dist(&hv, &hv_fd) / norm2(&hv_fd));
    }
    Outcome::new(
        worst_g <= 1e-6 && worst_h <= 1e-5,
        format!("100 instances: max rel err gradient {worst_g:.2e} (<= 1e-6), hessian {worst_h:.2e} (<= 1e-5)"),
    )
}

fn c2_subproblem(_: &Ctx) -> Outcome {
    let worst = (0..50u64)
        .into_par_iter()
        .map(|k| {
            let d = 5 + (k as usize % 16);
            let (p, beta) = random_problem(40, d, 0.5, 2000 + k);
            let mut rng = rng_for(k, 6);
            let center: Vec<f64> = beta
                .iter()
                .map(|b| if *b != 0.0 { b + 0.5 * gaussian(&mut rng) } else { 0.0 })
                .collect();
            let state = LossKind::SqrtL2.eval(&p, &center).unwrap();
            let (h, grad) = dense_hessian(&p, &center);
            let lambda = 0.3 * norm_inf(&grad).max(0.05);
            let oracle = dense_quadratic_oracle(&h, &grad, &center, lambda);
            let cfg = NewtonConfig::new(lambda, 1e-8).with_sub_tol(1e-13);
            let reg = Regularizer::new(lambda).unwrap();
            let got = solve_subproblem(&p, LossKind::SqrtL2, reg, &state, &center, &cfg).unwrap();
            got.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Outcome::new(worst <= 1e-8, format!("50 instances, d in 5..=20: max l_inf gap {worst:.2e} (<= 1e-8)"))
}

fn c3_brute_force(_: &Ctx) -> Outcome {
    let results: Vec<(f64, f64)> = (0..40u64)
        .into_par_iter()
        .map(|k| {
            let d = if k < 20 { 1 } else { 2 };
            let (p, _) = random_problem(8, d, 0.7, 3000 + k);
            let mut rng = rng_for(k, 7);
            let lambda0 = lambda_zero(&p).unwrap();
            let lambda = lambda0 * rng.random_range(0.1..0.9);
            let reg = Regularizer::new(lambda).unwrap();
            let f = |t: &[f64]| objective(&p, LossKind::SqrtL2, reg, t).unwrap();
            let bound = 2.0 * norm2(p.y()) / p.x().col_sq_norms().iter().cloned().fold(f64::INFINITY, f64::min).sqrt() + 1.0;
            let best = brute_force_min(&f, d, bound);
            let zero = vec![0.0; d];
            let gd = solve_gd(&p, LossKind::SqrtL2, &GdConfig::new(lambda, 1e-8), &zero).unwrap();
            let nt = solve_newton(&p, LossKind::SqrtL2, &NewtonConfig::new(lambda, 1e-8), &zero).unwrap();
            let mut gap = 0.0f64;
            let mut omega = 0.0f64;
            for r in [&gd, &nt] {
                gap = gap.max((f(&r.theta_hat) - best).abs());
                omega = omega.max(kkt_residual(&p, LossKind::SqrtL2, reg, &r.theta_hat).unwrap());
            }
            (gap, omega)
        })
        .collect();
    let gap = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let omega = results.iter().map(|r| r.1).fold(0.0, f64::max);
    Outcome::new(
        gap <= 1e-8 && omega <= 1e-8,
        format!("20 d=1 + 20 d=2 problems, both solvers: max objective gap {gap:.2e}, max omega {omega:.2e} (both <= 1e-8)"),
    )
}

fn linear_fit_r2(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let mx = mean(xs);
    let my = mean(ys);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, sxy * sxy / (sxx * syy))
}

/// High-accuracy optimum for the final stage, used as the gap reference.
fn reference_optimum(p: &Problem, lambda: f64, start: &[f64]) -> SolveResult {
    let cfg = NewtonConfig::new(lambda, 1e-13).with_sub_tol(1e-15);
    solve_newton(p, LossKind::SqrtL2, &cfg, start).unwrap()
}

fn c4_linear_rate(ctx: &Ctx) -> Outcome {
    let sigma = 0.5;
    let data = default_data(100, 500, sigma, 4);
    let p = data.problem().unwrap();
    let path = solve_path(&p, LossKind::SqrtL2, &path_cfg(Algo::Gd, 1e-10)).unwrap();
    ctx.observe_path("c4 gd path", &path, 100, sigma);
    let last = path.final_result().unwrap();
    let lambda = path.stage_lambda(path.stage_results.len() - 1);
    let reference = reference_optimum(&p, lambda, &last.theta_hat);
    let trace = last.trace.as_ref().unwrap();
    let f_star = trace.iter().map(|r| r.objective).fold(reference.objective, f64::min);
    let (xs, ys): (Vec<f64>, Vec<f64>) = trace
        .iter()
        .filter_map(|r| {
            let gap = r.objective - f_star;
            (1e-10..=1e-2).contains(&gap).then(|| (r.iter as f64, gap.log10()))
        })
        .unzip();
    if xs.len() < 3 {
        return Outcome::new(false, format!("only {} trace points with gap in [1e-10, 1e-2]", xs.len()));
    }
    let (slope, r2) = linear_fit_r2(&xs, &ys);
    Outcome::new(
        r2 >= 0.98 && slope < 0.0,
        format!(
            "final GD stage ({} iterations): R^2 = {r2:.4} (>= 0.98), slope {slope:.3} decades/iter over {} points",
            last.iterations,
            xs.len()
        ),
    )
}

fn c5_quadratic_rate(ctx: &Ctx) -> Outcome {
    let sigma = 0.5;
    let data = default_data(100, 500, sigma, 4);
    let p = data.problem().unwrap();
    let path = solve_path(&p, LossKind::SqrtL2, &path_cfg(Algo::Newton, 1e-6)).unwrap();
    ctx.observe_path("c5 newton path", &path, 100, sigma);
    let k = path.stage_results.len() - 1;
    let last = &path.stage_results[k];
    let lambda = path.stage_lambda(k);
    let trace = last.trace.as_ref().unwrap();
    let tail = last.iterations.min(3);
    let unit_steps = trace[trace.len() - tail..].iter().all(|r| r.step == 1.0);

    // successive errors of the final stage run with exact subproblems
    let start = if k == 0 {
        vec![0.0; p.d()]
    } else {
        path.stage_results[k - 1].theta_hat.clone()
    };
    let reference = reference_optimum(&p, lambda, &start);
    let mut errors = Vec::new();
    for t in 1..=reference.iterations {
        let mut cfg = NewtonConfig::new(lambda, 1e-13).with_sub_tol(1e-15);
        cfg.max_outer = t;
        let r = solve_newton(&p, LossKind::SqrtL2, &cfg, &start).unwrap();
        errors.push(dist(&r.theta_hat, &reference.theta_hat));
    }
    errors.insert(0, dist(&start, &reference.theta_hat));
    let usable: Vec<f64> = errors.into_iter().take_while(|e| *e > 1e-12).collect();
    let orders: Vec<f64> = usable
        .windows(3)
        .map(|w| (w[2] / w[1]).ln() / (w[1] / w[0]).ln())
        .collect();
    let order = orders.last().copied().unwrap_or(f64::NAN);
    Outcome::new(
        last.iterations <= 10 && last.converged() && unit_steps && order >= 1.7,
        format!(
            "final Newton stage: {} outer iterations (<= 10), unit steps on last {tail}: {unit_steps}, \
             errors {:?}, order estimate {order:.2} (>= 1.7)",
            last.iterations,
            usable.iter().map(|e| format!("{e:.1e}")).collect::<Vec<_>>()
        ),
    )
}

const REFERENCE_MSE: [(f64, f64); 4] = [(0.1, 0.0132), (0.5, 0.3054), (1.0, 1.1833), (2.0, 4.2197)];

fn c6_minimal_mse(ctx: &Ctx) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (sigma, anchor) in REFERENCE_MSE {
        let mses: Vec<f64> = (0..20u64)
            .into_par_iter()
            .map(|seed| {
                let data = default_data(200, 2000, sigma, 600 + seed);
                let p = data.problem().unwrap();
                let path = solve_path(&p, LossKind::SqrtL2, &path_cfg(Algo::Gd, 1e-6).with_stages(10)).unwrap();
                ctx.observe_path(&format!("c6 sigma={sigma} seed={seed}"), &path, 200, sigma);
                assert!(path.all_converged());
                path.minimal_mse
            })
            .collect();
        let ratio = mean(&mses) / (sigma * sigma);
        pass &= (0.8..=2.0).contains(&ratio);
        parts.push(format!("sigma={sigma}: {:.4} (anchor {anchor}) ratio {ratio:.3}", mean(&mses)));
    }
    Outcome::new(pass, format!("n=200 d=2000 N=10, mean minimal MSE / sigma^2 in [0.8, 2]: {}", parts.join("; ")))
}

fn c7_pathwise_benefit(ctx: &Ctx) -> Outcome {
    let sigma = 0.5;
    let pairs: Vec<(usize, usize)> = (0..20u64)
        .into_par_iter()
        .map(|seed| {
            let data = default_data(200, 2000, sigma, 700 + seed);
            let p = data.problem().unwrap();
            let run = |n_stages| {
                let path = solve_path(&p, LossKind::SqrtL2, &path_cfg(Algo::Gd, 1e-6).with_stages(n_stages)).unwrap();
                ctx.observe_path(&format!("c7 N={n_stages} seed={seed}"), &path, 200, sigma);
                assert!(path.all_converged());
                path.total_inner_iterations
            };
            (run(10), run(1))
        })
        .collect();
    let wins = pairs.iter().filter(|(a, b)| a < b).count();
    let m10 = mean(&pairs.iter().map(|p| p.0 as f64).collect::<Vec<_>>());
    let m1 = mean(&pairs.iter().map(|p| p.1 as f64).collect::<Vec<_>>());
    Outcome::new(
        wins >= 15,
        format!("GD, eps_N=1e-6: N=10 beat N=1 in {wins}/20 seeds (>= 15); mean iterations {m10:.0} vs {m1:.0}"),
    )
}

fn c8_sigma_free(ctx: &Ctx) -> Outcome {
    let truth = vec![0, 1, 3];
    let mut pass = true;
    let mut parts = Vec::new();
    for sigma in [0.1, 0.5, 1.0] {
        let hits = (0..20u64)
            .into_par_iter()
            .filter(|&seed| {
                let data = default_data(200, 500, sigma, 800 + seed);
                let p = data.problem().unwrap();
                let path = solve_path(&p, LossKind::SqrtL2, &path_cfg(Algo::Newton, 1e-6)).unwrap();
                ctx.observe_path(&format!("c8 sigma={sigma} seed={seed}"), &path, 200, sigma);
                support(path.final_theta().unwrap()) == truth
            })
            .count();
        pass &= hits >= 16;
        parts.push(format!("sigma={sigma}: {hits}/20"));
    }
    Outcome::new(pass, format!("exact support recovery at lambda=sqrt(log d/n), need >= 16/20: {}", parts.join(", ")))
}

fn c9_rate(ctx: &Ctx) -> Outcome {
    let sigma = 1.0;
    let run = |n: usize| -> Vec<(f64, f64)> {
        (0..30u64)
            .into_par_iter()
            .map(|seed| {
                let data = default_data(n, 500, sigma, 900 + seed);
                let p = data.problem().unwrap();
                let path = solve_path(&p, LossKind::SqrtL2, &path_cfg(Algo::Newton, 1e-6)).unwrap();
                ctx.observe_path(&format!("c9 n={n} seed={seed}"), &path, n, sigma);
                let res = path.final_result().unwrap();
                (dist(&res.theta_hat, &data.theta_star), res.sigma_hat(n))
            })
            .collect()
    };
    let small = run(200);
    let large = run(400);
    let e200 = mean(&small.iter().map(|r| r.0).collect::<Vec<_>>());
    let e400 = mean(&large.iter().map(|r| r.0).collect::<Vec<_>>());
    let ratio = e400 / e200;
    let sigma_err = mean(&small.iter().map(|r| (r.1 - sigma).abs() / sigma).collect::<Vec<_>>());
    Outcome::new(
        (0.55..=0.90).contains(&ratio) && sigma_err <= 0.15,
        format!(
            "mean l2 error {e200:.4} (n=200) vs {e400:.4} (n=400), ratio {ratio:.3} in [0.55, 0.90]; \
             mean sigma_hat rel err {sigma_err:.3} (<= 0.15)"
        ),
    )
}

fn c10_residual_floor(ctx: &Ctx) -> Outcome {
    let log = ctx.floor.lock().unwrap();
    Outcome::new(
        log.runs > 0 && log.min_ratio >= 0.5 && log.nonsmooth == 0,
        format!(
            "{} solves from criteria 4-9: min residual/(sqrt(n) sigma) = {:.3} (>= 0.5) at {}; NonsmoothStop count {}",
            log.runs, log.min_ratio, log.worst, log.nonsmooth
        ),
    )
}

fn c11_agreement(_: &Ctx) -> Outcome {
    // both solvers run inside the pathwise scheme; a cold Newton start at a
    // small lambda with d > n sits outside its fast local region
    let worst = (0..20u64)
        .into_par_iter()
        .map(|seed| {
            let data = default_data(100, 200, 0.5, 1100 + seed);
            let p = data.problem().unwrap();
            let gd = solve_path(&p, LossKind::SqrtL2, &PathConfig::new(Algo::Gd, 1e-8)).unwrap();
            let nt = solve_path(&p, LossKind::SqrtL2, &PathConfig::new(Algo::Newton, 1e-8)).unwrap();
            assert!(gd.all_converged() && nt.all_converged());
            dist(gd.final_theta().unwrap(), nt.final_theta().unwrap())
        })
        .reduce(|| 0.0, f64::max);
    Outcome::new(
        worst <= 1e-4,
        format!("20 instances n=100 d=200, lambda=sqrt(log d/n), eps=1e-8: max l2 gap {worst:.2e} (<= 1e-4)"),
    )
}

fn c12_cmr(_: &Ctx) -> Outcome {
    let (n, d) = (200, 200);
    let rows = vec![0usize, 1, 3];
    let coefficients = vec![vec![(0, 3.0), (1, -2.0), (3, 1.5)], vec![(0, -1.5), (1, 2.5), (3, 2.0)]];
    let lambda = default_cmr_lambda(n, d, 2);
    let outcomes: Vec<(bool, usize)> = (0..20u64)
        .into_par_iter()
        .map(|seed| {
            let spec = GenSpec::new(n, d, 1.0, 1200 + seed);
            let data = generate_multitask(&spec, &coefficients, &[0.5, 2.0]).unwrap();
            let y = MultiResponse::from_columns(data.y.clone()).unwrap();
            let res = solve_cmr(&data.x, &y, lambda, &PathConfig::new(Algo::Gd, 1e-6)).unwrap();
            let found = res.theta.row_support();
            (found == rows, found.len())
        })
        .collect();
    let hits = outcomes.iter().filter(|o| o.0).count();
    let sizes: Vec<usize> = outcomes.iter().map(|o| o.1).collect();
    Outcome::new(
        hits >= 16,
        format!("m=2, sigma=(0.5, 2), lambda=(sqrt m + sqrt(2 log d))/sqrt n = {lambda:.3}: exact row support {hits}/20 (>= 16); support sizes {sizes:?}"),
    )
}

fn c13_precision(_: &Ctx) -> Outcome {
    let (n, d) = (400, 50);
    let f1s: Vec<f64> = (0..10u64)
        .into_par_iter()
        .map(|seed| {
            let x = generate_chain_graph(n, d, 0.4, 1300 + seed).unwrap();
            let est = estimate_precision(&x, default_lambda(n, d), &PathConfig::new(Algo::Newton, 1e-6)).unwrap();
            let found: BTreeSet<(usize, usize)> = est.edges().into_iter().collect();
            let tp = found.iter().filter(|(k, j)| j - k == 1).count() as f64;
            let precision = if found.is_empty() { 0.0 } else { tp / found.len() as f64 };
            let recall = tp / (d - 1) as f64;
            if tp == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            }
        })
        .collect();
    let f1 = mean(&f1s);
    Outcome::new(f1 >= 0.8, format!("chain d=50 rho=0.4 n=400: mean edge F1 {f1:.3} (>= 0.8) over 10 trials"))
}

type Criterion = fn(&Ctx) -> Outcome;

const CRITERIA: [(usize, &str, Criterion); 13] = [
    (1, "derivative correctness", c1_derivatives),
    (2, "subproblem oracle equivalence", c2_subproblem),
    (3, "brute-force global optimality", c3_brute_force),
    (4, "per-stage linear convergence", c4_linear_rate),
    (5, "quadratic convergence", c5_quadratic_rate),
    (6, "minimal MSE", c6_minimal_mse),
    (7, "pathwise benefit", c7_pathwise_benefit),
    (8, "sigma-free tuning", c8_sigma_free),
    (9, "statistical rate", c9_rate),
    (10, "residual floor", c10_residual_floor),
    (11, "GD/Newton agreement", c11_agreement),
    (12, "CMR adaptivity", c12_cmr),
    (13, "precision matrix", c13_precision),
];

fn main() -> ExitCode {
    let mut selected: BTreeSet<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    if selected.is_empty() {
        selected = (1..=13).collect();
    }
    if selected.contains(&10) {
        selected.extend(4..=9);
    }
    let ctx = Ctx {
        floor: Mutex::new(FloorLog::default()),
    };
    let start = Instant::now();
    let run = |(id, name, f): &(usize, &'static str, Criterion)| {
        let t = Instant::now();
        let out = std::panic::catch_unwind(AssertUnwindSafe(|| f(&ctx)))
            .unwrap_or_else(|_| Outcome::new(false, "panicked".to_string()));
        (*id, *name, out, t.elapsed().as_secs_f64())
    };
    let (floor_dep, rest): (Vec<_>, Vec<_>) = CRITERIA
        .iter()
        .filter(|c| selected.contains(&c.0))
        .partition(|c| c.0 == 10);
    let mut results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = rest.iter().map(|c| s.spawn(move || run(c))).collect();
        handles.into_iter().map(|h| h.join().expect("criterion panicked")).collect()
    });
    results.extend(floor_dep.iter().map(|c| run(c)));
    results.sort_by_key(|r| r.0);

    println!();
    let mut failed = 0;
    for (id, name, out, secs) in &results {
        let tag = if out.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!out.pass);
        println!("criterion {id:>2} {tag}  {name} [{secs:.1}s]: {}", out.detail);
    }
    println!(
        "\nacceptance: {} passed, {failed} failed in {:.1}s",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
