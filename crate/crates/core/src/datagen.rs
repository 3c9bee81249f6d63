//! Synthetic data: equicorrelated Gaussian designs with sparse ground truth,
//! multitask responses, and AR(1)-chain precision-matrix samples.
//!
//! Randomness comes from ChaCha20 seeded with the user seed; every
//! independent draw (design, noise, noise of task `k`, ...) reads its own
//! ChaCha stream, selected with `set_stream(purpose)`. Standard normals are
//! drawn with the ziggurat sampler from `rand_distr`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, Problem};

/// Stream identifiers; each one names an independent substream of a seed.
pub mod stream {
    pub const DESIGN: u64 = 1;
    pub const NOISE: u64 = 2;
    pub const CHAIN: u64 = 3;
    /// Noise of task `k` uses `TASK_NOISE_BASE + k`.
    pub const TASK_NOISE_BASE: u64 = 1 << 32;
}

/// Default nonzero coefficients `(index, value)`: `theta_1 = 3`,
/// `theta_2 = -2`, `theta_4 = 1.5` in one-based numbering.
pub const DEFAULT_COEFFICIENTS: [(usize, f64); 3] = [(0, 3.0), (1, -2.0), (3, 1.5)];

pub fn rng_for(seed: u64, purpose: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(purpose);
    rng
}

#[inline]
fn normal(rng: &mut ChaCha20Rng) -> f64 {
    rng.sample(StandardNormal)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub n: usize,
    pub d: usize,
    pub s_star: usize,
    pub sigma: f64,
    /// Off-diagonal entry of the equicorrelation design covariance.
    pub rho: f64,
    pub seed: u64,
    /// Explicit `(index, value)` support; overrides `s_star` when present.
    pub theta_values: Option<Vec<(usize, f64)>>,
}

impl Default for GenSpec {
    fn default() -> Self {
        Self {
            n: 200,
            d: 2000,
            s_star: 3,
            sigma: 0.5,
            rho: 0.5,
            seed: 0,
            theta_values: None,
        }
    }
}

impl GenSpec {
    pub fn new(n: usize, d: usize, sigma: f64, seed: u64) -> Self {
        Self {
            n,
            d,
            sigma,
            seed,
            ..Self::default()
        }
    }

    /// Nonzero entries of the true coefficient vector.
    ///
    /// Without explicit values the first `min(s_star, 3)` default coefficients
    /// are used; any further ones are `+1, -1, +1, ...` placed on the next
    /// free indices after index 3.
    pub fn support(&self) -> Result<Vec<(usize, f64)>> {
        let support = match &self.theta_values {
            Some(v) => v.clone(),
            None => {
                let mut v: Vec<(usize, f64)> = DEFAULT_COEFFICIENTS.iter().copied().take(self.s_star).collect();
                let mut sign = 1.0;
                for k in 0..self.s_star.saturating_sub(DEFAULT_COEFFICIENTS.len()) {
                    v.push((4 + k, sign));
                    sign = -sign;
                }
                v
            }
        };
        for &(j, val) in &support {
            if j >= self.d {
                return Err(Error::invalid(format!("support index {j} out of range for d = {}", self.d)));
            }
            if !val.is_finite() {
                return Err(Error::NonFinite("true coefficient"));
            }
        }
        Ok(support)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::invalid("n and d must be positive"));
        }
        if self.theta_values.is_none() && self.s_star > self.d {
            return Err(Error::invalid("s_star must not exceed d"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid("sigma must be finite and non-negative"));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::invalid("rho must lie in [0, 1)"));
        }
        self.support().map(|_| ())
    }

    pub fn theta_star(&self) -> Result<Vec<f64>> {
        let mut theta = vec![0.0; self.d];
        for (j, v) in self.support()? {
            theta[j] = v;
        }
        Ok(theta)
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: DenseMatrix,
    pub y: Vec<f64>,
    pub theta_star: Vec<f64>,
}

impl Dataset {
    pub fn problem(&self) -> Result<Problem> {
        Problem::new(self.x.clone(), self.y.clone())
    }
}

/// Rows i.i.d. `N(0, (1 - rho) I + rho 11^T)` via `sqrt(1 - rho) z + sqrt(rho) g 1`.
pub fn equicorrelated_design(n: usize, d: usize, rho: f64, seed: u64) -> Result<DenseMatrix> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::invalid("rho must lie in [0, 1)"));
    }
    let mut rng = rng_for(seed, stream::DESIGN);
    let a = (1.0 - rho).sqrt();
    let b = rho.sqrt();
    let mut data = Vec::with_capacity(n * d);
    for _ in 0..n {
        let g = normal(&mut rng);
        for _ in 0..d {
            data.push(a * normal(&mut rng) + b * g);
        }
    }
    DenseMatrix::from_row_major(n, d, data)
}

fn response(x: &DenseMatrix, theta: &[f64], sigma: f64, rng: &mut ChaCha20Rng) -> Result<Vec<f64>> {
    let mut y = x.mat_vec(theta)?;
    if sigma > 0.0 {
        for v in &mut y {
            *v += sigma * normal(rng);
        }
    }
    Ok(y)
}

/// `y = X theta* + sigma * noise`.
pub fn generate(spec: &GenSpec) -> Result<Dataset> {
    spec.validate()?;
    let x = equicorrelated_design(spec.n, spec.d, spec.rho, spec.seed)?;
    let theta_star = spec.theta_star()?;
    let y = response(&x, &theta_star, spec.sigma, &mut rng_for(spec.seed, stream::NOISE))?;
    Ok(Dataset { x, y, theta_star })
}

#[derive(Debug, Clone)]
pub struct MultitaskDataset {
    pub x: DenseMatrix,
    /// Column `k` holds the response of task `k`.
    pub y: Vec<Vec<f64>>,
    /// Column `k` holds the coefficients of task `k`.
    pub theta_star: Vec<Vec<f64>>,
}

/// Shared design, one response per task with its own noise level.
///
/// `coefficients[k]` lists the `(index, value)` support of task `k`. The
/// design follows `spec` (its `sigma` and coefficients are ignored).
pub fn generate_multitask(spec: &GenSpec, coefficients: &[Vec<(usize, f64)>], sigmas: &[f64]) -> Result<MultitaskDataset> {
    if coefficients.len() != sigmas.len() || sigmas.is_empty() {
        return Err(Error::invalid("need one coefficient list and one sigma per task"));
    }
    let x = equicorrelated_design(spec.n, spec.d, spec.rho, spec.seed)?;
    let mut y = Vec::with_capacity(sigmas.len());
    let mut theta_star = Vec::with_capacity(sigmas.len());
    for (k, (coefs, &sigma)) in coefficients.iter().zip(sigmas).enumerate() {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::invalid("task sigma must be finite and non-negative"));
        }
        let task = GenSpec {
            theta_values: Some(coefs.clone()),
            ..spec.clone()
        };
        let theta = task.theta_star()?;
        let mut rng = rng_for(spec.seed, stream::TASK_NOISE_BASE + k as u64);
        y.push(response(&x, &theta, sigma, &mut rng)?);
        theta_star.push(theta);
    }
    Ok(MultitaskDataset { x, y, theta_star })
}

/// Samples `N(0, Omega^{-1})` where `Omega` is tridiagonal with unit diagonal
/// and off-diagonal `-rho`.
///
/// With `Omega = L L^T` (`L` lower bidiagonal), `x = L^{-T} z` has covariance
/// `Omega^{-1}`; the back substitution costs `O(d)` per sample.
pub fn generate_chain_graph(n: usize, d: usize, rho: f64, seed: u64) -> Result<DenseMatrix> {
    if !(rho.abs() < 1.0) {
        return Err(Error::invalid("chain correlation must satisfy |rho| < 1"));
    }
    if n == 0 || d == 0 {
        return Err(Error::invalid("n and d must be positive"));
    }
    let (diag, sub) = chain_cholesky(d, rho)?;
    let mut rng = rng_for(seed, stream::CHAIN);
    let mut data = vec![0.0; n * d];
    let mut z = vec![0.0; d];
    for row in data.chunks_exact_mut(d) {
        z.iter_mut().for_each(|v| *v = normal(&mut rng));
        // L^T x = z, L^T upper bidiagonal with diag[k] and sub[k] at (k, k + 1)
        row[d - 1] = z[d - 1] / diag[d - 1];
        for k in (0..d - 1).rev() {
            row[k] = (z[k] - sub[k] * row[k + 1]) / diag[k];
        }
    }
    DenseMatrix::from_row_major(n, d, data)
}

/// Cholesky factor of the chain precision: `diag[k] = L_kk`, `sub[k] = L_{k+1,k}`.
pub(crate) fn chain_cholesky(d: usize, rho: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut diag = vec![1.0; d];
    let mut sub = vec![0.0; d.saturating_sub(1)];
    for k in 1..d {
        sub[k - 1] = -rho / diag[k - 1];
        let rem = 1.0 - sub[k - 1] * sub[k - 1];
        if rem <= 0.0 {
            return Err(Error::invalid(format!(
                "chain precision with rho = {rho} is not positive definite at dimension {d}"
            )));
        }
        diag[k] = rem.sqrt();
    }
    Ok((diag, sub))
}
