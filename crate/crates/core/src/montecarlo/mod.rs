//! Random networks and Monte Carlo estimates of their limits.

mod experiments;
mod network;

pub use experiments::{
    empirical_ntk_mc, gp_covariance_mc, jacobian_moments_mc, mc_graph_value, rate_scan, sample_statistic, GpCovariance, GraphMc, JacobianMomentStat,
    RatePoint, RateScan, ScanStatistic,
};
pub use network::{
    empirical_ntk, forward_net, jacobian_net, jacobian_prefixes, sample_network, spectral_moments, Forward,
    NetworkSpec,
};

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal, Weibull};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    Gaussian,
    Rademacher,
    /// Uniform on `{-1, 0, 1}`.
    UniformTernary,
    /// Weibull magnitude with the given shape and a random sign.
    SignedWeibull(f64),
    /// `(a + ib)/sqrt(2)` with `a, b` standard normal.
    ComplexGaussian,
}

impl std::str::FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Distribution::Gaussian),
            "rademacher" => Ok(Distribution::Rademacher),
            "ternary" | "uniform_ternary" => Ok(Distribution::UniformTernary),
            "complex" | "complex_gaussian" => Ok(Distribution::ComplexGaussian),
            _ => match s.strip_prefix("weibull:").map(str::parse::<f64>) {
                Some(Ok(k)) => Ok(Distribution::SignedWeibull(k)),
                _ => Err(Error::Parse(format!("unknown distribution '{s}'"))),
            },
        }
    }
}

/// Entry law: a unit-variance distribution with an optional sparsity mask.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Law {
    pub distribution: Distribution,
    /// Keep probability `p` of a Bernoulli mask scaled by `p^{-1/2}`.
    pub sparsity: Option<f64>,
}

impl Law {
    pub fn gaussian() -> Self {
        Law { distribution: Distribution::Gaussian, sparsity: None }
    }

    pub fn of(distribution: Distribution) -> Self {
        Law { distribution, sparsity: None }
    }

    pub fn sparse(distribution: Distribution, p: f64) -> Self {
        Law { distribution, sparsity: Some(p) }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.sparsity {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::BadParameter(format!("sparsity {p} outside (0, 1]")));
            }
        }
        if let Distribution::SignedWeibull(k) = self.distribution {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::BadParameter(format!("Weibull shape {k}")));
            }
        }
        Ok(())
    }

    /// One real entry of unit variance.
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        let v = match self.distribution {
            Distribution::Gaussian | Distribution::ComplexGaussian => rng.sample::<f64, _>(StandardNormal),
            Distribution::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Distribution::UniformTernary => (rng.random_range(0..3) as f64 - 1.0) * 1.5f64.sqrt(),
            Distribution::SignedWeibull(k) => {
                let w = Weibull::new(1.0, k).expect("validated shape").sample(rng);
                let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
                s * w / libm::tgamma(1.0 + 2.0 / k).sqrt()
            }
        };
        match self.sparsity {
            Some(p) if p < 1.0 => {
                if rng.random::<f64>() < p {
                    v / p.sqrt()
                } else {
                    0.0
                }
            }
            _ => v,
        }
    }

    /// One complex entry with `E|z|^2 = 1`.
    pub fn draw_complex(&self, rng: &mut ChaCha8Rng) -> Complex64 {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let z = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
        match self.sparsity {
            Some(p) if p < 1.0 => {
                if rng.random::<f64>() < p {
                    z / p.sqrt()
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            _ => z,
        }
    }
}

/// Sampler configuration for a single matrix draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub law: Law,
    pub sigma: f64,
    pub seed: u64,
}

/// RNG for one trial: the trial index selects an independent stream.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(trial);
    r
}

/// `rows x cols` matrix of i.i.d. entries with variance `sigma^2`.
pub fn sample_matrix(law: &Law, sigma: f64, rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = sigma * law.draw(rng);
        }
    }
    m
}

pub fn sample_complex_matrix(law: &Law, sigma: f64, rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = law.draw_complex(rng) * sigma;
        }
    }
    m
}

/// Deterministic draw number `draw` of a matrix under `spec`.
pub fn sample_weights(spec: &WeightSpec, rows: usize, cols: usize, draw: u64) -> Result<DMatrix<f64>> {
    spec.law.validate()?;
    if rows == 0 || cols == 0 {
        return Err(Error::BadParameter(format!("shape {rows}x{cols}")));
    }
    if !(spec.sigma > 0.0 && spec.sigma.is_finite()) {
        return Err(Error::BadParameter(format!("sigma {}", spec.sigma)));
    }
    if spec.law.distribution == Distribution::ComplexGaussian {
        return Err(Error::BadParameter("complex law in a real sampler".into()));
    }
    Ok(sample_matrix(&spec.law, spec.sigma, rows, cols, &mut trial_rng(spec.seed, draw)))
}

/// Mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = pairwise_sum(xs) / n as f64;
        let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        let var = if n > 1 { pairwise_sum(&dev) / (n - 1) as f64 } else { 0.0 };
        Estimate { mean, stderr: (var / n as f64).sqrt(), trials: n }
    }

    /// `(mean - target) / stderr`; zero when both the error and the stderr vanish.
    pub fn z(&self, target: f64) -> f64 {
        let d = self.mean - target;
        if self.stderr == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY * d.signum()
            }
        } else {
            d / self.stderr
        }
    }

    pub fn within(&self, target: f64, bands: f64) -> bool {
        self.z(target).abs() <= bands
    }

    pub fn scaled(&self, c: f64) -> Self {
        Estimate { mean: self.mean * c, stderr: self.stderr * c.abs(), trials: self.trials }
    }
}

/// Sample variance with a standard error from the fourth central moment.
pub fn variance_estimate(xs: &[f64]) -> Estimate {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    let d2: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
    let d4: Vec<f64> = xs.iter().map(|x| (x - mean).powi(4)).collect();
    let var = pairwise_sum(&d2) / (n - 1.0);
    let m4 = pairwise_sum(&d4) / n;
    let se = ((m4 - var * var * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt();
    Estimate { mean: var, stderr: se, trials: xs.len() }
}

pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Run `f` once per trial on its own RNG stream; results come back in
/// trial order regardless of scheduling.
pub fn run_trials<R: Send>(trials: usize, seed: u64, f: impl Fn(&mut ChaCha8Rng) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..trials).into_par_iter().map(|t| f(&mut trial_rng(seed, t as u64))).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..trials).map(|t| f(&mut trial_rng(seed, t as u64))).collect()
    }
}
