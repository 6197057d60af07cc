use super::{
    forward_net, jacobian_prefixes, run_trials, sample_complex_matrix, sample_matrix, sample_network,
    spectral_moments, variance_estimate, Distribution, Estimate, Law, NetworkSpec,
};
use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::graph::{Mat, ProductGraph, Strategy};
use crate::kernels::fc_moments_float;
use crate::wick::lambda_g;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::HashMap;

/// Monte Carlo summary for one graph.
#[derive(Debug, Clone, Serialize)]
pub struct GraphMc {
    /// Real part of `W_G`.
    pub value: Estimate,
    /// Imaginary part, for complex entry laws.
    pub imag: Option<Estimate>,
    /// Bulk dimension used for `lambda_G`.
    pub n: usize,
    pub lambda: f64,
    /// `N Var(lambda_G W_G)`.
    pub scaled_var: Estimate,
}

/// Sample `W_G` with one matrix per label per trial. Under the complex law,
/// label `-l` is the entrywise conjugate of label `l`.
pub fn mc_graph_value(g: &ProductGraph<f64>, trials: usize, law: &Law, seed: u64) -> Result<GraphMc> {
    law.validate()?;
    if trials < 2 {
        return Err(Error::BadParameter("at least two trials".into()));
    }
    let n = g.vertices().iter().map(|v| v.dim).max().unwrap_or(1);
    let lambda = lambda_g(g, n);
    let complex = law.distribution == Distribution::ComplexGaussian;
    let samples: Vec<Result<(f64, f64)>> = if complex {
        let gc = g.map_scalar(|x| Complex64::new(x, 0.0));
        run_trials(trials, seed, |rng| {
            let mut drawn: HashMap<i32, DMatrix<Complex64>> = HashMap::new();
            let inst = gc.instantiate(|label, sigma, rows, cols| {
                let base = drawn
                    .entry(label.abs())
                    .or_insert_with(|| sample_complex_matrix(law, sigma, rows, cols, rng));
                Mat::from_fn(rows, cols, |i, j| {
                    let z = base[(i, j)];
                    if label < 0 {
                        z.conj()
                    } else {
                        z
                    }
                })
            })?;
            let v = inst.value(Strategy::Greedy)?;
            Ok((v.re, v.im))
        })
    } else {
        run_trials(trials, seed, |rng| {
            let mut drawn: HashMap<i32, DMatrix<f64>> = HashMap::new();
            let inst = g.instantiate(|label, sigma, rows, cols| {
                let m = drawn.entry(label).or_insert_with(|| sample_matrix(law, sigma, rows, cols, rng));
                Mat::from_fn(rows, cols, |i, j| m[(i, j)])
            })?;
            Ok((inst.value(Strategy::Greedy)?, 0.0))
        })
    };
    let samples: Vec<(f64, f64)> = samples.into_iter().collect::<Result<_>>()?;
    let re: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let scaled: Vec<f64> = re.iter().map(|v| v * lambda).collect();
    let imag = complex.then(|| Estimate::from_samples(&samples.iter().map(|s| s.1).collect::<Vec<_>>()));
    Ok(GraphMc {
        value: Estimate::from_samples(&re),
        imag,
        n,
        lambda,
        scaled_var: variance_estimate(&scaled).scaled(n as f64),
    })
}

/// A vector-valued statistic of a random width-`n` model with known limits.
pub trait ScanStatistic: Sync {
    fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>>;
    fn targets(&self, n: usize) -> Vec<f64>;
}

#[derive(Debug, Clone, Serialize)]
pub struct RatePoint {
    pub n: usize,
    pub mse: f64,
    pub mse_stderr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateScan {
    pub points: Vec<RatePoint>,
    pub slope: f64,
    pub intercept: f64,
}

/// Per-component MSE against the target at each width, and the least-squares
/// slope of `ln MSE` against `ln N`.
pub fn rate_scan(stat: &dyn ScanStatistic, widths: &[usize], trials: usize, seed: u64) -> Result<Vec<RateScan>> {
    let mut distinct = widths.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::DegenerateFit(format!("{} distinct widths, need 3", distinct.len())));
    }
    if trials == 0 {
        return Err(Error::BadParameter("zero trials".into()));
    }
    let mut per_component: Vec<Vec<RatePoint>> = Vec::new();
    for (wi, &n) in widths.iter().enumerate() {
        let targets = stat.targets(n);
        let width_seed = seed ^ ((wi as u64 + 1) << 40);
        let runs: Vec<Result<Vec<f64>>> = run_trials(trials, width_seed, |rng| stat.sample(n, rng));
        let runs: Vec<Vec<f64>> = runs.into_iter().collect::<Result<_>>()?;
        per_component.resize_with(targets.len(), Vec::new);
        for (c, &t) in targets.iter().enumerate() {
            let sq: Vec<f64> = runs.iter().map(|r| (r[c] - t).powi(2)).collect();
            let e = Estimate::from_samples(&sq);
            per_component[c].push(RatePoint { n, mse: e.mean, mse_stderr: e.stderr });
        }
    }
    per_component
        .into_iter()
        .map(|points| {
            let (slope, intercept) = loglog_fit(&points)?;
            Ok(RateScan { points, slope, intercept })
        })
        .collect()
}

fn loglog_fit(points: &[RatePoint]) -> Result<(f64, f64)> {
    let scale = points.iter().map(|p| p.mse.abs()).fold(0.0, f64::max);
    if points.iter().any(|p| !(p.mse > 1e-13 * scale.max(1.0)) || !p.mse.is_finite()) {
        return Err(Error::DegenerateFit("MSE vanishes at some width".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mse.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all widths equal".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Spectral moments `m_1..m_kmax` of an all-width-`N` Jacobian at `x = 1`.
#[derive(Debug, Clone)]
pub struct JacobianMomentStat {
    pub depth: usize,
    pub k_max: usize,
    pub activations: Vec<Activation>,
    pub law: Law,
    theory: Vec<f64>,
}

impl JacobianMomentStat {
    pub fn new(depth: usize, k_max: usize, activations: Vec<Activation>, law: Law) -> Result<Self> {
        if activations.len() != depth {
            return Err(Error::ArityMismatch { expected: depth, got: activations.len() });
        }
        let m = fc_moments_float(k_max, depth, 1.0, &activations)?;
        let theory = (0..k_max).map(|k| m[k][depth]).collect();
        Ok(JacobianMomentStat { depth, k_max, activations, law, theory })
    }
}

impl ScanStatistic for JacobianMomentStat {
    fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        let spec = NetworkSpec::jacobian_uniform(n, self.activations.clone(), self.law);
        let w = sample_network(&spec, self.depth, rng);
        let j = jacobian_prefixes(&spec, &w, &vec![1.0; n])?.pop().unwrap();
        Ok(spectral_moments(&j, self.k_max))
    }

    fn targets(&self, _n: usize) -> Vec<f64> {
        self.theory.clone()
    }
}

/// `out[L-1][k-1]` estimates `E m_k` of the depth-`L` Jacobian for every
/// `L <= depth`; each trial reuses one network prefix across depths.
pub fn jacobian_moments_mc(
    depth: usize,
    k_max: usize,
    n: usize,
    trials: usize,
    activations: &[Activation],
    law: &Law,
    seed: u64,
) -> Result<Vec<Vec<Estimate>>> {
    if activations.len() != depth || depth == 0 {
        return Err(Error::ArityMismatch { expected: depth, got: activations.len() });
    }
    law.validate()?;
    let spec = NetworkSpec::jacobian_uniform(n, activations.to_vec(), *law);
    let x = vec![1.0; n];
    let runs: Vec<Result<Vec<Vec<f64>>>> = run_trials(trials, seed, |rng| {
        let w = sample_network(&spec, depth, rng);
        Ok(jacobian_prefixes(&spec, &w, &x)?.iter().map(|j| spectral_moments(j, k_max)).collect())
    });
    let runs: Vec<Vec<Vec<f64>>> = runs.into_iter().collect::<Result<_>>()?;
    Ok((0..depth)
        .map(|l| {
            (0..k_max)
                .map(|k| Estimate::from_samples(&runs.iter().map(|r| r[l][k]).collect::<Vec<_>>()))
                .collect()
        })
        .collect())
}

/// Covariances of output coordinates across independent initializations.
#[derive(Debug, Clone, Serialize)]
pub struct GpCovariance {
    /// `cov[a][b]`: `E [Phi_L(x_a)]_1 [Phi_L(x_b)]_1`.
    pub cov: Vec<Vec<Estimate>>,
    /// `E [Phi_L(x_a)]_1 [Phi_L(x_a)]_2`, zero in the limit.
    pub cross: Vec<Estimate>,
}

/// Output means vanish by symmetry of the first layer, so products are not centred.
pub fn gp_covariance_mc(spec: &NetworkSpec, inputs: &[Vec<f64>], trials: usize, seed: u64) -> Result<GpCovariance> {
    spec.validate()?;
    let l = spec.depth();
    if spec.widths[l + 1] < 2 {
        return Err(Error::BadParameter("need two output coordinates".into()));
    }
    let runs: Vec<Result<Vec<(f64, f64)>>> = run_trials(trials, seed, |rng| {
        let w = sample_network(spec, l + 1, rng);
        inputs
            .iter()
            .map(|x| {
                let f = forward_net(spec, &w, x)?;
                Ok((f.output()[0], f.output()[1]))
            })
            .collect()
    });
    let runs: Vec<Vec<(f64, f64)>> = runs.into_iter().collect::<Result<_>>()?;
    let m = inputs.len();
    let cov = (0..m)
        .map(|a| {
            (0..m)
                .map(|b| Estimate::from_samples(&runs.iter().map(|r| r[a].0 * r[b].0).collect::<Vec<_>>()))
                .collect()
        })
        .collect();
    let cross = (0..m)
        .map(|a| Estimate::from_samples(&runs.iter().map(|r| r[a].0 * r[a].1).collect::<Vec<_>>()))
        .collect();
    Ok(GpCovariance { cov, cross })
}

/// Entry-wise NTK estimate over independent initializations.
pub fn empirical_ntk_mc(spec: &NetworkSpec, x: &[f64], y: &[f64], trials: usize, seed: u64) -> Result<Vec<Vec<Estimate>>> {
    spec.validate()?;
    let l = spec.depth();
    let m = spec.widths[l + 1];
    let runs: Vec<Result<DMatrix<f64>>> = run_trials(trials, seed, |rng| {
        let w = sample_network(spec, l + 1, rng);
        super::empirical_ntk(spec, &w, x, y)
    });
    let runs: Vec<DMatrix<f64>> = runs.into_iter().collect::<Result<_>>()?;
    Ok((0..m)
        .map(|a| {
            (0..m)
                .map(|b| Estimate::from_samples(&runs.iter().map(|t| t[(a, b)]).collect::<Vec<_>>()))
                .collect()
        })
        .collect())
}

/// Draw `trials` samples of a scalar statistic on independent streams.
pub fn sample_statistic(trials: usize, seed: u64, f: impl Fn(&mut ChaCha8Rng) -> f64 + Sync + Send) -> Estimate {
    Estimate::from_samples(&run_trials(trials, seed, f))
}

