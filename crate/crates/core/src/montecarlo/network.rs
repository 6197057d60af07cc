use super::{sample_matrix, Law};
use crate::activation::Activation;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Fully connected network `Phi_l = W_l phi_l(Phi_{l-1})`, `Phi_0 = W_0 x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkSpec {
    /// `N_0, N_1, ..., N_{L+1}`.
    pub widths: Vec<usize>,
    /// `phi_1, ..., phi_L`.
    pub activations: Vec<Activation>,
    /// Entry standard deviation of `W_0, ..., W_L`.
    pub sigmas: Vec<f64>,
    /// Per-layer NTK learning rates.
    pub rates: Vec<f64>,
    pub law: Law,
}

impl NetworkSpec {
    /// `sigma_0 = 1`, later layers scaled by `N^{-1/2}`; rates `1, 1/N, ...`.
    pub fn gp_limit(n0: usize, n: usize, n_out: usize, activations: Vec<Activation>, law: Law) -> Self {
        let l = activations.len();
        let mut widths = vec![n0];
        widths.extend(std::iter::repeat_n(n, l));
        widths.push(n_out);
        let mut sigmas = vec![1.0];
        let mut rates = vec![1.0];
        for layer in 1..=l {
            sigmas.push(1.0 / (widths[layer] as f64).sqrt());
            rates.push(1.0 / widths[layer] as f64);
        }
        NetworkSpec { widths, activations, sigmas, rates, law }
    }

    /// Every width `N`, every `sigma_l = N^{-1/2}`.
    pub fn jacobian_uniform(n: usize, activations: Vec<Activation>, law: Law) -> Self {
        let l = activations.len();
        let s = 1.0 / (n as f64).sqrt();
        NetworkSpec {
            widths: vec![n; l + 2],
            activations,
            sigmas: vec![s; l + 1],
            rates: vec![1.0 / n as f64; l + 1],
            law,
        }
    }

    pub fn depth(&self) -> usize {
        self.activations.len()
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.depth();
        if self.widths.len() != l + 2 || self.sigmas.len() != l + 1 || self.rates.len() != l + 1 {
            return Err(Error::ShapeMismatch(format!(
                "depth {l}: {} widths, {} sigmas, {} rates",
                self.widths.len(),
                self.sigmas.len(),
                self.rates.len()
            )));
        }
        if self.widths.contains(&0) {
            return Err(Error::BadParameter("zero width".into()));
        }
        if self.sigmas.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::BadParameter("non-positive sigma".into()));
        }
        self.law.validate()
    }
}

/// The first `layers` weight matrices `W_0, ..., W_{layers-1}`.
pub fn sample_network(spec: &NetworkSpec, layers: usize, rng: &mut ChaCha8Rng) -> Vec<DMatrix<f64>> {
    (0..layers)
        .map(|l| sample_matrix(&spec.law, spec.sigmas[l], spec.widths[l + 1], spec.widths[l], rng))
        .collect()
}

/// Pre-activations `Phi_0, ...` and post-activations `a_0 = x, a_1, ...`.
#[derive(Debug, Clone)]
pub struct Forward {
    pub pre: Vec<DVector<f64>>,
    pub post: Vec<DVector<f64>>,
}

impl Forward {
    pub fn output(&self) -> &DVector<f64> {
        self.pre.last().expect("at least one layer")
    }
}

/// Runs as many layers as `weights` provides.
pub fn forward_net(spec: &NetworkSpec, weights: &[DMatrix<f64>], x: &[f64]) -> Result<Forward> {
    if weights.is_empty() || weights.len() > spec.depth() + 1 {
        return Err(Error::ShapeMismatch(format!("{} weight matrices for depth {}", weights.len(), spec.depth())));
    }
    let mut a = DVector::from_column_slice(x);
    let mut pre: Vec<DVector<f64>> = Vec::with_capacity(weights.len());
    let mut post = Vec::with_capacity(weights.len());
    for (l, w) in weights.iter().enumerate() {
        if l > 0 {
            let act = &spec.activations[l - 1];
            a = pre[l - 1].map(|t: f64| act.eval(t));
        }
        if w.ncols() != a.len() {
            return Err(Error::ShapeMismatch(format!("W_{l} is {}x{}, input {}", w.nrows(), w.ncols(), a.len())));
        }
        pre.push(w * &a);
        post.push(a.clone());
    }
    Ok(Forward { pre, post })
}

/// `J_l = D_l W_{l-1} ... D_1 W_0` for `l = 1..=L`, where `weights` holds at least `W_0..W_{L-1}`.
pub fn jacobian_prefixes(spec: &NetworkSpec, weights: &[DMatrix<f64>], x: &[f64]) -> Result<Vec<DMatrix<f64>>> {
    let l = spec.depth();
    if weights.len() < l || l == 0 {
        return Err(Error::ShapeMismatch(format!("{} weight matrices for depth {l}", weights.len())));
    }
    let fwd = forward_net(spec, &weights[..l], x)?;
    let mut out: Vec<DMatrix<f64>> = Vec::with_capacity(l);
    for layer in 1..=l {
        let act = &spec.activations[layer - 1];
        let mut j = match out.last() {
            None => weights[0].clone(),
            Some(prev) => &weights[layer - 1] * prev,
        };
        for (i, &t) in fwd.pre[layer - 1].iter().enumerate() {
            let d = act.deriv(t);
            j.row_mut(i).scale_mut(d);
        }
        out.push(j);
    }
    Ok(out)
}

/// Post-activation Jacobian of `phi_L o Phi_{L-1}` at `x`.
pub fn jacobian_net(spec: &NetworkSpec, weights: &[DMatrix<f64>], x: &[f64]) -> Result<DMatrix<f64>> {
    Ok(jacobian_prefixes(spec, weights, x)?.pop().expect("depth >= 1"))
}

/// `(1/rows) Tr((J J^T)^k)` for `k = 1..=k_max`.
pub fn spectral_moments(j: &DMatrix<f64>, k_max: usize) -> Vec<f64> {
    let n = j.nrows() as f64;
    let s = j * j.transpose();
    let half = k_max.div_ceil(2);
    let mut powers = vec![s.clone()];
    for _ in 1..half {
        let next = powers.last().unwrap() * &s;
        powers.push(next);
    }
    (1..=k_max)
        .map(|k| {
            let (a, b) = (k / 2, k - k / 2);
            let t = if a == 0 { powers[0].trace() } else { powers[a - 1].dot(&powers[b - 1]) };
            t / n
        })
        .collect()
}

/// `sum_l rate_l <a_l(x), a_l(y)> B_l(x) B_l(y)^T`, with `B_l = dPhi_L/dPhi_l`.
pub fn empirical_ntk(spec: &NetworkSpec, weights: &[DMatrix<f64>], x: &[f64], y: &[f64]) -> Result<DMatrix<f64>> {
    let l = spec.depth();
    if weights.len() != l + 1 {
        return Err(Error::ShapeMismatch(format!("{} weight matrices for depth {l}", weights.len())));
    }
    let fx = forward_net(spec, weights, x)?;
    let fy = forward_net(spec, weights, y)?;
    let m = spec.widths[l + 1];
    let mut bx = DMatrix::<f64>::identity(m, m);
    let mut by = bx.clone();
    let mut theta = DMatrix::<f64>::zeros(m, m);
    for layer in (0..=l).rev() {
        let ip = fx.post[layer].dot(&fy.post[layer]);
        theta += (&bx * by.transpose()) * (spec.rates[layer] * ip);
        if layer > 0 {
            let act = &spec.activations[layer - 1];
            bx = backward_step(&bx, &weights[layer], &fx.pre[layer - 1], act);
            by = backward_step(&by, &weights[layer], &fy.pre[layer - 1], act);
        }
    }
    Ok(theta)
}

fn backward_step(b: &DMatrix<f64>, w: &DMatrix<f64>, pre: &DVector<f64>, act: &Activation) -> DMatrix<f64> {
    let mut out = b * w;
    for (c, &t) in pre.iter().enumerate() {
        out.column_mut(c).scale_mut(act.deriv(t));
    }
    out
}
