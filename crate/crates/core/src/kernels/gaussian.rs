use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::trees::{enumerate_trees, LeafMode, Tree};
use std::collections::HashMap;
use std::f64::consts::PI;

/// Covariance of a centered Gaussian pair `(X, Y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cov2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Cov2 {
    pub fn new(xx: f64, xy: f64, yy: f64) -> Result<Self> {
        let det = xx * yy - xy * xy;
        let scale = 1f64.max(xx.abs() * yy.abs());
        if xx < 0.0 || yy < 0.0 || det < -1e-12 * scale {
            return Err(Error::PsdViolation(det));
        }
        Ok(Cov2 { xx, xy, yy })
    }

    pub fn gram(x: &[f64], y: &[f64]) -> Result<Self> {
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
        Cov2::new(dot(x, x), dot(x, y), dot(y, y))
    }
}

/// Table of `E[X^m Y^n]` for `m <= m_max`, `n <= n_max`:
/// `E[X^m Y^n] = (m-1) σ_xx E[X^{m-2} Y^n] + n σ_xy E[X^{m-1} Y^{n-1}]`.
pub fn mixed_moments(cov: Cov2, m_max: usize, n_max: usize) -> Vec<Vec<f64>> {
    let mut t = vec![vec![0.0; n_max + 1]; m_max + 1];
    t[0][0] = 1.0;
    for n in 2..=n_max {
        t[0][n] = (n - 1) as f64 * cov.yy * t[0][n - 2];
    }
    for m in 1..=m_max {
        for n in 0..=n_max {
            let mut v = 0.0;
            if m >= 2 {
                v += (m - 1) as f64 * cov.xx * t[m - 2][n];
            }
            if n >= 1 {
                v += n as f64 * cov.xy * t[m - 1][n - 1];
            }
            t[m][n] = v;
        }
    }
    t
}

/// `E[φ(X) ψ(Y)]` for polynomial `φ`, `ψ`.
pub fn bivariate_gaussian_moment(phi: &Activation, psi: &Activation, cov: Cov2) -> Result<f64> {
    let (a, b) = (phi.coeffs()?, psi.coeffs()?);
    let t = mixed_moments(cov, a.len() - 1, b.len() - 1);
    let mut s = 0.0;
    for (m, am) in a.iter().enumerate() {
        for (n, bn) in b.iter().enumerate() {
            s += am * bn * t[m][n];
        }
    }
    Ok(s)
}

fn arc_angle(cov: Cov2) -> (f64, f64) {
    let norm = (cov.xx * cov.yy).sqrt();
    if norm == 0.0 {
        return (norm, PI / 2.0);
    }
    let rho = (cov.xy / norm).clamp(-1.0, 1.0);
    (norm, rho.acos())
}

/// `E[f(X) f(Y)]` with `f = φ` or `f = φ'` when `derivative` is set.
/// ReLU uses the arc-cosine closed forms.
pub fn pair_expectation(act: &Activation, cov: Cov2, derivative: bool) -> Result<f64> {
    match act {
        Activation::Relu => {
            let (norm, theta) = arc_angle(cov);
            if derivative {
                Ok((PI - theta) / (2.0 * PI))
            } else {
                Ok(norm / (2.0 * PI) * (theta.sin() + (PI - theta) * theta.cos()))
            }
        }
        Activation::Polynomial(_) => {
            let f = if derivative { act.derivative_poly()? } else { act.clone() };
            bivariate_gaussian_moment(&f, &f, cov)
        }
    }
}

/// Covariances of layers `0..=L`: layer 0 is the Gram matrix of the
/// inputs, layer `l` is `E[φ_l(X) φ_l(Y)]` under layer `l-1`.
pub fn gp_kernel_layers(l: usize, x: &[f64], y: &[f64], acts: &[Activation]) -> Result<Vec<Cov2>> {
    let mut out = vec![Cov2::gram(x, y)?];
    for layer in 1..=l {
        let act = acts.get(layer - 1).ok_or(Error::NoSuchLayer(layer))?;
        let c = out[layer - 1];
        let xx = pair_expectation(act, Cov2::new(c.xx, c.xx, c.xx)?, false)?;
        let yy = pair_expectation(act, Cov2::new(c.yy, c.yy, c.yy)?, false)?;
        let xy = pair_expectation(act, c, false)?;
        out.push(Cov2::new(xx, xy, yy)?);
    }
    Ok(out)
}

/// `K_L(x, y)` by iterating the Gaussian expectation layer by layer.
pub fn gp_kernel_recursive(l: usize, x: &[f64], y: &[f64], acts: &[Activation]) -> Result<f64> {
    Ok(gp_kernel_layers(l, x, y, acts)?[l].xy)
}

/// `Θ_0 = <x,y>`, `Θ_l = K_l + K̇_l Θ_{l-1}` with `K̇_l = E[φ_l'(X) φ_l'(Y)]`.
pub fn ntk_limit(l: usize, x: &[f64], y: &[f64], acts: &[Activation]) -> Result<f64> {
    let covs = gp_kernel_layers(l, x, y, acts)?;
    let mut theta = covs[0].xy;
    for layer in 1..=l {
        let kdot = pair_expectation(&acts[layer - 1], covs[layer - 1], true)?;
        theta = covs[layer].xy + kdot * theta;
    }
    Ok(theta)
}

/// Bound on `|T_L|^2` for the tree route.
pub const TREE_PAIR_CAP: usize = 4_000_000;

type Side = u8;

struct Alpha<'a> {
    gram: [[f64; 2]; 2],
    memo: HashMap<(&'a Tree, Side, &'a Tree, Side), f64>,
}

impl<'a> Alpha<'a> {
    /// Sum over perfect pairings of the children of both roots of the
    /// product of pair values; leaves pair to inner products.
    fn eval(&mut self, a: &'a Tree, sa: Side, b: &'a Tree, sb: Side) -> f64 {
        if a.layer() != b.layer() {
            return 0.0;
        }
        if let (Tree::Leaf { .. }, Tree::Leaf { .. }) = (a, b) {
            return self.gram[sa as usize][sb as usize];
        }
        let key = if (a, sa) <= (b, sb) { (a, sa, b, sb) } else { (b, sb, a, sa) };
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let items: Vec<(&'a Tree, Side)> =
            a.children().iter().map(|c| (c, sa)).chain(b.children().iter().map(|c| (c, sb))).collect();
        let v = if items.len() % 2 == 1 { 0.0 } else { self.pairings(&items) };
        self.memo.insert(key, v);
        v
    }

    fn pairings(&mut self, items: &[(&'a Tree, Side)]) -> f64 {
        if items.is_empty() {
            return 1.0;
        }
        let (first, rest) = (items[0], &items[1..]);
        let mut total = 0.0;
        for k in 0..rest.len() {
            let pv = self.eval(first.0, first.1, rest[k].0, rest[k].1);
            if pv == 0.0 {
                continue;
            }
            let others: Vec<_> = rest.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &t)| t).collect();
            total += pv * self.pairings(&others);
        }
        total
    }
}

/// `K_L(x, y) = Σ_{τ,η} (φ_τ φ_η / s_τ s_η) α(τ ⊔ η)` over x-mode trees.
pub fn gp_kernel_via_trees(l: usize, x: &[f64], y: &[f64], acts: &[Activation], cap: usize) -> Result<f64> {
    let trees = enumerate_trees(l, 1, acts, LeafMode::X)?;
    if trees.len().saturating_mul(trees.len()) > cap {
        return Err(Error::CapExceeded(format!("{} tree pairs", trees.len() * trees.len())));
    }
    let g = Cov2::gram(x, y)?;
    let mut alpha = Alpha { gram: [[g.xx, g.xy], [g.xy, g.yy]], memo: HashMap::new() };
    let coeffs: Vec<f64> = trees
        .iter()
        .map(|t| Ok(t.phi_coeff(acts)? / t.symmetry_factor() as f64))
        .collect::<Result<_>>()?;
    let mut total = 0.0;
    for (t, ct) in trees.iter().zip(&coeffs) {
        for (e, ce) in trees.iter().zip(&coeffs) {
            total += ct * ce * alpha.eval(t, 0, e, 1);
        }
    }
    Ok(total)
}
