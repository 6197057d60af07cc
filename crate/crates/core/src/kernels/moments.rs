use super::nc::{kreweras_dual, nc_enumerate, NcPartition};
use crate::activation::Activation;
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use std::fmt::Debug;
use std::ops::{Add, Mul};

/// Number system for the moment recursion: `f64` or exact rationals.
pub trait Field: Clone + Debug + Zero + One + Add<Output = Self> + Mul<Output = Self> {
    fn from_f64(x: f64) -> Result<Self>;
    fn from_u64(n: u64) -> Self;
    fn to_f64(&self) -> f64;
    fn half() -> Self;
}

impl Field for f64 {
    fn from_f64(x: f64) -> Result<Self> {
        Ok(x)
    }
    fn from_u64(n: u64) -> Self {
        n as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn half() -> Self {
        0.5
    }
}

impl Field for BigRational {
    fn from_f64(x: f64) -> Result<Self> {
        BigRational::from_float(x).ok_or_else(|| Error::BadParameter(format!("{x} is not finite")))
    }
    fn from_u64(n: u64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn half() -> Self {
        BigRational::new(BigInt::from(1), BigInt::from(2))
    }
}

fn poly_mul<F: Field>(a: &[F], b: &[F]) -> Vec<F> {
    let mut out = vec![F::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].clone() + x.clone() * y.clone();
        }
    }
    out
}

fn poly_pow<F: Field>(a: &[F], k: usize) -> Vec<F> {
    (0..k).fold(vec![F::one()], |acc, _| poly_mul(&acc, a))
}

/// `E[p(X)]` for `X ~ N(0, v)`: `Σ_j c_{2j} (2j-1)!! v^j`.
fn gaussian_poly_mean<F: Field>(c: &[F], v: &F) -> F {
    let mut total = F::zero();
    let mut df = F::one(); // (2j-1)!!
    let mut vp = F::one(); // v^j
    for j in 0..=(c.len().saturating_sub(1) / 2) {
        if j > 0 {
            df = df * F::from_u64(2 * j as u64 - 1);
            vp = vp * v.clone();
        }
        total = total + c[2 * j].clone() * df.clone() * vp.clone();
    }
    total
}

/// `μ_{k,l} = E[φ_l'(X)^{2k}]` and `K_l = E[φ_l(X)^2]` with `X ~ N(0, K_{l-1})`
/// and `K_0 = x2`. ReLU gives `μ = 1/2` and `K_l = K_{l-1}/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MuTable<F> {
    /// `mu[k-1][l-1]`.
    pub mu: Vec<Vec<F>>,
    /// `kx[l]` for `l = 0..=L`.
    pub kx: Vec<F>,
}

pub fn mu_table<F: Field>(k_max: usize, l: usize, x2: f64, acts: &[Activation]) -> Result<MuTable<F>> {
    if !(x2 >= 0.0) {
        return Err(Error::BadParameter(format!("x2 = {x2} must be nonnegative")));
    }
    let mut kx = vec![F::from_f64(x2)?];
    let mut mu = vec![Vec::with_capacity(l); k_max];
    for layer in 1..=l {
        let act = acts.get(layer - 1).ok_or(Error::NoSuchLayer(layer))?;
        let prev = kx[layer - 1].clone();
        match act {
            Activation::Relu => {
                for row in mu.iter_mut() {
                    row.push(F::half());
                }
                kx.push(prev * F::half());
            }
            Activation::Polynomial(c) => {
                let coeffs: Vec<F> = c.iter().map(|&a| F::from_f64(a)).collect::<Result<_>>()?;
                let d: Vec<F> = if coeffs.len() <= 1 {
                    vec![F::zero()]
                } else {
                    coeffs.iter().enumerate().skip(1).map(|(j, a)| a.clone() * F::from_u64(j as u64)).collect()
                };
                let d2 = poly_mul(&d, &d);
                for (k, row) in mu.iter_mut().enumerate() {
                    row.push(gaussian_poly_mean(&poly_pow(&d2, k + 1), &prev));
                }
                kx.push(gaussian_poly_mean(&poly_mul(&coeffs, &coeffs), &prev));
            }
        }
    }
    Ok(MuTable { mu, kx })
}

/// `m[k-1][L]` for `L = 0..=depth`: `m_{k,0} = 1` and
/// `m_{k,L} = Σ_{π ∈ NC_k} Π_{B∈π} μ_{|B|,L} Π_{B∈π*} m_{|B|,L-1}`.
pub fn fc_moments<F: Field>(k_max: usize, depth: usize, x2: f64, acts: &[Activation]) -> Result<Vec<Vec<F>>> {
    let table = mu_table::<F>(k_max, depth, x2, acts)?;
    let mut parts: Vec<Vec<(NcPartition, NcPartition)>> = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let mut v = Vec::new();
        for p in nc_enumerate(k)? {
            let d = kreweras_dual(&p, k)?;
            v.push((p, d));
        }
        parts.push(v);
    }
    let mut m = vec![vec![F::one()]; k_max];
    for layer in 1..=depth {
        let prev: Vec<F> = m.iter().map(|row| row[layer - 1].clone()).collect();
        for k in 1..=k_max {
            let mut total = F::zero();
            for (p, d) in &parts[k - 1] {
                let mut term = F::one();
                for s in p.block_sizes() {
                    term = term * table.mu[s - 1][layer - 1].clone();
                }
                for s in d.block_sizes() {
                    term = term * prev[s - 1].clone();
                }
                total = total + term;
            }
            m[k - 1].push(total);
        }
    }
    Ok(m)
}

pub fn fc_moments_float(k_max: usize, depth: usize, x2: f64, acts: &[Activation]) -> Result<Vec<Vec<f64>>> {
    fc_moments::<f64>(k_max, depth, x2, acts)
}

/// Fuss–Catalan number `binom(k(L+1), k) / (kL + 1)`.
pub fn fuss_catalan(k: u64, l: u64) -> u64 {
    let n = k * (l + 1);
    let mut c: u128 = 1;
    for i in 0..k as u128 {
        c = c * (n as u128 - i) / (i + 1);
    }
    (c / (k * l + 1) as u128) as u64
}

/// Moments `m_{k,L}` with the constants that produced them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentTable {
    pub activation: String,
    pub x2: f64,
    pub k_max: usize,
    pub depth: usize,
    /// `m_rational[k-1][L]` rendered as `p/q`.
    pub m_rational: Vec<Vec<String>>,
    pub m_float: Vec<Vec<f64>>,
    pub mu: Vec<Vec<f64>>,
    pub kx: Vec<f64>,
}

impl MomentTable {
    /// Layers use the same activation.
    pub fn compute(k_max: usize, depth: usize, x2: f64, act: &Activation) -> Result<Self> {
        let acts = vec![act.clone(); depth];
        let exact = fc_moments::<BigRational>(k_max, depth, x2, &acts)?;
        let float = fc_moments::<f64>(k_max, depth, x2, &acts)?;
        let mt = mu_table::<f64>(k_max, depth, x2, &acts)?;
        Ok(MomentTable {
            activation: act.to_string(),
            x2,
            k_max,
            depth,
            m_rational: exact.iter().map(|row| row.iter().map(|r| r.to_string()).collect()).collect(),
            m_float: float,
            mu: mt.mu,
            kx: mt.kx,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,L,m_theory_rational,m_theory_float\n");
        for k in 1..=self.k_max {
            for l in 1..=self.depth {
                s.push_str(&format!(
                    "{k},{l},{},{}\n",
                    self.m_rational[k - 1][l],
                    crate::report::sig(self.m_float[k - 1][l], 9)
                ));
            }
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }
}
