use crate::activation::factorial;
use crate::error::{Error, Result};
use crate::graph::{CellInput, ProductGraph};
use crate::scalar::Scalar;

/// Default bound on the number of indexations the oracle will enumerate.
pub const DEFAULT_CAP: usize = 5_000_000;

/// Law of a standardized (unit variance) matrix entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntryLaw {
    Gaussian,
    Rademacher,
    /// Uniform on `{-1, 0, 1}`, rescaled to unit variance.
    UniformTernary,
    /// Circular complex Gaussian with `E|z|^2 = 1`; label `-l` is the conjugate of `l`.
    ComplexGaussian,
    /// Gaussian entries times an independent Bernoulli(p) mask scaled by `p^{-1/2}`.
    SparseGaussian(f64),
}

impl EntryLaw {
    /// `E[Z^n]` for the real laws.
    pub fn moment(self, n: usize) -> f64 {
        if n % 2 == 1 {
            return 0.0;
        }
        let m = n / 2;
        match self {
            EntryLaw::Gaussian | EntryLaw::ComplexGaussian => double_factorial(n),
            EntryLaw::Rademacher => 1.0,
            EntryLaw::UniformTernary => {
                if m == 0 {
                    1.0
                } else {
                    (2.0 / 3.0) * 1.5f64.powi(m as i32)
                }
            }
            EntryLaw::SparseGaussian(p) => {
                if m == 0 {
                    1.0
                } else {
                    p.powf(1.0 - m as f64) * double_factorial(n)
                }
            }
        }
    }

    /// `E[z^a conj(z)^b]` for the complex Gaussian law.
    pub fn complex_moment(a: usize, b: usize) -> f64 {
        if a == b {
            factorial(a)
        } else {
            0.0
        }
    }
}

/// `(n-1)!!` for even `n`, the `n`-th standard Gaussian moment.
pub fn double_factorial(n: usize) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    (1..n).step_by(2).map(|k| k as f64).product()
}

/// Brute-force Gaussian expectation, independent of the pairing machinery.
pub fn isserlis_oracle<T: Scalar>(g: &ProductGraph<T>, complex: bool, cap: usize) -> Result<T> {
    let law = if complex { EntryLaw::ComplexGaussian } else { EntryLaw::Gaussian };
    isserlis_oracle_with(g, law, cap)
}

/// Exact expectation over every indexation: random entries sharing a
/// (label, row, column) are grouped and replaced by their joint moment.
pub fn isserlis_oracle_with<T: Scalar>(g: &ProductGraph<T>, law: EntryLaw, cap: usize) -> Result<T> {
    if !g.free_cells().is_empty() {
        return Err(Error::FreeCellPresent);
    }
    let dims: Vec<usize> = g.vertices().iter().map(|v| v.dim).collect();
    let mut space: usize = 1;
    for &d in &dims {
        space = space.saturating_mul(d);
    }
    if space > cap {
        return Err(Error::TooLarge(format!("{space} indexations exceed the cap {cap}")));
    }
    let complex = law == EntryLaw::ComplexGaussian;
    let random: Vec<(usize, i32, f64)> = g
        .edges()
        .iter()
        .enumerate()
        .filter_map(|(e, edge)| match edge.input {
            CellInput::Random { label, sigma } => Some((e, label, sigma)),
            _ => None,
        })
        .collect();
    let sigma: f64 = random.iter().map(|r| r.2).product();
    let n = dims.len();
    let mut idx = vec![0usize; n];
    let mut total = T::zero();
    // (label class, row, col, count, conjugate count)
    let mut groups: Vec<(i32, usize, usize, usize, usize)> = Vec::new();
    loop {
        let mut p = T::one();
        for (v, vert) in g.vertices().iter().enumerate() {
            p *= crate::graph::eval_vertex_entry(&vert.input, idx[v]);
        }
        for edge in g.edges() {
            if !edge.input.is_random() {
                p *= crate::graph::eval_edge_entry(&edge.input, idx[edge.head], idx[edge.tail]);
            }
        }
        if p != T::zero() {
            groups.clear();
            for &(e, label, _) in &random {
                let edge = &g.edges()[e];
                let key = if complex { label.abs() } else { label };
                let conj = complex && label < 0;
                let (r, c) = (idx[edge.head], idx[edge.tail]);
                match groups.iter_mut().find(|x| x.0 == key && x.1 == r && x.2 == c) {
                    Some(x) => {
                        if conj {
                            x.4 += 1
                        } else {
                            x.3 += 1
                        }
                    }
                    None => groups.push((key, r, c, usize::from(!conj), usize::from(conj))),
                }
            }
            let mut m = 1.0;
            for &(_, _, _, a, b) in &groups {
                m *= if complex { EntryLaw::complex_moment(a, b) } else { law.moment(a) };
                if m == 0.0 {
                    break;
                }
            }
            if m != 0.0 {
                total += p * T::from(m);
            }
        }
        let mut a = 0;
        while a < n {
            idx[a] += 1;
            if idx[a] < dims[a] {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
        if a == n {
            break;
        }
    }
    Ok(total * T::from(sigma))
}
