use num_complex::Complex64;
use num_traits::NumAssign;
use std::fmt::Debug;

/// Field used for graph values: `f64` or `Complex64`.
pub trait Scalar: Copy + Debug + PartialEq + Send + Sync + NumAssign + From<f64> + 'static {
    fn modulus(self) -> f64;
    fn conj(self) -> Self;
    fn re(self) -> f64;
}

impl Scalar for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> f64 {
        self
    }
}

impl Scalar for Complex64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
}

/// Relative closeness `|a-b| <= tol * max(1, |a|, |b|)`.
pub fn close<T: Scalar>(a: T, b: T, tol: f64) -> bool {
    let scale = 1f64.max(a.modulus()).max(b.modulus());
    (a - b).modulus() <= tol * scale
}
