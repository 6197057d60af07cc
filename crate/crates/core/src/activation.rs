use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

/// Pointwise activation: a polynomial `a_0 + a_1 t + ...` or ReLU.
#[derive(Debug, Clone, PartialEq)]
pub enum Activation {
    Polynomial(Vec<f64>),
    Relu,
}

impl Activation {
    pub fn linear() -> Self {
        Activation::Polynomial(vec![0.0, 1.0])
    }

    pub fn poly(coeffs: &[f64]) -> Self {
        let mut c = coeffs.to_vec();
        while c.len() > 1 && c[c.len() - 1] == 0.0 {
            c.pop();
        }
        if c.is_empty() {
            c.push(0.0);
        }
        Activation::Polynomial(c)
    }

    pub fn coeffs(&self) -> Result<&[f64]> {
        match self {
            Activation::Polynomial(c) => Ok(c),
            Activation::Relu => Err(Error::NonPolynomial),
        }
    }

    pub fn degree(&self) -> Result<usize> {
        Ok(self.coeffs()?.len() - 1)
    }

    /// `φ^{(m)}(0) = m! a_m`.
    pub fn deriv_at_zero(&self, m: usize) -> Result<f64> {
        let c = self.coeffs()?;
        Ok(c.get(m).map_or(0.0, |a| a * factorial(m)))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Activation::Polynomial(c) => c.iter().rev().fold(0.0, |acc, a| acc * t + a),
            Activation::Relu => t.max(0.0),
        }
    }

    /// Derivative, with ReLU'(0) = 0.
    pub fn deriv(&self, t: f64) -> f64 {
        match self {
            Activation::Polynomial(_) => self.derivative().eval(t),
            Activation::Relu => {
                if t > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Derivative as an activation; ReLU maps to the step, which has no
    /// polynomial form, so it is rejected.
    pub fn derivative_poly(&self) -> Result<Activation> {
        Ok(Activation::poly(&poly_derivative(self.coeffs()?)))
    }

    fn derivative(&self) -> Activation {
        self.derivative_poly().expect("polynomial")
    }
}

pub fn factorial(m: usize) -> f64 {
    (1..=m).map(|k| k as f64).product()
}

pub fn poly_derivative(c: &[f64]) -> Vec<f64> {
    if c.len() <= 1 {
        return vec![0.0];
    }
    c.iter().enumerate().skip(1).map(|(k, a)| a * k as f64).collect()
}

pub fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn poly_pow(a: &[f64], k: usize) -> Vec<f64> {
    (0..k).fold(vec![1.0], |acc, _| poly_mul(&acc, a))
}

impl FromStr for Activation {
    type Err = Error;

    /// `relu`, `linear`, or `poly:a0,a1,...`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "relu" => return Ok(Activation::Relu),
            "linear" | "identity" => return Ok(Activation::linear()),
            _ => {}
        }
        let body = s
            .strip_prefix("poly:")
            .ok_or_else(|| Error::Parse(format!("unknown activation '{s}'")))?;
        let coeffs: Vec<f64> = body
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("coefficient '{t}': {e}"))))
            .collect::<Result<_>>()?;
        if coeffs.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        Ok(Activation::poly(&coeffs))
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activation::Relu => write!(f, "relu"),
            Activation::Polynomial(c) => {
                let parts: Vec<String> = c.iter().map(|a| format!("{a}")).collect();
                write!(f, "poly:{}", parts.join(","))
            }
        }
    }
}

impl serde::Serialize for Activation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Activation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let a: Activation = "poly:0,1,1".parse().unwrap();
        assert_eq!(a, Activation::Polynomial(vec![0.0, 1.0, 1.0]));
        assert_eq!(a.to_string(), "poly:0,1,1");
        assert_eq!("relu".parse::<Activation>().unwrap(), Activation::Relu);
        assert!("tanh".parse::<Activation>().is_err());
    }

    #[test]
    fn derivatives_at_zero() {
        let a = Activation::poly(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(a.deriv_at_zero(0).unwrap(), 1.0);
        assert_eq!(a.deriv_at_zero(2).unwrap(), 6.0);
        assert_eq!(a.deriv_at_zero(3).unwrap(), 24.0);
        assert_eq!(a.deriv_at_zero(4).unwrap(), 0.0);
        assert_eq!(a.deriv(1.0), 2.0 + 6.0 + 12.0);
        assert!(Activation::Relu.deriv_at_zero(1).is_err());
        assert_eq!(Activation::Relu.deriv(0.0), 0.0);
    }
}
