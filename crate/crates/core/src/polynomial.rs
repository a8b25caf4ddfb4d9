//! Sparse polynomials in the base coordinates, evaluated in jet arithmetic.

use serde::{Deserialize, Serialize};

use crate::deriv::Jet;
use crate::error::{Error, Result};

/// Highest total degree accepted for coefficient tables.
pub const MAX_DEGREE: u32 = 4;

/// One term `c * x^e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub c: f64,
    pub e: Vec<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn constant(c: f64) -> Polynomial {
        Polynomial {
            terms: vec![Monomial { c, e: Vec::new() }],
        }
    }

    pub fn zero() -> Polynomial {
        Polynomial::default()
    }

    pub fn term(c: f64, e: Vec<u32>) -> Polynomial {
        Polynomial {
            terms: vec![Monomial { c, e }],
        }
    }

    pub fn plus(mut self, c: f64, e: Vec<u32>) -> Polynomial {
        self.terms.push(Monomial { c, e });
        self
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Rejects exponent vectors longer than `n`, degrees above [`MAX_DEGREE`]
    /// and non-finite coefficients.
    pub fn validate(&self, n: usize) -> Result<()> {
        for t in &self.terms {
            if t.e.len() > n {
                return Err(Error::InvalidSpec(format!(
                    "monomial exponent {:?} has more than {n} entries",
                    t.e
                )));
            }
            if !t.c.is_finite() {
                return Err(Error::InvalidSpec(format!(
                    "coefficient {} is not finite",
                    t.c
                )));
            }
        }
        if self.degree() > MAX_DEGREE {
            return Err(Error::InvalidSpec(format!(
                "polynomial degree {} exceeds {MAX_DEGREE}",
                self.degree()
            )));
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.c * t
                    .e
                    .iter()
                    .zip(x)
                    .map(|(&p, v)| v.powi(p as i32))
                    .product::<f64>()
            })
            .sum()
    }

    /// Evaluates at position jets; `x` must be non-empty.
    pub fn eval(&self, x: &[Jet]) -> Jet {
        let mut acc = x[0].zero_like();
        for t in &self.terms {
            let mut m = x[0].constant_like(t.c);
            for (var, &p) in t.e.iter().enumerate() {
                for _ in 0..p {
                    m = &m * &x[var];
                }
            }
            acc += &m;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_evaluation_matches_plain_value_and_gradient() {
        let p = Polynomial::constant(1.0)
            .plus(2.0, vec![2, 1])
            .plus(-0.5, vec![0, 3]);
        let x = [0.3, -0.4];
        let jets = [Jet::variable(2, 2, 0, x[0]), Jet::variable(2, 2, 1, x[1])];
        let v = p.eval(&jets);
        assert!((v.value() - p.value(&x)).abs() < 1e-15);
        // d/dx0 = 4 x0 x1
        assert!((v.partial(&[1, 0]).unwrap() - 4.0 * x[0] * x[1]).abs() < 1e-15);
        // d/dx1 = 2 x0^2 - 1.5 x1^2
        assert!((v.partial(&[0, 1]).unwrap() - (2.0 * 0.09 - 1.5 * 0.16)).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        assert!(Polynomial::term(1.0, vec![5]).validate(1).is_err());
        assert!(Polynomial::term(1.0, vec![1, 1, 1]).validate(2).is_err());
        assert!(Polynomial::term(1.0, vec![2, 2]).validate(2).is_ok());
    }
}
