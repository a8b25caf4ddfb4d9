//! Point values and jet-valued fields of tensors on the pullback bundle.
//!
//! Components are stored row-major. The variance string has one character
//! per slot: `u` for a contravariant slot, `l` for a covariant one.

use serde::{Deserialize, Serialize};

use crate::deriv::Jet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symmetry {
    Symmetric(usize, usize),
    Antisymmetric(usize, usize),
}

/// Row-major offset of `idx` in an `n`-dimensional tensor.
pub fn flat(n: usize, idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

/// Inverse of [`flat`].
pub fn unflat(n: usize, rank: usize, mut offset: usize) -> Vec<usize> {
    let mut idx = vec![0; rank];
    for slot in (0..rank).rev() {
        idx[slot] = offset % n;
        offset /= n;
    }
    idx
}

fn check_variance(variance: &str) -> Result<()> {
    if variance.chars().all(|c| c == 'u' || c == 'l') {
        Ok(())
    } else {
        Err(Error::UnsupportedVariance(variance.to_string()))
    }
}

/// A tensor evaluated at one point of `TM_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorValue {
    pub n: usize,
    pub variance: String,
    pub symmetries: Vec<Symmetry>,
    pub data: Vec<f64>,
}

impl TensorValue {
    pub fn new(n: usize, variance: &str, data: Vec<f64>) -> Result<TensorValue> {
        check_variance(variance)?;
        let expected = n.pow(variance.len() as u32);
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: data.len(),
            });
        }
        Ok(TensorValue {
            n,
            variance: variance.to_string(),
            symmetries: Vec::new(),
            data,
        })
    }

    pub fn scalar(value: f64) -> TensorValue {
        TensorValue {
            n: 1,
            variance: String::new(),
            symmetries: Vec::new(),
            data: vec![value],
        }
    }

    pub fn with_symmetries(mut self, symmetries: &[Symmetry]) -> TensorValue {
        self.symmetries = symmetries.to_vec();
        self
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.n; self.rank()]
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[flat(self.n, idx)]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest violation of the declared symmetries.
    pub fn symmetry_residual(&self) -> f64 {
        let rank = self.rank();
        let mut worst: f64 = 0.0;
        for offset in 0..self.data.len() {
            let idx = unflat(self.n, rank, offset);
            for sym in &self.symmetries {
                let (a, b, sign) = match *sym {
                    Symmetry::Symmetric(a, b) => (a, b, 1.0),
                    Symmetry::Antisymmetric(a, b) => (a, b, -1.0),
                };
                let mut swapped = idx.clone();
                swapped.swap(a, b);
                worst = worst.max((self.data[offset] - sign * self.get(&swapped)).abs());
            }
        }
        worst
    }

    /// Componentwise difference; shapes must agree.
    pub fn sub(&self, other: &TensorValue) -> Result<TensorValue> {
        if self.data.len() != other.data.len() {
            return Err(Error::DimensionMismatch {
                expected: self.data.len(),
                got: other.data.len(),
            });
        }
        Ok(TensorValue {
            n: self.n,
            variance: self.variance.clone(),
            symmetries: Vec::new(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }
}

/// A tensor field near a point, every component carried as a jet.
#[derive(Debug, Clone)]
pub struct JetTensor {
    pub n: usize,
    pub variance: String,
    pub comps: Vec<Jet>,
}

impl JetTensor {
    pub fn new(n: usize, variance: &str, comps: Vec<Jet>) -> Result<JetTensor> {
        check_variance(variance)?;
        let expected = n.pow(variance.len() as u32);
        if comps.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: comps.len(),
            });
        }
        Ok(JetTensor {
            n,
            variance: variance.to_string(),
            comps,
        })
    }

    /// Rank-0 tensor; `n` is read off the jet's `2n` variables.
    pub fn scalar(f: Jet) -> JetTensor {
        JetTensor {
            n: f.nvars() / 2,
            variance: String::new(),
            comps: vec![f],
        }
    }

    /// Builds a tensor by evaluating `f` on every index tuple.
    pub fn from_fn(
        n: usize,
        variance: &str,
        mut f: impl FnMut(&[usize]) -> Jet,
    ) -> Result<JetTensor> {
        check_variance(variance)?;
        let rank = variance.len();
        let comps = (0..n.pow(rank as u32))
            .map(|o| f(&unflat(n, rank, o)))
            .collect();
        JetTensor::new(n, variance, comps)
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn get(&self, idx: &[usize]) -> &Jet {
        &self.comps[flat(self.n, idx)]
    }

    pub fn order(&self) -> usize {
        self.comps.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn value(&self) -> TensorValue {
        TensorValue {
            n: self.n,
            variance: self.variance.clone(),
            symmetries: Vec::new(),
            data: self.comps.iter().map(Jet::value).collect(),
        }
    }

    /// Vertical derivative: differentiates every component in `y^k` and
    /// appends `k` as a trailing covariant slot.
    pub fn vertical(&self) -> JetTensor {
        let n = self.n;
        let mut comps = Vec::with_capacity(self.comps.len() * n);
        for c in &self.comps {
            for k in 0..n {
                comps.push(c.d(n + k));
            }
        }
        JetTensor {
            n,
            variance: format!("{}l", self.variance),
            comps,
        }
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> JetTensor {
        JetTensor {
            n: self.n,
            variance: self.variance.clone(),
            comps: self.comps.iter().map(f).collect(),
        }
    }

    pub fn add(&self, other: &JetTensor) -> JetTensor {
        JetTensor {
            n: self.n,
            variance: self.variance.clone(),
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &JetTensor) -> JetTensor {
        JetTensor {
            n: self.n,
            variance: self.variance.clone(),
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, k: f64) -> JetTensor {
        self.map(|c| c * k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_roundtrip() {
        for o in 0..81 {
            assert_eq!(flat(3, &unflat(3, 4, o)), o);
        }
    }

    #[test]
    fn symmetry_residual_detects_violation() {
        let t = TensorValue::new(2, "ll", vec![0.0, 1.0, -1.0, 0.0])
            .unwrap()
            .with_symmetries(&[Symmetry::Antisymmetric(0, 1)]);
        assert_eq!(t.symmetry_residual(), 0.0);
        let t = t.with_symmetries(&[Symmetry::Symmetric(0, 1)]);
        assert_eq!(t.symmetry_residual(), 2.0);
    }

    #[test]
    fn rejects_bad_variance_and_shape() {
        assert!(TensorValue::new(2, "lx", vec![0.0; 4]).is_err());
        assert!(TensorValue::new(2, "ll", vec![0.0; 3]).is_err());
    }
}
