//! Complete lifts of polynomial vector fields, Lie derivatives along them,
//! projective factors, vector-field classification and projectively
//! invariant tensors.

mod classify;
mod dimscan;
mod invariants;

pub use classify::{
    classify, classify_at, extract_factor, invariance_suite, invariance_suites,
    projective_characterization, projective_factor, special_conditions, ClassificationReport,
    ClassifyOptions, FactorEstimate, InvarianceReport, PointVerdicts, ProjectiveFactorData,
    SpecialResiduals, VerdictFlags, CLASSIFY_ORDER, EQUIVALENCE_GUARD, HOMOGENEITY_TOL,
    INVARIANCE_ORDER, PROJECTIVE_TOL, RICCI_IDENTITY_TOL,
};
pub use dimscan::{dim_scan, DimScanOptions, DimScanReport, DIM_SCAN_ORDER, NULLITY_REL_TOL};
pub use invariants::{invariant_tensors, InvariantJets, InvariantTensors};

use serde::{Deserialize, Serialize};

use crate::deriv::Jet;
use crate::error::{Error, Result};
use crate::tensor::{unflat, JetTensor};

/// `V^i(x) = b^i + A^i_j x^j + C^i_jk x^j x^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyVectorField {
    pub n: usize,
    pub b: Vec<f64>,
    /// `A^i_j`, row-major.
    pub a: Vec<f64>,
    /// `C^i_jk`, row-major, symmetric in `(j, k)`.
    pub c: Vec<f64>,
}

impl PolyVectorField {
    pub fn zero(n: usize) -> PolyVectorField {
        PolyVectorField {
            n,
            b: vec![0.0; n],
            a: vec![0.0; n * n],
            c: vec![0.0; n * n * n],
        }
    }

    pub fn new(n: usize, b: Vec<f64>, a: Vec<f64>, c: Vec<f64>) -> Result<PolyVectorField> {
        for (len, expected) in [(b.len(), n), (a.len(), n * n), (c.len(), n * n * n)] {
            if len != expected {
                return Err(Error::DimensionMismatch { expected, got: len });
            }
        }
        let f = PolyVectorField { n, b, a, c };
        for i in 0..n {
            for j in 0..n {
                for k in 0..j {
                    let (p, q) = (f.c[(i * n + j) * n + k], f.c[(i * n + k) * n + j]);
                    if (p - q).abs() > 1e-12 * p.abs().max(q.abs()).max(1.0) {
                        return Err(Error::InvalidSpec(format!(
                            "quadratic part is not symmetric: C[{i}][{j}][{k}] = {p}, C[{i}][{k}][{j}] = {q}"
                        )));
                    }
                }
            }
        }
        Ok(f)
    }

    /// `scale * <c, x> x`, i.e. `C^i_jk = scale (c_j delta^i_k + c_k delta^i_j) / 2`.
    pub fn radial_quadratic(n: usize, c: &[f64], scale: f64) -> PolyVectorField {
        let mut f = PolyVectorField::zero(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut v = 0.0;
                    if i == k {
                        v += c[j];
                    }
                    if i == j {
                        v += c[k];
                    }
                    f.c[(i * n + j) * n + k] = 0.5 * scale * v;
                }
            }
        }
        f
    }

    /// Coefficients `(b, A, C)` flattened.
    pub fn coefficients(&self) -> Vec<f64> {
        self.b
            .iter()
            .chain(&self.a)
            .chain(&self.c)
            .copied()
            .collect()
    }

    /// `sum_k w_k V_k`.
    pub fn combine(fields: &[PolyVectorField], weights: &[f64]) -> PolyVectorField {
        let n = fields[0].n;
        let mut out = PolyVectorField::zero(n);
        for (f, &w) in fields.iter().zip(weights) {
            out.b.iter_mut().zip(&f.b).for_each(|(o, v)| *o += w * v);
            out.a.iter_mut().zip(&f.a).for_each(|(o, v)| *o += w * v);
            out.c.iter_mut().zip(&f.c).for_each(|(o, v)| *o += w * v);
        }
        out
    }

    pub fn value(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut v = self.b[i];
                for j in 0..n {
                    v += self.a[i * n + j] * x[j];
                    for k in 0..n {
                        v += self.c[(i * n + j) * n + k] * x[j] * x[k];
                    }
                }
                v
            })
            .collect()
    }

    /// `dV^i/dx^j`, row-major in `(i, j)`.
    pub fn jacobian(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = self.a.clone();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out[i * n + j] += 2.0 * self.c[(i * n + j) * n + k] * x[k];
                }
            }
        }
        out
    }
}

/// The complete lift `V^k d/dx^k + y^m (dV^k/dx^m) d/dy^k` near a point.
pub struct CompleteLift {
    n: usize,
    /// `V^k`
    v: Vec<Jet>,
    /// `dV^k/dx^m`, row-major in `(k, m)`
    dv: Vec<Jet>,
    /// `y^m dV^k/dx^m`
    fiber: Vec<Jet>,
    /// `C^i_jk y^j y^k`, half the second-derivative term of the spray rule
    curvature_term: Vec<Jet>,
}

impl CompleteLift {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Components `(V^k, y^m dV^k/dx^m)` of the lift.
    pub fn components(&self) -> (&[Jet], &[Jet]) {
        (&self.v, &self.fiber)
    }

    /// `V-hat(f)`.
    pub fn apply(&self, f: &Jet) -> Jet {
        let n = self.n;
        let mut acc = &self.v[0] * &f.d(0);
        for k in 0..n {
            if k > 0 {
                acc += &(&self.v[k] * &f.d(k));
            }
            acc += &(&self.fiber[k] * &f.d(n + k));
        }
        acc
    }

    /// Lie derivative of a scalar, keeping `out_order` orders.
    pub fn lie_scalar(&self, f: &Jet, out_order: usize) -> Jet {
        self.apply(&f.truncate(out_order + 1))
    }

    /// Lie derivative of a tensor on the pullback bundle, keeping
    /// `out_order` orders.
    pub fn lie_tensor(&self, t: &JetTensor, out_order: usize) -> Result<JetTensor> {
        let rank = t.rank();
        if rank > 4 {
            return Err(Error::UnsupportedVariance(t.variance.clone()));
        }
        let n = self.n;
        let t = t.map(|c| c.truncate(out_order + 1));
        let slots: Vec<char> = t.variance.chars().collect();
        let mut comps = Vec::with_capacity(t.comps.len());
        for (offset, c) in t.comps.iter().enumerate() {
            let idx = unflat(n, rank, offset);
            let mut acc = self.apply(c);
            for (s, &slot) in slots.iter().enumerate() {
                let mut moved = idx.clone();
                for r in 0..n {
                    moved[s] = r;
                    let tr = t.get(&moved).truncate(out_order);
                    match slot {
                        'u' => acc -= &(&tr * &self.dv[idx[s] * n + r]),
                        _ => acc += &(&tr * &self.dv[r * n + idx[s]]),
                    }
                }
            }
            comps.push(acc);
        }
        JetTensor::new(n, &t.variance, comps)
    }

    /// `L G^i = V-hat(G^i) + y^j y^k d^2V^i/dx^j dx^k / 2 - G^k dV^i/dx^k`.
    pub fn lie_spray(&self, spray: &[Jet], out_order: usize) -> Vec<Jet> {
        let n = self.n;
        let g: Vec<Jet> = spray.iter().map(|c| c.truncate(out_order + 1)).collect();
        (0..n)
            .map(|i| {
                let mut acc = self.apply(&g[i]) + &self.curvature_term[i];
                for k in 0..n {
                    acc -= &(&g[k].truncate(out_order) * &self.dv[i * n + k]);
                }
                acc
            })
            .collect()
    }
}

/// Lifts `field` at the point whose lifted coordinates are `coords`.
pub fn complete_lift(field: &PolyVectorField, coords: &[Jet]) -> Result<CompleteLift> {
    let n = field.n;
    if coords.len() != 2 * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            got: coords.len(),
        });
    }
    let (x, y) = coords.split_at(n);
    let mut v = Vec::with_capacity(n);
    let mut dv = Vec::with_capacity(n * n);
    for i in 0..n {
        let mut vi = x[0].constant_like(field.b[i]);
        for j in 0..n {
            vi += &(&x[j] * field.a[i * n + j]);
            let mut dij = x[0].constant_like(field.a[i * n + j]);
            for k in 0..n {
                let c = field.c[(i * n + j) * n + k];
                if c != 0.0 {
                    vi += &(&(&x[j] * &x[k]) * c);
                    dij += &(&x[k] * (2.0 * c));
                }
            }
            dv.push(dij);
        }
        v.push(vi);
    }
    let fiber = (0..n)
        .map(|k| {
            let mut acc = &y[0] * &dv[k * n];
            for m in 1..n {
                acc += &(&y[m] * &dv[k * n + m]);
            }
            acc
        })
        .collect();
    let curvature_term = (0..n)
        .map(|i| {
            let mut acc = y[0].zero_like();
            for j in 0..n {
                for k in 0..n {
                    let c = field.c[(i * n + j) * n + k];
                    if c != 0.0 {
                        acc += &(&(&y[j] * &y[k]) * c);
                    }
                }
            }
            acc
        })
        .collect();
    Ok(CompleteLift {
        n,
        v,
        dv,
        fiber,
        curvature_term,
    })
}
