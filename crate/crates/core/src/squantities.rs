//! The S-curvature quantities `Xi`, `E`, `H`, `Sigma` and the identities
//! relating them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::deriv::{Jet, TangentPoint};
use crate::error::Result;
use crate::geometry::{require, LocalGeometry, MetricModel};
use crate::randers::{s_jet, VolumeForm};
use crate::tensor::{JetTensor, Symmetry, TensorValue};

/// Orders needed by the jets below.
pub mod order {
    pub const S: usize = 3;
    pub const QUANTITIES: usize = 5;
    pub const H: usize = 6;
    pub const RELATIONS: usize = 6;
}

/// Threshold of the identity suite.
pub const RELATION_TOL: f64 = 1e-7;

/// Jets of `S` and its derived quantities at one point.
pub struct SQuantityJets {
    pub s: Jet,
    /// `S_.i`
    pub s_dot: JetTensor,
    /// `Xi_i`
    pub xi: JetTensor,
    /// `E_ij`
    pub e: JetTensor,
    /// `H_ij`, present when the context order allows it.
    pub h: Option<JetTensor>,
    /// `Sigma_ij`
    pub sigma: JetTensor,
}

impl SQuantityJets {
    pub fn new(local: &LocalGeometry<'_>, vol: &VolumeForm) -> Result<SQuantityJets> {
        require(local.ctx(), order::QUANTITIES)?;
        let n = local.n();
        let s = s_jet(local, vol)?;
        let s_dot = JetTensor::scalar(s.clone()).vertical();
        let s_dot_bar = local.cov_deriv(&s_dot)?;
        let mut xi_comps = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = -local.horizontal(&s, i)?;
            for m in 0..n {
                acc += &(local.y(m) * s_dot_bar.get(&[i, m]));
            }
            xi_comps.push(acc);
        }
        let xi = JetTensor::new(n, "l", xi_comps)?;
        let s_dot_dot = s_dot.vertical();
        let e = s_dot_dot.scale(0.5);
        let sigma = JetTensor::from_fn(n, "ll", |ij| {
            (s_dot_bar.get(&[ij[0], ij[1]]) - s_dot_bar.get(&[ij[1], ij[0]]))
                * (1.0 / (n as f64 + 1.0))
        })?;
        let h = if local.order() >= order::H {
            let bar = local.cov_deriv(&s_dot_dot)?;
            Some(JetTensor::from_fn(n, "ll", |ij| {
                let terms: Vec<Jet> = (0..n)
                    .map(|m| local.y(m) * bar.get(&[ij[0], ij[1], m]))
                    .collect();
                crate::deriv::sum(&terms).expect("n >= 1") * 0.5
            })?)
        } else {
            None
        };
        Ok(SQuantityJets {
            s,
            s_dot,
            xi,
            e,
            h,
            sigma,
        })
    }

    pub fn h(&self) -> Result<&JetTensor> {
        self.h.as_ref().ok_or(crate::error::Error::OrderExceeded {
            requested: order::H,
            available: order::QUANTITIES,
        })
    }
}

/// `Xi`, `E`, `H`, `Sigma` at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SQuantities {
    pub s: f64,
    pub xi: TensorValue,
    pub e: TensorValue,
    pub h: TensorValue,
    pub sigma: TensorValue,
}

pub fn s_quantities(m: &MetricModel, at: &TangentPoint, vol: &VolumeForm) -> Result<SQuantities> {
    let local = LocalGeometry::new(m, at, order::H)?;
    let q = SQuantityJets::new(&local, vol)?;
    Ok(SQuantities {
        s: q.s.value(),
        xi: q.xi.value(),
        e: q.e.value().with_symmetries(&[Symmetry::Symmetric(0, 1)]),
        h: q.h()?.value().with_symmetries(&[Symmetry::Symmetric(0, 1)]),
        sigma: q
            .sigma
            .value()
            .with_symmetries(&[Symmetry::Antisymmetric(0, 1)]),
    })
}

/// `Xi_i = y^m S_.i|m - S_|i`.
pub fn xi(m: &MetricModel, at: &TangentPoint, vol: &VolumeForm) -> Result<Vec<f64>> {
    let local = LocalGeometry::new(m, at, order::QUANTITIES)?;
    Ok(SQuantityJets::new(&local, vol)?.xi.value().data)
}

/// `E_ij = S_.i.j / 2`.
pub fn e_tensor(m: &MetricModel, at: &TangentPoint, vol: &VolumeForm) -> Result<TensorValue> {
    let local = LocalGeometry::new(m, at, order::QUANTITIES)?;
    Ok(SQuantityJets::new(&local, vol)?
        .e
        .value()
        .with_symmetries(&[Symmetry::Symmetric(0, 1)]))
}

/// `H_ij = y^m S_.i.j|m / 2`.
pub fn h_tensor(m: &MetricModel, at: &TangentPoint, vol: &VolumeForm) -> Result<TensorValue> {
    let local = LocalGeometry::new(m, at, order::H)?;
    Ok(SQuantityJets::new(&local, vol)?
        .h()?
        .value()
        .with_symmetries(&[Symmetry::Symmetric(0, 1)]))
}

/// `Sigma_ij = (S_.i|j - S_.j|i) / (n + 1)`.
pub fn sigma_tensor(m: &MetricModel, at: &TangentPoint, vol: &VolumeForm) -> Result<TensorValue> {
    let local = LocalGeometry::new(m, at, order::QUANTITIES)?;
    Ok(SQuantityJets::new(&local, vol)?
        .sigma
        .value()
        .with_symmetries(&[Symmetry::Antisymmetric(0, 1)]))
}

/// Names of the identities, in report order.
pub const RELATIONS: [&str; 8] = [
    "sigma_skew",
    "y_sigma",
    "y_xi_dot",
    "xi_dot_sym",
    "xi_dot_skew",
    "y_sigma_dot",
    "xi_dot_split",
    "xi_trace",
];

/// Max residual per identity at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    pub residuals: BTreeMap<String, f64>,
    pub pass: bool,
}

impl RelationReport {
    pub fn worst(&self) -> f64 {
        self.residuals.values().fold(0.0, |m, &r| m.max(r))
    }
}

/// Tracks `max |lhs - rhs|` against `max(1, |terms|)`.
#[derive(Default)]
struct Residual {
    diff: f64,
    scale: f64,
}

impl Residual {
    fn add(&mut self, diff: f64, terms: &[f64]) {
        self.diff = self.diff.max(diff.abs());
        for t in terms {
            self.scale = self.scale.max(t.abs());
        }
    }

    fn value(&self) -> f64 {
        self.diff / self.scale.max(1.0)
    }
}

/// Residuals of the identities linking `Xi`, `H` and `Sigma` at one point.
pub fn relations_from_jets(local: &LocalGeometry<'_>, q: &SQuantityJets) -> Result<RelationReport> {
    require(local.ctx(), order::RELATIONS)?;
    let n = local.n();
    let np1 = n as f64 + 1.0;
    let y: Vec<f64> = local.point().y.clone();
    let xi = q.xi.value();
    let h = q.h()?.value();
    let sigma = q.sigma.value();
    let xi_dot = q.xi.vertical().value(); // [j][k] = Xi_j.k
    let sigma_dot = q.sigma.vertical().value(); // [i][j][k] = Sigma_ij.k

    let mut r = BTreeMap::new();
    let mut sigma_skew = Residual::default();
    let mut y_sigma = Residual::default();
    let mut y_xi_dot = Residual::default();
    let mut xi_dot_sym = Residual::default();
    let mut xi_dot_skew = Residual::default();
    let mut y_sigma_dot = Residual::default();
    let mut xi_dot_split = Residual::default();
    let mut xi_trace = Residual::default();
    for j in 0..n {
        let ys: f64 = (0..n).map(|i| y[i] * sigma.get(&[i, j])).sum();
        y_sigma.add(ys + xi.data[j] / np1, &[ys, xi.data[j] / np1]);
        let yx: f64 = (0..n).map(|i| y[i] * xi_dot.get(&[i, j])).sum();
        y_xi_dot.add(yx + xi.data[j], &[yx, xi.data[j]]);
        xi_trace.add(-xi.data[j] - np1 * ys, &[xi.data[j], np1 * ys]);
        xi_trace.add(yx - np1 * ys, &[yx]);
        for k in 0..n {
            let (a, b) = (sigma.get(&[j, k]), sigma.get(&[k, j]));
            sigma_skew.add(a + b, &[a, b]);
            let (xjk, xkj) = (xi_dot.get(&[j, k]), xi_dot.get(&[k, j]));
            let hjk = h.get(&[j, k]);
            xi_dot_sym.add(xjk + xkj - 4.0 * hjk, &[xjk, xkj, 4.0 * hjk]);
            xi_dot_skew.add(xjk - xkj - 2.0 * np1 * a, &[xjk, xkj, 2.0 * np1 * a]);
            let ysk: f64 = (0..n).map(|i| y[i] * sigma_dot.get(&[i, j, k])).sum();
            y_sigma_dot.add(ysk + 2.0 / np1 * hjk, &[ysk, 2.0 / np1 * hjk]);
            xi_dot_split.add(xjk - 2.0 * hjk - np1 * a, &[xjk, 2.0 * hjk, np1 * a]);
        }
    }
    for (name, res) in RELATIONS.iter().zip([
        sigma_skew,
        y_sigma,
        y_xi_dot,
        xi_dot_sym,
        xi_dot_skew,
        y_sigma_dot,
        xi_dot_split,
        xi_trace,
    ]) {
        r.insert(name.to_string(), res.value());
    }
    let pass = r.values().all(|&v| v < RELATION_TOL);
    Ok(RelationReport { residuals: r, pass })
}

/// Residual report for all identities at one point.
pub fn relations_check(
    m: &MetricModel,
    at: &TangentPoint,
    vol: &VolumeForm,
) -> Result<RelationReport> {
    let local = LocalGeometry::new(m, at, order::RELATIONS)?;
    let q = SQuantityJets::new(&local, vol)?;
    relations_from_jets(&local, &q)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::library::{
        euclidean, funk, minkowski_randers, random_randers, FunkSpec, TiltedDensity,
    };
    use crate::randers::s_curvature;
    use crate::sample::sample_points;

    #[test]
    fn funk_quantities_vanish_except_e() {
        let m = funk(FunkSpec::new(3, vec![0.5, 0.0, 0.0])).unwrap();
        for p in sample_points(3, 5, 1, 0.7) {
            let q = s_quantities(&m, &p, &VolumeForm::BusemannHausdorff).unwrap();
            assert!(q.xi.max_abs() < 1e-9, "Xi = {:?}", q.xi.data);
            assert!(q.sigma.max_abs() < 1e-10);
            assert!(q.h.max_abs() < 1e-9);
            // S = 2F gives E = F_yy, which annihilates y.
            for i in 0..3 {
                let v: f64 = (0..3).map(|j| q.e.get(&[i, j]) * p.y[j]).sum();
                assert!(v.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn e_is_half_the_vertical_hessian_of_s() {
        let m = random_randers(2, 21, 0.05).unwrap();
        let vol = VolumeForm::BusemannHausdorff;
        let h = 1e-4;
        for p in sample_points(2, 4, 2, 0.7) {
            let e = e_tensor(&m, &p, &vol).unwrap();
            let s =
                |y: Vec<f64>| s_curvature(&m, &TangentPoint::new(p.x.clone(), y), &vol).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let at = |si: f64, sj: f64| {
                        let mut y = p.y.clone();
                        y[i] += si * h;
                        y[j] += sj * h;
                        s(y)
                    };
                    let fd = (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0))
                        / (8.0 * h * h);
                    assert!((e.get(&[i, j]) - fd).abs() < 1e-5 * fd.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn perturbed_randers_has_nonzero_xi() {
        let m = random_randers(2, 3, 0.05).unwrap();
        let worst = sample_points(2, 10, 3, 0.7)
            .iter()
            .map(|p| {
                xi(&m, p, &VolumeForm::BusemannHausdorff)
                    .unwrap()
                    .iter()
                    .fold(0.0f64, |a, v| a.max(v.abs()))
            })
            .fold(0.0, f64::max);
        assert!(worst > 1e-3, "max |Xi| = {worst}");
    }

    #[test]
    fn identities_hold_on_several_metrics() {
        let models = [
            euclidean(2),
            minkowski_randers(3, vec![0.1, 0.2, -0.3]).unwrap(),
            funk(FunkSpec::new(2, vec![0.0, 0.5])).unwrap(),
            random_randers(2, 1, 0.05).unwrap(),
            random_randers(3, 2, 0.05).unwrap(),
        ];
        for m in &models {
            let vol = if m.randers_spec().is_some() {
                VolumeForm::BusemannHausdorff
            } else {
                VolumeForm::Coordinate
            };
            for p in sample_points(m.dim(), 4, 4, 0.7) {
                let r = relations_check(m, &p, &vol).unwrap();
                assert!(r.pass, "{}: {:?}", m.name(), r.residuals);
            }
        }
    }

    #[test]
    fn sigma_does_not_depend_on_the_volume_form() {
        let m = random_randers(3, 8, 0.05).unwrap();
        let tilted = VolumeForm::Custom(Arc::new(TiltedDensity { n: 3 }));
        for p in sample_points(3, 4, 5, 0.7) {
            let base = sigma_tensor(&m, &p, &VolumeForm::BusemannHausdorff).unwrap();
            for vol in [VolumeForm::Coordinate, tilted.clone()] {
                let other = sigma_tensor(&m, &p, &vol).unwrap();
                assert!(base.sub(&other).unwrap().max_abs() < 1e-10 * base.max_abs().max(1.0));
            }
            assert!(base.symmetry_residual() < 1e-14);
        }
    }

    #[test]
    fn h_requires_order_six() {
        let m = euclidean(2);
        let p = TangentPoint::new(vec![0.1, 0.0], vec![1.0, 0.0]);
        let local = LocalGeometry::new(&m, &p, order::QUANTITIES).unwrap();
        let q = SQuantityJets::new(&local, &VolumeForm::Coordinate).unwrap();
        assert!(q.h().is_err());
        assert!(relations_from_jets(&local, &q).is_err());
    }
}
