//! Spray, Berwald connection, horizontal and covariant derivatives, and the
//! Riemann / Berwald-Riemann / Ricci curvature of a Finsler metric.
//!
//! Everything is computed from the Taylor expansion of `F` at a point. The
//! spray is assembled in jet arithmetic, so its own derivatives (and those of
//! every curvature built on it) are exact up to the truncation order.

use std::cell::OnceCell;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::deriv::{self, lift_point, Jet, JetContext, ScalarField, TangentPoint};
use crate::error::{Error, Result};
use crate::linalg::{check_spd, invert_jets, value_matrix};
use crate::randers::RandersSpec;
use crate::tensor::{flat, unflat, JetTensor, Symmetry, TensorValue};

/// Jet order each derived quantity needs in order to be available at all.
pub mod order {
    pub const METRIC: usize = 2;
    pub const SPRAY: usize = 2;
    pub const CONNECTION: usize = 3;
    pub const BERWALD: usize = 4;
    pub const RIEMANN: usize = 4;
    pub const BERWALD_RIEMANN: usize = 6;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Generic,
    Randers,
    Riemannian,
}

/// A Finsler metric as an evaluatable scalar field, optionally carrying the
/// analytic `(alpha, beta)` split of a Randers metric.
#[derive(Clone)]
pub struct MetricModel {
    name: String,
    n: usize,
    kind: MetricKind,
    f: Arc<dyn ScalarField>,
    randers: Option<RandersSpec>,
}

impl fmt::Debug for MetricModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricModel")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("kind", &self.kind)
            .finish()
    }
}

impl MetricModel {
    pub fn generic(name: impl Into<String>, f: Arc<dyn ScalarField>) -> MetricModel {
        MetricModel {
            name: name.into(),
            n: f.dim(),
            kind: MetricKind::Generic,
            f,
            randers: None,
        }
    }

    /// A Randers metric evaluated through `f`, which must equal `alpha + beta`.
    pub fn randers(
        name: impl Into<String>,
        f: Arc<dyn ScalarField>,
        spec: RandersSpec,
    ) -> MetricModel {
        MetricModel {
            name: name.into(),
            n: f.dim(),
            kind: MetricKind::Randers,
            f,
            randers: Some(spec),
        }
    }

    /// A Riemannian metric; `spec` carries `alpha` with a vanishing one-form.
    pub fn riemannian(
        name: impl Into<String>,
        f: Arc<dyn ScalarField>,
        spec: RandersSpec,
    ) -> MetricModel {
        MetricModel {
            name: name.into(),
            n: f.dim(),
            kind: MetricKind::Riemannian,
            f,
            randers: Some(spec),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn field(&self) -> &dyn ScalarField {
        self.f.as_ref()
    }

    pub fn field_arc(&self) -> Arc<dyn ScalarField> {
        Arc::clone(&self.f)
    }

    pub fn randers_spec(&self) -> Option<&RandersSpec> {
        self.randers.as_ref()
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        self.f.in_domain(x)
    }

    /// `F(x, y)`.
    pub fn value(&self, at: &TangentPoint) -> Result<f64> {
        deriv::value_at(self.f.as_ref(), at)
    }
}

/// A tensor field on the pullback bundle that can be expanded in jets.
pub trait TensorField: Send + Sync {
    fn dim(&self) -> usize;
    fn variance(&self) -> String;
    fn eval(&self, coords: &[Jet]) -> Result<JetTensor>;
}

/// Curvature quantities at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureBundle {
    /// `R^i_k`
    pub riemann: TensorValue,
    /// `K^i_jkl`
    pub berwald_riemann: TensorValue,
    /// Ricci scalar, the trace of `R^i_k`.
    pub ric: f64,
    /// `K_jl = K^i_jil`
    pub ricci_tensor: TensorValue,
    /// Antisymmetric part of `K_jl`.
    pub ricci_skew: TensorValue,
}

pub(crate) fn require(ctx: &JetContext, needed: usize) -> Result<()> {
    if ctx.order() < needed {
        Err(Error::OrderExceeded {
            requested: needed,
            available: ctx.order(),
        })
    } else {
        Ok(())
    }
}

/// Jets of `F` and of its spray at one point, with lazily derived curvature.
pub struct LocalGeometry<'m> {
    metric: &'m MetricModel,
    ctx: JetContext,
    coords: Vec<Jet>,
    f: Jet,
    metric_tensor: OnceCell<JetTensor>,
    spray: OnceCell<Vec<Jet>>,
    connection: OnceCell<JetTensor>,
    berwald: OnceCell<JetTensor>,
    riemann: OnceCell<JetTensor>,
    berwald_riemann: OnceCell<JetTensor>,
    ricci: OnceCell<JetTensor>,
}

impl<'m> LocalGeometry<'m> {
    pub fn new(
        metric: &'m MetricModel,
        at: &TangentPoint,
        order: usize,
    ) -> Result<LocalGeometry<'m>> {
        let ctx = JetContext::with_any_order(order, at.clone())?;
        if ctx.n() != metric.dim() {
            return Err(Error::DimensionMismatch {
                expected: metric.dim(),
                got: ctx.n(),
            });
        }
        if !metric.in_domain(&at.x) {
            return Err(Error::OutOfDomain {
                index: 0,
                reason: format!("x = {:?} outside the domain of {}", at.x, metric.name()),
            });
        }
        let coords = lift_point(&ctx);
        let f = metric.field().eval(&coords)?;
        if !f.is_finite() {
            return Err(Error::DomainError {
                function: "F",
                value: f.value(),
            });
        }
        Ok(LocalGeometry {
            metric,
            ctx,
            coords,
            f,
            metric_tensor: OnceCell::new(),
            spray: OnceCell::new(),
            connection: OnceCell::new(),
            berwald: OnceCell::new(),
            riemann: OnceCell::new(),
            berwald_riemann: OnceCell::new(),
            ricci: OnceCell::new(),
        })
    }

    pub fn metric(&self) -> &'m MetricModel {
        self.metric
    }

    pub fn ctx(&self) -> &JetContext {
        &self.ctx
    }

    pub fn n(&self) -> usize {
        self.ctx.n()
    }

    pub fn order(&self) -> usize {
        self.ctx.order()
    }

    pub fn point(&self) -> &TangentPoint {
        self.ctx.base()
    }

    pub fn coords(&self) -> &[Jet] {
        &self.coords
    }

    pub fn x(&self, i: usize) -> &Jet {
        &self.coords[i]
    }

    pub fn y(&self, i: usize) -> &Jet {
        &self.coords[self.n() + i]
    }

    /// Jet of `F`.
    pub fn f(&self) -> &Jet {
        &self.f
    }

    pub fn constant(&self, v: f64) -> Jet {
        self.f.constant_like(v)
    }

    /// `g_ij = (F^2)_{y^i y^j} / 2`.
    pub fn metric_tensor(&self) -> Result<&JetTensor> {
        if let Some(g) = self.metric_tensor.get() {
            return Ok(g);
        }
        require(&self.ctx, order::METRIC)?;
        let n = self.n();
        let f2 = &self.f * &self.f;
        let fy: Vec<Jet> = (0..n).map(|i| f2.d(n + i)).collect();
        let g = JetTensor::from_fn(n, "ll", |ij| fy[ij[0]].d(n + ij[1]) * 0.5)?;
        check_spd(&value_matrix(&g.comps, n))?;
        Ok(self.metric_tensor.get_or_init(|| g))
    }

    /// Spray coefficients `G^i`.
    pub fn spray(&self) -> Result<&[Jet]> {
        if let Some(g) = self.spray.get() {
            return Ok(g);
        }
        let n = self.n();
        let g = self.metric_tensor()?;
        let (ginv, _) = invert_jets(&g.comps, n)?;
        let f2 = &self.f * &self.f;
        // b_h = y^k (F^2)_{x^k y^h} - (F^2)_{x^h}
        let mut rhs = Vec::with_capacity(n);
        for h in 0..n {
            let fyh = f2.d(n + h);
            let mut b = -f2.d(h);
            for k in 0..n {
                b += &(self.y(k) * &fyh.d(k));
            }
            rhs.push(b);
        }
        let spray: Vec<Jet> = (0..n)
            .map(|i| {
                let mut acc = &ginv[i * n] * &rhs[0];
                for h in 1..n {
                    acc += &(&ginv[i * n + h] * &rhs[h]);
                }
                acc * 0.25
            })
            .collect();
        Ok(self.spray.get_or_init(|| spray))
    }

    /// `G^i_j = dG^i / dy^j`, variance `ul`.
    pub fn connection(&self) -> Result<&JetTensor> {
        if let Some(c) = self.connection.get() {
            return Ok(c);
        }
        require(&self.ctx, order::CONNECTION)?;
        let n = self.n();
        let spray = self.spray()?;
        let c = JetTensor::from_fn(n, "ul", |ij| spray[ij[0]].d(n + ij[1]))?;
        Ok(self.connection.get_or_init(|| c))
    }

    /// `G^i_jk = d^2 G^i / dy^j dy^k`, variance `ull`.
    pub fn berwald(&self) -> Result<&JetTensor> {
        if let Some(b) = self.berwald.get() {
            return Ok(b);
        }
        require(&self.ctx, order::BERWALD)?;
        let n = self.n();
        let conn = self.connection()?;
        let mut comps: Vec<Jet> = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    // Fill the lower triangle from the upper one so the
                    // symmetry in (j, k) holds exactly.
                    if k < j {
                        comps.push(comps[flat(n, &[i, k, j])].clone());
                    } else {
                        comps.push(conn.get(&[i, j]).d(n + k));
                    }
                }
            }
        }
        let b = JetTensor::new(n, "ull", comps)?;
        Ok(self.berwald.get_or_init(|| b))
    }

    /// `delta f / delta x^k = df/dx^k - G^r_k df/dy^r`.
    pub fn horizontal(&self, f: &Jet, k: usize) -> Result<Jet> {
        let n = self.n();
        let conn = self.connection()?;
        let mut out = f.d(k);
        for r in 0..n {
            out -= &(conn.get(&[r, k]) * &f.d(n + r));
        }
        Ok(out)
    }

    /// Berwald covariant derivative; appends one covariant slot.
    pub fn cov_deriv(&self, t: &JetTensor) -> Result<JetTensor> {
        let rank = t.rank();
        if rank > 4 {
            return Err(Error::UnsupportedVariance(t.variance.clone()));
        }
        let n = self.n();
        if rank > 0 && t.n != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: t.n,
            });
        }
        let berwald = self.berwald()?;
        let slots: Vec<char> = t.variance.chars().collect();
        let new_variance = format!("{}l", t.variance);
        let mut comps = Vec::with_capacity(t.comps.len() * n);
        for offset in 0..t.comps.len() {
            let idx = unflat(n, rank, offset);
            for k in 0..n {
                let mut acc = self.horizontal(&t.comps[offset], k)?;
                for (s, &slot) in slots.iter().enumerate() {
                    let mut moved = idx.clone();
                    for r in 0..n {
                        moved[s] = r;
                        let tr = t.get(&moved);
                        match slot {
                            'u' => acc += &(tr * berwald.get(&[idx[s], r, k])),
                            _ => acc -= &(tr * berwald.get(&[r, idx[s], k])),
                        }
                    }
                }
                comps.push(acc);
            }
        }
        JetTensor::new(n, &new_variance, comps)
    }

    /// `R^i_k`, variance `ul`.
    pub fn riemann(&self) -> Result<&JetTensor> {
        if let Some(r) = self.riemann.get() {
            return Ok(r);
        }
        require(&self.ctx, order::RIEMANN)?;
        let n = self.n();
        let spray = self.spray()?;
        let conn = self.connection()?;
        let berwald = self.berwald()?;
        let r = JetTensor::from_fn(n, "ul", |ik| {
            let (i, k) = (ik[0], ik[1]);
            let mut acc = spray[i].d(k) * 2.0;
            for j in 0..n {
                acc -= &(self.y(j) * &conn.get(&[i, k]).d(j));
                acc += &((&spray[j] * berwald.get(&[i, j, k])) * 2.0);
                acc -= &(conn.get(&[i, j]) * conn.get(&[j, k]));
            }
            acc
        })?;
        Ok(self.riemann.get_or_init(|| r))
    }

    /// `K^i_jkl = (R^i_k.l.j - R^i_l.k.j) / 3`, variance `ulll`.
    pub fn berwald_riemann(&self) -> Result<&JetTensor> {
        if let Some(k) = self.berwald_riemann.get() {
            return Ok(k);
        }
        require(&self.ctx, order::BERWALD_RIEMANN)?;
        let n = self.n();
        let r = self.riemann()?;
        // second vertical derivatives R^i_k.l.j, stored as [i][k][l][j]
        let rkl = r.vertical().vertical();
        let mut comps = Vec::with_capacity(n.pow(4));
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        if l < k {
                            let twin: Jet = -&comps[flat(n, &[i, j, l, k])];
                            comps.push(twin);
                        } else if l == k {
                            comps.push(self.f.zero_like().truncate(rkl.order()));
                        } else {
                            let a = rkl.get(&[i, k, l, j]);
                            let b = rkl.get(&[i, l, k, j]);
                            comps.push((a - b) * (1.0 / 3.0));
                        }
                    }
                }
            }
        }
        let k4 = JetTensor::new(n, "ulll", comps)?;
        Ok(self.berwald_riemann.get_or_init(|| k4))
    }

    /// `K_jl = K^i_jil`, variance `ll`.
    pub fn ricci_tensor(&self) -> Result<&JetTensor> {
        if let Some(k) = self.ricci.get() {
            return Ok(k);
        }
        let n = self.n();
        let k4 = self.berwald_riemann()?;
        let ric = JetTensor::from_fn(n, "ll", |jl| {
            let terms: Vec<&Jet> = (0..n).map(|i| k4.get(&[i, jl[0], i, jl[1]])).collect();
            deriv::sum(terms).expect("n >= 1")
        })?;
        Ok(self.ricci.get_or_init(|| ric))
    }

    /// Ricci scalar `R^k_k`.
    pub fn ric(&self) -> Result<Jet> {
        let n = self.n();
        let r = self.riemann()?;
        Ok(deriv::sum((0..n).map(|k| r.get(&[k, k]))).expect("n >= 1"))
    }

    /// `(K_jl - K_lj) / 2`.
    pub fn ricci_skew(&self) -> Result<JetTensor> {
        let n = self.n();
        let k = self.ricci_tensor()?;
        JetTensor::from_fn(n, "ll", |jl| {
            (k.get(&[jl[0], jl[1]]) - k.get(&[jl[1], jl[0]])) * 0.5
        })
    }

    pub fn curvature(&self) -> Result<CurvatureBundle> {
        Ok(CurvatureBundle {
            riemann: self.riemann()?.value(),
            berwald_riemann: self
                .berwald_riemann()?
                .value()
                .with_symmetries(&[Symmetry::Antisymmetric(2, 3)]),
            ric: self.ric()?.value(),
            ricci_tensor: self.ricci_tensor()?.value(),
            ricci_skew: self
                .ricci_skew()?
                .value()
                .with_symmetries(&[Symmetry::Antisymmetric(0, 1)]),
        })
    }
}

/// `g_ij` at a point.
pub fn fundamental_tensor(m: &MetricModel, at: &TangentPoint) -> Result<TensorValue> {
    let local = LocalGeometry::new(m, at, order::METRIC)?;
    Ok(local
        .metric_tensor()?
        .value()
        .with_symmetries(&[Symmetry::Symmetric(0, 1)]))
}

/// Spray coefficients `G^i` at a point.
pub fn spray(m: &MetricModel, at: &TangentPoint) -> Result<Vec<f64>> {
    let local = LocalGeometry::new(m, at, order::SPRAY)?;
    Ok(local.spray()?.iter().map(Jet::value).collect())
}

/// Berwald connection coefficients `(G^i_j, G^i_jk)` at a point.
pub fn berwald(m: &MetricModel, at: &TangentPoint) -> Result<(TensorValue, TensorValue)> {
    let local = LocalGeometry::new(m, at, order::BERWALD)?;
    Ok((
        local.connection()?.value(),
        local
            .berwald()?
            .value()
            .with_symmetries(&[Symmetry::Symmetric(1, 2)]),
    ))
}

/// `delta f / delta x^k` of a scalar field at a point.
pub fn horizontal(
    f: &dyn ScalarField,
    m: &MetricModel,
    at: &TangentPoint,
    k: usize,
) -> Result<f64> {
    let local = LocalGeometry::new(m, at, order::CONNECTION)?;
    let fj = f.eval(local.coords())?;
    Ok(local.horizontal(&fj, k)?.value())
}

/// Berwald covariant derivative of a tensor field at a point.
pub fn cov_deriv(t: &dyn TensorField, m: &MetricModel, at: &TangentPoint) -> Result<TensorValue> {
    if t.variance().len() > 4 {
        return Err(Error::UnsupportedVariance(t.variance()));
    }
    let local = LocalGeometry::new(m, at, order::BERWALD)?;
    let tj = t.eval(local.coords())?;
    Ok(local.cov_deriv(&tj)?.value())
}

/// `R^i_k` at a point.
pub fn riemann(m: &MetricModel, at: &TangentPoint) -> Result<TensorValue> {
    let local = LocalGeometry::new(m, at, order::RIEMANN)?;
    Ok(local.riemann()?.value())
}

/// `K^i_jkl` at a point.
pub fn berwald_riemann(m: &MetricModel, at: &TangentPoint) -> Result<TensorValue> {
    let local = LocalGeometry::new(m, at, order::BERWALD_RIEMANN)?;
    Ok(local
        .berwald_riemann()?
        .value()
        .with_symmetries(&[Symmetry::Antisymmetric(2, 3)]))
}

/// `(Ric, K_jl, skew part of K_jl)` at a point.
pub fn ricci(m: &MetricModel, at: &TangentPoint) -> Result<(f64, TensorValue, TensorValue)> {
    let local = LocalGeometry::new(m, at, order::BERWALD_RIEMANN)?;
    let c = local.curvature()?;
    Ok((c.ric, c.ricci_tensor, c.ricci_skew))
}

/// All curvature quantities at a point.
pub fn curvature(m: &MetricModel, at: &TangentPoint) -> Result<CurvatureBundle> {
    LocalGeometry::new(m, at, order::BERWALD_RIEMANN)?.curvature()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library::{euclidean, funk, klein, space_form, FunkSpec, SpaceFormSpec};
    use crate::sample::sample_points;

    fn klein_matrix(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let w = 1.0 - x.iter().map(|v| v * v).sum::<f64>();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = (if i == j { w } else { 0.0 } + x[i] * x[j]) / (w * w);
            }
        }
        a
    }

    /// `G^i = Gamma^i_jk y^j y^k / 2` with the Christoffel symbols from
    /// central differences of the metric matrix.
    fn christoffel_spray(x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = x.len();
        let h = 1e-5;
        let da: Vec<Vec<f64>> = (0..n)
            .map(|k| {
                let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
                xp[k] += h;
                xm[k] -= h;
                let (p, m) = (klein_matrix(&xp), klein_matrix(&xm));
                p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * h)).collect()
            })
            .collect();
        let a = nalgebra::DMatrix::from_row_slice(n, n, &klein_matrix(x));
        let inv = a.try_inverse().unwrap();
        let mut g = vec![0.0; n];
        for i in 0..n {
            for l in 0..n {
                let mut lower = 0.0;
                for j in 0..n {
                    for k in 0..n {
                        let gamma = 0.5 * (da[j][l * n + k] + da[k][l * n + j] - da[l][j * n + k]);
                        lower += gamma * y[j] * y[k];
                    }
                }
                g[i] += 0.5 * inv[(i, l)] * lower;
            }
        }
        g
    }

    #[test]
    fn euclidean_spray_and_curvature_vanish() {
        let m = euclidean(3);
        for p in sample_points(3, 5, 1, 0.7) {
            assert!(spray(&m, &p).unwrap().iter().all(|v| v.abs() < 1e-14));
            assert!(riemann(&m, &p).unwrap().max_abs() < 1e-13);
        }
    }

    #[test]
    fn klein_spray_matches_christoffel_symbols() {
        let m = space_form(SpaceFormSpec { n: 3, k: -1.0 }).unwrap();
        for p in sample_points(3, 8, 2, 0.7) {
            let g = spray(&m, &p).unwrap();
            let oracle = christoffel_spray(&p.x, &p.y);
            for (a, b) in g.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-7 * b.abs().max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn klein_has_constant_curvature_minus_one() {
        let m = space_form(SpaceFormSpec { n: 3, k: -1.0 }).unwrap();
        for p in sample_points(3, 5, 3, 0.7) {
            let r = riemann(&m, &p).unwrap();
            let a = klein_matrix(&p.x);
            let y_low: Vec<f64> = (0..3)
                .map(|k| (0..3).map(|j| a[k * 3 + j] * p.y[j]).sum())
                .collect();
            let f2: f64 = (0..3).map(|k| y_low[k] * p.y[k]).sum();
            for i in 0..3 {
                for k in 0..3 {
                    let expected = -(if i == k { f2 } else { 0.0 } - p.y[i] * y_low[k]);
                    assert!((r.get(&[i, k]) - expected).abs() < 1e-9 * f2.max(1.0));
                }
            }
        }
    }

    #[test]
    fn funk_ricci_scalar() {
        for n in [2, 3] {
            let mut a = vec![0.0; n];
            a[0] = 0.5;
            let m = funk(FunkSpec::new(n, a)).unwrap();
            for p in sample_points(n, 6, 4, 0.7) {
                let f = m.value(&p).unwrap();
                let (ric, _, _) = ricci(&m, &p).unwrap();
                assert!((ric + (n as f64 - 1.0) * f * f / 4.0).abs() < 1e-9 * f * f);
            }
        }
    }

    #[test]
    fn fundamental_tensor_matches_finite_differences() {
        let m = funk(FunkSpec::new(2, vec![0.3, -0.2])).unwrap();
        let h = 1e-4;
        for p in sample_points(2, 5, 5, 0.6) {
            let g = fundamental_tensor(&m, &p).unwrap();
            let e =
                |y: Vec<f64>| 0.5 * m.value(&TangentPoint::new(p.x.clone(), y)).unwrap().powi(2);
            for i in 0..2 {
                for j in 0..2 {
                    let shifted = |si: f64, sj: f64| {
                        let mut y = p.y.clone();
                        y[i] += si * h;
                        y[j] += sj * h;
                        e(y)
                    };
                    let fd = (shifted(1.0, 1.0) - shifted(1.0, -1.0) - shifted(-1.0, 1.0)
                        + shifted(-1.0, -1.0))
                        / (4.0 * h * h);
                    assert!((g.get(&[i, j]) - fd).abs() < 1e-5 * fd.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn spray_is_quadratic_in_y() {
        let m = funk(FunkSpec::new(3, vec![0.1, 0.2, 0.0])).unwrap();
        for p in sample_points(3, 5, 6, 0.7) {
            let local = LocalGeometry::new(&m, &p, 3).unwrap();
            let g = local.spray().unwrap();
            let conn = local.connection().unwrap().value();
            for i in 0..3 {
                let euler: f64 = (0..3).map(|j| conn.get(&[i, j]) * p.y[j]).sum();
                assert!((euler - 2.0 * g[i].value()).abs() < 1e-12 * g[i].value().abs().max(1.0));
            }
            let scaled = spray(&m, &p.scaled(2.5)).unwrap();
            for i in 0..3 {
                assert!((scaled[i] - 6.25 * g[i].value()).abs() < 1e-12 * scaled[i].abs().max(1.0));
            }
        }
    }

    #[test]
    fn metric_function_is_horizontally_parallel() {
        let m = funk(FunkSpec::new(2, vec![0.4, 0.0])).unwrap();
        for p in sample_points(2, 5, 7, 0.7) {
            let local = LocalGeometry::new(&m, &p, 3).unwrap();
            for k in 0..2 {
                let v = local.horizontal(local.f(), k).unwrap().value();
                assert!(v.abs() < 1e-12, "F_|{k} = {v}");
            }
        }
    }

    #[test]
    fn berwald_tensor_is_symmetric_and_riemannian_metrics_are_berwald_flat() {
        let m = space_form(SpaceFormSpec { n: 2, k: -1.0 }).unwrap();
        for p in sample_points(2, 4, 8, 0.7) {
            let (conn, b) = berwald(&m, &p).unwrap();
            assert!(b.symmetry_residual() < 1e-12);
            // For a Riemannian metric G^i_jk is y-independent, so
            // G^i_jk y^k reproduces G^i_j.
            for i in 0..2 {
                for j in 0..2 {
                    let v: f64 = (0..2).map(|k| b.get(&[i, j, k]) * p.y[k]).sum();
                    assert!((v - conn.get(&[i, j])).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn berwald_riemann_traces_to_riemann() {
        let m = funk(FunkSpec::new(2, vec![0.2, 0.1])).unwrap();
        for p in sample_points(2, 4, 9, 0.6) {
            let local = LocalGeometry::new(&m, &p, 6).unwrap();
            let k = local.berwald_riemann().unwrap().value();
            let r = local.riemann().unwrap().value();
            // K^i_jkl y^j y^l = R^i_k
            for i in 0..2 {
                for kk in 0..2 {
                    let mut v = 0.0;
                    for j in 0..2 {
                        for l in 0..2 {
                            v += k.get(&[i, j, kk, l]) * p.y[j] * p.y[l];
                        }
                    }
                    assert!((v - r.get(&[i, kk])).abs() < 1e-10 * r.max_abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn out_of_domain_points_are_rejected() {
        let m = space_form(SpaceFormSpec { n: 2, k: -1.0 }).unwrap();
        let p = TangentPoint::new(vec![0.9, 0.9], vec![1.0, 0.0]);
        assert!(matches!(
            LocalGeometry::new(&m, &p, 2),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(klein(SpaceFormSpec { n: 2, k: 1.0 }).is_err());
    }

    #[test]
    fn insufficient_order_is_reported() {
        let m = euclidean(2);
        let p = TangentPoint::new(vec![0.1, 0.2], vec![1.0, 0.5]);
        let local = LocalGeometry::new(&m, &p, 3).unwrap();
        assert!(matches!(local.riemann(), Err(Error::OrderExceeded { .. })));
    }
}
