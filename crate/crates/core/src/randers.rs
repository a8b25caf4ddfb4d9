//! Randers structure `F = alpha + beta`: Levi-Civita data of `alpha`, the
//! tensors `r`, `s`, `e` built from `beta`, the `rho` terms, the closed-form
//! spray, the Busemann-Hausdorff volume and the S-curvature.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::deriv::{self, lift_point, Jet, JetContext, ScalarField, TangentPoint};
use crate::error::{Error, Result};
use crate::geometry::{LocalGeometry, MetricModel};
use crate::linalg::{check_spd, invert_jets, value_matrix};
use crate::tensor::{JetTensor, Symmetry, TensorValue};

/// A symmetric matrix field `a_ij(x)`, row-major.
///
/// `x` holds the `n` position jets; they live in the full `2n`-variable
/// space so that results combine with fiber-dependent jets.
pub trait MatrixField: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[Jet]) -> Result<Vec<Jet>>;
    fn in_domain(&self, _x: &[f64]) -> bool {
        true
    }
}

/// A covector field `b_i(x)`.
pub trait CovectorField: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[Jet]) -> Result<Vec<Jet>>;
    fn in_domain(&self, _x: &[f64]) -> bool {
        true
    }
}

/// The Riemannian metric `alpha = sqrt(a_ij(x) y^i y^j)`.
#[derive(Clone)]
pub struct RiemannianSpec {
    a: Arc<dyn MatrixField>,
}

impl RiemannianSpec {
    pub fn new(a: Arc<dyn MatrixField>) -> RiemannianSpec {
        RiemannianSpec { a }
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn matrix(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        self.a.eval(x)
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        self.a.in_domain(x)
    }

    /// `alpha` as a scalar field on `TM_0`.
    pub fn norm(&self) -> AlphaNorm {
        AlphaNorm(self.clone())
    }
}

/// The one-form `beta = b_i(x) y^i`.
#[derive(Clone)]
pub struct OneFormSpec {
    b: Arc<dyn CovectorField>,
}

impl OneFormSpec {
    pub fn new(b: Arc<dyn CovectorField>) -> OneFormSpec {
        OneFormSpec { b }
    }

    pub fn dim(&self) -> usize {
        self.b.dim()
    }

    pub fn covector(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        self.b.eval(x)
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        self.b.in_domain(x)
    }
}

/// The analytic split of a Randers metric.
#[derive(Clone)]
pub struct RandersSpec {
    pub alpha: RiemannianSpec,
    pub beta: OneFormSpec,
}

impl fmt::Debug for RandersSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RandersSpec(n = {})", self.dim())
    }
}

impl RandersSpec {
    pub fn new(alpha: RiemannianSpec, beta: OneFormSpec) -> Result<RandersSpec> {
        if alpha.dim() != beta.dim() {
            return Err(Error::DimensionMismatch {
                expected: alpha.dim(),
                got: beta.dim(),
            });
        }
        Ok(RandersSpec { alpha, beta })
    }

    pub fn dim(&self) -> usize {
        self.alpha.dim()
    }

    /// `alpha + beta` assembled as a scalar field.
    pub fn assembled(&self) -> RandersNorm {
        RandersNorm(self.clone())
    }

    /// A metric model evaluated through the assembled `alpha + beta`.
    pub fn into_model(self, name: impl Into<String>) -> MetricModel {
        let f: Arc<dyn ScalarField> = Arc::new(self.assembled());
        MetricModel::randers(name, f, self)
    }
}

/// `alpha` of a [`RiemannianSpec`] as a scalar field.
#[derive(Clone)]
pub struct AlphaNorm(RiemannianSpec);

impl ScalarField for AlphaNorm {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval(&self, coords: &[Jet]) -> Result<Jet> {
        let n = self.dim();
        let a = self.0.matrix(&coords[..n])?;
        quadratic_form(&a, &coords[n..]).sqrt()
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        self.0.in_domain(x)
    }
}

/// `alpha + beta` as a scalar field.
#[derive(Clone)]
pub struct RandersNorm(RandersSpec);

impl ScalarField for RandersNorm {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval(&self, coords: &[Jet]) -> Result<Jet> {
        let n = self.dim();
        let a = self.0.alpha.matrix(&coords[..n])?;
        let b = self.0.beta.covector(&coords[..n])?;
        let alpha = quadratic_form(&a, &coords[n..]).sqrt()?;
        Ok(alpha + contract(&b, &coords[n..]))
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        self.0.alpha.in_domain(x) && self.0.beta.in_domain(x)
    }
}

/// `m_ij u^i u^j` for a row-major matrix `m`.
pub(crate) fn quadratic_form(m: &[Jet], u: &[Jet]) -> Jet {
    let n = u.len();
    let mut acc = &m[0] * &(&u[0] * &u[0]);
    for i in 0..n {
        for j in 0..n {
            if i == 0 && j == 0 {
                continue;
            }
            acc += &(&m[i * n + j] * &(&u[i] * &u[j]));
        }
    }
    acc
}

/// `b_i u^i`.
pub(crate) fn contract(b: &[Jet], u: &[Jet]) -> Jet {
    let mut acc = &b[0] * &u[0];
    for i in 1..u.len() {
        acc += &(&b[i] * &u[i]);
    }
    acc
}

/// Jets of every Randers quantity at one point of `TM_0`.
pub struct RandersJets {
    n: usize,
    pub coords: Vec<Jet>,
    /// `a_ij`
    pub a: Vec<Jet>,
    /// `a^ij`
    pub a_inv: Vec<Jet>,
    pub det_a: Jet,
    /// `Gamma^i_jk`, variance `ull`
    pub gamma: JetTensor,
    /// `b_i`
    pub b: Vec<Jet>,
    pub r: JetTensor,
    pub s: JetTensor,
    /// `s^i_j`
    pub s_up: JetTensor,
    /// `s_j`
    pub s_low: Vec<Jet>,
    pub e: JetTensor,
    /// `|beta|_alpha^2`
    pub beta_norm_sq: Jet,
    pub rho: Jet,
    pub alpha: Jet,
    pub beta: Jet,
    pub e00: Jet,
    pub s0: Jet,
    pub rho0: Jet,
}

impl RandersJets {
    /// Evaluates at an existing jet context; `coords` are its lifted coordinates.
    pub fn from_coords(spec: &RandersSpec, coords: &[Jet]) -> Result<RandersJets> {
        let n = spec.dim();
        if coords.len() != 2 * n {
            return Err(Error::DimensionMismatch {
                expected: 2 * n,
                got: coords.len(),
            });
        }
        // Connection and covariant derivatives of b need first derivatives.
        if coords[0].order() < 1 {
            return Err(Error::OrderExceeded {
                requested: 1,
                available: 0,
            });
        }
        let x = &coords[..n];
        let y = &coords[n..];
        let a = spec.alpha.matrix(x)?;
        check_spd(&value_matrix(&a, n))?;
        let (a_inv, det_a) = invert_jets(&a, n)?;
        let b = spec.beta.covector(x)?;
        let order = a[0].order();

        let mut beta_norm_sq = a_inv[0].zero_like();
        for i in 0..n {
            for j in 0..n {
                beta_norm_sq += &(&a_inv[i * n + j] * &(&b[i] * &b[j]));
            }
        }
        if !(beta_norm_sq.value() < 1.0) {
            return Err(Error::RandersConditionViolated {
                norm_sq: beta_norm_sq.value(),
            });
        }

        let gamma = if order >= 1 {
            // Gamma_ljk = (d_j a_lk + d_k a_lj - d_l a_jk) / 2
            let mut lower = Vec::with_capacity(n * n * n);
            for l in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        lower.push(
                            (a[l * n + k].d(j) + a[l * n + j].d(k) - a[j * n + k].d(l)) * 0.5,
                        );
                    }
                }
            }
            JetTensor::from_fn(n, "ull", |ijk| {
                let terms: Vec<Jet> = (0..n)
                    .map(|l| &a_inv[ijk[0] * n + l] * &lower[(l * n + ijk[1]) * n + ijk[2]])
                    .collect();
                deriv::sum(&terms).expect("n >= 1")
            })?
        } else {
            JetTensor::from_fn(n, "ull", |_| a[0].zero_like())?
        };

        // nabla_j b_i, stored as [i][j]
        let nabla = |i: usize, j: usize| -> Jet {
            let mut v = if order >= 1 {
                b[i].d(j)
            } else {
                b[i].zero_like()
            };
            for k in 0..n {
                v -= &(&b[k] * gamma.get(&[k, i, j]));
            }
            v
        };
        let nb: Vec<Jet> = (0..n * n).map(|o| nabla(o / n, o % n)).collect();
        let r = JetTensor::from_fn(n, "ll", |ij| {
            (&nb[ij[0] * n + ij[1]] + &nb[ij[1] * n + ij[0]]) * 0.5
        })?;
        let s = JetTensor::from_fn(n, "ll", |ij| {
            (&nb[ij[0] * n + ij[1]] - &nb[ij[1] * n + ij[0]]) * 0.5
        })?;
        let s_up = JetTensor::from_fn(n, "ul", |ij| {
            let terms: Vec<Jet> = (0..n)
                .map(|h| &a_inv[ij[0] * n + h] * s.get(&[h, ij[1]]))
                .collect();
            deriv::sum(&terms).expect("n >= 1")
        })?;
        let s_low: Vec<Jet> = (0..n)
            .map(|j| {
                let terms: Vec<Jet> = (0..n).map(|i| &b[i] * s_up.get(&[i, j])).collect();
                deriv::sum(&terms).expect("n >= 1")
            })
            .collect();
        let e = JetTensor::from_fn(n, "ll", |ij| {
            let (i, j) = (ij[0], ij[1]);
            r.get(&[i, j]) + &b[i] * &s_low[j] + &b[j] * &s_low[i]
        })?;

        let one_minus = beta_norm_sq.constant_like(1.0) - &beta_norm_sq;
        let rho = one_minus.ln()? * 0.5;
        let rho0 = if order >= 1 {
            contract(&(0..n).map(|i| rho.d(i)).collect::<Vec<_>>(), y)
        } else {
            rho.zero_like()
        };
        let alpha = quadratic_form(&a, y).sqrt()?;
        let beta = contract(&b, y);
        let e00 = quadratic_form(&e.comps, y);
        let s0 = contract(&s_low, y);

        Ok(RandersJets {
            n,
            coords: coords.to_vec(),
            a,
            a_inv,
            det_a,
            gamma,
            b,
            r,
            s,
            s_up,
            s_low,
            e,
            beta_norm_sq,
            rho,
            alpha,
            beta,
            e00,
            s0,
            rho0,
        })
    }

    pub fn new(spec: &RandersSpec, at: &TangentPoint, order: usize) -> Result<RandersJets> {
        let ctx = JetContext::with_any_order(order, at.clone())?;
        if ctx.n() != spec.dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                got: ctx.n(),
            });
        }
        RandersJets::from_coords(spec, &lift_point(&ctx))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn y(&self, i: usize) -> &Jet {
        &self.coords[self.n + i]
    }

    pub fn f(&self) -> Jet {
        &self.alpha + &self.beta
    }

    /// `G_alpha^i = Gamma^i_jk y^j y^k / 2`.
    pub fn spray_alpha(&self) -> Vec<Jet> {
        let n = self.n;
        let y = &self.coords[n..];
        (0..n)
            .map(|i| quadratic_form(&self.gamma.comps[i * n * n..(i + 1) * n * n], y) * 0.5)
            .collect()
    }

    /// `s^i_0 = s^i_j y^j`.
    pub fn s_up0(&self) -> Vec<Jet> {
        let n = self.n;
        (0..n)
            .map(|i| contract(&self.s_up.comps[i * n..(i + 1) * n], &self.coords[n..]))
            .collect()
    }

    /// `G^i = G_alpha^i + (e00 / 2F - s0) y^i + alpha s^i_0`.
    pub fn spray(&self) -> Result<Vec<Jet>> {
        let f = self.f();
        let factor = self.e00.div(&(&f * 2.0))? - &self.s0;
        let g_alpha = self.spray_alpha();
        let s_up0 = self.s_up0();
        Ok((0..self.n)
            .map(|i| &g_alpha[i] + &factor * self.y(i) + &self.alpha * &s_up0[i])
            .collect())
    }

    /// `S = (n + 1)(e00 / 2F - s0 - rho0)`.
    pub fn s_curvature(&self) -> Result<Jet> {
        let f = self.f();
        let inner = self.e00.div(&(&f * 2.0))? - &self.s0 - &self.rho0;
        Ok(inner * (self.n as f64 + 1.0))
    }

    /// `ln sigma_BH = ln sqrt(det a) + (n + 1) rho`.
    pub fn ln_bh_density(&self) -> Result<Jet> {
        Ok(self.det_a.ln()? * 0.5 + &self.rho * (self.n as f64 + 1.0))
    }

    /// `alpha s^i_j`, variance `ul`.
    pub fn alpha_s(&self) -> JetTensor {
        self.s_up.map(|c| &self.alpha * c)
    }

    /// `e00 - 2c(alpha^2 - beta^2)`.
    pub fn isotropy_defect(&self, c: f64) -> Jet {
        let a2 = &self.alpha * &self.alpha;
        let b2 = &self.beta * &self.beta;
        &self.e00 - (a2 - b2) * (2.0 * c)
    }

    /// The `c` for which `e00 = 2c(alpha^2 - beta^2)` holds at this point.
    pub fn isotropy_factor(&self) -> f64 {
        let a2 = self.alpha.value().powi(2);
        let b2 = self.beta.value().powi(2);
        self.e00.value() / (2.0 * (a2 - b2))
    }
}

/// Point values of the Randers data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandersData {
    pub r: TensorValue,
    pub s: TensorValue,
    pub s_up: TensorValue,
    pub s_low: Vec<f64>,
    pub e: TensorValue,
    pub rho: f64,
    pub e00: f64,
    pub s0: f64,
    pub rho0: f64,
}

/// `(Gamma^i_jk, G_alpha^i)` at a point.
pub fn levi_civita(a: &RiemannianSpec, at: &TangentPoint) -> Result<(TensorValue, Vec<f64>)> {
    let zero = OneFormSpec::new(Arc::new(crate::library::ConstantCovector(vec![
        0.0;
        a.dim()
    ])));
    let spec = RandersSpec::new(a.clone(), zero)?;
    let jets = RandersJets::new(&spec, at, 1)?;
    Ok((
        jets.gamma
            .value()
            .with_symmetries(&[Symmetry::Symmetric(1, 2)]),
        jets.spray_alpha().iter().map(Jet::value).collect(),
    ))
}

pub fn randers_data(spec: &RandersSpec, at: &TangentPoint) -> Result<RandersData> {
    let j = RandersJets::new(spec, at, 1)?;
    Ok(RandersData {
        r: j.r.value().with_symmetries(&[Symmetry::Symmetric(0, 1)]),
        s: j.s
            .value()
            .with_symmetries(&[Symmetry::Antisymmetric(0, 1)]),
        s_up: j.s_up.value(),
        s_low: j.s_low.iter().map(Jet::value).collect(),
        e: j.e.value().with_symmetries(&[Symmetry::Symmetric(0, 1)]),
        rho: j.rho.value(),
        e00: j.e00.value(),
        s0: j.s0.value(),
        rho0: j.rho0.value(),
    })
}

/// Closed-form Randers spray at a point.
pub fn spray_randers(spec: &RandersSpec, at: &TangentPoint) -> Result<Vec<f64>> {
    let j = RandersJets::new(spec, at, 1)?;
    Ok(j.spray()?.iter().map(Jet::value).collect())
}

/// Closed-form Randers S-curvature at a point.
pub fn s_curvature_randers(spec: &RandersSpec, at: &TangentPoint) -> Result<f64> {
    Ok(RandersJets::new(spec, at, 1)?.s_curvature()?.value())
}

/// A volume form `sigma(x) dx^1 ... dx^n`.
#[derive(Clone)]
pub enum VolumeForm {
    /// Busemann-Hausdorff; needs the Randers split of the metric.
    BusemannHausdorff,
    /// `sigma = 1`.
    Coordinate,
    /// A positive density depending on `x` only.
    Custom(Arc<dyn ScalarField>),
}

impl fmt::Debug for VolumeForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl VolumeForm {
    pub fn tag(&self) -> &'static str {
        match self {
            VolumeForm::BusemannHausdorff => "busemann-hausdorff",
            VolumeForm::Coordinate => "coordinate",
            VolumeForm::Custom(_) => "custom",
        }
    }

    /// `ln sigma` as a jet at the point whose lifted coordinates are `coords`.
    pub fn ln_density(&self, m: &MetricModel, coords: &[Jet]) -> Result<Jet> {
        match self {
            VolumeForm::BusemannHausdorff => {
                let spec = m.randers_spec().ok_or(Error::UnsupportedVolume)?;
                RandersJets::from_coords(spec, coords)?.ln_bh_density()
            }
            VolumeForm::Coordinate => Ok(coords[0].zero_like()),
            VolumeForm::Custom(sigma) => {
                let v = sigma.eval(coords)?;
                if !(v.value() > 0.0) {
                    return Err(Error::DomainError {
                        function: "sigma",
                        value: v.value(),
                    });
                }
                v.ln()
            }
        }
    }
}

/// How [`bh_volume`] evaluates the Busemann-Hausdorff density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeMethod {
    ClosedFormRanders,
    IndicatrixIntegration,
}

/// Busemann-Hausdorff density `sigma_F(x)`.
pub fn bh_volume(m: &MetricModel, x: &[f64], method: VolumeMethod) -> Result<f64> {
    let n = m.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    match method {
        VolumeMethod::ClosedFormRanders => {
            let spec = m.randers_spec().ok_or(Error::UnsupportedVolume)?;
            let mut y = vec![0.0; n];
            y[0] = 1.0;
            let j = RandersJets::new(spec, &TangentPoint::new(x.to_vec(), y), 1)?;
            let exponent = (n as f64 + 1.0) / 2.0;
            Ok(j.det_a.value().sqrt() * (1.0 - j.beta_norm_sq.value()).powf(exponent))
        }
        VolumeMethod::IndicatrixIntegration => crate::cubature::indicatrix_density(m, x),
    }
}

/// S-curvature `G^m_m - y^m d(ln sigma)/dx^m` from the spray of any metric.
pub fn s_curvature(m: &MetricModel, at: &TangentPoint, vol: &VolumeForm) -> Result<f64> {
    let local = LocalGeometry::new(m, at, 3)?;
    Ok(s_jet(&local, vol)?.value())
}

/// Jet of the S-curvature at the point of `local`.
pub fn s_jet(local: &LocalGeometry<'_>, vol: &VolumeForm) -> Result<Jet> {
    let n = local.n();
    let conn = local.connection()?;
    let ln_sigma = vol.ln_density(local.metric(), local.coords())?;
    let mut s = conn.get(&[0, 0]).clone();
    for m in 1..n {
        s += conn.get(&[m, m]);
    }
    for m in 0..n {
        s -= &(local.y(m) * &ln_sigma.d(m));
    }
    Ok(s)
}

/// Estimates a constant `c` with `e00 = 2c(alpha^2 - beta^2)` over the given
/// points; fails when the pointwise factors disagree.
pub fn detect_isotropy(spec: &RandersSpec, points: &[TangentPoint], tol: f64) -> Result<f64> {
    let mut factors = Vec::with_capacity(points.len());
    for p in points {
        let j = RandersJets::new(spec, p, 1)?;
        factors.push(j.isotropy_factor());
    }
    let c = factors.first().copied().unwrap_or(0.0);
    let spread = factors.iter().fold(0.0f64, |m, f| m.max((f - c).abs()));
    if spread > tol * c.abs().max(1.0) {
        return Err(Error::IsotropyUnknown { residual: spread });
    }
    Ok(c)
}
