//! Projective factors, vector-field classification and the invariance and
//! identity suites for projective fields.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{complete_lift, CompleteLift, InvariantJets, PolyVectorField};
use crate::check::{Check, MaxResidual};
use crate::deriv::{Jet, TangentPoint};
use crate::error::{Error, Result};
use crate::geometry::{LocalGeometry, MetricModel};
use crate::randers::{contract, detect_isotropy, RandersJets, VolumeForm};
use crate::squantities::SQuantityJets;
use crate::tensor::{JetTensor, Symmetry, TensorValue};

/// Classification tolerance.
pub const PROJECTIVE_TOL: f64 = 1e-6;
/// Disagreement between the three C-projective tests beyond this level is
/// an engine error rather than a verdict.
pub const EQUIVALENCE_GUARD: f64 = 1e-5;
/// Jet order that covers every classification test.
pub const CLASSIFY_ORDER: usize = 7;
/// Jet order that covers the Lie derivative of the Weyl tensor.
pub const INVARIANCE_ORDER: usize = 9;
/// Threshold for the identities involving `K_jl`.
pub const RICCI_IDENTITY_TOL: f64 = 1e-5;
/// Threshold for the Euler identity of the projective factor.
pub const HOMOGENEITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub tol: f64,
    pub guard: f64,
    pub order: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            tol: PROJECTIVE_TOL,
            guard: EQUIVALENCE_GUARD,
            order: CLASSIFY_ORDER,
        }
    }
}

/// `P` from the Euclidean projection of `L G` onto `y`, with the relative
/// size of the part orthogonal to `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorEstimate {
    pub p: f64,
    pub residual: f64,
}

/// Projects `lg` onto `y`. With `demand`, a residual above
/// [`PROJECTIVE_TOL`] is an error.
pub fn extract_factor(lg: &[f64], y: &[f64], demand: bool) -> Result<FactorEstimate> {
    let yy: f64 = y.iter().map(|v| v * v).sum();
    if !(yy > 0.0) {
        return Err(Error::InvalidContext("fiber point must be nonzero".into()));
    }
    let p = lg.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / yy;
    let size = lg.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let off = lg
        .iter()
        .zip(y)
        .fold(0.0f64, |m, (a, b)| m.max((a - p * b).abs()));
    let residual = off / size.max(1.0);
    if demand && residual > PROJECTIVE_TOL {
        return Err(Error::NotProjective { residual });
    }
    Ok(FactorEstimate { p, residual })
}

pub(crate) fn factor_p(lg: &[f64], y: &[f64]) -> Result<f64> {
    Ok(extract_factor(lg, y, false)?.p)
}

/// `P`, its vertical derivatives and `P_i|j` at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveFactorData {
    pub p: f64,
    pub p_i: Vec<f64>,
    pub p_ij: TensorValue,
    pub p_i_bar_j: TensorValue,
    pub residual: f64,
}

/// Jets at one sample point shared by every field evaluated there.
pub(crate) struct PointContext<'m> {
    pub local: LocalGeometry<'m>,
    pub randers: Option<RandersJets>,
    pub sq: SQuantityJets,
    pub invariants: Option<InvariantJets>,
}

pub(crate) fn default_volume(m: &MetricModel) -> VolumeForm {
    if m.randers_spec().is_some() {
        VolumeForm::BusemannHausdorff
    } else {
        VolumeForm::Coordinate
    }
}

impl<'m> PointContext<'m> {
    pub fn new(
        m: &'m MetricModel,
        at: &TangentPoint,
        order: usize,
        invariants: bool,
    ) -> Result<PointContext<'m>> {
        let local = LocalGeometry::new(m, at, order)?;
        let randers = match m.randers_spec() {
            Some(spec) => Some(RandersJets::from_coords(spec, local.coords())?),
            None => None,
        };
        let sq = SQuantityJets::new(&local, &default_volume(m))?;
        let invariants = if invariants {
            Some(InvariantJets::new(&local, Some(&sq), randers.as_ref())?)
        } else {
            None
        };
        Ok(PointContext {
            local,
            randers,
            sq,
            invariants,
        })
    }
}

/// Jets of `L G` and of the projective factor for one field at one point.
pub(crate) struct FactorJets {
    pub lg: Vec<Jet>,
    pub p: Jet,
    pub residual: f64,
}

fn factor_jets(
    local: &LocalGeometry<'_>,
    lift: &CompleteLift,
    out_order: usize,
) -> Result<FactorJets> {
    let n = local.n();
    let lg = lift.lie_spray(local.spray()?, out_order);
    let y: Vec<Jet> = (0..n).map(|i| local.y(i).truncate(out_order)).collect();
    let p = contract(&lg, &y).div(&contract(&y, &y))?;
    let lg_values: Vec<f64> = lg.iter().map(Jet::value).collect();
    let residual = extract_factor(&lg_values, &local.point().y, false)?.residual;
    Ok(FactorJets { lg, p, residual })
}

impl FactorJets {
    fn p_i(&self) -> JetTensor {
        JetTensor::scalar(self.p.clone()).vertical()
    }

    fn data(&self, local: &LocalGeometry<'_>) -> Result<ProjectiveFactorData> {
        let p_i = self.p_i();
        Ok(ProjectiveFactorData {
            p: self.p.value(),
            p_i: p_i.value().data,
            p_ij: p_i
                .vertical()
                .value()
                .with_symmetries(&[Symmetry::Symmetric(0, 1)]),
            p_i_bar_j: local.cov_deriv(&p_i)?.value(),
            residual: self.residual,
        })
    }
}

/// Projective factor data of `field` at a point; fails with `NotProjective`
/// when `L G` is not proportional to `y` there.
pub fn projective_factor(
    field: &PolyVectorField,
    m: &MetricModel,
    at: &TangentPoint,
) -> Result<ProjectiveFactorData> {
    let local = LocalGeometry::new(m, at, 5)?;
    let lift = complete_lift(field, local.coords())?;
    let fj = factor_jets(&local, &lift, 2)?;
    if fj.residual > PROJECTIVE_TOL {
        return Err(Error::NotProjective {
            residual: fj.residual,
        });
    }
    fj.data(&local)
}

fn relative(t: &JetTensor, base: &JetTensor) -> f64 {
    t.value().max_abs() / base.value().max_abs().max(1.0)
}

/// Residuals of every classification test for one field at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointVerdicts {
    pub killing_alpha: Option<f64>,
    pub killing_f: f64,
    pub affine: f64,
    pub projective: f64,
    pub special: f64,
    pub closeness: f64,
    pub lie_sigma: f64,
    pub lie_xi: f64,
    pub h_invariant: Option<f64>,
}

fn evaluate_field(
    pc: &PointContext<'_>,
    field: &PolyVectorField,
) -> Result<(PointVerdicts, FactorJets)> {
    let local = &pc.local;
    let n = local.n();
    let lift = complete_lift(field, local.coords())?;
    let fj = factor_jets(local, &lift, 2)?;

    let killing_alpha = match &pc.randers {
        Some(rj) => {
            let a = JetTensor::new(n, "ll", rj.a.clone())?;
            Some(relative(&lift.lie_tensor(&a, 0)?, &a))
        }
        None => None,
    };
    let f = local.f();
    let killing_f = lift.lie_scalar(f, 0).value().abs() / f.value().abs().max(1.0);

    let lg_tensor = JetTensor::new(n, "u", fj.lg.clone())?;
    let lg_jk = lg_tensor.vertical().vertical();
    let affine = lg_jk.value().max_abs() / local.berwald()?.value().max_abs().max(1.0);

    let special = relative(&lift.lie_tensor(&pc.sq.e, 0)?, &pc.sq.e);
    let p_i = fj.p_i();
    let p_bar = local.cov_deriv(&p_i)?;
    let closeness = {
        let v = p_bar.value();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((v.get(&[i, j]) - v.get(&[j, i])).abs());
            }
        }
        worst / v.max_abs().max(1.0)
    };
    let lie_sigma = relative(&lift.lie_tensor(&pc.sq.sigma, 0)?, &pc.sq.sigma);
    let lie_xi = relative(&lift.lie_tensor(&pc.sq.xi, 0)?, &pc.sq.xi);
    let h_invariant = match &pc.sq.h {
        Some(h) if h.order() >= 1 => Some(relative(&lift.lie_tensor(h, 0)?, h)),
        _ => None,
    };
    Ok((
        PointVerdicts {
            killing_alpha,
            killing_f,
            affine,
            projective: fj.residual,
            special,
            closeness,
            lie_sigma,
            lie_xi,
            h_invariant,
        },
        fj,
    ))
}

/// Residuals of one field at one point.
pub fn classify_at(
    field: &PolyVectorField,
    m: &MetricModel,
    at: &TangentPoint,
) -> Result<PointVerdicts> {
    let pc = PointContext::new(m, at, CLASSIFY_ORDER, false)?;
    Ok(evaluate_field(&pc, field)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictFlags {
    /// Tested against `alpha`; absent for metrics without a Randers split.
    pub killing_alpha: Option<bool>,
    pub killing_f: bool,
    pub affine: bool,
    pub projective: bool,
    pub special: bool,
    pub c_projective: bool,
    pub h_invariant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub flags: VerdictFlags,
    /// Worst residual per test over the sample points.
    pub residuals: BTreeMap<String, f64>,
    /// Factor data at the first sample point, for projective fields.
    pub factor: Option<ProjectiveFactorData>,
    pub points: usize,
}

#[derive(Default)]
struct Aggregate {
    killing_alpha: Option<MaxResidual>,
    killing_f: MaxResidual,
    affine: MaxResidual,
    projective: MaxResidual,
    special: MaxResidual,
    closeness: MaxResidual,
    lie_sigma: MaxResidual,
    lie_xi: MaxResidual,
    h_invariant: Option<MaxResidual>,
}

impl Aggregate {
    fn add(&mut self, v: &PointVerdicts) {
        if let Some(r) = v.killing_alpha {
            self.killing_alpha
                .get_or_insert_with(MaxResidual::default)
                .update(r);
        }
        self.killing_f.update(v.killing_f);
        self.affine.update(v.affine);
        self.projective.update(v.projective);
        self.special.update(v.special);
        self.closeness.update(v.closeness);
        self.lie_sigma.update(v.lie_sigma);
        self.lie_xi.update(v.lie_xi);
        if let Some(r) = v.h_invariant {
            self.h_invariant
                .get_or_insert_with(MaxResidual::default)
                .update(r);
        }
    }

    fn report(
        self,
        factor: Option<ProjectiveFactorData>,
        points: usize,
        opts: &ClassifyOptions,
    ) -> Result<ClassificationReport> {
        let tol = opts.tol;
        let projective = self.projective.0 < tol;
        let c_tests = [self.closeness.0, self.lie_sigma.0, self.lie_xi.0];
        if projective {
            let passing = c_tests.iter().filter(|&&r| r < tol).count();
            let worst = c_tests.iter().fold(0.0f64, |m, &r| m.max(r));
            if passing > 0 && passing < 3 && worst > opts.guard {
                return Err(Error::EquivalenceViolation {
                    closedness: c_tests[0],
                    lie_sigma: c_tests[1],
                    lie_xi: c_tests[2],
                });
            }
        }
        let mut residuals = BTreeMap::new();
        if let Some(r) = self.killing_alpha {
            residuals.insert("killing_alpha".to_string(), r.0);
        }
        residuals.insert("killing_F".to_string(), self.killing_f.0);
        residuals.insert("affine".to_string(), self.affine.0);
        residuals.insert("projective".to_string(), self.projective.0);
        residuals.insert("special".to_string(), self.special.0);
        residuals.insert("closeness".to_string(), self.closeness.0);
        residuals.insert("lie_sigma".to_string(), self.lie_sigma.0);
        residuals.insert("lie_xi".to_string(), self.lie_xi.0);
        if let Some(r) = self.h_invariant {
            residuals.insert("h_invariant".to_string(), r.0);
        }
        let flags = VerdictFlags {
            killing_alpha: self.killing_alpha.map(|r| r.0 < tol),
            killing_f: self.killing_f.0 < tol,
            affine: projective && self.affine.0 < tol,
            projective,
            special: projective && self.special.0 < tol,
            c_projective: projective && c_tests.iter().all(|&r| r < tol),
            h_invariant: projective && self.h_invariant.is_some_and(|r| r.0 < tol),
        };
        Ok(ClassificationReport {
            flags,
            residuals,
            factor: if projective { factor } else { None },
            points,
        })
    }
}

fn check_points(points: &[TangentPoint]) -> Result<()> {
    if points.len() < 10 {
        return Err(Error::InvalidSpec(format!(
            "classification needs at least 10 sample points, got {}",
            points.len()
        )));
    }
    Ok(())
}

/// Classifies each field over the sample points.
pub fn classify(
    fields: &[PolyVectorField],
    m: &MetricModel,
    points: &[TangentPoint],
    opts: &ClassifyOptions,
) -> Result<Vec<ClassificationReport>> {
    check_points(points)?;
    for f in fields {
        if f.n != m.dim() {
            return Err(Error::DimensionMismatch {
                expected: m.dim(),
                got: f.n,
            });
        }
    }
    let order = opts.order.max(CLASSIFY_ORDER);
    let mut aggregates: Vec<Aggregate> = fields.iter().map(|_| Aggregate::default()).collect();
    let mut factors: Vec<Option<ProjectiveFactorData>> = vec![None; fields.len()];
    for (pi, p) in points.iter().enumerate() {
        let pc = PointContext::new(m, p, order, false)?;
        for (fi, f) in fields.iter().enumerate() {
            let (v, fj) = evaluate_field(&pc, f)?;
            aggregates[fi].add(&v);
            if pi == 0 {
                factors[fi] = Some(fj.data(&pc.local)?);
            }
        }
    }
    aggregates
        .into_iter()
        .zip(factors)
        .map(|(a, f)| a.report(f, points.len(), opts))
        .collect()
}

/// Residuals of the invariance and identity checks for one projective field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub classification: ClassificationReport,
    pub checks: Vec<Check>,
}

impl InvarianceReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Default)]
struct SuiteResiduals {
    weyl: MaxResidual,
    w_tilde: MaxResidual,
    w_star: MaxResidual,
    alpha_s: Option<MaxResidual>,
    z: MaxResidual,
    lie_spray_derivative: MaxResidual,
    lie_ricci: MaxResidual,
    lie_ricci_skew: MaxResidual,
    factor_decomposition: Option<MaxResidual>,
    homogeneity: MaxResidual,
}

fn suite_at(
    pc: &PointContext<'_>,
    field: &PolyVectorField,
    acc: &mut SuiteResiduals,
) -> Result<PointVerdicts> {
    let local = &pc.local;
    let n = local.n();
    let nf = n as f64;
    let (verdicts, _) = evaluate_field(pc, field)?;
    let lift = complete_lift(field, local.coords())?;
    let fj = factor_jets(local, &lift, 3)?;
    let inv = pc
        .invariants
        .as_ref()
        .expect("suite contexts carry invariants");
    let lie_rel = |t: &Option<JetTensor>| -> Result<f64> {
        let t = t.as_ref().expect("suite order covers every invariant");
        Ok(relative(&lift.lie_tensor(t, 0)?, t))
    };
    acc.weyl.update(lie_rel(&inv.weyl)?);
    acc.w_tilde.update(lie_rel(&inv.w_tilde)?);
    acc.w_star.update(lie_rel(&inv.w_star)?);
    acc.z.update(lie_rel(&inv.z)?);
    if inv.alpha_s.is_some() {
        let r = lie_rel(&inv.alpha_s)?;
        acc.alpha_s
            .get_or_insert_with(MaxResidual::default)
            .update(r);
    }

    let y = &local.point().y;
    let p = fj.p.value();
    let p_i = fj.p_i();
    let p_iv = p_i.value();
    let p_bar = local.cov_deriv(&p_i)?.value(); // [i][j] = P_i|j
    let p_ij = p_i.vertical();
    let p_ij_bar = local.cov_deriv(&p_ij)?.value(); // [l][j][m] = P_lj|m

    // L G^i_k = P delta^i_k + P_k y^i
    let lg_k = JetTensor::new(n, "u", fj.lg.clone())?.vertical().value();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for k in 0..n {
            let rhs = if i == k { p } else { 0.0 } + p_iv.data[k] * y[i];
            worst = worst.max((lg_k.get(&[i, k]) - rhs).abs());
        }
    }
    acc.lie_spray_derivative
        .update(worst / lg_k.max_abs().max(1.0));

    let homog: f64 = (0..n).map(|i| y[i] * p_iv.data[i]).sum::<f64>() - p;
    acc.homogeneity.update(homog.abs() / p.abs().max(1.0));

    // L K_jl = P_l|j - n P_j|l + P_lj|0
    let ric = local.ricci_tensor()?;
    let lie_ric = lift.lie_tensor(ric, 0)?.value();
    let mut worst_ric: f64 = 0.0;
    let mut worst_skew: f64 = 0.0;
    let mut scale: f64 = lie_ric.max_abs();
    for j in 0..n {
        for l in 0..n {
            let p_lj0: f64 = (0..n).map(|m| p_ij_bar.get(&[l, j, m]) * y[m]).sum();
            let rhs = p_bar.get(&[l, j]) - nf * p_bar.get(&[j, l]) + p_lj0;
            scale = scale.max(rhs.abs());
            worst_ric = worst_ric.max((lie_ric.get(&[j, l]) - rhs).abs());
            let lie_skew = (lie_ric.get(&[j, l]) - lie_ric.get(&[l, j])) / 2.0;
            let rhs_skew = (nf + 1.0) / 2.0 * (p_bar.get(&[l, j]) - p_bar.get(&[j, l]));
            worst_skew = worst_skew.max((lie_skew - rhs_skew).abs());
        }
    }
    acc.lie_ricci.update(worst_ric / scale.max(1.0));
    acc.lie_ricci_skew.update(worst_skew / scale.max(1.0));

    // P = eta + L(S / (n + 1) + rho0)
    if let Some(rj) = &pc.randers {
        let lg_alpha = lift.lie_spray(&rj.spray_alpha(), 0);
        let lg_alpha: Vec<f64> = lg_alpha.iter().map(Jet::value).collect();
        let eta = extract_factor(&lg_alpha, y, false)?.p;
        let potential = &pc.sq.s * (1.0 / (nf + 1.0)) + &rj.rho0;
        let rhs = eta + lift.lie_scalar(&potential, 0).value();
        acc.factor_decomposition
            .get_or_insert_with(MaxResidual::default)
            .update((p - rhs).abs() / p.abs().max(1.0));
    }
    Ok(verdicts)
}

/// Lie derivatives of the invariant tensors along a projective field, plus
/// the projective-factor identities. Fails with `NotProjective` when the
/// field is not projective on the sample points.
pub fn invariance_suite(
    field: &PolyVectorField,
    m: &MetricModel,
    points: &[TangentPoint],
    opts: &ClassifyOptions,
) -> Result<InvarianceReport> {
    invariance_suites(std::slice::from_ref(field), m, points, opts)?
        .pop()
        .expect("one field in, one report out")
}

/// [`invariance_suite`] for several fields sharing the per-point jets; each
/// field gets its own result.
pub fn invariance_suites(
    fields: &[PolyVectorField],
    m: &MetricModel,
    points: &[TangentPoint],
    opts: &ClassifyOptions,
) -> Result<Vec<Result<InvarianceReport>>> {
    check_points(points)?;
    let order = opts.order.max(INVARIANCE_ORDER);
    let mut suites: Vec<SuiteResiduals> =
        fields.iter().map(|_| SuiteResiduals::default()).collect();
    let mut aggregates: Vec<Aggregate> = fields.iter().map(|_| Aggregate::default()).collect();
    let mut factors: Vec<Option<ProjectiveFactorData>> = vec![None; fields.len()];
    for (pi, p) in points.iter().enumerate() {
        let pc = PointContext::new(m, p, order, true)?;
        for (fi, f) in fields.iter().enumerate() {
            let v = suite_at(&pc, f, &mut suites[fi])?;
            aggregates[fi].add(&v);
            if pi == 0 {
                let lift = complete_lift(f, pc.local.coords())?;
                factors[fi] = Some(factor_jets(&pc.local, &lift, 2)?.data(&pc.local)?);
            }
        }
    }
    let mut out = Vec::with_capacity(fields.len());
    for ((agg, suite), factor) in aggregates.into_iter().zip(suites).zip(factors) {
        let report = match agg.report(factor, points.len(), opts) {
            Ok(r) => r,
            Err(e) => {
                out.push(Err(e));
                continue;
            }
        };
        if !report.flags.projective {
            out.push(Err(Error::NotProjective {
                residual: report.residuals["projective"],
            }));
            continue;
        }
        let flags = report.flags;
        let threshold = PROJECTIVE_TOL;
        let mut checks = vec![Check::measured("lie_W", suite.weyl.0, threshold)];
        checks.push(if flags.c_projective {
            Check::measured("lie_Wtilde", suite.w_tilde.0, threshold)
        } else {
            Check::skipped("lie_Wtilde", threshold, "field is not C-projective")
        });
        checks.push(if flags.special {
            Check::measured("lie_Wstar", suite.w_star.0, threshold)
        } else {
            Check::skipped("lie_Wstar", threshold, "field is not special")
        });
        checks.push(match suite.alpha_s {
            Some(r) => Check::measured("lie_alpha_s", r.0, threshold),
            None => Check::skipped("lie_alpha_s", threshold, "metric has no Randers split"),
        });
        checks.push(Check::measured("lie_Z", suite.z.0, threshold));
        checks.push(Check::measured(
            "lie_spray_derivative",
            suite.lie_spray_derivative.0,
            threshold,
        ));
        checks.push(Check::measured(
            "lie_ricci",
            suite.lie_ricci.0,
            RICCI_IDENTITY_TOL,
        ));
        checks.push(Check::measured(
            "lie_ricci_skew",
            suite.lie_ricci_skew.0,
            threshold,
        ));
        checks.push(match suite.factor_decomposition {
            Some(r) => Check::measured("factor_decomposition", r.0, threshold),
            None => Check::skipped(
                "factor_decomposition",
                threshold,
                "metric has no Randers split",
            ),
        });
        checks.push(Check::measured(
            "factor_homogeneity",
            suite.homogeneity.0,
            HOMOGENEITY_TOL,
        ));
        out.push(Ok(InvarianceReport {
            classification: report,
            checks,
        }));
    }
    Ok(out)
}

/// Residuals of the two conditions characterizing special projective fields
/// on a Randers metric of isotropic S-curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecialResiduals {
    pub c: f64,
    /// `L G_alpha^i - ((V.c) beta + c L beta + L s0 + P) y^i`
    pub condition_i: f64,
    /// `2 (V.c) alpha^2 + c t00`
    pub condition_ii: f64,
}

/// Evaluates both conditions over the sample points. `c` is detected from
/// `e00 = 2c(alpha^2 - beta^2)` when not supplied; only constant `c` is
/// supported, so `V.c = 0`.
pub fn special_conditions(
    field: &PolyVectorField,
    m: &MetricModel,
    points: &[TangentPoint],
    c: Option<f64>,
) -> Result<SpecialResiduals> {
    let spec = m
        .randers_spec()
        .ok_or_else(|| Error::InvalidSpec("special conditions need a Randers metric".into()))?;
    let c = match c {
        Some(c) => c,
        None => detect_isotropy(spec, points, 1e-8)?,
    };
    let n = m.dim();
    let mut cond_i = MaxResidual::default();
    let mut cond_ii = MaxResidual::default();
    for p in points {
        let local = LocalGeometry::new(m, p, 4)?;
        let rj = RandersJets::from_coords(spec, local.coords())?;
        let lift = complete_lift(field, local.coords())?;
        let lg: Vec<f64> = lift
            .lie_spray(local.spray()?, 0)
            .iter()
            .map(Jet::value)
            .collect();
        let factor = extract_factor(&lg, &p.y, false)?.p;
        let lg_alpha: Vec<f64> = lift
            .lie_spray(&rj.spray_alpha(), 0)
            .iter()
            .map(Jet::value)
            .collect();
        let l_beta = lift.lie_scalar(&rj.beta, 0).value();
        let l_s0 = lift.lie_scalar(&rj.s0, 0).value();
        let coeff = c * l_beta + l_s0 + factor;
        let size = lg_alpha.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let off = (0..n).fold(0.0f64, |m, i| m.max((lg_alpha[i] - coeff * p.y[i]).abs()));
        cond_i.update(off / size.max(1.0));

        let a = JetTensor::new(n, "ll", rj.a.clone())?;
        let t = lift.lie_tensor(&a, 0)?.value();
        let mut t00 = 0.0;
        for i in 0..n {
            for j in 0..n {
                t00 += t.get(&[i, j]) * p.y[i] * p.y[j];
            }
        }
        let alpha2 = rj.alpha.value().powi(2);
        cond_ii.update((c * t00).abs() / alpha2.max(1.0));
    }
    Ok(SpecialResiduals {
        c,
        condition_i: cond_i.0,
        condition_ii: cond_ii.0,
    })
}

/// For each field: whether it is projective on `F`, and whether it is
/// projective on `alpha` with `L(alpha s) = 0`.
pub fn projective_characterization(
    fields: &[PolyVectorField],
    m: &MetricModel,
    points: &[TangentPoint],
    tol: f64,
) -> Result<Vec<(bool, bool)>> {
    let spec = m
        .randers_spec()
        .ok_or_else(|| Error::InvalidSpec("the characterization needs a Randers metric".into()))?;
    let mut on_f = vec![MaxResidual::default(); fields.len()];
    let mut on_alpha = vec![MaxResidual::default(); fields.len()];
    let mut lie_as = vec![MaxResidual::default(); fields.len()];
    for p in points {
        let local = LocalGeometry::new(m, p, 3)?;
        let rj = RandersJets::from_coords(spec, local.coords())?;
        let alpha_s = rj.alpha_s();
        let g_alpha = rj.spray_alpha();
        for (fi, f) in fields.iter().enumerate() {
            let lift = complete_lift(f, local.coords())?;
            let lg: Vec<f64> = lift
                .lie_spray(local.spray()?, 0)
                .iter()
                .map(Jet::value)
                .collect();
            on_f[fi].update(extract_factor(&lg, &p.y, false)?.residual);
            let la: Vec<f64> = lift.lie_spray(&g_alpha, 0).iter().map(Jet::value).collect();
            on_alpha[fi].update(extract_factor(&la, &p.y, false)?.residual);
            lie_as[fi].update(relative(&lift.lie_tensor(&alpha_s, 0)?, &alpha_s));
        }
    }
    Ok((0..fields.len())
        .map(|i| (on_f[i].0 < tol, on_alpha[i].0 < tol && lie_as[i].0 < tol))
        .collect())
}
