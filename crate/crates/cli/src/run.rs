//! Command runners.

use std::collections::BTreeMap;
use std::sync::Arc;

use finsler_core::check::{Check, MaxResidual, Status};
use finsler_core::deriv::{expand, JetContext};
use finsler_core::geometry::{order as geo_order, spray, MetricModel};
use finsler_core::library::TiltedDensity;
use finsler_core::projective::CLASSIFY_ORDER;
use finsler_core::projective::{
    classify, dim_scan, invariance_suites, ClassifyOptions, DimScanOptions, InvariantJets,
    DIM_SCAN_ORDER, EQUIVALENCE_GUARD, INVARIANCE_ORDER, NULLITY_REL_TOL, PROJECTIVE_TOL,
};
use finsler_core::randers::{detect_isotropy, s_curvature_randers, s_jet, spray_randers};
use finsler_core::squantities::{relations_from_jets, SQuantityJets, RELATION_TOL};
use finsler_core::tensor::TensorValue;
use finsler_core::{Error, Jet, LocalGeometry, PolyVectorField, TangentPoint, VolumeForm};

use crate::error::CliError;
use crate::job::{Command, JobSpec, NamedField, Quantity, VolumeKind, SCHEMA_VERSION};
use crate::report::{
    EngineInfo, FieldClassification, MetricInfo, PointEvaluation, QuantityValue, RunReport, Summary,
};

pub const FD_TOL: f64 = 1e-5;
pub const EULER_TOL: f64 = 1e-10;
pub const HOMOGENEITY_LADDER_TOL: f64 = 1e-8;
pub const SPRAY_DUAL_TOL: f64 = 1e-8;
pub const S_DUAL_TOL: f64 = 1e-7;
pub const SIGMA_VOLUME_TOL: f64 = 1e-7;
pub const HORIZONTAL_F_TOL: f64 = 1e-9;
pub const ISOTROPY_TOL: f64 = 1e-8;
pub const FUNK_S_TOL: f64 = 1e-8;
pub const FUNK_RICCI_TOL: f64 = 1e-6;
pub const FUNK_XI_TOL: f64 = 1e-7;
/// Points used by the finite-difference and homogeneity checks.
const LADDER_POINTS: usize = 10;
const LADDER: [f64; 3] = [0.5, 2.0, 3.0];
/// Points evaluated by `report`.
const REPORT_EVAL_POINTS: usize = 5;

const DEFAULT_EVAL: [Quantity; 4] = [Quantity::F, Quantity::G, Quantity::Spray, Quantity::S];
const REPORT_EVAL: [Quantity; 7] = [
    Quantity::F,
    Quantity::G,
    Quantity::Spray,
    Quantity::S,
    Quantity::Xi,
    Quantity::Sigma,
    Quantity::Ric,
];

pub fn run(job: &JobSpec) -> Result<RunReport, CliError> {
    match job.command {
        Command::Eval => run_eval(job),
        Command::Verify => run_verify(job),
        Command::Classify => run_classify(job),
        Command::DimScan => run_dim_scan(job),
        Command::Report => run_report(job),
    }
}

fn volume(job: &JobSpec, m: &MetricModel) -> Result<VolumeForm, CliError> {
    match job.volume {
        Some(VolumeKind::BusemannHausdorff) if m.randers_spec().is_none() => {
            Err(Error::UnsupportedVolume.into())
        }
        Some(v) => Ok(v.form()),
        None if m.randers_spec().is_some() => Ok(VolumeForm::BusemannHausdorff),
        None => Ok(VolumeForm::Coordinate),
    }
}

fn skeleton(job: &JobSpec, m: &MetricModel, vol: &VolumeForm) -> RunReport {
    RunReport {
        schema_version: SCHEMA_VERSION,
        command: job.command,
        metric: MetricInfo {
            name: m.name().to_string(),
            dim: m.dim(),
            spec: job.metric.clone(),
        },
        engine: EngineInfo {
            version: env!("CARGO_PKG_VERSION").to_string(),
            orders: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            samples: job.sample_config(),
            volume: vol.tag().to_string(),
        },
        evaluations: Vec::new(),
        checks: Vec::new(),
        classification: Vec::new(),
        dim_scan: None,
        summary: Summary::default(),
    }
}

fn classify_options(job: &JobSpec, order: usize) -> ClassifyOptions {
    ClassifyOptions {
        tol: job.tolerance.unwrap_or(PROJECTIVE_TOL),
        guard: EQUIVALENCE_GUARD,
        order: job.order.unwrap_or(order).max(order),
    }
}

fn sample_points(job: &JobSpec) -> Vec<TangentPoint> {
    job.sample_config().points(job.metric.dim())
}

fn order_exceeded(q: Quantity, available: usize) -> Error {
    Error::OrderExceeded {
        requested: q.order(),
        available,
    }
}

fn evaluate_point(
    m: &MetricModel,
    p: &TangentPoint,
    order: usize,
    quantities: &[Quantity],
    vol: &VolumeForm,
) -> finsler_core::Result<BTreeMap<String, QuantityValue>> {
    if let Some(q) = quantities.iter().find(|q| q.order() > order) {
        return Err(order_exceeded(*q, order));
    }
    let n = m.dim();
    let local = LocalGeometry::new(m, p, order)?;
    let wants = |set: &[Quantity]| quantities.iter().any(|q| set.contains(q));
    let sq = if wants(&[
        Quantity::Xi,
        Quantity::E,
        Quantity::H,
        Quantity::Sigma,
        Quantity::Z,
    ]) {
        Some(SQuantityJets::new(&local, vol)?)
    } else {
        None
    };
    let inv = if wants(&[
        Quantity::D,
        Quantity::W,
        Quantity::WTilde,
        Quantity::WStar,
        Quantity::Z,
    ]) {
        Some(InvariantJets::new(&local, sq.as_ref(), None)?)
    } else {
        None
    };
    let sq_ref = || sq.as_ref().expect("built above");
    let inv_tensor = |q: Quantity| -> finsler_core::Result<TensorValue> {
        let inv = inv.as_ref().expect("built above");
        let t = match q {
            Quantity::D => &inv.douglas,
            Quantity::W => &inv.weyl,
            Quantity::WTilde => &inv.w_tilde,
            Quantity::WStar => &inv.w_star,
            _ => &inv.z,
        };
        t.as_ref()
            .map(|t| t.value())
            .ok_or_else(|| order_exceeded(q, order))
    };
    let mut out = BTreeMap::new();
    for &q in quantities {
        let name = q.label();
        let v = match q {
            Quantity::F => QuantityValue::scalar(name, local.f().value()),
            Quantity::G => QuantityValue::tensor(name, &local.metric_tensor()?.value()),
            Quantity::Spray => {
                let g: Vec<f64> = local.spray()?.iter().map(Jet::value).collect();
                QuantityValue::tensor(name, &TensorValue::new(n, "u", g)?)
            }
            Quantity::S => QuantityValue::scalar(name, s_jet(&local, vol)?.value()),
            Quantity::Xi => QuantityValue::tensor(name, &sq_ref().xi.value()),
            Quantity::E => QuantityValue::tensor(name, &sq_ref().e.value()),
            Quantity::H => QuantityValue::tensor(name, &sq_ref().h()?.value()),
            Quantity::Sigma => QuantityValue::tensor(name, &sq_ref().sigma.value()),
            Quantity::Ric => QuantityValue::scalar(name, local.ric()?.value()),
            Quantity::D | Quantity::W | Quantity::WTilde | Quantity::WStar | Quantity::Z => {
                QuantityValue::tensor(name, &inv_tensor(q)?)
            }
        };
        out.insert(name.to_string(), v);
    }
    Ok(out)
}

fn evaluations(
    job: &JobSpec,
    m: &MetricModel,
    points: &[TangentPoint],
    quantities: &[Quantity],
    vol: &VolumeForm,
    report: &mut RunReport,
) -> Result<(), CliError> {
    let needed = quantities.iter().map(|q| q.order()).max().unwrap_or(1);
    let order = job.order.unwrap_or(needed);
    report.engine.orders.insert("eval".into(), order);
    for (i, p) in points.iter().enumerate() {
        let quantities = evaluate_point(m, p, order, quantities, vol).map_err(CliError::at(i))?;
        report.evaluations.push(PointEvaluation {
            index: i,
            point: p.clone(),
            quantities,
        });
    }
    Ok(())
}

/// Evaluates the requested quantities at the job's points.
pub fn run_eval(job: &JobSpec) -> Result<RunReport, CliError> {
    let m = job.metric.build()?;
    let vol = volume(job, &m)?;
    let mut report = skeleton(job, &m, &vol);
    let quantities = job
        .quantities
        .clone()
        .unwrap_or_else(|| DEFAULT_EVAL.to_vec());
    let points = job.points.clone().unwrap_or_else(|| sample_points(job));
    evaluations(job, &m, &points, &quantities, &vol, &mut report)?;
    report.finish();
    Ok(report)
}

/// Central differences of `F` against the first and second jet derivatives,
/// plus Euler's relation `y^i F_.i = F`.
fn derivative_checks(m: &MetricModel, points: &[TangentPoint]) -> Result<(f64, f64), CliError> {
    let n = m.dim();
    let mut fd_err = MaxResidual::default();
    let mut euler = MaxResidual::default();
    for (pi, p) in points.iter().enumerate() {
        let ctx = JetContext::new(2, p.clone()).map_err(CliError::at(pi))?;
        let f = expand(m.field(), &ctx).map_err(CliError::at(pi))?;
        let eval = |shift: &[(usize, f64)]| -> finsler_core::Result<f64> {
            let (mut x, mut y) = (p.x.clone(), p.y.clone());
            for &(v, h) in shift {
                if v < n {
                    x[v] += h;
                } else {
                    y[v - n] += h;
                }
            }
            m.value(&TangentPoint::new(x, y))
        };
        let (h1, h2) = (1e-5, 1e-4);
        let mut body = || -> finsler_core::Result<()> {
            for a in 0..2 * n {
                let d1 = f.d(a).value();
                let fd = (eval(&[(a, h1)])? - eval(&[(a, -h1)])?) / (2.0 * h1);
                fd_err.update((d1 - fd).abs() / d1.abs().max(1.0));
                for b in 0..2 * n {
                    let d2 = f.d(a).d(b).value();
                    let fd2 = (eval(&[(a, h2), (b, h2)])?
                        - eval(&[(a, h2), (b, -h2)])?
                        - eval(&[(a, -h2), (b, h2)])?
                        + eval(&[(a, -h2), (b, -h2)])?)
                        / (4.0 * h2 * h2);
                    fd_err.update((d2 - fd2).abs() / d2.abs().max(1.0));
                }
            }
            Ok(())
        };
        body().map_err(CliError::at(pi))?;
        let radial: f64 = (0..n).map(|i| p.y[i] * f.d(n + i).value()).sum();
        euler.update((radial - f.value()).abs() / f.value().abs().max(1.0));
    }
    Ok((fd_err.0, euler.0))
}

/// Values whose homogeneity degree in `y` is known, flattened with their
/// degrees.
fn graded_values(
    m: &MetricModel,
    p: &TangentPoint,
    vol: &VolumeForm,
) -> finsler_core::Result<Vec<(f64, i32)>> {
    let local = LocalGeometry::new(m, p, finsler_core::squantities::order::H)?;
    let sq = SQuantityJets::new(&local, vol)?;
    let mut out = vec![(local.f().value(), 1), (sq.s.value(), 1)];
    out.extend(local.spray()?.iter().map(|g| (g.value(), 2)));
    out.extend(sq.xi.value().data.into_iter().map(|v| (v, 1)));
    out.extend(sq.e.value().data.into_iter().map(|v| (v, -1)));
    out.extend(sq.h()?.value().data.into_iter().map(|v| (v, 0)));
    out.extend(sq.sigma.value().data.into_iter().map(|v| (v, 0)));
    Ok(out)
}

fn homogeneity_ladder(
    m: &MetricModel,
    points: &[TangentPoint],
    vol: &VolumeForm,
) -> Result<f64, CliError> {
    let mut worst = MaxResidual::default();
    for (pi, p) in points.iter().enumerate() {
        let base = graded_values(m, p, vol).map_err(CliError::at(pi))?;
        for lambda in LADDER {
            let scaled = graded_values(m, &p.scaled(lambda), vol).map_err(CliError::at(pi))?;
            for ((v, d), (w, _)) in base.iter().zip(&scaled) {
                let expected = v * lambda.powi(*d);
                worst.update((w - expected).abs() / expected.abs().max(1.0));
            }
        }
    }
    Ok(worst.0)
}

#[derive(Default)]
struct PointwiseResiduals {
    spray_dual: MaxResidual,
    s_dual: MaxResidual,
    relations: MaxResidual,
    sigma_volume: MaxResidual,
    horizontal_f: MaxResidual,
    isotropic_s: MaxResidual,
    funk_ricci: MaxResidual,
    funk_xi: MaxResidual,
}

/// Invariance-suite checks over `fields`, each aggregated to its worst
/// residual among the projective fields.
fn invariance_checks(
    job: &JobSpec,
    m: &MetricModel,
    fields: &[NamedField],
    points: &[TangentPoint],
) -> Result<Vec<Check>, CliError> {
    let raw: Vec<PolyVectorField> = fields.iter().map(|f| f.field.clone()).collect();
    let opts = classify_options(job, INVARIANCE_ORDER);
    let results = invariance_suites(&raw, m, points, &opts)?;
    let mut names: Vec<String> = Vec::new();
    let mut measured: BTreeMap<String, (MaxResidual, f64, usize)> = BTreeMap::new();
    let mut skipped: BTreeMap<String, (f64, String)> = BTreeMap::new();
    let mut projective = 0;
    let mut not_projective = Vec::new();
    let mut equivalence = MaxResidual::default();
    let mut violations = Vec::new();
    for (f, r) in fields.iter().zip(results) {
        match r {
            Ok(rep) => {
                projective += 1;
                for c in rep.checks {
                    if !names.contains(&c.name) {
                        names.push(c.name.clone());
                    }
                    match c.residual {
                        Some(r) => {
                            let e = measured.entry(c.name).or_insert((
                                MaxResidual::default(),
                                c.threshold,
                                0,
                            ));
                            e.0.update(r);
                            e.2 += 1;
                        }
                        None => {
                            skipped
                                .entry(c.name)
                                .or_insert((c.threshold, c.note.unwrap_or_default()));
                        }
                    }
                }
            }
            Err(Error::NotProjective { .. }) => not_projective.push(f.name.clone()),
            Err(Error::EquivalenceViolation {
                closedness,
                lie_sigma,
                lie_xi,
            }) => {
                equivalence.update(closedness.max(lie_sigma).max(lie_xi));
                violations.push(f.name.clone());
            }
            Err(e) => return Err(e.into()),
        }
    }
    let mut checks = Vec::new();
    for name in names {
        let label = format!("invariance.{name}");
        checks.push(match measured.get(&name) {
            Some((r, threshold, count)) => Check::measured(label, r.0, *threshold)
                .with_note(format!("{count} of {projective} projective fields")),
            None => {
                let (threshold, reason) = &skipped[&name];
                Check::skipped(label, *threshold, reason.clone())
            }
        });
    }
    if projective == 0 {
        checks.push(Check::skipped(
            "invariance",
            opts.tol,
            format!("none of the {} fields is projective", fields.len()),
        ));
    } else if !not_projective.is_empty() {
        let note = format!(
            "skipped non-projective fields: {}",
            not_projective.join(", ")
        );
        if let Some(last) = checks.last_mut() {
            last.note = Some(match last.note.take() {
                Some(n) => format!("{n}; {note}"),
                None => note,
            });
        }
    }
    if !violations.is_empty() {
        checks.push(
            Check::measured("c_projective_equivalence", equivalence.0, EQUIVALENCE_GUARD)
                .with_note(format!("criteria disagree on {}", violations.join(", "))),
        );
    }
    Ok(checks)
}

fn verification_checks(
    job: &JobSpec,
    m: &MetricModel,
    vol: &VolumeForm,
    report: &mut RunReport,
) -> Result<(), CliError> {
    let n = m.dim();
    let points = sample_points(job);
    let ladder = &points[..points.len().min(LADDER_POINTS)];
    let nf = n as f64;
    let spec = m.randers_spec();
    let mut checks = Vec::new();

    let (fd, euler) = derivative_checks(m, ladder)?;
    checks.push(Check::measured("ad_vs_fd", fd, FD_TOL));
    checks.push(Check::measured("euler_homogeneity", euler, EULER_TOL));
    checks.push(Check::measured(
        "homogeneity_ladder",
        homogeneity_ladder(m, ladder, vol)?,
        HOMOGENEITY_LADDER_TOL,
    ));

    let isotropy = match spec {
        Some(s) => match detect_isotropy(s, &points, ISOTROPY_TOL) {
            Ok(c) => Some(c),
            Err(Error::IsotropyUnknown { .. }) => None,
            Err(e) => return Err(e.into()),
        },
        None => None,
    };
    let funk = job.metric.is_funk();
    let tilted = VolumeForm::Custom(Arc::new(TiltedDensity { n }));
    let mut r = PointwiseResiduals::default();
    for (pi, p) in points.iter().enumerate() {
        let mut body = || -> finsler_core::Result<()> {
            let local = LocalGeometry::new(m, p, finsler_core::squantities::order::RELATIONS)?;
            let f = local.f().value();
            let sq = SQuantityJets::new(&local, vol)?;
            r.relations
                .update(relations_from_jets(&local, &sq)?.worst());
            let sigma = sq.sigma.value();
            for other in [VolumeForm::Coordinate, tilted.clone()] {
                let alt = SQuantityJets::new(&local, &other)?.sigma.value();
                r.sigma_volume.update(sigma.sub(&alt)?.max_abs());
            }
            for k in 0..n {
                r.horizontal_f
                    .update(local.horizontal(local.f(), k)?.value().abs() / f.abs().max(1.0));
            }
            if let Some(s) = spec {
                let generic = spray(m, p)?;
                for (a, b) in generic.iter().zip(spray_randers(s, p)?) {
                    r.spray_dual.update((a - b).abs() / b.abs().max(1.0));
                }
                let s_bh = s_jet(&local, &VolumeForm::BusemannHausdorff)?.value();
                let closed = s_curvature_randers(s, p)?;
                r.s_dual
                    .update((s_bh - closed).abs() / closed.abs().max(1.0));
                if let Some(c) = isotropy {
                    r.isotropic_s
                        .update((s_bh - (nf + 1.0) * c * f).abs() / f.abs().max(1.0));
                }
            }
            if funk {
                let ric = local.ric()?.value();
                let expected = -(nf - 1.0) * f * f / 4.0;
                r.funk_ricci
                    .update((ric - expected).abs() / (f * f).max(1.0));
                r.funk_xi.update(sq.xi.value().max_abs());
            }
            Ok(())
        };
        body().map_err(CliError::at(pi))?;
    }

    let randers_skip = "metric has no Randers split";
    match spec {
        Some(_) => {
            checks.push(Check::measured(
                "spray_dual_path",
                r.spray_dual.0,
                SPRAY_DUAL_TOL,
            ));
            checks.push(Check::measured("s_dual_path", r.s_dual.0, S_DUAL_TOL));
        }
        None => {
            checks.push(Check::skipped(
                "spray_dual_path",
                SPRAY_DUAL_TOL,
                randers_skip,
            ));
            checks.push(Check::skipped("s_dual_path", S_DUAL_TOL, randers_skip));
        }
    }
    checks.push(Check::measured("relations", r.relations.0, RELATION_TOL));
    checks.push(Check::measured(
        "sigma_volume_independence",
        r.sigma_volume.0,
        SIGMA_VOLUME_TOL,
    ));
    checks.push(Check::measured(
        "horizontal_F",
        r.horizontal_f.0,
        HORIZONTAL_F_TOL,
    ));
    checks.push(match (spec, isotropy) {
        (Some(_), Some(c)) => Check::measured("isotropic_S", r.isotropic_s.0, ISOTROPY_TOL)
            .with_note(format!("c = {c}")),
        (Some(_), None) => Check::skipped(
            "isotropic_S",
            ISOTROPY_TOL,
            "S-curvature is not isotropic on the samples",
        ),
        (None, _) => Check::skipped("isotropic_S", ISOTROPY_TOL, randers_skip),
    });
    if funk {
        let c = isotropy.unwrap_or(f64::NAN);
        let signs = match &job.metric {
            crate::job::MetricSpec::Funk { signs, .. } => *signs,
            _ => unreachable!("funk checked above"),
        };
        checks.push(
            Check::measured("funk_c", (c.abs() - 0.5).abs(), FUNK_S_TOL)
                .with_note(format!("c = {c} for signs {signs:?}")),
        );
        checks.push(Check::measured(
            "funk_ricci",
            r.funk_ricci.0,
            FUNK_RICCI_TOL,
        ));
        checks.push(Check::measured("funk_xi", r.funk_xi.0, FUNK_XI_TOL));
    }

    let fields = if job.fields.is_empty() {
        crate::job::FieldSpec::Family {
            name: crate::job::FamilyName::FlatProjective,
        }
        .expand(&job.metric, 0)?
    } else {
        job.fields()?
    };
    if points.len() < 10 {
        checks.push(Check::skipped(
            "invariance",
            PROJECTIVE_TOL,
            format!("needs at least 10 sample points, have {}", points.len()),
        ));
    } else {
        checks.extend(invariance_checks(job, m, &fields, &points)?);
        report.engine.orders.insert(
            "invariance".into(),
            classify_options(job, INVARIANCE_ORDER).order,
        );
    }

    let t = &mut report.engine.tolerances;
    t.insert("projective".into(), job.tolerance.unwrap_or(PROJECTIVE_TOL));
    t.insert("equivalence_guard".into(), EQUIVALENCE_GUARD);
    report
        .engine
        .orders
        .insert("verify".into(), finsler_core::squantities::order::RELATIONS);
    report
        .engine
        .orders
        .insert("derivatives".into(), geo_order::METRIC);
    report.checks.extend(checks);
    Ok(())
}

/// Runs the verification suites on the job's metric.
pub fn run_verify(job: &JobSpec) -> Result<RunReport, CliError> {
    let m = job.metric.build()?;
    let vol = volume(job, &m)?;
    let mut report = skeleton(job, &m, &vol);
    verification_checks(job, &m, &vol, &mut report)?;
    report.finish();
    Ok(report)
}

fn classification(job: &JobSpec, m: &MetricModel, report: &mut RunReport) -> Result<(), CliError> {
    let fields = job.fields()?;
    let raw: Vec<PolyVectorField> = fields.iter().map(|f| f.field.clone()).collect();
    let points = sample_points(job);
    let opts = classify_options(job, CLASSIFY_ORDER);
    report.engine.orders.insert("classify".into(), opts.order);
    report
        .engine
        .tolerances
        .insert("projective".into(), opts.tol);
    report
        .engine
        .tolerances
        .insert("equivalence_guard".into(), opts.guard);
    let per_field: Vec<finsler_core::Result<_>> = match classify(&raw, m, &points, &opts) {
        Ok(reports) => reports.into_iter().map(Ok).collect(),
        // attribute the violation to the fields that cause it
        Err(Error::EquivalenceViolation { .. }) => raw
            .iter()
            .map(|f| classify(std::slice::from_ref(f), m, &points, &opts).map(|mut v| v.remove(0)))
            .collect(),
        Err(e) => return Err(e.into()),
    };
    for (f, r) in fields.iter().zip(per_field) {
        match r {
            Ok(rep) => report.classification.push(FieldClassification {
                name: f.name.clone(),
                report: Some(rep),
                error: None,
            }),
            Err(Error::EquivalenceViolation {
                closedness,
                lie_sigma,
                lie_xi,
            }) => {
                let e = Error::EquivalenceViolation {
                    closedness,
                    lie_sigma,
                    lie_xi,
                };
                report.checks.push(
                    Check::measured(
                        format!("c_projective_equivalence.{}", f.name),
                        closedness.max(lie_sigma).max(lie_xi),
                        opts.guard,
                    )
                    .with_note(e.to_string()),
                );
                report.classification.push(FieldClassification {
                    name: f.name.clone(),
                    report: None,
                    error: Some(e.to_string()),
                });
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

/// Classifies the job's fields on its metric.
pub fn run_classify(job: &JobSpec) -> Result<RunReport, CliError> {
    let m = job.metric.build()?;
    let vol = volume(job, &m)?;
    let mut report = skeleton(job, &m, &vol);
    classification(job, &m, &mut report)?;
    report.finish();
    Ok(report)
}

fn scan(job: &JobSpec, m: &MetricModel, report: &mut RunReport) -> Result<(), CliError> {
    let extra: Vec<PolyVectorField> = job.fields()?.into_iter().map(|f| f.field).collect();
    let opts = DimScanOptions {
        samples: job.sample_config(),
        nullity_tol: job.tolerance.unwrap_or(NULLITY_REL_TOL),
    };
    report
        .engine
        .orders
        .insert("dim_scan".into(), DIM_SCAN_ORDER);
    report
        .engine
        .tolerances
        .insert("nullity_rel".into(), opts.nullity_tol);
    match dim_scan(m, &extra, &opts) {
        Ok(r) => {
            report.checks.push(
                Check::measured("dim_scan_stability", 0.0, 1.0).with_note(format!(
                    "nullity {} of {} fields, history {:?}",
                    r.nullity, r.columns, r.history
                )),
            );
            report.dim_scan = Some(r);
        }
        Err(Error::RankDeficientSampling { history }) => {
            let k = history.len();
            let jump = if k >= 2 {
                history[k - 1].abs_diff(history[k - 2])
            } else {
                0
            };
            report.checks.push(
                Check::measured("dim_scan_stability", jump as f64, 1.0)
                    .with_note(format!("nullity did not stabilise: {history:?}")),
            );
        }
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

/// Nullity of the C-projective constraint matrix over the flat projective
/// family plus the job's fields.
pub fn run_dim_scan(job: &JobSpec) -> Result<RunReport, CliError> {
    let m = job.metric.build()?;
    let vol = volume(job, &m)?;
    let mut report = skeleton(job, &m, &vol);
    scan(job, &m, &mut report)?;
    report.finish();
    Ok(report)
}

/// Evaluation at the first sample points, the verification suites, the
/// classification of any fields and the dimension scan, in one report.
pub fn run_report(job: &JobSpec) -> Result<RunReport, CliError> {
    let m = job.metric.build()?;
    let vol = volume(job, &m)?;
    let mut report = skeleton(job, &m, &vol);
    let quantities = job
        .quantities
        .clone()
        .unwrap_or_else(|| REPORT_EVAL.to_vec());
    let points = match &job.points {
        Some(p) => p.clone(),
        None => sample_points(job)
            .into_iter()
            .take(REPORT_EVAL_POINTS)
            .collect(),
    };
    evaluations(job, &m, &points, &quantities, &vol, &mut report)?;
    verification_checks(job, &m, &vol, &mut report)?;
    if !job.fields.is_empty() {
        classification(job, &m, &mut report)?;
    }
    if m.dim() >= 2 {
        scan(job, &m, &mut report)?;
    }
    report.finish();
    Ok(report)
}

/// True when no check failed.
pub fn all_pass(report: &RunReport) -> bool {
    report.checks.iter().all(|c| c.status != Status::Fail)
}
