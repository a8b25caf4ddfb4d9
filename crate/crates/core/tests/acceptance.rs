//! Acceptance suite: one pass/fail line per criterion, with the measured
//! worst residual next to its pinned threshold. Exits non-zero if any
//! criterion fails.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use finsler_core::deriv::{expand, JetContext, TangentPoint};
use finsler_core::geometry::{ricci, spray, MetricModel};
use finsler_core::library::{
    euclidean, flat_projective_basis, funk, minkowski_randers, random_randers, space_form,
    FunkSpec, SpaceFormSpec, TiltedDensity,
};
use finsler_core::projective::{
    classify, dim_scan, invariance_suites, invariant_tensors, ClassifyOptions, DimScanOptions,
};
use finsler_core::randers::{
    detect_isotropy, s_curvature, s_curvature_randers, spray_randers, VolumeForm,
};
use finsler_core::sample::{sample_points, SampleConfig};
use finsler_core::squantities::{relations_check, sigma_tensor, xi};
use finsler_core::Error;

const SEED: u64 = 20240611;
const RADIUS: f64 = 0.7;

const FUNK_S_TOL: f64 = 1e-8;
const XI_FUNK_TOL: f64 = 1e-7;
const XI_PERTURBED_MIN: f64 = 1e-3;
const RICCI_TOL: f64 = 1e-6;
const RELATION_TOL: f64 = 1e-7;
const C_PROJECTIVE_TOL: f64 = 1e-6;
const INVARIANCE_TOL: f64 = 1e-6;
const FLAT_TENSOR_TOL: f64 = 1e-7;
const FACTOR_IDENTITY_TOL: f64 = 1e-5;
const SPRAY_DUAL_TOL: f64 = 1e-8;
const S_DUAL_TOL: f64 = 1e-7;
const SIGMA_VOLUME_TOL: f64 = 1e-7;
const FD_TOL: f64 = 1e-5;
const EULER_TOL: f64 = 1e-10;

struct Outcome {
    pass: bool,
    summary: String,
}

impl Outcome {
    fn below(what: &str, worst: f64, tol: f64) -> Outcome {
        Outcome {
            pass: worst < tol,
            summary: format!("{what}: max {worst:.3e} < {tol:.0e}"),
        }
    }

    fn and(self, other: Outcome) -> Outcome {
        Outcome {
            pass: self.pass && other.pass,
            summary: format!("{}; {}", self.summary, other.summary),
        }
    }

    fn error(e: Error) -> Outcome {
        Outcome {
            pass: false,
            summary: format!("error: {e}"),
        }
    }
}

type Criterion<'a> = Box<dyn Fn() -> finsler_core::Result<Outcome> + 'a>;

fn points(n: usize, count: usize) -> Vec<TangentPoint> {
    sample_points(n, count, SEED, RADIUS)
}

fn funk_variants(n: usize) -> Vec<MetricModel> {
    let mut shifted = vec![0.0; n];
    shifted[0] = 0.5;
    let mut out = Vec::new();
    for a in [vec![0.0; n], shifted] {
        for signs in [(1, 1), (-1, -1)] {
            out.push(
                funk(FunkSpec::new(n, a.clone()).with_signs(signs.0, signs.1))
                    .expect("valid Funk spec"),
            );
        }
    }
    out
}

fn randers_builtins() -> Vec<MetricModel> {
    let mut out = Vec::new();
    for n in [2, 3] {
        let mut b = vec![0.0; n];
        b[0] = 0.3;
        b[n - 1] -= 0.2;
        out.push(minkowski_randers(n, b).expect("valid b"));
        out.extend(funk_variants(n));
        for seed in 0..5 {
            out.push(random_randers(n, 100 + seed, 0.05).expect("valid amplitude"));
        }
    }
    out
}

fn funk_s_constancy() -> finsler_core::Result<Outcome> {
    let mut worst: f64 = 0.0;
    for n in [2, 3] {
        for m in funk_variants(n) {
            for p in points(n, 100) {
                let s = s_curvature(&m, &p, &VolumeForm::BusemannHausdorff)?;
                let f = m.value(&p)?;
                worst = worst.max(((s / ((n as f64 + 1.0) * f)).abs() - 0.5).abs());
            }
        }
    }
    Ok(Outcome::below(
        "| |S/((n+1)F)| - 1/2 | on Funk, n=2,3, both sign pairs",
        worst,
        FUNK_S_TOL,
    ))
}

fn max_xi(m: &MetricModel, pts: &[TangentPoint]) -> finsler_core::Result<f64> {
    let mut worst: f64 = 0.0;
    for p in pts {
        let v = xi(m, p, &VolumeForm::BusemannHausdorff)?;
        worst = worst.max(v.iter().map(|c| c * c).sum::<f64>().sqrt());
    }
    Ok(worst)
}

fn xi_vanishing() -> finsler_core::Result<Outcome> {
    let mut worst: f64 = 0.0;
    for n in [2, 3] {
        for m in funk_variants(n) {
            worst = worst.max(max_xi(&m, &points(n, 50))?);
        }
    }
    let forward = Outcome::below("|Xi| on Funk", worst, XI_FUNK_TOL);
    let perturbed = random_randers(2, 7, 0.05)?;
    let pts = points(2, 50);
    let isotropic = detect_isotropy(perturbed.randers_spec().expect("Randers"), &pts, 1e-8).is_ok();
    let largest = max_xi(&perturbed, &pts)?;
    let contra = Outcome {
        pass: !isotropic && largest > XI_PERTURBED_MIN,
        summary: format!(
            "perturbed Randers: e00 isotropic = {isotropic}, max |Xi| {largest:.3e} > {XI_PERTURBED_MIN:.0e}"
        ),
    };
    Ok(forward.and(contra))
}

fn funk_ricci() -> finsler_core::Result<Outcome> {
    let mut worst: f64 = 0.0;
    for n in [2, 3] {
        for m in funk_variants(n) {
            for p in points(n, 50) {
                let f = m.value(&p)?;
                let (ric, _, _) = ricci(&m, &p)?;
                worst = worst.max((ric + (n as f64 - 1.0) * f * f / 4.0).abs() / (f * f));
            }
        }
    }
    Ok(Outcome::below(
        "|Ric + (n-1)F^2/4| / F^2 on Funk",
        worst,
        RICCI_TOL,
    ))
}

fn identity_suite() -> finsler_core::Result<Outcome> {
    let mut worst: f64 = 0.0;
    for n in [2, 3] {
        let mut b = vec![0.0; n];
        b[0] = 0.4;
        let mut models = vec![
            (euclidean(n), VolumeForm::Coordinate),
            (minkowski_randers(n, b)?, VolumeForm::BusemannHausdorff),
        ];
        for m in funk_variants(n) {
            models.push((m, VolumeForm::BusemannHausdorff));
        }
        for seed in 0..5 {
            models.push((
                random_randers(n, 200 + seed, 0.05)?,
                VolumeForm::BusemannHausdorff,
            ));
        }
        for (m, vol) in &models {
            for p in points(n, 25) {
                worst = worst.max(relations_check(m, &p, vol)?.worst());
            }
        }
    }
    Ok(Outcome::below(
        "Xi/H/Sigma identities on 9 metrics per dimension",
        worst,
        RELATION_TOL,
    ))
}

fn c_projective_equivalence() -> finsler_core::Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut agree = true;
    let mut fields = 0;
    for n in [2, 3] {
        let mut a = vec![0.0; n];
        a[0] = 0.5;
        let m = funk(FunkSpec::new(n, a))?;
        let basis = flat_projective_basis(n);
        fields += basis.len();
        let reports = classify(&basis, &m, &points(n, 25), &ClassifyOptions::default())?;
        for r in reports {
            for key in ["closeness", "lie_sigma", "lie_xi"] {
                worst = worst.max(r.residuals[key]);
            }
            agree &= r.flags.projective && r.flags.c_projective;
        }
    }
    Ok(Outcome::below(
        &format!("C-projective criteria over {fields} Funk basis fields"),
        worst,
        C_PROJECTIVE_TOL,
    )
    .and(Outcome {
        pass: agree,
        summary: format!("verdicts agree = {agree}, no equivalence violation"),
    }))
}

fn dimension_count() -> finsler_core::Result<Outcome> {
    let opts = DimScanOptions {
        samples: SampleConfig {
            count: 25,
            seed: SEED,
            radius: RADIUS,
        },
        ..DimScanOptions::default()
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [2, 3] {
        let full = n * (n + 2);
        let mut a = vec![0.0; n];
        a[0] = 0.5;
        let mut b = vec![0.0; n];
        b[n - 1] = 0.3;
        let funk_nullity = dim_scan(&funk(FunkSpec::new(n, a))?, &[], &opts)?.nullity;
        let mink_nullity = dim_scan(&minkowski_randers(n, b)?, &[], &opts)?.nullity;
        let perturbed = dim_scan(&random_randers(n, 11, 0.05)?, &[], &opts)?.nullity;
        pass &= funk_nullity == full && mink_nullity == full && perturbed < full;
        parts.push(format!(
            "n={n}: Funk {funk_nullity}, Minkowski-Randers {mink_nullity} (want {full}), perturbed {perturbed} (< {full})"
        ));
    }
    Ok(Outcome {
        pass,
        summary: format!("nullity {}", parts.join("; ")),
    })
}

fn check_worst(
    reports: &[finsler_core::Result<finsler_core::projective::InvarianceReport>],
    names: &[&str],
) -> finsler_core::Result<f64> {
    let mut worst: f64 = 0.0;
    for r in reports {
        let r = r.as_ref().map_err(Clone::clone)?;
        for name in names {
            let c = r.check(name).expect("suite reports every check");
            // A skipped check would hide a failure here.
            worst = worst.max(c.residual.unwrap_or(f64::INFINITY));
        }
    }
    Ok(worst)
}

fn projective_invariants(
    funk3: &[finsler_core::Result<finsler_core::projective::InvarianceReport>],
) -> finsler_core::Result<Outcome> {
    let lie = check_worst(funk3, &["lie_W", "lie_alpha_s", "lie_Z"])?;
    let m = funk(FunkSpec::new(3, vec![0.5, 0.0, 0.0]))?;
    let mut flat: f64 = 0.0;
    for p in points(3, 25) {
        let t = invariant_tensors(&m, &p)?;
        flat = flat.max(t.douglas.max_abs()).max(t.weyl.max_abs());
    }
    Ok(Outcome::below(
        "L W, L(alpha s), L Z over the Funk basis, n=3",
        lie,
        INVARIANCE_TOL,
    )
    .and(Outcome::below("|D|, |W| on Funk", flat, FLAT_TENSOR_TOL)))
}

fn factor_identities(
    funk3: &[finsler_core::Result<finsler_core::projective::InvarianceReport>],
) -> finsler_core::Result<Outcome> {
    let names = ["lie_spray_derivative", "lie_ricci", "lie_ricci_skew"];
    let mut worst = check_worst(funk3, &names)?;
    for n in [2, 3] {
        let basis = flat_projective_basis(n);
        let pts = points(n, 25);
        let flat = invariance_suites(&basis, &euclidean(n), &pts, &ClassifyOptions::default())?;
        worst = worst.max(check_worst(&flat, &names)?);
        if n == 2 {
            let m = funk(FunkSpec::new(2, vec![0.5, 0.0]))?;
            let reports = invariance_suites(&basis, &m, &pts, &ClassifyOptions::default())?;
            worst = worst.max(check_worst(&reports, &names)?);
        }
    }
    Ok(Outcome::below(
        "lie_spray_derivative, lie_ricci, lie_ricci_skew on Euclidean and Funk",
        worst,
        FACTOR_IDENTITY_TOL,
    ))
}

fn dual_paths() -> finsler_core::Result<Outcome> {
    let (mut spray_gap, mut s_gap, mut sigma_gap): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for m in randers_builtins() {
        let n = m.dim();
        let spec = m.randers_spec().expect("Randers built-in");
        let tilted = VolumeForm::Custom(Arc::new(TiltedDensity { n }));
        for p in points(n, 25) {
            let generic = spray(&m, &p)?;
            let closed = spray_randers(spec, &p)?;
            for (a, b) in generic.iter().zip(&closed) {
                spray_gap = spray_gap.max((a - b).abs());
            }
            let s_generic = s_curvature(&m, &p, &VolumeForm::BusemannHausdorff)?;
            s_gap = s_gap.max((s_generic - s_curvature_randers(spec, &p)?).abs());
            let bh = sigma_tensor(&m, &p, &VolumeForm::BusemannHausdorff)?;
            for vol in [VolumeForm::Coordinate, tilted.clone()] {
                sigma_gap = sigma_gap.max(bh.sub(&sigma_tensor(&m, &p, &vol)?)?.max_abs());
            }
        }
    }
    Ok(
        Outcome::below("spray generic vs closed form", spray_gap, SPRAY_DUAL_TOL)
            .and(Outcome::below(
                "S generic (BH) vs closed form",
                s_gap,
                S_DUAL_TOL,
            ))
            .and(Outcome::below(
                "Sigma across three volume forms",
                sigma_gap,
                SIGMA_VOLUME_TOL,
            )),
    )
}

fn all_builtins() -> finsler_core::Result<Vec<MetricModel>> {
    let mut out = randers_builtins();
    for n in [2, 3] {
        out.push(euclidean(n));
        out.push(space_form(SpaceFormSpec { n, k: -1.0 })?);
    }
    Ok(out)
}

fn derivative_engine() -> finsler_core::Result<Outcome> {
    let (mut fd_err, mut asym, mut euler): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for m in all_builtins()? {
        let n = m.dim();
        for p in points(n, 10) {
            let ctx = JetContext::new(2, p.clone())?;
            let f = expand(m.field(), &ctx)?;
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
            for a in 0..2 * n {
                let d1 = f.d(a).value();
                let fd = (eval(&[(a, h1)])? - eval(&[(a, -h1)])?) / (2.0 * h1);
                fd_err = fd_err.max((d1 - fd).abs() / d1.abs().max(1.0));
                for b in 0..2 * n {
                    let d2 = f.d(a).d(b).value();
                    asym = asym.max((d2 - f.d(b).d(a).value()).abs());
                    let fd2 = (eval(&[(a, h2), (b, h2)])?
                        - eval(&[(a, h2), (b, -h2)])?
                        - eval(&[(a, -h2), (b, h2)])?
                        + eval(&[(a, -h2), (b, -h2)])?)
                        / (4.0 * h2 * h2);
                    fd_err = fd_err.max((d2 - fd2).abs() / d2.abs().max(1.0));
                }
            }
            let radial: f64 = (0..n).map(|i| p.y[i] * f.d(n + i).value()).sum();
            euler = euler.max((radial - f.value()).abs() / f.value().abs().max(1.0));
        }
    }
    Ok(
        Outcome::below("AD vs central differences, orders 1-2", fd_err, FD_TOL)
            .and(Outcome {
                pass: asym == 0.0,
                summary: format!("mixed-partial asymmetry {asym:e} (exact)"),
            })
            .and(Outcome::below("Euler homogeneity", euler, EULER_TOL)),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let funk3 = invariance_suites(
        &flat_projective_basis(3),
        &funk(FunkSpec::new(3, vec![0.5, 0.0, 0.0])).expect("valid Funk spec"),
        &points(3, 25),
        &ClassifyOptions::default(),
    );
    let funk3 = match funk3 {
        Ok(r) => r,
        Err(e) => vec![Err(e)],
    };
    let criteria: Vec<(&str, Criterion<'_>)> = vec![
        ("Funk S-constancy", Box::new(funk_s_constancy)),
        (
            "Xi vanishes on Funk, not on a perturbation",
            Box::new(xi_vanishing),
        ),
        ("Funk Ricci constant", Box::new(funk_ricci)),
        ("S-quantity identities", Box::new(identity_suite)),
        (
            "C-projective equivalence",
            Box::new(c_projective_equivalence),
        ),
        ("dimension count", Box::new(dimension_count)),
        (
            "projective invariants",
            Box::new(|| projective_invariants(&funk3)),
        ),
        (
            "projective factor identities",
            Box::new(|| factor_identities(&funk3)),
        ),
        ("dual-path consistency", Box::new(dual_paths)),
        ("derivative engine soundness", Box::new(derivative_engine)),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = run().unwrap_or_else(Outcome::error);
        if !outcome.pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {} ({:.1}s)",
            i + 1,
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.summary,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {}/{} criteria passed in {:.1}s",
        criteria.len() - failures,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
