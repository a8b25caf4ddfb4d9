//! Built-in metrics and vector-field families.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::deriv::{Jet, ScalarField};
use crate::error::{Error, Result};
use crate::geometry::MetricModel;
use crate::polynomial::Polynomial;
use crate::projective::PolyVectorField;
use crate::randers::{
    contract, CovectorField, MatrixField, OneFormSpec, RandersSpec, RiemannianSpec,
};

fn sq_norm(v: &[Jet]) -> Jet {
    contract(v, v)
}

fn sq_norm_f64(v: &[f64]) -> f64 {
    v.iter().map(|t| t * t).sum()
}

/// A constant matrix field.
pub struct ConstantMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl ConstantMatrix {
    pub fn identity(n: usize) -> ConstantMatrix {
        let entries = (0..n * n)
            .map(|o| if o / n == o % n { 1.0 } else { 0.0 })
            .collect();
        ConstantMatrix { n, entries }
    }
}

impl MatrixField for ConstantMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        Ok(self
            .entries
            .iter()
            .map(|&v| x[0].constant_like(v))
            .collect())
    }
}

/// A constant covector field.
pub struct ConstantCovector(pub Vec<f64>);

impl CovectorField for ConstantCovector {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn eval(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        Ok(self.0.iter().map(|&v| x[0].constant_like(v)).collect())
    }
}

/// The projective (Klein) ball model of curvature -1:
/// `a_ij = ((1 - |x|^2) delta_ij + x_i x_j) / (1 - |x|^2)^2`.
pub struct KleinMatrix {
    n: usize,
}

impl MatrixField for KleinMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let n = self.n;
        let w = x[0].constant_like(1.0) - sq_norm(x);
        let inv_w2 = (&w * &w).recip()?;
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut num = &x[i] * &x[j];
                if i == j {
                    num += &w;
                }
                out.push(num * &inv_w2);
            }
        }
        Ok(out)
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        sq_norm_f64(x) < 1.0
    }
}

/// Matrix field with polynomial entries, symmetrized on evaluation.
pub struct PolyMatrix {
    n: usize,
    entries: Vec<Polynomial>,
}

impl PolyMatrix {
    pub fn new(n: usize, entries: Vec<Polynomial>) -> Result<PolyMatrix> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: entries.len(),
            });
        }
        for p in &entries {
            p.validate(n)?;
        }
        Ok(PolyMatrix { n, entries })
    }
}

impl MatrixField for PolyMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let n = self.n;
        let raw: Vec<Jet> = self.entries.iter().map(|p| p.eval(x)).collect();
        Ok((0..n * n)
            .map(|o| {
                let (i, j) = (o / n, o % n);
                (&raw[i * n + j] + &raw[j * n + i]) * 0.5
            })
            .collect())
    }
}

/// Covector field with polynomial entries.
pub struct PolyCovector {
    entries: Vec<Polynomial>,
}

impl PolyCovector {
    pub fn new(n: usize, entries: Vec<Polynomial>) -> Result<PolyCovector> {
        if entries.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: entries.len(),
            });
        }
        for p in &entries {
            p.validate(n)?;
        }
        Ok(PolyCovector { entries })
    }
}

impl CovectorField for PolyCovector {
    fn dim(&self) -> usize {
        self.entries.len()
    }

    fn eval(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        Ok(self.entries.iter().map(|p| p.eval(x)).collect())
    }
}

fn riemannian_model(name: String, alpha: RiemannianSpec) -> MetricModel {
    let n = alpha.dim();
    let beta = OneFormSpec::new(Arc::new(ConstantCovector(vec![0.0; n])));
    let f: Arc<dyn ScalarField> = Arc::new(alpha.norm());
    MetricModel::riemannian(name, f, RandersSpec { alpha, beta })
}

/// `F = |y|`.
pub fn euclidean(n: usize) -> MetricModel {
    riemannian_model(
        format!("euclidean(n={n})"),
        RiemannianSpec::new(Arc::new(ConstantMatrix::identity(n))),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceFormSpec {
    pub n: usize,
    pub k: f64,
}

/// The Riemannian metric of a space form: Euclidean for `k = 0`, the Klein
/// ball for `k = -1`.
pub fn klein(spec: SpaceFormSpec) -> Result<RiemannianSpec> {
    if spec.n == 0 {
        return Err(Error::InvalidSpec("dimension must be positive".into()));
    }
    if spec.k == 0.0 {
        Ok(RiemannianSpec::new(Arc::new(ConstantMatrix::identity(
            spec.n,
        ))))
    } else if spec.k == -1.0 {
        Ok(RiemannianSpec::new(Arc::new(KleinMatrix { n: spec.n })))
    } else {
        Err(Error::UnsupportedCurvature(spec.k))
    }
}

/// [`klein`] wrapped as a Riemannian metric model.
pub fn space_form(spec: SpaceFormSpec) -> Result<MetricModel> {
    let alpha = klein(spec)?;
    let name = if spec.k == 0.0 {
        format!("euclidean(n={})", spec.n)
    } else {
        format!("klein(n={})", spec.n)
    };
    Ok(riemannian_model(name, alpha))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunkSpec {
    pub n: usize,
    pub sign1: i8,
    pub sign2: i8,
    pub a: Vec<f64>,
}

impl FunkSpec {
    /// Both signs plus.
    pub fn new(n: usize, a: Vec<f64>) -> FunkSpec {
        FunkSpec {
            n,
            sign1: 1,
            sign2: 1,
            a,
        }
    }

    pub fn with_signs(mut self, sign1: i8, sign2: i8) -> FunkSpec {
        self.sign1 = sign1;
        self.sign2 = sign2;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidSpec("dimension must be positive".into()));
        }
        if self.a.len() != self.n {
            return Err(Error::InvalidSpec(format!(
                "vector a has {} entries, expected {}",
                self.a.len(),
                self.n
            )));
        }
        if !(sq_norm_f64(&self.a) < 1.0) {
            return Err(Error::InvalidSpec("|a| must be below 1".into()));
        }
        for s in [self.sign1, self.sign2] {
            if s != 1 && s != -1 {
                return Err(Error::InvalidSpec(format!("sign {s} must be +1 or -1")));
            }
        }
        Ok(())
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        let ax: f64 = self.a.iter().zip(x).map(|(a, x)| a * x).sum();
        sq_norm_f64(x) < 1.0 && 1.0 + ax > 0.0
    }
}

/// The closed formula of the generalized Funk metric.
struct FunkField(FunkSpec);

impl ScalarField for FunkField {
    fn dim(&self) -> usize {
        self.0.n
    }

    fn eval(&self, coords: &[Jet]) -> Result<Jet> {
        let spec = &self.0;
        let n = spec.n;
        let (x, y) = coords.split_at(n);
        let x2 = sq_norm(x);
        let y2 = sq_norm(y);
        let xy = contract(x, y);
        let w = x2.constant_like(1.0) - &x2;
        let inv_w = w.recip()?;
        let radicand = &y2 - (&x2 * &y2 - &xy * &xy);
        let a: Vec<Jet> = spec.a.iter().map(|&v| x[0].constant_like(v)).collect();
        let ay = contract(&a, y);
        let ax = contract(&a, x) + 1.0;
        let alpha = radicand.sqrt()? * &inv_w;
        let linear = &xy * &inv_w * f64::from(spec.sign1);
        let exact = ay.div(&ax)? * f64::from(spec.sign2);
        Ok(alpha + linear + exact)
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        self.0.in_domain(x)
    }
}

/// `b = sign1 x / (1 - |x|^2) + sign2 a / (1 + <a, x>)`.
struct FunkOneForm(FunkSpec);

impl CovectorField for FunkOneForm {
    fn dim(&self) -> usize {
        self.0.n
    }

    fn eval(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let spec = &self.0;
        let w = x[0].constant_like(1.0) - sq_norm(x);
        let inv_w = w.recip()? * f64::from(spec.sign1);
        let a: Vec<Jet> = spec.a.iter().map(|&v| x[0].constant_like(v)).collect();
        let inv_ax = (contract(&a, x) + 1.0).recip()? * f64::from(spec.sign2);
        Ok((0..spec.n)
            .map(|i| &x[i] * &inv_w + &inv_ax * spec.a[i])
            .collect())
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        self.0.in_domain(x)
    }
}

/// The generalized Funk metric on the unit ball, evaluated through its
/// closed formula and carrying its Randers split.
pub fn funk(spec: FunkSpec) -> Result<MetricModel> {
    spec.validate()?;
    let alpha = klein(SpaceFormSpec { n: spec.n, k: -1.0 })?;
    let beta = OneFormSpec::new(Arc::new(FunkOneForm(spec.clone())));
    let name = format!(
        "funk(n={}, signs=({:+},{:+}), a={:?})",
        spec.n, spec.sign1, spec.sign2, spec.a
    );
    let f: Arc<dyn ScalarField> = Arc::new(FunkField(spec));
    Ok(MetricModel::randers(name, f, RandersSpec { alpha, beta }))
}

/// The Randers split of [`funk`], for callers that want `alpha + beta` assembled.
pub fn funk_split(spec: FunkSpec) -> Result<RandersSpec> {
    spec.validate()?;
    let alpha = klein(SpaceFormSpec { n: spec.n, k: -1.0 })?;
    let beta = OneFormSpec::new(Arc::new(FunkOneForm(spec)));
    Ok(RandersSpec { alpha, beta })
}

/// `F = |y| + <b, y>` with constant `b`.
pub fn minkowski_randers(n: usize, b: Vec<f64>) -> Result<MetricModel> {
    if b.len() != n {
        return Err(Error::InvalidSpec(format!(
            "b has {} entries, expected {n}",
            b.len()
        )));
    }
    if !(sq_norm_f64(&b) < 1.0) {
        return Err(Error::InvalidSpec("|b| must be below 1".into()));
    }
    let name = format!("minkowski_randers(n={n}, b={b:?})");
    let alpha = RiemannianSpec::new(Arc::new(ConstantMatrix::identity(n)));
    let beta = OneFormSpec::new(Arc::new(ConstantCovector(b)));
    Ok(RandersSpec { alpha, beta }.into_model(name))
}

/// A Randers metric with polynomial `a_ij(x)` (row-major) and `b_i(x)`.
pub fn polynomial_randers(
    name: impl Into<String>,
    n: usize,
    a: Vec<Polynomial>,
    b: Vec<Polynomial>,
) -> Result<MetricModel> {
    let alpha = RiemannianSpec::new(Arc::new(PolyMatrix::new(n, a)?));
    let beta = OneFormSpec::new(Arc::new(PolyCovector::new(n, b)?));
    Ok(RandersSpec { alpha, beta }.into_model(name))
}

fn random_polynomial(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Polynomial {
    let mut p = Polynomial::zero();
    for i in 0..n {
        let mut e = vec![0; n];
        e[i] = 1;
        p = p.plus(scale * rng.random_range(-1.0..1.0), e);
        for j in i..n {
            let mut e = vec![0; n];
            e[i] += 1;
            e[j] += 1;
            p = p.plus(scale * rng.random_range(-1.0..1.0), e);
        }
    }
    p
}

/// A seeded Randers metric with polynomial perturbations of degree two in
/// both `a` and `b`. `amplitude` scales the perturbations; values up to about
/// `0.05` keep `a` positive definite and `|b| < 1` on `|x| <= 0.7` for `n <= 3`.
pub fn random_randers(n: usize, seed: u64, amplitude: f64) -> Result<MetricModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let base = if i == j { 1.0 } else { 0.0 };
            let p = random_polynomial(&mut rng, n, amplitude);
            let mut entry = Polynomial::constant(base);
            entry.terms.extend(p.terms);
            a.push(entry);
        }
    }
    let b = (0..n)
        .map(|_| {
            let mut entry =
                Polynomial::constant(0.3 / (n as f64).sqrt() * rng.random_range(-1.0..1.0));
            entry
                .terms
                .extend(random_polynomial(&mut rng, n, 4.0 * amplitude).terms);
            entry
        })
        .collect();
    polynomial_randers(
        format!("random_randers(n={n}, seed={seed}, amplitude={amplitude})"),
        n,
        a,
        b,
    )
}

/// `sigma(x) = 1 + 0.1 x^1`, a fixed non-constant density.
pub struct TiltedDensity {
    pub n: usize,
}

impl ScalarField for TiltedDensity {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, coords: &[Jet]) -> Result<Jet> {
        Ok(&coords[0] * 0.1 + 1.0)
    }
}

/// Killing fields `V = Qx + C + k<x, C>x` of a space form: one rotation per
/// pair `i < j`, then one translation-type field per coordinate direction.
pub fn killing_basis(spec: SpaceFormSpec) -> Vec<PolyVectorField> {
    let n = spec.n;
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let mut f = PolyVectorField::zero(n);
            f.a[j * n + i] = 1.0;
            f.a[i * n + j] = -1.0;
            out.push(f);
        }
    }
    for i in 0..n {
        let mut c = vec![0.0; n];
        c[i] = 1.0;
        let mut f = PolyVectorField::radial_quadratic(n, &c, spec.k);
        f.b[i] = 1.0;
        out.push(f);
    }
    out
}

/// Fields `V = Ax + b + <c, x>x` of flat projective geometry: the `n^2`
/// matrix units, then the `n` translations, then the `n` quadratic fields.
pub fn flat_projective_basis(n: usize) -> Vec<PolyVectorField> {
    let mut out = Vec::with_capacity(n * (n + 2));
    for i in 0..n {
        for j in 0..n {
            let mut f = PolyVectorField::zero(n);
            f.a[i * n + j] = 1.0;
            out.push(f);
        }
    }
    for i in 0..n {
        let mut f = PolyVectorField::zero(n);
        f.b[i] = 1.0;
        out.push(f);
    }
    for i in 0..n {
        let mut c = vec![0.0; n];
        c[i] = 1.0;
        out.push(PolyVectorField::radial_quadratic(n, &c, 1.0));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deriv::{value_at, TangentPoint};
    use crate::sample::sample_points;

    #[test]
    fn funk_formula_agrees_with_its_randers_split() {
        for signs in [(1, 1), (-1, -1)] {
            let spec = FunkSpec::new(3, vec![0.5, 0.0, 0.0]).with_signs(signs.0, signs.1);
            let m = funk(spec.clone()).unwrap();
            let split = funk_split(spec).unwrap().assembled();
            for p in sample_points(3, 10, 1, 0.7) {
                let (a, b) = (m.value(&p).unwrap(), value_at(&split, &p).unwrap());
                assert!((a - b).abs() < 1e-13 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn funk_at_the_origin() {
        // F(0, y) = |y| + sign2 <a, y>
        let m = funk(FunkSpec::new(2, vec![0.5, 0.0]).with_signs(1, -1)).unwrap();
        let v = m
            .value(&TangentPoint::new(vec![0.0, 0.0], vec![0.6, 0.8]))
            .unwrap();
        assert!((v - (1.0 - 0.3)).abs() < 1e-15);
    }

    #[test]
    fn invalid_funk_parameters() {
        assert!(funk(FunkSpec::new(2, vec![1.0, 0.5])).is_err());
        assert!(funk(FunkSpec::new(2, vec![0.0])).is_err());
        assert!(funk(FunkSpec::new(2, vec![0.0, 0.0]).with_signs(2, 1)).is_err());
    }

    #[test]
    fn basis_sizes() {
        for n in 2..5 {
            assert_eq!(flat_projective_basis(n).len(), n * (n + 2));
            assert_eq!(
                killing_basis(SpaceFormSpec { n, k: -1.0 }).len(),
                n * (n + 1) / 2
            );
        }
    }

    #[test]
    fn klein_metric_at_the_origin_is_euclidean() {
        let m = space_form(SpaceFormSpec { n: 2, k: -1.0 }).unwrap();
        let v = m
            .value(&TangentPoint::new(vec![0.0, 0.0], vec![3.0, 4.0]))
            .unwrap();
        assert!((v - 5.0).abs() < 1e-15);
        assert!(space_form(SpaceFormSpec { n: 2, k: 0.5 }).is_err());
    }

    #[test]
    fn random_randers_is_seeded_and_admissible() {
        let a = random_randers(3, 42, 0.05).unwrap();
        let b = random_randers(3, 42, 0.05).unwrap();
        for p in sample_points(3, 25, 2, 0.7) {
            assert_eq!(a.value(&p).unwrap(), b.value(&p).unwrap());
            assert!(crate::randers::randers_data(a.randers_spec().unwrap(), &p).is_ok());
        }
        let c = random_randers(3, 43, 0.05).unwrap();
        let p = &sample_points(3, 1, 3, 0.7)[0];
        assert_ne!(a.value(p).unwrap(), c.value(p).unwrap());
    }

    #[test]
    fn polynomial_matrix_is_symmetrized() {
        let entries = vec![
            Polynomial::constant(1.0),
            Polynomial::term(0.2, vec![1, 0]),
            Polynomial::zero(),
            Polynomial::constant(1.0),
        ];
        let mat = PolyMatrix::new(2, entries).unwrap();
        let ctx =
            crate::deriv::JetContext::new(2, TangentPoint::new(vec![0.5, 0.0], vec![1.0, 0.0]))
                .unwrap();
        let x = crate::deriv::lift_point(&ctx);
        let a = mat.eval(&x[..2]).unwrap();
        assert!((a[1].value() - 0.05).abs() < 1e-15 && (a[2].value() - 0.05).abs() < 1e-15);
    }
}
