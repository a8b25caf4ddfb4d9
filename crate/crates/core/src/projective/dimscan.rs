//! Dimension of the C-projective algebra inside a finite family of
//! polynomial vector fields, from the nullity of a sampled constraint matrix.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::classify::{factor_p, PointContext};
use super::{complete_lift, PolyVectorField};
use crate::deriv::Jet;
use crate::error::{Error, Result};
use crate::geometry::MetricModel;
use crate::library::flat_projective_basis;
use crate::sample::SampleConfig;

/// Singular values below this fraction of the largest count toward the nullity.
pub const NULLITY_REL_TOL: f64 = 1e-6;
/// Jet order of the per-point contexts.
pub const DIM_SCAN_ORDER: usize = 6;
const MAX_ROUNDS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimScanOptions {
    pub samples: SampleConfig,
    pub nullity_tol: f64,
}

impl Default for DimScanOptions {
    fn default() -> Self {
        DimScanOptions {
            samples: SampleConfig::default(),
            nullity_tol: NULLITY_REL_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimScanReport {
    /// Descending.
    pub singular_values: Vec<f64>,
    pub nullity: usize,
    /// Number of sample points behind the reported matrix.
    pub points: usize,
    /// Family size.
    pub columns: usize,
    /// Nullity after each sampling round.
    pub history: Vec<usize>,
}

/// Rows `L G^i - P y^i` and `L Sigma_ij` (`i < j`) at every point; one column
/// per field. The second matrix holds the unprojected `L G^i` rows and sets
/// the scale for the nullity threshold.
fn constraint_matrix(
    m: &MetricModel,
    fields: &[PolyVectorField],
    config: &SampleConfig,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = m.dim();
    let points = config.points(n);
    let per_point = n + n * (n - 1) / 2;
    let mut mat = DMatrix::zeros(points.len() * per_point, fields.len());
    let mut reference = DMatrix::zeros(points.len() * n, fields.len());
    for (pi, p) in points.iter().enumerate() {
        let pc = PointContext::new(m, p, DIM_SCAN_ORDER, false)?;
        let spray = pc.local.spray()?;
        for (col, f) in fields.iter().enumerate() {
            let lift = complete_lift(f, pc.local.coords())?;
            let lg: Vec<f64> = lift.lie_spray(spray, 0).iter().map(Jet::value).collect();
            let factor = factor_p(&lg, &p.y)?;
            let base = pi * per_point;
            for i in 0..n {
                mat[(base + i, col)] = lg[i] - factor * p.y[i];
                reference[(pi * n + i, col)] = lg[i];
            }
            let ls = lift.lie_tensor(&pc.sq.sigma, 0)?.value();
            let mut row = base + n;
            for i in 0..n {
                for j in i + 1..n {
                    mat[(row, col)] = ls.get(&[i, j]);
                    row += 1;
                }
            }
        }
    }
    Ok((mat, reference))
}

fn singular_values(mat: &DMatrix<f64>) -> Vec<f64> {
    let mut sv: Vec<f64> = mat
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv.resize(mat.ncols(), 0.0);
    sv
}

/// Counts singular values at or below `tol` times the larger of the largest
/// one and `scale`. Without `scale` a family that is entirely null would be
/// judged against its own rounding noise.
fn nullity(sv: &[f64], scale: f64, tol: f64) -> usize {
    let max = sv.first().copied().unwrap_or(0.0).max(scale);
    sv.iter().filter(|&&s| s <= tol * max).count()
}

/// Nullity of the constraint matrix over the flat projective family plus
/// `extra`. Doubles the sample count until two consecutive rounds agree.
pub fn dim_scan(
    m: &MetricModel,
    extra: &[PolyVectorField],
    opts: &DimScanOptions,
) -> Result<DimScanReport> {
    let n = m.dim();
    if n < 2 {
        return Err(Error::InvalidSpec("dim-scan needs n >= 2".into()));
    }
    for f in extra {
        if f.n != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: f.n,
            });
        }
    }
    let mut fields = flat_projective_basis(n);
    fields.extend(extra.iter().cloned());
    let mut config = opts.samples;
    let mut history = Vec::new();
    let mut previous: Option<(Vec<f64>, usize, usize)> = None;
    for _ in 0..=MAX_ROUNDS {
        let (mat, reference) = constraint_matrix(m, &fields, &config)?;
        let sv = singular_values(&mat);
        let scale = singular_values(&reference).first().copied().unwrap_or(0.0);
        let k = nullity(&sv, scale, opts.nullity_tol);
        history.push(k);
        if let Some((psv, pk, pcount)) = previous.take() {
            if pk == k {
                return Ok(DimScanReport {
                    singular_values: psv,
                    nullity: pk,
                    points: pcount,
                    columns: fields.len(),
                    history,
                });
            }
        }
        previous = Some((sv, k, config.count));
        config.count *= 2;
    }
    Err(Error::RankDeficientSampling { history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library::{euclidean, random_randers};

    #[test]
    fn nullity_threshold_uses_the_reference_scale() {
        let sv = [1e-13, 1e-14, 0.0];
        assert_eq!(nullity(&sv, 1.0, NULLITY_REL_TOL), 3);
        assert_eq!(nullity(&sv, 0.0, NULLITY_REL_TOL), 1);
        assert_eq!(nullity(&[2.0, 1e-7, 1e-9], 0.0, NULLITY_REL_TOL), 2);
    }

    #[test]
    fn euclidean_space_has_the_full_algebra() {
        let r = dim_scan(&euclidean(2), &[], &DimScanOptions::default()).unwrap();
        assert_eq!(r.nullity, 8);
        assert_eq!(r.columns, 8);
        assert_eq!(r.history.len(), 2);
    }

    #[test]
    fn a_duplicated_field_adds_one_null_direction() {
        let m = random_randers(2, 11, 0.05).unwrap();
        let base = dim_scan(&m, &[], &DimScanOptions::default()).unwrap();
        let extra = flat_projective_basis(2)[3].clone();
        let with = dim_scan(&m, &[extra], &DimScanOptions::default()).unwrap();
        assert_eq!(with.nullity, base.nullity + 1);
        assert!(base.nullity < 8);
    }

    #[test]
    fn mismatched_extra_field_is_rejected() {
        let r = dim_scan(
            &euclidean(2),
            &[PolyVectorField::zero(3)],
            &DimScanOptions::default(),
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }
}
