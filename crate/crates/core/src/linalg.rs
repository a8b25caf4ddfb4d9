//! Small dense linear algebra over jets and over plain values.

use nalgebra::DMatrix;

use crate::deriv::Jet;
use crate::error::{Error, Result};

/// Condition numbers above this are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

pub(crate) fn value_matrix(m: &[Jet], n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| m[i * n + j].value())
}

/// 2-norm condition number via singular values.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Rejects matrices that are not symmetric positive definite or are too
/// badly conditioned to invert reliably.
pub(crate) fn check_spd(m: &DMatrix<f64>) -> Result<()> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min,
        });
    }
    let max = eig.iter().cloned().fold(0.0, f64::max);
    let condition = max / min;
    if condition > MAX_CONDITION {
        return Err(Error::SingularMetric { condition });
    }
    Ok(())
}

/// Inverse and determinant of an `n x n` jet matrix (row-major) by
/// Gauss-Jordan elimination with partial pivoting on the values.
pub fn invert_jets(m: &[Jet], n: usize) -> Result<(Vec<Jet>, Jet)> {
    let values = value_matrix(m, n);
    let condition = condition_number(&values);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularMetric { condition });
    }
    let one = m[0].constant_like(1.0);
    let zero = m[0].zero_like();
    let mut a: Vec<Vec<Jet>> = (0..n).map(|i| m[i * n..(i + 1) * n].to_vec()).collect();
    let mut inv: Vec<Vec<Jet>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { one.clone() } else { zero.clone() })
                .collect()
        })
        .collect();
    let mut det = one.clone();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| a[p][col].value().abs().total_cmp(&a[q][col].value().abs()))
            .expect("non-empty pivot range");
        if pivot != col {
            a.swap(pivot, col);
            inv.swap(pivot, col);
            det = -det;
        }
        det = &det * &a[col][col];
        let r = a[col][col].recip()?;
        for j in 0..n {
            if j > col {
                a[col][j] = &a[col][j] * &r;
            }
            inv[col][j] = &inv[col][j] * &r;
        }
        a[col][col] = one.clone();
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row][col].clone();
            if factor.coeffs().iter().all(|&c| c == 0.0) {
                continue;
            }
            for j in (col + 1)..n {
                let t = &factor * &a[col][j];
                a[row][j] -= &t;
            }
            for j in 0..n {
                let t = &factor * &inv[col][j];
                inv[row][j] -= &t;
            }
            a[row][col] = zero.clone();
        }
    }
    Ok((inv.into_iter().flatten().collect(), det))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_times_matrix_is_identity() {
        let nv = 2;
        let x = Jet::variable(nv, 4, 0, 0.3);
        let y = Jet::variable(nv, 4, 1, -0.2);
        let m = vec![&x * &x + 2.0, &x * &y, y.clone(), &y * &y + 1.5];
        let (inv, det) = invert_jets(&m, 2).unwrap();
        let expected_det = &m[0] * &m[3] - &m[1] * &m[2];
        for (a, b) in det.coeffs().iter().zip(expected_det.coeffs()) {
            assert!((a - b).abs() < 1e-13);
        }
        for i in 0..2 {
            for j in 0..2 {
                let p = &m[i * 2] * &inv[j] + &m[i * 2 + 1] * &inv[2 + j];
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((p.value() - target).abs() < 1e-13);
                assert!(p.coeffs()[1..].iter().all(|c| c.abs() < 1e-12));
            }
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let one = Jet::constant(2, 2, 1.0);
        let m = vec![one.clone(), one.clone(), one.clone(), one];
        assert!(matches!(
            invert_jets(&m, 2),
            Err(Error::SingularMetric { .. })
        ));
    }

    #[test]
    fn spd_check() {
        let good = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        assert!(check_spd(&good).is_ok());
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            check_spd(&bad),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }
}
