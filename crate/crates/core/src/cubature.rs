//! Busemann-Hausdorff density by integration over the indicatrix.
//!
//! The F-unit ball in `T_xM` is star-shaped with radius `1 / F(x, u)` along
//! the unit direction `u`, so its volume is `(1/n) * integral of F(x, u)^-n`
//! over the sphere, and the density is the sphere measure divided by that
//! integral.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use crate::deriv::TangentPoint;
use crate::error::{Error, Result};
use crate::geometry::MetricModel;

/// Relative change between two refinement levels accepted as converged.
pub const CONVERGENCE_TOL: f64 = 1e-9;
/// Nodes of the first level in dimension 2; the second level has twice as many.
const CIRCLE_NODES: usize = 65_536;
/// Polar and azimuthal nodes of the first level in dimension 3 and up.
const POLAR_NODES: usize = 128;
const MAX_REFINEMENTS: usize = 3;

/// Sphere cubature: unit directions with positive weights.
fn sphere_rule(n: usize, level: usize) -> Vec<(Vec<f64>, f64)> {
    let scale = 1usize << level;
    if n == 1 {
        return vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)];
    }
    let azimuth = if n == 2 {
        CIRCLE_NODES * scale
    } else {
        2 * POLAR_NODES * scale
    };
    let az_nodes: Vec<(f64, f64)> = (0..azimuth)
        .map(|k| {
            (
                2.0 * PI * k as f64 / azimuth as f64,
                2.0 * PI / azimuth as f64,
            )
        })
        .collect();
    let polar = GaussLegendre::new(NonZeroUsize::new(POLAR_NODES * scale).expect("positive"));
    let polar_nodes: Vec<(f64, f64)> = polar
        .as_node_weight_pairs()
        .iter()
        .map(|&(t, w)| (PI / 2.0 * (t + 1.0), PI / 2.0 * w))
        .collect();

    // Angles phi_1..phi_{n-2} in [0, pi], then the azimuth theta.
    let mut rule = vec![(Vec::<f64>::new(), 1.0)];
    for level in 0..n - 2 {
        let power = (n - 2 - level) as i32;
        let mut next = Vec::with_capacity(rule.len() * polar_nodes.len());
        for (angles, w) in &rule {
            for &(phi, pw) in &polar_nodes {
                let mut a = angles.clone();
                a.push(phi);
                next.push((a, w * pw * phi.sin().powi(power)));
            }
        }
        rule = next;
    }
    let mut out = Vec::with_capacity(rule.len() * az_nodes.len());
    for (angles, w) in &rule {
        for &(theta, aw) in &az_nodes {
            let mut u = Vec::with_capacity(n);
            let mut prefix = 1.0;
            for &phi in angles {
                u.push(prefix * phi.cos());
                prefix *= phi.sin();
            }
            u.push(prefix * theta.cos());
            u.push(prefix * theta.sin());
            out.push((u, w * aw));
        }
    }
    out
}

fn density_at_level(m: &MetricModel, x: &[f64], level: usize) -> Result<f64> {
    let n = x.len();
    let mut measure = 0.0;
    let mut integral = 0.0;
    for (u, w) in sphere_rule(n, level) {
        let f = m.value(&TangentPoint::new(x.to_vec(), u))?;
        if !(f > 0.0) {
            return Err(Error::DomainError {
                function: "F",
                value: f,
            });
        }
        measure += w;
        integral += w * f.powi(-(n as i32));
    }
    Ok(measure / integral)
}

/// `sigma_F(x)` from the defining volume ratio.
pub fn indicatrix_density(m: &MetricModel, x: &[f64]) -> Result<f64> {
    let mut previous = density_at_level(m, x, 0)?;
    let mut change = f64::INFINITY;
    for level in 1..=MAX_REFINEMENTS {
        let current = density_at_level(m, x, level)?;
        change = ((current - previous) / current).abs();
        if change < CONVERGENCE_TOL {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::IntegrationDidNotConverge {
        relative_change: change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_rules_integrate_constants_and_quadratics() {
        for n in 2..=3 {
            let rule = sphere_rule(n, 0);
            let area: f64 = rule.iter().map(|(_, w)| w).sum();
            let expected = if n == 2 { 2.0 * PI } else { 4.0 * PI };
            assert!((area - expected).abs() < 1e-10);
            // mean of u_1^2 over the sphere is 1/n
            let second: f64 = rule.iter().map(|(u, w)| w * u[0] * u[0]).sum();
            assert!((second / area - 1.0 / n as f64).abs() < 1e-12);
            assert!(rule
                .iter()
                .all(|(u, _)| (u.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12));
        }
    }
}
