//! Exact high-order derivatives on the slit tangent bundle.
//!
//! A point `(x, y)` of `TM_0` is lifted to `2n` coordinate jets (`x^1..x^n`
//! first, then `y^1..y^n`); any scalar field written in jet arithmetic then
//! yields its full Taylor expansion at that point up to the context order.

mod jet;
mod layout;

pub use jet::{sum, Jet, DIVISION_FLOOR};
pub use layout::MAX_ORDER;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fiber points shorter than this are rejected.
pub const MIN_FIBER_NORM: f64 = 1e-3;

/// Default truncation order of the jet engine.
pub const DEFAULT_ORDER: usize = 7;

/// A point `(x, y)` of the tangent bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl TangentPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> TangentPoint {
        TangentPoint { x, y }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn fiber_norm(&self) -> f64 {
        self.y.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Same base point, fiber scaled by `lambda`.
    pub fn scaled(&self, lambda: f64) -> TangentPoint {
        TangentPoint {
            x: self.x.clone(),
            y: self.y.iter().map(|v| v * lambda).collect(),
        }
    }
}

/// Dimension, truncation order and base point of a jet computation.
#[derive(Debug, Clone, PartialEq)]
pub struct JetContext {
    n: usize,
    order: usize,
    base: TangentPoint,
}

impl JetContext {
    pub fn new(order: usize, base: TangentPoint) -> Result<JetContext> {
        if order < 1 {
            return Err(Error::InvalidContext("order must be at least 1".into()));
        }
        JetContext::with_any_order(order, base)
    }

    /// Like [`JetContext::new`] but admits order 0 (plain evaluation).
    pub(crate) fn with_any_order(order: usize, base: TangentPoint) -> Result<JetContext> {
        let n = base.x.len();
        if n == 0 {
            return Err(Error::InvalidContext("dimension must be positive".into()));
        }
        if base.y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: base.y.len(),
            });
        }
        if order > MAX_ORDER {
            return Err(Error::OrderExceeded {
                requested: order,
                available: MAX_ORDER,
            });
        }
        let norm = base.fiber_norm();
        if !(norm > 0.0) || base.x.iter().chain(&base.y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidContext(format!(
                "fiber norm {norm} must be positive and finite"
            )));
        }
        Ok(JetContext { n, order, base })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn base(&self) -> &TangentPoint {
        &self.base
    }

    pub fn nvars(&self) -> usize {
        2 * self.n
    }

    pub fn constant(&self, value: f64) -> Jet {
        Jet::constant(self.nvars(), self.order, value)
    }
}

/// The coordinate functions `x^i`, `y^i` seeded at the context's base point.
pub fn lift_point(ctx: &JetContext) -> Vec<Jet> {
    let nv = ctx.nvars();
    ctx.base
        .x
        .iter()
        .chain(&ctx.base.y)
        .enumerate()
        .map(|(v, &value)| Jet::variable(nv, ctx.order, v, value))
        .collect()
}

/// A smooth scalar function on (an open subset of) `TM_0`, written in jet arithmetic.
///
/// `coords` holds `2n` jets: positions first, then fiber coordinates.
pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, coords: &[Jet]) -> Result<Jet>;

    /// Cheap domain test on the base coordinates.
    fn in_domain(&self, _x: &[f64]) -> bool {
        true
    }
}

/// Taylor expansion of `f` at the context's base point.
pub fn expand(f: &dyn ScalarField, ctx: &JetContext) -> Result<Jet> {
    if f.dim() != ctx.n {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: ctx.n,
        });
    }
    f.eval(&lift_point(ctx))
}

/// Plain value of `f` at a tangent point.
pub fn value_at(f: &dyn ScalarField, point: &TangentPoint) -> Result<f64> {
    let ctx = JetContext::with_any_order(0, point.clone())?;
    Ok(expand(f, &ctx)?.value())
}

/// The mixed partial derivative `d^alpha f` at the context's base point.
///
/// `alpha` is a multi-index over the `2n` variables `(x, y)`.
pub fn partial(f: &dyn ScalarField, ctx: &JetContext, alpha: &[u8]) -> Result<f64> {
    let total: usize = alpha.iter().map(|&e| e as usize).sum();
    if total > ctx.order {
        return Err(Error::OrderExceeded {
            requested: total,
            available: ctx.order,
        });
    }
    expand(f, ctx)?.partial(alpha)
}

/// Builds a multi-index from a list of variable indices, so that
/// `multi_index(4, &[0, 2, 0])` is the index of `d^3 / dx0^2 dx2`.
pub fn multi_index(nvars: usize, vars: &[usize]) -> Vec<u8> {
    let mut alpha = vec![0u8; nvars];
    for &v in vars {
        alpha[v] += 1;
    }
    alpha
}

#[cfg(test)]
mod tests {
    use super::*;

    struct XY;

    impl ScalarField for XY {
        fn dim(&self) -> usize {
            1
        }
        fn eval(&self, c: &[Jet]) -> Result<Jet> {
            Ok(&c[0] * &c[1])
        }
    }

    struct FiberNorm(usize);

    impl ScalarField for FiberNorm {
        fn dim(&self) -> usize {
            self.0
        }
        fn eval(&self, c: &[Jet]) -> Result<Jet> {
            let n = self.0;
            let sq = sum(c[n..].iter().map(|y| y * y).collect::<Vec<_>>().iter()).unwrap();
            sq.sqrt()
        }
    }

    #[test]
    fn lift_seeds_unit_coefficients() {
        let ctx = JetContext::new(3, TangentPoint::new(vec![2.0], vec![3.0])).unwrap();
        let lifted = lift_point(&ctx);
        assert_eq!(lifted.len(), 2);
        assert_eq!(lifted[0].value(), 2.0);
        assert_eq!(lifted[0].coeff(&[1, 0]), 1.0);
        assert_eq!(lifted[0].coeff(&[0, 1]), 0.0);
        assert!(lifted[0].coeffs()[3..].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn lift_returns_two_n_jets() {
        let ctx = JetContext::new(2, TangentPoint::new(vec![0.0, 0.0], vec![3.0, 4.0])).unwrap();
        let lifted = lift_point(&ctx);
        assert_eq!(lifted.len(), 4);
        assert_eq!(lifted[3].value(), 4.0);
    }

    #[test]
    fn context_rejects_zero_fiber_and_order() {
        let p = TangentPoint::new(vec![0.0], vec![0.0]);
        assert!(JetContext::new(2, p).is_err());
        let p = TangentPoint::new(vec![0.0], vec![1.0]);
        assert!(JetContext::new(0, p).is_err());
    }

    #[test]
    fn partials_of_simple_fields() {
        let ctx = JetContext::new(2, TangentPoint::new(vec![0.3], vec![0.7])).unwrap();
        assert_eq!(partial(&XY, &ctx, &[1, 1]).unwrap(), 1.0);
        let ctx = JetContext::new(2, TangentPoint::new(vec![0.0, 0.0], vec![3.0, 4.0])).unwrap();
        let d = partial(&FiberNorm(2), &ctx, &[0, 0, 1, 0]).unwrap();
        assert!((d - 0.6).abs() < 1e-15);
        assert!(matches!(
            partial(&FiberNorm(2), &ctx, &[0, 0, 3, 0]),
            Err(Error::OrderExceeded { .. })
        ));
    }

    #[test]
    fn multi_index_is_order_free() {
        assert_eq!(multi_index(4, &[0, 2, 0]), multi_index(4, &[2, 0, 0]));
    }
}
