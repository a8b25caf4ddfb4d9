use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use super::layout::{layout, Layout};
use crate::error::{Error, Result};

/// Values below this magnitude are treated as zero when dividing.
pub const DIVISION_FLOOR: f64 = 1e-300;

/// Truncated multivariate Taylor expansion around a fixed base point.
///
/// Coefficients are stored densely, graded by total degree; the coefficient
/// of a multi-index `alpha` is `d^alpha f / alpha!`. All arithmetic truncates
/// at the smaller order of the operands.
#[derive(Clone)]
pub struct Jet {
    layout: Arc<Layout>,
    order: usize,
    coeffs: Vec<f64>,
}

impl Jet {
    pub(crate) fn zeros_with(layout: Arc<Layout>, order: usize) -> Jet {
        let count = layout.count(order);
        Jet {
            layout,
            order,
            coeffs: vec![0.0; count],
        }
    }

    /// Constant jet in `nvars` variables truncated at `order`.
    pub fn constant(nvars: usize, order: usize, value: f64) -> Jet {
        let mut j = Jet::zeros_with(layout(nvars, order), order);
        j.coeffs[0] = value;
        j
    }

    /// The coordinate function `t_var` expanded around `value`.
    pub fn variable(nvars: usize, order: usize, var: usize, value: f64) -> Jet {
        let mut j = Jet::constant(nvars, order, value);
        if order >= 1 {
            // Degree-one monomials follow the constant, variable 0 first.
            let idx = 1 + var;
            debug_assert_eq!(j.layout.exponents(idx)[var], 1);
            j.coeffs[idx] = 1.0;
        }
        j
    }

    /// A constant with the same variable count and order as `self`.
    pub fn constant_like(&self, value: f64) -> Jet {
        let mut j = Jet::zeros_with(Arc::clone(&self.layout), self.order);
        j.coeffs[0] = value;
        j
    }

    pub fn zero_like(&self) -> Jet {
        self.constant_like(0.0)
    }

    pub fn nvars(&self) -> usize {
        self.layout.nvars()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Value of the represented germ at the base point.
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Taylor coefficient of `alpha`, or zero when `alpha` is beyond the order.
    pub fn coeff(&self, alpha: &[u8]) -> f64 {
        match self.layout.index_of(alpha) {
            Some(i) if i < self.coeffs.len() => self.coeffs[i],
            _ => 0.0,
        }
    }

    /// The mixed partial derivative `d^alpha f` at the base point.
    pub fn partial(&self, alpha: &[u8]) -> Result<f64> {
        if alpha.len() != self.nvars() {
            return Err(Error::DimensionMismatch {
                expected: self.nvars(),
                got: alpha.len(),
            });
        }
        let total: usize = alpha.iter().map(|&e| e as usize).sum();
        if total > self.order {
            return Err(Error::OrderExceeded {
                requested: total,
                available: self.order,
            });
        }
        let i = self
            .layout
            .index_of(alpha)
            .expect("multi-index within order is always tabulated");
        Ok(self.coeffs[i] * self.layout.factorial(i))
    }

    /// Partial derivative in one variable; the result has order one lower.
    ///
    /// Panics on an order-0 jet; callers size their contexts so that every
    /// derivative they take is covered.
    pub fn d(&self, var: usize) -> Jet {
        assert!(self.order >= 1, "derivative of an order-0 jet");
        let order = self.order - 1;
        let mut out = Jet::zeros_with(Arc::clone(&self.layout), order);
        let raise = self.layout.raise(var);
        for (i, slot) in out.coeffs.iter_mut().enumerate() {
            let e = self.layout.exponents(i)[var] as f64;
            *slot = (e + 1.0) * self.coeffs[raise[i] as usize];
        }
        out
    }

    /// Drops every coefficient of degree above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order {
            return self.clone();
        }
        Jet {
            layout: Arc::clone(&self.layout),
            order,
            coeffs: self.coeffs[..self.layout.count(order)].to_vec(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn scale(&self, k: f64) -> Jet {
        Jet {
            layout: Arc::clone(&self.layout),
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    fn nonzeros(&self) -> usize {
        self.coeffs.iter().filter(|c| **c != 0.0).count()
    }

    fn bigger_layout<'a>(&'a self, other: &'a Jet) -> &'a Arc<Layout> {
        if self.layout.order() >= other.layout.order() {
            &self.layout
        } else {
            &other.layout
        }
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        assert_eq!(
            self.nvars(),
            other.nvars(),
            "jets over different variable counts"
        );
        let order = self.order.min(other.order);
        let count = self.layout.count(order);
        Jet {
            layout: Arc::clone(self.bigger_layout(other)),
            order,
            coeffs: (0..count)
                .map(|i| f(self.coeffs[i], other.coeffs[i]))
                .collect(),
        }
    }

    fn mul_jet(&self, other: &Jet) -> Jet {
        assert_eq!(
            self.nvars(),
            other.nvars(),
            "jets over different variable counts"
        );
        let order = self.order.min(other.order);
        let layout = Arc::clone(self.bigger_layout(other));
        let (outer, inner) = if self.nonzeros() <= other.nonzeros() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = Jet::zeros_with(Arc::clone(&layout), order);
        for i in 0..layout.count(order) {
            let a = outer.coeffs[i];
            if a == 0.0 {
                continue;
            }
            let room = order - layout.degree(i);
            let limit = layout.count(room);
            let row = &layout.mul_row(i)[..limit];
            let b = &inner.coeffs[..limit];
            for (&p, &bj) in row.iter().zip(b) {
                out.coeffs[p as usize] += a * bj;
            }
        }
        out
    }

    /// Evaluates `sum_k series[k] * (self - value)^k`, the composition of a
    /// univariate Taylor series centred at `self.value()` with `self`.
    fn compose(&self, series: &[f64]) -> Jet {
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let top = series.len().min(self.order + 1);
        let mut acc = self.constant_like(series[top - 1]);
        for k in (0..top - 1).rev() {
            acc = acc.mul_jet(&h);
            acc.coeffs[0] += series[k];
        }
        acc
    }

    /// `self^p` for real `p`; requires a positive value.
    pub fn powf(&self, p: f64) -> Result<Jet> {
        let v = self.value();
        if !(v > 0.0) {
            return Err(Error::DomainError {
                function: "pow",
                value: v,
            });
        }
        // (v + h)^p = v^p * sum_k binom(p, k) (h / v)^k
        let mut series = Vec::with_capacity(self.order + 1);
        let mut term = v.powf(p);
        for k in 0..=self.order {
            series.push(term);
            term *= (p - k as f64) / ((k + 1) as f64 * v);
        }
        Ok(self.compose(&series))
    }

    pub fn sqrt(&self) -> Result<Jet> {
        let v = self.value();
        if !(v > 0.0) {
            return Err(Error::DomainError {
                function: "sqrt",
                value: v,
            });
        }
        self.powf(0.5)
    }

    pub fn ln(&self) -> Result<Jet> {
        let v = self.value();
        if !(v > 0.0) {
            return Err(Error::DomainError {
                function: "ln",
                value: v,
            });
        }
        let mut series = Vec::with_capacity(self.order + 1);
        series.push(v.ln());
        let mut inv_pow = 1.0;
        for k in 1..=self.order {
            inv_pow /= v;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            series.push(sign * inv_pow / k as f64);
        }
        Ok(self.compose(&series))
    }

    pub fn recip(&self) -> Result<Jet> {
        let v = self.value();
        if v.abs() < DIVISION_FLOOR || !v.is_finite() {
            return Err(Error::DivisionByZeroValue { value: v });
        }
        let mut series = Vec::with_capacity(self.order + 1);
        let mut term = 1.0 / v;
        for _ in 0..=self.order {
            series.push(term);
            term *= -1.0 / v;
        }
        Ok(self.compose(&series))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet> {
        Ok(self.mul_jet(&other.recip()?))
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("nvars", &self.nvars())
            .field("order", &self.order)
            .field("value", &self.value())
            .finish()
    }
}

macro_rules! binary_ops {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(self, rhs)
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$method(rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                self.$method(&rhs)
            }
        }
    };
}

binary_ops!(Add, add, |a, b| a.zip_with(b, |x, y| x + y));
binary_ops!(Sub, sub, |a, b| a.zip_with(b, |x, y| x - y));
binary_ops!(Mul, mul, |a, b| a.mul_jet(b));

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, k: f64) -> Jet {
        self.scale(k)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, k: f64) -> Jet {
        self.coeffs.iter_mut().for_each(|c| *c *= k);
        self
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, k: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += k;
        out
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, k: f64) -> Jet {
        self.coeffs[0] += k;
        self
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self * -1.0
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        if rhs.order < self.order {
            *self = self.truncate(rhs.order);
        }
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl AddAssign<Jet> for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self += &rhs;
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        if rhs.order < self.order {
            *self = self.truncate(rhs.order);
        }
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

impl SubAssign<Jet> for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self -= &rhs;
    }
}

/// Sum of jets; `None` for an empty iterator.
pub fn sum<'a>(items: impl IntoIterator<Item = &'a Jet>) -> Option<Jet> {
    let mut it = items.into_iter();
    let mut acc = it.next()?.clone();
    for j in it {
        acc += j;
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_of_coordinate() {
        let x = Jet::variable(1, 4, 0, 3.0);
        let sq = &x * &x;
        assert_eq!(sq.value(), 9.0);
        assert_eq!(sq.coeff(&[1]), 6.0);
        assert_eq!(sq.coeff(&[2]), 1.0);
        assert_eq!(sq.coeff(&[3]), 0.0);
    }

    #[test]
    fn reciprocal_of_coordinate() {
        let one = Jet::constant(1, 3, 1.0);
        let y = Jet::variable(1, 3, 0, 2.0);
        let q = one.div(&y).unwrap();
        assert_eq!(q.value(), 0.5);
        assert!((q.coeff(&[1]) + 0.25).abs() < 1e-15);
        // d^2(1/t)/dt^2 = 2/t^3 -> Taylor coefficient 1/t^3
        assert!((q.coeff(&[2]) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn division_by_zero_value_is_rejected() {
        let one = Jet::constant(2, 2, 1.0);
        let z = Jet::variable(2, 2, 1, 0.0);
        assert!(matches!(
            one.div(&z),
            Err(Error::DivisionByZeroValue { .. })
        ));
    }

    #[test]
    fn sqrt_of_constant() {
        let c = Jet::constant(3, 5, 25.0);
        let r = c.sqrt().unwrap();
        assert_eq!(r.value(), 5.0);
        assert!(r.coeffs()[1..].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn sqrt_and_ln_reject_nonpositive() {
        let z = Jet::constant(1, 2, 0.0);
        assert!(matches!(z.sqrt(), Err(Error::DomainError { .. })));
        assert!(matches!((&z + -1.0).ln(), Err(Error::DomainError { .. })));
    }

    #[test]
    fn euclidean_norm_gradient() {
        let y1 = Jet::variable(2, 2, 0, 3.0);
        let y2 = Jet::variable(2, 2, 1, 4.0);
        let r = (&y1 * &y1 + &y2 * &y2).sqrt().unwrap();
        assert_eq!(r.value(), 5.0);
        assert!((r.partial(&[1, 0]).unwrap() - 0.6).abs() < 1e-15);
        assert!((r.partial(&[0, 1]).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn partial_rejects_excess_order() {
        let x = Jet::variable(2, 2, 0, 1.0);
        assert!(matches!(
            x.partial(&[2, 1]),
            Err(Error::OrderExceeded { .. })
        ));
    }

    #[test]
    fn derivative_lowers_order() {
        let x = Jet::variable(2, 3, 0, 2.0);
        let y = Jet::variable(2, 3, 1, -1.0);
        let f = &(&x * &x) * &y;
        let dx = f.d(0);
        assert_eq!(dx.order(), 2);
        // d/dx (x^2 y) = 2xy = -4
        assert_eq!(dx.value(), -4.0);
        let dxy = dx.d(1);
        assert_eq!(dxy.value(), 4.0);
    }

    #[test]
    fn powf_matches_closed_form() {
        let t = Jet::variable(1, 6, 0, 1.7);
        let p = t.powf(-1.5).unwrap();
        // k-th derivative of t^p is p(p-1)...(p-k+1) t^(p-k)
        let mut falling = 1.0;
        for k in 0..=6u8 {
            let expected = falling * 1.7f64.powf(-1.5 - k as f64);
            let got = p.partial(&[k]).unwrap();
            assert!(
                (got - expected).abs() < 1e-12 * expected.abs().max(1.0),
                "k={k}"
            );
            falling *= -1.5 - k as f64;
        }
    }
}
