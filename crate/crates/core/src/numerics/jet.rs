//! Second-order truncated Taylor arithmetic in one variable.
//!
//! A [`Jet`] carries `(f, f', f'')` at a point and propagates them exactly
//! through sums, products, quotients and smooth unary maps. Radial profiles
//! are composed from jets so that every derived quantity (conformal factors,
//! Green's function transforms, warped-product coefficients) arrives with
//! analytic first and second derivatives.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const fn new(value: f64, d1: f64, d2: f64) -> Self {
        Self { value, d1, d2 }
    }

    pub const fn constant(value: f64) -> Self {
        Self::new(value, 0.0, 0.0)
    }

    /// The independent variable itself.
    pub const fn variable(x: f64) -> Self {
        Self::new(x, 1.0, 0.0)
    }

    /// Applies a scalar map given its value and first two derivatives at `self.value`.
    pub fn compose(self, f: f64, df: f64, d2f: f64) -> Self {
        Self::new(f, df * self.d1, d2f * self.d1 * self.d1 + df * self.d2)
    }

    pub fn powf(self, alpha: f64) -> Self {
        let v = self.value;
        let f = v.powf(alpha);
        let df = alpha * v.powf(alpha - 1.0);
        let d2f = alpha * (alpha - 1.0) * v.powf(alpha - 2.0);
        self.compose(f, df, d2f)
    }

    pub fn recip(self) -> Self {
        let v = self.value;
        self.compose(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    pub fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        self.compose(s, 0.5 / s, -0.25 / (s * self.value))
    }

    pub fn ln(self) -> Self {
        let v = self.value;
        self.compose(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(k * self.value, k * self.d1, k * self.d2)
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.value + o.value, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.value - o.value, self.d1 - o.d1, self.d2 - o.d2)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(-self.value, -self.d1, -self.d2)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::new(
            self.value * o.value,
            self.d1 * o.value + self.value * o.d1,
            self.d2 * o.value + 2.0 * self.d1 * o.d1 + self.value * o.d2,
        )
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let h = self.value / o.value;
        let h1 = (self.d1 - h * o.d1) / o.value;
        let h2 = (self.d2 - 2.0 * h1 * o.d1 - h * o.d2) / o.value;
        Jet::new(h, h1, h2)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, c: f64) -> Jet {
        Jet::new(self.value + c, self.d1, self.d2)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, c: f64) -> Jet {
        Jet::new(self.value - c, self.d1, self.d2)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        self.scale(c)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, c: f64) -> Jet {
        self.scale(1.0 / c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fd(f: impl Fn(f64) -> f64, x: f64, h: f64) -> (f64, f64) {
        let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        (d1, d2)
    }

    #[test]
    fn quotient_of_variable() {
        // 1/x at x = 2: (1/2, -1/4, 1/4)
        let j = Jet::constant(1.0) / Jet::variable(2.0);
        assert!((j.value - 0.5).abs() < 1e-15);
        assert!((j.d1 + 0.25).abs() < 1e-15);
        assert!((j.d2 - 0.25).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn composite_matches_finite_differences(x in 0.5f64..4.0, a in 0.1f64..3.0, p in 0.5f64..3.0) {
            let f = |x: f64| (1.0 + a * x.powf(-p)).powf(1.5) / (x + 1.0).sqrt();
            let jx = Jet::variable(x);
            let j = (jx.powf(-p) * a + 1.0).powf(1.5) / (jx + 1.0).sqrt();
            let (d1, d2) = fd(f, x, 1e-4);
            prop_assert!((j.value - f(x)).abs() < 1e-12);
            prop_assert!((j.d1 - d1).abs() < 1e-6 * (1.0 + d1.abs()));
            prop_assert!((j.d2 - d2).abs() < 1e-4 * (1.0 + d2.abs()));
        }
    }
}
