use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::chebyshev::PiecewiseChebyshev;
use crate::numerics::Jet;

/// One term `coefficient * r^(-exponent)` of a power-sum profile.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PowerTerm {
    pub coefficient: f64,
    pub exponent: f64,
}

impl PowerTerm {
    pub const fn new(coefficient: f64, exponent: f64) -> Self {
        Self {
            coefficient,
            exponent,
        }
    }
}

/// Leading behaviour at infinity: `f(r) - limit ~ coefficient * r^(-exponent)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailDescriptor {
    pub exponent: f64,
    pub coefficient: f64,
}

impl TailDescriptor {
    /// A profile that equals its limit identically.
    pub const EXACT: TailDescriptor = TailDescriptor {
        exponent: f64::INFINITY,
        coefficient: 0.0,
    };
}

type DeviationFn = dyn Fn(f64) -> Jet + Send + Sync;

#[derive(Clone)]
enum Repr {
    PowerSum(Vec<PowerTerm>),
    /// Deviation stored as a function of `t = (r0/r)^(n-2)`.
    Compactified(Arc<PiecewiseChebyshev>),
    /// Deviation jet in `r`, evaluated by a closure.
    Custom(Arc<DeviationFn>),
}

/// A scalar function of the radius on `[r0, inf)`, stored as `limit + deviation(r)`.
///
/// Keeping the deviation separate lets far-field quantities (masses,
/// expansion constants) be read off at very large radii without cancellation.
#[derive(Clone)]
pub struct RadialProfile {
    r0: f64,
    dimension: usize,
    limit: f64,
    tail: TailDescriptor,
    min_reliable_t: f64,
    repr: Repr,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Repr::PowerSum(terms) => format!("PowerSum({terms:?})"),
            Repr::Compactified(c) => format!(
                "Compactified({} elements, degree {})",
                c.breakpoints().len() - 1,
                c.degree()
            ),
            Repr::Custom(_) => "Custom".to_string(),
        };
        f.debug_struct("RadialProfile")
            .field("r0", &self.r0)
            .field("dimension", &self.dimension)
            .field("limit", &self.limit)
            .field("tail", &self.tail)
            .field("repr", &kind)
            .finish()
    }
}

fn check_domain(dimension: usize, r0: f64) -> Result<()> {
    if dimension < 3 {
        return Err(Error::InvalidParameter(format!(
            "dimension must be >= 3, got {dimension}"
        )));
    }
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "boundary radius must be positive, got {r0}"
        )));
    }
    Ok(())
}

impl RadialProfile {
    pub fn constant(dimension: usize, r0: f64, value: f64) -> Result<Self> {
        Self::power_sum(dimension, r0, value, Vec::new())
    }

    pub fn power_sum(dimension: usize, r0: f64, limit: f64, terms: Vec<PowerTerm>) -> Result<Self> {
        check_domain(dimension, r0)?;
        let terms: Vec<PowerTerm> = terms.into_iter().filter(|t| t.coefficient != 0.0).collect();
        if terms.iter().any(|t| !t.coefficient.is_finite() || !t.exponent.is_finite()) {
            return Err(Error::InvalidParameter("non-finite power term".into()));
        }
        let tail = match terms.iter().map(|t| t.exponent).min_by(f64::total_cmp) {
            None => TailDescriptor::EXACT,
            Some(p) => TailDescriptor {
                exponent: p,
                coefficient: terms
                    .iter()
                    .filter(|t| t.exponent == p)
                    .map(|t| t.coefficient)
                    .sum(),
            },
        };
        Ok(Self {
            r0,
            dimension,
            limit,
            tail,
            // evaluated term by term, so accurate far beyond any sampled radius
            min_reliable_t: 1e-30,
            repr: Repr::PowerSum(terms),
        })
    }

    pub(crate) fn compactified(
        dimension: usize,
        r0: f64,
        limit: f64,
        interpolant: PiecewiseChebyshev,
        tail: TailDescriptor,
    ) -> Result<Self> {
        check_domain(dimension, r0)?;
        let first = interpolant.breakpoints()[1];
        Ok(Self {
            r0,
            dimension,
            limit,
            tail,
            // inside the first element the interpolant is a polynomial in t and
            // no longer resolves fractional-power corrections
            min_reliable_t: first,
            repr: Repr::Compactified(Arc::new(interpolant)),
        })
    }

    /// A profile whose deviation from `limit` is given by `deviation(r)` as a jet in `r`.
    pub fn custom(
        dimension: usize,
        r0: f64,
        limit: f64,
        tail: TailDescriptor,
        deviation: impl Fn(f64) -> Jet + Send + Sync + 'static,
    ) -> Result<Self> {
        check_domain(dimension, r0)?;
        Ok(Self {
            r0,
            dimension,
            limit,
            tail,
            min_reliable_t: 1e-15,
            repr: Repr::Custom(Arc::new(deviation)),
        })
    }

    pub(crate) fn with_min_reliable_t(mut self, t: f64) -> Self {
        self.min_reliable_t = t;
        self
    }

    pub fn domain_start(&self) -> f64 {
        self.r0
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn limit(&self) -> f64 {
        self.limit
    }

    pub fn tail(&self) -> TailDescriptor {
        self.tail
    }

    /// Smallest compactified coordinate at which the deviation keeps full
    /// relative accuracy.
    pub fn min_reliable_t(&self) -> f64 {
        self.min_reliable_t
    }

    pub fn power_terms(&self) -> Option<&[PowerTerm]> {
        match &self.repr {
            Repr::PowerSum(t) => Some(t),
            _ => None,
        }
    }

    fn exponent(&self) -> f64 {
        (self.dimension - 2) as f64
    }

    /// `t = (r0/r)^(n-2)`.
    pub fn t_of(&self, r: f64) -> f64 {
        (self.r0 / r).powf(self.exponent())
    }

    pub fn r_of(&self, t: f64) -> f64 {
        self.r0 * t.powf(-1.0 / self.exponent())
    }

    /// The same function restricted to a different inner radius.
    pub fn restricted(&self, r0: f64) -> Result<Self> {
        check_domain(self.dimension, r0)?;
        match &self.repr {
            Repr::Compactified(_) => Err(Error::InvalidParameter(
                "a compactified interpolant is tied to its inner radius".into(),
            )),
            _ => {
                let mut p = self.clone();
                p.r0 = r0;
                Ok(p)
            }
        }
    }

    /// Jet of `f(r) - limit` with respect to `r`.
    pub fn deviation(&self, r: f64) -> Jet {
        match &self.repr {
            Repr::PowerSum(terms) => terms.iter().fold(Jet::constant(0.0), |acc, t| {
                let v = t.coefficient * r.powf(-t.exponent);
                let p = t.exponent;
                acc + Jet::new(v, -p * v / r, p * (p + 1.0) * v / (r * r))
            }),
            Repr::Compactified(c) => {
                let s = self.exponent();
                let t = self.t_of(r).min(1.0);
                let (f, ft, ftt) = c.eval(t);
                let tr = -s * t / r;
                let trr = s * (s + 1.0) * t / (r * r);
                Jet::new(f, ft * tr, ftt * tr * tr + ft * trr)
            }
            Repr::Custom(f) => f(r),
        }
    }

    /// Jet of `f(r)`.
    pub fn jet(&self, r: f64) -> Jet {
        self.deviation(r) + self.limit
    }

    pub fn value(&self, r: f64) -> f64 {
        self.jet(r).value
    }

    /// Largest relative disagreement between the deviation and its tail
    /// descriptor over the radii `r0 * 2^k`, `k` in `window`.
    pub fn tail_disagreement(&self, window: std::ops::RangeInclusive<i32>) -> f64 {
        if self.tail.exponent.is_infinite() {
            return window
                .map(|k| self.deviation(self.r0 * 2f64.powi(k)).value.abs())
                .fold(0.0, f64::max);
        }
        window
            .map(|k| {
                let r = self.r0 * 2f64.powi(k);
                let model = self.tail.coefficient * r.powf(-self.tail.exponent);
                let dev = self.deviation(r).value;
                (dev - model).abs() / model.abs().max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    }
}
