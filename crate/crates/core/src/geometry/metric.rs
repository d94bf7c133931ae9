use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::profile::{PowerTerm, RadialProfile, TailDescriptor};
use crate::error::{Error, Result};
use crate::numerics::{decay_order_fit, Jet, PowerLawFit};

/// How the metric is written in the radial chart `x = r * theta`.
#[derive(Debug, Clone)]
pub enum MetricForm {
    /// `g = U^(4/(n-2)) delta`.
    ConformallyFlat { factor: RadialProfile },
    /// `g = a(r)^2 dr^2 + (r b(r))^2 g_round`, i.e. areal radius `rho = r b`.
    WarpedProduct {
        radial: RadialProfile,
        areal_ratio: RadialProfile,
    },
}

/// A rotationally symmetric asymptotically flat metric on `R^n` minus the
/// ball of radius `r0`.
#[derive(Debug, Clone)]
pub struct RadialMetric {
    dimension: usize,
    boundary_radius: f64,
    form: MetricForm,
    decay_order: f64,
    scalar_decay_order: f64,
}

/// Warping coefficients and their radial derivatives at one radius.
///
/// `da` and `db` are jets of `a - 1` and `b - 1`; carrying the deviations
/// keeps differences such as `a - b` accurate far out.
#[derive(Debug, Clone, Copy)]
pub struct WarpJets {
    pub r: f64,
    pub da: Jet,
    pub db: Jet,
}

impl WarpJets {
    pub fn a(&self) -> Jet {
        self.da + 1.0
    }

    pub fn b(&self) -> Jet {
        self.db + 1.0
    }

    /// Areal radius `rho = r b` as a jet.
    pub fn rho(&self) -> Jet {
        Jet::variable(self.r) * self.b()
    }
}

/// `(1 + x)^alpha - 1` as a jet, accurate for small `x`.
pub(crate) fn pow1p_minus_one(x: Jet, alpha: f64) -> Jet {
    let full = (x + 1.0).powf(alpha);
    Jet::new((alpha * x.value.ln_1p()).exp_m1(), full.d1, full.d2)
}

impl RadialMetric {
    pub fn conformally_flat(
        dimension: usize,
        boundary_radius: f64,
        factor: RadialProfile,
        decay_order: f64,
        scalar_decay_order: f64,
    ) -> Result<Self> {
        let m = Self {
            dimension,
            boundary_radius,
            form: MetricForm::ConformallyFlat { factor },
            decay_order,
            scalar_decay_order,
        };
        m.validate(true)?;
        Ok(m)
    }

    pub fn warped_product(
        dimension: usize,
        boundary_radius: f64,
        radial: RadialProfile,
        areal_ratio: RadialProfile,
        decay_order: f64,
        scalar_decay_order: f64,
    ) -> Result<Self> {
        let m = Self {
            dimension,
            boundary_radius,
            form: MetricForm::WarpedProduct {
                radial,
                areal_ratio,
            },
            decay_order,
            scalar_decay_order,
        };
        m.validate(true)?;
        Ok(m)
    }

    fn validate(&self, monotone_areal: bool) -> Result<()> {
        let n = self.dimension;
        let r0 = self.boundary_radius;
        if n < 3 {
            return Err(Error::InvalidParameter(format!("dimension must be >= 3, got {n}")));
        }
        if !(r0 > 0.0) {
            return Err(Error::InvalidParameter(format!("boundary radius must be positive, got {r0}")));
        }
        let s = self.exponent();
        if !(self.decay_order > s / 2.0) {
            return Err(Error::InvalidParameter(format!(
                "decay order {} must exceed (n-2)/2 = {}",
                self.decay_order,
                s / 2.0
            )));
        }
        if !(self.scalar_decay_order > n as f64) {
            return Err(Error::InvalidParameter(format!(
                "scalar curvature decay order {} must exceed n = {n}",
                self.scalar_decay_order
            )));
        }
        let profiles: Vec<&RadialProfile> = match &self.form {
            MetricForm::ConformallyFlat { factor } => vec![factor],
            MetricForm::WarpedProduct {
                radial,
                areal_ratio,
            } => vec![radial, areal_ratio],
        };
        for p in &profiles {
            if p.dimension() != n || (p.domain_start() - r0).abs() > 1e-14 * r0 {
                return Err(Error::InvalidParameter(
                    "profile dimension or inner radius does not match the metric".into(),
                ));
            }
            if (p.limit() - 1.0).abs() > 1e-14 {
                return Err(Error::DegenerateMetric(format!(
                    "profile must tend to 1 at infinity, limit is {}",
                    p.limit()
                )));
            }
        }
        // positivity (and monotone areal radius) on a compactified sample grid
        for k in 0..=400 {
            let t = 1.0 - k as f64 / 400.0;
            if t <= 0.0 {
                break;
            }
            let r = r0 * t.powf(-1.0 / s);
            let w = self.jets(r)?;
            if !(w.a().value > 0.0) || !(w.b().value > 0.0) || !w.a().is_finite() || !w.b().is_finite() {
                return Err(Error::DegenerateMetric(format!(
                    "metric is not positive definite at r = {r}"
                )));
            }
            if let (true, MetricForm::WarpedProduct { .. }) = (monotone_areal, &self.form) {
                if !(w.rho().d1 > 0.0) {
                    return Err(Error::DegenerateMetric(format!(
                        "areal radius is not increasing at r = {r}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// `n - 2`.
    pub fn exponent(&self) -> f64 {
        (self.dimension - 2) as f64
    }

    pub fn boundary_radius(&self) -> f64 {
        self.boundary_radius
    }

    pub fn form(&self) -> &MetricForm {
        &self.form
    }

    pub fn decay_order(&self) -> f64 {
        self.decay_order
    }

    pub fn scalar_decay_order(&self) -> f64 {
        self.scalar_decay_order
    }

    pub fn conformal_factor(&self) -> Option<&RadialProfile> {
        match &self.form {
            MetricForm::ConformallyFlat { factor } => Some(factor),
            MetricForm::WarpedProduct { .. } => None,
        }
    }

    /// Smallest compactified coordinate at which all profiles are reliable.
    pub fn min_reliable_t(&self) -> f64 {
        match &self.form {
            MetricForm::ConformallyFlat { factor } => factor.min_reliable_t(),
            MetricForm::WarpedProduct {
                radial,
                areal_ratio,
            } => radial.min_reliable_t().max(areal_ratio.min_reliable_t()),
        }
    }

    pub fn t_of(&self, r: f64) -> f64 {
        (self.boundary_radius / r).powf(self.exponent())
    }

    pub fn r_of(&self, t: f64) -> f64 {
        self.boundary_radius * t.powf(-1.0 / self.exponent())
    }

    pub(crate) fn check_radius(&self, r: f64) -> Result<()> {
        if r < self.boundary_radius * (1.0 - 1e-12) || !r.is_finite() {
            return Err(Error::OutsideDomain {
                r,
                r0: self.boundary_radius,
            });
        }
        Ok(())
    }

    pub fn jets(&self, r: f64) -> Result<WarpJets> {
        self.check_radius(r)?;
        Ok(match &self.form {
            MetricForm::ConformallyFlat { factor } => {
                let da = pow1p_minus_one(factor.deviation(r), 2.0 / self.exponent());
                WarpJets { r, da, db: da }
            }
            MetricForm::WarpedProduct {
                radial,
                areal_ratio,
            } => WarpJets {
                r,
                da: radial.deviation(r),
                db: areal_ratio.deviation(r),
            },
        })
    }

    /// The same metric on the smaller manifold `|x| >= r0` (or larger, as
    /// long as the metric stays nondegenerate).
    pub fn restricted(&self, r0: f64) -> Result<Self> {
        let form = match &self.form {
            MetricForm::ConformallyFlat { factor } => MetricForm::ConformallyFlat {
                factor: factor.restricted(r0)?,
            },
            MetricForm::WarpedProduct {
                radial,
                areal_ratio,
            } => MetricForm::WarpedProduct {
                radial: radial.restricted(r0)?,
                areal_ratio: areal_ratio.restricted(r0)?,
            },
        };
        let m = Self {
            boundary_radius: r0,
            form,
            ..self.clone()
        };
        m.validate(true)?;
        Ok(m)
    }

    /// The same metric written in warped-product form, `a = b = U^(2/(n-2))`.
    pub fn as_warped(&self) -> Result<Self> {
        match &self.form {
            MetricForm::WarpedProduct { .. } => Ok(self.clone()),
            MetricForm::ConformallyFlat { factor } => {
                let alpha = 2.0 / self.exponent();
                let u = factor.clone();
                let tail = factor.tail();
                let dev = move |r: f64| pow1p_minus_one(u.deviation(r), alpha);
                let warp = RadialProfile::custom(
                    self.dimension,
                    self.boundary_radius,
                    1.0,
                    TailDescriptor {
                        exponent: tail.exponent,
                        coefficient: alpha * tail.coefficient,
                    },
                    dev,
                )?
                .with_min_reliable_t(factor.min_reliable_t());
                // same Riemannian metric, so the areal radius may turn around
                let m = Self {
                    dimension: self.dimension,
                    boundary_radius: self.boundary_radius,
                    form: MetricForm::WarpedProduct {
                        radial: warp.clone(),
                        areal_ratio: warp,
                    },
                    decay_order: self.decay_order,
                    scalar_decay_order: self.scalar_decay_order,
                };
                m.validate(false)?;
                Ok(m)
            }
        }
    }

    /// The metric `f^(4/(n-2)) g` for a radial factor `f -> 1` at infinity,
    /// in the same form as `self`. The caller supplies the scalar curvature
    /// decay order of the result.
    pub fn conformally_scaled(&self, factor: &RadialProfile, scalar_decay_order: f64) -> Result<Self> {
        if factor.dimension() != self.dimension || (factor.domain_start() - self.boundary_radius).abs() > 1e-14 * self.boundary_radius {
            return Err(Error::InvalidParameter(
                "factor dimension or inner radius does not match the metric".into(),
            ));
        }
        let s = self.exponent();
        let ft = factor.tail();
        let reliable = factor.min_reliable_t().max(self.min_reliable_t());
        // (1 + x)(1 + y) - 1 without cancellation
        let product = |p: &RadialProfile, f: RadialProfile, alpha: f64| -> Result<RadialProfile> {
            let p = p.clone();
            let pt = p.tail();
            let tail = if pt.exponent < ft.exponent {
                pt
            } else if ft.exponent < pt.exponent {
                TailDescriptor {
                    exponent: ft.exponent,
                    coefficient: alpha * ft.coefficient,
                }
            } else {
                TailDescriptor {
                    exponent: pt.exponent,
                    coefficient: pt.coefficient + alpha * ft.coefficient,
                }
            };
            let dev = move |r: f64| {
                let x = p.deviation(r);
                let y = pow1p_minus_one(f.deviation(r), alpha);
                x + y + x * y
            };
            Ok(RadialProfile::custom(self.dimension, self.boundary_radius, 1.0, tail, dev)?.with_min_reliable_t(reliable))
        };
        let form = match &self.form {
            MetricForm::ConformallyFlat { factor: u } => MetricForm::ConformallyFlat {
                factor: product(u, factor.clone(), 1.0)?,
            },
            MetricForm::WarpedProduct {
                radial,
                areal_ratio,
            } => MetricForm::WarpedProduct {
                radial: product(radial, factor.clone(), 2.0 / s)?,
                areal_ratio: product(areal_ratio, factor.clone(), 2.0 / s)?,
            },
        };
        let m = Self {
            dimension: self.dimension,
            boundary_radius: self.boundary_radius,
            form,
            decay_order: self.decay_order.min(ft.exponent),
            scalar_decay_order,
        };
        m.validate(false)?;
        Ok(m)
    }

    /// Fits the decay of `|g - delta|` (largest eigenvalue deviation) on dyadic
    /// radii far from the boundary.
    pub fn fitted_decay_order(&self) -> Result<PowerLawFit> {
        let s = self.exponent();
        let kmax = ((1.0 / self.min_reliable_t().max(1e-12)).log2() / s).floor() as i32;
        let kmin = (kmax - 12).max(kmax / 2);
        let mut samples = Vec::new();
        for k in kmin..=kmax {
            let r = self.boundary_radius * 2f64.powi(k);
            let w = self.jets(r)?;
            let dev_a = w.da.value * (2.0 + w.da.value);
            let dev_b = w.db.value * (2.0 + w.db.value);
            samples.push((r, dev_a.abs().max(dev_b.abs())));
        }
        if samples.iter().all(|s| s.1 == 0.0) {
            return Ok(PowerLawFit {
                exponent: f64::INFINITY,
                coefficient: 0.0,
                residual: 0.0,
            });
        }
        decay_order_fit(&samples)
    }
}

/// The spatial Schwarzschild metric `(1 + m/(2 r^(n-2)))^(4/(n-2)) delta` outside `r0`.
pub fn schwarzschild(n: usize, m: f64, r0: f64) -> Result<RadialMetric> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("dimension must be >= 3, got {n}")));
    }
    if !(r0 > 0.0) {
        return Err(Error::InvalidParameter(format!("boundary radius must be positive, got {r0}")));
    }
    let s = (n - 2) as f64;
    let u0 = 1.0 + m / (2.0 * r0.powf(s));
    if !(u0 > 0.0) {
        return Err(Error::DegenerateMetric(format!(
            "conformal factor 1 + m/(2 r0^(n-2)) = {u0} is not positive at the boundary"
        )));
    }
    let factor = RadialProfile::power_sum(n, r0, 1.0, vec![PowerTerm::new(m / 2.0, s)])?;
    RadialMetric::conformally_flat(n, r0, factor, s, f64::INFINITY)
}

pub fn flat(n: usize, r0: f64) -> Result<RadialMetric> {
    schwarzschild(n, 0.0, r0)
}

/// `U = 1 + sum a_k r^(-p_k)`.
pub fn power_sum_metric(n: usize, r0: f64, terms: &[PowerTerm]) -> Result<RadialMetric> {
    let s = (n.max(3) - 2) as f64;
    let nonzero: Vec<PowerTerm> = terms.iter().copied().filter(|t| t.coefficient != 0.0).collect();
    if let Some(t) = nonzero.iter().find(|t| t.exponent < s) {
        return Err(Error::InsufficientDecay(format!(
            "term r^(-{}) decays slower than r^(-(n-2))",
            t.exponent
        )));
    }
    let tau = nonzero
        .iter()
        .map(|t| t.exponent)
        .fold(f64::INFINITY, f64::min)
        .min(f64::MAX);
    // Laplacian of r^(-p) is p(p+2-n) r^(-p-2); it vanishes only for p = n-2
    let q = nonzero
        .iter()
        .filter(|t| (t.exponent - s).abs() > 1e-14)
        .map(|t| t.exponent + 2.0)
        .fold(f64::INFINITY, f64::min);
    let factor = RadialProfile::power_sum(n, r0, 1.0, nonzero)?;
    RadialMetric::conformally_flat(n, r0, factor, tau, q)
}

/// Scales the non-harmonic (negative) coefficients so that
/// `U(r0) >= 1 + min(a_harmonic, 0) r0^(-s) - sum |a_k| r0^(-p_k) >= floor`.
fn keep_factor_positive(terms: &mut [PowerTerm], r0: f64, floor: f64) {
    let negative: f64 = terms
        .iter()
        .filter(|t| t.coefficient < 0.0)
        .map(|t| -t.coefficient * r0.powf(-t.exponent))
        .sum();
    let budget = 1.0 - floor;
    if negative > budget {
        let k = budget / negative;
        for t in terms.iter_mut().filter(|t| t.coefficient < 0.0) {
            t.coefficient *= k;
        }
    }
}

/// Random conformally flat metric on `R^n` minus the unit ball with
/// non-negative scalar curvature by construction:
/// `U = 1 + sum sign_k a_k r^(-p_k)`, `a_k` from `coeff_range`, `p_k` from
/// `exponent_range`.
///
/// `r^(-p)` is Euclidean-subharmonic for `p > n-2`, so those terms enter with
/// a negative sign (making `U` superharmonic, hence `R >= 0`); a term with
/// `p = n-2` is harmonic and keeps its positive sign. Negative terms are
/// scaled down if needed so that `U(1) >= 0.1`.
pub fn random_nonneg_scalar_metric(
    seed: u64,
    n: usize,
    num_terms: usize,
    exponent_range: (f64, f64),
    coeff_range: (f64, f64),
) -> Result<RadialMetric> {
    let s = (n.max(3) - 2) as f64;
    if exponent_range.0 < s || exponent_range.1 < exponent_range.0 {
        return Err(Error::InvalidParameter(format!(
            "exponent range must lie in [n-2, inf), got {exponent_range:?}"
        )));
    }
    if coeff_range.0 < 0.0 || coeff_range.1 < coeff_range.0 {
        return Err(Error::InvalidParameter(format!(
            "coefficient range must lie in [0, inf), got {coeff_range:?}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms: Vec<PowerTerm> = (0..num_terms)
        .map(|_| {
            let p = rng.random_range(exponent_range.0..=exponent_range.1);
            let a = rng.random_range(coeff_range.0..=coeff_range.1);
            let sign = if p == s { 1.0 } else { -1.0 };
            PowerTerm::new(sign * a, p)
        })
        .collect();
    keep_factor_positive(&mut terms, 1.0, 0.1);
    power_sum_metric(n, 1.0, &terms)
}

/// Sampling ranges for [`sample_metric_family`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyRanges {
    pub boundary_radius: (f64, f64),
    /// Coefficient of the harmonic `r^(-(n-2))` term; the metric's mass is
    /// twice this. May be negative.
    pub mass_coefficient: (f64, f64),
    pub extra_terms: (usize, usize),
    /// Offsets of the extra exponents above `n-2`.
    pub extra_exponent_offset: (f64, f64),
    /// Magnitudes of the extra (negative) coefficients.
    pub extra_coefficient: (f64, f64),
}

impl Default for FamilyRanges {
    fn default() -> Self {
        Self {
            boundary_radius: (0.5, 2.0),
            mass_coefficient: (-0.3, 1.5),
            extra_terms: (1, 2),
            extra_exponent_offset: (0.5, 3.0),
            extra_coefficient: (0.05, 1.0),
        }
    }
}

/// Deterministic family of non-negative scalar curvature metrics: a
/// Schwarzschild term carrying the mass plus faster-decaying superharmonic
/// terms. The harmonic coefficient is measured in units of `r0^(n-2)`.
pub fn sample_metric_family(
    seed: u64,
    count: usize,
    dimensions: &[usize],
    ranges: FamilyRanges,
) -> Result<Vec<RadialMetric>> {
    if dimensions.is_empty() {
        return Err(Error::InvalidParameter("no dimensions to sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = dimensions[rng.random_range(0..dimensions.len())];
            let s = (n - 2) as f64;
            let r0 = rng.random_range(ranges.boundary_radius.0..=ranges.boundary_radius.1);
            let scale = r0.powf(s);
            let mass_coef = rng.random_range(ranges.mass_coefficient.0..=ranges.mass_coefficient.1) * scale;
            let mut terms = vec![PowerTerm::new(mass_coef.max(-0.45 * scale), s)];
            let extra = rng.random_range(ranges.extra_terms.0..=ranges.extra_terms.1);
            for _ in 0..extra {
                let p = s + rng.random_range(ranges.extra_exponent_offset.0..=ranges.extra_exponent_offset.1);
                let a = rng.random_range(ranges.extra_coefficient.0..=ranges.extra_coefficient.1);
                terms.push(PowerTerm::new(-a * r0.powf(p), p));
            }
            keep_factor_positive(&mut terms, r0, 0.1);
            power_sum_metric(n, r0, &terms)
        })
        .collect()
}

/// Schwarzschild in areal coordinates, `dr^2/(1 - 2m/r^(n-2)) + r^2 g_round`,
/// outside `r0` with `r0^(n-2) > 2m`.
pub fn areal_schwarzschild(n: usize, m: f64, r0: f64) -> Result<RadialMetric> {
    areal_mass_profile(n, m, r0, &[])
}

/// `dr^2 / F + r^2 g_round` with `F = 1 - 2 mu(r) / r^(n-2)` and
/// `mu = m - sum a_k r^(-p_k)`.
///
/// With `a_k >= 0` and `p_k > 0` the mass function increases, which gives
/// `R = 2(n-1) mu' / r^(n-1) >= 0`. Not conformally flat unless all `a_k`
/// vanish.
pub fn areal_mass_profile(n: usize, m: f64, r0: f64, terms: &[PowerTerm]) -> Result<RadialMetric> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("dimension must be >= 3, got {n}")));
    }
    if terms.iter().any(|t| !(t.exponent > 0.0)) {
        return Err(Error::InvalidParameter("mass-function exponents must be positive".into()));
    }
    let s = (n - 2) as f64;
    // X = 2 mu / r^s as a sum of powers
    let mut x_terms = vec![PowerTerm::new(2.0 * m, s)];
    x_terms.extend(terms.iter().map(|t| PowerTerm::new(-2.0 * t.coefficient, s + t.exponent)));
    let x_terms: Vec<PowerTerm> = x_terms.into_iter().filter(|t| t.coefficient != 0.0).collect();
    let x_of = {
        let x_terms = x_terms.clone();
        move |r: f64| {
            x_terms.iter().fold(Jet::constant(0.0), |acc, t| {
                let v = t.coefficient * r.powf(-t.exponent);
                let p = t.exponent;
                acc + Jet::new(v, -p * v / r, p * (p + 1.0) * v / (r * r))
            })
        }
    };
    for k in 0..=400 {
        let t = 1.0 - k as f64 / 400.0;
        if t <= 0.0 {
            break;
        }
        let r = r0 * t.powf(-1.0 / s);
        if !(x_of(r).value < 1.0) {
            return Err(Error::DegenerateMetric(format!(
                "areal chart requires 2 mu(r) < r^(n-2); fails at r = {r}"
            )));
        }
    }
    let dev = move |r: f64| {
        let x = x_of(r);
        let root = (1.0 - x.value).sqrt();
        let value = x.value / (root * (1.0 + root));
        let da = 0.5 / (root * root * root);
        let d2a = 0.75 / (root * root * root * root * root);
        let full = x.compose(0.0, da, d2a);
        Jet::new(value, full.d1, full.d2)
    };
    let lead = x_terms
        .iter()
        .map(|t| t.exponent)
        .min_by(f64::total_cmp)
        .unwrap_or(f64::INFINITY);
    let tail = if lead.is_finite() {
        TailDescriptor {
            exponent: lead,
            coefficient: 0.5 * x_terms.iter().filter(|t| t.exponent == lead).map(|t| t.coefficient).sum::<f64>(),
        }
    } else {
        TailDescriptor::EXACT
    };
    let scalar_decay = terms
        .iter()
        .filter(|t| t.coefficient != 0.0)
        .map(|t| n as f64 + t.exponent)
        .min_by(f64::total_cmp)
        .unwrap_or(f64::INFINITY);
    // closed form without cancellation: accurate arbitrarily far out
    let radial = RadialProfile::custom(n, r0, 1.0, tail, dev)?.with_min_reliable_t(1e-30);
    let areal = RadialProfile::constant(n, r0, 1.0)?.with_min_reliable_t(1e-30);
    RadialMetric::warped_product(n, r0, radial, areal, lead.min(64.0), scalar_decay)
}

/// Deterministic family of warped-product metrics from [`areal_mass_profile`]
/// with `R >= 0`: mass `m` in `[-0.5, 1] r0^(n-2)` (capped so the chart stays
/// regular) and one or two decreasing corrections to the mass function.
pub fn sample_areal_family(seed: u64, count: usize, dimensions: &[usize]) -> Result<Vec<RadialMetric>> {
    if dimensions.is_empty() {
        return Err(Error::InvalidParameter("no dimensions to sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = dimensions[rng.random_range(0..dimensions.len())];
            let s = (n - 2) as f64;
            let r0: f64 = rng.random_range(0.5..=2.0);
            let scale = r0.powf(s);
            let m: f64 = rng.random_range(-0.5..=1.0) * scale;
            let extra = rng.random_range(1..=2);
            let terms: Vec<PowerTerm> = (0..extra)
                .map(|_| {
                    let p: f64 = rng.random_range(1.0..=3.0);
                    let a = rng.random_range(0.05..=0.4) * scale * r0.powf(p);
                    PowerTerm::new(a, p)
                })
                .collect();
            // keep 2 mu(r0) <= 0.8 r0^s; mu is increasing, so this bounds F below
            let m = m.min(0.4 * scale);
            areal_mass_profile(n, m, r0, &terms)
        })
        .collect()
}
