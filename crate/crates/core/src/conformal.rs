//! Conformal change formulas, the conformal fill-in glued along the boundary
//! sphere, and diagnostics of the fill-in at its compactified point in
//! inverted coordinates `y = x / |x|^2`.

use crate::elliptic::{BVPSolution, ProblemKind};
use crate::error::{Error, Result};
use crate::geometry::{mean_curvature_sphere, radial_laplacian, scalar_curvature, RadialMetric, RadialProfile};
use crate::numerics::extrapolation::decay_order_fit;

/// Absolute tolerance on mean-curvature margins at the corner.
pub const CORNER_TOLERANCE: f64 = 1e-8;

/// Largest BVP residual accepted when building a fill-in.
pub const FILL_IN_RESIDUAL_LIMIT: f64 = 1e-8;

/// Scalar curvature of `u^(4/(n-2)) g` from the scalar curvature `r` of `g`
/// and `(u, Delta_g u)`.
pub fn conformal_scalar_curvature(r: f64, factor: (f64, f64), n: usize) -> f64 {
    let s = (n - 2) as f64;
    let (u, lap) = factor;
    let w = u.powf(-4.0 / s);
    w * r - (4.0 * (n as f64 - 1.0) / s) * w / u * lap
}

/// Mean curvature of a hypersurface after the change `g -> u^(4/(n-2)) g`.
///
/// `grad_nu_u` is taken along the unit normal of `g` used for `h`. Without
/// `flip_normal` the result is measured along the same direction; with it,
/// along the opposite one, as seen from the fill-in side.
pub fn conformal_mean_curvature(h: f64, u_at_sigma: f64, grad_nu_u: f64, n: usize, flip_normal: bool) -> f64 {
    let s = (n - 2) as f64;
    let nm1 = n as f64 - 1.0;
    let same = u_at_sigma.powf(-2.0 / s) * h + (2.0 * nm1 / s) * u_at_sigma.powf(-(n as f64) / s) * grad_nu_u;
    if flip_normal {
        -same
    } else {
        same
    }
}

/// Metric coefficients in the inverted chart at `|y| = eta`.
///
/// By radial symmetry `h_ij` has a radial eigenvalue `a^2 eta^-4` and a
/// tangential one `b^2 eta^-4` (multiplicity `n-1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KelvinSample {
    pub eta: f64,
    pub h_radial: f64,
    pub h_tangential: f64,
    /// `max |h - eta^-4 delta|` over the eigenvalues.
    pub deviation: f64,
    /// Eigenvalues of `u^(4/(n-2)) h_ij`.
    pub weighted_radial: f64,
    pub weighted_tangential: f64,
    /// `max(|d lambda_rad/d eta|, |d lambda_tan/d eta|, |lambda_rad - lambda_tan| / eta)`
    /// for the weighted eigenvalues, bounding `|d(u^(4/(n-2)) h)|`.
    pub weighted_derivative: f64,
}

/// Samples `h_ij = g(d_i x, d_j x)` and `u^(4/(n-2)) h_ij` on the sphere
/// `|y| = eta`, where `x = y / |y|^2`.
pub fn kelvin_coefficients(metric: &RadialMetric, u: &BVPSolution, eta: f64) -> Result<KelvinSample> {
    let r0 = metric.boundary_radius();
    if !(eta > 0.0) || eta * r0 >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "|y| = {eta} must lie in (0, 1/r0) = (0, {})",
            1.0 / r0
        )));
    }
    let s = metric.exponent();
    let r = 1.0 / eta;
    let w = metric.jets(r)?;
    let a = w.a();
    let b = w.b();
    let eta4 = eta.powi(-4);
    // deviation accuracy matters here: a^2 - 1 = da (2 + da)
    let dev_rad = w.da.value * (2.0 + w.da.value);
    let dev_tan = w.db.value * (2.0 + w.db.value);

    // (u r^s)^(4/s) = weight; log-derivatives in r
    let uj = u.function.jet(r);
    let ur = uj.value * r.powf(s);
    let weight = ur.powf(4.0 / s);
    let dlog_ur = uj.d1 / uj.value + s / r;
    let lam_rad = weight * a.value * a.value;
    let lam_tan = weight * b.value * b.value;
    // d/d eta = -r^2 d/dr
    let d_rad = -r * r * lam_rad * ((4.0 / s) * dlog_ur + 2.0 * a.d1 / a.value);
    let d_tan = -r * r * lam_tan * ((4.0 / s) * dlog_ur + 2.0 * b.d1 / b.value);
    let aniso = (lam_rad - lam_tan).abs() / eta;
    Ok(KelvinSample {
        eta,
        h_radial: eta4 * (1.0 + dev_rad),
        h_tangential: eta4 * (1.0 + dev_tan),
        deviation: eta4 * dev_rad.abs().max(dev_tan.abs()),
        weighted_radial: lam_rad,
        weighted_tangential: lam_tan,
        weighted_derivative: d_rad.abs().max(d_tan.abs()).max(aniso),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KelvinReport {
    pub samples: Vec<KelvinSample>,
    /// Fitted `e` in `|h - |y|^-4 delta| ~ |y|^e`; compare with `tau - 4`.
    pub deviation_exponent: f64,
    /// Fitted `e` in `|d(u^(4/(n-2)) h)| ~ |y|^e`; `INFINITY` when the
    /// weighted metric is constant to roundoff. Compare with `gamma - n + 1`.
    pub derivative_exponent: f64,
    /// Relative distance of the weighted eigenvalues at the smallest sampled
    /// `|y|` from their limit `D^(4/(n-2))`.
    pub continuity_gap: f64,
    /// Largest `p` (capped) for which the dyadic-shell sum of
    /// `|d(u^(4/(n-2)) h)|^p |y|^n` converges; `INFINITY` past the cap.
    pub sobolev_exponent_estimate: f64,
    pub claimed_deviation_order: f64,
    pub claimed_derivative_order: f64,
}

impl KelvinReport {
    /// Fitted exponents meet the claimed orders within `slack`, and `p > n`.
    pub fn meets_claims(&self, n: usize, slack: f64) -> bool {
        self.deviation_exponent >= self.claimed_deviation_order - slack
            && self.derivative_exponent >= self.claimed_derivative_order - slack
            && self.sobolev_exponent_estimate > n as f64
    }
}

/// The glued manifold: `(M, g)` outside, the compactification of
/// `(M, u^(4/(n-2)) g)` inside, meeting along the boundary sphere.
#[derive(Debug, Clone)]
pub struct FillIn {
    pub exterior: RadialMetric,
    pub interior_factor: RadialProfile,
    pub green: BVPSolution,
    /// `(H, H~)` at the corner, both along the normal pointing from the
    /// fill-in into the exterior.
    pub corner: (f64, f64),
    /// Largest `|R~|` over sampled radii, relative to the size of the terms
    /// making it up (zero for an exact Green's function).
    pub interior_scalar_residual: f64,
    pub compactified_point_report: KelvinReport,
}

/// Decay rate of the remainder in the expansion of the Green's function:
/// `gamma = min(q - 2, n + tau - 2, n - 1)`.
pub fn remainder_order(metric: &RadialMetric) -> f64 {
    let n = metric.dimension() as f64;
    (metric.scalar_decay_order() - 2.0)
        .min(n + metric.decay_order() - 2.0)
        .min(n - 1.0)
}

pub fn build_fill_in(metric: &RadialMetric, u: &BVPSolution) -> Result<FillIn> {
    if u.kind != ProblemKind::ConformalGreen {
        return Err(Error::InvalidParameter(
            "the fill-in needs the conformal Green's function".into(),
        ));
    }
    if u.residual_norm > FILL_IN_RESIDUAL_LIMIT || (u.boundary_radius() - metric.boundary_radius()).abs() > 0.0 {
        return Err(Error::SolverFailure(format!(
            "not a valid conformal Green's function for this metric (residual {:e})",
            u.residual_norm
        )));
    }
    let n = metric.dimension();
    let s = metric.exponent();
    let r0 = metric.boundary_radius();
    let u0 = u.value(r0);
    if (u0 - 1.0).abs() > 1e-12 {
        return Err(Error::SolverFailure(format!("u = {u0} on the boundary, expected 1")));
    }
    let h = mean_curvature_sphere(metric, r0)?;
    let h_fill = conformal_mean_curvature(h, 1.0, u.normal_derivative_at_boundary, n, true);

    // R~ = u^(-4/s) (R - Delta u / (k u)); compared with the size of its two
    // terms and the curvature scale of the sphere
    let kappa = s / (4.0 * (n as f64 - 1.0));
    let t_min = metric.min_reliable_t().max(1e-6);
    let mut interior = 0.0f64;
    for k in 0..=240 {
        let t = if k <= 120 {
            1.0 - k as f64 / 160.0
        } else {
            0.25 * (t_min / 0.25).powf((k - 120) as f64 / 120.0)
        };
        let r = metric.r_of(t);
        let uj = u.function.jet(r);
        let lap = radial_laplacian(metric, r, uj)?;
        let rc = scalar_curvature(metric, r)?;
        let rho = metric.jets(r)?.rho().value;
        let from_u = lap / (kappa * uj.value);
        let scale = rc.abs() + from_u.abs() + rho.powi(-2);
        interior = interior.max((rc - from_u).abs() / scale);
    }

    let report = kelvin_report(metric, u)?;
    Ok(FillIn {
        exterior: metric.clone(),
        interior_factor: u.function.clone(),
        green: u.clone(),
        corner: (h, h_fill),
        interior_scalar_residual: interior,
        compactified_point_report: report,
    })
}

/// Recomputes the Kelvin diagnostics of a fill-in near its compactified point.
pub fn fill_in_regularity_diagnostic(fill_in: &FillIn) -> Result<KelvinReport> {
    kelvin_report(&fill_in.exterior, &fill_in.green)
}

fn kelvin_report(metric: &RadialMetric, u: &BVPSolution) -> Result<KelvinReport> {
    let n = metric.dimension();
    let s = metric.exponent();
    let r0 = metric.boundary_radius();
    let t_min = metric.min_reliable_t().max(u.function.min_reliable_t()).max(1e-12);
    let mut samples = Vec::new();
    for k in 2..=60 {
        let eta = 2f64.powi(-k) / r0;
        if (eta * r0).powf(s) < t_min {
            break;
        }
        samples.push(kelvin_coefficients(metric, u, eta)?);
    }
    if samples.len() < 6 {
        return Err(Error::FitRefused("too few reliable samples near the compactified point".into()));
    }
    let lim = u.expansion_constant.powf(4.0 / s);
    let far = &samples[samples.len().saturating_sub(12)..];

    let dev: Vec<(f64, f64)> = far.iter().map(|k| (k.eta, k.deviation)).collect();
    let deviation_exponent = if dev.iter().any(|&(_, d)| d == 0.0) {
        f64::INFINITY
    } else {
        -decay_order_fit(&dev)?.exponent
    };

    // roundoff in d/d eta grows like r: 1e-11 relative per unit of s / eta
    let floor = |eta: f64| 1e-11 * lim * s / eta;
    let der: Vec<(f64, f64)> = far
        .iter()
        .filter(|k| k.weighted_derivative > floor(k.eta))
        .map(|k| (k.eta, k.weighted_derivative))
        .collect();
    let derivative_exponent = if der.len() < 4 {
        f64::INFINITY
    } else {
        -decay_order_fit(&der)?.exponent
    };

    let last = samples.last().expect("nonempty");
    let continuity_gap = ((last.weighted_radial - lim).abs()).max((last.weighted_tangential - lim).abs()) / lim;

    let sobolev_exponent_estimate = sobolev_exponent(&der, n);

    let gamma = remainder_order(metric);
    Ok(KelvinReport {
        samples,
        deviation_exponent,
        derivative_exponent,
        continuity_gap,
        sobolev_exponent_estimate,
        claimed_deviation_order: metric.decay_order() - 4.0,
        claimed_derivative_order: gamma - n as f64 + 1.0,
    })
}

/// Bisects on `p` for convergence of `sum_k m_k^p eta_k^n` over dyadic shells,
/// judged by the mean log-ratio of the given tail contributions.
fn sobolev_exponent(tail: &[(f64, f64)], n: usize) -> f64 {
    const CAP: f64 = 1e3;
    if tail.len() < 4 {
        return f64::INFINITY;
    }
    let converges = |p: f64| {
        let logs: Vec<f64> = tail.iter().map(|&(e, m)| p * m.ln() + n as f64 * e.ln()).collect();
        let mean_step = (logs[logs.len() - 1] - logs[0]) / (logs.len() - 1) as f64;
        mean_step < 0.0
    };
    if converges(CAP) {
        return f64::INFINITY;
    }
    let (mut lo, mut hi) = (1.0, CAP);
    if !converges(lo) {
        return 0.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if converges(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `H~ - H >= -tolerance` at the corner; the margin is `H~ - H`.
pub fn corner_condition(fill_in: &FillIn) -> (bool, f64) {
    let margin = fill_in.corner.1 - fill_in.corner.0;
    (margin >= -CORNER_TOLERANCE, margin)
}

/// The glued function `u` outside and `1/u` inside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GluedHarmonicReport {
    /// `|nabla_nu u - nabla_nu~ (1/u)|` at the corner.
    pub normal_derivative_gap: f64,
    /// Largest `|Delta_g~ (1/u)| rho~^2` over sampled radii of the fill-in.
    pub interior_laplacian: f64,
}

/// Checks that `u` outside and `1/u` inside match to first order across the
/// corner and that `1/u` is harmonic for the fill-in metric (which holds when
/// the exterior is scalar flat).
pub fn glued_harmonic_report(fill_in: &FillIn) -> Result<GluedHarmonicReport> {
    let g = &fill_in.exterior;
    let n = g.dimension() as f64;
    let s = g.exponent();
    let r0 = g.boundary_radius();
    let uj = fill_in.interior_factor.jet(r0);
    let a0 = g.jets(r0)?.a().value;
    // the fill-in's normal is -nu, with length scale u^(2/s) a
    let a_fill = uj.value.powf(2.0 / s) * a0;
    let inv_d1 = -uj.d1 / (uj.value * uj.value);
    let grad_fill = -inv_d1 / a_fill;
    let gap = (fill_in.green.normal_derivative_at_boundary - grad_fill).abs();

    let mut worst = 0.0f64;
    for k in 0..=100 {
        let t = 1.0 - 0.99 * k as f64 / 100.0;
        let r = g.r_of(t);
        let w = g.jets(r)?;
        let u = fill_in.interior_factor.jet(r);
        let c = u.powf(2.0 / s);
        let a = w.a() * c;
        let rho = w.rho() * c;
        let f = u.recip();
        let lap = (f.d2 + ((n - 1.0) * rho.d1 / rho.value - a.d1 / a.value) * f.d1) / (a.value * a.value);
        worst = worst.max((lap * rho.value * rho.value / f.value).abs());
    }
    Ok(GluedHarmonicReport {
        normal_derivative_gap: gap,
        interior_laplacian: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::solve_conformal_green;
    use crate::geometry::{areal_schwarzschild, flat, power_sum_metric, schwarzschild, PowerTerm};

    #[test]
    fn identity_transform() {
        assert_eq!(conformal_scalar_curvature(0.7, (1.0, 0.0), 4), 0.7);
        assert_eq!(conformal_mean_curvature(1.3, 1.0, 0.0, 3, false), 1.3);
        let h = 2.0;
        let g = -0.8;
        let flipped = conformal_mean_curvature(h, 1.0, g, 5, true);
        assert!((flipped - (-h - 2.0 * 4.0 / 3.0 * g)).abs() < 1e-15);
    }

    #[test]
    fn double_transform_returns_original() {
        let (n, s) = (4usize, 2.0f64);
        let (h, u, du, a) = (1.7, 1.9, -0.6, 1.3);
        let h1 = conformal_mean_curvature(h, u, du / a, n, false);
        // along the new unit normal, d(1/u) = -du/u^2, divided by the new length scale
        let d_inv = -du / (u * u) / (u.powf(2.0 / s) * a);
        let h2 = conformal_mean_curvature(h1, 1.0 / u, d_inv, n, false);
        assert!((h2 - h).abs() < 1e-12);
    }

    #[test]
    fn schwarzschild_formula_matches_direct_mean_curvature() {
        for (n, m, r0) in [(3, 2.0, 2.0), (4, -1.0, 1.0), (5, 0.7, 1.3)] {
            let g = schwarzschild(n, m, r0).unwrap();
            let u = g.conformal_factor().unwrap().jet(r0);
            let via_change = conformal_mean_curvature((n as f64 - 1.0) / r0, u.value, u.d1, n, false);
            assert!((via_change - mean_curvature_sphere(&g, r0).unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn flat_fill_in_is_rigid() {
        for n in [3, 4, 5] {
            let g = flat(n, 1.5).unwrap();
            let u = solve_conformal_green(&g).unwrap();
            let f = build_fill_in(&g, &u).unwrap();
            let (holds, margin) = corner_condition(&f);
            assert!(holds && margin.abs() < 1e-10, "{margin}");
            assert!(f.interior_scalar_residual < 1e-8);
            let glued = glued_harmonic_report(&f).unwrap();
            assert!(glued.normal_derivative_gap < 1e-10);
            assert!(glued.interior_laplacian < 1e-8, "{glued:?}");
            assert_eq!(f.compactified_point_report.deviation_exponent, f64::INFINITY);
        }
    }

    #[test]
    fn schwarzschild_fill_in_is_a_flat_ball() {
        let (n, m, r0) = (3, 2.0, 1.5);
        let g = schwarzschild(n, m, r0).unwrap();
        let u = solve_conformal_green(&g).unwrap();
        let f = build_fill_in(&g, &u).unwrap();
        let u0 = 1.0 + m / (2.0 * r0);
        assert!((f.corner.1 - 2.0 / (r0 * u0 * u0)).abs() < 1e-9);
        assert!(f.interior_scalar_residual < 1e-8, "{}", f.interior_scalar_residual);
        let rep = &f.compactified_point_report;
        assert!((rep.deviation_exponent - (1.0 - 4.0)).abs() < 0.1, "{rep:?}");
        assert!(rep.meets_claims(n, 0.1));
    }

    #[test]
    fn areal_chart_kelvin_exponents() {
        let g = areal_schwarzschild(3, 0.5, 1.5).unwrap();
        let u = solve_conformal_green(&g).unwrap();
        let f = build_fill_in(&g, &u).unwrap();
        let rep = &f.compactified_point_report;
        assert!(rep.derivative_exponent.is_finite());
        assert!(rep.meets_claims(3, 0.1), "{:?}", (rep.deviation_exponent, rep.derivative_exponent, rep.sobolev_exponent_estimate));
        assert!(rep.continuity_gap < 1e-3);
    }

    #[test]
    fn shrinking_the_boundary_breaks_the_corner_condition() {
        // U = 1 - 0.5 r^-2 in n = 3: at r0 = 1 the sphere is nearly minimal,
        // far out it is almost round and the margin is positive
        let terms = [PowerTerm::new(-0.5, 2.0)];
        let inside = power_sum_metric(3, 0.75, &terms).unwrap();
        let f = build_fill_in(&inside, &solve_conformal_green(&inside).unwrap()).unwrap();
        let outside = power_sum_metric(3, 3.0, &terms).unwrap();
        let f2 = build_fill_in(&outside, &solve_conformal_green(&outside).unwrap()).unwrap();
        let (h1, m1) = corner_condition(&f);
        let (_, m2) = corner_condition(&f2);
        assert!(m1 < m2);
        assert!(h1 || m1 < 0.0);
    }
}
