use super::metric::{MetricForm, RadialMetric, WarpJets};
use crate::error::{Error, Result};
use crate::numerics::{richardson, Jet};

/// Relative tolerance on the extrapolated ADM mass.
pub const MASS_REL_TOL: f64 = 1e-8;

/// Scalar curvature of `U^(4/(n-2)) delta` from the radial Euclidean Laplacian of `U`.
pub fn conformally_flat_scalar_curvature(n: usize, r: f64, u: Jet) -> f64 {
    let s = (n - 2) as f64;
    let lap = u.d2 + (n as f64 - 1.0) * u.d1 / r;
    -(4.0 * (n as f64 - 1.0) / s) * u.value.powf(-(n as f64 + 2.0) / s) * lap
}

/// Scalar curvature of `a^2 dr^2 + (r b)^2 g_round`.
///
/// With `sigma` the arclength along radial lines and `rho = r b`,
/// `R = -2(n-1) rho_ss / rho + (n-1)(n-2)(1 - rho_s^2) / rho^2`.
pub fn warped_scalar_curvature(n: usize, w: &WarpJets) -> f64 {
    let nf = n as f64;
    let r = w.r;
    let a = w.a();
    let b = w.b();
    let rho = w.rho();
    let rho_ss = (rho.d2 * a.value - rho.d1 * a.d1) / a.value.powi(3);
    // 1 - rho_s^2 = (a - rho')(a + rho') / a^2, with a - rho' = (a-1) - (b-1) - r b'
    let gap = w.da.value - w.db.value - r * b.d1;
    let one_minus = gap * (a.value + rho.d1) / (a.value * a.value);
    -2.0 * (nf - 1.0) * rho_ss / rho.value + (nf - 1.0) * (nf - 2.0) * one_minus / (rho.value * rho.value)
}

/// Scalar curvature at radius `r`.
pub fn scalar_curvature(metric: &RadialMetric, r: f64) -> Result<f64> {
    metric.check_radius(r)?;
    Ok(match metric.form() {
        MetricForm::ConformallyFlat { factor } => {
            conformally_flat_scalar_curvature(metric.dimension(), r, factor.jet(r))
        }
        MetricForm::WarpedProduct { .. } => warped_scalar_curvature(metric.dimension(), &metric.jets(r)?),
    })
}

/// Mean curvature of the coordinate sphere of radius `r` with respect to the
/// normal pointing to infinity: `H = (n-1) rho' / (a rho)`.
pub fn mean_curvature_sphere(metric: &RadialMetric, r: f64) -> Result<f64> {
    let w = metric.jets(r)?;
    let rho = w.rho();
    Ok((metric.dimension() as f64 - 1.0) * rho.d1 / (w.a().value * rho.value))
}

/// Laplacian of a radial function with jet `f` (in `r`):
/// `(f'' + ((n-1) rho'/rho - a'/a) f') / a^2`.
pub fn radial_laplacian(metric: &RadialMetric, r: f64, f: Jet) -> Result<f64> {
    let w = metric.jets(r)?;
    let a = w.a();
    let rho = w.rho();
    let nm1 = metric.dimension() as f64 - 1.0;
    Ok((f.d2 + (nm1 * rho.d1 / rho.value - a.d1 / a.value) * f.d1) / (a.value * a.value))
}

/// Length of `d/dr` in the metric, i.e. `a(r)`.
pub fn radial_scale(metric: &RadialMetric, r: f64) -> Result<f64> {
    Ok(metric.jets(r)?.a().value)
}

/// Samples scalar curvature on a compactified grid and returns the minimum
/// together with the radius where it occurs.
pub fn min_scalar_curvature(metric: &RadialMetric, samples: usize) -> Result<(f64, f64)> {
    let mut worst = (f64::INFINITY, metric.boundary_radius());
    for k in 0..samples {
        let t = 1.0 - k as f64 / samples as f64;
        let r = metric.r_of(t);
        let rc = scalar_curvature(metric, r)?;
        if rc < worst.0 {
            worst = (rc, r);
        }
    }
    Ok(worst)
}

/// Rejects metrics with negative scalar curvature (beyond roundoff) at any
/// sampled radius.
pub fn require_nonnegative_scalar(metric: &RadialMetric) -> Result<()> {
    let (min_r, at) = min_scalar_curvature(metric, 400)?;
    let scale = metric.boundary_radius().powi(-2);
    if min_r < -1e-10 * scale {
        return Err(Error::NegativeScalarCurvature {
            radius: at,
            value: min_r,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassEstimate {
    pub mass: f64,
    pub error: f64,
    /// Fitted order (in powers of r) of the leading correction to the mass
    /// sequence, when one was eliminated.
    pub correction_order: Option<f64>,
}

/// Radii `r0 * 2^k` on which the far-field samples stay reliable.
pub(crate) fn far_field_radii(metric: &RadialMetric) -> Vec<f64> {
    let s = metric.exponent();
    let kmax = ((1.0 / metric.min_reliable_t()).log2() / s).floor().clamp(8.0, 48.0) as i32;
    (0..=kmax)
        .map(|k| metric.boundary_radius() * 2f64.powi(k))
        .collect()
}

/// Flux-integral mass aspect at radius `r`:
/// `(r^(n-2)/2) [ (a^2 - b^2) - r (b^2)' ]`.
pub fn mass_aspect(metric: &RadialMetric, r: f64) -> Result<f64> {
    let w = metric.jets(r)?;
    let s = metric.exponent();
    let a = w.a().value;
    let b = w.b();
    Ok(0.5 * r.powf(s) * ((w.da.value - w.db.value) * (a + b.value) - 2.0 * r * b.value * b.d1))
}

/// ADM mass by Richardson extrapolation over dyadic radii.
///
/// Conformally flat metrics use `2 r^(n-2) (U - 1)`; warped products use the
/// flux integral of `g_ij,j - g_jj,i`. The normalization returns `m` for
/// the Schwarzschild metric with parameter `m`.
pub fn adm_mass(metric: &RadialMetric) -> Result<MassEstimate> {
    let s = metric.exponent();
    let tail_ok = |exp: f64, coef: f64| exp >= s - 1e-12 || coef == 0.0;
    match metric.form() {
        MetricForm::ConformallyFlat { factor } => {
            let t = factor.tail();
            if !tail_ok(t.exponent, t.coefficient) {
                return Err(Error::InsufficientDecay(format!(
                    "conformal factor decays like r^(-{}), slower than r^(-(n-2))",
                    t.exponent
                )));
            }
        }
        MetricForm::WarpedProduct {
            radial,
            areal_ratio,
        } => {
            for p in [radial, areal_ratio] {
                let t = p.tail();
                if !tail_ok(t.exponent, t.coefficient) {
                    return Err(Error::InsufficientDecay(format!(
                        "metric coefficient decays like r^(-{})",
                        t.exponent
                    )));
                }
            }
        }
    }
    let radii = far_field_radii(metric);
    let seq: Vec<f64> = match metric.form() {
        MetricForm::ConformallyFlat { factor } => radii
            .iter()
            .map(|&r| 2.0 * r.powf(s) * factor.deviation(r).value)
            .collect(),
        MetricForm::WarpedProduct { .. } => radii
            .iter()
            .map(|&r| mass_aspect(metric, r))
            .collect::<Result<_>>()?,
    };
    let ex = richardson(&seq, 2.0)?;
    let tol = MASS_REL_TOL * ex.limit.abs().max(metric.boundary_radius().powf(s));
    if ex.error > tol {
        return Err(Error::NonConvergentExtrapolation {
            estimate: ex.limit,
            error: ex.error,
            tolerance: tol,
        });
    }
    Ok(MassEstimate {
        mass: ex.limit,
        error: ex.error,
        correction_order: ex.leading_order(),
    })
}
