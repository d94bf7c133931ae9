//! Scalar and mean curvature after a conformal change, checked against the
//! curvature of the changed metric computed directly.

use pmtb::conformal::{conformal_mean_curvature, conformal_scalar_curvature};
use pmtb::geometry::{mean_curvature_sphere, power_sum_metric, radial_laplacian, scalar_curvature, PowerTerm};
use pmtb::numerics::Jet;

fn main() -> pmtb::Result<()> {
    let n = 4;
    let base = power_sum_metric(n, 1.0, &[PowerTerm::new(0.5, 2.0)])?;
    // u = 1 - 0.3 r^-3, so the changed metric has U = (1 + 0.5 r^-2)(1 - 0.3 r^-3)
    let changed = power_sum_metric(n, 1.0, &[PowerTerm::new(0.5, 2.0), PowerTerm::new(-0.3, 3.0), PowerTerm::new(-0.15, 5.0)])?;
    for r in [1.0f64, 1.5, 3.0] {
        let x = -0.3 * r.powi(-3);
        let u = Jet::new(1.0 + x, -3.0 * x / r, 12.0 * x / (r * r));
        let lap = radial_laplacian(&base, r, u)?;
        let formula = conformal_scalar_curvature(scalar_curvature(&base, r)?, (u.value, lap), n);
        let a = base.jets(r)?.a().value;
        let h = conformal_mean_curvature(mean_curvature_sphere(&base, r)?, u.value, u.d1 / a, n, false);
        println!(
            "r={r}: R formula {formula:+.12e} direct {:+.12e} | H formula {h:.12} direct {:.12}",
            scalar_curvature(&changed, r)?,
            mean_curvature_sphere(&changed, r)?
        );
    }
    Ok(())
}
