//! The conformal fill-in of an exterior and its behaviour at the
//! compactified point, in inverted coordinates.

use pmtb::conformal::{build_fill_in, corner_condition, glued_harmonic_report};
use pmtb::elliptic::solve_conformal_green;
use pmtb::geometry::{areal_mass_profile, PowerTerm};

fn main() -> pmtb::Result<()> {
    let g = areal_mass_profile(4, 0.5, 1.5, &[PowerTerm::new(0.2, 1.0), PowerTerm::new(0.1, 2.5)])?;
    let u = solve_conformal_green(&g)?;
    let f = build_fill_in(&g, &u)?;
    let (holds, margin) = corner_condition(&f);
    println!("corner: H = {:.10}, H~ = {:.10}, margin {margin:+.3e} ({holds})", f.corner.0, f.corner.1);
    println!("interior scalar curvature residual: {:.2e}", f.interior_scalar_residual);
    let glued = glued_harmonic_report(&f)?;
    println!("glued u / (1/u): normal derivative gap {:.2e}", glued.normal_derivative_gap);

    let k = &f.compactified_point_report;
    println!("|y|        deviation        weighted derivative");
    for s in k.samples.iter().step_by(4) {
        println!("{:<10.3e} {:<16.6e} {:.6e}", s.eta, s.deviation, s.weighted_derivative);
    }
    println!(
        "deviation exponent {:.3} (claim {:.3}), derivative exponent {:.3} (claim {:.3}), Sobolev exponent {}",
        k.deviation_exponent,
        k.claimed_deviation_order,
        k.derivative_exponent,
        k.claimed_derivative_order,
        k.sobolev_exponent_estimate
    );
    Ok(())
}
