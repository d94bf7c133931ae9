//! The conformal change `((1 + phi)/2)^(4/(n-2)) g` that lowers the mass by
//! the capacity constant.

use pmtb::elliptic::solve_harmonic_with_boundary;
use pmtb::geometry::{sample_metric_family, schwarzschild, FamilyRanges};
use pmtb::theorems::{reduce_to_corollary, schwarzschild_equality_constant};

fn main() -> pmtb::Result<()> {
    let mut cases = vec![(schwarzschild(3, 1.0, 1.0)?, schwarzschild_equality_constant(3, 1.0, 1.0)?)];
    for (i, g) in sample_metric_family(5, 4, &[3, 4, 5], FamilyRanges::default())?.into_iter().enumerate() {
        cases.push((g, [-0.5, 0.0, 0.5, 2.0][i]));
    }
    for (g, c) in &cases {
        let phi = solve_harmonic_with_boundary(g, *c)?;
        let red = reduce_to_corollary(g, &phi, *c)?;
        println!(
            "n={} c={c:<8.4}: m {:+.10}, C {:+.10}, reduced mass {:+.10}, identity gap {:.1e}, harmonic residual {:.1e}",
            g.dimension(),
            red.mass,
            red.capacity_constant,
            red.reduced_mass,
            red.mass_identity_gap(),
            red.harmonic_residual
        );
    }
    Ok(())
}
