//! The boundary conditions and mass bounds on one Schwarzschild exterior,
//! including the equality constant for which both margins vanish.

use pmtb::geometry::schwarzschild;
use pmtb::theorems::{
    check_corollary, check_equivalent_form, check_mass_capacity, check_theorem_main, schwarzschild_equality_constant,
    Verdict,
};

fn show(v: &Verdict) {
    println!(
        "{:<16} c={:<20} condition {:+.6e}  mass {:.10}  bound {:+.10}  conclusion {:+.3e}",
        v.theorem_id.label(),
        v.c.map(|c| c.to_string()).unwrap_or_else(|| "-".into()),
        v.condition_margin,
        v.mass,
        v.capacity_constant,
        v.conclusion_margin
    );
}

fn main() -> pmtb::Result<()> {
    let (n, m, r0) = (3, -1.0, 1.0);
    let g = schwarzschild(n, m, r0)?;
    show(&check_theorem_main(&g)?);
    show(&check_corollary(&g)?);
    show(&check_equivalent_form(&g, 0.0)?);
    let c = schwarzschild_equality_constant(n, m, r0)?;
    show(&check_mass_capacity(&g, c)?);
    show(&check_equivalent_form(&g, c)?);
    for c in [0.5, 2.0, 4.0] {
        show(&check_mass_capacity(&g, c)?);
    }
    Ok(())
}
