//! Turning the boundary into a minimal surface with the harmonic Green's
//! function, and a family on which the result is exactly minimal.

use pmtb::geometry::schwarzschild;
use pmtb::theorems::{conformal_minimal_boundary_check, minimal_boundary_equality_model};

fn main() -> pmtb::Result<()> {
    for m in [-0.5, 0.0, 1.0] {
        let rep = conformal_minimal_boundary_check(&schwarzschild(3, m, 1.0)?)?;
        println!(
            "schwarzschild m={m:+}: identity residual {:.1e}, H~ = {:+.10}, formula gap {:.1e}",
            rep.identity_residual, rep.h_tilde, rep.h_tilde_formula_gap
        );
    }
    // a horizon boundary, conformally rescaled so that equality holds
    let base = schwarzschild(3, 2.0, 1.0)?;
    let model = minimal_boundary_equality_model(&base)?;
    let rep = conformal_minimal_boundary_check(&model)?;
    println!(
        "equality model: H~ = {:+.3e}, boundary equality gap {:+.3e}",
        rep.h_tilde, rep.boundary_equality_gap
    );
    Ok(())
}
