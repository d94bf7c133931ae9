//! Conformal and harmonic Green's functions of a Schwarzschild exterior,
//! compared with the closed form `(2 r0^s + m) / (2 r^s + m)`.

use pmtb::elliptic::{solve_conformal_green, solve_harmonic_green};
use pmtb::geometry::schwarzschild;

fn main() -> pmtb::Result<()> {
    let (n, m, r0) = (3, 1.0, 1.0);
    let g = schwarzschild(n, m, r0)?;
    let u = solve_conformal_green(&g)?;
    let v = solve_harmonic_green(&g)?;
    println!("residuals: u {:.1e}, v {:.1e}", u.residual_norm, v.residual_norm);
    println!("{:>10} {:>20} {:>20} {:>20}", "r", "u", "v", "closed form");
    for r in [1.0, 1.5, 2.0, 4.0, 10.0, 100.0, 1e4] {
        let exact = (2.0 * r0 + m) / (2.0 * r + m);
        println!("{r:>10} {:>20.15} {:>20.15} {exact:>20.15}", u.value(r), v.value(r));
    }
    println!("expansion constant D = {:.12} (expected {})", u.expansion_constant, (2.0 * r0 + m) / 2.0);
    println!("normal derivative at the boundary: {:.12}", u.normal_derivative_at_boundary);
    Ok(())
}
