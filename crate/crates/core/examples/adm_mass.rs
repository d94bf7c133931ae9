//! ADM mass by extrapolation of the mass aspect over dyadic radii.

use pmtb::geometry::{adm_mass, areal_mass_profile, schwarzschild, PowerTerm};

fn main() -> pmtb::Result<()> {
    for (n, m) in [(3, 2.0), (4, -0.5), (5, 1.0)] {
        let est = adm_mass(&schwarzschild(n, m, 1.0)?)?;
        println!("schwarzschild n={n} m={m}: mass {:.15} (error {:.1e})", est.mass, est.error);
    }
    // areal chart with mass function m - a/r: the mass is the limit m
    let g = areal_mass_profile(3, 0.4, 1.5, &[PowerTerm::new(0.2, 1.0)])?;
    let est = adm_mass(&g)?;
    println!(
        "areal profile: mass {:.12} (error {:.1e}, leading correction order {:?})",
        est.mass, est.error, est.correction_order
    );
    Ok(())
}
