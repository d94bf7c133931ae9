//! Mass-capacity checks over a seeded family of metrics with `R >= 0`:
//! whenever the boundary condition holds, so does the mass bound.

use pmtb::geometry::{sample_areal_family, sample_metric_family, FamilyRanges};
use pmtb::theorems::{check_mass_capacity, Tolerances};
use rayon::prelude::*;

fn main() -> pmtb::Result<()> {
    let mut metrics = sample_metric_family(1, 120, &[3, 4, 5], FamilyRanges::default())?;
    metrics.extend(sample_areal_family(1, 80, &[3, 4, 5])?);
    let cs = [-0.5, 0.0, 0.5, 0.9, 2.0];
    let tol = Tolerances::default();
    let verdicts: Vec<_> = metrics
        .par_iter()
        .flat_map_iter(|g| cs.iter().map(move |&c| check_mass_capacity(g, c)))
        .collect::<pmtb::Result<_>>()?;
    let holds = verdicts.iter().filter(|v| v.hypothesis_holds(&tol)).count();
    let contradictions = verdicts.iter().filter(|v| v.contradicts_theorem(&tol)).count();
    let tightest = verdicts
        .iter()
        .filter(|v| v.hypothesis_holds(&tol))
        .map(|v| v.conclusion_margin)
        .fold(f64::INFINITY, f64::min);
    println!("{} instances, {holds} satisfy the boundary condition", verdicts.len());
    println!("smallest conclusion margin among those: {tightest:.6e}");
    println!("contradictions: {contradictions}");
    Ok(())
}
