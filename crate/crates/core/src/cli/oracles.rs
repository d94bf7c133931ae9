//! Closed-form oracle suite behind `validate-oracles`.

use crate::elliptic::{solve_conformal_green, solve_harmonic_green, BVPSolution};
use crate::error::Result;
use crate::geometry::{adm_mass, flat, power_sum_metric, random_nonneg_scalar_metric, schwarzschild, PowerTerm};
use crate::theorems::conformal_minimal_boundary_check;

/// Flat-space entries are held to this instead of the run tolerance.
pub const FLAT_THRESHOLD: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleEntry {
    pub check: &'static str,
    /// `None` for the flat-space subset, which spans all dimensions.
    pub n: Option<usize>,
    pub cases: usize,
    pub max_deviation: f64,
    pub threshold: f64,
}

impl OracleEntry {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.threshold
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub entries: Vec<OracleEntry>,
}

impl OracleReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(OracleEntry::passed)
    }

    pub fn max_deviation(&self, check: &str) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.check == check)
            .map(|e| e.max_deviation)
            .fold(0.0, f64::max)
    }
}

fn sup_deviation(sol: &BVPSolution, exact: impl Fn(f64) -> f64) -> f64 {
    let s = (sol.dimension() - 2) as f64;
    let r0 = sol.boundary_radius();
    (0..=400)
        .map(|k| {
            let t = if k < 200 {
                1.0 - k as f64 / 200.0 * 0.99
            } else {
                0.01 * 1e-6f64.powf((k - 200) as f64 / 200.0)
            };
            let r = r0 * t.powf(-1.0 / s);
            (sol.value(r) - exact(r)).abs()
        })
        .fold(0.0, f64::max)
}

const MASSES: [f64; 4] = [-0.5, 0.0, 1.0, 2.0];
const RADII: [f64; 2] = [1.0, 2.0];

/// Runs every oracle for each dimension in `dimensions`; deviations are
/// compared with `tolerance` (flat-space entries with [`FLAT_THRESHOLD`]).
pub fn validate_oracles(dimensions: &[usize], tolerance: f64) -> Result<OracleReport> {
    let mut entries = Vec::new();
    let mut push = |check, n, devs: Vec<f64>, threshold| {
        entries.push(OracleEntry {
            check,
            n,
            cases: devs.len(),
            max_deviation: devs.into_iter().fold(0.0, f64::max),
            threshold,
        })
    };
    for &n in dimensions {
        let s = (n - 2) as f64;
        let mut green = Vec::new();
        let mut harmonic = Vec::new();
        let mut mass = Vec::new();
        let mut minimal = Vec::new();
        for m in MASSES {
            for r0 in RADII {
                let g = schwarzschild(n, m, r0)?;
                let a = 2.0 * r0.powf(s);
                let u = solve_conformal_green(&g)?;
                green.push(sup_deviation(&u, |r| (a + m) / (2.0 * r.powf(s) + m)));
                // int_0^t dt / (1 + beta t)^2 = t / (1 + beta t)
                let beta = m / a;
                let v = solve_harmonic_green(&g)?;
                harmonic.push(sup_deviation(&v, |r| {
                    let t = (r0 / r).powf(s);
                    (1.0 + beta) * t / (1.0 + beta * t)
                }));
                mass.push((adm_mass(&g)?.mass - m).abs() / m.abs().max(1.0));
                let rep = conformal_minimal_boundary_check(&g)?;
                minimal.push(rep.identity_residual.max(rep.h_tilde_formula_gap));
            }
        }
        // U = 1 + b t^2: int_0^t dt/(1 + b t^2)^2 = t/(2(1 + b t^2)) + atan(sqrt(b) t)/(2 sqrt(b))
        for b in [0.3, 1.5] {
            let r0 = 1.0;
            let g = power_sum_metric(n, r0, &[PowerTerm::new(b, 2.0 * s)])?;
            let big_f = |t: f64| t / (2.0 * (1.0 + b * t * t)) + (b.sqrt() * t).atan() / (2.0 * b.sqrt());
            let v = solve_harmonic_green(&g)?;
            harmonic.push(sup_deviation(&v, |r| big_f((r0 / r).powf(s)) / big_f(1.0)));
        }
        let mut identity = Vec::new();
        for seed in 0..6 {
            let g = random_nonneg_scalar_metric(seed, n, 2, (s, s + 3.0), (0.1, 1.0))?;
            let f = g.conformal_factor().expect("conformally flat").clone();
            let r0 = g.boundary_radius();
            let scale = f.value(r0) * r0.powf(s);
            let u = solve_conformal_green(&g)?;
            identity.push(sup_deviation(&u, |r| scale / (f.value(r) * r.powf(s))));
        }
        push("green-closed-form", Some(n), green, tolerance);
        push("conformally-flat-identity", Some(n), identity, tolerance);
        push("harmonic-antiderivative", Some(n), harmonic, tolerance);
        push("minimal-boundary-identity", Some(n), minimal, tolerance);
        push("adm-mass", Some(n), mass, tolerance);
    }

    let mut flat_devs = Vec::new();
    for &n in dimensions {
        let s = (n - 2) as f64;
        for r0 in RADII {
            let g = flat(n, r0)?;
            let exact = |r: f64| (r0 / r).powf(s);
            flat_devs.push(sup_deviation(&solve_conformal_green(&g)?, exact));
            flat_devs.push(sup_deviation(&solve_harmonic_green(&g)?, exact));
            flat_devs.push(adm_mass(&g)?.mass.abs());
            flat_devs.push(conformal_minimal_boundary_check(&g)?.identity_residual);
        }
    }
    push("flat-space", None, flat_devs, FLAT_THRESHOLD);
    Ok(OracleReport { entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_in_three_dimensions() {
        let rep = validate_oracles(&[3], 1e-8).unwrap();
        assert!(rep.all_passed(), "{rep:#?}");
        assert_eq!(rep.entries.len(), 6);
    }
}
