//! Acceptance runner: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`). The exit status is nonzero if
//! any criterion fails, except the ones listed in `KNOWN_FAILURES`, whose
//! lines are still printed as FAIL.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use pmtb::conformal::{build_fill_in, conformal_mean_curvature, conformal_scalar_curvature};
use pmtb::elliptic::{solve_conformal_green, solve_harmonic_green, solve_harmonic_with_boundary};
use pmtb::geometry::{
    adm_mass, areal_mass_profile, areal_schwarzschild, flat, mean_curvature_sphere, power_sum_metric,
    radial_laplacian, random_nonneg_scalar_metric, sample_areal_family, sample_metric_family, scalar_curvature,
    schwarzschild, FamilyRanges, PowerTerm, RadialMetric,
};
use pmtb::numerics::Jet;
use pmtb::theorems::{
    check_corollary, check_mass_capacity, check_theorem_main, conformal_minimal_boundary_check,
    minimal_boundary_equality_model, reduce_to_corollary, schwarzschild_equality_constant, Tolerances,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Criterion 2 as literally stated uses the printed equality constant
/// `2 r0^(n-2) / (2 r0^(n-2) + m)`, for which neither margin vanishes.
const KNOWN_FAILURES: &[&str] = &["2"];

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { id, pass, detail }
}

const DIMS: [usize; 3] = [3, 4, 5];
const MASSES: [f64; 4] = [-0.5, 0.0, 1.0, 2.0];
const RADII: [f64; 2] = [1.0, 2.0];

/// Radii with `t = (r0/r)^(n-2)` spread over `(0, 1]`, dense near both ends.
fn sample_radii(g: &RadialMetric, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| {
            let x = k as f64 / count as f64;
            let t = if x < 0.5 { 1.0 - 1.98 * x } else { 0.01 * 1e-6f64.powf(2.0 * x - 1.0) };
            g.r_of(t)
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in DIMS {
        let s = (n - 2) as f64;
        for m in MASSES {
            for r0 in RADII {
                if 2.0 * r0.powf(s) + m <= 0.0 {
                    continue;
                }
                let g = schwarzschild(n, m, r0).unwrap();
                let u = solve_conformal_green(&g).unwrap();
                for r in sample_radii(&g, 400) {
                    let exact = (2.0 * r0.powf(s) + m) / (2.0 * r.powf(s) + m);
                    worst = worst.max((u.value(r) - exact).abs());
                }
                cases += 1;
            }
        }
    }
    outcome(
        "1",
        cases == 24 && worst <= 1e-8,
        format!("Schwarzschild Green's function vs closed form: {cases} cases, sup deviation {worst:.2e} (limit 1e-8)"),
    )
}

fn equality_margins(constant: impl Fn(usize, f64, f64) -> f64) -> (usize, f64, f64, Vec<String>) {
    let (mut cases, mut hyp, mut concl) = (0, 0.0f64, 0.0f64);
    let mut errors = Vec::new();
    for n in DIMS {
        for m in [-1.0, -0.5, 0.5, 1.0, 2.0] {
            for r0 in RADII {
                let g = schwarzschild(n, m, r0).unwrap();
                let c = constant(n, m, r0);
                match check_mass_capacity(&g, c) {
                    Ok(v) => {
                        hyp = hyp.max(v.condition_margin.abs());
                        concl = concl.max(v.conclusion_margin.abs());
                        cases += 1;
                    }
                    Err(e) => errors.push(format!("n={n} m={m} r0={r0}: {e}")),
                }
            }
        }
    }
    (cases, hyp, concl, errors)
}

fn criterion_2() -> Vec<Outcome> {
    let printed = |n: usize, m: f64, r0: f64| {
        let a = 2.0 * r0.powf((n - 2) as f64);
        a / (a + m)
    };
    let (cases, hyp, concl, errors) = equality_margins(printed);
    let example = printed(3, -1.0, 1.0);
    let literal = outcome(
        "2",
        errors.is_empty() && hyp <= 1e-6 && concl <= 1e-6,
        format!(
            "printed constant c = 2r0^(n-2)/(2r0^(n-2)+m) (n=3, m=-1, r0=1 gives c={example}): \
             {cases} cases, max |hypothesis margin| {hyp:.2e}, max |m - C| {concl:.2e} (limit 1e-6){}",
            if errors.is_empty() { String::new() } else { format!(", {} errors", errors.len()) }
        ),
    );
    let corrected_fn = |n, m, r0| schwarzschild_equality_constant(n, m, r0).unwrap();
    let (cases, hyp, concl, errors) = equality_margins(corrected_fn);
    let example = corrected_fn(3, -1.0, 1.0);
    let corrected = outcome(
        "2'",
        errors.is_empty() && hyp <= 1e-6 && concl <= 1e-6,
        format!(
            "corrected constant c = (2r0^(n-2)-m)/(2r0^(n-2)+m) (n=3, m=-1, r0=1 gives c={example}): \
             {cases} cases, max |hypothesis margin| {hyp:.2e}, max |m - C| {concl:.2e} (limit 1e-6)"
        ),
    );
    vec![literal, corrected]
}

fn criterion_3() -> Outcome {
    let mut rel = 0.0f64;
    for n in DIMS {
        for m in MASSES {
            for r0 in RADII {
                let est = adm_mass(&schwarzschild(n, m, r0).unwrap()).unwrap().mass;
                rel = rel.max((est - m).abs() / m.abs().max(f64::MIN_POSITIVE));
            }
        }
    }
    let mut flat_abs = 0.0f64;
    for n in DIMS {
        for r0 in RADII {
            flat_abs = flat_abs.max(adm_mass(&flat(n, r0).unwrap()).unwrap().mass.abs());
        }
    }
    outcome(
        "3",
        rel <= 1e-8 && flat_abs <= 1e-10,
        format!("ADM mass: max relative error {rel:.2e} on Schwarzschild (limit 1e-8), flat |m| {flat_abs:.2e} (limit 1e-10)"),
    )
}

/// `1 + sum b_k r^(-q_k)` with its first two derivatives.
fn power_jet(terms: &[(f64, f64)], r: f64) -> Jet {
    let mut j = Jet::new(1.0, 0.0, 0.0);
    for &(b, q) in terms {
        let x = b * r.powf(-q);
        j = Jet::new(j.value + x, j.d1 - q * x / r, j.d2 + q * (q + 1.0) * x / (r * r));
    }
    j
}

/// Scalar and sphere mean curvature of `a^2 dr^2 + (r a)^2 g_sphere` from
/// central differences of `a` alone, with step `h`.
fn finite_difference_curvatures(n: usize, a: &dyn Fn(f64) -> f64, r: f64, h: f64) -> (f64, f64) {
    let nm1 = n as f64 - 1.0;
    let rho = |x: f64| x * a(x);
    let d = |f: &dyn Fn(f64) -> f64, x: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    let rho_s = |x: f64| d(&rho, x) / a(x);
    let rho_ss = d(&rho_s, r) / a(r);
    let p = rho(r);
    let ps = rho_s(r);
    let scalar = -2.0 * nm1 * rho_ss / p + nm1 * (nm1 - 1.0) * (1.0 - ps * ps) / (p * p);
    let mean = nm1 * ps / p;
    (scalar, mean)
}

fn observed_order(errors: &[f64]) -> f64 {
    errors
        .windows(2)
        .map(|w| (w[0] / w[1]).log2())
        .fold(f64::INFINITY, f64::min)
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_scalar = f64::INFINITY;
    let mut worst_mean = f64::INFINITY;
    let mut flip_gap = 0.0f64;
    for _ in 0..50 {
        let n = DIMS[rng.random_range(0..3)];
        let s = (n - 2) as f64;
        let base_terms = [(rng.random_range(-0.3..0.5), rng.random_range(s..s + 3.0))];
        let factor_terms: Vec<(f64, f64)> = (0..2)
            .map(|_| (rng.random_range(-0.3..0.6), rng.random_range(0.5..4.0)))
            .collect();
        let base = power_sum_metric(n, 1.0, &[PowerTerm::new(base_terms[0].0, base_terms[0].1)]).unwrap();
        let r: f64 = rng.random_range(1.2..4.0);

        let big_u = |x: f64| power_jet(&base_terms, x).value;
        let u = power_jet(&factor_terms, r);
        let a = |x: f64| (big_u(x) * power_jet(&factor_terms, x).value).powf(2.0 / s);

        let lap = radial_laplacian(&base, r, u).unwrap();
        let scalar = conformal_scalar_curvature(scalar_curvature(&base, r).unwrap(), (u.value, lap), n);
        let grad = u.d1 / big_u(r).powf(2.0 / s);
        let h = mean_curvature_sphere(&base, r).unwrap();
        let mean = conformal_mean_curvature(h, u.value, grad, n, false);
        flip_gap = flip_gap.max((conformal_mean_curvature(h, u.value, grad, n, true) + mean).abs());

        let steps = [0.04 * r, 0.02 * r, 0.01 * r];
        let (es, em): (Vec<f64>, Vec<f64>) = steps
            .iter()
            .map(|&step| {
                let (fs, fm) = finite_difference_curvatures(n, &a, r, step);
                ((fs - scalar).abs(), (fm - mean).abs())
            })
            .unzip();
        worst_scalar = worst_scalar.min(observed_order(&es));
        worst_mean = worst_mean.min(observed_order(&em));
    }

    let mut interior = 0.0f64;
    for n in DIMS {
        for m in MASSES {
            for r0 in RADII {
                let g = schwarzschild(n, m, r0).unwrap();
                let u = solve_conformal_green(&g).unwrap();
                interior = interior.max(build_fill_in(&g, &u).unwrap().interior_scalar_residual);
            }
        }
    }
    outcome(
        "4",
        worst_scalar >= 1.9 && worst_mean >= 1.9 && flip_gap == 0.0 && interior <= 1e-8,
        format!(
            "conformal change formulas vs finite differences on 50 random factors: min observed order \
             {worst_scalar:.3} (scalar), {worst_mean:.3} (mean curvature), limit 1.9; \
             fill-in interior scalar residual on Schwarzschild {interior:.2e} (limit 1e-8)"
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut metrics = sample_metric_family(55, 100, &DIMS, FamilyRanges::default()).unwrap();
    metrics.extend(sample_areal_family(55, 100, &DIMS).unwrap());
    let tol = Tolerances::default();
    let results: Vec<(f64, f64, bool, f64)> = metrics
        .par_iter()
        .map(|g| {
            let u = solve_conformal_green(g).unwrap();
            let v = solve_harmonic_green(g).unwrap();
            let pointwise = sample_radii(g, 300)
                .into_iter()
                .map(|r| u.value(r) - v.value(r))
                .fold(f64::NEG_INFINITY, f64::max);
            let normal = u.normal_derivative_at_boundary - v.normal_derivative_at_boundary;
            let cor = check_corollary(g).unwrap();
            let main = check_theorem_main(g).unwrap();
            let implied = !cor.hypothesis_holds(&tol)
                || (main.hypothesis_holds(&tol) && main.condition_margin >= cor.condition_margin - 1e-10);
            (pointwise, normal, implied, if cor.hypothesis_holds(&tol) { 1.0 } else { 0.0 })
        })
        .collect();
    let pointwise = results.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    let normal = results.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let implied = results.iter().all(|r| r.2);
    let passes = results.iter().map(|r| r.3).sum::<f64>();
    outcome(
        "5",
        metrics.len() == 200 && pointwise <= 1e-10 && normal <= 1e-10 && implied,
        format!(
            "{} metrics: max (u - v) {pointwise:.2e}, max (d_nu u - d_nu v) {normal:.2e} (limit 1e-10); \
             {passes} harmonic-Green passes, all imply a conformal-Green pass with no smaller margin: {implied}",
            metrics.len()
        ),
    )
}

pub const SOUNDNESS_C: [f64; 9] = [-0.9, -0.5, 0.0, 0.25, 0.5, 0.75, 0.95, 1.5, 3.0];

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut metrics = sample_metric_family(66, 300, &DIMS, FamilyRanges::default()).unwrap();
    metrics.extend(sample_areal_family(66, 250, &DIMS).unwrap());
    let tol = Tolerances::default();
    let rows: Vec<(bool, bool, bool)> = metrics
        .par_iter()
        .flat_map_iter(|g| {
            SOUNDNESS_C.iter().map(move |&c| match check_mass_capacity(g, c) {
                Ok(v) => (v.condition_margin >= 0.0, v.conclusion_margin < -tol.conclusion, true),
                Err(_) => (false, false, false),
            })
        })
        .collect();
    let evaluated = rows.iter().filter(|r| r.2).count();
    let holds = rows.iter().filter(|r| r.0).count();
    let bad = rows.iter().filter(|r| r.0 && r.1).count();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        "6",
        metrics.len() >= 500 && evaluated == rows.len() && bad == 0 && secs <= 300.0,
        format!(
            "{} metrics x {} values of c = {} instances ({evaluated} evaluated), {holds} with hypothesis margin >= 0, \
             {bad} with conclusion margin < -1e-6; {secs:.1} s (limit 300 s)",
            metrics.len(),
            SOUNDNESS_C.len(),
            rows.len()
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut cases: Vec<(String, RadialMetric)> = Vec::new();
    for n in DIMS {
        for (m, r0) in [(0.25, 1.0), (0.5, 1.5), (1.0, 3.0)] {
            cases.push((format!("schwarzschild n={n} m={m} r0={r0}"), schwarzschild(n, m, r0).unwrap()));
            cases.push((format!("areal schwarzschild n={n} m={m} r0={r0}"), areal_schwarzschild(n, m, r0).unwrap()));
        }
        let s = (n - 2) as f64;
        for seed in 0..3 {
            cases.push((
                format!("two-term conformally flat n={n} seed={seed}"),
                random_nonneg_scalar_metric(seed, n, 2, (s, s + 3.0), (0.1, 1.0)).unwrap(),
            ));
        }
        for (m, terms) in [
            (0.5, [PowerTerm::new(0.2, 1.0), PowerTerm::new(0.1, 2.5)]),
            (0.3, [PowerTerm::new(0.1, 1.5), PowerTerm::new(0.2, 3.0)]),
        ] {
            cases.push((
                format!("two-term areal n={n} m={m}"),
                areal_mass_profile(n, m, 1.5, &terms).unwrap(),
            ));
        }
    }
    let mut failures = Vec::new();
    let mut worst_dev = f64::INFINITY;
    let mut worst_der = f64::INFINITY;
    let mut min_p = f64::INFINITY;
    for (name, g) in &cases {
        let u = solve_conformal_green(g).unwrap();
        let k = build_fill_in(g, &u).unwrap().compactified_point_report;
        worst_dev = worst_dev.min(k.deviation_exponent - k.claimed_deviation_order);
        worst_der = worst_der.min(k.derivative_exponent - k.claimed_derivative_order);
        min_p = min_p.min(k.sobolev_exponent_estimate - g.dimension() as f64);
        if !k.meets_claims(g.dimension(), 0.1) {
            failures.push(name.clone());
        }
    }
    outcome(
        "7",
        failures.is_empty(),
        format!(
            "{} metrics: min (fitted - claimed) {worst_dev:+.3} for the metric deviation, {worst_der:+.3} for the \
             weighted derivative (slack 0.1), min (Sobolev exponent - n) {min_p:+.3}{}",
            cases.len(),
            if failures.is_empty() { String::new() } else { format!("; failing: {}", failures.join(", ")) }
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut metrics = sample_metric_family(88, 25, &DIMS, FamilyRanges::default()).unwrap();
    metrics.extend(sample_areal_family(88, 25, &DIMS).unwrap());
    let cs = [-0.5, 0.0, 0.5, 2.0, 0.9];
    let results: Vec<Result<(f64, f64), String>> = metrics
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let c = cs[i % cs.len()];
            let phi = solve_harmonic_with_boundary(g, c).map_err(|e| e.to_string())?;
            let red = reduce_to_corollary(g, &phi, c).map_err(|e| e.to_string())?;
            Ok((red.mass_identity_gap(), red.harmonic_residual))
        })
        .collect();
    let errors: Vec<&String> = results.iter().filter_map(|r| r.as_ref().err()).collect();
    let gap = results.iter().flatten().map(|r| r.0).fold(0.0, f64::max);
    let laplace = results.iter().flatten().map(|r| r.1).fold(0.0, f64::max);

    let mut identity = 0.0f64;
    for n in DIMS {
        for m in MASSES {
            for r0 in RADII {
                let rep = conformal_minimal_boundary_check(&schwarzschild(n, m, r0).unwrap()).unwrap();
                identity = identity.max(rep.identity_residual);
            }
        }
    }
    for g in &metrics {
        identity = identity.max(conformal_minimal_boundary_check(g).unwrap().identity_residual);
    }
    let mut h_tilde = 0.0f64;
    for n in DIMS {
        for m in [0.5, 1.0, 2.0] {
            let horizon = (m / 2.0f64).powf(1.0 / (n - 2) as f64);
            let base = schwarzschild(n, m, horizon).unwrap();
            let model = minimal_boundary_equality_model(&base).unwrap();
            let rep = conformal_minimal_boundary_check(&model).unwrap();
            h_tilde = h_tilde.max(rep.h_tilde.abs());
        }
    }
    outcome(
        "8",
        errors.is_empty() && gap <= 1e-6 && laplace <= 1e-8 && identity <= 1e-8 && h_tilde <= 1e-8,
        format!(
            "{} reductions ({} errors): max |m~ - (m - C)| {gap:.2e} (limit 1e-6), max harmonic residual {laplace:.2e} \
             (limit 1e-8); minimal-boundary identity residual {identity:.2e}, |H~| on the equality family {h_tilde:.2e} \
             (limit 1e-8)",
            results.len(),
            errors.len()
        ),
    )
}

fn strip_header(bytes: &[u8]) -> &[u8] {
    match bytes.first() {
        Some(b'#') => bytes.iter().position(|&b| b == b'\n').map_or(&[][..], |i| &bytes[i + 1..]),
        _ => bytes,
    }
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.toml");
    std::fs::write(
        &config,
        "seed = 9\n[metric]\nfamily = \"generated\"\ncount = 40\n\
         [experiment]\nkind = \"sweep\"\ntheorem = \"mass-capacity\"\n[grid]\nc = [-0.5, 0.5, 2.0]\n",
    )
    .unwrap();
    let run = |out: &Path, jobs: &str| {
        Command::new(env!("CARGO_BIN_EXE_pmtb"))
            .args(["sweep", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(out)
            .args(["--jobs", jobs])
            .output()
            .unwrap()
            .status
            .success()
    };
    let outs = [dir.path().join("a"), dir.path().join("b"), dir.path().join("c")];
    let ok = run(&outs[0], "1") && run(&outs[1], "1") && run(&outs[2], "4");
    let mut differing = Vec::new();
    for file in ["sweep_report.csv", "sweep_sweep.csv", "sweep_profiles.csv", "sweep_summary.txt"] {
        let read = |d: &Path| std::fs::read(d.join(file)).unwrap_or_default();
        let first = read(&outs[0]);
        if first.is_empty() || outs[1..].iter().any(|d| strip_header(&read(d)) != strip_header(&first)) {
            differing.push(file);
        }
    }
    outcome(
        "9",
        ok && differing.is_empty(),
        format!(
            "three sweep runs (1, 1 and 4 workers): exit ok {ok}, files differing after the header line: {}",
            if differing.is_empty() { "none".to_string() } else { differing.join(", ") }
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut outcomes = vec![criterion_1()];
    outcomes.extend(criterion_2());
    outcomes.extend([
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
    ]);
    let mut unexpected = 0;
    for o in &outcomes {
        let known = !o.pass && KNOWN_FAILURES.contains(&o.id);
        println!(
            "criterion {}: {} {}{}",
            o.id,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            if known { " [known failure, not counted]" } else { "" }
        );
        if !o.pass && !known {
            unexpected += 1;
        }
    }
    println!("acceptance: {unexpected} unexpected failures in {:.1} s", start.elapsed().as_secs_f64());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
