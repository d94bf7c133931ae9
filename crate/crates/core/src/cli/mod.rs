//! Batch runner behind the `pmtb` binary.
//!
//! ```text
//! pmtb check            --config cfg.toml [--out DIR] [--seed N] [--tol-override name=val]... [--jobs K]
//! pmtb sweep            --config cfg.toml ...
//! pmtb validate-oracles [--config cfg.toml] ...
//! pmtb fill-in          --config cfg.toml ...
//! ```
//!
//! The output directory is `--out`, else `output.dir` from the config, else
//! `$PMTB_OUT_DIR`, else `pmtb-out`. The exit status is 0 exactly when every
//! row's solvers succeeded within the residual tolerance; a failed hypothesis
//! or a rejected input is a result, not an error.

pub mod config;
pub mod oracles;
pub mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::conformal::{build_fill_in, glued_harmonic_report};
use crate::elliptic::{harmonic_with_boundary_from, solve_conformal_green, solve_harmonic_green};
use crate::error::{Error, Result};
use crate::geometry::RadialMetric;
use crate::theorems::{
    check_corollary, check_equivalent_form, check_mass_capacity, check_theorem_main, TheoremId, Verdict,
};

pub use config::{ExperimentConfig, ExperimentKind, RunTolerances};
pub use report::{ReportRow, RowStatus};

pub const OUT_DIR_ENV: &str = "PMTB_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "pmtb-out";

#[derive(Debug, Parser)]
#[command(name = "pmtb", version, about = "Mass-capacity inequality checks on radial manifolds with boundary")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the configured theorem on each configured metric.
    Check(RunArgs),
    /// Like `check`, and also write margin-versus-parameter plot data.
    Sweep(RunArgs),
    /// Compare the solvers against closed-form solutions.
    ValidateOracles(RunArgs),
    /// Build the conformal fill-in and its regularity diagnostics.
    FillIn(RunArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct RunArgs {
    /// TOML experiment file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for generated metric families.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override a tolerance: hypothesis, conclusion, equality, residual or oracle.
    #[arg(long = "tol-override", value_name = "NAME=VAL")]
    pub tol_override: Vec<String>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl Command {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Command::Check(_) => ExperimentKind::Check,
            Command::Sweep(_) => ExperimentKind::Sweep,
            Command::ValidateOracles(_) => ExperimentKind::OracleValidation,
            Command::FillIn(_) => ExperimentKind::FillIn,
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Check(a) | Command::Sweep(a) | Command::ValidateOracles(a) | Command::FillIn(a) => a,
        }
    }
}

/// Settings after merging flags, config and environment.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub prefix: String,
    pub tolerances: RunTolerances,
    pub jobs: Option<usize>,
}

impl RunSettings {
    pub fn resolve(kind: ExperimentKind, args: &RunArgs, config: Option<&ExperimentConfig>) -> Result<Self> {
        let mut tolerances = RunTolerances::default();
        if let Some(cfg) = config {
            tolerances.apply(&cfg.tolerances)?;
        }
        for spec in &args.tol_override {
            tolerances.set_from_str(spec)?;
        }
        let out_dir = args
            .out
            .clone()
            .or_else(|| config.and_then(|c| c.output.dir.clone()))
            .or_else(|| std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        let prefix = config
            .and_then(|c| c.output.prefix.clone())
            .unwrap_or_else(|| kind_label(kind).to_string());
        if args.jobs == Some(0) {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        Ok(Self {
            kind,
            seed: args.seed.or(config.and_then(|c| c.seed)).unwrap_or(0),
            out_dir,
            prefix,
            tolerances,
            jobs: args.jobs,
        })
    }

    fn path(&self, suffix: &str) -> PathBuf {
        self.out_dir.join(format!("{}_{suffix}", self.prefix))
    }
}

pub fn kind_label(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::Check => "check",
        ExperimentKind::Sweep => "sweep",
        ExperimentKind::OracleValidation => "oracles",
        ExperimentKind::FillIn => "fill-in",
    }
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
    /// No solver failures and every residual within tolerance.
    pub healthy: bool,
}

fn header_comment(settings: &RunSettings) -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!(
        "pmtb {} seed={} written at unix time {secs}",
        kind_label(settings.kind),
        settings.seed
    )
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs one theorem check; `c` is ignored by the statements without one.
pub fn evaluate(metric: &RadialMetric, theorem: TheoremId, c: Option<f64>) -> Result<Verdict> {
    let need = |c: Option<f64>| c.ok_or_else(|| Error::Config(format!("theorem {theorem} needs a boundary constant")));
    match theorem {
        TheoremId::ConformalGreen => check_theorem_main(metric),
        TheoremId::HarmonicGreen => check_corollary(metric),
        TheoremId::Capacity => check_equivalent_form(metric, 0.0),
        TheoremId::MassCapacity => check_mass_capacity(metric, need(c)?),
        TheoremId::EquivalentForm => check_equivalent_form(metric, need(c)?),
    }
}

struct Task<'a> {
    row: &'a config::MetricRow,
    c: Option<Result<f64>>,
}

const PROFILE_SAMPLES: usize = 33;

/// `r, u, v` and `phi` for every `c` of the row, on radii with `t` spaced
/// evenly in `(0, 1]`.
fn profile_records(index: usize, metric: &RadialMetric, cs: &[f64]) -> Result<Vec<Vec<String>>> {
    let u = solve_conformal_green(metric)?;
    let v = solve_harmonic_green(metric)?;
    let phis: Vec<_> = cs.iter().map(|&c| (c, harmonic_with_boundary_from(&v, c))).collect();
    let mut out = Vec::new();
    for k in 0..PROFILE_SAMPLES {
        let t = 1.0 - k as f64 / PROFILE_SAMPLES as f64;
        let r = metric.r_of(t);
        let base = [index.to_string(), report::fmt_f64(r), report::fmt_f64(u.value(r)), report::fmt_f64(v.value(r))];
        if phis.is_empty() {
            let mut rec = base.to_vec();
            rec.extend([String::new(), String::new()]);
            out.push(rec);
        }
        for (c, phi) in &phis {
            let mut rec = base.to_vec();
            rec.extend([report::fmt_f64(*c), report::fmt_f64(phi.value(r))]);
            out.push(rec);
        }
    }
    Ok(out)
}

fn run_checks(cfg: &ExperimentConfig, settings: &RunSettings) -> Result<RunOutcome> {
    let metric_rows = cfg.metric_rows(settings.seed)?;
    let theorem = cfg.experiment.theorem;
    let mut tasks = Vec::new();
    for row in &metric_rows {
        if config::needs_c(theorem) {
            tasks.extend(cfg.c_values(row).into_iter().map(|c| Task { row, c: Some(c) }));
        } else {
            tasks.push(Task { row, c: None });
        }
    }
    let tol = settings.tolerances;
    let rows: Vec<ReportRow> = with_pool(settings.jobs, || {
        tasks
            .par_iter()
            .enumerate()
            .map(|(index, task)| {
                let start = Instant::now();
                let c = task.c.as_ref().and_then(|c| c.as_ref().ok().copied());
                let outcome = match (&task.row.metric, &task.c) {
                    (Err(e), _) => Err(e.clone()),
                    (_, Some(Err(e))) => Err(e.clone()),
                    (Ok(metric), _) => evaluate(metric, theorem, c),
                };
                ReportRow::from_outcome(
                    index,
                    task.row.id.clone(),
                    task.row.n,
                    task.row.r0,
                    task.row.m,
                    c,
                    theorem,
                    outcome,
                    &tol.theorem,
                    tol.residual,
                    start.elapsed().as_secs_f64(),
                )
            })
            .collect()
    })?;

    let profiles: Vec<Vec<Vec<String>>> = with_pool(settings.jobs, || {
        metric_rows
            .par_iter()
            .enumerate()
            .map(|(i, row)| {
                let cs: Vec<f64> = if config::needs_c(theorem) {
                    cfg.c_values(row).into_iter().filter_map(|c| c.ok()).collect()
                } else {
                    Vec::new()
                };
                match &row.metric {
                    Ok(g) => profile_records(i, g, &cs).unwrap_or_default(),
                    Err(_) => Vec::new(),
                }
            })
            .collect()
    })?;

    std::fs::create_dir_all(&settings.out_dir)
        .map_err(|e| Error::Io(format!("{}: {e}", settings.out_dir.display())))?;
    let comment = header_comment(settings);
    let mut files = Vec::new();
    let mut write = |suffix: &str, bytes: Vec<u8>| -> Result<()> {
        let p = settings.path(suffix);
        report::write_file(&p, &bytes)?;
        files.push(p);
        Ok(())
    };
    write("report.csv", report::report_table(&rows, &tol.theorem, &comment)?)?;
    write(
        "timings.csv",
        report::timings_table(rows.iter().map(|r| (r.index, r.wall_time)))?,
    )?;
    let mut profile_csv = csv::Writer::from_writer(Vec::new());
    profile_csv.write_record(["metric_index", "r", "u", "v", "c", "phi"])?;
    for rec in profiles.iter().flatten() {
        profile_csv.write_record(rec)?;
    }
    write(
        "profiles.csv",
        profile_csv.into_inner().map_err(|e| Error::Io(e.to_string()))?,
    )?;
    if settings.kind == ExperimentKind::Sweep {
        let axis = report::SweepAxis::infer(&rows);
        write("sweep.csv", report::emit_sweep_plots(&rows, axis)?)?;
    }
    let summary = report::summary_text(&format!("pmtb {} ({theorem})", kind_label(settings.kind)), &rows, &tol.theorem);
    write("summary.txt", summary.clone().into_bytes())?;
    let healthy = rows.iter().all(|r| r.status != RowStatus::SolverFailure);
    Ok(RunOutcome { files, summary, healthy })
}

fn run_fill_in(cfg: &ExperimentConfig, settings: &RunSettings) -> Result<RunOutcome> {
    let metric_rows = cfg.metric_rows(settings.seed)?;
    let residual = settings.tolerances.residual;
    let rows: Vec<report::FillInRow> = with_pool(settings.jobs, || {
        metric_rows
            .par_iter()
            .enumerate()
            .map(|(index, row)| {
                let start = Instant::now();
                let outcome = row.metric.clone().and_then(|g| {
                    let u = solve_conformal_green(&g)?;
                    let f = build_fill_in(&g, &u)?;
                    let gap = glued_harmonic_report(&f)?.normal_derivative_gap;
                    Ok((f, gap))
                });
                let status = match &outcome {
                    Ok((f, _)) if f.green.residual_norm > residual || f.interior_scalar_residual > residual => {
                        RowStatus::SolverFailure
                    }
                    Ok(_) => RowStatus::Ok,
                    Err(e) => RowStatus::classify(e),
                };
                report::FillInRow {
                    index,
                    metric_id: row.id.clone(),
                    n: row.n,
                    r0: row.r0,
                    outcome: outcome.map_err(|e| e.to_string()),
                    status,
                    wall_time: start.elapsed().as_secs_f64(),
                }
            })
            .collect()
    })?;

    std::fs::create_dir_all(&settings.out_dir)
        .map_err(|e| Error::Io(format!("{}: {e}", settings.out_dir.display())))?;
    let comment = header_comment(settings);
    let mut files = Vec::new();
    let mut write = |suffix: &str, bytes: Vec<u8>| -> Result<()> {
        let p = settings.path(suffix);
        report::write_file(&p, &bytes)?;
        files.push(p);
        Ok(())
    };
    write("report.csv", report::fill_in_table(&rows, &comment)?)?;
    write("kelvin.csv", report::kelvin_samples_table(&rows)?)?;
    write(
        "timings.csv",
        report::timings_table(rows.iter().map(|r| (r.index, r.wall_time)))?,
    )?;

    let mut summary = format!("pmtb fill-in\nrows: {}\n", rows.len());
    for r in &rows {
        match &r.outcome {
            Ok((f, gap)) => {
                let k = &f.compactified_point_report;
                let n = r.n;
                summary.push_str(&format!(
                    "[{}] {}: corner H = {:.6e}, H~ = {:.6e} ({}); interior residual {:.1e}; \
                     deviation exponent {:.3} (claim {:.3}), derivative exponent {:.3} (claim {:.3}), \
                     Sobolev exponent {:.3}; claims {}; normal derivative gap {:.1e} ({})\n",
                    r.index,
                    r.metric_id,
                    f.corner.0,
                    f.corner.1,
                    if crate::conformal::corner_condition(f).0 { "corner holds" } else { "corner fails" },
                    f.interior_scalar_residual,
                    k.deviation_exponent,
                    k.claimed_deviation_order,
                    k.derivative_exponent,
                    k.claimed_derivative_order,
                    k.sobolev_exponent_estimate,
                    if k.meets_claims(n, 0.1) { "met" } else { "not met" },
                    gap,
                    r.status.label()
                ));
            }
            Err(msg) => summary.push_str(&format!("[{}] {}: {} ({msg})\n", r.index, r.metric_id, r.status.label())),
        }
    }
    write("summary.txt", summary.clone().into_bytes())?;
    let healthy = rows.iter().all(|r| r.status != RowStatus::SolverFailure);
    Ok(RunOutcome { files, summary, healthy })
}

fn run_oracles(cfg: Option<&ExperimentConfig>, settings: &RunSettings) -> Result<RunOutcome> {
    let dims = cfg
        .and_then(|c| c.grid.n.clone())
        .unwrap_or_else(|| vec![3, 4, 5]);
    let rep = with_pool(settings.jobs, || oracles::validate_oracles(&dims, settings.tolerances.oracle))??;
    std::fs::create_dir_all(&settings.out_dir)
        .map_err(|e| Error::Io(format!("{}: {e}", settings.out_dir.display())))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["check", "n", "cases", "max_deviation", "threshold", "passed"])?;
    let mut summary = String::from("pmtb validate-oracles\n");
    for e in &rep.entries {
        let n = e.n.map(|n| n.to_string()).unwrap_or_else(|| "all".into());
        w.write_record([
            e.check.to_string(),
            n.clone(),
            e.cases.to_string(),
            report::fmt_f64(e.max_deviation),
            report::fmt_f64(e.threshold),
            e.passed().to_string(),
        ])?;
        summary.push_str(&format!(
            "{:<28} n={:<4} cases={:<3} max deviation {:.3e} (threshold {:.0e}) {}\n",
            e.check,
            n,
            e.cases,
            e.max_deviation,
            e.threshold,
            if e.passed() { "pass" } else { "FAIL" }
        ));
    }
    let mut bytes = format!("# {}\n", header_comment(settings)).into_bytes();
    bytes.extend(w.into_inner().map_err(|e| Error::Io(e.to_string()))?);
    let table = settings.path("report.csv");
    report::write_file(&table, &bytes)?;
    let summary_path = settings.path("summary.txt");
    report::write_file(&summary_path, summary.as_bytes())?;
    Ok(RunOutcome {
        files: vec![table, summary_path],
        summary,
        healthy: rep.all_passed(),
    })
}

/// Runs one experiment; `config` may be absent only for oracle validation.
pub fn run_experiment(kind: ExperimentKind, config: Option<&ExperimentConfig>, args: &RunArgs) -> Result<RunOutcome> {
    let settings = RunSettings::resolve(kind, args, config)?;
    match (kind, config) {
        (ExperimentKind::OracleValidation, cfg) => run_oracles(cfg, &settings),
        (ExperimentKind::FillIn, Some(cfg)) => run_fill_in(cfg, &settings),
        (ExperimentKind::Check | ExperimentKind::Sweep, Some(cfg)) => run_checks(cfg, &settings),
        (_, None) => Err(Error::Config(format!("{} needs --config", kind_label(kind)))),
    }
}

fn load_config(path: Option<&Path>) -> Result<Option<ExperimentConfig>> {
    path.map(ExperimentConfig::load).transpose()
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let kind = cli.command.kind();
    let args = cli.command.args();
    let result = load_config(args.config.as_deref()).and_then(|cfg| {
        if let Some(c) = &cfg {
            if c.experiment.kind != kind {
                eprintln!(
                    "note: config declares kind {}, running {} as requested",
                    kind_label(c.experiment.kind),
                    kind_label(kind)
                );
            }
        }
        run_experiment(kind, cfg.as_ref(), args)
    });
    match result {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.healthy {
                0
            } else {
                eprintln!("error: some rows failed their solver or residual checks");
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
