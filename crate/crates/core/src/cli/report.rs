//! Report rows and the files written for them.
//!
//! Result tables start with one `#` comment line carrying the run time; every
//! other byte depends only on the configuration and seed. Floats use
//! `{:.16e}` (17 significant digits). Wall times go to a separate timings file.

use std::fmt::Write as _;
use std::path::Path;

use crate::conformal::FillIn;
use crate::error::{Error, Result};
use crate::theorems::{TheoremId, Tolerances, Verdict};

pub const REPORT_COLUMNS: [&str; 17] = [
    "index",
    "metric",
    "n",
    "r0",
    "m_parameter",
    "c",
    "theorem",
    "mass",
    "capacity",
    "condition_margin",
    "conclusion_margin",
    "hypothesis_equality",
    "conclusion_equality",
    "rigidity_residual",
    "solver_residual",
    "status",
    "detail",
];

pub const FILL_IN_COLUMNS: [&str; 18] = [
    "index",
    "metric",
    "n",
    "r0",
    "h_exterior",
    "h_interior",
    "corner_margin",
    "corner_holds",
    "interior_residual",
    "deviation_exponent",
    "claimed_deviation_order",
    "derivative_exponent",
    "claimed_derivative_order",
    "sobolev_exponent",
    "continuity_gap",
    "normal_derivative_gap",
    "status",
    "detail",
];

/// How a row ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    /// Hypothesis holds, conclusion fails beyond tolerance.
    Contradiction,
    /// The input does not meet the statement's assumptions.
    Rejected,
    /// A solver or extrapolation failed, or its residual is too large.
    SolverFailure,
}

impl RowStatus {
    pub fn label(self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Contradiction => "contradiction",
            RowStatus::Rejected => "rejected",
            RowStatus::SolverFailure => "solver-failure",
        }
    }

    pub fn classify(err: &Error) -> Self {
        match err {
            Error::InvalidParameter(_)
            | Error::DegenerateMetric(_)
            | Error::OutsideDomain { .. }
            | Error::NegativeScalarCurvature { .. }
            | Error::InvalidBoundaryConstant(..)
            | Error::InsufficientDecay(_)
            | Error::Config(_) => RowStatus::Rejected,
            _ => RowStatus::SolverFailure,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub index: usize,
    pub metric_id: String,
    pub n: usize,
    pub r0: f64,
    pub m_parameter: Option<f64>,
    pub c: Option<f64>,
    pub theorem: TheoremId,
    pub verdict: std::result::Result<Verdict, String>,
    pub status: RowStatus,
    pub wall_time: f64,
}

impl ReportRow {
    #[allow(clippy::too_many_arguments)]
    pub fn from_outcome(
        index: usize,
        metric_id: String,
        n: usize,
        r0: f64,
        m_parameter: Option<f64>,
        c: Option<f64>,
        theorem: TheoremId,
        outcome: Result<Verdict>,
        tol: &Tolerances,
        residual_tolerance: f64,
        wall_time: f64,
    ) -> Self {
        let (verdict, status) = match outcome {
            Ok(v) => {
                let status = if v.solver_residual > residual_tolerance || !v.solver_residual.is_finite() {
                    RowStatus::SolverFailure
                } else if v.contradicts_theorem(tol) {
                    RowStatus::Contradiction
                } else {
                    RowStatus::Ok
                };
                (Ok(v), status)
            }
            Err(e) => (Err(e.to_string()), RowStatus::classify(&e)),
        };
        Self {
            index,
            metric_id,
            n,
            r0,
            m_parameter,
            c,
            theorem,
            verdict,
            status,
            wall_time,
        }
    }
}

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn with_header(comment: &str, body: Vec<u8>) -> Vec<u8> {
    let mut out = format!("# {comment}\n").into_bytes();
    out.extend(body);
    out
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

/// The results table, flags recomputed from the numeric fields with `tol`.
pub fn report_table(rows: &[ReportRow], tol: &Tolerances, comment: &str) -> Result<Vec<u8>> {
    let records = rows.iter().map(|row| {
        let mut rec = vec![
            row.index.to_string(),
            row.metric_id.clone(),
            row.n.to_string(),
            fmt_f64(row.r0),
            opt(row.m_parameter),
            opt(row.c),
            row.theorem.label().to_string(),
        ];
        match &row.verdict {
            Ok(v) => {
                let flags = v.flags(tol);
                rec.extend([
                    fmt_f64(v.mass),
                    fmt_f64(v.capacity_constant),
                    fmt_f64(v.condition_margin),
                    fmt_f64(v.conclusion_margin),
                    flags.hypothesis_equality.to_string(),
                    flags.conclusion_equality.to_string(),
                    fmt_f64(v.rigidity_residual),
                    fmt_f64(v.solver_residual),
                    row.status.label().to_string(),
                    v.warnings.join("; "),
                ]);
            }
            Err(msg) => {
                rec.extend(std::iter::repeat_n(String::new(), 8));
                rec.push(row.status.label().to_string());
                rec.push(msg.clone());
            }
        }
        rec
    });
    Ok(with_header(comment, csv_bytes(&REPORT_COLUMNS, records)?))
}

pub fn timings_table(rows: impl IntoIterator<Item = (usize, f64)>) -> Result<Vec<u8>> {
    csv_bytes(
        &["index", "wall_time_seconds"],
        rows.into_iter().map(|(i, t)| vec![i.to_string(), format!("{t:.6}")]),
    )
}

pub fn summary_text(title: &str, rows: &[ReportRow], tol: &Tolerances) -> String {
    let count = |s: RowStatus| rows.iter().filter(|r| r.status == s).count();
    let verdicts: Vec<&Verdict> = rows.iter().filter_map(|r| r.verdict.as_ref().ok()).collect();
    let holds = verdicts.iter().filter(|v| v.hypothesis_holds(tol)).count();
    let concl = verdicts.iter().filter(|v| v.conclusion_holds(tol)).count();
    let equal = verdicts.iter().filter(|v| v.is_equality_case(tol)).count();
    let worst = verdicts.iter().map(|v| v.solver_residual).fold(0.0, f64::max);
    let mut out = String::new();
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "rows: {}", rows.len());
    let _ = writeln!(
        out,
        "status: {} ok, {} contradiction, {} rejected, {} solver-failure",
        count(RowStatus::Ok),
        count(RowStatus::Contradiction),
        count(RowStatus::Rejected),
        count(RowStatus::SolverFailure)
    );
    let _ = writeln!(out, "hypothesis holds: {holds}, conclusion holds: {concl}, equality cases: {equal}");
    let _ = writeln!(out, "largest solver residual: {worst:.3e}");
    let _ = writeln!(
        out,
        "tolerances: hypothesis {:e}, conclusion {:e}, equality {:e}",
        tol.hypothesis, tol.conclusion, tol.equality
    );
    if rows.len() <= 50 {
        let _ = writeln!(out);
        for r in rows {
            match &r.verdict {
                Ok(v) => {
                    let _ = writeln!(
                        out,
                        "[{}] {} {}{}: condition {:+.3e}, mass {:.10}, bound {:.10}, conclusion {:+.3e} ({})",
                        r.index,
                        r.metric_id,
                        r.theorem,
                        r.c.map(|c| format!(" c={c}")).unwrap_or_default(),
                        v.condition_margin,
                        v.mass,
                        v.capacity_constant,
                        v.conclusion_margin,
                        r.status.label()
                    );
                }
                Err(msg) => {
                    let _ = writeln!(out, "[{}] {} {}: {} ({msg})", r.index, r.metric_id, r.theorem, r.status.label());
                }
            }
        }
    }
    out
}

/// Parameter on the horizontal axis of sweep plots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    C,
    M,
    R0,
    N,
    Index,
}

impl SweepAxis {
    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::C => "c",
            SweepAxis::M => "m",
            SweepAxis::R0 => "r0",
            SweepAxis::N => "n",
            SweepAxis::Index => "index",
        }
    }

    /// The first of `c, m, r0, n` that varies across rows.
    pub fn infer(rows: &[ReportRow]) -> Self {
        let varies = |f: &dyn Fn(&ReportRow) -> Option<f64>| {
            let vals: Vec<Option<f64>> = rows.iter().map(f).collect();
            vals.iter().all(Option::is_some) && vals.windows(2).any(|w| w[0] != w[1])
        };
        if varies(&|r| r.c) {
            SweepAxis::C
        } else if varies(&|r| r.m_parameter) {
            SweepAxis::M
        } else if varies(&|r| Some(r.r0)) {
            SweepAxis::R0
        } else if varies(&|r| Some(r.n as f64)) {
            SweepAxis::N
        } else {
            SweepAxis::Index
        }
    }

    fn value(self, r: &ReportRow) -> Option<f64> {
        match self {
            SweepAxis::C => r.c,
            SweepAxis::M => r.m_parameter,
            SweepAxis::R0 => Some(r.r0),
            SweepAxis::N => Some(r.n as f64),
            SweepAxis::Index => Some(r.index as f64),
        }
    }
}

/// `(parameter, condition_margin, conclusion_margin, mass, capacity)` columns
/// for external plotting; rows that failed are skipped.
pub fn emit_sweep_plots(rows: &[ReportRow], axis: SweepAxis) -> Result<Vec<u8>> {
    if let Some(first) = rows.first() {
        if rows.iter().any(|r| r.theorem != first.theorem) {
            return Err(Error::InvalidParameter("sweep rows mix different theorems".into()));
        }
    }
    let mut records = Vec::new();
    for r in rows {
        let x = axis.value(r).ok_or_else(|| {
            Error::InvalidParameter(format!("row {} has no value for sweep axis {}", r.index, axis.label()))
        })?;
        if let Ok(v) = &r.verdict {
            records.push(vec![
                fmt_f64(x),
                fmt_f64(v.condition_margin),
                fmt_f64(v.conclusion_margin),
                fmt_f64(v.mass),
                fmt_f64(v.capacity_constant),
            ]);
        }
    }
    csv_bytes(
        &[axis.label(), "condition_margin", "conclusion_margin", "mass", "capacity"],
        records,
    )
}

#[derive(Debug, Clone)]
pub struct FillInRow {
    pub index: usize,
    pub metric_id: String,
    pub n: usize,
    pub r0: f64,
    pub outcome: std::result::Result<(FillIn, f64), String>,
    pub status: RowStatus,
    pub wall_time: f64,
}

pub fn fill_in_table(rows: &[FillInRow], comment: &str) -> Result<Vec<u8>> {
    let records = rows.iter().map(|row| {
        let mut rec = vec![
            row.index.to_string(),
            row.metric_id.clone(),
            row.n.to_string(),
            fmt_f64(row.r0),
        ];
        match &row.outcome {
            Ok((f, gap)) => {
                let k = &f.compactified_point_report;
                let margin = f.corner.1 - f.corner.0;
                rec.extend([
                    fmt_f64(f.corner.0),
                    fmt_f64(f.corner.1),
                    fmt_f64(margin),
                    crate::conformal::corner_condition(f).0.to_string(),
                    fmt_f64(f.interior_scalar_residual),
                    fmt_f64(k.deviation_exponent),
                    fmt_f64(k.claimed_deviation_order),
                    fmt_f64(k.derivative_exponent),
                    fmt_f64(k.claimed_derivative_order),
                    fmt_f64(k.sobolev_exponent_estimate),
                    fmt_f64(k.continuity_gap),
                    fmt_f64(*gap),
                    row.status.label().to_string(),
                    String::new(),
                ]);
            }
            Err(msg) => {
                rec.extend(std::iter::repeat_n(String::new(), 12));
                rec.push(row.status.label().to_string());
                rec.push(msg.clone());
            }
        }
        rec
    });
    Ok(with_header(comment, csv_bytes(&FILL_IN_COLUMNS, records)?))
}

/// Kelvin samples of every successful fill-in row.
pub fn kelvin_samples_table(rows: &[FillInRow]) -> Result<Vec<u8>> {
    let mut records = Vec::new();
    for row in rows {
        if let Ok((f, _)) = &row.outcome {
            for k in &f.compactified_point_report.samples {
                records.push(vec![
                    row.index.to_string(),
                    fmt_f64(k.eta),
                    fmt_f64(k.deviation),
                    fmt_f64(k.weighted_radial),
                    fmt_f64(k.weighted_tangential),
                    fmt_f64(k.weighted_derivative),
                ]);
            }
        }
    }
    csv_bytes(
        &["index", "y_radius", "deviation", "weighted_radial", "weighted_tangential", "weighted_derivative"],
        records,
    )
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
