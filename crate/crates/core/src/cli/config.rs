//! TOML experiment configuration.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::{
    areal_mass_profile, areal_schwarzschild, flat, power_sum_metric, sample_areal_family, sample_metric_family,
    schwarzschild, FamilyRanges, PowerTerm, RadialMetric,
};
use crate::theorems::{schwarzschild_equality_constant, TheoremId, Tolerances};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    pub metric: MetricSpec,
    #[serde(default)]
    pub experiment: ExperimentSpec,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(try_from = "RawMetric")]
pub enum MetricSpec {
    Flat {
        n: usize,
        r0: f64,
    },
    Schwarzschild {
        n: usize,
        m: f64,
        r0: f64,
    },
    ArealSchwarzschild {
        n: usize,
        m: f64,
        r0: f64,
    },
    /// `U = 1 + sum a_k r^(-p_k)`, terms given as `[a_k, p_k]`.
    PowerSum {
        n: usize,
        r0: f64,
        terms: Vec<[f64; 2]>,
    },
    /// Areal chart with mass function `m - sum a_k r^(-p_k)`.
    ArealProfile {
        n: usize,
        m: f64,
        r0: f64,
        terms: Vec<[f64; 2]>,
    },
    /// Seeded families with `R >= 0`.
    Generated {
        count: usize,
        dimensions: Vec<usize>,
        chart: GeneratedChart,
    },
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
enum Family {
    Flat,
    Schwarzschild,
    ArealSchwarzschild,
    PowerSum,
    ArealProfile,
    Generated,
}

impl Family {
    fn label(self) -> &'static str {
        match self {
            Family::Flat => "flat",
            Family::Schwarzschild => "schwarzschild",
            Family::ArealSchwarzschild => "areal-schwarzschild",
            Family::PowerSum => "power-sum",
            Family::ArealProfile => "areal-profile",
            Family::Generated => "generated",
        }
    }
}

/// The `[metric]` table as written; field errors keep their TOML position.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMetric {
    family: Family,
    n: Option<usize>,
    m: Option<f64>,
    r0: Option<f64>,
    terms: Option<Vec<[f64; 2]>>,
    count: Option<usize>,
    dimensions: Option<Vec<usize>>,
    chart: Option<GeneratedChart>,
}

impl TryFrom<RawMetric> for MetricSpec {
    type Error = String;

    fn try_from(raw: RawMetric) -> std::result::Result<Self, String> {
        let name = format!("family {}", raw.family.label());
        let need = |v: Option<f64>, field: &str| v.ok_or_else(|| format!("metric.{field} is required for {name}"));
        let n = || raw.n.ok_or_else(|| format!("metric.n is required for {name}"));
        let allowed: &[&str] = match raw.family {
            Family::Flat => &["n", "r0"],
            Family::Schwarzschild | Family::ArealSchwarzschild => &["n", "m", "r0"],
            Family::PowerSum => &["n", "r0", "terms"],
            Family::ArealProfile => &["n", "m", "r0", "terms"],
            Family::Generated => &["count", "dimensions", "chart"],
        };
        for (field, present) in [
            ("n", raw.n.is_some()),
            ("m", raw.m.is_some()),
            ("r0", raw.r0.is_some()),
            ("terms", raw.terms.is_some()),
            ("count", raw.count.is_some()),
            ("dimensions", raw.dimensions.is_some()),
            ("chart", raw.chart.is_some()),
        ] {
            if present && !allowed.contains(&field) {
                return Err(format!("metric.{field} is not a parameter of {name}"));
            }
        }
        Ok(match raw.family {
            Family::Flat => MetricSpec::Flat {
                n: n()?,
                r0: need(raw.r0, "r0")?,
            },
            Family::Schwarzschild => MetricSpec::Schwarzschild {
                n: n()?,
                m: need(raw.m, "m")?,
                r0: need(raw.r0, "r0")?,
            },
            Family::ArealSchwarzschild => MetricSpec::ArealSchwarzschild {
                n: n()?,
                m: need(raw.m, "m")?,
                r0: need(raw.r0, "r0")?,
            },
            Family::PowerSum => MetricSpec::PowerSum {
                n: n()?,
                r0: need(raw.r0, "r0")?,
                terms: raw.terms.unwrap_or_default(),
            },
            Family::ArealProfile => MetricSpec::ArealProfile {
                n: n()?,
                m: need(raw.m, "m")?,
                r0: need(raw.r0, "r0")?,
                terms: raw.terms.unwrap_or_default(),
            },
            Family::Generated => MetricSpec::Generated {
                count: raw.count.ok_or("metric.count is required for family generated")?,
                dimensions: raw.dimensions.unwrap_or_else(default_dimensions),
                chart: raw.chart.unwrap_or_default(),
            },
        })
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratedChart {
    #[default]
    ConformallyFlat,
    Areal,
}

fn default_dimensions() -> Vec<usize> {
    vec![3, 4, 5]
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    #[default]
    Check,
    Sweep,
    OracleValidation,
    FillIn,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub kind: ExperimentKind,
    #[serde(default = "default_theorem")]
    pub theorem: TheoremId,
}

fn default_theorem() -> TheoremId {
    TheoremId::ConformalGreen
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::default(),
            theorem: default_theorem(),
        }
    }
}

/// Parameter grids. An absent grid keeps the metric's own value; a present
/// one must be nonempty.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub c: Option<Vec<f64>>,
    pub m: Option<Vec<f64>>,
    pub r0: Option<Vec<f64>>,
    pub n: Option<Vec<usize>>,
    /// Use the Schwarzschild equality constant of each row instead of `c`.
    #[serde(default)]
    pub equality_c: bool,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub hypothesis: Option<f64>,
    pub conclusion: Option<f64>,
    pub equality: Option<f64>,
    pub residual: Option<f64>,
    pub oracle: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    pub prefix: Option<String>,
}

/// Every tolerance the runner uses, after overrides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunTolerances {
    pub theorem: Tolerances,
    /// Largest solver residual for a healthy row.
    pub residual: f64,
    /// Largest oracle deviation accepted by `validate-oracles`.
    pub oracle: f64,
}

impl Default for RunTolerances {
    fn default() -> Self {
        Self {
            theorem: Tolerances::default(),
            residual: 1e-8,
            oracle: 1e-8,
        }
    }
}

impl RunTolerances {
    pub fn apply(&mut self, o: &ToleranceOverrides) -> Result<()> {
        for (name, value) in [
            ("hypothesis", o.hypothesis),
            ("conclusion", o.conclusion),
            ("equality", o.equality),
            ("residual", o.residual),
            ("oracle", o.oracle),
        ] {
            if let Some(v) = value {
                self.set(name, v)?;
            }
        }
        Ok(())
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::Config(format!("tolerance {name} must be positive, got {value}")));
        }
        match name {
            "hypothesis" => self.theorem.hypothesis = value,
            "conclusion" => self.theorem.conclusion = value,
            "equality" => self.theorem.equality = value,
            "residual" => self.residual = value,
            "oracle" => self.oracle = value,
            other => {
                return Err(Error::Config(format!(
                    "unknown tolerance '{other}' (expected hypothesis, conclusion, equality, residual or oracle)"
                )))
            }
        }
        Ok(())
    }

    /// Parses `name=value`.
    pub fn set_from_str(&mut self, spec: &str) -> Result<()> {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("tolerance override '{spec}' is not of the form name=value")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|e| Error::Config(format!("tolerance override '{spec}': {e}")))?;
        self.set(name.trim(), value)
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    fn validate(&self) -> Result<()> {
        let g = &self.grid;
        for (name, empty) in [
            ("c", g.c.as_ref().is_some_and(Vec::is_empty)),
            ("m", g.m.as_ref().is_some_and(Vec::is_empty)),
            ("r0", g.r0.as_ref().is_some_and(Vec::is_empty)),
            ("n", g.n.as_ref().is_some_and(Vec::is_empty)),
        ] {
            if empty {
                return Err(Error::Config(format!("grid.{name} is empty")));
            }
        }
        if g.equality_c && g.c.is_some() {
            return Err(Error::Config("grid.c and grid.equality_c are mutually exclusive".into()));
        }
        if g.equality_c && !matches!(self.metric, MetricSpec::Schwarzschild { .. }) {
            return Err(Error::Config("grid.equality_c needs the schwarzschild family".into()));
        }
        if matches!(self.metric, MetricSpec::Generated { .. }) && (g.m.is_some() || g.r0.is_some() || g.n.is_some()) {
            return Err(Error::Config("generated families take no m, r0 or n grid".into()));
        }
        if needs_c(self.experiment.theorem) && g.c.is_none() && !g.equality_c {
            return Err(Error::Config(format!(
                "theorem {} needs grid.c or grid.equality_c",
                self.experiment.theorem
            )));
        }
        let mut t = RunTolerances::default();
        t.apply(&self.tolerances)?;
        Ok(())
    }

    /// The metrics of the experiment, in grid order, with identifiers.
    /// Grid axes vary slowest to fastest as `n`, `m`, `r0`.
    pub fn metric_rows(&self, seed: u64) -> Result<Vec<MetricRow>> {
        if let MetricSpec::Generated {
            count,
            dimensions,
            chart,
        } = &self.metric
        {
            let metrics = match chart {
                GeneratedChart::ConformallyFlat => {
                    sample_metric_family(seed, *count, dimensions, FamilyRanges::default())?
                }
                GeneratedChart::Areal => sample_areal_family(seed, *count, dimensions)?,
            };
            return Ok(metrics
                .into_iter()
                .enumerate()
                .map(|(i, metric)| MetricRow {
                    id: format!("generated-{seed}-{i}"),
                    n: metric.dimension(),
                    m: None,
                    r0: metric.boundary_radius(),
                    metric: Ok(metric),
                })
                .collect());
        }
        let (n0, m0, r00) = self.metric.base_parameters();
        let ns = self.grid.n.clone().unwrap_or_else(|| vec![n0]);
        let ms = self.grid.m.clone().unwrap_or_else(|| vec![m0]);
        let rs = self.grid.r0.clone().unwrap_or_else(|| vec![r00]);
        let mut rows = Vec::new();
        for &n in &ns {
            for &m in &ms {
                for &r0 in &rs {
                    let spec = self.metric.with_parameters(n, m, r0);
                    rows.push(MetricRow {
                        id: spec.identifier(),
                        n,
                        m: spec.mass_parameter(),
                        r0,
                        metric: spec.build(),
                    });
                }
            }
        }
        Ok(rows)
    }

    /// Boundary constants for one metric row.
    pub fn c_values(&self, row: &MetricRow) -> Vec<Result<f64>> {
        if self.grid.equality_c {
            return vec![schwarzschild_equality_constant(row.n, row.m.unwrap_or(0.0), row.r0)];
        }
        match &self.grid.c {
            Some(cs) => cs.iter().map(|&c| Ok(c)).collect(),
            None => Vec::new(),
        }
    }
}

pub fn needs_c(theorem: TheoremId) -> bool {
    matches!(
        theorem,
        TheoremId::MassCapacity | TheoremId::EquivalentForm
    )
}

/// One metric of an experiment; construction failures are kept per row.
#[derive(Debug, Clone)]
pub struct MetricRow {
    pub id: String,
    pub n: usize,
    pub m: Option<f64>,
    pub r0: f64,
    pub metric: Result<RadialMetric>,
}

fn terms_of(terms: &[[f64; 2]]) -> Vec<PowerTerm> {
    terms.iter().map(|t| PowerTerm::new(t[0], t[1])).collect()
}

impl MetricSpec {
    fn base_parameters(&self) -> (usize, f64, f64) {
        match self {
            MetricSpec::Flat { n, r0 } | MetricSpec::PowerSum { n, r0, .. } => (*n, 0.0, *r0),
            MetricSpec::Schwarzschild { n, m, r0 }
            | MetricSpec::ArealSchwarzschild { n, m, r0 }
            | MetricSpec::ArealProfile { n, m, r0, .. } => (*n, *m, *r0),
            MetricSpec::Generated { .. } => unreachable!("generated families have no base parameters"),
        }
    }

    fn with_parameters(&self, n: usize, m: f64, r0: f64) -> Self {
        match self {
            MetricSpec::Flat { .. } => MetricSpec::Flat { n, r0 },
            MetricSpec::PowerSum { terms, .. } => MetricSpec::PowerSum {
                n,
                r0,
                terms: terms.clone(),
            },
            MetricSpec::Schwarzschild { .. } => MetricSpec::Schwarzschild { n, m, r0 },
            MetricSpec::ArealSchwarzschild { .. } => MetricSpec::ArealSchwarzschild { n, m, r0 },
            MetricSpec::ArealProfile { terms, .. } => MetricSpec::ArealProfile {
                n,
                m,
                r0,
                terms: terms.clone(),
            },
            MetricSpec::Generated { .. } => self.clone(),
        }
    }

    fn mass_parameter(&self) -> Option<f64> {
        match self {
            MetricSpec::Schwarzschild { m, .. }
            | MetricSpec::ArealSchwarzschild { m, .. }
            | MetricSpec::ArealProfile { m, .. } => Some(*m),
            MetricSpec::Flat { .. } => Some(0.0),
            _ => None,
        }
    }

    fn identifier(&self) -> String {
        match self {
            MetricSpec::Flat { n, r0 } => format!("flat(n={n},r0={r0})"),
            MetricSpec::Schwarzschild { n, m, r0 } => format!("schwarzschild(n={n},m={m},r0={r0})"),
            MetricSpec::ArealSchwarzschild { n, m, r0 } => format!("areal-schwarzschild(n={n},m={m},r0={r0})"),
            MetricSpec::PowerSum { n, r0, terms } => format!("power-sum(n={n},r0={r0},terms={})", terms.len()),
            MetricSpec::ArealProfile { n, m, r0, terms } => {
                format!("areal-profile(n={n},m={m},r0={r0},terms={})", terms.len())
            }
            MetricSpec::Generated { count, .. } => format!("generated({count})"),
        }
    }

    fn build(&self) -> Result<RadialMetric> {
        match self {
            MetricSpec::Flat { n, r0 } => flat(*n, *r0),
            MetricSpec::Schwarzschild { n, m, r0 } => schwarzschild(*n, *m, *r0),
            MetricSpec::ArealSchwarzschild { n, m, r0 } => areal_schwarzschild(*n, *m, *r0),
            MetricSpec::PowerSum { n, r0, terms } => power_sum_metric(*n, *r0, &terms_of(terms)),
            MetricSpec::ArealProfile { n, m, r0, terms } => areal_mass_profile(*n, *m, *r0, &terms_of(terms)),
            MetricSpec::Generated { .. } => Err(Error::Config("generated families are expanded per row".into())),
        }
    }
}
