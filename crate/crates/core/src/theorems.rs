//! Hypotheses and conclusions of the boundary positive mass and
//! mass-capacity inequalities, evaluated as numerical verdicts on radial
//! metrics.
//!
//! Every hypothesis margin is expressed in units of mean curvature,
//! `(bound on H) - H`, so margins of different statements can be compared.

use std::fmt;

use crate::conformal::conformal_mean_curvature;
use crate::elliptic::{
    harmonic_with_boundary_from, normal_derivative_at_boundary, solve_conformal_green, solve_harmonic_green,
    BVPSolution, ProblemKind,
};
use crate::error::{Error, Result};
use crate::geometry::{
    adm_mass, mean_curvature_sphere, radial_laplacian, require_nonnegative_scalar, RadialMetric, RadialProfile,
    TailDescriptor,
};
use crate::numerics::Jet;

/// Boundary constants above this are accepted but flagged as poorly conditioned.
pub const LARGE_BOUNDARY_CONSTANT: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    /// A hypothesis holds when its margin is at least `-hypothesis`.
    pub hypothesis: f64,
    /// A conclusion fails when its margin is below `-conclusion`.
    pub conclusion: f64,
    /// Margins within `equality` of zero count as equality.
    pub equality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hypothesis: 1e-8,
            conclusion: 1e-6,
            equality: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremId {
    /// `H <= -(n-1)/(n-2) d_nu u` implies `m >= 0`.
    ConformalGreen,
    /// The same with the harmonic Green's function `v`.
    HarmonicGreen,
    /// `H <= 0`-type boundary: `m >= C_v`, the capacity of the boundary.
    Capacity,
    /// `m >= C` for the harmonic `phi` with `phi = c` on the boundary.
    MassCapacity,
    /// `m >= (1 - c) C_v` under the rescaled boundary condition.
    EquivalentForm,
}

impl TheoremId {
    pub fn label(self) -> &'static str {
        match self {
            TheoremId::ConformalGreen => "conformal-green",
            TheoremId::HarmonicGreen => "harmonic-green",
            TheoremId::Capacity => "capacity",
            TheoremId::MassCapacity => "mass-capacity",
            TheoremId::EquivalentForm => "equivalent-form",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct EqualityFlags {
    pub hypothesis_equality: bool,
    pub conclusion_equality: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RigidityModel {
    FlatExterior,
    SchwarzschildExterior,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub theorem_id: TheoremId,
    pub c: Option<f64>,
    /// `>= 0` when the boundary hypothesis holds.
    pub condition_margin: f64,
    pub mass: f64,
    pub mass_error: f64,
    /// The constant bounding the mass from below (zero for positivity).
    pub capacity_constant: f64,
    /// `mass - capacity_constant`.
    pub conclusion_margin: f64,
    pub equality_flags: EqualityFlags,
    pub rigidity_model: RigidityModel,
    pub rigidity_residual: f64,
    pub solver_residual: f64,
    /// `d_nu v - d_nu u` at the boundary; recorded by the harmonic-Green check.
    pub implication_margin: Option<f64>,
    pub warnings: Vec<String>,
}

impl Verdict {
    pub fn hypothesis_holds(&self, tol: &Tolerances) -> bool {
        self.condition_margin >= -tol.hypothesis
    }

    pub fn conclusion_holds(&self, tol: &Tolerances) -> bool {
        self.conclusion_margin >= -tol.conclusion
    }

    /// Hypothesis holds but conclusion fails: on `R >= 0` input this can only
    /// be a numerical defect.
    pub fn contradicts_theorem(&self, tol: &Tolerances) -> bool {
        self.hypothesis_holds(tol) && !self.conclusion_holds(tol)
    }

    pub fn flags(&self, tol: &Tolerances) -> EqualityFlags {
        EqualityFlags {
            hypothesis_equality: self.condition_margin.abs() <= tol.equality,
            conclusion_equality: self.conclusion_margin.abs() <= tol.equality,
        }
    }

    /// Both margins vanish: the configuration sits on the equality case.
    pub fn is_equality_case(&self, tol: &Tolerances) -> bool {
        let f = self.flags(tol);
        f.hypothesis_equality && f.conclusion_equality
    }

    fn finish(mut self) -> Self {
        self.equality_flags = self.flags(&Tolerances::default());
        if self.contradicts_theorem(&Tolerances::default()) {
            self.warnings.push(format!(
                "{}: hypothesis holds (margin {:e}) but mass {:e} is below the bound {:e}",
                self.theorem_id, self.condition_margin, self.mass, self.capacity_constant
            ));
        }
        self
    }
}

fn hypothesis_scale(metric: &RadialMetric) -> f64 {
    let n = metric.dimension() as f64;
    (n - 1.0) / (n - 2.0)
}

fn verdict(
    id: TheoremId,
    c: Option<f64>,
    condition_margin: f64,
    metric: &RadialMetric,
    capacity_constant: f64,
    model: RigidityModel,
    solver_residual: f64,
) -> Result<Verdict> {
    let mass = adm_mass(metric)?;
    let mut warnings = Vec::new();
    if let Some(c) = c {
        if c > LARGE_BOUNDARY_CONSTANT {
            warnings.push(format!("boundary constant c = {c} is large; margins lose relative accuracy"));
        }
    }
    Ok(Verdict {
        theorem_id: id,
        c,
        condition_margin,
        mass: mass.mass,
        mass_error: mass.error,
        capacity_constant,
        conclusion_margin: mass.mass - capacity_constant,
        equality_flags: EqualityFlags {
            hypothesis_equality: false,
            conclusion_equality: false,
        },
        rigidity_model: model,
        rigidity_residual: rigidity_residual(metric, model),
        solver_residual,
        implication_margin: None,
        warnings,
    }
    .finish())
}

/// `H <= -(n-1)/(n-2) d_nu u` at the boundary implies `m >= 0`, with
/// equality only for flat space minus a round ball.
pub fn check_theorem_main(metric: &RadialMetric) -> Result<Verdict> {
    require_nonnegative_scalar(metric)?;
    let u = solve_conformal_green(metric)?;
    let h = mean_curvature_sphere(metric, metric.boundary_radius())?;
    let margin = -hypothesis_scale(metric) * u.normal_derivative_at_boundary - h;
    verdict(
        TheoremId::ConformalGreen,
        None,
        margin,
        metric,
        0.0,
        RigidityModel::FlatExterior,
        u.residual_norm,
    )
}

/// The harmonic-Green version. Since `u <= v` under `R >= 0`, its hypothesis
/// implies the conformal one; `implication_margin = d_nu v - d_nu u >= 0`.
pub fn check_corollary(metric: &RadialMetric) -> Result<Verdict> {
    require_nonnegative_scalar(metric)?;
    let v = solve_harmonic_green(metric)?;
    let u = solve_conformal_green(metric)?;
    let h = mean_curvature_sphere(metric, metric.boundary_radius())?;
    let margin = -hypothesis_scale(metric) * v.normal_derivative_at_boundary - h;
    let mut out = verdict(
        TheoremId::HarmonicGreen,
        None,
        margin,
        metric,
        0.0,
        RigidityModel::FlatExterior,
        v.residual_norm.max(u.residual_norm),
    )?;
    out.implication_margin = Some(v.normal_derivative_at_boundary - u.normal_derivative_at_boundary);
    Ok(out)
}

fn admissible_c(c: f64, allow_one: bool) -> Result<()> {
    if !(c > -1.0) || !c.is_finite() {
        return Err(Error::InvalidBoundaryConstant(c, "the inequality requires c > -1".into()));
    }
    if c == 1.0 && !allow_one {
        return Err(Error::InvalidBoundaryConstant(
            c,
            "c = 1 is excluded (the boundary condition divides by 1 - c^2)".into(),
        ));
    }
    Ok(())
}

/// `(2c/(1-c^2)) d_nu phi >= (n-2)/(n-1) H` implies `m >= C`, where
/// `phi = c` on the boundary, `phi -> 1` and `phi = 1 - C r^(2-n) + ...`.
///
/// The margin is the hypothesis multiplied through by `(n-1)/(n-2)`.
pub fn check_mass_capacity(metric: &RadialMetric, c: f64) -> Result<Verdict> {
    admissible_c(c, false)?;
    require_nonnegative_scalar(metric)?;
    let v = solve_harmonic_green(metric)?;
    let phi = harmonic_with_boundary_from(&v, c);
    let h = mean_curvature_sphere(metric, metric.boundary_radius())?;
    let margin = hypothesis_scale(metric) * (2.0 * c / (1.0 - c * c)) * phi.normal_derivative_at_boundary - h;
    verdict(
        TheoremId::MassCapacity,
        Some(c),
        margin,
        metric,
        phi.expansion_constant,
        RigidityModel::SchwarzschildExterior,
        phi.residual_norm,
    )
}

/// `(2c/(1+c)) d_nu f >= (n-2)/(n-1) H` for `f = 1 - v` implies
/// `m >= (1 - c) C_v`. At `c = 0` this is the capacity bound, at `c = 1`
/// the harmonic-Green statement.
pub fn check_equivalent_form(metric: &RadialMetric, c: f64) -> Result<Verdict> {
    admissible_c(c, true)?;
    require_nonnegative_scalar(metric)?;
    if c == 1.0 {
        let mut out = check_corollary(metric)?;
        out.theorem_id = TheoremId::EquivalentForm;
        out.c = Some(1.0);
        return Ok(out);
    }
    let v = solve_harmonic_green(metric)?;
    let h = mean_curvature_sphere(metric, metric.boundary_radius())?;
    let grad_f = -v.normal_derivative_at_boundary;
    let margin = hypothesis_scale(metric) * (2.0 * c / (1.0 + c)) * grad_f - h;
    let id = if c == 0.0 {
        TheoremId::Capacity
    } else {
        TheoremId::EquivalentForm
    };
    verdict(
        id,
        Some(c),
        margin,
        metric,
        (1.0 - c) * v.expansion_constant,
        RigidityModel::SchwarzschildExterior,
        v.residual_norm,
    )
}

/// The boundary constant for which a Schwarzschild exterior of mass `m`
/// outside `r0` is an equality case: `(2 r0^(n-2) - m) / (2 r0^(n-2) + m)`.
pub fn schwarzschild_equality_constant(n: usize, m: f64, r0: f64) -> Result<f64> {
    let a = 2.0 * r0.powf((n as f64) - 2.0);
    if !(a + m > 0.0) {
        return Err(Error::DegenerateMetric(format!(
            "conformal factor vanishes on the boundary (2 r0^(n-2) + m = {})",
            a + m
        )));
    }
    Ok((a - m) / (a + m))
}

fn sample_radii(metric: &RadialMetric, count: usize) -> Vec<f64> {
    let t_min = metric.min_reliable_t().max(1e-9);
    let half = count / 2;
    (0..count)
        .map(|k| {
            let t = if k < half {
                1.0 - 0.75 * k as f64 / half as f64
            } else {
                0.25 * (t_min / 0.25).powf((k - half + 1) as f64 / (count - half) as f64)
            };
            metric.r_of(t)
        })
        .collect()
}

/// Sup-norm distance of the metric from the model family.
///
/// Every radial metric can be written `d rho^2 / F(rho) + rho^2 g_round`
/// with `F = (d rho / ds)^2`, independent of the radial gauge. Flat space has
/// `F = 1`; Schwarzschild of mass `m` has `F = 1 - 2m rho^(2-n)`, with `m`
/// fitted by least squares.
pub fn rigidity_residual(metric: &RadialMetric, model: RigidityModel) -> f64 {
    let s = metric.exponent();
    let mut samples = Vec::new();
    for r in sample_radii(metric, 200) {
        let w = metric.jets(r).expect("sample radius lies in the domain");
        let a = w.a().value;
        let rho = w.rho();
        // rho' - a = db + r db' - da
        let drho_minus_a = w.db.value + r * w.db.d1 - w.da.value;
        let one_minus_f = -drho_minus_a * (rho.d1 + a) / (a * a);
        samples.push((rho.value.powf(-s), one_minus_f));
    }
    let two_m = match model {
        RigidityModel::FlatExterior => 0.0,
        RigidityModel::SchwarzschildExterior => {
            let num: f64 = samples.iter().map(|(x, y)| x * y).sum();
            let den: f64 = samples.iter().map(|(x, _)| x * x).sum();
            num / den
        }
    };
    samples.iter().map(|(x, y)| (y - two_m * x).abs()).fold(0.0, f64::max)
}

/// Output of the transformation `g~ = ((1 + phi)/2)^(4/(n-2)) g` that turns
/// the mass-capacity statement into the harmonic-Green one.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub metric: RadialMetric,
    /// `(1+c)/(1-c) (w - 1)` with `w = 2/(1+phi)`: harmonic for `g~`, `1` on
    /// the boundary, `0` at infinity.
    pub v: BVPSolution,
    pub w_at_boundary: f64,
    /// Largest relative `|Delta~ w|` over sampled radii.
    pub harmonic_residual: f64,
    pub mass: f64,
    pub reduced_mass: f64,
    pub capacity_constant: f64,
}

impl Reduction {
    /// `|m~ - (m - C)|`.
    pub fn mass_identity_gap(&self) -> f64 {
        (self.reduced_mass - (self.mass - self.capacity_constant)).abs()
    }
}

pub fn reduce_to_corollary(metric: &RadialMetric, phi: &BVPSolution, c: f64) -> Result<Reduction> {
    admissible_c(c, false)?;
    if !matches!(phi.kind, ProblemKind::HarmonicWithBoundary { .. }) || (phi.boundary_value - c).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "expected the harmonic function with boundary value {c}"
        )));
    }
    let n = metric.dimension();
    let r0 = metric.boundary_radius();
    for r in sample_radii(metric, 200) {
        let value = phi.value(r);
        if !(value > -1.0) {
            return Err(Error::MaximumPrincipleViolation(format!("phi = {value} <= -1 at r = {r}")));
        }
    }

    let dev = phi.function.clone();
    let half = RadialProfile::custom(
        n,
        r0,
        1.0,
        TailDescriptor {
            exponent: dev.tail().exponent,
            coefficient: 0.5 * dev.tail().coefficient,
        },
        {
            let dev = dev.clone();
            move |r| dev.deviation(r).scale(0.5)
        },
    )?
    .with_min_reliable_t(dev.min_reliable_t());
    let reduced = metric.conformally_scaled(&half, metric.scalar_decay_order())?;

    // w - 1 = -d / (2 + d) with d = phi - 1
    let k = (1.0 + c) / (1.0 - c);
    let w_minus_one = {
        let dev = dev.clone();
        move |r: f64| {
            let d = dev.deviation(r);
            -d / (d + 2.0)
        }
    };
    let capacity = phi.expansion_constant;
    let v_profile = RadialProfile::custom(
        n,
        r0,
        0.0,
        TailDescriptor {
            exponent: dev.tail().exponent,
            coefficient: 0.5 * k * capacity,
        },
        {
            let f = w_minus_one.clone();
            move |r| f(r).scale(k)
        },
    )?
    .with_min_reliable_t(dev.min_reliable_t());

    let mut harmonic_residual = 0.0f64;
    for r in sample_radii(&reduced, 200) {
        let w = w_minus_one(r) + 1.0;
        let lap = radial_laplacian(&reduced, r, w)?;
        let scale = radial_laplacian(&reduced, r, Jet::new(0.0, w.d1.abs(), w.d2.abs()))?.abs()
            + radial_laplacian(&reduced, r, Jet::new(0.0, 0.0, w.d2.abs()))?.abs();
        if scale > 0.0 {
            harmonic_residual = harmonic_residual.max(lap.abs() / scale);
        }
    }

    let mut v = BVPSolution {
        kind: ProblemKind::HarmonicGreen,
        boundary_value: v_profile.value(r0),
        function: v_profile,
        expansion_constant: 0.5 * k * capacity,
        expansion_error: 0.5 * k.abs() * phi.expansion_error,
        residual_norm: harmonic_residual,
        normal_derivative_at_boundary: 0.0,
    };
    v.normal_derivative_at_boundary = normal_derivative_at_boundary(&v, &reduced)?;
    let mass = adm_mass(metric)?.mass;
    let reduced_mass = adm_mass(&reduced)?.mass;
    Ok(Reduction {
        metric: reduced,
        v,
        w_at_boundary: 1.0 + w_minus_one(r0).value,
        harmonic_residual,
        mass,
        reduced_mass,
        capacity_constant: capacity,
    })
}

/// Checks of the conformal-minimal-boundary construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimalBoundaryReport {
    /// `sup |f v - (2 - f)|` where `f = 2 - v~` is solved on `g~`
    /// independently of `v`.
    pub identity_residual: f64,
    /// Mean curvature of the boundary for `g~ = ((1+v)/2)^(4/(n-2)) g`.
    pub h_tilde: f64,
    /// Difference between `h_tilde` computed from the metric `g~` directly and
    /// from the conformal change formula.
    pub h_tilde_formula_gap: f64,
    /// `H + (n-1)/(n-2) d_nu v`: zero exactly when the harmonic-Green
    /// hypothesis holds with equality.
    pub boundary_equality_gap: f64,
}

impl MinimalBoundaryReport {
    pub fn boundary_is_minimal(&self, tol: f64) -> bool {
        self.h_tilde.abs() <= tol
    }
}

pub fn conformal_minimal_boundary_check(metric: &RadialMetric) -> Result<MinimalBoundaryReport> {
    require_nonnegative_scalar(metric)?;
    let n = metric.dimension();
    let s = metric.exponent();
    let r0 = metric.boundary_radius();
    let v = solve_harmonic_green(metric)?;
    // (1 + v)^(4/s) g: the same as g~ up to the constant factor 2^(4/s), so
    // harmonic functions agree and mean curvatures differ by 2^(2/s)
    let vf = v.function.clone();
    let one_plus_v = RadialProfile::custom(
        n,
        r0,
        1.0,
        vf.tail(),
        move |r| vf.deviation(r),
    )?
    .with_min_reliable_t(v.function.min_reliable_t());
    let scaled = metric.conformally_scaled(&one_plus_v, metric.scalar_decay_order())?;
    let v_tilde = solve_harmonic_green(&scaled)?;

    let mut identity_residual = 0.0f64;
    for r in sample_radii(metric, 200) {
        let f = 2.0 - v_tilde.value(r);
        identity_residual = identity_residual.max((f * v.value(r) - (2.0 - f)).abs());
    }

    let h = mean_curvature_sphere(metric, r0)?;
    let h_tilde = 2f64.powf(2.0 / s) * mean_curvature_sphere(&scaled, r0)?;
    let h_formula = conformal_mean_curvature(h, 1.0, 0.5 * v.normal_derivative_at_boundary, n, false);
    Ok(MinimalBoundaryReport {
        identity_residual,
        h_tilde,
        h_tilde_formula_gap: (h_tilde - h_formula).abs(),
        boundary_equality_gap: h + hypothesis_scale(metric) * v.normal_derivative_at_boundary,
    })
}

/// `(f/2)^(4/(n-2)) g0` with `f = 2 - v0` harmonic for `g0`: a metric whose
/// boundary satisfies the harmonic-Green hypothesis with equality, built
/// from a base `g0` whose boundary is minimal.
pub fn minimal_boundary_equality_model(base: &RadialMetric) -> Result<RadialMetric> {
    let r0 = base.boundary_radius();
    let h = mean_curvature_sphere(base, r0)?;
    if h.abs() > 1e-10 * (base.dimension() as f64 - 1.0) / r0 {
        return Err(Error::InvalidParameter(format!(
            "the base boundary must be minimal, H = {h:e}"
        )));
    }
    let v0 = solve_harmonic_green(base)?;
    let vf = v0.function.clone();
    let factor = RadialProfile::custom(
        base.dimension(),
        r0,
        1.0,
        TailDescriptor {
            exponent: vf.tail().exponent,
            coefficient: -0.5 * vf.tail().coefficient,
        },
        move |r| vf.deviation(r).scale(-0.5),
    )?
    .with_min_reliable_t(v0.function.min_reliable_t());
    base.conformally_scaled(&factor, base.scalar_decay_order())
}
