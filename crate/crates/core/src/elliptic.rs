//! The three radial boundary-value problems on `[r0, inf)`: the conformal
//! Green's function `u`, the harmonic Green's function `v` and the harmonic
//! function `phi` with boundary value `c`.
//!
//! All problems are posed in `t = (r0/r)^(n-2)`. Writing the metric as
//! `a^2 dr^2 + (r b)^2 g_round`, a radial function `f` satisfies
//!
//! `(p f_t)_t = q f`, with `p = b^(n-1)/a` and
//! `q = k R a b^(n-1) r^2 / ((n-2)^2 t^2)`, `k = (n-2)/(4(n-1))`,
//!
//! so `Delta f = 0` is the case `q = 0`. `p(0) = 1`, and the decay condition
//! at infinity becomes `f(0) = 0`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::curvature::scalar_curvature;
use crate::geometry::{MetricForm, RadialMetric, RadialProfile, TailDescriptor};
use crate::numerics::chebyshev::{
    differentiation_matrix, graded_breakpoints, integration_matrix, lobatto_nodes, PiecewiseChebyshev,
};
use crate::numerics::extrapolation::decay_order_fit;
use crate::numerics::quadrature::integrate;
use crate::numerics::Jet;

/// Which problem a [`BVPSolution`] solves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemKind {
    /// `Delta u - k R u = 0`, `u = 1` on the boundary, `u -> 0`.
    ConformalGreen,
    /// `Delta v = 0`, `v = 1` on the boundary, `v -> 0`.
    HarmonicGreen,
    /// `Delta phi = 0`, `phi = c` on the boundary, `phi -> 1`.
    HarmonicWithBoundary { c: f64 },
}

#[derive(Debug, Clone)]
pub struct BVPSolution {
    pub kind: ProblemKind,
    pub function: RadialProfile,
    pub boundary_value: f64,
    /// Coefficient `K` of `r^(-(n-2))` in `f = limit -/+ K r^(-(n-2)) + ...`:
    /// `D` for `u`, the capacity `C` for `v`, and `C = (1-c) C_v` for `phi`
    /// (where `phi = 1 - C r^(-(n-2)) + ...`).
    pub expansion_constant: f64,
    pub expansion_error: f64,
    pub residual_norm: f64,
    pub normal_derivative_at_boundary: f64,
}

impl BVPSolution {
    pub fn dimension(&self) -> usize {
        self.function.dimension()
    }

    pub fn boundary_radius(&self) -> f64 {
        self.function.domain_start()
    }

    pub fn value(&self, r: f64) -> f64 {
        self.function.value(r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mesh {
    /// Breakpoints `0, g^(K-1), ..., g, 1`.
    Graded { elements: usize, ratio: f64 },
    Uniform { elements: usize },
}

impl Mesh {
    fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Mesh::Graded { elements, ratio } => graded_breakpoints(elements, ratio),
            Mesh::Uniform { elements } => (0..=elements).map(|k| k as f64 / elements as f64).collect(),
        }
    }

    fn elements(&self) -> usize {
        match *self {
            Mesh::Graded { elements, .. } | Mesh::Uniform { elements } => elements,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub mesh: Mesh,
    /// Polynomial degree per element.
    pub degree: usize,
    /// Bound on the relative off-node ODE residual.
    pub residual_tolerance: f64,
    /// Passes of bisecting elements whose residual exceeds a hundredth of
    /// the tolerance.
    pub max_refinements: usize,
    /// Quadrature tolerance (absolute and relative).
    pub quadrature_tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            mesh: Mesh::Graded {
                elements: 14,
                ratio: 0.25,
            },
            degree: 24,
            residual_tolerance: 1e-8,
            max_refinements: 8,
            quadrature_tolerance: 1e-13,
        }
    }
}

/// Coefficients `(p, p_t, q)` of the radial equation at `t`.
pub(crate) struct Coefficients<'a> {
    metric: &'a RadialMetric,
    s: f64,
    kappa: f64,
}

impl<'a> Coefficients<'a> {
    pub(crate) fn new(metric: &'a RadialMetric) -> Self {
        let n = metric.dimension() as f64;
        let s = metric.exponent();
        Self {
            metric,
            s,
            kappa: s / (4.0 * (n - 1.0)),
        }
    }

    /// `p = b^(n-1)/a` and `p_t`.
    pub(crate) fn principal(&self, t: f64) -> Result<(f64, f64)> {
        if t <= 0.0 {
            return Ok((1.0, 0.0));
        }
        let r = self.metric.r_of(t);
        let nm1 = self.metric.dimension() as f64 - 1.0;
        let (p, log_dr) = match self.metric.form() {
            MetricForm::ConformallyFlat { factor } => {
                let u = factor.jet(r);
                (u.value * u.value, 2.0 * u.d1 / u.value)
            }
            MetricForm::WarpedProduct { .. } => {
                let w = self.metric.jets(r)?;
                let a = w.a();
                let b = w.b();
                (
                    b.value.powf(nm1) / a.value,
                    nm1 * b.d1 / b.value - a.d1 / a.value,
                )
            }
        };
        // d/dt = -(r / (s t)) d/dr
        Ok((p, -(r / (self.s * t)) * p * log_dr))
    }

    /// Zeroth-order coefficient `q`.
    pub(crate) fn potential(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        let r = self.metric.r_of(t);
        let s = self.s;
        let n = self.metric.dimension() as f64;
        let scale = r * r / (s * s * t * t);
        Ok(match self.metric.form() {
            MetricForm::ConformallyFlat { factor } => {
                let u = factor.jet(r);
                let lap = u.d2 + (n - 1.0) * u.d1 / r;
                -u.value * lap * scale
            }
            MetricForm::WarpedProduct { .. } => {
                let w = self.metric.jets(r)?;
                let rc = scalar_curvature(self.metric, r)?;
                self.kappa * rc * w.a().value * w.b().value.powf(n - 1.0) * scale
            }
        })
    }
}

/// Converts a function of `t` with jets `(f, f_t, f_tt)` to a jet in `r`.
pub(crate) fn t_jet_to_r(s: f64, r: f64, t: f64, f: (f64, f64, f64)) -> Jet {
    let tr = -s * t / r;
    let trr = s * (s + 1.0) * t / (r * r);
    Jet::new(f.0, f.1 * tr, f.2 * tr * tr + f.1 * trr)
}

/// `nabla_nu f = f'(r0) / a(r0)` with `nu` the unit normal pointing to infinity.
pub fn normal_derivative_at_boundary(solution: &BVPSolution, metric: &RadialMetric) -> Result<f64> {
    let r0 = metric.boundary_radius();
    Ok(solution.function.deviation(r0).d1 / metric.jets(r0)?.a().value)
}

/// Solves the conformal Green's function problem with default options.
pub fn solve_conformal_green(metric: &RadialMetric) -> Result<BVPSolution> {
    solve_conformal_green_with(metric, &SolverOptions::default())
}

/// Collocation matrix and solve on fixed breakpoints; returns nodal values
/// per element and whether the potential was non-negative at all nodes.
fn collocate(coef: &Coefficients, bp: &[f64], deg: usize) -> Result<(Vec<Vec<f64>>, bool)> {
    let k = bp.len() - 1;
    let m = deg + 1;
    let size = k * m;
    let reference = lobatto_nodes(deg);
    let d = differentiation_matrix(deg);
    let d2 = &d * &d;

    let mut a = DMatrix::<f64>::zeros(size, size);
    let mut rhs = DVector::<f64>::zeros(size);
    let mut row = 0;
    let mut nonneg_potential = true;
    for e in 0..k {
        let (lo, hi) = (bp[e], bp[e + 1]);
        let h = 2.0 / (hi - lo);
        for i in 1..deg {
            let t = lo + 0.5 * (reference[i] + 1.0) * (hi - lo);
            let (p, pt) = coef.principal(t)?;
            let q = coef.potential(t)?;
            nonneg_potential &= q >= 0.0;
            for j in 0..m {
                a[(row, e * m + j)] = p * h * h * d2[(i, j)] + pt * h * d[(i, j)];
            }
            a[(row, e * m + i)] -= q;
            row += 1;
        }
    }
    // interfaces: node 0 of element e (right end) meets node N of element e+1
    for e in 0..k - 1 {
        let hl = 2.0 / (bp[e + 1] - bp[e]);
        let hr = 2.0 / (bp[e + 2] - bp[e + 1]);
        a[(row, e * m)] = 1.0;
        a[(row, (e + 1) * m + deg)] = -1.0;
        row += 1;
        for j in 0..m {
            a[(row, e * m + j)] = hl * d[(0, j)];
            a[(row, (e + 1) * m + j)] = -hr * d[(deg, j)];
        }
        row += 1;
    }
    a[(row, deg)] = 1.0;
    row += 1;
    a[(row, (k - 1) * m)] = 1.0;
    rhs[row] = 1.0;
    debug_assert_eq!(row + 1, size);

    for i in 0..size {
        let scale = a.row(i).iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if scale > 0.0 {
            a.row_mut(i).scale_mut(1.0 / scale);
            rhs[i] /= scale;
        }
    }
    let x = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SolverFailure("collocation matrix is singular".into()))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SolverFailure("non-finite collocation solution".into()));
    }
    Ok((
        (0..k).map(|e| x.rows(e * m, m).iter().copied().collect()).collect(),
        nonneg_potential,
    ))
}

/// Off-node residual on each element, measured against the terms of the
/// equation and the natural scale `|u| / h^2` of the element.
fn element_residuals(coef: &Coefficients, interp: &PiecewiseChebyshev) -> Result<Vec<f64>> {
    let bp = interp.breakpoints();
    let deg = interp.degree();
    let reference = lobatto_nodes(deg);
    (0..bp.len() - 1)
        .map(|e| {
            let (lo, hi) = (bp[e], bp[e + 1]);
            let h = 0.5 * (hi - lo);
            let umax = interp.nodal_values(e).iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let mut worst = 0.0f64;
            for i in 0..deg {
                let x = 0.5 * (reference[i] + reference[i + 1]);
                let t = lo + (x + 1.0) * h;
                let (u, ut, utt) = interp.eval(t);
                let (p, pt) = coef.principal(t)?;
                let q = coef.potential(t)?;
                let terms = [p * utt, pt * ut, -q * u];
                let scale = terms.iter().map(|x| x.abs()).sum::<f64>() + p * umax / (h * h);
                worst = worst.max(terms.iter().sum::<f64>().abs() / scale.max(f64::MIN_POSITIVE));
            }
            Ok(worst)
        })
        .collect()
}

/// Chebyshev collocation in `t` with continuity of `u` and `u_t` across
/// element interfaces and `u(0) = 0`, `u(1) = 1`. Elements whose residual
/// exceeds a hundredth of the tolerance are bisected.
///
/// The collocation values are then re-integrated through the flux form
/// `(p u_t)(t) = D' + int_0^t q u`, `u = int_0^t (p u_t) / p`, which keeps
/// relative accuracy as `u -> 0`; the mismatch `|u(1) - 1|` of the
/// re-integrated solution enters the residual.
pub fn solve_conformal_green_with(metric: &RadialMetric, opts: &SolverOptions) -> Result<BVPSolution> {
    let deg = opts.degree;
    if deg < 2 || opts.mesh.elements() == 0 {
        return Err(Error::InvalidParameter("mesh needs at least one element of degree >= 2".into()));
    }
    let coef = Coefficients::new(metric);
    let s = metric.exponent();
    let mut bp = opts.mesh.breakpoints();
    let mut pass = 0;
    let (colloc, nonneg_potential) = loop {
        let (values, nonneg) = collocate(&coef, &bp, deg)?;
        let interp = PiecewiseChebyshev::from_nodal_values(bp.clone(), deg, values);
        let res = element_residuals(&coef, &interp)?;
        if pass == opts.max_refinements || res.iter().all(|&r| r <= 0.01 * opts.residual_tolerance) {
            break (interp, nonneg);
        }
        let mut next = vec![0.0];
        for e in 0..bp.len() - 1 {
            if res[e] > 0.01 * opts.residual_tolerance {
                next.push(0.5 * (bp[e] + bp[e + 1]));
            }
            next.push(bp[e + 1]);
        }
        bp = next;
        pass += 1;
    };
    let k = bp.len() - 1;
    let m = deg + 1;

    // maximum principle: u > 0 inside, and u <= 1 when the potential is non-negative
    for e in 0..k {
        for (j, &uj) in colloc.nodal_values(e).iter().enumerate() {
            let interior = !(e == 0 && j == deg);
            if interior && uj <= 0.0 {
                return Err(Error::MaximumPrincipleViolation(format!(
                    "conformal Green's function is not positive (u = {uj:e})"
                )));
            }
            if nonneg_potential && uj > 1.0 + 1e-10 {
                return Err(Error::MaximumPrincipleViolation(format!(
                    "u = {uj} exceeds its boundary value with R >= 0"
                )));
            }
        }
    }

    let qu = |t: f64| coef.potential(t).unwrap_or(f64::NAN) * colloc.eval(t).0;
    let (p1, _) = coef.principal(1.0)?;
    let ut1 = colloc.eval(1.0).1;
    let abs_tol = 1e-16 * (p1 * ut1).abs();
    let mut cum_qu = vec![0.0];
    let mut flux_error = 0.0;
    for e in 0..k {
        let i = integrate(qu, bp[e], bp[e + 1], abs_tol, opts.quadrature_tolerance);
        cum_qu.push(cum_qu[e] + i.value);
        flux_error += i.error;
    }
    if !cum_qu[k].is_finite() {
        return Err(Error::SolverFailure("potential integral is not finite".into()));
    }
    let flux0 = p1 * ut1 - cum_qu[k];
    let reference = lobatto_nodes(deg);
    let qmat = integration_matrix(deg);
    let mut refined = Vec::with_capacity(k);
    let mut left_value = 0.0;
    for e in 0..k {
        let (lo, hi) = (bp[e], bp[e + 1]);
        let h = 0.5 * (hi - lo);
        let mut g_over_p = Vec::with_capacity(m);
        for x in &reference {
            let t = lo + (x + 1.0) * h;
            let g = flux0
                + cum_qu[e]
                + integrate(qu, lo, t, abs_tol * (t - lo), opts.quadrature_tolerance).value;
            g_over_p.push(g / coef.principal(t)?.0);
        }
        let vals: Vec<f64> = (0..m)
            .map(|j| left_value + h * (0..m).map(|l| qmat[(j, l)] * g_over_p[l]).sum::<f64>())
            .collect();
        left_value = vals[0];
        refined.push(vals);
    }
    let consistency = (left_value - 1.0).abs();
    let interp = PiecewiseChebyshev::from_nodal_values(bp.clone(), deg, refined);
    let residual_norm = element_residuals(&coef, &interp)?
        .into_iter()
        .fold(consistency, f64::max);

    let r0 = metric.boundary_radius();
    let r0s = r0.powf(s);
    let dconst = r0s * flux0;
    let expansion_error = r0s * (flux_error + consistency * flux0.abs());

    let profile = RadialProfile::compactified(
        metric.dimension(),
        r0,
        0.0,
        interp,
        TailDescriptor {
            exponent: s,
            coefficient: dconst,
        },
    )?;
    let mut sol = BVPSolution {
        kind: ProblemKind::ConformalGreen,
        function: profile,
        boundary_value: 1.0,
        expansion_constant: dconst,
        expansion_error,
        residual_norm,
        normal_derivative_at_boundary: 0.0,
    };
    sol.normal_derivative_at_boundary = normal_derivative_at_boundary(&sol, metric)?;
    if residual_norm > opts.residual_tolerance {
        return Err(Error::SolverFailure(format!(
            "collocation residual {residual_norm:e} exceeds {:e}",
            opts.residual_tolerance
        )));
    }
    Ok(sol)
}

/// `F(t) = int_0^t dt / p`, tabulated at breakpoints for fast evaluation.
struct CapacityPotential {
    metric: RadialMetric,
    breakpoints: Vec<f64>,
    cumulative: Vec<f64>,
    tol: f64,
}

impl CapacityPotential {
    fn build(metric: &RadialMetric, tol: f64) -> Result<(Self, f64)> {
        let coef = Coefficients::new(metric);
        let bad = std::cell::RefCell::new(None);
        let inv_p = |t: f64| match coef.principal(t) {
            Ok((p, _)) => 1.0 / p,
            Err(e) => {
                bad.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        };
        let mut breakpoints = vec![0.0];
        let mut t = 1e-12;
        while t < 1.0 {
            breakpoints.push(t);
            t *= 4.0;
        }
        breakpoints.push(1.0);
        let mut cumulative = vec![0.0];
        let mut err = 0.0;
        for w in breakpoints.windows(2) {
            let i = integrate(inv_p, w[0], w[1], 1e-17, tol);
            cumulative.push(cumulative.last().unwrap() + i.value);
            err += i.error;
        }
        if let Some(e) = bad.into_inner() {
            return Err(e);
        }
        let total = *cumulative.last().unwrap();
        if !total.is_finite() || !(total > 0.0) {
            return Err(Error::DivergentCapacity(format!(
                "int dt / p = {total}; the capacity is not finite"
            )));
        }
        if err > 1e3 * tol * total {
            return Err(Error::DivergentCapacity(format!(
                "capacity quadrature did not converge (error {err:e})"
            )));
        }
        Ok((
            Self {
                metric: metric.clone(),
                breakpoints,
                cumulative,
                tol,
            },
            err / total,
        ))
    }

    fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn at(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        let j = self.breakpoints.partition_point(|&b| b <= t).saturating_sub(1);
        let coef = Coefficients::new(&self.metric);
        let inv_p = |x: f64| coef.principal(x).map(|(p, _)| 1.0 / p).unwrap_or(f64::NAN);
        self.cumulative[j] + integrate(inv_p, self.breakpoints[j], t, 1e-17, self.tol).value
    }
}

/// Solves the harmonic Green's function problem by quadrature of the first
/// integral `p v_t = const`.
pub fn solve_harmonic_green(metric: &RadialMetric) -> Result<BVPSolution> {
    solve_harmonic_green_with(metric, &SolverOptions::default())
}

pub fn solve_harmonic_green_with(metric: &RadialMetric, opts: &SolverOptions) -> Result<BVPSolution> {
    let (pot, rel_err) = CapacityPotential::build(metric, opts.quadrature_tolerance)?;
    let f1 = pot.total();
    let s = metric.exponent();
    let r0 = metric.boundary_radius();
    let capacity = r0.powf(s) / f1;
    let pot = Arc::new(pot);
    let eval = {
        let pot = Arc::clone(&pot);
        move |r: f64| {
            let t = pot.metric.t_of(r).min(1.0);
            let coef = Coefficients::new(&pot.metric);
            let (p, pt) = coef.principal(t).unwrap_or((f64::NAN, f64::NAN));
            let v = pot.at(t) / f1;
            let vt = 1.0 / (p * f1);
            let vtt = -pt / (p * p * f1);
            t_jet_to_r(s, r, t, (v, vt, vtt))
        }
    };
    let profile = RadialProfile::custom(
        metric.dimension(),
        r0,
        0.0,
        TailDescriptor {
            exponent: s,
            coefficient: capacity,
        },
        eval,
    )?
    .with_min_reliable_t(metric.min_reliable_t());
    let mut sol = BVPSolution {
        kind: ProblemKind::HarmonicGreen,
        function: profile,
        boundary_value: 1.0,
        expansion_constant: capacity,
        expansion_error: capacity * rel_err,
        residual_norm: rel_err,
        normal_derivative_at_boundary: 0.0,
    };
    sol.normal_derivative_at_boundary = normal_derivative_at_boundary(&sol, metric)?;
    Ok(sol)
}

/// `phi = 1 - (1 - c) v`: harmonic, `phi = c` on the boundary, `phi -> 1`.
/// `c = 1` gives `phi = 1` exactly.
pub fn solve_harmonic_with_boundary(metric: &RadialMetric, c: f64) -> Result<BVPSolution> {
    if !(c > -1.0) || !c.is_finite() {
        return Err(Error::InvalidBoundaryConstant(c, "the boundary value must satisfy c > -1".into()));
    }
    let kind = ProblemKind::HarmonicWithBoundary { c };
    let r0 = metric.boundary_radius();
    if c == 1.0 {
        return Ok(BVPSolution {
            kind,
            function: RadialProfile::constant(metric.dimension(), r0, 1.0)?,
            boundary_value: 1.0,
            expansion_constant: 0.0,
            expansion_error: 0.0,
            residual_norm: 0.0,
            normal_derivative_at_boundary: 0.0,
        });
    }
    let v = solve_harmonic_green(metric)?;
    Ok(harmonic_with_boundary_from(&v, c))
}

/// Builds `phi = 1 - (1 - c) v` from an already solved harmonic Green's function.
pub fn harmonic_with_boundary_from(v: &BVPSolution, c: f64) -> BVPSolution {
    let k = 1.0 - c;
    let vf = v.function.clone();
    let function = RadialProfile::custom(
        v.dimension(),
        v.boundary_radius(),
        1.0,
        TailDescriptor {
            exponent: vf.tail().exponent,
            coefficient: -k * vf.tail().coefficient,
        },
        move |r| vf.deviation(r).scale(-k),
    )
    .expect("domain already validated")
    .with_min_reliable_t(v.function.min_reliable_t());
    BVPSolution {
        kind: ProblemKind::HarmonicWithBoundary { c },
        function,
        boundary_value: c,
        expansion_constant: k * v.expansion_constant,
        expansion_error: k.abs() * v.expansion_error,
        residual_norm: v.residual_norm,
        normal_derivative_at_boundary: -k * v.normal_derivative_at_boundary,
    }
}

/// Result of fitting `|f - limit| r^(n-2)` against the expansion constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionFit {
    pub constant: f64,
    /// Fitted exponent `gamma` of the remainder `O(r^(-gamma))`; `None` when
    /// the remainder is at roundoff level (exact power law).
    pub correction_order: Option<f64>,
    /// `gamma > n - 2`, the decay hypothesis on the remainder.
    pub decay_hypothesis_ok: bool,
}

/// Fits the remainder of the leading `r^(-(n-2))` term over dyadic radii.
pub fn expansion_constant(solution: &BVPSolution) -> Result<ExpansionFit> {
    let f = &solution.function;
    let n = f.dimension();
    let s = (n - 2) as f64;
    let r0 = f.domain_start();
    let k = solution.expansion_constant;
    let sign = if solution.function.limit() == 0.0 { 1.0 } else { -1.0 };
    let floor = 1e-9 * k.abs().max(r0.powf(s) * 1e-3);
    let t_min = f.min_reliable_t().max(1e-12);
    let mut samples = Vec::new();
    let mut j = 1;
    loop {
        let r = r0 * 2f64.powi(j);
        if f.t_of(r) < t_min || j > 60 {
            break;
        }
        let rem = sign * f.deviation(r).value * r.powf(s) - k;
        if rem.abs() > floor {
            samples.push((r, rem));
        }
        j += 1;
    }
    // keep the far-field run of one sign, at most 16 samples: closer in the
    // remainder is not yet asymptotic
    let mut first = samples.len();
    while first > 0 && samples.len() - first < 16 {
        if let Some(&(_, last)) = samples.last() {
            if samples[first - 1].1.signum() != last.signum() {
                break;
            }
        }
        first -= 1;
    }
    let tail = &samples[first..];
    if tail.len() < 4 {
        return Ok(ExpansionFit {
            constant: k,
            correction_order: None,
            decay_hypothesis_ok: true,
        });
    }
    // remainder of r^s f is O(r^(s - gamma))
    let fit = decay_order_fit(tail)?;
    let gamma = fit.exponent + s;
    Ok(ExpansionFit {
        constant: k,
        correction_order: Some(gamma),
        decay_hypothesis_ok: gamma > s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{areal_schwarzschild, flat, power_sum_metric, schwarzschild, PowerTerm};

    fn sup_error(sol: &BVPSolution, exact: impl Fn(f64) -> f64) -> f64 {
        let r0 = sol.boundary_radius();
        let s = (sol.dimension() - 2) as f64;
        (0..=400)
            .map(|k| {
                let t = (1.0 - k as f64 / 400.0).max(1e-9);
                let r = r0 * t.powf(-1.0 / s);
                (sol.value(r) - exact(r)).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn flat_green_functions() {
        for n in [3, 4, 5] {
            let g = flat(n, 2.0).unwrap();
            let s = (n - 2) as f64;
            let exact = |r: f64| (2.0 / r).powf(s);
            let u = solve_conformal_green(&g).unwrap();
            let v = solve_harmonic_green(&g).unwrap();
            assert!(sup_error(&u, exact) < 1e-12);
            assert!(sup_error(&v, exact) < 1e-12);
            assert!((v.expansion_constant - 2f64.powf(s)).abs() < 1e-12);
            assert!((u.expansion_constant - 2f64.powf(s)).abs() < 1e-10);
            assert!((v.normal_derivative_at_boundary + s / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn schwarzschild_closed_form() {
        let g = schwarzschild(3, 2.0, 1.0).unwrap();
        let u = solve_conformal_green(&g).unwrap();
        let err = sup_error(&u, |r| 4.0 / (2.0 * r + 2.0));
        assert!(err < 1e-10, "{err}");
        assert!((u.expansion_constant - 2.0).abs() < 1e-10);
        let fit = expansion_constant(&u).unwrap();
        assert!(fit.correction_order.unwrap() > 1.0);
    }

    #[test]
    fn conformally_flat_identity_on_two_term_metric() {
        let g = power_sum_metric(3, 1.0, &[PowerTerm::new(0.8, 1.0), PowerTerm::new(-0.4, 1.6)]).unwrap();
        let u = solve_conformal_green(&g).unwrap();
        let f = g.conformal_factor().unwrap().clone();
        let u0 = f.value(1.0);
        let err = sup_error(&u, |r| u0 / (f.value(r) * r));
        assert!(err < 1e-9, "{err}");
        let v = solve_harmonic_green(&g).unwrap();
        for r in [1.0, 1.3, 2.0, 10.0, 1e4] {
            assert!(u.value(r) <= v.value(r) + 1e-12);
        }
        assert!(u.normal_derivative_at_boundary <= v.normal_derivative_at_boundary);
    }

    #[test]
    fn boundary_constant_examples() {
        let g = flat(3, 1.0).unwrap();
        let phi = solve_harmonic_with_boundary(&g, -0.5).unwrap();
        assert!((phi.expansion_constant - 1.5).abs() < 1e-12);
        for r in [1.0, 2.0, 7.0] {
            assert!((phi.value(r) - (1.0 - 1.5 / r)).abs() < 1e-12);
        }
        let one = solve_harmonic_with_boundary(&g, 1.0).unwrap();
        assert_eq!(one.value(3.0), 1.0);
        assert_eq!(one.expansion_constant, 0.0);
        assert!(matches!(
            solve_harmonic_with_boundary(&g, -1.0),
            Err(Error::InvalidBoundaryConstant(..))
        ));
    }

    #[test]
    fn harmonic_quadrature_matches_antiderivative() {
        // int_0^t dt / (1 + beta t)^2 = t / (1 + beta t)
        for (n, m, r0) in [(3, 2.0, 1.0), (4, -0.5, 1.0), (5, 1.0, 2.0)] {
            let g = schwarzschild(n, m, r0).unwrap();
            let s = (n - 2) as f64;
            let beta = m / (2.0 * r0.powf(s));
            let v = solve_harmonic_green(&g).unwrap();
            let exact = |r: f64| {
                let t = (r0 / r).powf(s);
                (1.0 + beta) * t / (1.0 + beta * t)
            };
            assert!(sup_error(&v, exact) < 1e-12);
            assert!((v.expansion_constant - r0.powf(s) * (1.0 + beta)).abs() < 1e-12);
        }
    }

    #[test]
    fn areal_chart_green_function() {
        // R = 0, so u = v = (1 - sqrt(1 - 2m/r)) / (1 - sqrt(1 - 2m/r0)) for n = 3
        let (m, r0) = (0.7, 2.0);
        let g = areal_schwarzschild(3, m, r0).unwrap();
        let exact = |r: f64| (1.0 - (1.0 - 2.0 * m / r).sqrt()) / (1.0 - (1.0 - 2.0 * m / r0).sqrt());
        let u = solve_conformal_green(&g).unwrap();
        let v = solve_harmonic_green(&g).unwrap();
        assert!(sup_error(&u, exact) < 1e-10);
        assert!(sup_error(&v, exact) < 1e-12);
    }

    #[test]
    fn uniform_mesh_converges_at_nominal_order() {
        let g = schwarzschild(3, 2.0, 1.0).unwrap();
        let errors: Vec<f64> = [4, 8, 16, 32]
            .iter()
            .map(|&k| {
                let o = SolverOptions {
                    mesh: Mesh::Uniform { elements: k },
                    degree: 4,
                    residual_tolerance: 1.0,
                    max_refinements: 0,
                    ..Default::default()
                };
                (solve_conformal_green_with(&g, &o).unwrap().expansion_constant - 2.0).abs()
            })
            .collect();
        for w in errors.windows(2) {
            assert!((w[0] / w[1]).log2() >= 3.8, "{errors:?}");
        }
    }

    #[test]
    fn boundary_problem_is_affine_in_c() {
        let g = power_sum_metric(4, 1.2, &[PowerTerm::new(0.3, 2.0), PowerTerm::new(-0.2, 3.5)]).unwrap();
        let v = solve_harmonic_green(&g).unwrap();
        for c in [-0.7, 0.0, 0.4, 2.5] {
            let phi = solve_harmonic_with_boundary(&g, c).unwrap();
            for r in [1.2, 1.5, 4.0, 100.0] {
                assert!((phi.value(r) - 1.0 - (c - 1.0) * v.value(r)).abs() < 1e-12);
            }
            assert!((phi.expansion_constant - (1.0 - c) * v.expansion_constant).abs() < 1e-12);
        }
    }
}
