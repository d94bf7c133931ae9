//! Radial asymptotically flat metrics, their curvature, boundary mean
//! curvature and ADM mass.

pub mod curvature;
pub mod metric;
pub mod profile;

pub use curvature::{
    adm_mass, mean_curvature_sphere, radial_laplacian, radial_scale, require_nonnegative_scalar, scalar_curvature,
    MassEstimate,
};
pub use metric::{
    areal_mass_profile, areal_schwarzschild, flat, power_sum_metric, random_nonneg_scalar_metric, sample_areal_family,
    sample_metric_family,
    schwarzschild, FamilyRanges, MetricForm, RadialMetric, WarpJets,
};
pub use profile::{PowerTerm, RadialProfile, TailDescriptor};

pub use crate::numerics::extrapolation::decay_order_fit;

use std::collections::BTreeMap;

/// Mean curvature and normal derivatives at the inner boundary sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    /// Mean curvature with respect to the normal pointing to infinity.
    pub mean_curvature: f64,
    pub normal_derivatives: BTreeMap<String, f64>,
    /// Induced metric scale `rho(r0) / r0` on the boundary sphere.
    pub area_element_factor: f64,
}

impl BoundaryData {
    pub fn of(metric: &RadialMetric) -> crate::Result<Self> {
        let r0 = metric.boundary_radius();
        let w = metric.jets(r0)?;
        Ok(Self {
            mean_curvature: mean_curvature_sphere(metric, r0)?,
            normal_derivatives: BTreeMap::new(),
            area_element_factor: w.b().value,
        })
    }

    pub fn with_normal_derivative(mut self, label: &str, value: f64) -> Self {
        self.normal_derivatives.insert(label.to_string(), value);
        self
    }
}
