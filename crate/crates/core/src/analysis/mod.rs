//! Numerical distortion analysis of point maps: quasisymmetry and
//! quasi-Möbius envelopes, dilatation, conformality of derivatives, Möbius
//! fitting, Hausdorff distances and rescaling.

mod conformal;
mod envelope;
mod fit;
mod hausdorff;

pub use conformal::{conformality_defect, dilatation_estimate, jacobian};
pub use envelope::{qm_envelope, qs_envelope, DistortionProfile};
pub use fit::{mobius_fit, MobiusFit};
pub use hausdorff::{
    cap_samples, hausdorff_distance, rescale_config, weak_tangent_steps, window_samples, ChartConfig,
    ChartDisk,
};

use crate::mobius::{MobiusMap, SpherePoint};
use std::sync::Arc;

pub type Evaluator = Arc<dyn Fn(&[f64]) -> Option<Vec<f64>> + Send + Sync>;
pub type JacobianFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Coordinates a map works in. Distances are Euclidean in these coordinates,
/// which is the chordal metric for sphere coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Points of `R^n` (stereographic chart).
    Chart { dim: usize },
    /// Unit vectors of `R^{n+1}`.
    Sphere { dim: usize },
}

impl Domain {
    pub fn coords(&self) -> usize {
        match *self {
            Domain::Chart { dim } => dim,
            Domain::Sphere { dim } => dim + 1,
        }
    }
}

/// A point map on a stated domain; the evaluator returns `None` off the
/// domain.
#[derive(Clone)]
pub struct MapUnderTest {
    domain: Domain,
    evaluator: Evaluator,
    jacobian: Option<JacobianFn>,
}

impl std::fmt::Debug for MapUnderTest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MapUnderTest")
            .field("domain", &self.domain)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl MapUnderTest {
    pub fn new(domain: Domain, evaluator: Evaluator) -> Self {
        Self {
            domain,
            evaluator,
            jacobian: None,
        }
    }

    /// Attaches an analytic chart Jacobian (row-major `n × n`).
    pub fn with_jacobian(mut self, jacobian: JacobianFn) -> Self {
        self.jacobian = Some(jacobian);
        self
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn eval(&self, x: &[f64]) -> Option<Vec<f64>> {
        (self.evaluator)(x)
    }

    pub fn analytic_jacobian(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.jacobian.as_ref().map(|j| j(x))
    }

    pub fn mobius_on_sphere(m: MobiusMap<f64>) -> Self {
        let dim = m.dim();
        Self::new(
            Domain::Sphere { dim },
            Arc::new(move |x| {
                let p = SpherePoint::new(x.to_vec()).ok()?;
                m.apply_point(&p).ok().map(SpherePoint::into_coords)
            }),
        )
    }

    /// A Möbius map read in the stereographic chart; undefined where the
    /// image is `∞`.
    pub fn mobius_on_chart(m: MobiusMap<f64>) -> Self {
        let dim = m.dim();
        Self::new(
            Domain::Chart { dim },
            Arc::new(move |x| m.apply_point(&SpherePoint::from_chart(x)).ok()?.to_chart()),
        )
    }

    /// `x ↦ A x` on the chart, with its constant Jacobian.
    pub fn linear_chart(dim: usize, a: Vec<f64>) -> Self {
        let jac = a.clone();
        Self::new(
            Domain::Chart { dim },
            Arc::new(move |x| {
                Some(
                    (0..dim)
                        .map(|i| (0..dim).map(|j| a[i * dim + j] * x[j]).sum())
                        .collect(),
                )
            }),
        )
        .with_jacobian(Arc::new(move |_| jac.clone()))
    }
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
