//! Γ-invariant Beltrami coefficients for Schottky sets on S² (n = 2), in
//! the stereographic chart `C`.
//!
//! Generators act as circle inversions `z ↦ c + r²/conj(z - c)` or line
//! reflections, all anti-holomorphic. For a word `U` we track `U(z)` and the
//! single non-vanishing complex derivative: `U_z` for even words, `U_z̄` for
//! odd ones.

use crate::error::{Error, Result};
use crate::group::{code_point_with, generators, Coding, ReducedWord};
use crate::mobius::{ChartBall, SpherePoint};
use crate::schottky::SchottkySet;
use num_complex::Complex64;
use rayon::prelude::*;
use std::io::Write;
use std::sync::Arc;

/// Anti-holomorphic reflection of the chart in a circle or line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChartReflection {
    Circle { center: Complex64, radius: f64 },
    /// Reflection in the line through `point` with unit direction `e`;
    /// `e2 = e²`.
    Line { point: Complex64, e2: Complex64 },
}

impl ChartReflection {
    pub fn from_ball(b: &ChartBall<f64>) -> Self {
        match b {
            ChartBall::Disk { center, radius } | ChartBall::Exterior { center, radius } => Self::Circle {
                center: Complex64::new(center[0], center[1]),
                radius: *radius,
            },
            ChartBall::HalfSpace { normal, offset } => {
                let n = Complex64::new(normal[0], normal[1]);
                Self::Line {
                    point: n * *offset,
                    e2: -(n * n),
                }
            }
        }
    }

    pub fn apply(&self, z: Complex64) -> Option<Complex64> {
        match *self {
            Self::Circle { center, radius } => {
                let d = (z - center).conj();
                if d.norm_sqr() == 0.0 {
                    None
                } else {
                    Some(center + radius * radius / d)
                }
            }
            Self::Line { point, e2 } => Some(point + e2 * (z - point).conj()),
        }
    }

    /// `∂/∂z̄` of the reflection at `z`.
    pub fn anti_derivative(&self, z: Complex64) -> Option<Complex64> {
        match *self {
            Self::Circle { center, radius } => {
                let d = (z - center).conj();
                if d.norm_sqr() == 0.0 {
                    None
                } else {
                    Some(-radius * radius / (d * d))
                }
            }
            Self::Line { e2, .. } => Some(e2),
        }
    }
}

pub fn chart_reflections(s: &SchottkySet<f64>) -> Result<Vec<ChartReflection>> {
    if s.dim() != 2 {
        return Err(Error::InvalidInput(format!(
            "Beltrami fields need n = 2, got {}",
            s.dim()
        )));
    }
    Ok(s.caps().iter().map(|c| ChartReflection::from_ball(&c.to_chart())).collect())
}

/// Value and derivative of a word map at a chart point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WordDerivative {
    pub value: Complex64,
    /// `U_z` when `preserving`, otherwise `U_z̄`.
    pub derivative: Complex64,
    pub preserving: bool,
}

/// `U = R_{i1} ∘ … ∘ R_{ik}` at `z`, by the chain rule from the innermost
/// reflection outwards.
pub fn word_derivative(refl: &[ChartReflection], w: &ReducedWord, z: Complex64) -> Result<WordDerivative> {
    let mut value = z;
    let mut derivative = Complex64::new(1.0, 0.0);
    for (step, &i) in w.indices().iter().rev().enumerate() {
        let r = refl.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            len: refl.len(),
        })?;
        let a = r.anti_derivative(value).ok_or(Error::PoleEncountered(step))?;
        value = r.apply(value).ok_or(Error::PoleEncountered(step))?;
        if !value.is_finite() {
            return Err(Error::PoleEncountered(step));
        }
        derivative = a * derivative.conj();
    }
    Ok(WordDerivative {
        value,
        derivative,
        preserving: w.len() % 2 == 0,
    })
}

/// Pullback of the value `mu_at_image = μ(g(z))` along `g` with `μ_g = 0`.
pub fn pullback_value(mu_at_image: Complex64, d: &WordDerivative) -> Complex64 {
    let g = d.derivative;
    if d.preserving {
        mu_at_image * g.conj() / g
    } else {
        mu_at_image.conj() * g / g.conj()
    }
}

pub type BaseFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// A base coefficient `ν` on `S` with known sup norm `< 1`.
#[derive(Clone)]
pub struct BeltramiField {
    nu: BaseFn,
    sup_norm: f64,
}

impl std::fmt::Debug for BeltramiField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BeltramiField")
            .field("sup_norm", &self.sup_norm)
            .finish_non_exhaustive()
    }
}

impl Default for BeltramiField {
    fn default() -> Self {
        Self::constant(Complex64::new(0.5, 0.0)).expect("1/2 is admissible")
    }
}

impl BeltramiField {
    pub fn constant(c: Complex64) -> Result<Self> {
        Self::new(Arc::new(move |_| c), c.norm())
    }

    pub fn new(nu: BaseFn, sup_norm: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&sup_norm) {
            return Err(Error::InvalidInput(format!("|ν| bound {sup_norm} is not below 1")));
        }
        Ok(Self { nu, sup_norm })
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn base(&self, z: Complex64) -> Complex64 {
        (self.nu)(z)
    }
}

/// Tile word of a chart point: `Terminated(w)` means `z ∈ U(S)` for
/// `U = word(w)`. Boundary points get the shortest word.
pub fn tile_locate(s: &SchottkySet<f64>, z: Complex64, max_depth: usize) -> Result<Coding<f64>> {
    let p = SpherePoint::from_chart(&[z.re, z.im]);
    crate::group::code_point(s, &p, max_depth)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuSample {
    pub z: Complex64,
    pub depth: usize,
    /// `0` when unresolved.
    pub mu: Complex64,
    pub resolved: bool,
    pub boundary: bool,
}

/// Evaluator for the invariant extension of a base field.
pub struct InvariantMu<'a> {
    set: &'a SchottkySet<f64>,
    field: &'a BeltramiField,
    reflections: Vec<ChartReflection>,
    generators: Vec<crate::mobius::MobiusMap<f64>>,
    max_depth: usize,
}

impl<'a> InvariantMu<'a> {
    pub fn new(set: &'a SchottkySet<f64>, field: &'a BeltramiField, max_depth: usize) -> Result<Self> {
        Ok(Self {
            set,
            field,
            reflections: chart_reflections(set)?,
            generators: generators(set),
            max_depth,
        })
    }

    pub fn reflections(&self) -> &[ChartReflection] {
        &self.reflections
    }

    /// `μ(z) = V*(ν)(z)` where `z ∈ U(S)` and `V = U⁻¹` sends `z` into `S`.
    pub fn sample(&self, z: Complex64) -> Result<MuSample> {
        let p = SpherePoint::from_chart(&[z.re, z.im]);
        match code_point_with(self.set, &self.generators, &p, self.max_depth)? {
            Coding::Unresolved { word } => Ok(MuSample {
                z,
                depth: word.len(),
                mu: Complex64::new(0.0, 0.0),
                resolved: false,
                boundary: false,
            }),
            Coding::Terminated { word, boundary, .. } => {
                let d = word_derivative(&self.reflections, &word.inverse(), z)?;
                Ok(MuSample {
                    z,
                    depth: word.len(),
                    mu: pullback_value(self.field.base(d.value), &d),
                    resolved: true,
                    boundary,
                })
            }
        }
    }
}

impl ComplexField for InvariantMu<'_> {
    fn value(&self, z: Complex64) -> Option<Complex64> {
        self.sample(z).ok().filter(|m| m.resolved).map(|m| m.mu)
    }
}

/// A coefficient field evaluated pointwise; `None` marks unresolved points.
pub trait ComplexField: Sync {
    fn value(&self, z: Complex64) -> Option<Complex64>;
}

/// `ν` on `S` and `0` elsewhere, without any pullback.
pub struct ExtendedByZero<'a> {
    pub set: &'a SchottkySet<f64>,
    pub field: &'a BeltramiField,
}

impl ComplexField for ExtendedByZero<'_> {
    fn value(&self, z: Complex64) -> Option<Complex64> {
        let p = SpherePoint::from_chart(&[z.re, z.im]);
        Some(if self.set.contains(&p).in_set() {
            self.field.base(z)
        } else {
            Complex64::new(0.0, 0.0)
        })
    }
}

/// Largest `|μ(z) - conj(μ(γ z))·γ_z̄/conj(γ_z̄)|` for `γ = R_i` over the
/// samples where both sides resolve. Returns the residual and the number of
/// samples used.
pub fn invariance_residual<F: ComplexField>(
    field: &F,
    refl: &[ChartReflection],
    i: usize,
    samples: &[Complex64],
) -> Result<(f64, usize)> {
    let r = *refl.get(i).ok_or(Error::IndexOutOfRange {
        index: i,
        len: refl.len(),
    })?;
    let terms: Vec<Option<f64>> = samples
        .par_iter()
        .map(|&z| {
            let d = WordDerivative {
                value: r.apply(z)?,
                derivative: r.anti_derivative(z)?,
                preserving: false,
            };
            let lhs = field.value(z)?;
            let rhs = pullback_value(field.value(d.value)?, &d);
            Some((lhs - rhs).norm())
        })
        .collect();
    let used = terms.iter().flatten().count();
    Ok((terms.into_iter().flatten().fold(0.0, f64::max), used))
}

/// Writes samples as CSV with columns
/// `z_re,z_im,depth,mu_re,mu_im,resolved_flag`.
pub fn write_csv<W: Write>(mut out: W, samples: &[MuSample]) -> std::io::Result<()> {
    writeln!(out, "z_re,z_im,depth,mu_re,mu_im,resolved_flag")?;
    for s in samples {
        writeln!(
            out,
            "{:.17e},{:.17e},{},{:.17e},{:.17e},{}",
            s.z.re,
            s.z.im,
            s.depth,
            s.mu.re,
            s.mu.im,
            u8::from(s.resolved)
        )?;
    }
    Ok(())
}
