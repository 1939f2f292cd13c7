//! Convex hulls in the Poincaré ball `B^n` bounded by geodesic hyperplanes,
//! one for each cap of a Schottky set on the ideal sphere `S^{n-1}`.
//!
//! A cap `{⟨ξ,u⟩ > t}` of `S^{n-1}` bounds the hyperbolic half-space
//! `{x : 2⟨x,u⟩ - t(1 + |x|²) > 0}`; the hull is the intersection of the
//! opposite closed half-spaces.

use crate::error::{Error, Result};
use crate::mobius::{dot, norm, Cap, MobiusMap};
use crate::scalar::Real;
use crate::schottky::SchottkySet;
use rand::Rng;
use serde::Serialize;

/// Euclidean shape of a geodesic hyperplane of the ball model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Hyperplane<T: Real> {
    /// Sphere orthogonal to the unit sphere.
    Sphere { center: Vec<T>, radius: T },
    /// Hyperplane `⟨x, normal⟩ = 0` through the origin.
    Diameter { normal: Vec<T> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HullDescription<T: Real> {
    /// Ideal traces of the removed open half-spaces.
    caps: Vec<Cap<T>>,
}

impl<T: Real> HullDescription<T> {
    pub fn halfspace_count(&self) -> usize {
        self.caps.len()
    }

    /// Ball-model dimension `n` (the ideal sphere is `S^{n-1}`).
    pub fn dim(&self) -> usize {
        self.caps.first().map_or(0, |c| c.dim() + 1)
    }

    /// The caps of the boundary Schottky set, recovered from the hull.
    pub fn ideal_traces(&self) -> &[Cap<T>] {
        &self.caps
    }

    /// `2⟨x,u⟩ - t(1+|x|²)` for half-space `i`: positive on the removed side.
    pub fn signed(&self, i: usize, x: &[T]) -> T {
        let c = &self.caps[i];
        T::lit(2.0) * dot(c.normal(), x) - c.offset() * (T::one() + dot(x, x))
    }

    pub fn hyperplane(&self, i: usize) -> Hyperplane<T> {
        let c = &self.caps[i];
        let t = c.offset();
        if t.abs() <= T::epsilon() {
            Hyperplane::Diameter {
                normal: c.normal().to_vec(),
            }
        } else {
            Hyperplane::Sphere {
                center: c.normal().iter().map(|&u| u / t).collect(),
                radius: (T::one() - t * t).sqrt() / t.abs(),
            }
        }
    }

    /// Whether `x` (with `|x| < 1`) lies in the closed hull.
    pub fn contains(&self, x: &[T], tol: T) -> Result<bool> {
        check_ball(x)?;
        Ok((0..self.caps.len()).all(|i| self.signed(i, x) <= tol))
    }
}

pub fn hull_from_schottky<T: Real>(s: &SchottkySet<T>) -> HullDescription<T> {
    HullDescription {
        caps: s.caps().to_vec(),
    }
}

/// Recovers the ideal cap from the Euclidean hyperplane and the side that
/// is removed (`removed_side` is a point of the removed half-space).
pub fn cap_from_hyperplane<T: Real>(h: &Hyperplane<T>, removed_side: &[T]) -> Result<Cap<T>> {
    let (u, t) = match h {
        Hyperplane::Diameter { normal } => (normal.clone(), T::zero()),
        Hyperplane::Sphere { center, .. } => {
            let d = norm(center);
            (center.iter().map(|&c| c / d).collect::<Vec<_>>(), T::one() / d)
        }
    };
    let cap = Cap::new(u, t)?;
    let val = T::lit(2.0) * dot(cap.normal(), removed_side) - cap.offset() * (T::one() + dot(removed_side, removed_side));
    Ok(if val > T::zero() { cap } else { cap.complement() })
}

fn check_ball<T: Real>(x: &[T]) -> Result<()> {
    if dot(x, x) < T::one() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("point {x:?} is not in the open unit ball")))
    }
}

/// Point of the hyperboloid `{X : Q(X,X) = -1, X_last > 0}` for a ball point.
pub fn ball_to_hyperboloid<T: Real>(x: &[T]) -> Vec<T> {
    let r2 = dot(x, x);
    let d = T::one() - r2;
    let mut v: Vec<T> = x.iter().map(|&c| T::lit(2.0) * c / d).collect();
    v.push((T::one() + r2) / d);
    v
}

pub fn hyperboloid_to_ball<T: Real>(v: &[T]) -> Vec<T> {
    let k = v.len() - 1;
    v[..k].iter().map(|&c| c / (T::one() + v[k])).collect()
}

/// Poincaré extension of a Möbius map of `S^{n-1}` acting on `B^n`.
pub fn apply_ball_point<T: Real>(m: &MobiusMap<T>, x: &[T]) -> Result<Vec<T>> {
    check_ball(x)?;
    let mut y = m.apply_vector(&ball_to_hyperboloid(x));
    let k = y.len() - 1;
    if y[k] < T::zero() {
        y.iter_mut().for_each(|c| *c = -*c);
    }
    Ok(hyperboloid_to_ball(&y))
}

pub fn apply_hull<T: Real>(m: &MobiusMap<T>, h: &HullDescription<T>) -> Result<HullDescription<T>> {
    Ok(HullDescription {
        caps: h.caps.iter().map(|c| m.apply_cap(c)).collect::<Result<_>>()?,
    })
}

/// `arccosh(1 + 2|x-y|² / ((1-|x|²)(1-|y|²)))`.
pub fn hyp_distance<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    check_ball(x)?;
    check_ball(y)?;
    let d2: T = x.iter().zip(y).map(|(&a, &b)| (a - b) * (a - b)).sum();
    let arg = T::lit(2.0) * d2 / ((T::one() - dot(x, x)) * (T::one() - dot(y, y)));
    // arccosh(1 + a) = log1p(a + sqrt(a(a+2))) avoids cancellation near 0.
    Ok((arg + (arg * (arg + T::lit(2.0))).sqrt()).ln_1p())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisualityWitness {
    /// Largest distance from a sampled hull point to the nearest sampled
    /// ray from the origin towards an ideal point of `S`.
    pub constant: f64,
    pub hull_points: usize,
    pub ideal_points: usize,
}

/// Empirical visuality constant with basepoint at the origin.
pub fn visuality_witness<R: Rng + ?Sized>(
    s: &SchottkySet<f64>,
    hull_points: usize,
    ideal_points: usize,
    rng: &mut R,
) -> Result<VisualityWitness> {
    let hull = hull_from_schottky(s);
    let n = s.dim() + 1;
    let mut ideal = Vec::with_capacity(ideal_points);
    let mut guard = 0usize;
    while ideal.len() < ideal_points {
        guard += 1;
        if guard > 1000 * ideal_points.max(1) {
            return Err(Error::BudgetExceeded("ideal point sampling".into()));
        }
        let p = crate::mobius::SpherePoint::<f64>::random(rng, n - 1);
        if s.contains(&p).in_set() {
            ideal.push(p.into_coords());
        }
    }
    let mut pts = Vec::with_capacity(hull_points);
    guard = 0;
    while pts.len() < hull_points {
        guard += 1;
        if guard > 1000 * hull_points.max(1) {
            return Err(Error::BudgetExceeded("hull point sampling".into()));
        }
        let dir: Vec<f64> = crate::mobius::random_unit(rng, n);
        let r: f64 = rng.random_range(0.0..0.99);
        let x: Vec<f64> = dir.iter().map(|c| c * r).collect();
        if hull.contains(&x, 0.0)? {
            pts.push(x);
        }
    }
    let constant = pts
        .iter()
        .map(|x| {
            ideal
                .iter()
                .map(|xi| ray_distance(x, xi))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    Ok(VisualityWitness {
        constant,
        hull_points,
        ideal_points,
    })
}

/// Hyperbolic distance from `x` to the ray `{sξ : 0 ≤ s < 1}`.
fn ray_distance(x: &[f64], xi: &[f64]) -> f64 {
    let along = dot(x, xi);
    if along <= 0.0 {
        return hyp_distance(x, &vec![0.0; x.len()]).unwrap_or(f64::INFINITY);
    }
    let perp2 = (dot(x, x) - along * along).max(0.0);
    (2.0 * perp2.sqrt() / (1.0 - dot(x, x))).asinh()
}
