//! Standard configurations used by tests, the CLI and the shipped fixture files.

use crate::error::{Error, Result};
use crate::mobius::{Cap, MobiusMap, SpherePoint};
use crate::schottky::SchottkySet;
use rand::Rng;
use std::f64::consts::PI;

/// Three caps of angular radius `theta` centered on the equator of S² at
/// 120° spacing. Tangent for `theta = π/3`.
pub fn equatorial_three(theta: f64) -> SchottkySet<f64> {
    let caps = (0..3)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / 3.0;
            Cap::new(vec![a.cos(), a.sin(), 0.0], theta.cos()).expect("valid cap")
        })
        .collect();
    SchottkySet::new(2, caps)
}

/// The tangent three-cap set: `equatorial_three(π/3)`, measure `π`.
pub fn tangent_three() -> SchottkySet<f64> {
    equatorial_three(PI / 3.0)
}

/// The symmetric non-tangent three-cap set: `equatorial_three(π/5)`.
pub fn symmetric_three() -> SchottkySet<f64> {
    equatorial_three(PI / 5.0)
}

/// Random valid configuration of `count` caps on `S^n` by rejection:
/// angular radii uniform in `[0.05, max_radius]`, each new cap kept only if
/// it is disjoint from the previous ones with a margin of `1e-6`.
pub fn random_configuration<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    count: usize,
    max_radius: f64,
) -> Result<SchottkySet<f64>> {
    let mut caps: Vec<Cap<f64>> = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while caps.len() < count {
        attempts += 1;
        if attempts > 100_000 {
            return Err(Error::BudgetExceeded(format!(
                "could not place {count} disjoint caps"
            )));
        }
        let center = SpherePoint::random(rng, n);
        let theta = rng.random_range(0.05..max_radius);
        let cap = Cap::from_center_angle(&center, theta)?;
        if caps.iter().all(|c| c.overlap(&cap) < -1e-6) {
            caps.push(cap);
        }
    }
    Ok(SchottkySet::new(n, caps))
}

/// Random Möbius map of `S^n`: a product of `count` reflections in caps
/// with `|t| ≤ 0.5`.
pub fn random_mobius<R: Rng + ?Sized>(rng: &mut R, n: usize, count: usize) -> MobiusMap<f64> {
    (0..count).fold(MobiusMap::identity(n), |m, _| {
        let center = SpherePoint::random(rng, n);
        let cap = Cap::new(center.into_coords(), rng.random_range(-0.5..0.5)).expect("valid cap");
        m.compose(&MobiusMap::reflection(&cap))
    })
}

/// `count` uniform random points of the open set `S \ ∪ ∂B_i`, by rejection.
pub fn points_in_set<R: Rng + ?Sized>(
    rng: &mut R,
    s: &SchottkySet<f64>,
    count: usize,
) -> Result<Vec<SpherePoint<f64>>> {
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > 1000 * count.max(1) {
            return Err(Error::BudgetExceeded("Schottky set too thin to sample".into()));
        }
        let p = SpherePoint::random(rng, s.dim());
        if s.contains(&p) == crate::schottky::Membership::InSet {
            out.push(p);
        }
    }
    Ok(out)
}
