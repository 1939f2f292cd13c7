use super::{euclid, MapUnderTest};
use crate::error::{Error, Result};
use crate::mobius::cross_ratio_raw;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

const DEGENERATE: f64 = 1e-12;

/// Sampled `(t, ratio)` pairs with their running-max staircase.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionProfile {
    /// Sorted by `t`.
    samples: Vec<(f64, f64)>,
    /// `envelope[i] = max{ratio_j : j ≤ i}`.
    envelope: Vec<f64>,
    skipped: usize,
}

impl DistortionProfile {
    pub fn from_samples(mut samples: Vec<(f64, f64)>, skipped: usize) -> Self {
        samples.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut envelope = Vec::with_capacity(samples.len());
        let mut run = f64::NEG_INFINITY;
        for &(_, r) in &samples {
            run = run.max(r);
            envelope.push(run);
        }
        Self {
            samples,
            envelope,
            skipped,
        }
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn skipped(&self) -> usize {
        self.skipped
    }

    /// `η̂(t)`: the largest sampled ratio with input value at most `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let k = self.samples.partition_point(|s| s.0 <= t);
        if k == 0 {
            0.0
        } else {
            self.envelope[k - 1]
        }
    }

    /// `max_i η̂(t_i) - bound(t_i)`; non-positive when the bound holds.
    pub fn max_excess(&self, bound: impl Fn(f64) -> f64) -> f64 {
        self.samples
            .iter()
            .zip(&self.envelope)
            .map(|(s, e)| e - bound(s.0))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max_i |ratio_i - t_i| / (1 + t_i)`.
    pub fn sample_defect(&self) -> f64 {
        self.samples
            .iter()
            .map(|(t, r)| (r - t).abs() / (1.0 + t))
            .fold(0.0, f64::max)
    }

    /// `max_i |η̂(t_i) - t_i| / (1 + t_i)`: distance to the identity gauge.
    pub fn identity_defect(&self) -> f64 {
        self.samples
            .iter()
            .zip(&self.envelope)
            .map(|(s, e)| (e - s.0).abs() / (1.0 + s.0))
            .fold(0.0, f64::max)
    }

    /// The staircase read at log-spaced bin edges.
    pub fn binned(&self, bins_per_decade: usize) -> Vec<(f64, f64)> {
        let (Some(first), Some(last)) = (self.samples.first(), self.samples.last()) else {
            return Vec::new();
        };
        let lo = first.0.max(f64::MIN_POSITIVE).log10().floor();
        let hi = last.0.max(f64::MIN_POSITIVE).log10().ceil();
        let bins = ((hi - lo) * bins_per_decade as f64).round().max(1.0) as usize;
        (1..=bins)
            .map(|k| {
                let edge = 10f64.powf(lo + (hi - lo) * k as f64 / bins as f64);
                (edge, self.eval(edge))
            })
            .collect()
    }
}

/// Ratio distortion over `budget` random triples `(x, y, z)`:
/// `t = d(x,y)/d(x,z)` against `d(f x, f y)/d(f x, f z)`.
pub fn qs_envelope<R, S>(m: &MapUnderTest, mut sampler: S, budget: usize, rng: &mut R) -> Result<DistortionProfile>
where
    R: Rng + ?Sized,
    S: FnMut(&mut R) -> Vec<f64>,
{
    if budget == 0 {
        return Err(Error::InvalidInput("triple budget must be positive".into()));
    }
    let triples: Vec<[Vec<f64>; 3]> = (0..budget)
        .map(|_| [sampler(rng), sampler(rng), sampler(rng)])
        .collect();
    let results: Vec<Option<(f64, f64)>> = triples
        .par_iter()
        .map(|[x, y, z]| {
            let (dxy, dxz) = (euclid(x, y), euclid(x, z));
            if dxy < DEGENERATE || dxz < DEGENERATE {
                return None;
            }
            let (fx, fy, fz) = (m.eval(x)?, m.eval(y)?, m.eval(z)?);
            let den = euclid(&fx, &fz);
            (den >= DEGENERATE).then(|| (dxy / dxz, euclid(&fx, &fy) / den))
        })
        .collect();
    Ok(collect(results))
}

/// Cross-ratio distortion over `budget` random quadruples.
pub fn qm_envelope<R, S>(m: &MapUnderTest, mut sampler: S, budget: usize, rng: &mut R) -> Result<DistortionProfile>
where
    R: Rng + ?Sized,
    S: FnMut(&mut R) -> Vec<f64>,
{
    if budget == 0 {
        return Err(Error::InvalidInput("quadruple budget must be positive".into()));
    }
    let quads: Vec<[Vec<f64>; 4]> = (0..budget)
        .map(|_| [sampler(rng), sampler(rng), sampler(rng), sampler(rng)])
        .collect();
    let results: Vec<Option<(f64, f64)>> = quads
        .par_iter()
        .map(|q| {
            let t = cross_ratio_raw([&q[0], &q[1], &q[2], &q[3]], DEGENERATE).ok()?;
            let f = [m.eval(&q[0])?, m.eval(&q[1])?, m.eval(&q[2])?, m.eval(&q[3])?];
            let r = cross_ratio_raw([&f[0], &f[1], &f[2], &f[3]], DEGENERATE).ok()?;
            Some((t, r))
        })
        .collect();
    Ok(collect(results))
}

fn collect(results: Vec<Option<(f64, f64)>>) -> DistortionProfile {
    let skipped = results.iter().filter(|r| r.is_none()).count();
    DistortionProfile::from_samples(results.into_iter().flatten().collect(), skipped)
}
