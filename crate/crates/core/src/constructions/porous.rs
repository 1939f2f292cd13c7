use super::index::BallIndex;
use crate::analysis::{ChartConfig, ChartDisk};
use crate::error::{Error, Result};
use crate::mobius::{Cap, ChartBall, MobiusMap, SpherePoint};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

/// An open chart region with a distance-to-boundary evaluator.
pub trait ChartDomain: Sync {
    fn dim(&self) -> usize;
    fn contains(&self, x: &[f64]) -> bool;
    /// `dist(x, ∂D)` for `x ∈ D`.
    fn dist_to_boundary(&self, x: &[f64]) -> f64;
    /// Axis-aligned box containing `D`.
    fn bounds(&self) -> (Vec<f64>, Vec<f64>);
}

/// Open box `∏ (lo_i, hi_i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    /// The cube `(-a, a)^n`.
    pub fn cube(n: usize, a: f64) -> Self {
        Self {
            lo: vec![-a; n],
            hi: vec![a; n],
        }
    }
}

impl ChartDomain for BoxDomain {
    fn dim(&self) -> usize {
        self.lo.len()
    }

    fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| l < v && v < h)
    }

    fn dist_to_boundary(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(v, (l, h))| (v - l).min(h - v))
            .fold(f64::INFINITY, f64::min)
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (self.lo.clone(), self.hi.clone())
    }
}

/// Open ball `B(center, radius)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallDomain {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl ChartDomain for BallDomain {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn contains(&self, x: &[f64]) -> bool {
        crate::analysis::euclid(x, &self.center) < self.radius
    }

    fn dist_to_boundary(&self, x: &[f64]) -> f64 {
        self.radius - crate::analysis::euclid(x, &self.center)
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.center.iter().map(|c| c - self.radius).collect(),
            self.center.iter().map(|c| c + self.radius).collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PorousStep {
    /// 1-based.
    pub step: usize,
    /// Net separation `s/2^{k-1}`; also the boundary-distance threshold.
    pub separation: f64,
    /// Removed ball radius `s/2^{k+1}`.
    pub radius: f64,
    pub grid_pitch: f64,
    pub candidates: usize,
    pub count: usize,
}

/// Truncation of the greedy porous relative Schottky set: `D` minus the
/// removed open balls of the first `steps` stages.
#[derive(Debug, Clone, Serialize)]
pub struct PorousSet {
    pub dim: usize,
    pub scale: f64,
    pub steps: Vec<PorousStep>,
    pub balls: Vec<ChartDisk>,
    /// Stage (1-based) of each ball.
    pub ball_step: Vec<usize>,
}

impl PorousSet {
    pub fn index(&self) -> BallIndex {
        BallIndex::from_balls(self.balls.iter().cloned())
    }

    /// Scales below which the truncation is not expected to be porous.
    pub fn truncation_floor(&self) -> f64 {
        2.0 * self.steps.last().map_or(self.scale, |s| s.separation)
    }

    pub fn caps(&self) -> Result<Vec<Cap<f64>>> {
        self.balls.iter().map(|b| Cap::from_chart_disk(&b.center, b.radius)).collect()
    }

    pub fn config(&self) -> ChartConfig {
        ChartConfig {
            balls: self.balls.clone(),
            points: Vec::new(),
        }
    }
}

/// Grid points of the bounding box, in lexicographic order (last axis fastest).
fn grid(lo: &[f64], hi: &[f64], pitch: f64, budget: usize) -> Result<Vec<Vec<f64>>> {
    let counts: Vec<usize> = lo
        .iter()
        .zip(hi)
        .map(|(l, h)| ((h - l) / pitch).floor() as usize + 1)
        .collect();
    let total = counts.iter().try_fold(1usize, |a, &c| a.checked_mul(c));
    let total = match total {
        Some(t) if t <= budget => t,
        _ => {
            return Err(Error::BudgetExceeded(format!(
                "grid of pitch {pitch} exceeds {budget} candidates"
            )))
        }
    };
    Ok((0..total)
        .map(|mut idx| {
            let mut p = vec![0.0; lo.len()];
            for axis in (0..lo.len()).rev() {
                p[axis] = lo[axis] + (idx % counts[axis]) as f64 * pitch;
                idx /= counts[axis];
            }
            p
        })
        .collect())
}

/// Greedy construction: stage `k` selects a maximal `s/2^{k-1}`-separated
/// set among grid points at distance at least `s/2^{k-1}` from the boundary
/// of the current region, then removes open balls of radius `s/2^{k+1}`
/// about them. Later stages may select nothing when the earlier balls leave
/// no room at their threshold; only an empty first stage is an error.
pub fn porous_relative_schottky(
    domain: &dyn ChartDomain,
    steps: usize,
    scale: f64,
    grid_budget: usize,
) -> Result<PorousSet> {
    if steps == 0 || !(scale > 0.0) {
        return Err(Error::InvalidInput("need steps ≥ 1 and a positive scale".into()));
    }
    let n = domain.dim();
    let (lo, hi) = domain.bounds();
    let mut removed = BallIndex::new();
    let mut ball_step = Vec::new();
    let mut meta = Vec::with_capacity(steps);
    for k in 1..=steps {
        let separation = scale / 2f64.powi(k as i32 - 1);
        let radius = separation / 4.0;
        let pitch = radius;
        let candidates: Vec<Vec<f64>> = grid(&lo, &hi, pitch, grid_budget)?
            .into_par_iter()
            .filter(|p| {
                domain.contains(p)
                    && domain.dist_to_boundary(p) >= separation
                    && !removed.any_within(p, separation)
            })
            .collect();
        // Net points stored as balls of radius sep/2: two are closer than
        // `separation` exactly when these balls overlap.
        let mut net = BallIndex::new();
        for p in &candidates {
            if !net.any_within(p, separation / 2.0) {
                net.insert(ChartDisk {
                    center: p.clone(),
                    radius: separation / 2.0,
                });
            }
        }
        if k == 1 && net.is_empty() {
            return Err(Error::EmptyNet(k));
        }
        meta.push(PorousStep {
            step: k,
            separation,
            radius,
            grid_pitch: pitch,
            candidates: candidates.len(),
            count: net.len(),
        });
        for c in net.into_balls() {
            removed.insert(ChartDisk {
                center: c.center,
                radius,
            });
            ball_step.push(k);
        }
    }
    Ok(PorousSet {
        dim: n,
        scale,
        steps: meta,
        balls: removed.into_balls(),
        ball_step,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PorositySample {
    pub y: Vec<f64>,
    pub r: f64,
    /// Smallest `C` for which some removed ball meets `B(y, r)` with
    /// `r/C ≤ diam ≤ C r`; infinite when none meets it.
    pub required: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PorosityReport {
    pub c: f64,
    pub samples: Vec<PorositySample>,
    pub failures: usize,
    /// Largest `required` over the samples: the minimal constant that works
    /// for all of them.
    pub max_required: f64,
}

impl PorosityReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Local porosity test at the given centers, over `rungs` log-spaced radii
/// in `[r_min, rho0]` scaled per center by `scales[i]`.
pub fn porosity_check(
    balls: &BallIndex,
    ys: &[Vec<f64>],
    scales: &[f64],
    r_min: f64,
    rho0: f64,
    rungs: usize,
    c: f64,
) -> Result<PorosityReport> {
    if !(r_min > 0.0 && rho0 > r_min) || rungs == 0 || ys.len() != scales.len() {
        return Err(Error::InvalidInput("bad porosity parameters".into()));
    }
    let radii: Vec<f64> = (0..rungs)
        .map(|i| {
            let t = if rungs == 1 { 0.0 } else { i as f64 / (rungs - 1) as f64 };
            r_min * (rho0 / r_min).powf(t)
        })
        .collect();
    let samples: Vec<PorositySample> = ys
        .par_iter()
        .zip(scales)
        .flat_map_iter(|(y, &lambda)| {
            radii.iter().map(move |&r0| {
                let r = r0 * lambda;
                let required = balls
                    .meeting(y, r)
                    .into_iter()
                    .map(|i| {
                        let d = 2.0 * balls.balls()[i].radius;
                        (r / d).max(d / r)
                    })
                    .fold(f64::INFINITY, f64::min);
                PorositySample {
                    y: y.clone(),
                    r,
                    required,
                    passed: required <= c,
                }
            })
        })
        .collect();
    let failures = samples.iter().filter(|s| !s.passed).count();
    let max_required = samples.iter().map(|s| s.required).fold(0.0, f64::max);
    Ok(PorosityReport {
        c,
        samples,
        failures,
        max_required,
    })
}

/// Uniform samples of `T ∩ B(center, radius)` by rejection.
pub fn sample_in_set<R: Rng + ?Sized>(
    domain: &dyn ChartDomain,
    balls: &BallIndex,
    center: &[f64],
    radius: f64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > 1000 * count.max(1) {
            return Err(Error::BudgetExceeded("too few hits sampling the porous set".into()));
        }
        let y: Vec<f64> = center.iter().map(|c| c + rng.random_range(-radius..radius)).collect();
        if crate::analysis::euclid(&y, center) < radius && domain.contains(&y) && !balls.contains(&y) {
            out.push(y);
        }
    }
    Ok(out)
}

/// Image of chart balls under a Möbius map; fails if some ball is sent
/// through `∞`.
pub fn mobius_image_balls(m: &MobiusMap<f64>, balls: &[ChartDisk]) -> Result<Vec<ChartDisk>> {
    balls
        .iter()
        .map(|b| {
            let cap = m.apply_cap(&Cap::from_chart_disk(&b.center, b.radius)?)?;
            match cap.to_chart() {
                ChartBall::Disk { center, radius } => Ok(ChartDisk { center, radius }),
                _ => Err(Error::NumericalDegeneracy("ball image contains ∞".into())),
            }
        })
        .collect()
}

/// Chart image of a point, `None` at `∞`.
pub fn mobius_chart_point(m: &MobiusMap<f64>, x: &[f64]) -> Option<Vec<f64>> {
    m.apply_point(&SpherePoint::from_chart(x)).ok()?.to_chart()
}
