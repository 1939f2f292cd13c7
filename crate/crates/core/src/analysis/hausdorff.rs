use super::euclid;
use crate::error::{Error, Result};
use crate::mobius::{unit_directions, Cap};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Uniform hash grid over a finite point set, for nearest-neighbour queries.
struct Grid<'a> {
    points: &'a [Vec<f64>],
    cell: f64,
    lo: Vec<i64>,
    hi: Vec<i64>,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
}

impl<'a> Grid<'a> {
    fn new(points: &'a [Vec<f64>]) -> Self {
        let dim = points[0].len();
        let mut min = vec![f64::INFINITY; dim];
        let mut max = vec![f64::NEG_INFINITY; dim];
        for p in points {
            for k in 0..dim {
                min[k] = min[k].min(p[k]);
                max[k] = max[k].max(p[k]);
            }
        }
        let extent = min.iter().zip(&max).map(|(a, b)| b - a).fold(0.0, f64::max);
        let cell = if extent > 0.0 {
            (extent / (points.len() as f64).powf(1.0 / dim as f64)).max(extent * 1e-6)
        } else {
            1.0
        };
        let key = |p: &[f64]| -> Vec<i64> { p.iter().map(|v| (v / cell).floor() as i64).collect() };
        let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(key(p)).or_default().push(i);
        }
        Self {
            points,
            cell,
            lo: key(&min),
            hi: key(&max),
            buckets,
        }
    }

    fn nearest(&self, q: &[f64]) -> f64 {
        let qk: Vec<i64> = q.iter().map(|v| (v / self.cell).floor() as i64).collect();
        let max_ring = qk
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(c, (l, h))| (c - l).abs().max((h - c).abs()))
            .max()
            .unwrap_or(0);
        let mut best = f64::INFINITY;
        for ring in 0..=max_ring {
            // Cells of Chebyshev index distance `ring`, clipped to the grid.
            let from: Vec<i64> = qk.iter().zip(&self.lo).map(|(c, l)| (c - ring).max(*l)).collect();
            let to: Vec<i64> = qk.iter().zip(&self.hi).map(|(c, h)| (c + ring).min(*h)).collect();
            if from.iter().zip(&to).all(|(f, t)| f <= t) {
                let mut cur = from.clone();
                loop {
                    let cheb = cur.iter().zip(&qk).map(|(a, b)| (a - b).abs()).max().unwrap_or(0);
                    if cheb == ring {
                        if let Some(ids) = self.buckets.get(&cur) {
                            for &i in ids {
                                best = best.min(euclid(q, &self.points[i]));
                            }
                        }
                    }
                    let mut axis = 0;
                    loop {
                        if axis == cur.len() {
                            break;
                        }
                        if cur[axis] < to[axis] {
                            cur[axis] += 1;
                            break;
                        }
                        cur[axis] = from[axis];
                        axis += 1;
                    }
                    if axis == cur.len() {
                        break;
                    }
                }
            }
            if best <= ring as f64 * self.cell {
                break;
            }
        }
        best
    }
}

fn one_sided(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let grid = Grid::new(b);
    a.par_iter().map(|p| grid.nearest(p)).reduce(|| 0.0, f64::max)
}

/// Two-sided Hausdorff distance between finite point sets; `∞` when exactly
/// one of them is empty and `0` when both are.
pub fn hausdorff_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => 0.0,
        (true, false) | (false, true) => f64::INFINITY,
        _ => one_sided(a, b).max(one_sided(b, a)),
    }
}

/// Boundary samples plus centers of each cap, in sphere coordinates.
pub fn cap_samples(caps: &[Cap<f64>], per_cap: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(caps.len() * (per_cap + 1));
    for c in caps {
        out.push(c.center().into_coords());
        out.extend(c.boundary_samples(per_cap).into_iter().map(|p| p.into_coords()));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartDisk {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Balls and points in the chart, `∞` implicitly fixed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChartConfig {
    pub balls: Vec<ChartDisk>,
    pub points: Vec<Vec<f64>>,
}

impl ChartConfig {
    /// Points plus centers and `per_ball` boundary samples of every ball.
    pub fn samples(&self, per_ball: usize) -> Vec<Vec<f64>> {
        let mut out = self.points.clone();
        for b in &self.balls {
            out.push(b.center.clone());
            for d in unit_directions::<f64>(b.center.len(), per_ball) {
                out.push(b.center.iter().zip(&d).map(|(c, u)| c + b.radius * u).collect());
            }
        }
        out
    }
}

/// `(1/r)·A`: centers, radii and points all scaled by `1/r`.
pub fn rescale_config(cfg: &ChartConfig, r: f64) -> Result<ChartConfig> {
    if !(r > 0.0) {
        return Err(Error::InvalidInput(format!("rescaling factor {r} must be positive")));
    }
    Ok(ChartConfig {
        balls: cfg
            .balls
            .iter()
            .map(|b| ChartDisk {
                center: b.center.iter().map(|c| c / r).collect(),
                radius: b.radius / r,
            })
            .collect(),
        points: cfg.points.iter().map(|p| p.iter().map(|c| c / r).collect()).collect(),
    })
}

/// Grid samples of `(1/r)(A - x) ∩ [-1,1]^n` for `A = {y : contains(y)}`.
pub fn window_samples<F>(contains: &F, x: &[f64], r: f64, pitch: f64) -> Vec<Vec<f64>>
where
    F: Fn(&[f64]) -> bool + Sync,
{
    let n = x.len();
    let steps = (2.0 / pitch).round() as usize;
    let side = steps + 1;
    let total = side.pow(n as u32);
    (0..total)
        .into_par_iter()
        .filter_map(|idx| {
            let mut rem = idx;
            let y: Vec<f64> = (0..n)
                .map(|_| {
                    let i = rem % side;
                    rem /= side;
                    -1.0 + 2.0 * i as f64 / steps as f64
                })
                .collect();
            let world: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + r * b).collect();
            contains(&world).then_some(y)
        })
        .collect()
}

/// `dist_H` between the unit-window views of successive rescalings at
/// `r_k = 2^{-k}`; entry `i` compares `ks[i]` with `ks[i] + 1`.
pub fn weak_tangent_steps<F>(contains: &F, x: &[f64], ks: &[u32], pitch: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> bool + Sync,
{
    ks.iter()
        .map(|&k| {
            let r = 0.5f64.powi(k as i32);
            let a = window_samples(contains, x, r, pitch);
            let b = window_samples(contains, x, r / 2.0, pitch);
            hausdorff_distance(&a, &b)
        })
        .collect()
}
