use super::cantor::{fat_cantor, ratio_f64, FatCantorSet, Rational};
use super::index::BallIndex;
use crate::analysis::{euclid, ChartDisk, Domain, MapUnderTest};
use crate::error::{Error, Result};
use crate::mobius::Cap;
use crate::schottky::SchottkySet;
use rand::Rng;
use serde::Serialize;
use std::sync::Arc;

/// Relative clearance kept between packed balls and everything else.
const GAP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonrigidParams {
    pub dim: usize,
    pub cantor_depth: usize,
    /// Transverse window `[-W, W]^{n-1}`; also the width of the two outer slabs.
    pub window: f64,
    /// Gap filling stops once radii drop below `margin / 2`.
    pub margin: f64,
    pub max_balls: usize,
}

impl Default for NonrigidParams {
    fn default() -> Self {
        Self {
            dim: 2,
            cantor_depth: 3,
            window: 1.0,
            margin: 1.0 / 32.0,
            max_balls: 200_000,
        }
    }
}

/// Disjoint open balls packed into the slab `(lo, hi) × [-W, W]^{n-1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlabPacking {
    pub lo: f64,
    pub hi: f64,
    /// `h(x) - x` on the slab.
    pub shift: f64,
    pub balls: Vec<ChartDisk>,
    /// Every point of the windowed slab lies within this distance of a ball
    /// or of the slab/window boundary.
    pub residual_margin: f64,
}

#[derive(Debug, Clone)]
pub struct NonrigidExample {
    pub params: NonrigidParams,
    pub cantor: FatCantorSet,
    pub slabs: Vec<SlabPacking>,
    pub s: SchottkySet<f64>,
    pub s_prime: SchottkySet<f64>,
    /// `F(x) = (h(x_1), x_2, …, x_n)` in the chart.
    pub f: MapUnderTest,
}

impl NonrigidExample {
    pub fn balls(&self) -> impl Iterator<Item = &ChartDisk> {
        self.slabs.iter().flat_map(|s| s.balls.iter())
    }

    /// `F(B)` for every packed ball `B`, in the same order as [`Self::balls`].
    pub fn image_balls(&self) -> Vec<ChartDisk> {
        self.slabs
            .iter()
            .flat_map(|s| s.balls.iter().map(move |b| translate(b, s.shift)))
            .collect()
    }

    /// Random chart points of `K_d × [-W, W]^{n-1}`, all of which lie in `S`.
    pub fn k_fiber_samples<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<Vec<f64>> {
        let blocks = self.cantor.blocks();
        let w = self.params.window;
        (0..count)
            .map(|_| {
                let b = &blocks[rng.random_range(0..blocks.len())];
                let (lo, hi) = (ratio_f64(b.lo), ratio_f64(b.hi));
                let mut x = vec![lo + (hi - lo) * rng.random::<f64>()];
                x.extend((1..self.params.dim).map(|_| rng.random_range(-w..=w)));
                x
            })
            .collect()
    }
}

fn translate(b: &ChartDisk, shift: f64) -> ChartDisk {
    let mut center = b.center.clone();
    center[0] += shift;
    ChartDisk {
        center,
        radius: b.radius,
    }
}

/// The non-rigid example: slabs over the complementary intervals of a fat
/// Cantor set, packed with balls, together with the slab-wise translation `F`.
pub fn nonrigid_example(params: &NonrigidParams) -> Result<NonrigidExample> {
    let n = params.dim;
    if n < 2 {
        return Err(Error::InvalidInput(format!("dimension {n} < 2")));
    }
    if !(params.window > 0.0 && params.margin > 0.0) {
        return Err(Error::InvalidInput("window and margin must be positive".into()));
    }
    let cantor = fat_cantor(params.cantor_depth)?;
    let w = params.window;
    let mut intervals = vec![(-w, 0.0, Rational::from_integer(0))];
    for iv in cantor.removed() {
        intervals.push((ratio_f64(iv.lo), ratio_f64(iv.hi), cantor.measure_below(iv.lo)));
    }
    intervals.push((1.0, 1.0 + w, cantor.measure()));
    let mut slabs = Vec::with_capacity(intervals.len());
    let mut total = 0;
    for (lo, hi, shift) in intervals {
        let slab = pack_slab(n, lo, hi, w, params.margin, params.max_balls - total)?;
        total += slab.balls.len();
        slabs.push(SlabPacking {
            shift: ratio_f64(shift),
            ..slab
        });
    }
    let caps = |balls: &mut dyn Iterator<Item = ChartDisk>| -> Result<Vec<Cap<f64>>> {
        balls.map(|b| Cap::from_chart_disk(&b.center, b.radius)).collect()
    };
    let s = SchottkySet::new(n, caps(&mut slabs.iter().flat_map(|s| s.balls.iter().cloned()))?);
    let s_prime = SchottkySet::new(
        n,
        caps(&mut slabs.iter().flat_map(|s| s.balls.iter().map(move |b| translate(b, s.shift))))?,
    );
    let k = cantor.clone();
    let f = MapUnderTest::new(
        Domain::Chart { dim: n },
        Arc::new(move |x: &[f64]| {
            let mut y = x.to_vec();
            y[0] = k.h(x[0]);
            Some(y)
        }),
    );
    Ok(NonrigidExample {
        params: params.clone(),
        cantor,
        slabs,
        s,
        s_prime,
        f,
    })
}

/// Lexicographic grid over `(lo, hi) × [-W, W]^{n-1}` with the given pitch.
fn slab_grid(n: usize, lo: f64, hi: f64, w: f64, pitch: f64) -> Vec<Vec<f64>> {
    let axis = |a: f64, b: f64| -> Vec<f64> {
        let steps = ((b - a) / pitch).floor() as usize;
        (0..=steps).map(|i| a + i as f64 * pitch).collect()
    };
    let mut pts: Vec<Vec<f64>> = axis(lo, hi).into_iter().map(|x| vec![x]).collect();
    let cross = axis(-w, w);
    for _ in 1..n {
        pts = pts
            .into_iter()
            .flat_map(|p| {
                cross.iter().map(move |&c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    pts
}

fn wall_clearance(x: &[f64], lo: f64, hi: f64, w: f64) -> f64 {
    let mut c = (x[0] - lo).min(hi - x[0]);
    for v in &x[1..] {
        c = c.min(w - v.abs());
    }
    c
}

/// A column (or lattice) of equal balls of radius `0.49·width`, then greedy
/// gap filling with halving radii down to `margin / 2`.
pub fn pack_slab(n: usize, lo: f64, hi: f64, w: f64, margin: f64, budget: usize) -> Result<SlabPacking> {
    let width = hi - lo;
    let mut index = BallIndex::new();
    let push = |index: &mut BallIndex, b: ChartDisk| -> Result<()> {
        if index.len() >= budget {
            return Err(Error::BudgetExceeded(format!("more than {budget} packed balls")));
        }
        index.insert(b);
        Ok(())
    };
    let big = 0.49 * width;
    let mid = (lo + hi) / 2.0;
    let lattice: Vec<f64> = {
        let mut v = Vec::new();
        let mut t = -w + width / 2.0;
        while t + big <= w {
            v.push(t);
            t += width;
        }
        v
    };
    let mut column: Vec<Vec<f64>> = vec![vec![mid]];
    for _ in 1..n {
        column = column
            .into_iter()
            .flat_map(|p| {
                lattice.iter().map(move |&t| {
                    let mut q = p.clone();
                    q.push(t);
                    q
                })
            })
            .collect();
    }
    for center in column {
        push(&mut index, ChartDisk { center, radius: big })?;
    }
    let mut rho = big / 2.0;
    let mut last = big;
    let mut last_pitch = 0.0;
    while rho >= margin / 2.0 {
        let pitch = rho / 2.0;
        let need = rho * (1.0 + GAP);
        for p in slab_grid(n, lo, hi, w, pitch) {
            if wall_clearance(&p, lo, hi, w) >= need && !index.any_within(&p, need) {
                push(&mut index, ChartDisk { center: p, radius: rho })?;
            }
        }
        last = rho;
        last_pitch = pitch;
        rho /= 2.0;
    }
    let residual_margin = if last_pitch > 0.0 {
        last * (1.0 + GAP) + last_pitch * (n as f64).sqrt() / 2.0
    } else {
        width / 2.0
    };
    Ok(SlabPacking {
        lo,
        hi,
        shift: 0.0,
        balls: index.into_balls(),
        residual_margin,
    })
}

/// Distance from `x` to the packed balls (negative inside one) or to the
/// slab walls, whichever is smaller.
pub fn slab_clearance(slab: &SlabPacking, w: f64, x: &[f64]) -> f64 {
    slab.balls
        .iter()
        .map(|b| euclid(x, &b.center) - b.radius)
        .fold(wall_clearance(x, slab.lo, slab.hi, w), f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{dilatation_estimate, mobius_fit, qs_envelope};
    use crate::mobius::SpherePoint;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small() -> NonrigidExample {
        nonrigid_example(&NonrigidParams {
            dim: 2,
            cantor_depth: 2,
            window: 0.5,
            margin: 1.0 / 32.0,
            max_balls: 100_000,
        })
        .unwrap()
    }

    #[test]
    fn packings_are_valid() {
        let ex = small();
        assert_eq!(ex.slabs.len(), 5);
        let w = ex.params.window;
        for slab in &ex.slabs {
            for b in &slab.balls {
                assert!(wall_clearance(&b.center, slab.lo, slab.hi, w) >= b.radius);
            }
        }
        assert!(ex.s.validate().is_valid());
        assert!(ex.s_prime.validate().is_valid());
        assert_eq!(ex.s.len(), ex.balls().count());
    }

    #[test]
    fn residual_margin_certificate() {
        let ex = small();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = ex.params.window;
        for slab in &ex.slabs {
            for _ in 0..500 {
                let x = vec![rng.random_range(slab.lo..slab.hi), rng.random_range(-w..w)];
                assert!(slab_clearance(slab, w, &x) <= slab.residual_margin);
            }
        }
    }

    #[test]
    fn packed_balls_translate_to_balls() {
        let ex = small();
        for (b, img) in ex.balls().zip(ex.image_balls()) {
            assert_eq!(img.radius, b.radius);
            for k in 0..16 {
                let a = k as f64 * std::f64::consts::PI / 8.0;
                let p = [b.center[0] + b.radius * a.cos(), b.center[1] + b.radius * a.sin()];
                let q = ex.f.eval(&p).unwrap();
                assert!((euclid(&q, &img.center) - img.radius).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn f_fixes_the_zero_fiber_and_maps_s_into_s_prime() {
        let ex = small();
        for y in [-3.0, -0.2, 0.0, 0.4, 7.0] {
            assert_eq!(ex.f.eval(&[0.0, y]).unwrap(), vec![0.0, y]);
        }
        let images = BallIndex::from_balls(ex.image_balls());
        let originals = BallIndex::from_balls(ex.balls().cloned());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut checked = 0;
        while checked < 2000 {
            let x = vec![rng.random_range(-0.5..1.5), rng.random_range(-0.5..0.5)];
            if originals.contains(&x) {
                continue;
            }
            checked += 1;
            let y = ex.f.eval(&x).unwrap();
            assert!(!images.any_within(&y, -1e-10), "{x:?}");
        }
    }

    #[test]
    fn dilatation_on_a_cantor_block_is_two() {
        let ex = small();
        let b = &ex.cantor.blocks()[0];
        let x = [ratio_f64(b.lo + b.hi) / 2.0, 0.1];
        let h = dilatation_estimate(&ex.f, &x, &[1e-3, 1e-4], 2).unwrap();
        assert!((h - 2.0).abs() < 1e-2, "{h}");
    }

    #[test]
    fn non_rigidity_witness() {
        let ex = small();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xs = ex.k_fiber_samples(&mut rng, 50);
        let pairs: Vec<_> = xs
            .iter()
            .map(|x| (SpherePoint::from_chart(x), SpherePoint::from_chart(&ex.f.eval(x).unwrap())))
            .collect();
        let fit = mobius_fit(&pairs).unwrap();
        assert!(fit.residual > 1e-3, "{}", fit.residual);
        let profile = qs_envelope(
            &ex.f,
            |r: &mut ChaCha8Rng| vec![r.random_range(-0.5..1.5), r.random_range(-0.5..0.5)],
            20_000,
            &mut rng,
        )
        .unwrap();
        assert!(profile.max_excess(|t| 4.0 * t) <= 0.0);
    }

    #[test]
    fn budget_is_enforced() {
        let params = NonrigidParams {
            max_balls: 10,
            ..NonrigidParams::default()
        };
        assert!(matches!(nonrigid_example(&params), Err(Error::BudgetExceeded(_))));
    }
}
