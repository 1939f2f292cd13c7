use crate::analysis::{euclid, ChartDisk};
use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone, Default)]
struct Level {
    cell: f64,
    max_radius: f64,
    members: Vec<usize>,
    cells: HashMap<Vec<i64>, Vec<usize>>,
}

/// Spatial index over chart balls, bucketed by dyadic radius class so that
/// each class gets a grid matched to its size.
#[derive(Debug, Clone, Default)]
pub struct BallIndex {
    balls: Vec<ChartDisk>,
    levels: BTreeMap<i32, Level>,
}

impl BallIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_balls(balls: impl IntoIterator<Item = ChartDisk>) -> Self {
        let mut idx = Self::new();
        for b in balls {
            idx.insert(b);
        }
        idx
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn balls(&self) -> &[ChartDisk] {
        &self.balls
    }

    pub fn into_balls(self) -> Vec<ChartDisk> {
        self.balls
    }

    /// Adds a ball; the radius must be positive.
    pub fn insert(&mut self, ball: ChartDisk) -> usize {
        debug_assert!(ball.radius > 0.0);
        let class = ball.radius.log2().floor() as i32;
        let cell = 4.0 * 2f64.powi(class);
        let id = self.balls.len();
        let level = self.levels.entry(class).or_insert_with(|| Level {
            cell,
            ..Level::default()
        });
        level.max_radius = level.max_radius.max(ball.radius);
        level.members.push(id);
        level.cells.entry(key(&ball.center, level.cell)).or_default().push(id);
        self.balls.push(ball);
        id
    }

    /// Calls `f` on every ball with `|x - c| - ρ < reach`, stopping early
    /// when `f` returns `false`. Returns whether the scan ran to completion.
    pub fn visit_near(&self, x: &[f64], reach: f64, mut f: impl FnMut(usize, &ChartDisk) -> bool) -> bool {
        for level in self.levels.values() {
            let span = reach + level.max_radius;
            let k = (span / level.cell).ceil() as i64 + 1;
            let cells = (2 * k + 1).checked_pow(x.len() as u32).unwrap_or(i64::MAX);
            let mut check = |id: usize| -> bool {
                let b = &self.balls[id];
                if euclid(x, &b.center) - b.radius < reach {
                    f(id, b)
                } else {
                    true
                }
            };
            if cells as usize >= level.members.len() {
                for &id in &level.members {
                    if !check(id) {
                        return false;
                    }
                }
                continue;
            }
            let base = key(x, level.cell);
            let mut cur: Vec<i64> = base.iter().map(|c| c - k).collect();
            loop {
                if let Some(ids) = level.cells.get(&cur) {
                    for &id in ids {
                        if !check(id) {
                            return false;
                        }
                    }
                }
                let mut axis = 0;
                while axis < cur.len() {
                    if cur[axis] < base[axis] + k {
                        cur[axis] += 1;
                        break;
                    }
                    cur[axis] = base[axis] - k;
                    axis += 1;
                }
                if axis == cur.len() {
                    break;
                }
            }
        }
        true
    }

    /// Whether some ball comes within `reach` of `x`.
    pub fn any_within(&self, x: &[f64], reach: f64) -> bool {
        !self.visit_near(x, reach, |_, _| false)
    }

    /// Whether `x` lies in some open ball.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.any_within(x, 0.0)
    }

    /// Indices of the open balls meeting the open ball `B(x, r)`.
    pub fn meeting(&self, x: &[f64], r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.visit_near(x, r, |id, _| {
            out.push(id);
            true
        });
        out
    }
}

fn key(x: &[f64], cell: f64) -> Vec<i64> {
    x.iter().map(|v| (v / cell).floor() as i64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_a_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dim in [2, 3] {
            let balls: Vec<ChartDisk> = (0..400)
                .map(|_| ChartDisk {
                    center: (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect(),
                    radius: 10f64.powf(rng.random_range(-3.0..-0.5)),
                })
                .collect();
            let idx = BallIndex::from_balls(balls.clone());
            for _ in 0..200 {
                let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.5..2.5)).collect();
                let r = 10f64.powf(rng.random_range(-3.0..0.5));
                let mut got = idx.meeting(&x, r);
                got.sort();
                let want: Vec<usize> = (0..balls.len())
                    .filter(|&i| euclid(&x, &balls[i].center) - balls[i].radius < r)
                    .collect();
                assert_eq!(got, want);
            }
        }
    }
}
