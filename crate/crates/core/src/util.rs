//! Sampling and connectivity helpers shared by the validation routines.

use std::collections::HashMap;

/// Fibonacci lattice of `count` points on S².
pub fn fibonacci_sphere(count: usize) -> Vec<Vec<f64>> {
    crate::mobius::unit_directions::<f64>(3, count)
}

#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Connected components of the graph joining points closer than `h`.
/// Returns one label per point; labels are dense and ordered by first
/// appearance.
pub fn radius_components(points: &[Vec<f64>], h: f64) -> Vec<usize> {
    let cell = |p: &[f64]| -> Vec<i64> { p.iter().map(|x| (x / h).floor() as i64).collect() };
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        grid.entry(cell(p)).or_default().push(i);
    }
    let mut uf = UnionFind::new(points.len());
    let h2 = h * h;
    for (i, p) in points.iter().enumerate() {
        let c = cell(p);
        let d = c.len();
        // Visit the 3^d neighbouring cells.
        let mut offs = vec![-1i64; d];
        loop {
            let key: Vec<i64> = c.iter().zip(&offs).map(|(a, b)| a + b).collect();
            if let Some(bucket) = grid.get(&key) {
                for &j in bucket {
                    if j > i {
                        let dd: f64 = p.iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                        if dd < h2 {
                            uf.union(i, j);
                        }
                    }
                }
            }
            let mut k = 0;
            loop {
                if k == d {
                    break;
                }
                offs[k] += 1;
                if offs[k] <= 1 {
                    break;
                }
                offs[k] = -1;
                k += 1;
            }
            if k == d {
                break;
            }
        }
    }
    let mut labels = vec![0; points.len()];
    let mut seen: HashMap<usize, usize> = HashMap::new();
    for (i, label) in labels.iter_mut().enumerate() {
        let r = uf.find(i);
        let next = seen.len();
        *label = *seen.entry(r).or_insert(next);
    }
    labels
}

/// Number of distinct labels.
pub fn component_count(labels: &[usize]) -> usize {
    labels.iter().max().map_or(0, |m| m + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_clusters() {
        let mut pts: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 * 0.1, 0.0]).collect();
        pts.extend((0..10).map(|i| vec![5.0 + i as f64 * 0.1, 0.0]));
        let labels = radius_components(&pts, 0.15);
        assert_eq!(component_count(&labels), 2);
        assert_eq!(component_count(&radius_components(&pts, 6.0)), 1);
    }
}
