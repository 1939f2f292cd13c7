//! The reflection group of a Schottky set: reduced words, the tree of orbit
//! balls `B_{i1…ik}`, point coding and discreteness sampling.
//!
//! Indices are 0-based. The word `[i1, …, ik]` denotes `R_{i1} ∘ … ∘ R_{ik}`
//! and labels the ball `B_{i1…ik} = (R_{i1} ∘ … ∘ R_{i(k-1)})(B_{ik})`.

use crate::error::{Error, Result};
use crate::mobius::{Cap, MobiusMap, SpherePoint};
use crate::scalar::Real;
use crate::schottky::{SchottkySet, BOUNDARY_TOL};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Sequence of generator indices with no two equal neighbours.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct ReducedWord(Vec<usize>);

impl ReducedWord {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if let Some(pos) = indices.windows(2).position(|w| w[0] == w[1]) {
            return Err(Error::NotReduced(pos + 1));
        }
        Ok(Self(indices))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// `self · [i]`, or `None` if that would not be reduced.
    pub fn child(&self, i: usize) -> Option<Self> {
        if self.last() == Some(i) {
            return None;
        }
        let mut v = self.0.clone();
        v.push(i);
        Some(Self(v))
    }

    /// Product in the free product of order-two groups (cancel `ii`).
    pub fn mul(&self, other: &Self) -> Self {
        let mut v = self.0.clone();
        for &i in &other.0 {
            if v.last() == Some(&i) {
                v.pop();
            } else {
                v.push(i);
            }
        }
        Self(v)
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.iter().rev().copied().collect())
    }

    /// `i1 … i(k-1) ik i(k-1) … i1`, the reflection in `∂B_{i1…ik}`.
    pub fn palindrome(&self) -> Self {
        let mut v = self.0.clone();
        if let Some((_, head)) = self.0.split_last() {
            v.extend(head.iter().rev());
        }
        Self(v)
    }

    /// Uniform random reduced word of the given length over `m` letters.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, m: usize, len: usize) -> Self {
        let mut v: Vec<usize> = Vec::with_capacity(len);
        for _ in 0..len {
            let i = match v.last() {
                None => rng.random_range(0..m),
                Some(&prev) => {
                    let j = rng.random_range(0..m - 1);
                    if j >= prev {
                        j + 1
                    } else {
                        j
                    }
                }
            };
            v.push(i);
        }
        Self(v)
    }

    fn check_range(&self, m: usize) -> Result<()> {
        match self.0.iter().find(|&&i| i >= m) {
            Some(&index) => Err(Error::IndexOutOfRange { index, len: m }),
            None => Ok(()),
        }
    }
}

impl std::fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "]")
    }
}

/// Generator reflections `R_i` of a finite Schottky set.
pub fn generators<T: Real>(s: &SchottkySet<T>) -> Vec<MobiusMap<T>> {
    s.caps().iter().map(MobiusMap::reflection).collect()
}

/// `R_{i1} ∘ … ∘ R_{ik}`; the empty word is the identity.
pub fn word_to_mobius<T: Real>(s: &SchottkySet<T>, w: &ReducedWord) -> Result<MobiusMap<T>> {
    ReducedWord::new(w.0.clone())?;
    w.check_range(s.len())?;
    let mut m = MobiusMap::identity(s.dim());
    for &i in w.indices() {
        m = m.compose(&MobiusMap::reflection(&s.caps()[i]));
    }
    Ok(m)
}

/// The orbit ball `B_w` for a non-empty reduced word.
pub fn word_ball<T: Real>(s: &SchottkySet<T>, w: &ReducedWord) -> Result<Cap<T>> {
    let Some((&last, head)) = w.indices().split_last() else {
        return Err(Error::InvalidInput("orbit balls need a non-empty word".into()));
    };
    let prefix = word_to_mobius(s, &ReducedWord(head.to_vec()))?;
    w.check_range(s.len())?;
    prefix.apply_cap(&s.caps()[last])
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitBall<T: Real> {
    pub word: ReducedWord,
    pub cap: Cap<T>,
    pub diameter: T,
    /// Position of the parent ball in the enumeration output.
    pub parent: Option<usize>,
}

impl<T: Real> OrbitBall<T> {
    pub fn depth(&self) -> usize {
        self.word.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitOptions {
    pub min_diameter: f64,
    pub max_depth: Option<usize>,
    pub max_balls: usize,
}

impl OrbitOptions {
    pub fn min_diameter(delta: f64) -> Self {
        Self {
            min_diameter: delta,
            max_depth: None,
            max_balls: 1_000_000,
        }
    }
}

struct Node<T: Real> {
    word: ReducedWord,
    cap: Cap<T>,
    diameter: T,
    parent: Option<usize>,
}

impl<T: Real> PartialEq for Node<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Real> Eq for Node<T> {}
impl<T: Real> PartialOrd for Node<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Node<T> {
    // Max-heap: larger diameter first, then lexicographically smaller word.
    fn cmp(&self, other: &Self) -> Ordering {
        self.diameter
            .to_f64_lossy()
            .total_cmp(&other.diameter.to_f64_lossy())
            .then_with(|| other.word.cmp(&self.word))
    }
}

/// All orbit balls of chordal diameter at least `opts.min_diameter`, in
/// order of decreasing diameter (ties by lexicographic word). Branches are
/// pruned as soon as a ball falls below the threshold; children are nested in
/// their parents so diameters never grow along a branch.
pub fn orbit_balls<T: Real>(s: &SchottkySet<T>, opts: &OrbitOptions) -> Result<Vec<OrbitBall<T>>> {
    let delta = T::lit(opts.min_diameter);
    let gens = generators(s);
    let max_depth = opts.max_depth.unwrap_or(usize::MAX);
    let mut heap = BinaryHeap::new();
    if max_depth >= 1 {
        for (i, c) in s.caps().iter().enumerate() {
            let d = c.chordal_diameter();
            if d >= delta {
                heap.push(Node {
                    word: ReducedWord(vec![i]),
                    cap: c.clone(),
                    diameter: d,
                    parent: None,
                });
            }
        }
    }
    let mut out: Vec<OrbitBall<T>> = Vec::new();
    while let Some(node) = heap.pop() {
        if out.len() >= opts.max_balls {
            return Err(Error::BudgetExceeded(format!(
                "more than {} orbit balls of diameter >= {}",
                opts.max_balls, opts.min_diameter
            )));
        }
        let idx = out.len();
        if node.word.len() < max_depth {
            let u = word_to_mobius_unchecked(&gens, node.word.indices(), s.dim());
            for (i, c) in s.caps().iter().enumerate() {
                let Some(word) = node.word.child(i) else {
                    continue;
                };
                let cap = u.apply_cap(c)?;
                let d = cap.chordal_diameter();
                if d >= delta {
                    heap.push(Node {
                        word,
                        cap,
                        diameter: d,
                        parent: Some(idx),
                    });
                }
            }
        }
        out.push(OrbitBall {
            word: node.word,
            cap: node.cap,
            diameter: node.diameter,
            parent: node.parent,
        });
    }
    Ok(out)
}

fn word_to_mobius_unchecked<T: Real>(gens: &[MobiusMap<T>], w: &[usize], n: usize) -> MobiusMap<T> {
    w.iter()
        .fold(MobiusMap::identity(n), |m, &i| m.compose(&gens[i]))
}

/// Result of peeling a point through the orbit-ball tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Coding<T: Real> {
    /// `p = U(q)` with `U = word` and `q ∈ S`; `boundary` flags a landing on a
    /// peripheral sphere.
    Terminated {
        word: ReducedWord,
        landing: SpherePoint<T>,
        boundary: bool,
    },
    /// `p` lies in the orbit ball of `word` and peeling did not reach `S`.
    Unresolved { word: ReducedWord },
}

impl<T: Real> Coding<T> {
    pub fn word(&self) -> &ReducedWord {
        match self {
            Coding::Terminated { word, .. } | Coding::Unresolved { word } => word,
        }
    }

    pub fn is_resolved(&self) -> bool {
        matches!(self, Coding::Terminated { .. })
    }
}

/// Repeatedly finds the cap containing the point and reflects it out.
pub fn code_point<T: Real>(s: &SchottkySet<T>, p: &SpherePoint<T>, max_depth: usize) -> Result<Coding<T>> {
    let gens = generators(s);
    code_point_with(s, &gens, p, max_depth)
}

pub(crate) fn code_point_with<T: Real>(
    s: &SchottkySet<T>,
    gens: &[MobiusMap<T>],
    p: &SpherePoint<T>,
    max_depth: usize,
) -> Result<Coding<T>> {
    let mut word = Vec::new();
    let mut q = p.clone();
    let tol = T::tol(BOUNDARY_TOL);
    loop {
        // The cap just peeled is excluded: after R_i the point is outside B_i
        // up to rounding.
        let mut inside = None;
        let mut boundary = false;
        for (i, c) in s.caps().iter().enumerate() {
            if word.last() == Some(&i) {
                continue;
            }
            let v = c.signed(&q);
            if v > tol {
                inside = Some(i);
                break;
            }
            if v.abs() <= tol {
                boundary = true;
            }
        }
        match inside {
            None => {
                return Ok(Coding::Terminated {
                    word: ReducedWord(word),
                    landing: q,
                    boundary,
                })
            }
            Some(_) if word.len() >= max_depth => {
                return Ok(Coding::Unresolved {
                    word: ReducedWord(word),
                })
            }
            Some(i) => {
                q = gens[i].apply_point(&q)?;
                word.push(i);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    /// Minimum over words of the maximal sampled displacement.
    pub gap: f64,
    /// `min{r1, r2, r3}` with chordal radii.
    pub chordal_bound: f64,
    /// The same bound with geodesic (angular) radii.
    pub geodesic_bound: f64,
    pub words: usize,
    pub points: usize,
}

/// Sampled discreteness gap `min_U max_x |U(x) - x|` over non-identity words.
/// The centers of the first three caps are always added to the point
/// samples, since they witness the displacement bound.
pub fn discreteness_gap<T: Real>(
    s: &SchottkySet<T>,
    words: &[ReducedWord],
    points: &[SpherePoint<T>],
) -> Result<GapReport> {
    if s.len() < 3 {
        return Err(Error::InvalidInput("need at least three caps".into()));
    }
    let mut pts: Vec<SpherePoint<T>> = points.to_vec();
    pts.extend(s.caps()[..3].iter().map(|c| c.center()));
    let gens = generators(s);
    let mut maps = Vec::new();
    for w in words.iter().filter(|w| !w.is_empty()) {
        ReducedWord::new(w.0.clone())?;
        w.check_range(s.len())?;
        maps.push(word_to_mobius_unchecked(&gens, w.indices(), s.dim()));
    }
    let gap = maps
        .par_iter()
        .map(|u| {
            pts.iter()
                .filter_map(|x| u.apply_point(x).ok().map(|y| y.chordal(x).to_f64_lossy()))
                .fold(0.0f64, f64::max)
        })
        .reduce(|| f64::INFINITY, f64::min);
    let caps = &s.caps()[..3];
    Ok(GapReport {
        gap,
        chordal_bound: caps
            .iter()
            .map(|c| c.chordal_radius().to_f64_lossy())
            .fold(f64::INFINITY, f64::min),
        geodesic_bound: caps
            .iter()
            .map(|c| c.angular_radius().to_f64_lossy())
            .fold(f64::INFINITY, f64::min),
        words: maps.len(),
        points: pts.len(),
    })
}

/// `U(S)` for `U = R_{i1} ∘ … ∘ R_{ik}`: the closed outer ball `B_w` minus
/// the inner balls `B_{w i}`, `i ≠ ik`.
#[derive(Debug, Clone, PartialEq)]
pub struct SetCopy<T: Real> {
    pub word: ReducedWord,
    pub outer: Cap<T>,
    pub inner: Vec<(usize, Cap<T>)>,
}

impl<T: Real> SetCopy<T> {
    pub fn contains(&self, p: &SpherePoint<T>, tol: T) -> bool {
        self.outer.signed(p) >= -tol && self.inner.iter().all(|(_, c)| c.signed(p) <= tol)
    }

    /// As a relative Schottky set inside the outer ball.
    pub fn as_relative(&self, n: usize) -> SchottkySet<T> {
        SchottkySet::relative(
            n,
            self.inner.iter().map(|(_, c)| c.clone()).collect(),
            crate::schottky::Region::CapComplement(vec![self.outer.complement()]),
        )
    }
}

pub fn copy_of_set<T: Real>(s: &SchottkySet<T>, w: &ReducedWord) -> Result<SetCopy<T>> {
    let outer = word_ball(s, w)?;
    let u = word_to_mobius(s, w)?;
    let last = w.last().unwrap();
    let inner = s
        .caps()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != last)
        .map(|(i, c)| Ok((i, u.apply_cap(c)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SetCopy {
        word: w.clone(),
        outer,
        inner,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;
    use std::f64::consts::PI;

    use crate::fixtures::equatorial_three;

    /// Every reduced word up to `depth`, ball computed from the definition.
    fn brute_force(s: &SchottkySet<f64>, depth: usize) -> Vec<(ReducedWord, Cap<f64>)> {
        let mut out = Vec::new();
        let mut frontier = vec![ReducedWord::empty()];
        for _ in 0..depth {
            let mut next = Vec::new();
            for w in &frontier {
                for i in 0..s.len() {
                    if let Some(c) = w.child(i) {
                        let ball = word_to_mobius(s, w).unwrap().apply_cap(&s.caps()[i]).unwrap();
                        out.push((c.clone(), ball));
                        next.push(c);
                    }
                }
            }
            frontier = next;
        }
        out
    }

    #[test]
    fn word_basics() {
        assert_eq!(ReducedWord::new(vec![0, 0]), Err(Error::NotReduced(1)));
        let s = equatorial_three(0.5);
        assert!(word_to_mobius(&s, &ReducedWord::empty()).unwrap().distance(&MobiusMap::identity(2)) < 1e-15);
        assert_eq!(
            word_to_mobius(&s, &ReducedWord::new(vec![0, 3]).unwrap()),
            Err(Error::IndexOutOfRange { index: 3, len: 3 })
        );
        let w = ReducedWord::new(vec![0, 1, 0]).unwrap();
        let u = word_to_mobius(&s, &w).unwrap();
        let r: Vec<_> = generators(&s);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let p = SpherePoint::random(&mut rng, 2);
            let direct = r[0]
                .apply_point(&r[1].apply_point(&r[0].apply_point(&p).unwrap()).unwrap())
                .unwrap();
            assert!(u.apply_point(&p).unwrap().chordal(&direct) < 1e-10);
        }
        let a = ReducedWord::new(vec![0, 1, 2]).unwrap();
        let b = ReducedWord::new(vec![2, 1, 0]).unwrap();
        assert!(a.mul(&b).is_empty());
        assert_eq!(a.palindrome().indices(), &[0, 1, 2, 1, 0]);
    }

    #[test]
    fn empty_when_threshold_exceeds_caps() {
        let s = equatorial_three(0.5);
        let max = s.caps().iter().map(|c| c.chordal_diameter()).fold(0.0, f64::max);
        assert!(orbit_balls(&s, &OrbitOptions::min_diameter(max + 1e-9)).unwrap().is_empty());
    }

    #[test]
    fn depth_two_count() {
        let s = equatorial_three(0.5);
        let opts = OrbitOptions {
            min_diameter: f64::MIN_POSITIVE,
            max_depth: Some(2),
            max_balls: 100,
        };
        let balls = orbit_balls(&s, &opts).unwrap();
        assert_eq!(balls.len(), 3 + 3 * 2);
        let tight = OrbitOptions { max_balls: 5, ..opts };
        assert!(matches!(orbit_balls(&s, &tight), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn pruned_enumeration_matches_brute_force() {
        let s = equatorial_three(PI / 5.0);
        let delta = 0.1;
        let balls = orbit_balls(&s, &OrbitOptions::min_diameter(delta)).unwrap();
        assert!(balls.iter().all(|b| b.depth() < 12));
        let brute: BTreeSet<ReducedWord> = brute_force(&s, 12)
            .into_iter()
            .filter(|(_, c)| c.chordal_diameter() >= delta)
            .map(|(w, _)| w)
            .collect();
        let got: BTreeSet<ReducedWord> = balls.iter().map(|b| b.word.clone()).collect();
        assert_eq!(got, brute);
        // Decreasing diameter order and parents emitted first.
        for (k, b) in balls.iter().enumerate() {
            if k > 0 {
                assert!(balls[k - 1].diameter >= b.diameter);
            }
            if let Some(p) = b.parent {
                assert!(p < k);
                assert_eq!(balls[p].word.indices(), &b.word.indices()[..b.depth() - 1]);
            }
        }
    }

    #[test]
    fn nesting_and_same_depth_disjointness() {
        let s = equatorial_three(PI / 5.0);
        let all = brute_force(&s, 6);
        let by_word: std::collections::HashMap<_, _> = all.iter().cloned().collect();
        for (w, c) in &all {
            if w.len() >= 2 {
                let parent = &by_word[&ReducedWord(w.indices()[..w.len() - 1].to_vec())];
                assert!(c.inside(parent, 1e-9), "{w}");
            }
        }
        for depth in 1..=6 {
            let level: Vec<_> = all.iter().filter(|(w, _)| w.len() == depth).collect();
            for a in 0..level.len() {
                for b in a + 1..level.len() {
                    assert!(level[a].1.overlap(&level[b].1) <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn palindrome_is_reflection_in_orbit_sphere() {
        let s = equatorial_three(PI / 5.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for len in 1..8 {
            let w = ReducedWord::random(&mut rng, 3, len);
            let direct = MobiusMap::reflection(&word_ball(&s, &w).unwrap());
            let word = word_to_mobius(&s, &w.palindrome()).unwrap();
            let scale = direct.matrix().iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(direct.distance(&word) < 1e-9 * scale.max(1.0), "{w}");
        }
    }

    #[test]
    fn shrinking_by_depth() {
        let s = equatorial_three(PI / 4.0);
        let all = brute_force(&s, 10);
        let mut prev = f64::INFINITY;
        for depth in 1..=10 {
            let m = all
                .iter()
                .filter(|(w, _)| w.len() == depth)
                .map(|(_, c)| c.chordal_diameter())
                .fold(0.0, f64::max);
            assert!(m <= prev + 1e-12);
            prev = m;
        }
        assert!(prev < 0.1);
    }

    #[test]
    fn coding_cases() {
        let s = equatorial_three(PI / 5.0);
        let p = SpherePoint::pole(2);
        match code_point(&s, &p, 10).unwrap() {
            Coding::Terminated { word, .. } => assert!(word.is_empty()),
            c => panic!("{c:?}"),
        }
        let c0 = code_point(&s, &s.caps()[0].center(), 10).unwrap();
        assert_eq!(c0.word().indices()[0], 0);
        match c0 {
            Coding::Terminated { word, landing, .. } => {
                let u = word_to_mobius(&s, &word).unwrap();
                assert!(u.apply_point(&landing).unwrap().chordal(&s.caps()[0].center()) < 1e-10);
                assert!(s.contains(&landing).in_set());
            }
            c => panic!("{c:?}"),
        }
    }

    /// Attracting fixed point of `R_0 ∘ R_1` by power iteration on the matrix.
    fn attracting_fixed_point(s: &SchottkySet<f64>) -> SpherePoint<f64> {
        let m = word_to_mobius(s, &ReducedWord::new(vec![0, 1]).unwrap()).unwrap();
        let mut v = vec![0.1, 0.2, 0.3, 1.0];
        for _ in 0..200 {
            v = m.apply_vector(&v);
            let last = v[3];
            v.iter_mut().for_each(|x| *x /= last);
        }
        SpherePoint::new(v[..3].to_vec()).unwrap()
    }

    #[test]
    fn fixed_point_codes_as_alternating_word() {
        let s = equatorial_three(PI / 5.0);
        let fp = attracting_fixed_point(&s);
        match code_point(&s, &fp, 10).unwrap() {
            Coding::Unresolved { word } => {
                let expected: Vec<usize> = (0..10).map(|k| k % 2).collect();
                assert_eq!(word.indices(), expected.as_slice());
            }
            c => panic!("{c:?}"),
        }
    }

    #[test]
    fn coding_is_deterministic_and_consistent() {
        let s = equatorial_three(PI / 4.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let p = SpherePoint::random(&mut rng, 2);
            let a = code_point(&s, &p, 30).unwrap();
            assert_eq!(a, code_point(&s, &p, 30).unwrap());
            if let Coding::Terminated { word, .. } = &a {
                if !word.is_empty() {
                    assert!(word_ball(&s, word).unwrap().signed(&p) > -1e-9);
                }
            }
        }
    }

    #[test]
    fn gap_respects_radius_bound() {
        let s = equatorial_three(PI / 5.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let words: Vec<_> = (0..300)
            .map(|_| {
                let len = rng.random_range(1..=10);
                ReducedWord::random(&mut rng, 3, len)
            })
            .collect();
        let pts: Vec<_> = (0..300).map(|_| SpherePoint::random(&mut rng, 2)).collect();
        let rep = discreteness_gap(&s, &words, &pts).unwrap();
        assert!(rep.gap >= rep.chordal_bound - 1e-9, "{rep:?}");
        assert!(rep.geodesic_bound > rep.chordal_bound);
        assert_eq!(rep.points, 303);
        let single = discreteness_gap(&s, &[ReducedWord::new(vec![0]).unwrap(), ReducedWord::empty()], &[]).unwrap();
        assert_eq!(single.words, 1);
        assert!(single.gap >= single.chordal_bound - 1e-9);
    }

    #[test]
    fn copy_of_set_fact_three() {
        let s = equatorial_three(PI / 5.0);
        let w = ReducedWord::new(vec![0]).unwrap();
        let copy = copy_of_set(&s, &w).unwrap();
        assert!(copy.outer.approx_eq(&s.caps()[0], 1e-15));
        let inner: Vec<usize> = copy.inner.iter().map(|(i, _)| *i).collect();
        assert_eq!(inner, vec![1, 2]);
        assert!(copy.inner[0].1.approx_eq(&word_ball(&s, &ReducedWord::new(vec![0, 1]).unwrap()).unwrap(), 1e-12));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for w in [vec![0], vec![1, 2], vec![2, 0, 1]] {
            let w = ReducedWord::new(w).unwrap();
            let copy = copy_of_set(&s, &w).unwrap();
            for (_, a) in &copy.inner {
                assert!(a.inside(&copy.outer, 1e-9));
            }
            assert!(copy.inner[0].1.overlap(&copy.inner[1].1) <= 1e-9);
            let u = word_to_mobius(&s, &w).unwrap();
            let mut hits = 0;
            while hits < 100 {
                let p = SpherePoint::random(&mut rng, 2);
                if !s.contains(&p).in_set() {
                    continue;
                }
                assert!(copy.contains(&u.apply_point(&p).unwrap(), 1e-9));
                hits += 1;
            }
        }
        assert_eq!(copy_of_set(&s, &ReducedWord(vec![1, 1])), Err(Error::NotReduced(1)));
    }
}
