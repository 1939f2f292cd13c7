//! Equivariant extension of boundary maps between Schottky sets, doubling
//! along peripheral spheres and the largest-sphere doubling sequence.

use crate::error::{Error, Result};
use crate::group::{word_ball, word_to_mobius, ReducedWord};
use crate::mobius::{angle_between, Cap, MobiusMap, SpherePoint};
use crate::schottky::SchottkySet;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

pub type PointMap = Arc<dyn Fn(&SpherePoint<f64>) -> SpherePoint<f64> + Send + Sync>;

/// A map `f: S → S'` with `f(∂B_i) = ∂B'_i`, given as a black box.
#[derive(Clone)]
pub struct BoundaryMap {
    source: SchottkySet<f64>,
    target: SchottkySet<f64>,
    evaluator: PointMap,
}

impl std::fmt::Debug for BoundaryMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoundaryMap")
            .field("source", &self.source)
            .field("target", &self.target)
            .finish_non_exhaustive()
    }
}

impl BoundaryMap {
    pub fn new(source: SchottkySet<f64>, target: SchottkySet<f64>, evaluator: PointMap) -> Result<Self> {
        if source.len() != target.len() || source.dim() != target.dim() {
            return Err(Error::InvalidInput(format!(
                "source has {} caps in dimension {}, target {} in dimension {}",
                source.len(),
                source.dim(),
                target.len(),
                target.dim()
            )));
        }
        Ok(Self {
            source,
            target,
            evaluator,
        })
    }

    /// Restriction of a Möbius map to `source`; the target is `m(source)`.
    pub fn from_mobius(source: SchottkySet<f64>, m: MobiusMap<f64>) -> Result<Self> {
        let target = source.map(&m)?;
        Self::new(
            source,
            target,
            Arc::new(move |p| m.apply_point(p).expect("Möbius image of a sphere point")),
        )
    }

    pub fn identity(source: SchottkySet<f64>) -> Self {
        let target = source.clone();
        Self {
            source,
            target,
            evaluator: Arc::new(|p| p.clone()),
        }
    }

    pub fn source(&self) -> &SchottkySet<f64> {
        &self.source
    }

    pub fn target(&self) -> &SchottkySet<f64> {
        &self.target
    }

    pub fn eval(&self, p: &SpherePoint<f64>) -> SpherePoint<f64> {
        (self.evaluator)(p)
    }

    /// Largest `|⟨f(x),u'_i⟩ - t'_i|` over `per_cap` samples of each `∂B_i`.
    pub fn boundary_defect(&self, per_cap: usize) -> f64 {
        self.source
            .caps()
            .iter()
            .zip(self.target.caps())
            .flat_map(|(c, d)| {
                c.boundary_samples(per_cap)
                    .into_iter()
                    .map(move |x| d.signed(&self.eval(&x)).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// The induced isomorphism `Γ_S → Γ_S'`: the same index sequence read with
/// the target generators.
pub fn phi(w: &ReducedWord) -> Result<ReducedWord> {
    ReducedWord::new(w.indices().to_vec())
}

/// `U'(f(x))` for `U = word(w)`: the value of `f_∞` at `U(x)`.
pub fn f_infinity(bm: &BoundaryMap, w: &ReducedWord, x: &SpherePoint<f64>) -> Result<SpherePoint<f64>> {
    if !bm.source.contains(x).in_set() {
        return Err(Error::NotInSet(format!("{:?}", x.coords())));
    }
    let u = word_to_mobius(&bm.target, &phi(w)?)?;
    u.apply_point(&bm.eval(x))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WellDefinednessReport {
    pub max_discrepancy: f64,
    pub comparisons: usize,
    pub tangency_points: usize,
}

/// Tangency points of touching caps (pairs with `|overlap| ≤ tol`).
pub fn tangency_points(s: &SchottkySet<f64>, tol: f64) -> Vec<(usize, usize, SpherePoint<f64>)> {
    let mut out = Vec::new();
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            let (a, b) = (&s.caps()[i], &s.caps()[j]);
            if a.overlap(b).abs() > tol {
                continue;
            }
            let angle = angle_between(a.normal(), b.normal());
            let theta = a.angular_radius();
            // Point at angle θ_a from u_a along the great circle towards u_b.
            let (sin_angle, sa, ca) = (angle.sin(), (angle - theta).sin(), theta.sin());
            let coords: Vec<f64> = a
                .normal()
                .iter()
                .zip(b.normal())
                .map(|(x, y)| (sa * x + ca * y) / sin_angle)
                .collect();
            if let Ok(p) = SpherePoint::new(coords) {
                out.push((i, j, p));
            }
        }
    }
    out
}

/// Compares the two expressions of `f_∞` at points of `S` fixed by a
/// generator: for `x ∈ ∂B_i`, `U(x) = (U R_i)(x)` so the words `w` and
/// `w·i` must give the same value. Tangency points are checked against both
/// touching generators.
pub fn well_definedness_check(bm: &BoundaryMap, words: &[ReducedWord], per_cap: usize) -> Result<WellDefinednessReport> {
    let mut fixed: Vec<(usize, SpherePoint<f64>)> = Vec::new();
    for (i, c) in bm.source.caps().iter().enumerate() {
        fixed.extend(c.boundary_samples(per_cap).into_iter().map(|x| (i, x)));
    }
    let tangencies = tangency_points(&bm.source, 1e-9);
    for (i, j, p) in &tangencies {
        fixed.push((*i, p.clone()));
        fixed.push((*j, p.clone()));
    }
    let mut jobs = Vec::new();
    for w in words {
        for (i, x) in &fixed {
            jobs.push((w.clone(), w.mul(&ReducedWord::new(vec![*i])?), x));
        }
    }
    let discrepancies = jobs
        .par_iter()
        .map(|(a, b, x)| Ok(f_infinity(bm, a, x)?.chordal(&f_infinity(bm, b, x)?)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(WellDefinednessReport {
        max_discrepancy: discrepancies.into_iter().fold(0.0, f64::max),
        comparisons: jobs.len(),
        tangency_points: tangencies.len(),
    })
}

/// A finite set of orbit balls, each labelled by its word, viewed as the
/// complementary caps of a Schottky set.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelledSet {
    pub set: SchottkySet<f64>,
    pub words: Vec<ReducedWord>,
}

impl LabelledSet {
    pub fn from_generators(s: &SchottkySet<f64>) -> Self {
        Self {
            set: s.clone(),
            words: (0..s.len()).map(|i| ReducedWord::new(vec![i]).expect("single letter")).collect(),
        }
    }

    /// Index of the largest cap, ties broken by the lexicographically least
    /// word.
    pub fn largest(&self) -> Option<usize> {
        (0..self.set.len()).max_by(|&a, &b| {
            let (da, db) = (self.set.caps()[a].chordal_diameter(), self.set.caps()[b].chordal_diameter());
            da.total_cmp(&db).then_with(|| self.words[b].cmp(&self.words[a]))
        })
    }

    pub fn max_diameter(&self) -> f64 {
        self.set.caps().iter().map(|c| c.chordal_diameter()).fold(0.0, f64::max)
    }
}

/// `T ∪ R(T)` for the reflection `R` in the peripheral sphere `∂B_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubledSet {
    pub base: LabelledSet,
    pub mirror_index: usize,
    pub result: LabelledSet,
}

/// Doubles along the `i`-th cap: the result has caps `B_j` and `R_i(B_j)`
/// for `j ≠ i`, in that order.
pub fn double(s: &SchottkySet<f64>, i: usize) -> Result<DoubledSet> {
    double_labelled(&LabelledSet::from_generators(s), i)
}

pub fn double_labelled(base: &LabelledSet, i: usize) -> Result<DoubledSet> {
    let mirror = base.set.cap(i)?;
    let r = MobiusMap::reflection(mirror);
    let mirror_word = base.words[i].palindrome();
    let mut caps: Vec<Cap<f64>> = Vec::with_capacity(2 * base.set.len() - 2);
    let mut words = Vec::with_capacity(caps.capacity());
    for (j, c) in base.set.caps().iter().enumerate() {
        if j != i {
            caps.push(c.clone());
            words.push(base.words[j].clone());
        }
    }
    for (j, c) in base.set.caps().iter().enumerate() {
        if j != i {
            caps.push(r.apply_cap(c)?);
            words.push(mirror_word.mul(&base.words[j]));
        }
    }
    Ok(DoubledSet {
        base: base.clone(),
        mirror_index: i,
        result: LabelledSet {
            set: SchottkySet::new(base.set.dim(), caps),
            words,
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoublingSequence {
    pub sets: Vec<LabelledSet>,
    /// `r_k`: largest peripheral diameter of `S_k`.
    pub radii: Vec<f64>,
}

/// `S_0 = s`, `S_{k+1}` the double of `S_k` along its largest peripheral
/// sphere. Fails once a set would exceed `max_caps` caps.
pub fn doubling_sequence(s: &SchottkySet<f64>, steps: usize, max_caps: usize) -> Result<DoublingSequence> {
    let mut current = LabelledSet::from_generators(s);
    let mut sets = Vec::with_capacity(steps + 1);
    let mut radii = Vec::with_capacity(steps + 1);
    for _ in 0..steps {
        if 2 * current.set.len() - 2 > max_caps {
            return Err(Error::BudgetExceeded(format!(
                "doubling would exceed {max_caps} caps"
            )));
        }
        let i = current.largest().ok_or_else(|| Error::InvalidInput("no caps".into()))?;
        let next = double_labelled(&current, i)?.result;
        radii.push(current.max_diameter());
        sets.push(std::mem::replace(&mut current, next));
    }
    radii.push(current.max_diameter());
    sets.push(current);
    Ok(DoublingSequence { sets, radii })
}

/// Largest discrepancy between each cap of `labelled` and the orbit ball
/// its word names in `s`, in `(u, t)` coordinates.
pub fn label_defect(s: &SchottkySet<f64>, labelled: &LabelledSet) -> Result<f64> {
    labelled
        .set
        .caps()
        .iter()
        .zip(&labelled.words)
        .map(|(c, w)| {
            let b = word_ball(s, w)?;
            let du: f64 = c
                .normal()
                .iter()
                .zip(b.normal())
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
                .sqrt();
            Ok(du.max((c.offset() - b.offset()).abs()))
        })
        .try_fold(0.0f64, |m, d: Result<f64>| Ok(m.max(d?)))
}
