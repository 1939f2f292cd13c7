use crate::error::{Error, Result};
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

pub type Rational = Ratio<i128>;

/// Deepest supported truncation; `K_d` has `2^d` blocks.
pub const MAX_CANTOR_DEPTH: usize = 20;

/// Open interval `(lo, hi)` with rational endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Interval {
    #[serde(serialize_with = "ser_ratio")]
    pub lo: Rational,
    #[serde(serialize_with = "ser_ratio")]
    pub hi: Rational,
}

fn ser_ratio<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

impl Interval {
    pub fn length(&self) -> Rational {
        self.hi - self.lo
    }
}

/// Depth-`d` truncation `K_d` of the fat Cantor set: step `k` removes the
/// centered open interval of length `4^{-k}` from each of the `2^{k-1}`
/// remaining blocks of `[0,1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FatCantorSet {
    depth: usize,
    /// Sorted by left endpoint.
    removed: Vec<Interval>,
    /// Removed intervals grouped by the step that removed them, 1-based.
    steps: Vec<usize>,
    /// Sorted closed blocks of `K_d`.
    blocks: Vec<Interval>,
    #[serde(serialize_with = "ser_ratio")]
    measure: Rational,
    /// `removed_before[i]` = total length of `removed[..i]`.
    #[serde(skip)]
    removed_before: Vec<Rational>,
}

pub fn fat_cantor(depth: usize) -> Result<FatCantorSet> {
    if depth == 0 || depth > MAX_CANTOR_DEPTH {
        return Err(Error::InvalidInput(format!(
            "Cantor depth must be in 1..={MAX_CANTOR_DEPTH}, got {depth}"
        )));
    }
    let mut blocks = vec![Interval {
        lo: Rational::zero(),
        hi: Rational::one(),
    }];
    let mut removed: Vec<(Interval, usize)> = Vec::new();
    let four = Rational::from_integer(4);
    let mut gap = Rational::one();
    for k in 1..=depth {
        gap /= four;
        let half = gap / Rational::from_integer(2);
        let mut next = Vec::with_capacity(blocks.len() * 2);
        for b in &blocks {
            let mid = (b.lo + b.hi) / Rational::from_integer(2);
            let hole = Interval {
                lo: mid - half,
                hi: mid + half,
            };
            next.push(Interval { lo: b.lo, hi: hole.lo });
            next.push(Interval { lo: hole.hi, hi: b.hi });
            removed.push((hole, k));
        }
        blocks = next;
    }
    removed.sort_by(|a, b| a.0.lo.cmp(&b.0.lo));
    let mut removed_before = Vec::with_capacity(removed.len() + 1);
    let mut acc = Rational::zero();
    for (iv, _) in &removed {
        removed_before.push(acc);
        acc += iv.length();
    }
    removed_before.push(acc);
    Ok(FatCantorSet {
        depth,
        measure: Rational::one() - acc,
        steps: removed.iter().map(|r| r.1).collect(),
        removed: removed.into_iter().map(|r| r.0).collect(),
        blocks,
        removed_before,
    })
}

impl FatCantorSet {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn removed(&self) -> &[Interval] {
        &self.removed
    }

    /// Step (1-based) that removed `removed()[i]`.
    pub fn removal_step(&self, i: usize) -> usize {
        self.steps[i]
    }

    pub fn blocks(&self) -> &[Interval] {
        &self.blocks
    }

    /// Exact `|K_d|`.
    pub fn measure(&self) -> Rational {
        self.measure
    }

    /// `|K_d| - |K|`, the gap to the limit measure `1/2`.
    pub fn truncation_error(&self) -> Rational {
        self.measure - Rational::new(1, 2)
    }

    /// Exact `|K_d ∩ [0, x]|`.
    pub fn measure_below(&self, x: Rational) -> Rational {
        if x <= Rational::zero() {
            return Rational::zero();
        }
        if x >= Rational::one() {
            return self.measure;
        }
        let i = self.removed.partition_point(|iv| iv.lo < x);
        let mut gone = self.removed_before[i];
        if i > 0 {
            let last = &self.removed[i - 1];
            if x < last.hi {
                gone -= last.hi - x;
            }
        }
        x - gone
    }

    /// `h(x) = x + |K_d ∩ [0, x]|` (so `h(x) = x` for `x ≤ 0`).
    pub fn h_exact(&self, x: Rational) -> Rational {
        x + self.measure_below(x)
    }

    /// Floating-point `h` with the same piecewise-linear structure.
    pub fn h(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return x;
        }
        let m = self.measure.to_f64().unwrap_or(f64::NAN);
        if x >= 1.0 {
            return x + m;
        }
        let i = self.removed.partition_point(|iv| ratio_f64(iv.lo) < x);
        let mut gone = ratio_f64(self.removed_before[i]);
        if i > 0 {
            let hi = ratio_f64(self.removed[i - 1].hi);
            if x < hi {
                gone -= hi - x;
            }
        }
        x + (x - gone)
    }

    /// Whether `x ∈ K_d`.
    pub fn contains(&self, x: f64) -> bool {
        if !(0.0..=1.0).contains(&x) {
            return false;
        }
        let i = self.removed.partition_point(|iv| ratio_f64(iv.lo) < x);
        i == 0 || x >= ratio_f64(self.removed[i - 1].hi)
    }
}

pub(crate) fn ratio_f64(r: Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
