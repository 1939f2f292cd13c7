//! Schottky sets: complements of pairwise disjoint open caps, optionally
//! relative to a region.

use crate::error::{Error, Result};
use crate::mobius::{angle_between, dot, norm, orthonormal_complement, Cap, MobiusMap, SpherePoint};
use crate::scalar::Real;
use crate::util;
use rand::Rng;
use serde::Serialize;

/// Tolerance for classifying a point onto a peripheral sphere.
pub const BOUNDARY_TOL: f64 = 1e-10;
/// Angular slack allowed when checking disjointness (tangency is valid).
pub const DISJOINT_TOL: f64 = 1e-12;
/// Tolerance in `(u, t)` coordinates for identifying peripheral spheres.
pub const SPHERE_EQ_TOL: f64 = 1e-9;

/// Ambient region of a relative Schottky set.
#[derive(Debug, Clone, PartialEq)]
pub enum Region<T: Real> {
    WholeSphere,
    /// `S^n` minus the union of the closures of the given caps.
    CapComplement(Vec<Cap<T>>),
}

impl<T: Real> Region<T> {
    pub fn contains(&self, p: &SpherePoint<T>) -> bool {
        match self {
            Region::WholeSphere => true,
            Region::CapComplement(removed) => removed.iter().all(|c| c.signed(p) < T::zero()),
        }
    }
}

/// Where a point sits relative to a Schottky set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "index")]
pub enum Membership {
    InSet,
    InCap(usize),
    OnPeripheralSphere(usize),
    OutsideRegion,
}

impl Membership {
    /// True for points of the (closed) set.
    pub fn in_set(self) -> bool {
        matches!(self, Membership::InSet | Membership::OnPeripheralSphere(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Overlap { first: usize, second: usize, overlap_angle: f64 },
    TooFewCaps { count: usize },
    DimensionMismatch { index: usize, dim: usize },
    OutsideRegion { index: usize },
    RegionDisconnected { components: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub cap_count: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Ambient ball for [`SchottkySet::connect_in_ball`].
#[derive(Debug, Clone, PartialEq)]
pub enum Ambient<T: Real> {
    WholeSphere,
    Ball(Cap<T>),
}

impl<T: Real> Ambient<T> {
    fn admits(&self, p: &SpherePoint<T>) -> bool {
        match self {
            Ambient::WholeSphere => true,
            Ambient::Ball(b) => b.signed(p) >= -T::tol(BOUNDARY_TOL),
        }
    }
}

/// `S = S^n \ ∪ B_i` (or `D \ ∪ B_i` in the relative case).
///
/// Infinite families are stored truncated: `diameter_floor` records the
/// chordal diameter below which caps were dropped, so every operation acts on
/// the finitely many caps at or above the floor.
#[derive(Debug, Clone, PartialEq)]
pub struct SchottkySet<T: Real> {
    dim: usize,
    caps: Vec<Cap<T>>,
    region: Region<T>,
    diameter_floor: Option<T>,
}

impl<T: Real> SchottkySet<T> {
    /// Unvalidated constructor; call [`SchottkySet::validate`] to check it.
    pub fn new(dim: usize, caps: Vec<Cap<T>>) -> Self {
        Self {
            dim,
            caps,
            region: Region::WholeSphere,
            diameter_floor: None,
        }
    }

    pub fn relative(dim: usize, caps: Vec<Cap<T>>, region: Region<T>) -> Self {
        Self {
            dim,
            caps,
            region,
            diameter_floor: None,
        }
    }

    /// Keeps the caps of a (possibly infinite) family whose chordal diameter
    /// is at least `floor`. The iterator must eventually stop yielding caps
    /// above the floor; it is consumed until exhausted.
    pub fn from_family<I: IntoIterator<Item = Cap<T>>>(dim: usize, family: I, floor: T) -> Self {
        Self {
            dim,
            caps: family
                .into_iter()
                .filter(|c| c.chordal_diameter() >= floor)
                .collect(),
            region: Region::WholeSphere,
            diameter_floor: Some(floor),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn caps(&self) -> &[Cap<T>] {
        &self.caps
    }

    pub fn cap(&self, i: usize) -> Result<&Cap<T>> {
        self.caps.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            len: self.caps.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.caps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.caps.is_empty()
    }

    pub fn region(&self) -> &Region<T> {
        &self.region
    }

    pub fn diameter_floor(&self) -> Option<T> {
        self.diameter_floor
    }

    pub fn is_relative(&self) -> bool {
        !matches!(self.region, Region::WholeSphere)
    }

    /// Image under a Möbius map, cap by cap.
    pub fn map(&self, m: &MobiusMap<T>) -> Result<Self> {
        let caps = self
            .caps
            .iter()
            .map(|c| m.apply_cap(c))
            .collect::<Result<Vec<_>>>()?;
        let region = match &self.region {
            Region::WholeSphere => Region::WholeSphere,
            Region::CapComplement(r) => Region::CapComplement(
                r.iter().map(|c| m.apply_cap(c)).collect::<Result<Vec<_>>>()?,
            ),
        };
        Ok(Self {
            dim: self.dim,
            caps,
            region,
            diameter_floor: self.diameter_floor,
        })
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for (i, c) in self.caps.iter().enumerate() {
            if c.dim() != self.dim {
                violations.push(Violation::DimensionMismatch { index: i, dim: c.dim() });
            }
        }
        if self.caps.len() < 3 {
            violations.push(Violation::TooFewCaps {
                count: self.caps.len(),
            });
        }
        let tol = T::tol(DISJOINT_TOL);
        let radii: Vec<T> = self.caps.iter().map(|c| c.angular_radius()).collect();
        for i in 0..self.caps.len() {
            for j in i + 1..self.caps.len() {
                let sum = radii[i] + radii[j];
                // Cheap rejection before the accurate angle.
                if sum < T::PI()
                    && dot(self.caps[i].normal(), self.caps[j].normal())
                        < sum.cos() - T::lit(1e-6)
                {
                    continue;
                }
                let overlap = sum - angle_between(self.caps[i].normal(), self.caps[j].normal());
                if overlap > tol {
                    violations.push(Violation::Overlap {
                        first: i,
                        second: j,
                        overlap_angle: overlap.to_f64_lossy(),
                    });
                }
            }
        }
        if let Region::CapComplement(removed) = &self.region {
            for (i, c) in self.caps.iter().enumerate() {
                // Closures must miss every removed closed cap.
                if removed.iter().any(|k| c.overlap(k) >= -tol) {
                    violations.push(Violation::OutsideRegion { index: i });
                }
            }
            let components = region_components(self.dim, removed);
            if components != 1 {
                violations.push(Violation::RegionDisconnected { components });
            }
        }
        ValidationReport {
            cap_count: self.caps.len(),
            violations,
        }
    }

    /// Exact spherical measure of a whole-sphere Schottky set.
    pub fn measure(&self) -> Result<T> {
        if self.is_relative() {
            return Err(Error::NotWholeSphere);
        }
        let removed: T = self
            .caps
            .iter()
            .map(|c| cap_area(self.dim, c.angular_radius()))
            .sum();
        Ok(sphere_area::<T>(self.dim) - removed)
    }

    /// Measure of a relative set: Monte Carlo for the region, exact for the
    /// caps. Returns `(estimate, standard error)`.
    pub fn relative_measure<R: Rng + ?Sized>(&self, samples: usize, rng: &mut R) -> (f64, f64) {
        let total = sphere_area::<f64>(self.dim);
        let hits = (0..samples)
            .filter(|_| self.region.contains(&SpherePoint::random(rng, self.dim)))
            .count() as f64;
        let p = hits / samples as f64;
        let caps: f64 = self
            .caps
            .iter()
            .map(|c| cap_area::<f64>(self.dim, c.angular_radius().to_f64_lossy()))
            .sum();
        (
            total * p - caps,
            total * (p * (1.0 - p) / samples as f64).sqrt(),
        )
    }

    pub fn contains(&self, p: &SpherePoint<T>) -> Membership {
        if !self.region.contains(p) {
            return Membership::OutsideRegion;
        }
        let tol = T::tol(BOUNDARY_TOL);
        let mut boundary = None;
        for (i, c) in self.caps.iter().enumerate() {
            let s = c.signed(p);
            if s > tol {
                return Membership::InCap(i);
            }
            if s.abs() <= tol && boundary.is_none() {
                boundary = Some(i);
            }
        }
        match boundary {
            Some(i) => Membership::OnPeripheralSphere(i),
            None => Membership::InSet,
        }
    }

    /// Whether the round sphere `∂candidate` is a peripheral sphere.
    ///
    /// Fails with [`Error::NotContained`] when sampled points of the candidate
    /// leave the set.
    pub fn is_peripheral(&self, candidate: &Cap<T>) -> Result<bool> {
        for p in candidate.boundary_samples(256) {
            if !self.contains(&p).in_set() {
                return Err(Error::NotContained);
            }
        }
        let tol = T::tol(SPHERE_EQ_TOL);
        Ok(self.caps.iter().any(|c| c.same_sphere(candidate, tol)))
    }

    /// Path from `x` to `y` inside `ambient ∩ S`, built by replacing the
    /// pieces of a circle arc that cross a cap by arcs on that cap's
    /// peripheral sphere. Caps of chordal diameter below `eps` are ignored.
    /// Each piece is discretized with `per_piece` segments.
    pub fn connect_in_ball(
        &self,
        x: &SpherePoint<T>,
        y: &SpherePoint<T>,
        ambient: &Ambient<T>,
        eps: T,
        per_piece: usize,
    ) -> Result<Vec<SpherePoint<T>>> {
        for (name, p) in [("x", x), ("y", y)] {
            if !self.contains(p).in_set() {
                return Err(Error::NotInSet(format!("{name} = {:?}", p.coords())));
            }
            if !ambient.admits(p) {
                return Err(Error::NoArcInAmbient);
            }
        }
        let per_piece = per_piece.max(1);
        let pole = match ambient {
            Ambient::Ball(b) => b.center().antipode(),
            Ambient::WholeSphere => {
                let s: Vec<T> = x.coords().iter().zip(y.coords()).map(|(&a, &b)| a + b).collect();
                if norm(&s) > T::lit(1e-6) {
                    SpherePoint::new(s)?.antipode()
                } else {
                    SpherePoint::new(orthonormal_complement(x.coords()).swap_remove(0))?
                }
            }
        };
        let chart = PoleChart::new(&pole);
        let zx = chart.project(x).ok_or(Error::NoArcInAmbient)?;
        let zy = chart.project(y).ok_or(Error::NoArcInAmbient)?;
        let d: Vec<T> = zy.iter().zip(&zx).map(|(&b, &a)| b - a).collect();
        let point_at = |s: T| -> SpherePoint<T> {
            let z: Vec<T> = zx.iter().zip(&d).map(|(&a, &b)| a + s * b).collect();
            chart.lift(&z)
        };

        // Parameter intervals where the arc runs through a closed cap.
        let mut crossings: Vec<(T, T, usize)> = Vec::new();
        for (i, cap) in self.caps.iter().enumerate() {
            if cap.chordal_diameter() < eps {
                continue;
            }
            let a: Vec<T> = chart.basis.iter().map(|e| dot(e, cap.normal())).collect();
            let pu = dot(pole.coords(), cap.normal());
            let alpha = pu - cap.offset();
            let beta = pu + cap.offset();
            let two = T::lit(2.0);
            let qa = alpha * dot(&d, &d);
            let qb = two * alpha * dot(&zx, &d) + two * dot(&d, &a);
            let qc = alpha * dot(&zx, &zx) + two * dot(&zx, &a) - beta;
            if qa > T::zero() {
                // Upward parabola, non-positive at both ends: no crossing.
                continue;
            }
            let Some((s1, s2)) = quadratic_nonneg_interval(qa, qb, qc) else {
                continue;
            };
            let (s1, s2) = (s1.max(T::zero()), s2.min(T::one()));
            if s2 - s1 <= T::tol(1e-12) {
                continue;
            }
            crossings.push((s1, s2, i));
        }
        crossings.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

        let mut path = vec![x.clone()];
        let mut cursor = T::zero();
        let steps = T::lit(per_piece as f64);
        for &(s1, s2, i) in &crossings {
            for k in 1..=per_piece {
                let s = cursor + (s1 - cursor) * T::lit(k as f64) / steps;
                path.push(point_at(s));
            }
            let e1 = point_at(s1);
            let e2 = point_at(s2);
            let detour = arc_on_sphere(&self.caps[i], &e1, &e2, ambient, per_piece)?;
            path.extend(detour.into_iter().skip(1));
            cursor = s2;
        }
        for k in 1..=per_piece {
            let s = cursor + (T::one() - cursor) * T::lit(k as f64) / steps;
            path.push(point_at(s));
        }
        *path.last_mut().unwrap() = y.clone();
        Ok(path)
    }
}

/// Stereographic chart from an arbitrary pole.
struct PoleChart<T: Real> {
    pole: Vec<T>,
    basis: Vec<Vec<T>>,
}

impl<T: Real> PoleChart<T> {
    fn new(pole: &SpherePoint<T>) -> Self {
        Self {
            pole: pole.coords().to_vec(),
            basis: orthonormal_complement(pole.coords()),
        }
    }

    fn project(&self, p: &SpherePoint<T>) -> Option<Vec<T>> {
        let den = T::one() - dot(p.coords(), &self.pole);
        if den <= T::tol(1e-14) {
            return None;
        }
        Some(self.basis.iter().map(|e| dot(e, p.coords()) / den).collect())
    }

    fn lift(&self, z: &[T]) -> SpherePoint<T> {
        let r2 = dot(z, z);
        let den = T::one() + r2;
        let two = T::lit(2.0);
        let mut v: Vec<T> = self.pole.iter().map(|&p| (r2 - T::one()) * p / den).collect();
        for (zk, e) in z.iter().zip(&self.basis) {
            for (vj, &ej) in v.iter_mut().zip(e) {
                *vj = *vj + two * *zk * ej / den;
            }
        }
        SpherePoint::new(v).expect("chart lift is a unit vector")
    }
}

/// `{s : a s² + b s + c ≥ 0}` for `a ≤ 0`, as a closed interval.
fn quadratic_nonneg_interval<T: Real>(a: T, b: T, c: T) -> Option<(T, T)> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == T::zero() {
        return None;
    }
    if a.abs() <= T::tol(1e-15) * scale {
        // Linear: b s + c ≥ 0.
        if b.abs() <= T::tol(1e-15) * scale {
            return None;
        }
        let r = -c / b;
        return Some(if b > T::zero() {
            (r, T::infinity())
        } else {
            (T::neg_infinity(), r)
        });
    }
    let disc = b * b - T::lit(4.0) * a * c;
    if disc <= T::zero() {
        return None;
    }
    let sq = disc.sqrt();
    // Stable root pair.
    let q = -(b + b.signum() * sq) / T::lit(2.0);
    let r1 = q / a;
    let r2 = c / q;
    Some((r1.min(r2), r1.max(r2)))
}

/// Circle arc on `∂cap` from `e1` to `e2` staying inside the ambient ball.
fn arc_on_sphere<T: Real>(
    cap: &Cap<T>,
    e1: &SpherePoint<T>,
    e2: &SpherePoint<T>,
    ambient: &Ambient<T>,
    per_piece: usize,
) -> Result<Vec<SpherePoint<T>>> {
    let u = cap.normal();
    let perp = |v: &[T]| -> Vec<T> {
        let c = dot(v, u);
        v.iter().zip(u).map(|(&a, &b)| a - c * b).collect()
    };
    let pick_far_from = |v: &[T]| -> Result<SpherePoint<T>> {
        let w = perp(v);
        let nw = norm(&w);
        let dir: Vec<T> = if nw > T::lit(1e-9) {
            w.into_iter().map(|x| -x / nw).collect()
        } else {
            let mut basis = orthonormal_complement(u);
            let e = perp(e1.coords());
            // Prefer a direction orthogonal to the endpoint.
            basis.sort_by(|a, b| {
                dot(a, &e).abs().partial_cmp(&dot(b, &e).abs()).unwrap()
            });
            basis.swap_remove(0)
        };
        Ok(cap.boundary_point(&dir))
    };
    let mid: Vec<T> = e1.coords().iter().zip(e2.coords()).map(|(&a, &b)| a + b).collect();
    let pole = match ambient {
        Ambient::Ball(b) => {
            let far = pick_far_from(b.normal())?;
            if b.signed(&far) < T::zero() {
                far
            } else {
                pick_far_from(&mid)?
            }
        }
        Ambient::WholeSphere => pick_far_from(&mid)?,
    };
    let chart = PoleChart::new(&pole);
    let z1 = chart.project(e1).ok_or(Error::NoArcInAmbient)?;
    let z2 = chart.project(e2).ok_or(Error::NoArcInAmbient)?;
    let steps = T::lit(per_piece as f64);
    let mut out = Vec::with_capacity(per_piece + 1);
    for k in 0..=per_piece {
        let s = T::lit(k as f64) / steps;
        let z: Vec<T> = z1.iter().zip(&z2).map(|(&a, &b)| a + s * (b - a)).collect();
        out.push(chart.lift(&z));
    }
    Ok(out)
}

/// Surface area of the unit sphere S^n.
pub fn sphere_area<T: Real>(n: usize) -> T {
    // |S^0| = 2, |S^1| = 2π, |S^n| = 2π/(n-1) |S^{n-2}|.
    let mut a = if n % 2 == 0 { T::lit(2.0) } else { T::TAU() };
    let mut k = if n % 2 == 0 { 0 } else { 1 };
    while k < n {
        k += 2;
        a = a * T::TAU() / T::lit((k - 1) as f64);
    }
    a
}

/// `∫_0^θ sin^m φ dφ` by the reduction formula.
fn sin_power_integral<T: Real>(m: usize, theta: T) -> T {
    let (s, c) = theta.sin_cos();
    let mut lo = theta; // m = 0
    let mut hi = T::lit(2.0) * (theta / T::lit(2.0)).sin().powi(2); // m = 1
    if m == 0 {
        return lo;
    }
    if m == 1 {
        return hi;
    }
    let mut k = 2;
    loop {
        let kk = T::lit(k as f64);
        let next = -s.powi(k as i32 - 1) * c / kk + (kk - T::one()) / kk * lo;
        lo = hi;
        hi = next;
        if k == m {
            return hi;
        }
        k += 1;
    }
}

/// Area of a cap of angular radius `theta` on S^n.
pub fn cap_area<T: Real>(n: usize, theta: T) -> T {
    if theta > T::FRAC_PI_2() {
        return sphere_area::<T>(n) - cap_area(n, T::PI() - theta);
    }
    sphere_area::<T>(n - 1) * sin_power_integral(n - 1, theta)
}

fn region_components<T: Real>(dim: usize, removed: &[Cap<T>]) -> usize {
    const SAMPLES: usize = 20_000;
    let pts: Vec<Vec<f64>> = if dim == 2 {
        util::fibonacci_sphere(SAMPLES)
    } else {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x7e91_0000);
        (0..SAMPLES)
            .map(|_| crate::mobius::random_unit::<f64, _>(&mut rng, dim + 1))
            .collect()
    };
    let removed: Vec<Cap<f64>> = removed.iter().map(|c| c.cast()).collect();
    let kept: Vec<Vec<f64>> = pts
        .into_iter()
        .filter(|p| {
            let sp = SpherePoint::new(p.clone()).unwrap();
            removed.iter().all(|c| c.signed(&sp) < 0.0)
        })
        .collect();
    let spacing = (sphere_area::<f64>(dim) / SAMPLES as f64).powf(1.0 / dim as f64);
    util::component_count(&util::radius_components(&kept, 2.5 * spacing))
}
