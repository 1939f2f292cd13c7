//! Points, round caps and Möbius transformations of S^n in the Lorentz model.
//!
//! A point `p` of S^n ⊂ R^{n+1} lifts to the null vector `(p, 1)` of R^{n+1,1}
//! with the form `J = diag(1, …, 1, -1)`. An open cap `{x : ⟨x,u⟩ > t}` is the
//! spacelike vector `(u, t)`; a point lies in the cap iff its lift has positive
//! Lorentz product with that vector. Möbius transformations are the matrices
//! `M` with `MᵀJM = J` preserving the future light cone, so composition is
//! matrix multiplication in every dimension.
//!
//! The chart is stereographic projection from the pole `e_{n+1}`, which plays
//! the role of `∞`. Internally everything stays on the sphere.

use crate::error::{Error, Result};
use crate::scalar::Real;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Compositions after which a map is pulled back onto the Lorentz group.
pub const REPROJECT_EVERY: u32 = 32;

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub(crate) fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub(crate) fn dist<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<T>()
        .sqrt()
}

/// Lorentz product `Q(a, b) = Σ a_i b_i - a_last b_last`.
pub fn lorentz_dot<T: Real>(a: &[T], b: &[T]) -> T {
    let k = a.len() - 1;
    dot(&a[..k], &b[..k]) - a[k] * b[k]
}

/// Angle between two unit vectors, accurate near 0 and π.
pub fn angle_between<T: Real>(u: &[T], v: &[T]) -> T {
    let two = T::lit(2.0);
    let mut d = T::zero();
    let mut s = T::zero();
    for (&a, &b) in u.iter().zip(v) {
        d = d + (a - b) * (a - b);
        s = s + (a + b) * (a + b);
    }
    two * d.sqrt().atan2(s.sqrt())
}

/// An orthonormal basis of the orthogonal complement of the unit vector `u`.
pub(crate) fn orthonormal_complement<T: Real>(u: &[T]) -> Vec<Vec<T>> {
    let d = u.len();
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(d - 1);
    // Start from the standard basis, skipping the axis most aligned with u.
    let skip = (0..d)
        .max_by(|&i, &j| u[i].abs().partial_cmp(&u[j].abs()).unwrap())
        .unwrap();
    for axis in (0..d).filter(|&i| i != skip) {
        let mut v = vec![T::zero(); d];
        v[axis] = T::one();
        for _ in 0..2 {
            let c = dot(&v, u);
            for (vi, &ui) in v.iter_mut().zip(u) {
                *vi = *vi - c * ui;
            }
            for b in &basis {
                let c = dot(&v, b);
                for (vi, &bi) in v.iter_mut().zip(b) {
                    *vi = *vi - c * bi;
                }
            }
        }
        let nv = norm(&v);
        basis.push(v.into_iter().map(|x| x / nv).collect());
    }
    basis
}

/// Deterministic, roughly uniform unit directions in R^dim.
pub(crate) fn unit_directions<T: Real>(dim: usize, count: usize) -> Vec<Vec<T>> {
    match dim {
        1 => (0..count)
            .map(|i| vec![if i % 2 == 0 { T::one() } else { -T::one() }])
            .collect(),
        2 => (0..count)
            .map(|i| {
                let a = T::TAU() * T::lit(i as f64) / T::lit(count as f64);
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            // Fibonacci lattice.
            let golden = T::PI() * (T::lit(3.0) - T::lit(5.0).sqrt());
            (0..count)
                .map(|i| {
                    let z = T::one()
                        - T::lit(2.0) * (T::lit(i as f64) + T::lit(0.5)) / T::lit(count as f64);
                    let r = (T::one() - z * z).max(T::zero()).sqrt();
                    let a = golden * T::lit(i as f64);
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
        _ => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed_0000 + dim as u64);
            (0..count).map(|_| random_unit(&mut rng, dim)).collect()
        }
    }
}

/// Uniform random unit vector in R^dim.
pub fn random_unit<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<T> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut *rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-9 {
            return v.into_iter().map(|x| T::lit(x / n)).collect();
        }
    }
}

/// Chordal distance in the stereographic chart,
/// `2|x-y| / sqrt((1+|x|²)(1+|y|²))`.
pub fn chart_chordal<T: Real>(x: &[T], y: &[T]) -> T {
    let two = T::lit(2.0);
    two * dist(x, y) / ((T::one() + dot(x, x)) * (T::one() + dot(y, y))).sqrt()
}

/// A point of S^n stored as a unit vector of R^{n+1}.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint<T: Real> {
    coords: Vec<T>,
}

impl<T: Real> SpherePoint<T> {
    /// Normalizes `coords` onto the sphere.
    pub fn new(coords: Vec<T>) -> Result<Self> {
        let n = norm(&coords);
        if coords.len() < 2 || !(n > T::tol(1e-300)) || !n.is_finite() {
            return Err(Error::InvalidInput(format!(
                "cannot normalize vector {coords:?} onto a sphere"
            )));
        }
        Ok(Self {
            coords: coords.into_iter().map(|x| x / n).collect(),
        })
    }

    /// The chart pole `e_{n+1}` (the point `∞`).
    pub fn pole(n: usize) -> Self {
        let mut coords = vec![T::zero(); n + 1];
        coords[n] = T::one();
        Self { coords }
    }

    /// Inverse stereographic projection of a chart point of R^n.
    pub fn from_chart(x: &[T]) -> Self {
        let r2 = dot(x, x);
        let den = T::one() + r2;
        if !den.is_finite() {
            return Self::pole(x.len());
        }
        let two = T::lit(2.0);
        let mut coords: Vec<T> = x.iter().map(|&xi| two * xi / den).collect();
        coords.push((r2 - T::one()) / den);
        Self { coords }
    }

    /// Stereographic chart coordinates, `None` at the pole.
    pub fn to_chart(&self) -> Option<Vec<T>> {
        let n = self.dim();
        let den = T::one() - self.coords[n];
        if den <= T::tol(1e-300) {
            return None;
        }
        Some(self.coords[..n].iter().map(|&c| c / den).collect())
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }

    /// Dimension `n` of the sphere.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn chordal(&self, other: &Self) -> T {
        dist(&self.coords, &other.coords)
    }

    /// Null vector `(p, 1)`.
    pub fn lift(&self) -> Vec<T> {
        let mut v = self.coords.clone();
        v.push(T::one());
        v
    }

    pub fn antipode(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|&c| -c).collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        Self {
            coords: random_unit(rng, n + 1),
        }
    }

    pub fn cast<U: Real>(&self) -> SpherePoint<U> {
        SpherePoint {
            coords: self.coords.iter().map(|c| U::lit(c.to_f64_lossy())).collect(),
        }
    }
}

/// Chart image of a cap.
#[derive(Debug, Clone, PartialEq)]
pub enum ChartBall<T: Real> {
    /// Open disk `|x - center| < radius`.
    Disk { center: Vec<T>, radius: T },
    /// Open exterior `|x - center| > radius` (the cap contains `∞`).
    Exterior { center: Vec<T>, radius: T },
    /// Open half-space `⟨x, normal⟩ > offset` (boundary through `∞`).
    HalfSpace { normal: Vec<T>, offset: T },
}

/// The open cap `{x ∈ S^n : ⟨x,u⟩ > t}` with `|u| = 1` and `-1 < t < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cap<T: Real> {
    normal: Vec<T>,
    offset: T,
    /// `sin θ = sqrt(1 - t²)`, kept separately because `t` alone loses the
    /// radius of very small caps.
    sine: T,
}

impl<T: Real> Cap<T> {
    pub fn new(normal: Vec<T>, offset: T) -> Result<Self> {
        let n = norm(&normal);
        if normal.len() < 2 || !(n > T::zero()) || !n.is_finite() {
            return Err(Error::InvalidInput(format!("bad cap normal {normal:?}")));
        }
        if !(offset > -T::one() && offset < T::one()) {
            return Err(Error::InvalidInput(format!(
                "cap offset {offset} outside (-1, 1)"
            )));
        }
        Ok(Self {
            normal: normal.into_iter().map(|x| x / n).collect(),
            offset,
            sine: ((T::one() - offset) * (T::one() + offset)).sqrt(),
        })
    }

    /// Cap centered at `center` with angular (geodesic) radius `theta ∈ (0, π)`.
    pub fn from_center_angle(center: &SpherePoint<T>, theta: T) -> Result<Self> {
        Self::new(center.coords().to_vec(), theta.cos())
    }

    /// Cap equal to the open chordal ball `B(center, r)`, `0 < r < 2`.
    pub fn chordal_ball(center: &SpherePoint<T>, r: T) -> Result<Self> {
        Self::new(
            center.coords().to_vec(),
            T::one() - r * r / T::lit(2.0),
        )
    }

    /// Cap whose chart image is the open disk `|x - center| < radius`.
    pub fn from_chart_disk(center: &[T], radius: T) -> Result<Self> {
        if !(radius > T::zero()) {
            return Err(Error::InvalidInput(format!("chart radius {radius} <= 0")));
        }
        let half = T::lit(0.5);
        let c2 = dot(center, center);
        let r2 = radius * radius;
        let mut v: Vec<T> = center.iter().map(|&c| c / radius).collect();
        v.push((c2 - r2 - T::one()) * half / radius);
        v.push((c2 - r2 + T::one()) * half / radius);
        Self::from_lorentz(&v)
    }

    /// Cap of a spacelike Lorentz vector `(a, s)`: `{x : ⟨x,a⟩ > s}`.
    pub fn from_lorentz(v: &[T]) -> Result<Self> {
        let k = v.len() - 1;
        let a = &v[..k];
        let na = norm(a);
        if !(na > T::tol(1e-14)) || !na.is_finite() {
            return Err(Error::NumericalDegeneracy(format!(
                "Lorentz vector {v:?} has no spatial part"
            )));
        }
        let t = v[k] / na;
        if !(t.abs() < T::one()) {
            return Err(Error::NumericalDegeneracy(format!(
                "Lorentz vector {v:?} is not spacelike"
            )));
        }
        Ok(Self {
            normal: a.iter().map(|&x| x / na).collect(),
            offset: t,
            sine: ((T::one() - t) * (T::one() + t)).sqrt(),
        })
    }

    /// Cap of a Lorentz vector known to satisfy `Q(v,v) = 1`. The radius is
    /// read from `sin θ = 1/|a|`, which stays accurate for tiny caps.
    pub(crate) fn from_unit_lorentz(v: &[T]) -> Result<Self> {
        let k = v.len() - 1;
        let a = &v[..k];
        let na = norm(a);
        if !(na > T::zero()) || !na.is_finite() {
            return Err(Error::NumericalDegeneracy(format!(
                "Lorentz vector {v:?} has no spatial part"
            )));
        }
        let below_one = T::one() - T::epsilon();
        let t = (v[k] / na).max(-below_one).min(below_one);
        Ok(Self {
            normal: a.iter().map(|&x| x / na).collect(),
            offset: t,
            sine: (T::one() / na).min(T::one()),
        })
    }

    pub fn normal(&self) -> &[T] {
        &self.normal
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.len() - 1
    }

    pub fn center(&self) -> SpherePoint<T> {
        SpherePoint {
            coords: self.normal.clone(),
        }
    }

    /// Angular radius `arccos t`.
    pub fn angular_radius(&self) -> T {
        self.sine.atan2(self.offset)
    }

    /// Chordal distance from the center to the boundary sphere.
    pub fn chordal_radius(&self) -> T {
        if self.offset > T::zero() {
            self.sine * (T::lit(2.0) / (T::one() + self.offset)).sqrt()
        } else {
            (T::lit(2.0) * (T::one() - self.offset)).sqrt()
        }
    }

    /// Chordal diameter: `2 sin θ` for `θ ≤ π/2`, else 2.
    pub fn chordal_diameter(&self) -> T {
        if self.offset <= T::zero() {
            T::lit(2.0)
        } else {
            T::lit(2.0) * self.sine
        }
    }

    /// Unit spacelike vector `(u, t) / sqrt(1 - t²)`.
    pub fn lorentz(&self) -> Vec<T> {
        let s = self.sine;
        let mut v: Vec<T> = self.normal.iter().map(|&x| x / s).collect();
        v.push(self.offset / s);
        v
    }

    /// `⟨p,u⟩ - t`: positive inside, zero on the boundary sphere.
    pub fn signed(&self, p: &SpherePoint<T>) -> T {
        dot(&self.normal, p.coords()) - self.offset
    }

    pub fn contains(&self, p: &SpherePoint<T>) -> bool {
        self.signed(p) > T::zero()
    }

    /// The complementary open cap (same boundary sphere, other side).
    pub fn complement(&self) -> Self {
        Self {
            normal: self.normal.iter().map(|&x| -x).collect(),
            offset: -self.offset,
            sine: self.sine,
        }
    }

    /// Largest angular overlap with another cap (`θ₁ + θ₂ - angle`); positive
    /// when the open caps intersect.
    pub fn overlap(&self, other: &Self) -> T {
        self.angular_radius() + other.angular_radius()
            - angle_between(&self.normal, &other.normal)
    }

    /// Whether the closure of `self` lies inside the closure of `outer`.
    pub fn inside(&self, outer: &Self, tol: T) -> bool {
        angle_between(&self.normal, &outer.normal) + self.angular_radius()
            <= outer.angular_radius() + tol
    }

    /// Same boundary sphere and same side, compared in `(u, t)` coordinates.
    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        dist(&self.normal, &other.normal) <= tol && (self.offset - other.offset).abs() <= tol
    }

    /// Same boundary sphere, either side.
    pub fn same_sphere(&self, other: &Self, tol: T) -> bool {
        self.approx_eq(other, tol) || self.approx_eq(&other.complement(), tol)
    }

    /// Point of the boundary sphere in the direction `dir ⟂ u` (unit).
    pub fn boundary_point(&self, dir: &[T]) -> SpherePoint<T> {
        let s = self.sine;
        SpherePoint {
            coords: self
                .normal
                .iter()
                .zip(dir)
                .map(|(&u, &d)| self.offset * u + s * d)
                .collect(),
        }
    }

    /// `count` deterministic points on the boundary sphere.
    pub fn boundary_samples(&self, count: usize) -> Vec<SpherePoint<T>> {
        let basis = orthonormal_complement(&self.normal);
        unit_directions::<T>(basis.len(), count)
            .into_iter()
            .map(|w| {
                let mut d = vec![T::zero(); self.normal.len()];
                for (wi, b) in w.iter().zip(&basis) {
                    for (dj, &bj) in d.iter_mut().zip(b) {
                        *dj = *dj + *wi * bj;
                    }
                }
                self.boundary_point(&d)
            })
            .collect()
    }

    /// Chart image of the cap.
    pub fn to_chart(&self) -> ChartBall<T> {
        let n = self.dim();
        let v = self.lorentz();
        let b = v[n];
        let s = v[n + 1];
        let gap = s - b;
        if gap.abs() <= T::tol(1e-13) {
            // ⟨x,a⟩·2 - (b+s) > 0 in the chart.
            let a = &v[..n];
            let na = norm(a);
            return ChartBall::HalfSpace {
                normal: a.iter().map(|&x| x / na).collect(),
                offset: (b + s) / (T::lit(2.0) * na),
            };
        }
        let lambda = T::one() / gap;
        let center: Vec<T> = v[..n].iter().map(|&x| x * lambda).collect();
        let radius = lambda.abs();
        if gap > T::zero() {
            ChartBall::Disk { center, radius }
        } else {
            ChartBall::Exterior { center, radius }
        }
    }

    pub fn cast<U: Real>(&self) -> Cap<U> {
        Cap {
            normal: self.normal.iter().map(|c| U::lit(c.to_f64_lossy())).collect(),
            offset: U::lit(self.offset.to_f64_lossy()),
            sine: U::lit(self.sine.to_f64_lossy()),
        }
    }
}

/// Orientation character of a Möbius map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Preserving,
    Reversing,
}

impl Parity {
    pub fn sign(self) -> i32 {
        match self {
            Parity::Preserving => 1,
            Parity::Reversing => -1,
        }
    }

    pub fn times(self, other: Parity) -> Parity {
        if self == other {
            Parity::Preserving
        } else {
            Parity::Reversing
        }
    }
}

/// A Möbius transformation of S^n as an `(n+2)×(n+2)` Lorentz matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MobiusMap<T: Real> {
    size: usize,
    m: Vec<T>,
    parity: Parity,
    since_reproject: u32,
}

impl<T: Real> MobiusMap<T> {
    pub fn identity(n: usize) -> Self {
        let size = n + 2;
        let mut m = vec![T::zero(); size * size];
        for i in 0..size {
            m[i * size + i] = T::one();
        }
        Self {
            size,
            m,
            parity: Parity::Preserving,
            since_reproject: 0,
        }
    }

    /// Wraps a row-major matrix; the parity is read off the determinant sign.
    pub fn from_matrix(n: usize, m: Vec<T>) -> Result<Self> {
        let size = n + 2;
        if m.len() != size * size {
            return Err(Error::InvalidInput(format!(
                "expected {} matrix entries, got {}",
                size * size,
                m.len()
            )));
        }
        let det = determinant(size, &m);
        if !(det.abs() > T::tol(1e-12)) {
            return Err(Error::NumericalDegeneracy("singular matrix".into()));
        }
        let parity = if det > T::zero() {
            Parity::Preserving
        } else {
            Parity::Reversing
        };
        Ok(Self {
            size,
            m,
            parity,
            since_reproject: 0,
        })
    }

    /// Reflection in the boundary sphere of `cap`:
    /// `w ↦ w - 2 Q(w,v)/Q(v,v) v` with `v` the cap's Lorentz vector.
    pub fn reflection(cap: &Cap<T>) -> Self {
        let v = cap.lorentz();
        let size = v.len();
        let mut m = vec![T::zero(); size * size];
        let two = T::lit(2.0);
        for i in 0..size {
            for j in 0..size {
                let jv = if j == size - 1 { -v[j] } else { v[j] };
                m[i * size + j] = if i == j { T::one() } else { T::zero() } - two * v[i] * jv;
            }
        }
        Self {
            size,
            m,
            parity: Parity::Reversing,
            since_reproject: 0,
        }
    }

    /// Sphere dimension `n`.
    pub fn dim(&self) -> usize {
        self.size - 2
    }

    pub fn matrix(&self) -> &[T] {
        &self.m
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn entry(&self, i: usize, j: usize) -> T {
        self.m[i * self.size + j]
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        debug_assert_eq!(self.size, other.size);
        let mut out = Self {
            size: self.size,
            m: mat_mul(self.size, &self.m, &other.m),
            parity: self.parity.times(other.parity),
            since_reproject: self.since_reproject + other.since_reproject + 1,
        };
        if out.since_reproject >= REPROJECT_EVERY {
            out.reproject();
        }
        out
    }

    /// `M⁻¹ = J Mᵀ J`.
    pub fn inverse(&self) -> Self {
        let s = self.size;
        let mut m = vec![T::zero(); s * s];
        for i in 0..s {
            for j in 0..s {
                let sign = if (i == s - 1) != (j == s - 1) {
                    -T::one()
                } else {
                    T::one()
                };
                m[i * s + j] = sign * self.m[j * s + i];
            }
        }
        Self {
            size: s,
            m,
            parity: self.parity,
            since_reproject: self.since_reproject,
        }
    }

    /// One Newton step toward the Lorentz group: `M ← (3M - M J Mᵀ J M) / 2`.
    pub fn reproject(&mut self) {
        let s = self.size;
        let inv = self.inverse(); // J Mᵀ J
        let mjmtjm = mat_mul(s, &self.m, &mat_mul(s, &inv.m, &self.m));
        let half = T::lit(0.5);
        for (x, y) in self.m.iter_mut().zip(&mjmtjm) {
            *x = (T::lit(3.0) * *x - *y) * half;
        }
        self.since_reproject = 0;
    }

    /// Frobenius norm of `MᵀJM - J`.
    pub fn lorentz_defect(&self) -> T {
        let s = self.size;
        let mut acc = T::zero();
        for i in 0..s {
            for j in 0..s {
                let mut v = T::zero();
                for k in 0..s {
                    let jk = if k == s - 1 { -T::one() } else { T::one() };
                    v = v + self.m[k * s + i] * jk * self.m[k * s + j];
                }
                let target = if i != j {
                    T::zero()
                } else if i == s - 1 {
                    -T::one()
                } else {
                    T::one()
                };
                acc = acc + (v - target) * (v - target);
            }
        }
        acc.sqrt()
    }

    /// Frobenius distance between matrices; an upper bound for the operator norm.
    pub fn distance(&self, other: &Self) -> T {
        dist(&self.m, &other.m)
    }

    pub fn apply_vector(&self, v: &[T]) -> Vec<T> {
        let s = self.size;
        (0..s)
            .map(|i| dot(&self.m[i * s..(i + 1) * s], v))
            .collect()
    }

    /// Action on points: lift, multiply, rescale the last coordinate to 1.
    pub fn apply_point(&self, p: &SpherePoint<T>) -> Result<SpherePoint<T>> {
        let w = self.apply_vector(&p.lift());
        let last = w[self.size - 1];
        if !(last.abs() >= T::lit(1e-14)) {
            return Err(Error::NumericalDegeneracy(format!(
                "rescaling coordinate {last:e} vanishes"
            )));
        }
        SpherePoint::new(w[..self.size - 1].iter().map(|&x| x / last).collect())
    }

    /// Image of a cap; the side is carried along because the map preserves
    /// the sign of Lorentz products.
    pub fn apply_cap(&self, c: &Cap<T>) -> Result<Cap<T>> {
        Cap::from_unit_lorentz(&self.apply_vector(&c.lorentz()))
    }

    pub fn cast<U: Real>(&self) -> MobiusMap<U> {
        MobiusMap {
            size: self.size,
            m: self.m.iter().map(|c| U::lit(c.to_f64_lossy())).collect(),
            parity: self.parity,
            since_reproject: self.since_reproject,
        }
    }
}

fn mat_mul<T: Real>(s: usize, a: &[T], b: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); s * s];
    for i in 0..s {
        for k in 0..s {
            let aik = a[i * s + k];
            if aik == T::zero() {
                continue;
            }
            for j in 0..s {
                out[i * s + j] = out[i * s + j] + aik * b[k * s + j];
            }
        }
    }
    out
}

fn determinant<T: Real>(s: usize, m: &[T]) -> T {
    let mut a = m.to_vec();
    let mut det = T::one();
    for col in 0..s {
        let piv = (col..s)
            .max_by(|&i, &j| {
                a[i * s + col]
                    .abs()
                    .partial_cmp(&a[j * s + col].abs())
                    .unwrap()
            })
            .unwrap();
        if a[piv * s + col] == T::zero() {
            return T::zero();
        }
        if piv != col {
            for j in 0..s {
                a.swap(piv * s + j, col * s + j);
            }
            det = -det;
        }
        let p = a[col * s + col];
        det = det * p;
        for i in col + 1..s {
            let f = a[i * s + col] / p;
            for j in col..s {
                a[i * s + j] = a[i * s + j] - f * a[col * s + j];
            }
        }
    }
    det
}

/// Chordal cross-ratio `d(x1,x3) d(x2,x4) / (d(x1,x4) d(x2,x3))`.
pub fn cross_ratio<T: Real>(
    x1: &SpherePoint<T>,
    x2: &SpherePoint<T>,
    x3: &SpherePoint<T>,
    x4: &SpherePoint<T>,
) -> Result<T> {
    cross_ratio_raw(
        [x1.coords(), x2.coords(), x3.coords(), x4.coords()],
        T::tol(1e-12),
    )
}

/// Cross-ratio of four points of a Euclidean space (chart or ambient).
pub fn cross_ratio_raw<T: Real>(p: [&[T]; 4], tol: T) -> Result<T> {
    for i in 0..4 {
        for j in i + 1..4 {
            if dist(p[i], p[j]) <= tol {
                return Err(Error::DegenerateQuadruple(i, j));
            }
        }
    }
    Ok(dist(p[0], p[2]) * dist(p[1], p[3]) / (dist(p[0], p[3]) * dist(p[1], p[2])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_cap(rng: &mut ChaCha8Rng, n: usize) -> Cap<f64> {
        let u = random_unit(rng, n + 1);
        Cap::new(u, rng.random_range(-0.9..0.95)).unwrap()
    }

    #[test]
    fn equatorial_reflection_is_mirror() {
        let cap = Cap::new(vec![0.0, 0.0, 1.0], 0.0).unwrap();
        let r = MobiusMap::reflection(&cap);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let p = SpherePoint::<f64>::random(&mut rng, 2);
            let q = r.apply_point(&p).unwrap();
            let c = p.coords();
            assert!(dist(q.coords(), &[c[0], c[1], -c[2]]) < 1e-14);
        }
        let south = r.apply_point(&SpherePoint::pole(2)).unwrap();
        assert!(dist(south.coords(), &[0.0, 0.0, -1.0]) < 1e-15);
        assert_eq!(r.parity(), Parity::Reversing);
    }

    #[test]
    fn reflection_is_involution_and_fixes_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 2..=4 {
            for _ in 0..10 {
                let cap = random_cap(&mut rng, n);
                let r = MobiusMap::reflection(&cap);
                let rr = r.compose(&r);
                assert!(rr.distance(&MobiusMap::identity(n)) < 1e-10);
                for b in cap.boundary_samples(16) {
                    assert!(r.apply_point(&b).unwrap().chordal(&b) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn unit_circle_inversion_in_chart() {
        let cap = Cap::from_chart_disk(&[0.0, 0.0], 1.0).unwrap();
        let r = MobiusMap::reflection(&cap);
        let img = r.apply_point(&SpherePoint::from_chart(&[2.0, 0.0])).unwrap();
        let x = img.to_chart().unwrap();
        assert!(dist(&x, &[0.5, 0.0]) < 1e-14);
        // Oracle x ↦ x/|x|² on random chart points.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let z = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let r2 = z[0] * z[0] + z[1] * z[1];
            let got = r
                .apply_point(&SpherePoint::from_chart(&z))
                .unwrap()
                .to_chart()
                .unwrap();
            assert!(dist(&got, &[z[0] / r2, z[1] / r2]) < 1e-10 * (1.0 + 1.0 / r2));
        }
    }

    #[test]
    fn chart_disk_round_trip() {
        let cap = Cap::<f64>::from_chart_disk(&[1.5, -0.5], 0.75).unwrap();
        match cap.to_chart() {
            ChartBall::Disk { center, radius } => {
                assert!(dist(&center, &[1.5, -0.5]) < 1e-13);
                assert!((radius - 0.75).abs() < 1e-13);
            }
            other => panic!("unexpected {other:?}"),
        }
        match cap.complement().to_chart() {
            ChartBall::Exterior { radius, .. } => assert!((radius - 0.75).abs() < 1e-13),
            other => panic!("unexpected {other:?}"),
        }
        let eq = Cap::new(vec![1.0, 0.0, 0.0], 0.0).unwrap();
        assert!(matches!(eq.to_chart(), ChartBall::HalfSpace { .. }));
        // Chart membership agrees with sphere membership.
        let p_in = SpherePoint::from_chart(&[1.6, -0.4]);
        let p_out = SpherePoint::from_chart(&[0.0, 0.0]);
        assert!(cap.contains(&p_in) && !cap.contains(&p_out));
    }

    #[test]
    fn apply_cap_maps_boundary_and_side() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let c = random_cap(&mut rng, 2);
            let m = MobiusMap::reflection(&random_cap(&mut rng, 2))
                .compose(&MobiusMap::reflection(&random_cap(&mut rng, 2)));
            let img = m.apply_cap(&c).unwrap();
            for b in c.boundary_samples(100) {
                let q = m.apply_point(&b).unwrap();
                assert!(img.signed(&q).abs() < 1e-9);
            }
            let inside = m.apply_point(&c.center()).unwrap();
            assert!(img.contains(&inside));
        }
        let north = Cap::new(vec![0.3, 0.0, 0.9], 0.5).unwrap();
        let mirror = MobiusMap::reflection(&Cap::new(vec![0.0, 0.0, 1.0], 0.0).unwrap());
        let south = mirror.apply_cap(&north).unwrap();
        let u = north.normal();
        assert!(south.approx_eq(&Cap::new(vec![u[0], u[1], -u[2]], 0.5).unwrap(), 1e-14));
        assert!(MobiusMap::identity(2).apply_cap(&north).unwrap().approx_eq(&north, 1e-15));
    }

    #[test]
    fn compose_inverse_and_parity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rs: Vec<_> = (0..3)
            .map(|_| MobiusMap::reflection(&random_cap(&mut rng, 3)))
            .collect();
        let w = rs[0].compose(&rs[1]).compose(&rs[2]);
        assert_eq!(w.parity(), Parity::Reversing);
        assert!(w.compose(&w.inverse()).distance(&MobiusMap::identity(3)) < 1e-10);
        let fm = MobiusMap::from_matrix(3, w.matrix().to_vec()).unwrap();
        assert_eq!(fm.parity(), Parity::Reversing);
        let r12 = rs[0].compose(&rs[1]);
        for _ in 0..100 {
            let p = SpherePoint::random(&mut rng, 3);
            let a = r12.apply_point(&p).unwrap();
            let b = rs[0].apply_point(&rs[1].apply_point(&p).unwrap()).unwrap();
            assert!(a.chordal(&b) < 1e-10);
        }
    }

    #[test]
    fn drift_stays_bounded_over_long_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut m = MobiusMap::identity(2);
        let mut worst = 0.0f64;
        for _ in 0..10_000 {
            let u = random_unit(&mut rng, 3);
            let g = MobiusMap::reflection(&Cap::new(u, rng.random_range(-0.3..0.3)).unwrap());
            m = m.compose(&g);
            let scale = m.matrix().iter().map(|x| x * x).sum::<f64>();
            worst = worst.max(m.lorentz_defect() / scale);
            if scale > 1e8 {
                m = MobiusMap::identity(2);
            }
        }
        assert!(worst < 1e-8, "relative defect {worst}");
    }

    #[test]
    fn cross_ratio_cases() {
        let pts: Vec<SpherePoint<f64>> = [[0.0, 0.0], [2.0, 0.0], [1.0, 0.0]]
            .iter()
            .map(|x| SpherePoint::from_chart(x))
            .collect();
        let inf = SpherePoint::pole(2);
        let cr = cross_ratio(&pts[0], &pts[1], &pts[2], &inf).unwrap();
        assert!((cr - 1.0).abs() < 1e-12);
        assert_eq!(
            cross_ratio(&pts[0], &pts[0], &pts[1], &inf),
            Err(Error::DegenerateQuadruple(0, 1))
        );
        // [x1,x2,x3,x4] / [x3,x2,x1,x4] = d34 d12 / (d14 d23).
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let q: Vec<_> = (0..4).map(|_| SpherePoint::<f64>::random(&mut rng, 2)).collect();
        let a = cross_ratio(&q[0], &q[1], &q[2], &q[3]).unwrap();
        let b = cross_ratio(&q[2], &q[1], &q[0], &q[3]).unwrap();
        let d = |i: usize, j: usize| q[i].chordal(&q[j]);
        let expected = d(2, 3) * d(0, 1) / (d(0, 3) * d(1, 2));
        assert!((a / b - expected).abs() < 1e-12 * (1.0 + expected));
        let direct = d(0, 2) * d(1, 3) / (d(0, 3) * d(1, 2));
        assert!((a - direct).abs() < 1e-12);
    }

    #[test]
    fn chordal_chart_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let x = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
            let y = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
            let d = SpherePoint::<f64>::from_chart(&x).chordal(&SpherePoint::from_chart(&y));
            assert!((d - chart_chordal(&x, &y)).abs() < 1e-12);
            assert!(d <= 2.0 + 1e-15);
        }
    }

    #[test]
    fn f32_reflection_involution() {
        let cap = Cap::<f32>::new(vec![0.2, 0.3, 0.9], 0.4).unwrap();
        let r = MobiusMap::reflection(&cap);
        assert!(r.compose(&r).distance(&MobiusMap::identity(2)) < 1e-5);
    }
}
