use super::{euclid, Domain, MapUnderTest};
use crate::error::{Error, Result};
use crate::mobius::{orthonormal_complement, unit_directions};
use nalgebra::DMatrix;

/// Number of directions sampled on each small sphere for `n = 2`; a
/// multiple of 4 so the coordinate axes are included.
const CIRCLE_DIRECTIONS: usize = 256;
const SPHERE_DIRECTIONS: usize = 2000;

fn directions(n: usize) -> Vec<Vec<f64>> {
    let mut dirs = if n == 2 {
        unit_directions::<f64>(2, CIRCLE_DIRECTIONS)
    } else {
        unit_directions::<f64>(n, SPHERE_DIRECTIONS)
    };
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = s;
            dirs.push(e);
        }
    }
    dirs
}

/// `max_r L_f(x,r)/l_f(x,r)` over the last `rungs` radii of the ladder,
/// with `L` and `l` the largest and smallest displacement of `f` over the
/// sampled sphere `|y - x| = r` (chordal spheres in sphere coordinates).
pub fn dilatation_estimate(m: &MapUnderTest, x: &[f64], radii: &[f64], rungs: usize) -> Result<f64> {
    if radii.is_empty() {
        return Err(Error::InvalidInput("empty radius ladder".into()));
    }
    let fx = m.eval(x).ok_or(Error::DomainEscape(0.0))?;
    let (n, tangent) = match m.domain() {
        Domain::Chart { dim } => (dim, None),
        Domain::Sphere { dim } => (dim, Some(orthonormal_complement(x))),
    };
    let dirs = directions(n);
    let mut ratios = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut big = 0.0f64;
        let mut small = f64::INFINITY;
        for d in &dirs {
            let y: Vec<f64> = match &tangent {
                None => x.iter().zip(d).map(|(a, b)| a + r * b).collect(),
                Some(basis) => {
                    // Point at chordal distance r from x.
                    let (c, s) = (1.0 - r * r / 2.0, r * (1.0 - r * r / 4.0).sqrt());
                    let mut y: Vec<f64> = x.iter().map(|a| c * a).collect();
                    for (w, b) in d.iter().zip(basis) {
                        for (yj, bj) in y.iter_mut().zip(b) {
                            *yj += s * w * bj;
                        }
                    }
                    y
                }
            };
            let fy = m.eval(&y).ok_or(Error::DomainEscape(r))?;
            let dist = euclid(&fy, &fx);
            big = big.max(dist);
            small = small.min(dist);
        }
        if !(small > 0.0) {
            return Err(Error::SingularJacobian(small));
        }
        ratios.push(big / small);
    }
    let start = ratios.len().saturating_sub(rungs.max(1));
    Ok(ratios[start..].iter().copied().fold(0.0, f64::max))
}

/// Chart Jacobian at `x` (row-major `n × n`): analytic when attached,
/// otherwise central differences at steps `h` and `h/2` combined by one
/// Richardson step.
pub fn jacobian(m: &MapUnderTest, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let Domain::Chart { dim: n } = m.domain() else {
        return Err(Error::InvalidInput("Jacobians are taken in the chart".into()));
    };
    if let Some(j) = m.analytic_jacobian(x) {
        return Ok(j);
    }
    let central = |step: f64| -> Result<Vec<f64>> {
        let mut jac = vec![0.0; n * n];
        for j in 0..n {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[j] += step;
            xm[j] -= step;
            let fp = m.eval(&xp).ok_or(Error::DomainEscape(step))?;
            let fm = m.eval(&xm).ok_or(Error::DomainEscape(step))?;
            for i in 0..n {
                jac[i * n + j] = (fp[i] - fm[i]) / (2.0 * step);
            }
        }
        Ok(jac)
    };
    let coarse = central(h)?;
    let fine = central(h / 2.0)?;
    Ok(fine.iter().zip(&coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect())
}

/// `σ_1/σ_n - 1` for the singular values of the chart Jacobian.
pub fn conformality_defect(m: &MapUnderTest, x: &[f64], h: f64) -> Result<f64> {
    let jac = jacobian(m, x, h)?;
    let n = x.len();
    let sv = DMatrix::from_row_slice(n, n, &jac).singular_values();
    let max = sv.max();
    let min = sv.min();
    if min < 1e-12 {
        return Err(Error::SingularJacobian(min));
    }
    Ok(max / min - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{random_mobius, symmetric_three};
    use crate::group::{word_to_mobius, ReducedWord};
    use crate::mobius::{MobiusMap, SpherePoint};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    #[test]
    fn dilatation_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ladder = [1e-2, 1e-3, 1e-4];
        for _ in 0..5 {
            let m = MapUnderTest::mobius_on_sphere(random_mobius(&mut rng, 2, 3));
            let x = SpherePoint::<f64>::random(&mut rng, 2).into_coords();
            let h = dilatation_estimate(&m, &x, &ladder, 2).unwrap();
            assert!((1.0..1.0 + 1e-2).contains(&h), "{h}");
        }
        let stretch = MapUnderTest::linear_chart(2, vec![2.0, 0.0, 0.0, 1.0]);
        let h = dilatation_estimate(&stretch, &[0.3, -0.2], &ladder, 2).unwrap();
        assert!((h - 2.0).abs() < 1e-12, "{h}");
        let partial = MapUnderTest::new(
            Domain::Chart { dim: 2 },
            Arc::new(|x: &[f64]| (x[0] < 0.5).then(|| x.to_vec())),
        );
        assert_eq!(dilatation_estimate(&partial, &[0.45, 0.0], &[0.1], 1), Err(Error::DomainEscape(0.1)));
    }

    #[test]
    fn conformality_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let m = MapUnderTest::mobius_on_chart(random_mobius(&mut rng, 2, 3));
            let d = conformality_defect(&m, &[0.2, 0.1], 1e-5).unwrap();
            assert!(d < 1e-6, "{d}");
        }
        let stretch = MapUnderTest::linear_chart(2, vec![2.0, 0.0, 0.0, 1.0]);
        assert_eq!(conformality_defect(&stretch, &[0.0, 0.0], 1e-5).unwrap(), 1.0);
        let flat = MapUnderTest::linear_chart(2, vec![1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(conformality_defect(&flat, &[0.0, 0.0], 1e-5), Err(Error::SingularJacobian(_))));
    }

    #[test]
    fn defect_is_mobius_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = 1.3;
        let warp = move |x: &[f64]| vec![x[0] + 0.2 * x[1] * x[1], a * x[1]];
        let base = MapUnderTest::new(Domain::Chart { dim: 2 }, Arc::new(move |x| Some(warp(x))));
        let x = [0.1, 0.2];
        let d0 = conformality_defect(&base, &x, 1e-5).unwrap();
        let pre: MobiusMap<f64> = random_mobius(&mut rng, 2, 2);
        let post = random_mobius(&mut rng, 2, 2);
        let pre_inv = pre.inverse();
        let composed = MapUnderTest::new(
            Domain::Chart { dim: 2 },
            Arc::new(move |y: &[f64]| {
                let z = pre.apply_point(&SpherePoint::from_chart(y)).ok()?.to_chart()?;
                post.apply_point(&SpherePoint::from_chart(&warp(&z))).ok()?.to_chart()
            }),
        );
        let y = pre_inv.apply_point(&SpherePoint::from_chart(&x)).unwrap().to_chart().unwrap();
        let d1 = conformality_defect(&composed, &y, 1e-5).unwrap();
        assert!((d0 - d1).abs() < 1e-4, "{d0} {d1}");
    }

    #[test]
    fn conformal_at_a_coded_point() {
        // Attracting fixed point of R_0 R_1, coded by an infinite nested
        // ladder of orbit balls; a cap-compatible Möbius map is conformal there.
        let s = symmetric_three();
        let u = word_to_mobius(&s, &ReducedWord::new(vec![0, 1]).unwrap()).unwrap();
        let mut p = SpherePoint::<f64>::pole(2);
        for _ in 0..200 {
            p = u.apply_point(&p).unwrap();
        }
        let x = p.to_chart().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = MapUnderTest::mobius_on_chart(random_mobius(&mut rng, 2, 3));
        assert!(conformality_defect(&m, &x, 1e-5).unwrap() < 1e-4);
    }
}
