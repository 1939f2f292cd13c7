//! Property tests for the invariants of each module. Geometric inputs are
//! drawn from seeded generators so failures shrink to a seed.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use schottky_lab::analysis::{conformality_defect, dilatation_estimate, hausdorff_distance, mobius_fit, MapUnderTest};
use schottky_lab::beltrami::{chart_reflections, pullback_value, word_derivative, BeltramiField, InvariantMu};
use schottky_lab::equivariant::{double, f_infinity, phi, BoundaryMap};
use schottky_lab::fixtures::{points_in_set, random_configuration, random_mobius, symmetric_three};
use schottky_lab::group::{code_point, orbit_balls, word_ball, word_to_mobius, Coding, OrbitOptions, ReducedWord};
use schottky_lab::hull::{apply_ball_point, apply_hull, hull_from_schottky, hyp_distance};
use schottky_lab::mobius::{chart_chordal, cross_ratio, Cap, MobiusMap, SpherePoint};
use schottky_lab::schottky::{cap_area, sphere_area, Membership};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn max_entry(a: &MobiusMap<f64>) -> f64 {
    a.matrix().iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn spectral(a: &MobiusMap<f64>, b: &MobiusMap<f64>) -> f64 {
    let n = a.dim() + 2;
    let d: Vec<f64> = a.matrix().iter().zip(b.matrix()).map(|(x, y)| x - y).collect();
    nalgebra::DMatrix::from_row_slice(n, n, &d).singular_values().max()
}

fn ball_point(r: &mut ChaCha8Rng, n: usize, radius: f64) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..n).map(|_| r.random_range(-radius..radius)).collect();
        if x.iter().map(|v| v * v).sum::<f64>() < radius * radius {
            return x;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // mobius_core

    #[test]
    fn cross_ratio_is_mobius_invariant(seed in any::<u64>(), n in 1usize..4) {
        let mut r = rng(seed);
        let m = random_mobius(&mut r, n, 3);
        let xs: Vec<SpherePoint<f64>> = (0..4).map(|_| SpherePoint::random(&mut r, n)).collect();
        let before = cross_ratio(&xs[0], &xs[1], &xs[2], &xs[3]);
        prop_assume!(before.is_ok());
        let before = before.unwrap();
        prop_assume!(before < 1e6);
        let ys: Vec<_> = xs.iter().map(|x| m.apply_point(x).unwrap()).collect();
        let after = cross_ratio(&ys[0], &ys[1], &ys[2], &ys[3]).unwrap();
        prop_assert!((after - before).abs() <= 1e-9 * (1.0 + before), "{} vs {}", after, before);
    }

    #[test]
    fn reflections_are_involutions(seed in any::<u64>(), n in 1usize..5) {
        let mut r = rng(seed);
        let u = SpherePoint::<f64>::random(&mut r, n).into_coords();
        let cap = Cap::new(u, r.random_range(-0.95..0.95)).unwrap();
        let refl = MobiusMap::reflection(&cap);
        prop_assert!(spectral(&refl.compose(&refl), &MobiusMap::identity(n)) <= 1e-10);
    }

    #[test]
    fn chordal_distance_matches_the_chart_formula(seed in any::<u64>(), n in 1usize..4) {
        let mut r = rng(seed);
        let x: Vec<f64> = (0..n).map(|_| r.random_range(-5.0..5.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| r.random_range(-5.0..5.0)).collect();
        let d = SpherePoint::from_chart(&x).chordal(&SpherePoint::from_chart(&y));
        prop_assert!(d <= 2.0 + 1e-15);
        prop_assert!((d - chart_chordal(&x, &y)).abs() <= 1e-12);
    }

    // schottky_model

    #[test]
    fn measure_plus_cap_areas_is_the_sphere(seed in any::<u64>(), n in 2usize..4, count in 3usize..12) {
        let mut r = rng(seed);
        let s = random_configuration(&mut r, n, count, 0.4).unwrap();
        let total = s.measure().unwrap() + s.caps().iter().map(|c| cap_area(n, c.angular_radius())).sum::<f64>();
        prop_assert!((total - sphere_area::<f64>(n)).abs() <= 1e-9);
    }

    #[test]
    fn membership_is_mobius_invariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = random_configuration(&mut r, 2, 5, 0.5).unwrap();
        let m = random_mobius(&mut r, 2, 3);
        let image = s.map(&m).unwrap();
        prop_assert!(image.validate().is_valid());
        for _ in 0..200 {
            let p = SpherePoint::random(&mut r, 2);
            let a = s.contains(&p);
            let b = image.contains(&m.apply_point(&p).unwrap());
            // Points within rounding of a peripheral sphere may flip class.
            let near = s.caps().iter().any(|c| c.signed(&p).abs() < 1e-9);
            prop_assert!(a == b || near, "{:?} vs {:?}", a, b);
            if let Membership::InCap(i) = a {
                prop_assert!(image.caps()[i].contains(&m.apply_point(&p).unwrap()));
            }
        }
        // Peripheral spheres go to peripheral spheres.
        for (c, d) in s.caps().iter().zip(image.caps()) {
            prop_assert!(m.apply_cap(c).unwrap().approx_eq(d, 1e-12));
        }
    }

    // schottky_group

    #[test]
    fn words_form_a_free_product(seed in any::<u64>(), m in 2usize..5, a in 0usize..7, b in 0usize..7) {
        let mut r = rng(seed);
        let u = ReducedWord::random(&mut r, m, a);
        let v = ReducedWord::random(&mut r, m, b);
        prop_assert!(u.mul(&u.inverse()).is_empty());
        prop_assert_eq!(u.mul(&v).inverse(), v.inverse().mul(&u.inverse()));
        let pal = u.palindrome();
        prop_assert!(pal.mul(&pal).is_empty() || u.is_empty());
    }

    #[test]
    fn word_maps_are_homomorphic(seed in any::<u64>(), a in 0usize..6, b in 0usize..6) {
        let mut r = rng(seed);
        let s = random_configuration(&mut r, 2, 4, 0.5).unwrap();
        let u = ReducedWord::random(&mut r, 4, a);
        let v = ReducedWord::random(&mut r, 4, b);
        let (mu, mv) = (word_to_mobius(&s, &u).unwrap(), word_to_mobius(&s, &v).unwrap());
        let lhs = word_to_mobius(&s, &u.mul(&v)).unwrap();
        let rhs = mu.compose(&mv);
        // Cancellation in u·v loses accuracy in proportion to |U_u|·|U_v|.
        let scale = max_entry(&mu).max(1.0) * max_entry(&mv).max(1.0);
        prop_assert!(spectral(&lhs, &rhs) <= 1e-12 * scale);
    }

    #[test]
    fn orbit_balls_nest_and_shrink(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = random_configuration(&mut r, 2, 3, 0.7).unwrap();
        let balls = orbit_balls(&s, &OrbitOptions::min_diameter(0.05)).unwrap();
        let mut max_by_depth = vec![0.0f64; 1 + balls.iter().map(|b| b.depth()).max().unwrap()];
        for b in &balls {
            max_by_depth[b.depth()] = max_by_depth[b.depth()].max(b.diameter);
            if let Some(p) = b.parent {
                let (pc, c) = (&balls[p].cap, &b.cap);
                let angle = pc.center().coords().iter().zip(c.center().coords()).map(|(x, y)| x * y).sum::<f64>().clamp(-1.0, 1.0).acos();
                prop_assert!(angle + c.angular_radius() <= pc.angular_radius() + 1e-9);
            }
            prop_assert!(word_ball(&s, &b.word).unwrap().approx_eq(&b.cap, 1e-9));
        }
        for w in max_by_depth[1..].windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn coding_is_deterministic_and_inverts(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = symmetric_three();
        let p = SpherePoint::random(&mut r, 2);
        let c = code_point(&s, &p, 40).unwrap();
        prop_assert_eq!(&c, &code_point(&s, &p, 40).unwrap());
        if let Coding::Terminated { word, landing, .. } = &c {
            let back = word_to_mobius(&s, word).unwrap().apply_point(landing).unwrap();
            prop_assert!(back.chordal(&p) <= 1e-9);
        }
    }

    // equivariant

    #[test]
    fn extension_commutes_with_words(seed in any::<u64>(), a in 0usize..5, b in 0usize..5) {
        let mut r = rng(seed);
        let s = symmetric_three();
        let m = random_mobius(&mut r, 2, 3);
        let bm = BoundaryMap::from_mobius(s.clone(), m).unwrap();
        let w = ReducedWord::random(&mut r, 3, a);
        let v = ReducedWord::random(&mut r, 3, b);
        let x = points_in_set(&mut r, &s, 1).unwrap().remove(0);
        let lhs = f_infinity(&bm, &w.mul(&v), &x).unwrap();
        let rhs = word_to_mobius(bm.target(), &phi(&w).unwrap()).unwrap().apply_point(&f_infinity(&bm, &v, &x).unwrap()).unwrap();
        prop_assert!(lhs.chordal(&rhs) <= 1e-8);
        prop_assert_eq!(phi(&w.mul(&v)).unwrap(), phi(&w).unwrap().mul(&phi(&v).unwrap()));
        prop_assert_eq!(phi(&w).unwrap().len(), w.len());
    }

    #[test]
    fn doubling_reflections_are_palindromes(seed in any::<u64>(), i in 0usize..3) {
        let mut r = rng(seed);
        let s = random_configuration(&mut r, 2, 3, 0.6).unwrap();
        let d = double(&s, i).unwrap();
        prop_assert!(d.result.set.validate().is_valid());
        for (cap, w) in d.result.set.caps().iter().zip(&d.result.words) {
            let conj = word_to_mobius(&s, &w.palindrome()).unwrap();
            let refl = MobiusMap::reflection(cap);
            prop_assert!(spectral(&refl, &conj) <= 1e-12 * max_entry(&refl));
        }
    }

    // analysis

    #[test]
    fn mobius_maps_fit_and_dilate_like_mobius_maps(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_mobius(&mut r, 2, 3);
        let pairs: Vec<_> = (0..12)
            .map(|_| {
                let x = SpherePoint::random(&mut r, 2);
                let y = m.apply_point(&x).unwrap();
                (x, y)
            })
            .collect();
        prop_assert!(mobius_fit(&pairs).unwrap().residual < 1e-8);
        let f = MapUnderTest::mobius_on_sphere(m);
        let x = SpherePoint::<f64>::random(&mut r, 2).into_coords();
        let k = dilatation_estimate(&f, &x, &[1e-3, 1e-4], 2).unwrap();
        prop_assert!((1.0..=1.0 + 1e-2).contains(&k), "{}", k);
    }

    #[test]
    fn conformality_defect_survives_mobius_composition(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = r.random_range(0.5..2.0);
        let lin = [a, 0.3, -0.2, 1.0];
        let m = random_mobius(&mut r, 2, 2);
        let x = [r.random_range(-0.5..0.5), r.random_range(-0.5..0.5)];
        let plain = MapUnderTest::linear_chart(2, lin.to_vec());
        let mm = m.clone();
        let post = MapUnderTest::new(
            schottky_lab::analysis::Domain::Chart { dim: 2 },
            std::sync::Arc::new(move |x: &[f64]| {
                let y = [lin[0] * x[0] + lin[1] * x[1], lin[2] * x[0] + lin[3] * x[1]];
                mm.apply_point(&SpherePoint::from_chart(&y)).ok()?.to_chart()
            }),
        );
        let y = [lin[0] * x[0] + lin[1] * x[1], lin[2] * x[0] + lin[3] * x[1]];
        let image = m.apply_point(&SpherePoint::from_chart(&y)).unwrap().to_chart();
        prop_assume!(image.is_some_and(|v| v.iter().all(|c| c.abs() < 50.0)));
        let d0 = conformality_defect(&plain, &x, 1e-4).unwrap();
        let d1 = conformality_defect(&post, &x, 1e-4).unwrap();
        prop_assert!((d0 - d1).abs() <= 1e-4 * (1.0 + d0), "{} vs {}", d0, d1);
    }

    #[test]
    fn hausdorff_distance_is_a_metric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut set = |k: usize| -> Vec<Vec<f64>> { (0..k).map(|_| vec![r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)]).collect() };
        let (a, b, c) = (set(30), set(40), set(20));
        let (ab, ba) = (hausdorff_distance(&a, &b), hausdorff_distance(&b, &a));
        prop_assert!((ab - ba).abs() <= 1e-15);
        prop_assert_eq!(hausdorff_distance(&a, &a), 0.0);
        prop_assert!(ab <= hausdorff_distance(&a, &c) + hausdorff_distance(&c, &b) + 1e-12);
    }

    // beltrami2d

    #[test]
    fn pullback_is_functorial(seed in any::<u64>(), a in 0usize..5, b in 0usize..5) {
        let mut r = rng(seed);
        let s = symmetric_three();
        let refl = chart_reflections(&s).unwrap();
        let w = ReducedWord::random(&mut r, 3, a);
        let v = ReducedWord::random(&mut r, 3, b);
        let z = Complex64::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0));
        let mu = Complex64::from_polar(r.random_range(0.0..0.9), r.random_range(0.0..6.28));
        let dv = word_derivative(&refl, &v, z);
        prop_assume!(dv.is_ok());
        let dv = dv.unwrap();
        let (dw, dwv) = (word_derivative(&refl, &w, dv.value), word_derivative(&refl, &w.mul(&v), z));
        prop_assume!(dw.is_ok() && dwv.is_ok());
        let (dw, dwv) = (dw.unwrap(), dwv.unwrap());
        prop_assume!(dwv.value.norm() < 1e6);
        let twice = pullback_value(pullback_value(mu, &dw), &dv);
        let once = pullback_value(mu, &dwv);
        prop_assert!((twice - once).norm() <= 1e-8, "{} vs {}", twice, once);
    }

    #[test]
    fn invariant_coefficient_keeps_its_modulus(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = symmetric_three();
        let c = Complex64::from_polar(r.random_range(0.0..0.9), r.random_range(0.0..6.28));
        let field = BeltramiField::constant(c).unwrap();
        let mu = InvariantMu::new(&s, &field, 64).unwrap();
        for _ in 0..50 {
            let z = Complex64::new(r.random_range(-3.0..3.0), r.random_range(-3.0..3.0));
            let m = mu.sample(z).unwrap();
            if m.resolved {
                prop_assert!((m.mu.norm() - c.norm()).abs() <= 1e-12);
            }
        }
    }

    // hyperbolic_hull

    #[test]
    fn hyperbolic_distance_is_a_metric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (x, y, z) = (ball_point(&mut r, 3, 0.95), ball_point(&mut r, 3, 0.95), ball_point(&mut r, 3, 0.95));
        let d = |a: &[f64], b: &[f64]| hyp_distance(a, b).unwrap();
        prop_assert_eq!(d(&x, &x), 0.0);
        prop_assert!((d(&x, &y) - d(&y, &x)).abs() <= 1e-12);
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-9);
    }

    #[test]
    fn hulls_are_mobius_equivariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = random_configuration(&mut r, 2, 4, 0.6).unwrap();
        let m = random_mobius(&mut r, 2, 3);
        let moved = apply_hull(&m, &hull_from_schottky(&s)).unwrap();
        let direct = hull_from_schottky(&s.map(&m).unwrap());
        prop_assert_eq!(moved.halfspace_count(), s.len());
        for (a, b) in moved.ideal_traces().iter().zip(direct.ideal_traces()) {
            prop_assert!(a.approx_eq(b, 1e-9));
        }
        let x = ball_point(&mut r, 3, 0.9);
        let y = apply_ball_point(&m, &x).unwrap();
        let h = hull_from_schottky(&s);
        let slack = (0..s.len()).map(|i| h.signed(i, &x).abs()).fold(f64::INFINITY, f64::min);
        prop_assume!(slack > 1e-9);
        prop_assert_eq!(h.contains(&x, 0.0).unwrap(), direct.contains(&y, 0.0).unwrap());
    }
}

#[test]
fn lorentz_form_survives_long_isometric_compositions() {
    // Reflections in great spheres generate O(n+1), so the walk stays bounded
    // and the absolute defect is meaningful over 10^4 steps.
    for seed in 0..8 {
        let mut r = rng(seed);
        let n = 2 + (seed as usize % 2);
        let gens: Vec<MobiusMap<f64>> = (0..5)
            .map(|_| MobiusMap::reflection(&Cap::new(SpherePoint::random(&mut r, n).into_coords(), 0.0).unwrap()))
            .collect();
        let mut m = MobiusMap::identity(n);
        for _ in 0..10_000 {
            m = m.compose(&gens[r.random_range(0..gens.len())]);
        }
        assert!(m.lorentz_defect() <= 1e-8, "{}", m.lorentz_defect());
    }
}

#[test]
fn lorentz_drift_is_relative_for_growing_words() {
    // A generic walk grows geometrically, so the defect is measured against
    // |M|^2, which is what rounding alone produces.
    let mut r = rng(11);
    let gens: Vec<MobiusMap<f64>> = (0..4).map(|_| random_mobius(&mut r, 2, 1)).collect();
    let mut m = MobiusMap::identity(2);
    for _ in 0..10_000 {
        m = m.compose(&gens[r.random_range(0..gens.len())]);
        let size = max_entry(&m);
        if size > 1e60 {
            break;
        }
        assert!(m.lorentz_defect() <= 1e-8 * size * size, "{} at size {}", m.lorentz_defect(), size);
    }
}
