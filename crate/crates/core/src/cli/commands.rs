use super::svg::{self, SvgWindow};
use super::*;
use crate::analysis::{
    conformality_defect, dilatation_estimate, mobius_fit, qm_envelope, qs_envelope, DistortionProfile, Domain,
    MapUnderTest,
};
use crate::beltrami::{chart_reflections, invariance_residual, tile_locate, write_csv, BeltramiField, InvariantMu};
use crate::config::ConfigDocument;
use crate::constructions::{
    fat_cantor, nonrigid_example, porosity_check, porous_relative_schottky, sample_in_set,
    BallDomain, BoxDomain, ChartDomain, NonrigidExample, NonrigidParams,
};
use crate::equivariant::{double, doubling_sequence, f_infinity, phi, well_definedness_check, BoundaryMap};
use crate::fixtures::{points_in_set, random_mobius};
use crate::group::{code_point, discreteness_gap, orbit_balls, word_ball, word_to_mobius, Coding, OrbitOptions, ReducedWord};
use crate::hull::{hull_from_schottky, hyp_distance};
use crate::mobius::{MobiusMap, SpherePoint};
use crate::schottky::{cap_area, sphere_area, SchottkySet};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

type Sampler = Box<dyn FnMut(&mut ChaCha8Rng) -> Vec<f64>>;

struct Loaded {
    doc: ConfigDocument,
    set: SchottkySet<f64>,
}

fn load(path: &std::path::Path) -> CliResult<Loaded> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let doc = ConfigDocument::parse(&text)?;
    let set = doc.to_set()?;
    Ok(Loaded { doc, set })
}

/// Loads and rejects invalid configurations.
fn load_valid(path: &std::path::Path) -> CliResult<Loaded> {
    let l = load(path)?;
    let report = l.set.validate();
    if !report.is_valid() {
        return Err(CliError::Invalid(format!("{} violation(s)", report.violations.len())));
    }
    Ok(l)
}

fn rng_for(cli: &Cli, doc: Option<&ConfigDocument>) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cli.seed.or(doc.and_then(|d| d.seed)).unwrap_or(0))
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn word_json(w: &ReducedWord) -> Value {
    json!(w.indices())
}

fn window4(w: &[f64], what: &str) -> CliResult<[f64; 4]> {
    match *w {
        [x0, y0, x1, y1] if x1 > x0 && y1 > y0 => Ok([x0, y0, x1, y1]),
        _ => Err(CliError::Usage(format!("{what} must be x0,y0,x1,y1 with x0 < x1 and y0 < y1"))),
    }
}

pub(super) fn execute(cli: &Cli) -> CliResult<Output> {
    match &cli.command {
        Command::Validate { config } => {
            let l = load(config)?;
            let report = l.set.validate();
            let summary = if report.is_valid() {
                format!("valid, {} caps", report.cap_count)
            } else {
                format!("invalid, {} violation(s)", report.violations.len())
            };
            let mut v = to_json(&report);
            v["valid"] = json!(report.is_valid());
            v["summary"] = json!(summary);
            if report.is_valid() {
                Ok(Output::Json(v))
            } else {
                Err(CliError::Rejected { summary, report: v })
            }
        }
        Command::Measure { config, monte_carlo } => {
            let l = load_valid(config)?;
            let n = l.set.dim();
            let measure = l.set.measure()?;
            let removed: f64 = l.set.caps().iter().map(|c| cap_area(n, c.angular_radius())).sum();
            let mut v = json!({
                "caps": l.set.len(),
                "dimension": n,
                "measure": measure,
                "removed_area": removed,
                "sphere_area": sphere_area::<f64>(n),
            });
            if let Some(samples) = *monte_carlo {
                if samples == 0 {
                    return Err(CliError::Usage("--monte-carlo needs a positive sample count".into()));
                }
                let mut rng = rng_for(cli, Some(&l.doc));
                let hits = (0..samples)
                    .filter(|_| l.set.contains(&SpherePoint::random(&mut rng, n)).in_set())
                    .count() as f64;
                let p = hits / samples as f64;
                let area = sphere_area::<f64>(n);
                v["monte_carlo"] = json!({
                    "estimate": area * p,
                    "samples": samples,
                    "standard_error": area * (p * (1.0 - p) / samples as f64).sqrt(),
                });
            }
            Ok(Output::Json(v))
        }
        Command::Orbit {
            config,
            min_diam,
            max_depth,
            max_balls,
            list,
        } => {
            let l = load_valid(config)?;
            let balls = orbit_balls(
                &l.set,
                &OrbitOptions {
                    min_diameter: *min_diam,
                    max_depth: *max_depth,
                    max_balls: *max_balls,
                },
            )?;
            let mut per_depth = Vec::<usize>::new();
            for b in &balls {
                if per_depth.len() < b.depth() {
                    per_depth.resize(b.depth(), 0);
                }
                per_depth[b.depth() - 1] += 1;
            }
            let mut v = json!({
                "count": balls.len(),
                "count_by_depth": per_depth,
                "min_diameter": min_diam,
            });
            if *list {
                v["balls"] = balls
                    .iter()
                    .map(|b| {
                        json!({
                            "diameter": b.diameter,
                            "normal": b.cap.normal(),
                            "offset": b.cap.offset(),
                            "word": word_json(&b.word),
                        })
                    })
                    .collect();
            }
            Ok(Output::Json(v))
        }
        Command::CodePoint {
            config,
            point,
            max_depth,
        } => {
            let l = load_valid(config)?;
            let p = sphere_point(point, l.set.dim())?;
            Ok(Output::Json(coding_json(&code_point(&l.set, &p, *max_depth)?)))
        }
        Command::DiscretenessGap {
            config,
            words,
            points,
            max_len,
        } => {
            let l = load_valid(config)?;
            if *max_len == 0 {
                return Err(CliError::Usage("--max-len must be positive".into()));
            }
            let mut rng = rng_for(cli, Some(&l.doc));
            let ws: Vec<ReducedWord> = (0..*words)
                .map(|_| {
                    let len = rng.random_range(1..=*max_len);
                    ReducedWord::random(&mut rng, l.set.len(), len)
                })
                .collect();
            let pts = points_in_set(&mut rng, &l.set, *points)?;
            let report = discreteness_gap(&l.set, &ws, &pts)?;
            let mut v = to_json(&report);
            v["holds"] = json!(report.gap >= report.chordal_bound - 1e-9);
            Ok(Output::Json(v))
        }
        Command::Double { config, index } => {
            let l = load_valid(config)?;
            let d = double(&l.set, *index)?;
            let doc = ConfigDocument::from_set(&d.result.set, l.doc.seed);
            Ok(Output::Json(json!({
                "config": to_json(&doc),
                "mirror_index": d.mirror_index,
                "valid": d.result.set.validate().is_valid(),
                "words": d.result.words.iter().map(word_json).collect::<Vec<_>>(),
            })))
        }
        Command::DoublingSeq {
            config,
            steps,
            max_caps,
        } => {
            let l = load_valid(config)?;
            let seq = doubling_sequence(&l.set, *steps, *max_caps)?;
            Ok(Output::Json(json!({
                "cap_counts": seq.sets.iter().map(|s| s.set.len()).collect::<Vec<_>>(),
                "max_diameters": seq.radii,
                "steps": steps,
            })))
        }
        Command::Extend(args) => extend(cli, args),
        Command::QsEnvelope(args) => envelope(cli, args, false),
        Command::QmEnvelope(args) => envelope(cli, args, true),
        Command::Dilatation {
            map,
            point,
            radii,
            rungs,
        } => {
            let mut rng = rng_for(cli, None);
            let built = build_map(map, &mut rng)?;
            check_point(&built.map, point)?;
            let k = dilatation_estimate(&built.map, point, radii, *rungs)?;
            Ok(Output::Json(json!({ "dilatation": k, "point": point, "radii": radii })))
        }
        Command::MobiusFit { map, samples } => {
            let mut rng = rng_for(cli, None);
            let mut built = build_map(map, &mut rng)?;
            let xs: Vec<Vec<f64>> = match &built.nonrigid {
                Some(ex) => ex.k_fiber_samples(&mut rng, *samples),
                None => (0..*samples).map(|_| (built.sampler)(&mut rng)).collect(),
            };
            let pairs = point_pairs(&built.map, &xs)?;
            let fit = mobius_fit(&pairs)?;
            Ok(Output::Json(json!({
                "iterations": fit.iterations,
                "matrix": fit.map.matrix(),
                "residual": fit.residual,
                "samples": pairs.len(),
            })))
        }
        Command::Conformality { map, point, step } => {
            let mut rng = rng_for(cli, None);
            let built = build_map(map, &mut rng)?;
            check_point(&built.map, point)?;
            let d = conformality_defect(&built.map, point, *step)?;
            Ok(Output::Json(json!({ "defect": d, "point": point })))
        }
        Command::Construct(c) => construct(cli, c),
        Command::Beltrami(b) => beltrami(cli, b),
        Command::Hull(h) => hull(h),
        Command::RenderSvg {
            config,
            window,
            scale,
            min_diam,
            max_balls,
            out,
        } => {
            let l = load_valid(config)?;
            if l.set.dim() != 2 {
                return Err(CliError::Usage("render-svg needs dimension 2".into()));
            }
            let [x0, y0, x1, y1] = window4(window, "--window")?;
            if !(*scale > 0.0) {
                return Err(CliError::Usage("--scale must be positive".into()));
            }
            let balls = orbit_balls(
                &l.set,
                &OrbitOptions {
                    min_diameter: *min_diam,
                    max_depth: None,
                    max_balls: *max_balls,
                },
            )?;
            let text = svg::render(
                &balls,
                &SvgWindow {
                    x0,
                    y0,
                    x1,
                    y1,
                    scale: *scale,
                },
            );
            emit_text(out.as_deref(), text, json!({ "balls": balls.len() }))
        }
    }
}

/// Writes `text` to `out` (then reports `summary`) or returns it for stdout.
fn emit_text(out: Option<&std::path::Path>, text: String, summary: Value) -> CliResult<Output> {
    match out {
        None => Ok(Output::Text(text)),
        Some(path) => {
            std::fs::write(path, text).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            let mut v = summary;
            v["out"] = json!(path.display().to_string());
            Ok(Output::Json(v))
        }
    }
}

fn sphere_point(coords: &[f64], n: usize) -> CliResult<SpherePoint<f64>> {
    if coords.len() == n + 1 {
        Ok(SpherePoint::new(coords.to_vec())?)
    } else if coords.len() == n {
        Ok(SpherePoint::from_chart(coords))
    } else {
        Err(CliError::Usage(format!(
            "expected {} sphere or {n} chart coordinates, got {}",
            n + 1,
            coords.len()
        )))
    }
}

fn coding_json(c: &Coding<f64>) -> Value {
    match c {
        Coding::Terminated { word, landing, boundary } => json!({
            "boundary": boundary,
            "landing": landing.coords(),
            "resolved": true,
            "word": word_json(word),
        }),
        Coding::Unresolved { word } => json!({
            "resolved": false,
            "word": word_json(word),
        }),
    }
}

fn nonrigid_params(a: &NonrigidArgs, dim: usize) -> NonrigidParams {
    NonrigidParams {
        dim,
        cantor_depth: a.cantor_depth,
        window: a.window_width,
        margin: a.margin,
        max_balls: a.max_balls,
    }
}

struct BuiltMap {
    map: MapUnderTest,
    sampler: Sampler,
    nonrigid: Option<NonrigidExample>,
}

fn build_map(a: &MapArgs, rng: &mut ChaCha8Rng) -> CliResult<BuiltMap> {
    let n = a.dim;
    if n < 1 {
        return Err(CliError::Usage("--dim must be positive".into()));
    }
    let chart_box = |lo: Vec<f64>, hi: Vec<f64>| -> CliResult<Sampler> {
        let lo = a.lo.clone().unwrap_or(lo);
        let hi = a.hi.clone().unwrap_or(hi);
        if lo.len() != n || hi.len() != n || lo.iter().zip(&hi).any(|(l, h)| !(l < h)) {
            return Err(CliError::Usage(format!("--lo/--hi must be {n} coordinates with lo < hi")));
        }
        Ok(Box::new(move |r: &mut ChaCha8Rng| {
            lo.iter().zip(&hi).map(|(l, h)| r.random_range(*l..*h)).collect()
        }))
    };
    match a.map {
        MapKind::Mobius => {
            let m = match &a.matrix {
                Some(entries) => MobiusMap::from_matrix(n, entries.clone())?,
                None => random_mobius(rng, n, a.reflections),
            };
            Ok(BuiltMap {
                map: MapUnderTest::mobius_on_sphere(m),
                sampler: Box::new(move |r: &mut ChaCha8Rng| SpherePoint::<f64>::random(r, n).into_coords()),
                nonrigid: None,
            })
        }
        MapKind::Linear => {
            let entries = a
                .matrix
                .clone()
                .ok_or_else(|| CliError::Usage("--map linear needs --matrix".into()))?;
            if entries.len() != n * n {
                return Err(CliError::Usage(format!("--matrix needs {} entries", n * n)));
            }
            Ok(BuiltMap {
                map: MapUnderTest::linear_chart(n, entries),
                sampler: chart_box(vec![-1.0; n], vec![1.0; n])?,
                nonrigid: None,
            })
        }
        MapKind::Nonrigid => {
            let ex = nonrigid_example(&nonrigid_params(&a.nonrigid, n))?;
            let w = ex.params.window;
            let mut hi = vec![w; n];
            hi[0] = 1.0 + w;
            Ok(BuiltMap {
                map: ex.f.clone(),
                sampler: chart_box(vec![-w; n], hi)?,
                nonrigid: Some(ex),
            })
        }
    }
}

fn check_point(m: &MapUnderTest, x: &[f64]) -> CliResult<()> {
    let want = m.domain().coords();
    if x.len() != want {
        return Err(CliError::Usage(format!("--point needs {want} coordinates, got {}", x.len())));
    }
    Ok(())
}

fn point_pairs(m: &MapUnderTest, xs: &[Vec<f64>]) -> CliResult<Vec<(SpherePoint<f64>, SpherePoint<f64>)>> {
    let lift = |x: &[f64]| -> CliResult<SpherePoint<f64>> {
        Ok(match m.domain() {
            Domain::Chart { .. } => SpherePoint::from_chart(x),
            Domain::Sphere { .. } => SpherePoint::new(x.to_vec())?,
        })
    };
    xs.iter()
        .filter_map(|x| m.eval(x).map(|y| (x, y)))
        .map(|(x, y)| Ok((lift(x)?, lift(&y)?)))
        .collect()
}

fn profile_json(p: &DistortionProfile, bins: usize, linear_bound: Option<f64>) -> Value {
    let max_ratio = p.samples().iter().map(|s| s.1).fold(0.0, f64::max);
    let mut v = json!({
        "binned": p.binned(bins.max(1)).iter().map(|(t, e)| json!([t, e])).collect::<Vec<_>>(),
        "identity_defect": p.identity_defect(),
        "max_ratio": max_ratio,
        "sample_defect": p.sample_defect(),
        "samples": p.samples().len(),
        "skipped": p.skipped(),
    });
    if let Some(k) = linear_bound {
        v["linear_bound"] = json!(k);
        v["linear_bound_excess"] = json!(p.max_excess(|t| k * t));
    }
    v
}

fn envelope(cli: &Cli, a: &EnvelopeArgs, cross_ratio: bool) -> CliResult<Output> {
    let mut rng = rng_for(cli, None);
    let mut built = build_map(&a.map, &mut rng)?;
    let profile = if cross_ratio {
        qm_envelope(&built.map, &mut built.sampler, a.samples, &mut rng)?
    } else {
        qs_envelope(&built.map, &mut built.sampler, a.samples, &mut rng)?
    };
    Ok(Output::Json(profile_json(&profile, a.bins_per_decade, a.linear_bound)))
}

fn random_words(rng: &mut ChaCha8Rng, m: usize, count: usize, max_len: usize) -> Vec<ReducedWord> {
    (0..count)
        .map(|_| {
            let len = rng.random_range(0..=max_len);
            ReducedWord::random(rng, m, len)
        })
        .collect()
}

fn extend(cli: &Cli, a: &ExtendArgs) -> CliResult<Output> {
    match a.map {
        MapKind::Mobius => {
            let path = a
                .config
                .as_ref()
                .ok_or_else(|| CliError::Usage("--map mobius needs a config".into()))?;
            let l = load_valid(path)?;
            let mut rng = rng_for(cli, Some(&l.doc));
            let m = random_mobius(&mut rng, l.set.dim(), a.reflections);
            let bm = BoundaryMap::from_mobius(l.set.clone(), m.clone())?;
            let words = random_words(&mut rng, l.set.len(), a.samples, a.max_len);
            let points = points_in_set(&mut rng, &l.set, a.samples)?;
            let errors = words
                .par_iter()
                .zip(&points)
                .map(|(w, x)| {
                    let got = f_infinity(&bm, w, x)?;
                    let want = m.apply_point(&word_to_mobius(&l.set, w)?.apply_point(x)?)?;
                    Ok(got.chordal(&want))
                })
                .collect::<crate::error::Result<Vec<f64>>>()?;
            let check_words = random_words(&mut rng, l.set.len(), a.check_words, a.max_len);
            let wd = well_definedness_check(&bm, &check_words, a.per_cap)?;
            Ok(Output::Json(json!({
                "map": "mobius",
                "matrix": m.matrix(),
                "max_error": errors.iter().copied().fold(0.0, f64::max),
                "samples": errors.len(),
                "well_definedness": to_json(&wd),
            })))
        }
        MapKind::Nonrigid => {
            if a.config.is_some() {
                return Err(CliError::Usage("--map nonrigid builds its own set; drop the config".into()));
            }
            let ex = nonrigid_example(&nonrigid_params(&a.nonrigid, 2))?;
            let mut rng = rng_for(cli, None);
            let f = ex.f.clone();
            let eval: crate::equivariant::PointMap = Arc::new(move |p: &SpherePoint<f64>| match p.to_chart() {
                Some(x) => SpherePoint::from_chart(&f.eval(&x).expect("F is defined on the chart")),
                None => p.clone(),
            });
            let bm = BoundaryMap::new(ex.s.clone(), ex.s_prime.clone(), eval)?;
            let words = random_words(&mut rng, ex.s.len(), a.samples, a.max_len);
            let points: Vec<SpherePoint<f64>> = ex
                .k_fiber_samples(&mut rng, a.samples)
                .iter()
                .map(|x| SpherePoint::from_chart(x))
                .collect();
            // f_∞(U x) must land in the target ball named by φ(U).
            let escapes = words
                .par_iter()
                .zip(&points)
                .map(|(w, x)| {
                    if w.is_empty() {
                        return Ok(0.0);
                    }
                    let y = f_infinity(&bm, w, x)?;
                    Ok((-word_ball(bm.target(), &phi(w)?)?.signed(&y)).max(0.0))
                })
                .collect::<crate::error::Result<Vec<f64>>>()?;
            let check_words = random_words(&mut rng, ex.s.len(), a.check_words, a.max_len.min(2));
            let wd = well_definedness_check(&bm, &check_words, a.per_cap)?;
            Ok(Output::Json(json!({
                "boundary_defect": bm.boundary_defect(a.per_cap),
                "caps": ex.s.len(),
                "map": "nonrigid",
                "max_ball_escape": escapes.iter().copied().fold(0.0, f64::max),
                "samples": escapes.len(),
                "well_definedness": to_json(&wd),
            })))
        }
        MapKind::Linear => Err(CliError::Usage("extend supports --map mobius or nonrigid".into())),
    }
}

fn construct(cli: &Cli, c: &ConstructCommand) -> CliResult<Output> {
    match c {
        ConstructCommand::FatCantor { depth, list } => {
            let k = fat_cantor(*depth)?;
            let r = |a: i128, b: i128| crate::constructions::Rational::new(a, b);
            let mut v = json!({
                "blocks": k.blocks().len(),
                "depth": depth,
                "h_1": k.h_exact(r(1, 1)).to_string(),
                "h_3_8": k.h_exact(r(3, 8)).to_string(),
                "measure": k.measure().to_string(),
                "removed": k.removed().len(),
                "truncation_error": k.truncation_error().to_string(),
            });
            if *list {
                v["removed_intervals"] = to_json(&k.removed());
            }
            Ok(Output::Json(v))
        }
        ConstructCommand::Porous {
            dim,
            steps,
            scale,
            domain,
            size,
            grid_budget,
            check_points,
            check_c,
            list,
        } => {
            let dom: Box<dyn ChartDomain> = match domain {
                DomainKind::Box => Box::new(BoxDomain::cube(*dim, *size)),
                DomainKind::Ball => Box::new(BallDomain {
                    center: vec![0.0; *dim],
                    radius: *size,
                }),
            };
            let set = porous_relative_schottky(dom.as_ref(), *steps, *scale, *grid_budget)?;
            let mut v = json!({
                "balls": set.balls.len(),
                "steps": to_json(&set.steps),
                "truncation_floor": set.truncation_floor(),
            });
            if let Some(count) = *check_points {
                let mut rng = rng_for(cli, None);
                let index = set.index();
                let ys = sample_in_set(dom.as_ref(), &index, &vec![0.0; *dim], size / 2.0, count, &mut rng)?;
                let scales = vec![1.0; ys.len()];
                let report = porosity_check(&index, &ys, &scales, set.truncation_floor(), *scale, 6, *check_c)?;
                v["porosity"] = json!({
                    "c": report.c,
                    "checks": report.samples.len(),
                    "failures": report.failures,
                    "max_required": report.max_required,
                    "passed": report.passed(),
                });
            }
            if *list {
                v["chart_balls"] = to_json(&set.balls);
            }
            Ok(Output::Json(v))
        }
        ConstructCommand::Nonrigid {
            params,
            dim,
            samples,
            list,
        } => {
            let ex = nonrigid_example(&nonrigid_params(params, *dim))?;
            let mut rng = rng_for(cli, None);
            let xs = ex.k_fiber_samples(&mut rng, *samples);
            let fit = mobius_fit(&point_pairs(&ex.f, &xs)?)?;
            let mut v = json!({
                "balls": ex.s.len(),
                "cantor_measure": ex.cantor.measure().to_string(),
                "fit_residual": fit.residual,
                "fit_samples": xs.len(),
                "params": to_json(&ex.params),
                "slabs": ex.slabs.iter().map(|s| json!({
                    "balls": s.balls.len(),
                    "hi": s.hi,
                    "lo": s.lo,
                    "residual_margin": s.residual_margin,
                    "shift": s.shift,
                })).collect::<Vec<_>>(),
                "valid": ex.s.validate().is_valid() && ex.s_prime.validate().is_valid(),
            });
            if *list {
                v["chart_balls"] = to_json(&ex.balls().collect::<Vec<_>>());
                v["image_balls"] = to_json(&ex.image_balls());
            }
            Ok(Output::Json(v))
        }
    }
}

fn base_field(f: &FieldArgs) -> CliResult<BeltramiField> {
    match *f.nu {
        [re, im] => Ok(BeltramiField::constant(Complex64::new(re, im))?),
        _ => Err(CliError::Usage("--nu must be re,im".into())),
    }
}

fn planar(l: &Loaded) -> CliResult<()> {
    if l.set.dim() != 2 {
        return Err(CliError::Usage("beltrami commands need dimension 2".into()));
    }
    Ok(())
}

fn beltrami(cli: &Cli, b: &BeltramiCommand) -> CliResult<Output> {
    match b {
        BeltramiCommand::Locate {
            config,
            point,
            max_depth,
        } => {
            let l = load_valid(config)?;
            planar(&l)?;
            let [x, y] = point[..] else {
                return Err(CliError::Usage("--point must be x,y".into()));
            };
            Ok(Output::Json(coding_json(&tile_locate(&l.set, Complex64::new(x, y), *max_depth)?)))
        }
        BeltramiCommand::Mu {
            config,
            field,
            window,
            resolution,
            out,
        } => {
            let l = load_valid(config)?;
            planar(&l)?;
            let [x0, y0, x1, y1] = window4(window, "--window")?;
            let nu = base_field(field)?;
            let mu = InvariantMu::new(&l.set, &nu, field.max_depth)?;
            let r = (*resolution).max(1);
            let zs: Vec<Complex64> = (0..r)
                .flat_map(|j| {
                    (0..r).map(move |i| {
                        Complex64::new(
                            x0 + (i as f64 + 0.5) * (x1 - x0) / r as f64,
                            y0 + (j as f64 + 0.5) * (y1 - y0) / r as f64,
                        )
                    })
                })
                .collect();
            let samples = zs
                .par_iter()
                .map(|&z| mu.sample(z))
                .collect::<crate::error::Result<Vec<_>>>()?;
            let mut buf = Vec::new();
            write_csv(&mut buf, &samples).map_err(|source| CliError::Io {
                path: "<csv>".into(),
                source,
            })?;
            let resolved = samples.iter().filter(|s| s.resolved).count();
            emit_text(
                out.as_deref(),
                String::from_utf8(buf).expect("CSV is UTF-8"),
                json!({ "resolved": resolved, "samples": samples.len() }),
            )
        }
        BeltramiCommand::Residual {
            config,
            field,
            window,
            samples,
        } => {
            let l = load_valid(config)?;
            planar(&l)?;
            let [x0, y0, x1, y1] = window4(window, "--window")?;
            let nu = base_field(field)?;
            let mu = InvariantMu::new(&l.set, &nu, field.max_depth)?;
            let refl = chart_reflections(&l.set)?;
            let mut rng = rng_for(cli, Some(&l.doc));
            let zs: Vec<Complex64> = (0..*samples)
                .map(|_| Complex64::new(rng.random_range(x0..x1), rng.random_range(y0..y1)))
                .collect();
            let per_generator = (0..refl.len())
                .map(|i| {
                    let (residual, used) = invariance_residual(&mu, &refl, i, &zs)?;
                    Ok(json!({ "generator": i, "residual": residual, "used": used }))
                })
                .collect::<crate::error::Result<Vec<_>>>()?;
            Ok(Output::Json(json!({
                "generators": per_generator,
                "samples": zs.len(),
                "sup_norm": nu.sup_norm(),
            })))
        }
    }
}

fn hull(h: &HullCommand) -> CliResult<Output> {
    match h {
        HullCommand::Build { config } => {
            let l = load_valid(config)?;
            let hull = hull_from_schottky(&l.set);
            Ok(Output::Json(json!({
                "ball_dimension": hull.dim(),
                "halfspaces": hull.halfspace_count(),
                "hyperplanes": (0..hull.halfspace_count()).map(|i| to_json(&hull.hyperplane(i))).collect::<Vec<_>>(),
            })))
        }
        HullCommand::Contains { config, point, tol } => {
            let l = load_valid(config)?;
            let hull = hull_from_schottky(&l.set);
            Ok(Output::Json(json!({
                "contains": hull.contains(point, *tol)?,
                "point": point,
            })))
        }
        HullCommand::Distance { from, to } => Ok(Output::Json(json!({
            "distance": hyp_distance(from, to)?,
        }))),
    }
}
