use crate::error::{Error, Result};
use crate::mobius::{MobiusMap, SpherePoint};
use nalgebra::{DMatrix, DVector};

const MAX_ITERATIONS: usize = 50;
const PLATEAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct MobiusFit {
    pub map: MobiusMap<f64>,
    /// RMS chordal error over the pairs.
    pub residual: f64,
    pub iterations: usize,
}

/// Least-squares Möbius map sending each `x_i` to `y_i`.
///
/// A linear estimate comes from the null vector of the constraints
/// `(M X_i)_a = (M X_i)_{n+1} y_{i,a}` on the lifts `X_i = (x_i, 1)`; it is
/// scaled and projected onto the Lorentz group and then refined by
/// Levenberg–Marquardt steps `M ← M·cay(J K)` with `K` antisymmetric, each
/// followed by re-projection.
pub fn mobius_fit(pairs: &[(SpherePoint<f64>, SpherePoint<f64>)]) -> Result<MobiusFit> {
    let Some((first, _)) = pairs.first() else {
        return Err(Error::InvalidInput("no point pairs".into()));
    };
    let n = first.dim();
    let size = n + 2;
    if pairs.len() < n + 3 {
        return Err(Error::InvalidInput(format!(
            "need at least {} pairs, got {}",
            n + 3,
            pairs.len()
        )));
    }
    let start = linear_estimate(pairs, n)?;
    let mut best = MobiusMap::identity(n);
    let mut best_cost = rms(&best, pairs);
    if let Some(m) = start {
        let c = rms(&m, pairs);
        if c < best_cost {
            best = m;
            best_cost = c;
        }
    }
    let params = size * (size - 1) / 2;
    let mut lambda = 1e-3;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS && best_cost > 0.0 {
        iterations += 1;
        let r0 = residuals(&best, pairs);
        let mut jac = DMatrix::<f64>::zeros(r0.len(), params);
        let step = 1e-7;
        for p in 0..params {
            let mut theta = vec![0.0; params];
            theta[p] = step;
            let plus = residuals(&best.compose(&cayley(&theta, size)?), pairs);
            theta[p] = -step;
            let minus = residuals(&best.compose(&cayley(&theta, size)?), pairs);
            for (k, (a, b)) in plus.iter().zip(&minus).enumerate() {
                jac[(k, p)] = (a - b) / (2.0 * step);
            }
        }
        let r = DVector::from_vec(r0);
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        let mut improved = false;
        for _ in 0..10 {
            let mut a = jtj.clone();
            for d in 0..params {
                a[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
            }
            let Some(delta) = a.lu().solve(&(-&jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let mut cand = best.compose(&cayley(delta.as_slice(), size)?);
            cand.reproject();
            let c = rms(&cand, pairs);
            if c < best_cost {
                let gain = best_cost - c;
                best = cand;
                best_cost = c;
                lambda = (lambda / 3.0).max(1e-12);
                improved = gain > PLATEAU;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    Ok(MobiusFit {
        map: best,
        residual: best_cost,
        iterations,
    })
}

/// Null-vector estimate, or `None` when it does not project to the group.
fn linear_estimate(pairs: &[(SpherePoint<f64>, SpherePoint<f64>)], n: usize) -> Result<Option<MobiusMap<f64>>> {
    let size = n + 2;
    let lifted = DMatrix::from_fn(pairs.len(), size, |i, j| pairs[i].0.lift()[j]);
    let sv = lifted.singular_values();
    if sv.min() < 1e-9 * sv.max() || pairs.len() < size {
        return Err(Error::IllConditioned(format!(
            "source points span only a degenerate sphere (singular values {:?})",
            sv.as_slice()
        )));
    }
    let cols = size * size;
    let rows = (pairs.len() * (n + 1)).max(cols);
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    for (i, (x, y)) in pairs.iter().enumerate() {
        let xl = x.lift();
        for coord in 0..=n {
            let row = i * (n + 1) + coord;
            for (j, xj) in xl.iter().enumerate() {
                a[(row, coord * size + j)] += xj;
                a[(row, (size - 1) * size + j)] -= y.coords()[coord] * xj;
            }
        }
    }
    let scale: Vec<f64> = (0..cols)
        .map(|j| {
            let c = a.column(j).norm();
            if c > 0.0 {
                1.0 / c
            } else {
                1.0
            }
        })
        .collect();
    for j in 0..cols {
        a.column_mut(j).scale_mut(scale[j]);
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::IllConditioned("SVD failed".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&p, &q| svd.singular_values[p].total_cmp(&svd.singular_values[q]));
    let (smallest, second) = (order[0], order[1]);
    let top = svd.singular_values.max();
    if svd.singular_values[second] < 1e-9 * top {
        return Err(Error::IllConditioned(
            "pairs determine the map only up to a family".into(),
        ));
    }
    let mut m: Vec<f64> = (0..cols).map(|j| v_t[(smallest, j)] * scale[j]).collect();
    // M^T J M = c² J for the exact map.
    let g = lorentz_gram(&m, size);
    let c2 = ((0..size).map(|i| if i + 1 == size { -g[i * size + i] } else { g[i * size + i] }).sum::<f64>()
        / size as f64)
        .abs();
    if !(c2 > 0.0) {
        return Ok(None);
    }
    let c = c2.sqrt();
    m.iter_mut().for_each(|v| *v /= c);
    let time_sign: f64 = pairs
        .iter()
        .map(|(x, _)| {
            let xl = x.lift();
            (0..size).map(|j| m[(size - 1) * size + j] * xl[j]).sum::<f64>()
        })
        .sum();
    if time_sign < 0.0 {
        m.iter_mut().for_each(|v| *v = -*v);
    }
    let mut map = MobiusMap::from_matrix(n, m)?;
    for _ in 0..30 {
        map.reproject();
    }
    Ok((map.lorentz_defect() < 1e-8).then_some(map))
}

fn lorentz_gram(m: &[f64], size: usize) -> Vec<f64> {
    let mut g = vec![0.0; size * size];
    for i in 0..size {
        for j in 0..size {
            g[i * size + j] = (0..size)
                .map(|k| {
                    let s = if k + 1 == size { -1.0 } else { 1.0 };
                    m[k * size + i] * s * m[k * size + j]
                })
                .sum();
        }
    }
    g
}

/// Cayley transform `(I - A/2)⁻¹(I + A/2)` of `A = J K`, `K` antisymmetric
/// with upper-triangle entries `theta`; a Lorentz matrix.
fn cayley(theta: &[f64], size: usize) -> Result<MobiusMap<f64>> {
    let mut k = DMatrix::<f64>::zeros(size, size);
    let mut idx = 0;
    for i in 0..size {
        for j in i + 1..size {
            k[(i, j)] = theta[idx];
            k[(j, i)] = -theta[idx];
            idx += 1;
        }
    }
    let mut a = k;
    a.row_mut(size - 1).neg_mut();
    let id = DMatrix::<f64>::identity(size, size);
    let lhs = &id - &a * 0.5;
    let rhs = &id + &a * 0.5;
    let q = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::IllConditioned("Cayley transform is singular".into()))?;
    let data: Vec<f64> = (0..size).flat_map(|i| (0..size).map(move |j| (i, j))).map(|(i, j)| q[(i, j)]).collect();
    MobiusMap::from_matrix(size - 2, data)
}

fn residuals(m: &MobiusMap<f64>, pairs: &[(SpherePoint<f64>, SpherePoint<f64>)]) -> Vec<f64> {
    let dim = pairs[0].1.coords().len();
    let mut out = Vec::with_capacity(pairs.len() * dim);
    for (x, y) in pairs {
        match m.apply_point(x) {
            Ok(fx) => out.extend(fx.coords().iter().zip(y.coords()).map(|(a, b)| a - b)),
            Err(_) => out.extend(std::iter::repeat_n(2.0, dim)),
        }
    }
    out
}

fn rms(m: &MobiusMap<f64>, pairs: &[(SpherePoint<f64>, SpherePoint<f64>)]) -> f64 {
    let r = residuals(m, pairs);
    (r.iter().map(|v| v * v).sum::<f64>() / pairs.len() as f64).sqrt()
}
