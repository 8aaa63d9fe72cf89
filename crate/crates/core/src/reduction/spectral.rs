use rand::Rng;

use super::fuzzy::Edge;
use crate::rng;

const MAX_ITERATIONS: usize = 10_000;
const RESIDUAL_TOL: f64 = 1e-4;
const EXTRA_VECTORS: usize = 4;
const INIT_EXTENT: f64 = 10.0;

/// Seeded uniform coordinates in `[−10, 10]^m`.
pub fn random_init(n: usize, m: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng::stream(seed, rng::STREAM_INIT);
    (0..n * m)
        .map(|_| rng.gen_range(-INIT_EXTENT..=INIT_EXTENT))
        .collect()
}

/// Leading nontrivial eigenvectors of the symmetric-normalised adjacency
/// `D^{-1/2} W D^{-1/2}` (equivalently the smallest of the normalised
/// Laplacian), each column scaled into `[−10, 10]`.
///
/// Uses block power iteration on `(I + N) / 2` with the trivial eigenvector
/// deflated and a Rayleigh–Ritz rotation per step. Returns `None` when the
/// residuals do not fall below tolerance within 10 000 iterations.
pub fn spectral_init(n: usize, edges: &[Edge], m: usize) -> Option<Vec<f64>> {
    if n <= m + 1 || edges.is_empty() {
        return None;
    }
    let mut degree = vec![0.0f64; n];
    for e in edges {
        degree[e.from] += e.weight;
    }
    if degree.iter().any(|&d| d <= 0.0) {
        // isolated vertices make the normalisation undefined
        return None;
    }
    let inv_sqrt: Vec<f64> = degree.iter().map(|d| 1.0 / d.sqrt()).collect();
    let norm_weights: Vec<f64> = edges
        .iter()
        .map(|e| e.weight * inv_sqrt[e.from] * inv_sqrt[e.to])
        .collect();

    let mut trivial: Vec<f64> = degree.iter().map(|d| d.sqrt()).collect();
    normalize(&mut trivial);

    let block = (m + EXTRA_VECTORS).min(n - 1);
    // deterministic start: fixed stream, independent of the layout seed
    let mut rng = rng::stream(0x5eed_5eed, rng::STREAM_INIT);
    let mut basis: Vec<Vec<f64>> = (0..block)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    orthonormalize(&mut basis, &trivial);

    let apply = |v: &[f64], out: &mut Vec<f64>| {
        out.clear();
        out.extend(v.iter().map(|x| 0.5 * x));
        for (e, w) in edges.iter().zip(&norm_weights) {
            out[e.from] += 0.5 * w * v[e.to];
        }
    };

    let mut images: Vec<Vec<f64>> = vec![Vec::with_capacity(n); block];
    for _ in 0..MAX_ITERATIONS {
        for (v, img) in basis.iter().zip(images.iter_mut()) {
            apply(v, img);
        }
        // Rayleigh–Ritz on span(basis)
        let mut h = vec![vec![0.0; block]; block];
        for i in 0..block {
            for j in i..block {
                let d = dot(&basis[i], &images[j]);
                h[i][j] = d;
                h[j][i] = d;
            }
        }
        let (values, vectors) = jacobi_eigen(h);
        let mut order: Vec<usize> = (0..block).collect();
        order.sort_by(|&x, &y| values[y].total_cmp(&values[x]).then(x.cmp(&y)));

        let rotate = |src: &[Vec<f64>]| -> Vec<Vec<f64>> {
            order
                .iter()
                .map(|&c| {
                    let mut out = vec![0.0; n];
                    for (r, s) in src.iter().enumerate() {
                        let coef = vectors[r][c];
                        for (o, x) in out.iter_mut().zip(s) {
                            *o += coef * x;
                        }
                    }
                    out
                })
                .collect()
        };
        let ritz = rotate(&basis);
        let ritz_images = rotate(&images);

        let converged = (0..m).all(|c| {
            let lambda = values[order[c]];
            let r: f64 = ritz_images[c]
                .iter()
                .zip(&ritz[c])
                .map(|(av, v)| (av - lambda * v).powi(2))
                .sum();
            r.sqrt() < RESIDUAL_TOL
        });
        if converged {
            return Some(scale_columns(&ritz[..m], n));
        }
        basis = ritz_images;
        orthonormalize(&mut basis, &trivial);
    }
    None
}

fn scale_columns(columns: &[Vec<f64>], n: usize) -> Vec<f64> {
    let m = columns.len();
    let mut coords = vec![0.0; n * m];
    for (c, col) in columns.iter().enumerate() {
        let max = col.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        let scale = if max > 0.0 { INIT_EXTENT / max } else { 0.0 };
        // fix the sign so the result does not depend on solver internals
        let sign = match col.iter().find(|x| x.abs() > 1e-12 * max) {
            Some(x) if *x < 0.0 => -1.0,
            _ => 1.0,
        };
        for (i, x) in col.iter().enumerate() {
            coords[i * m + c] = sign * scale * x;
        }
    }
    coords
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

// Modified Gram–Schmidt against the trivial vector and earlier columns.
// Columns that collapse are refilled with a deterministic coordinate vector.
fn orthonormalize(basis: &mut [Vec<f64>], trivial: &[f64]) {
    for i in 0..basis.len() {
        let (done, rest) = basis.split_at_mut(i);
        let v = &mut rest[0];
        for _ in 0..2 {
            let p = dot(v, trivial);
            v.iter_mut().zip(trivial).for_each(|(x, t)| *x -= p * t);
            for u in done.iter() {
                let p = dot(v, u);
                v.iter_mut().zip(u).for_each(|(x, t)| *x -= p * t);
            }
        }
        if normalize(v) < 1e-300 {
            v.iter_mut().enumerate().for_each(|(j, x)| {
                *x = if j % (i + 2) == 0 { 1.0 } else { -1.0 };
            });
            normalize(v);
        }
    }
}

/// Cyclic Jacobi eigendecomposition of a small symmetric matrix. Returns
/// eigenvalues and the eigenvector matrix (eigenvectors as columns).
pub(crate) fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}
