use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use rayon::prelude::*;

use super::curve::Curve;
use super::fuzzy::Edge;
use super::ReductionParams;
use crate::error::{Error, Result};
use crate::rng;

const CLIP: f64 = 4.0;

/// How the stochastic layout applies its updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LayoutMode {
    /// Single-threaded; identical inputs give bit-identical output.
    #[default]
    Deterministic,
    /// Edges are split across worker threads that update shared coordinates
    /// without synchronisation. Output depends on thread scheduling.
    Parallel,
}

/// Coefficient applied to the endpoint difference for an attractive move,
/// given the squared endpoint distance.
pub fn attractive_coefficient(dist_sq: f64, a: f64, b: f64) -> f64 {
    if dist_sq <= 0.0 {
        return 0.0;
    }
    -2.0 * a * b * dist_sq.powf(b - 1.0) / (1.0 + a * dist_sq.powf(b))
}

/// Coefficient for a repulsive move against a negative sample.
pub fn repulsive_coefficient(dist_sq: f64, a: f64, b: f64) -> f64 {
    2.0 * b / ((0.001 + dist_sq) * (1.0 + a * dist_sq.powf(b)))
}

fn clip(x: f64) -> f64 {
    x.clamp(-CLIP, CLIP)
}

// Edges whose weight is below max_w / epochs would never be sampled.
fn sampling_schedule(edges: &[Edge], epochs: usize) -> Vec<f64> {
    let max_w = edges.iter().map(|e| e.weight).fold(0.0f64, f64::max);
    edges
        .iter()
        .map(|e| {
            if e.weight * epochs as f64 >= max_w {
                max_w / e.weight
            } else {
                f64::INFINITY
            }
        })
        .collect()
}

/// Negative-sampling stochastic layout. Each directed edge is attracted on
/// an epochs-per-sample schedule of `max_w / w`, with `negative_rate`
/// repulsions of its head per attraction. The learning rate decays
/// linearly from `initial_lr` to zero.
pub fn optimize_layout(
    edges: &[Edge],
    init: Vec<f64>,
    n: usize,
    params: &ReductionParams,
    curve: Curve,
    mode: LayoutMode,
) -> Result<Vec<f64>> {
    let m = params.m;
    if init.len() != n * m {
        return Err(Error::Parameter(format!(
            "initial layout has {} values, expected {n} × {m}",
            init.len()
        )));
    }
    if edges.is_empty() || n < 2 {
        return Ok(init);
    }
    match mode {
        LayoutMode::Deterministic => sequential(edges, init, n, params, curve),
        LayoutMode::Parallel => parallel(edges, init, n, params, curve),
    }
}

fn sequential(
    edges: &[Edge],
    mut coords: Vec<f64>,
    n: usize,
    params: &ReductionParams,
    curve: Curve,
) -> Result<Vec<f64>> {
    let m = params.m;
    let (a, b) = (curve.a, curve.b);
    let per_sample = sampling_schedule(edges, params.epochs);
    let mut next_sample = per_sample.clone();
    let mut rng = rng::stream(params.seed, rng::STREAM_LAYOUT);
    let mut delta = vec![0.0; m];

    for epoch in 0..params.epochs {
        let alpha = params.initial_lr * (1.0 - epoch as f64 / params.epochs as f64);
        for (e, edge) in edges.iter().enumerate() {
            if next_sample[e] > (epoch + 1) as f64 {
                continue;
            }
            let (i, j) = (edge.from, edge.to);
            let dist_sq = diff(&coords, i, j, m, &mut delta);
            let coef = attractive_coefficient(dist_sq, a, b);
            for d in 0..m {
                let g = clip(coef * delta[d]) * alpha;
                coords[i * m + d] += g;
                coords[j * m + d] -= g;
            }
            next_sample[e] += per_sample[e];

            for _ in 0..params.negative_rate {
                let k = rng.gen_range(0..n);
                if k == i {
                    continue;
                }
                let dist_sq = diff(&coords, i, k, m, &mut delta);
                let coef = if dist_sq > 0.0 {
                    repulsive_coefficient(dist_sq, a, b)
                } else {
                    0.0
                };
                for d in 0..m {
                    let g = if coef > 0.0 { clip(coef * delta[d]) } else { CLIP };
                    coords[i * m + d] += g * alpha;
                }
            }
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { epoch });
        }
    }
    Ok(coords)
}

fn diff(coords: &[f64], i: usize, j: usize, m: usize, out: &mut [f64]) -> f64 {
    let mut sq = 0.0;
    for d in 0..m {
        let v = coords[i * m + d] - coords[j * m + d];
        out[d] = v;
        sq += v * v;
    }
    sq
}

// Hogwild-style variant: coordinates live in relaxed atomics so concurrent
// read-modify-write races lose updates instead of tearing values.
fn parallel(
    edges: &[Edge],
    init: Vec<f64>,
    n: usize,
    params: &ReductionParams,
    curve: Curve,
) -> Result<Vec<f64>> {
    let m = params.m;
    let (a, b) = (curve.a, curve.b);
    let coords: Vec<AtomicU64> = init.iter().map(|x| AtomicU64::new(x.to_bits())).collect();
    let load = |idx: usize| f64::from_bits(coords[idx].load(Ordering::Relaxed));
    let add = |idx: usize, v: f64| {
        let cur = f64::from_bits(coords[idx].load(Ordering::Relaxed));
        coords[idx].store((cur + v).to_bits(), Ordering::Relaxed);
    };

    let per_sample = sampling_schedule(edges, params.epochs);
    let mut next_sample = per_sample.clone();
    let chunk = edges.len().div_ceil(rayon::current_num_threads().max(1) * 4).max(1);

    for epoch in 0..params.epochs {
        let alpha = params.initial_lr * (1.0 - epoch as f64 / params.epochs as f64);
        next_sample
            .par_chunks_mut(chunk)
            .zip(edges.par_chunks(chunk))
            .zip(per_sample.par_chunks(chunk))
            .enumerate()
            .for_each(|(c, ((next, edge_chunk), per))| {
                let stream = rng::STREAM_LAYOUT + 1 + (epoch as u64) * 1_000_003 + c as u64;
                let mut rng = rng::stream(params.seed, stream);
                let mut delta = vec![0.0; m];
                for (e, edge) in edge_chunk.iter().enumerate() {
                    if next[e] > (epoch + 1) as f64 {
                        continue;
                    }
                    let (i, j) = (edge.from, edge.to);
                    let mut dist_sq = 0.0;
                    for d in 0..m {
                        delta[d] = load(i * m + d) - load(j * m + d);
                        dist_sq += delta[d] * delta[d];
                    }
                    let coef = attractive_coefficient(dist_sq, a, b);
                    for d in 0..m {
                        let g = clip(coef * delta[d]) * alpha;
                        add(i * m + d, g);
                        add(j * m + d, -g);
                    }
                    next[e] += per[e];
                    for _ in 0..params.negative_rate {
                        let k = rng.gen_range(0..n);
                        if k == i {
                            continue;
                        }
                        let mut dist_sq = 0.0;
                        for d in 0..m {
                            delta[d] = load(i * m + d) - load(k * m + d);
                            dist_sq += delta[d] * delta[d];
                        }
                        let coef = if dist_sq > 0.0 {
                            repulsive_coefficient(dist_sq, a, b)
                        } else {
                            0.0
                        };
                        for d in 0..m {
                            let g = if coef > 0.0 { clip(coef * delta[d]) } else { CLIP };
                            add(i * m + d, g * alpha);
                        }
                    }
                }
            });
        if (0..n * m).any(|idx| !load(idx).is_finite()) {
            return Err(Error::NonFinite { epoch });
        }
    }
    Ok(coords
        .into_iter()
        .map(|c| f64::from_bits(c.into_inner()))
        .collect())
}
