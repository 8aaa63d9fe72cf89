use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Exact k-nearest-neighbour lists, row-major `n × k`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborLists {
    pub k: usize,
    pub ids: Vec<usize>,
    pub dists: Vec<f64>,
}

impl NeighborLists {
    pub fn len(&self) -> usize {
        self.ids.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids_of(&self, i: usize) -> &[usize] {
        &self.ids[i * self.k..(i + 1) * self.k]
    }

    pub fn dists_of(&self, i: usize) -> &[f64] {
        &self.dists[i * self.k..(i + 1) * self.k]
    }
}

pub fn knn_graph(dataset: &Dataset, k: usize) -> Result<NeighborLists> {
    knn_points(dataset.samples(), dataset.dim(), k)
}

/// Brute-force Euclidean kNN over row-major points. Self is excluded and
/// ties are broken by ascending index. Rows are computed independently, so
/// the parallel split has no effect on the result.
pub fn knn_points(points: &[f64], dim: usize, k: usize) -> Result<NeighborLists> {
    let n = if dim == 0 { 0 } else { points.len() / dim };
    if k == 0 || k >= n {
        return Err(Error::Parameter(format!(
            "k_neighbors = {k} requires 1 ≤ k < n = {n}"
        )));
    }

    let rows: Vec<Vec<(f64, usize)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = &points[i * dim..(i + 1) * dim];
            let mut cand: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (squared_distance(a, &points[j * dim..(j + 1) * dim]), j))
                .collect();
            let by_dist_then_index =
                |x: &(f64, usize), y: &(f64, usize)| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1));
            cand.select_nth_unstable_by(k - 1, by_dist_then_index);
            cand.truncate(k);
            cand.sort_unstable_by(by_dist_then_index);
            cand
        })
        .collect();

    let mut ids = Vec::with_capacity(n * k);
    let mut dists = Vec::with_capacity(n * k);
    for row in rows {
        for (d2, j) in row {
            ids.push(j);
            dists.push(d2.sqrt());
        }
    }
    Ok(NeighborLists { k, ids, dists })
}

/// Sum of squared differences with four independent accumulators; the
/// association order is fixed, so results are reproducible bit-for-bit.
#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            let d = a[c * 4 + l] - b[c * 4 + l];
            acc[l] += d * d;
        }
    }
    let mut tail = 0.0;
    for t in chunks * 4..a.len() {
        let d = a[t] - b[t];
        tail += d * d;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}
