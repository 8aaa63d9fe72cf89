use std::collections::BTreeMap;

use super::knn::NeighborLists;
use super::smooth_knn::SmoothKnn;

/// One direction of a symmetric weighted edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

/// Symmetrises directed memberships with the probabilistic t-conorm
/// `a + b − a·b`. The result lists each undirected pair twice, once per
/// direction with the same weight, sorted by `(from, to)`.
pub fn fuzzy_union(neighbors: &NeighborLists, smooth: &SmoothKnn) -> Vec<Edge> {
    let mut directed: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for i in 0..neighbors.len() {
        let (rho, sigma) = (smooth.rho[i], smooth.sigma[i]);
        for (&j, &d) in neighbors.ids_of(i).iter().zip(neighbors.dists_of(i)) {
            let w = (-(d - rho).max(0.0) / sigma).exp();
            directed.insert((i, j), w);
        }
    }
    union_weights(&directed)
}

pub(crate) fn union_weights(directed: &BTreeMap<(usize, usize), f64>) -> Vec<Edge> {
    let mut sym: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (&(i, j), &w_ij) in directed {
        if i == j {
            continue;
        }
        let w_ji = directed.get(&(j, i)).copied().unwrap_or(0.0);
        let key = (i.min(j), i.max(j));
        // evaluate in canonical (low, high) order so both directions agree
        let (lo_hi, hi_lo) = if i < j { (w_ij, w_ji) } else { (w_ji, w_ij) };
        let s = lo_hi + hi_lo - lo_hi * hi_lo;
        if s > 0.0 {
            sym.insert(key, s);
        }
    }
    let mut edges: Vec<Edge> = sym
        .into_iter()
        .flat_map(|((i, j), w)| {
            [
                Edge {
                    from: i,
                    to: j,
                    weight: w,
                },
                Edge {
                    from: j,
                    to: i,
                    weight: w,
                },
            ]
        })
        .collect();
    edges.sort_by(|a, b| (a.from, a.to).cmp(&(b.from, b.to)));
    edges
}
