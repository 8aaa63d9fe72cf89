use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use severance_core::reduction::{
    calibrate_smooth_knn, fit_ab, fuzzy_union, knn_points, membership_sum, reduce,
    reduce_with_diagnostics, target_curve, Init, LayoutMode, ReductionParams,
};
use severance_core::synthetic::{gaussian_blobs, three_blobs};
use severance_core::Embedding;

fn random_points(n: usize, dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n * dim).map(|_| rng.gen::<f64>()).collect()
}

// Every pairwise distance, sorted by (distance, index).
fn brute_force_knn(points: &[f64], dim: usize, k: usize) -> Vec<Vec<(f64, usize)>> {
    let n = points.len() / dim;
    (0..n)
        .map(|i| {
            let mut row: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d2: f64 = (0..dim)
                        .map(|d| (points[i * dim + d] - points[j * dim + d]).powi(2))
                        .sum();
                    (d2.sqrt(), j)
                })
                .collect();
            row.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            row.truncate(k);
            row
        })
        .collect()
}

#[test]
fn knn_matches_exhaustive_oracle() {
    for (n, dim, k, seed) in [(150, 7, 10, 1), (60, 2, 1, 2), (40, 30, 39, 3)] {
        let pts = random_points(n, dim, seed);
        let got = knn_points(&pts, dim, k).unwrap();
        let want = brute_force_knn(&pts, dim, k);
        for i in 0..n {
            let ids: Vec<usize> = want[i].iter().map(|p| p.1).collect();
            assert_eq!(got.ids_of(i), &ids[..], "row {i}");
            for (g, w) in got.dists_of(i).iter().zip(&want[i]) {
                assert!((g - w.0).abs() <= 1e-12 * w.0.max(1.0));
            }
        }
    }
}

#[test]
fn knn_rejects_bad_k() {
    let pts = random_points(5, 2, 0);
    assert!(knn_points(&pts, 2, 0).is_err());
    assert!(knn_points(&pts, 2, 5).is_err());
}

#[test]
fn bandwidth_matches_closed_form() {
    // row [1, 2, 3] with rho = 1: 1 + u + u² = log2 3 where u = exp(−1/σ)
    let target = 3f64.log2();
    let u = (-1.0 + (1.0 + 4.0 * (target - 1.0)).sqrt()) / 2.0;
    let sigma = -1.0 / u.ln();
    assert!((sigma - 1.13).abs() < 0.01);

    let s = calibrate_smooth_knn(&[1.0, 2.0, 3.0], 3);
    assert_eq!(s.rho[0], 1.0);
    assert!((s.sigma[0] - sigma).abs() < 1e-4, "{} vs {sigma}", s.sigma[0]);
    assert!((membership_sum(&[1.0, 2.0, 3.0], 1.0, s.sigma[0]) - target).abs() < 1e-4);
}

#[test]
fn bandwidths_hit_target_on_random_rows() {
    let pts = random_points(300, 5, 9);
    let k = 15;
    let nl = knn_points(&pts, 5, k).unwrap();
    let s = calibrate_smooth_knn(&nl.dists, k);
    for i in 0..300 {
        if s.sigma[i] > 0.0 {
            let total = membership_sum(nl.dists_of(i), s.rho[i], s.sigma[i]);
            assert!((total - (k as f64).log2()).abs() < 1e-3, "row {i}: {total}");
        }
    }
    assert_eq!(s.clamped, 0);
}

#[test]
fn fuzzy_union_is_symmetric_and_matches_formula() {
    let pts = random_points(120, 4, 11);
    let k = 8;
    let nl = knn_points(&pts, 4, k).unwrap();
    let s = calibrate_smooth_knn(&nl.dists, k);
    let edges = fuzzy_union(&nl, &s);

    let mut directed = BTreeMap::new();
    for i in 0..120 {
        for (&j, &d) in nl.ids_of(i).iter().zip(nl.dists_of(i)) {
            directed.insert((i, j), (-(d - s.rho[i]).max(0.0) / s.sigma[i]).exp());
        }
    }
    let mut got = BTreeMap::new();
    for e in &edges {
        assert!(e.weight > 0.0 && e.weight <= 1.0);
        assert!(got.insert((e.from, e.to), e.weight).is_none(), "duplicate edge");
    }
    for (&(i, j), &w) in &got {
        assert_eq!(got.get(&(j, i)), Some(&w), "asymmetric edge {i}-{j}");
        let a = directed.get(&(i, j)).copied().unwrap_or(0.0);
        let b = directed.get(&(j, i)).copied().unwrap_or(0.0);
        assert!((w - (a + b - a * b)).abs() < 1e-12);
    }
    for &(i, j) in directed.keys() {
        assert!(got.contains_key(&(i, j)));
    }
}

// Least squares over the same sample grid, minimised by a coarse-to-fine
// grid search instead of Levenberg–Marquardt.
fn grid_fit(min_dist: f64, spread: f64) -> (f64, f64) {
    let xs: Vec<f64> = (0..300).map(|i| 3.0 * spread * i as f64 / 299.0).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| target_curve(x, min_dist, spread)).collect();
    let sse = |a: f64, b: f64| -> f64 {
        xs.iter()
            .zip(&ys)
            .map(|(&x, &y)| (1.0 / (1.0 + a * x.powf(2.0 * b)) - y).powi(2))
            .sum()
    };
    let (mut best_a, mut best_b) = (1.0, 1.0);
    let (mut a_lo, mut a_hi, mut b_lo, mut b_hi) = (0.05, 5.0, 0.3, 2.0);
    for _ in 0..4 {
        let mut best = f64::INFINITY;
        for i in 0..=60 {
            for j in 0..=60 {
                let a = a_lo + (a_hi - a_lo) * i as f64 / 60.0;
                let b = b_lo + (b_hi - b_lo) * j as f64 / 60.0;
                let e = sse(a, b);
                if e < best {
                    best = e;
                    best_a = a;
                    best_b = b;
                }
            }
        }
        let (da, db) = ((a_hi - a_lo) / 20.0, (b_hi - b_lo) / 20.0);
        a_lo = (best_a - da).max(1e-3);
        a_hi = best_a + da;
        b_lo = (best_b - db).max(1e-3);
        b_hi = best_b + db;
    }
    (best_a, best_b)
}

#[test]
fn curve_fit_matches_grid_search() {
    for (md, s) in [(0.1, 1.0), (0.0, 1.0), (0.5, 1.0), (0.25, 2.0)] {
        let c = fit_ab(md, s).unwrap();
        let (a, b) = grid_fit(md, s);
        assert!((c.a - a).abs() < 0.02, "min_dist {md} spread {s}: a {} vs {a}", c.a);
        assert!((c.b - b).abs() < 0.01, "min_dist {md} spread {s}: b {} vs {b}", c.b);
    }
}

#[test]
fn curve_fit_scales_with_spread() {
    // scaling x by 2 maps a ↦ a·2^(−2b) with b unchanged
    let one = fit_ab(0.0, 1.0).unwrap();
    let two = fit_ab(0.0, 2.0).unwrap();
    assert!((one.b - two.b).abs() < 1e-4);
    assert!((two.a - one.a * 2f64.powf(-2.0 * one.b)).abs() < 1e-3);
}

mod oracles;

fn nearest_centroid_agreement(emb: &Embedding, labels: &[usize], classes: usize) -> f64 {
    oracles::nearest_centroid_agreement(emb.coords(), emb.dims(), labels, classes)
}

#[test]
fn two_clusters_separate() {
    let ds = gaussian_blobs(2, 80, 20, 0.2, 0.02, 4).unwrap();
    let params = ReductionParams::default().with_dims(2);
    let emb = reduce(&ds, &params).unwrap();
    assert_eq!(nearest_centroid_agreement(&emb, ds.labels(), 2), 1.0);
}

#[test]
fn blobs_embed_deterministically() {
    let ds = three_blobs(5);
    let params = ReductionParams::default();
    let a = reduce(&ds, &params).unwrap();
    let b = reduce(&ds, &params).unwrap();
    assert_eq!(a.coords(), b.coords());
    assert_eq!(a.dataset_hash, ds.content_hash());
    assert!(nearest_centroid_agreement(&a, ds.labels(), 3) >= 0.99);

    let other = reduce(&ds, &ReductionParams { seed: 1, ..params.clone() }).unwrap();
    assert_ne!(a.coords(), other.coords());
}

#[test]
fn random_init_and_parallel_layout_still_separate() {
    let ds = three_blobs(6);
    let params = ReductionParams {
        init: Init::Random,
        ..ReductionParams::default()
    };
    let (emb, diag) = reduce_with_diagnostics(&ds, &params, LayoutMode::Parallel).unwrap();
    assert_eq!(diag.init_used, Some(Init::Random));
    assert!(emb.coords().iter().all(|x| x.is_finite()));
    assert!(nearest_centroid_agreement(&emb, ds.labels(), 3) >= 0.99);
}
