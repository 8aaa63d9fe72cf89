const BISECTION_ITERATIONS: usize = 64;
const TOLERANCE: f64 = 1e-5;
const LOWER_CLAMP: f64 = 1e-3;
const UPPER_CLAMP: f64 = 1e3;

/// Per-point distance offsets and calibrated bandwidths.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothKnn {
    pub rho: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Rows whose bandwidth ended on a clamp bound.
    pub clamped: usize,
    pub warnings: Vec<String>,
}

/// `Σ_j exp(−max(0, d_j − rho) / sigma)` over one neighbour row.
pub fn membership_sum(row: &[f64], rho: f64, sigma: f64) -> f64 {
    row.iter().map(|&d| (-(d - rho).max(0.0) / sigma).exp()).sum()
}

/// Solves, row by row, `membership_sum(row, rho, sigma) = log2(k)` for
/// `sigma` by bisection, where `rho` is the row's first positive distance.
/// Sigma is confined to `[1e-3, 1e3] × mean row distance`; rows that cannot
/// meet the target inside that band are clamped and counted.
pub fn calibrate_smooth_knn(neighbor_dists: &[f64], k: usize) -> SmoothKnn {
    assert!(k > 0 && neighbor_dists.len() % k == 0);
    let target = (k as f64).log2();
    let n = neighbor_dists.len() / k;
    let mut out = SmoothKnn {
        rho: Vec::with_capacity(n),
        sigma: Vec::with_capacity(n),
        clamped: 0,
        warnings: Vec::new(),
    };

    for (i, row) in neighbor_dists.chunks_exact(k).enumerate() {
        let rho = row.iter().copied().find(|&d| d > 0.0).unwrap_or(0.0);
        let mean = row.iter().sum::<f64>() / k as f64;
        if mean <= 0.0 {
            out.rho.push(rho);
            out.sigma.push(LOWER_CLAMP);
            out.clamped += 1;
            out.warnings
                .push(format!("point {i}: all neighbour distances are zero"));
            continue;
        }

        let (lo_bound, hi_bound) = (LOWER_CLAMP * mean, UPPER_CLAMP * mean);
        let at_lo = membership_sum(row, rho, lo_bound);
        let at_hi = membership_sum(row, rho, hi_bound);
        let (sigma, clamped) = if at_lo >= target {
            (lo_bound, (at_lo - target).abs() >= TOLERANCE)
        } else if at_hi <= target {
            (hi_bound, (at_hi - target).abs() >= TOLERANCE)
        } else {
            (bisect(row, rho, target, lo_bound, hi_bound), false)
        };
        if clamped {
            out.clamped += 1;
            out.warnings.push(format!(
                "point {i}: bandwidth clamped to {sigma:e} (membership sum cannot reach log2(k))"
            ));
        }
        out.rho.push(rho);
        out.sigma.push(sigma);
    }
    out
}

// The membership sum is increasing in sigma; bisect geometrically since the
// bracket spans six orders of magnitude.
fn bisect(row: &[f64], rho: f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut mid = (lo * hi).sqrt();
    for _ in 0..BISECTION_ITERATIONS {
        mid = (lo * hi).sqrt();
        let s = membership_sum(row, rho, mid);
        if (s - target).abs() < TOLERANCE {
            break;
        }
        if s > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    mid
}
