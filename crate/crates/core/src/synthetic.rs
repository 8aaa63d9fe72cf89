//! Seeded synthetic datasets for tests and sanity runs.

use rand_distr::{Distribution, Normal};

use crate::dataset::{digest_parts, Dataset};
use crate::error::Result;
use crate::rng;

/// Isotropic Gaussian blobs inside the unit cube.
///
/// Class `c` is centred at `0.5 + offset·e_(c mod dim)`, so any two centres
/// are `offset·√2` apart; with `sigma` the per-coordinate noise the
/// separation is `offset·√2 / sigma` standard deviations. Values are clamped
/// to `[0, 1]` (never active for the defaults used in tests).
pub fn gaussian_blobs(
    classes: usize,
    per_class: usize,
    dim: usize,
    offset: f64,
    sigma: f64,
    seed: u64,
) -> Result<Dataset> {
    let normal = Normal::new(0.0, sigma).expect("sigma must be finite and positive");
    let mut samples = Vec::with_capacity(classes * per_class * dim);
    let mut labels = Vec::with_capacity(classes * per_class);
    let mut rng = rng::stream(seed, 0);
    // interleave classes so index order carries no label information
    for _ in 0..per_class {
        for c in 0..classes {
            for d in 0..dim {
                let centre = if d == c % dim { 0.5 + offset } else { 0.5 };
                let v: f64 = centre + normal.sample(&mut rng);
                samples.push(v.clamp(0.0, 1.0));
            }
            labels.push(c);
        }
    }
    let hash = digest_parts(&[
        b"gaussian_blobs",
        &(classes as u64).to_be_bytes(),
        &(per_class as u64).to_be_bytes(),
        &(dim as u64).to_be_bytes(),
        &offset.to_be_bytes(),
        &sigma.to_be_bytes(),
        &seed.to_be_bytes(),
    ]);
    Dataset::new(
        samples,
        dim,
        labels,
        (0..classes).map(|c| format!("blob{c}")).collect(),
        format!("blobs:c={classes},n={per_class},d={dim},off={offset},sd={sigma},seed={seed}"),
        hash,
    )
}

/// The three-blob benchmark: 60 points per class in 50-D, centres more
/// than 10σ apart (offset 0.15, σ = 0.02 gives ≈ 10.6σ).
pub fn three_blobs(seed: u64) -> Dataset {
    gaussian_blobs(3, 60, 50, 0.15, 0.02, seed).expect("fixed parameters are valid")
}
