//! Centroid-distance ranking and per-class exclusion manifests.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, DatasetView};
use crate::error::{Error, Result};
use crate::json;
use crate::reduction::{Embedding, ReductionParams};
use crate::rng;

pub const MANIFEST_VERSION: u32 = 1;

/// Per-class centroids, spreads and distance rankings in embedded space.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassGeometry {
    pub num_classes: usize,
    pub m: usize,
    /// `C × m`, row-major; also the per-dimension class means.
    pub centroids: Vec<f64>,
    /// Sample standard deviation (n − 1) per class and dimension, `C × m`.
    pub per_dim_std: Vec<f64>,
    pub dist_to_own_centroid: Vec<f64>,
    /// Each class's sample indices by ascending centroid distance, ties by index.
    pub per_class_order: Vec<Vec<usize>>,
    pub labels: Vec<usize>,
    pub dataset_hash: u64,
    pub params: ReductionParams,
}

impl ClassGeometry {
    pub fn centroid(&self, class: usize) -> &[f64] {
        &self.centroids[class * self.m..(class + 1) * self.m]
    }

    pub fn per_dim_mean(&self, class: usize) -> &[f64] {
        self.centroid(class)
    }

    pub fn std(&self, class: usize) -> &[f64] {
        &self.per_dim_std[class * self.m..(class + 1) * self.m]
    }

    pub fn class_size(&self, class: usize) -> usize {
        self.per_class_order[class].len()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

pub fn class_geometry(embedding: &Embedding, labels: &[usize], num_classes: usize) -> Result<ClassGeometry> {
    let (n, m) = (embedding.len(), embedding.dims());
    if labels.len() != n {
        return Err(Error::Consistency(format!(
            "{} labels for an embedding of {n} points",
            labels.len()
        )));
    }
    if let Some(&l) = labels.iter().find(|&&l| l >= num_classes) {
        return Err(Error::Range(format!("label {l} ≥ {num_classes} classes")));
    }

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    for (i, &l) in labels.iter().enumerate() {
        members[l].push(i);
    }
    if let Some(class) = members.iter().position(Vec::is_empty) {
        return Err(Error::Geometry {
            class,
            detail: "class has no samples".into(),
        });
    }

    let mut centroids = vec![0.0; num_classes * m];
    let mut per_dim_std = vec![0.0; num_classes * m];
    for (c, idx) in members.iter().enumerate() {
        let count = idx.len() as f64;
        for d in 0..m {
            let mean = idx.iter().map(|&i| embedding.point(i)[d]).sum::<f64>() / count;
            centroids[c * m + d] = mean;
            if idx.len() > 1 {
                let ss: f64 = idx
                    .iter()
                    .map(|&i| (embedding.point(i)[d] - mean).powi(2))
                    .sum();
                per_dim_std[c * m + d] = (ss / (count - 1.0)).sqrt();
            }
        }
    }

    let dist_to_own_centroid: Vec<f64> = (0..n)
        .map(|i| {
            let c = &centroids[labels[i] * m..(labels[i] + 1) * m];
            embedding
                .point(i)
                .iter()
                .zip(c)
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect();

    let per_class_order = members
        .into_iter()
        .map(|mut idx| {
            idx.sort_by(|&a, &b| {
                dist_to_own_centroid[a]
                    .total_cmp(&dist_to_own_centroid[b])
                    .then(a.cmp(&b))
            });
            idx
        })
        .collect();

    Ok(ClassGeometry {
        num_classes,
        m,
        centroids,
        per_dim_std,
        dist_to_own_centroid,
        per_class_order,
        labels: labels.to_vec(),
        dataset_hash: embedding.dataset_hash,
        params: embedding.params.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Drop the samples nearest their class centroid.
    Central,
    /// Drop the samples furthest from their class centroid.
    Lateral,
    /// Drop a uniform random subset of each class.
    Random,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Central, Strategy::Lateral, Strategy::Random];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Central => "central",
            Strategy::Lateral => "lateral",
            Strategy::Random => "random",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Strategy::Central => "Central Exclusion",
            Strategy::Lateral => "Lateral Exclusion",
            Strategy::Random => "Random Exclusion",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "central" => Ok(Strategy::Central),
            "lateral" => Ok(Strategy::Lateral),
            "random" => Ok(Strategy::Random),
            other => Err(Error::Parameter(format!("unknown strategy `{other}`"))),
        }
    }
}

/// The excluded sample indices for one `(strategy, percent)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExclusionManifest {
    pub version: u32,
    pub strategy: Strategy,
    pub percent: f64,
    /// Only meaningful for [`Strategy::Random`].
    pub seed: Option<u64>,
    #[serde(with = "crate::json::hex_u64")]
    pub dataset_hash: u64,
    /// Canonical rendering of the reduction parameters.
    pub embedding_params: String,
    pub per_class_quota: Vec<usize>,
    pub excluded: Vec<usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub provenance: BTreeMap<String, String>,
}

impl ExclusionManifest {
    pub fn to_json(&self) -> Result<String> {
        json::to_canonical_string(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let manifest: ExclusionManifest = json::from_str(text)?;
        manifest.check()?;
        Ok(manifest)
    }

    /// Structural invariants: strictly ascending indices whose count is the
    /// quota total.
    pub fn check(&self) -> Result<()> {
        if self.excluded.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Consistency(
                "excluded indices must be strictly ascending".into(),
            ));
        }
        let total: usize = self.per_class_quota.iter().sum();
        if total != self.excluded.len() {
            return Err(Error::Consistency(format!(
                "{} excluded indices but quotas sum to {total}",
                self.excluded.len()
            )));
        }
        Ok(())
    }

    /// Suggested file name, e.g. `manifest-central-2.json`.
    pub fn file_name(&self) -> String {
        format!("manifest-{}-{}.json", self.strategy, self.percent)
    }
}

/// `round-half-up(percent / 100 × class_size)`.
pub fn class_quota(percent: f64, class_size: usize) -> usize {
    // multiply before dividing so e.g. 2.5% of 20 lands exactly on 0.5
    (percent * class_size as f64 / 100.0 + 0.5).floor() as usize
}

pub fn select_exclusions(
    geometry: &ClassGeometry,
    strategy: Strategy,
    percent: f64,
    seed: u64,
) -> Result<ExclusionManifest> {
    if !(percent > 0.0 && percent < 100.0) {
        return Err(Error::Parameter(format!(
            "exclusion percent must lie in (0, 100), got {percent}"
        )));
    }
    let mut quotas = Vec::with_capacity(geometry.num_classes);
    let mut excluded = Vec::new();
    for (class, order) in geometry.per_class_order.iter().enumerate() {
        let size = order.len();
        let quota = class_quota(percent, size);
        if quota >= size {
            return Err(Error::EmptiesClass { class, size });
        }
        quotas.push(quota);
        match strategy {
            Strategy::Central => excluded.extend_from_slice(&order[..quota]),
            Strategy::Lateral => excluded.extend_from_slice(&order[size - quota..]),
            Strategy::Random => {
                let mut members = order.clone();
                members.sort_unstable();
                let mut rng = rng::stream(seed, class as u64);
                let picks = rand::seq::index::sample(&mut rng, size, quota);
                excluded.extend(picks.into_iter().map(|p| members[p]));
            }
        }
    }
    excluded.sort_unstable();

    Ok(ExclusionManifest {
        version: MANIFEST_VERSION,
        strategy,
        percent,
        seed: (strategy == Strategy::Random).then_some(seed),
        dataset_hash: geometry.dataset_hash,
        embedding_params: geometry.params.canonical(),
        per_class_quota: quotas,
        excluded,
        provenance: BTreeMap::new(),
    })
}

/// The samples a manifest keeps, in original order.
pub fn apply_manifest<'a>(dataset: &'a Dataset, manifest: &ExclusionManifest) -> Result<DatasetView<'a>> {
    if manifest.dataset_hash != dataset.content_hash() {
        return Err(Error::Provenance {
            expected: manifest.dataset_hash,
            found: dataset.content_hash(),
        });
    }
    manifest.check()?;
    if let Some(&last) = manifest.excluded.last() {
        if last >= dataset.len() {
            return Err(Error::Consistency(format!(
                "manifest excludes index {last} but dataset has {} samples",
                dataset.len()
            )));
        }
    }
    let mut kept = Vec::with_capacity(dataset.len() - manifest.excluded.len());
    let mut skip = manifest.excluded.iter().peekable();
    for i in 0..dataset.len() {
        if skip.peek() == Some(&&i) {
            skip.next();
        } else {
            kept.push(i);
        }
    }
    dataset.view(kept)
}
