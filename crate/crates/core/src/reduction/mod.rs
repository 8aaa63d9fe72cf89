//! Nonlinear dimensionality reduction in the UMAP family.
//!
//! The pipeline is exact brute-force kNN, smooth-kNN bandwidth calibration,
//! fuzzy-union symmetrisation, a fitted low-dimensional similarity curve,
//! spectral (or random) initialisation and a negative-sampling layout.
//! Every random draw comes from a ChaCha stream keyed by `params.seed`, so a
//! single-threaded run is a pure function of `(dataset, params)`.

mod curve;
mod file;
mod fuzzy;
mod knn;
mod layout;
mod smooth_knn;
mod spectral;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use curve::{fit_ab, target_curve, Curve};
pub use file::{read_embedding, write_embedding, EMBEDDING_MAGIC};
pub use fuzzy::{fuzzy_union, Edge};
pub use knn::{knn_graph, knn_points, NeighborLists};
pub use layout::{attractive_coefficient, optimize_layout, repulsive_coefficient, LayoutMode};
pub use smooth_knn::{calibrate_smooth_knn, membership_sum, SmoothKnn};
pub use spectral::{random_init, spectral_init};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Init {
    Spectral,
    Random,
}

impl fmt::Display for Init {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Init::Spectral => "spectral",
            Init::Random => "random",
        })
    }
}

impl FromStr for Init {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(Init::Spectral),
            "random" => Ok(Init::Random),
            other => Err(Error::Parameter(format!("unknown init `{other}`"))),
        }
    }
}

/// Hyperparameters of a reduction. Recorded verbatim in every embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReductionParams {
    pub m: usize,
    pub k_neighbors: usize,
    pub min_dist: f64,
    pub spread: f64,
    pub epochs: usize,
    pub negative_rate: usize,
    pub initial_lr: f64,
    pub seed: u64,
    pub init: Init,
}

impl Default for ReductionParams {
    fn default() -> Self {
        ReductionParams {
            m: 3,
            k_neighbors: 15,
            min_dist: 0.1,
            spread: 1.0,
            epochs: 300,
            negative_rate: 5,
            initial_lr: 1.0,
            seed: 0,
            init: Init::Spectral,
        }
    }
}

impl ReductionParams {
    pub fn with_dims(mut self, m: usize) -> Self {
        self.m = m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Parameter("target dimension m must be ≥ 1".into()));
        }
        if self.k_neighbors < 2 {
            return Err(Error::Parameter("k_neighbors must be ≥ 2".into()));
        }
        if !(self.min_dist >= 0.0 && self.min_dist.is_finite()) {
            return Err(Error::Parameter("min_dist must be ≥ 0".into()));
        }
        if !(self.spread > 0.0 && self.spread.is_finite()) {
            return Err(Error::Parameter("spread must be > 0".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Parameter("epochs must be ≥ 1".into()));
        }
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return Err(Error::Parameter("initial_lr must be > 0".into()));
        }
        Ok(())
    }

    /// Whitespace-free `key=value;...` rendering, parseable by `FromStr`.
    pub fn canonical(&self) -> String {
        format!(
            "m={};k={};min_dist={};spread={};epochs={};negative_rate={};lr={};seed={};init={}",
            self.m,
            self.k_neighbors,
            self.min_dist,
            self.spread,
            self.epochs,
            self.negative_rate,
            self.initial_lr,
            self.seed,
            self.init
        )
    }
}

impl FromStr for ReductionParams {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = ReductionParams::default();
        let bad = |k: &str, v: &str| Error::Parameter(format!("bad value `{v}` for `{k}`"));
        for field in s.split(';').filter(|f| !f.is_empty()) {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| Error::Parameter(format!("`{field}` is not key=value")))?;
            match k {
                "m" => p.m = v.parse().map_err(|_| bad(k, v))?,
                "k" => p.k_neighbors = v.parse().map_err(|_| bad(k, v))?,
                "min_dist" => p.min_dist = v.parse().map_err(|_| bad(k, v))?,
                "spread" => p.spread = v.parse().map_err(|_| bad(k, v))?,
                "epochs" => p.epochs = v.parse().map_err(|_| bad(k, v))?,
                "negative_rate" => p.negative_rate = v.parse().map_err(|_| bad(k, v))?,
                "lr" => p.initial_lr = v.parse().map_err(|_| bad(k, v))?,
                "seed" => p.seed = v.parse().map_err(|_| bad(k, v))?,
                "init" => p.init = v.parse()?,
                _ => return Err(Error::Parameter(format!("unknown parameter `{k}`"))),
            }
        }
        p.validate()?;
        Ok(p)
    }
}

/// `n × m` coordinates, index-aligned with the dataset they were fit on.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    coords: Vec<f64>,
    n: usize,
    m: usize,
    pub params: ReductionParams,
    pub dataset_hash: u64,
}

impl Embedding {
    pub fn new(coords: Vec<f64>, m: usize, params: ReductionParams, dataset_hash: u64) -> Result<Self> {
        if m == 0 || coords.len() % m != 0 {
            return Err(Error::Parameter(format!(
                "{} coordinates do not form rows of width {m}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Parameter("embedding contains NaN or Inf".into()));
        }
        Ok(Embedding {
            n: coords.len() / m,
            coords,
            m,
            params,
            dataset_hash,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dims(&self) -> usize {
        self.m
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.m..(i + 1) * self.m]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Applies `f` to every coordinate row, keeping provenance.
    pub fn map_points(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Result<Embedding> {
        let mut coords = Vec::with_capacity(self.coords.len());
        for i in 0..self.n {
            let row = f(self.point(i));
            if row.len() != self.m {
                return Err(Error::Parameter("mapped row changed dimension".into()));
            }
            coords.extend(row);
        }
        Embedding::new(coords, self.m, self.params.clone(), self.dataset_hash)
    }
}

/// Side information produced while reducing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReductionDiagnostics {
    pub a: f64,
    pub b: f64,
    pub clamped_bandwidths: usize,
    pub edges: usize,
    pub init_used: Option<Init>,
    pub warnings: Vec<String>,
}

pub fn reduce(dataset: &Dataset, params: &ReductionParams) -> Result<Embedding> {
    reduce_with_diagnostics(dataset, params, LayoutMode::Deterministic).map(|(e, _)| e)
}

pub fn reduce_with_diagnostics(
    dataset: &Dataset,
    params: &ReductionParams,
    mode: LayoutMode,
) -> Result<(Embedding, ReductionDiagnostics)> {
    params.validate()?;
    let neighbors = knn_graph(dataset, params.k_neighbors)?;
    let smooth = calibrate_smooth_knn(&neighbors.dists, params.k_neighbors);
    let edges = fuzzy_union(&neighbors, &smooth);
    let curve = fit_ab(params.min_dist, params.spread)?;

    let mut diagnostics = ReductionDiagnostics {
        a: curve.a,
        b: curve.b,
        clamped_bandwidths: smooth.clamped,
        edges: edges.len(),
        init_used: None,
        warnings: smooth.warnings.clone(),
    };

    let n = dataset.len();
    let init = match params.init {
        Init::Spectral => match spectral_init(n, &edges, params.m) {
            Some(coords) => {
                diagnostics.init_used = Some(Init::Spectral);
                coords
            }
            None => {
                let msg = "spectral initialisation did not converge; using random init".to_string();
                log::warn!("{msg}");
                diagnostics.warnings.push(msg);
                diagnostics.init_used = Some(Init::Random);
                random_init(n, params.m, params.seed)
            }
        },
        Init::Random => {
            diagnostics.init_used = Some(Init::Random);
            random_init(n, params.m, params.seed)
        }
    };

    let coords = optimize_layout(&edges, init, n, params, curve, mode)?;
    let embedding = Embedding::new(coords, params.m, params.clone(), dataset.content_hash())?;
    Ok((embedding, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_params_round_trip() {
        let p = ReductionParams {
            m: 5,
            min_dist: 0.25,
            seed: 99,
            init: Init::Random,
            ..Default::default()
        };
        let s = p.canonical();
        assert!(!s.contains(' '));
        assert_eq!(s.parse::<ReductionParams>().unwrap(), p);
    }

    #[test]
    fn params_validation() {
        assert!(ReductionParams::default().with_dims(0).validate().is_err());
        let p = ReductionParams {
            k_neighbors: 1,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        assert!("m=3;bogus=1".parse::<ReductionParams>().is_err());
    }

    #[test]
    fn embedding_rejects_non_finite() {
        assert!(Embedding::new(vec![0.0, f64::NAN], 2, ReductionParams::default(), 0).is_err());
        assert!(Embedding::new(vec![0.0; 3], 2, ReductionParams::default(), 0).is_err());
    }
}
