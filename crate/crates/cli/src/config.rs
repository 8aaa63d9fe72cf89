use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use severance_core::dataset::digest_parts;
use severance_core::harness::{SurrogateConfig, DEFAULT_PERCENTS, DEFAULT_TRIALS};
use severance_core::severability::TrimMode;
use severance_core::{load_cifar_bin, load_idx, load_matrix, Dataset, ReductionParams, Strategy};

/// A problem with the configuration or its inputs, reported with exit
/// code 2.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Idx,
    Cifar10,
    Cifar100,
    Matrix,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    /// Caption used in tables; defaults to the config file stem.
    pub name: Option<String>,
    pub format: Format,
    /// `idx`: images then labels. `cifar10`/`cifar100`: record files.
    /// `matrix`: a single table.
    pub train: Vec<PathBuf>,
    #[serde(default)]
    pub test: Vec<PathBuf>,
    /// Optional class-stratified subset of the training split.
    pub subset: Option<usize>,
    #[serde(default)]
    pub subset_seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExclusionSection {
    pub strategies: Vec<Strategy>,
    pub percents: Vec<f64>,
    /// Seed of the Random strategy.
    pub seed: u64,
    /// Embedding to rank by; defaults to `embedding.txt` in the output
    /// directory.
    pub embedding: Option<PathBuf>,
}

impl Default for ExclusionSection {
    fn default() -> Self {
        ExclusionSection {
            strategies: vec![Strategy::Lateral, Strategy::Central, Strategy::Random],
            percents: DEFAULT_PERCENTS.to_vec(),
            seed: 0,
            embedding: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeverabilitySection {
    pub trim_k: Vec<f64>,
    pub mode: TrimMode,
    pub embedding: Option<PathBuf>,
}

impl Default for SeverabilitySection {
    fn default() -> Self {
        SeverabilitySection {
            trim_k: vec![1.0, 2.0, 3.0],
            mode: TrimMode::AxisAligned,
            embedding: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub trials: usize,
    pub base_seed: u64,
    pub alpha: f64,
    /// Dimensionalities for `compare-dims`.
    pub dims: Vec<usize>,
    /// Precomputed embedding of the training split; computed on demand
    /// when absent.
    pub embedding: Option<PathBuf>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            trials: DEFAULT_TRIALS,
            base_seed: 0,
            alpha: severance_core::stats::DEFAULT_ALPHA,
            dims: vec![2, 3, 5, 10],
            embedding: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub dataset: DatasetSection,
    #[serde(default)]
    pub reduction: ReductionParams,
    #[serde(default)]
    pub exclusion: ExclusionSection,
    #[serde(default)]
    pub severability: SeverabilitySection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub surrogate: SurrogateConfig,
}

/// A parsed configuration with every path resolved against the config
/// file's directory.
pub struct Loaded {
    pub config: Config,
    pub name: String,
    /// Digest of the config file bytes.
    pub hash: u64,
}

pub fn load(path: &Path) -> Result<Loaded, Invalid> {
    let bytes = fs::read(path).map_err(|e| Invalid(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Invalid(format!("{}: not UTF-8 text", path.display())))?;
    let mut config: Config =
        toml::from_str(&text).map_err(|e| Invalid(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let resolve = |p: &mut PathBuf| {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    };
    config.dataset.train.iter_mut().for_each(resolve);
    config.dataset.test.iter_mut().for_each(resolve);
    for p in [
        &mut config.exclusion.embedding,
        &mut config.severability.embedding,
        &mut config.experiment.embedding,
    ]
    .into_iter()
    .flatten()
    {
        resolve(p);
    }
    let name = config.dataset.name.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into())
    });
    let loaded = Loaded {
        config,
        name,
        hash: digest_parts(&[&bytes]),
    };
    loaded.validate()?;
    Ok(loaded)
}

impl Loaded {
    fn validate(&self) -> Result<(), Invalid> {
        let c = &self.config;
        let d = &c.dataset;
        let expected = match d.format {
            Format::Idx => Some(2),
            Format::Matrix => Some(1),
            Format::Cifar10 | Format::Cifar100 => None,
        };
        for (split, files) in [("train", &d.train), ("test", &d.test)] {
            if split == "test" && files.is_empty() {
                continue;
            }
            match expected {
                Some(n) if files.len() != n => {
                    return Err(Invalid(format!(
                        "dataset.{split}: {:?} format takes {n} path(s), got {}",
                        d.format,
                        files.len()
                    )))
                }
                None if files.is_empty() => {
                    return Err(Invalid(format!("dataset.{split}: no record files listed")))
                }
                _ => {}
            }
            for f in files {
                if !f.is_file() {
                    return Err(Invalid(format!("{}: no such file", f.display())));
                }
            }
        }
        c.reduction.validate().map_err(|e| Invalid(e.to_string()))?;
        c.surrogate.validate().map_err(|e| Invalid(e.to_string()))?;
        for &p in &c.exclusion.percents {
            if !(p > 0.0 && p < 100.0) {
                return Err(Invalid(format!("exclusion.percents: {p} is outside (0, 100)")));
            }
        }
        for &k in &c.severability.trim_k {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Invalid(format!("severability.trim_k: {k} must be > 0")));
            }
        }
        if c.experiment.trials == 0 {
            return Err(Invalid("experiment.trials must be ≥ 1".into()));
        }
        if c.experiment.dims.contains(&0) {
            return Err(Invalid("experiment.dims entries must be ≥ 1".into()));
        }
        Ok(())
    }

    pub fn hash_hex(&self) -> String {
        format!("{:016x}", self.hash)
    }

    fn load_split(&self, files: &[PathBuf]) -> severance_core::Result<Dataset> {
        match self.config.dataset.format {
            Format::Idx => load_idx(&files[0], &files[1]),
            Format::Matrix => load_matrix(&files[0]),
            Format::Cifar10 => load_cifar_bin(files, 10),
            Format::Cifar100 => load_cifar_bin(files, 100),
        }
    }

    pub fn train(&self) -> severance_core::Result<Dataset> {
        let d = &self.config.dataset;
        let full = self.load_split(&d.train)?;
        match d.subset {
            Some(size) if size < full.len() => full.stratified_subset(size, d.subset_seed),
            _ => Ok(full),
        }
    }

    pub fn test(&self) -> Result<severance_core::Result<Dataset>, Invalid> {
        if self.config.dataset.test.is_empty() {
            return Err(Invalid("dataset.test must list the test split for this command".into()));
        }
        Ok(self.load_split(&self.config.dataset.test))
    }
}
