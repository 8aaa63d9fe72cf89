//! Class severability: σ-trimming, per-class convex hulls and the
//! hull-overlap graph.
//!
//! A report at trim level `k` keeps, for each class, the samples within `k`
//! sample standard deviations of the class mean (per dimension by default),
//! wraps each class in a convex hull and links classes whose hulls touch.
//! The number of connected components of that graph is the severability
//! score: one means no class can be cut away from the rest.

mod gjk;
mod hull;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use gjk::{gjk_distance, hulls_intersect, separated_by_axis};
pub use hull::{convex_hull_3d, ConvexHull, Point3};

use crate::error::{Error, Result};
use crate::exclusion::{class_geometry, ClassGeometry};
use crate::json;
use crate::reduction::Embedding;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrimMode {
    /// Within `k·std` of the class mean in every dimension.
    #[default]
    AxisAligned,
    /// Centroid distance within `k·√(Σ_d std_d²)`.
    Radial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrimOutcome {
    pub kept: Vec<bool>,
    pub per_class_kept: Vec<usize>,
    pub warnings: Vec<String>,
}

impl TrimOutcome {
    pub fn excluded_fraction(&self) -> f64 {
        let kept = self.kept.iter().filter(|&&k| k).count();
        1.0 - kept as f64 / self.kept.len() as f64
    }
}

pub fn sigma_trim(
    embedding: &Embedding,
    labels: &[usize],
    num_classes: usize,
    trim_k: f64,
    mode: TrimMode,
) -> Result<TrimOutcome> {
    let geometry = class_geometry(embedding, labels, num_classes)?;
    sigma_trim_with(&geometry, embedding, trim_k, mode)
}

/// Trims against precomputed class geometry. A dimension in which a class
/// has zero spread never excludes that class's points.
pub fn sigma_trim_with(
    geometry: &ClassGeometry,
    embedding: &Embedding,
    trim_k: f64,
    mode: TrimMode,
) -> Result<TrimOutcome> {
    if !(trim_k > 0.0 && trim_k.is_finite()) {
        return Err(Error::Parameter(format!("trim_k must be > 0, got {trim_k}")));
    }
    let m = geometry.m;
    let mut warnings = Vec::new();
    for c in 0..geometry.num_classes {
        let flat: Vec<usize> = (0..m).filter(|&d| geometry.std(c)[d] == 0.0).collect();
        if !flat.is_empty() {
            warnings.push(format!(
                "class {c}: zero spread in dimension(s) {flat:?}; no trimming applied there"
            ));
        }
    }

    let kept: Vec<bool> = (0..embedding.len())
        .map(|i| {
            let c = geometry.labels[i];
            let (mean, std) = (geometry.per_dim_mean(c), geometry.std(c));
            let x = embedding.point(i);
            match mode {
                TrimMode::AxisAligned => (0..m)
                    .all(|d| std[d] == 0.0 || (x[d] - mean[d]).abs() <= trim_k * std[d]),
                TrimMode::Radial => {
                    let radius = std.iter().map(|s| s * s).sum::<f64>().sqrt();
                    radius == 0.0 || geometry.dist_to_own_centroid[i] <= trim_k * radius
                }
            }
        })
        .collect();

    let mut per_class_kept = vec![0; geometry.num_classes];
    for (i, &k) in kept.iter().enumerate() {
        if k {
            per_class_kept[geometry.labels[i]] += 1;
        }
    }
    Ok(TrimOutcome {
        kept,
        per_class_kept,
        warnings,
    })
}

/// Severability of the classes of a 3-D embedding at one trim level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeverabilityReport {
    pub trim_k: f64,
    pub trim_mode: TrimMode,
    pub n: usize,
    pub per_class_kept: Vec<usize>,
    pub excluded_fraction: f64,
    /// Hull per class over its kept points; `None` for degenerate classes.
    /// Vertex ids are original sample indices.
    pub hulls: Vec<Option<ConvexHull>>,
    /// Classes too small or too flat to enclose a volume.
    pub degenerate: Vec<usize>,
    pub overlap: Vec<Vec<bool>>,
    /// Connected components of the overlap graph, each sorted, ordered by
    /// smallest member.
    pub components: Vec<Vec<usize>>,
    /// Components containing at least one non-degenerate class.
    pub score: usize,
    pub warnings: Vec<String>,
    #[serde(with = "crate::json::hex_u64")]
    pub dataset_hash: u64,
}

impl SeverabilityReport {
    pub fn to_json(&self) -> Result<String> {
        json::to_canonical_string(self)
    }

    pub fn is_severed(&self) -> bool {
        self.score > 1
    }
}

pub fn severability_report(
    embedding: &Embedding,
    labels: &[usize],
    num_classes: usize,
    trim_k: f64,
    mode: TrimMode,
) -> Result<SeverabilityReport> {
    if embedding.dims() != 3 {
        return Err(Error::Parameter(format!(
            "hull analysis needs a 3-D embedding, got m = {}",
            embedding.dims()
        )));
    }
    let geometry = class_geometry(embedding, labels, num_classes)?;
    let trim = sigma_trim_with(&geometry, embedding, trim_k, mode)?;
    let mut warnings = trim.warnings.clone();

    let mut hulls = Vec::with_capacity(num_classes);
    let mut degenerate = Vec::new();
    for c in 0..num_classes {
        let ids: Vec<usize> = geometry.per_class_order[c]
            .iter()
            .copied()
            .filter(|&i| trim.kept[i])
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let pts: Vec<Point3> = ids
            .iter()
            .map(|&i| {
                let p = embedding.point(i);
                [p[0], p[1], p[2]]
            })
            .collect();
        match convex_hull_3d(&pts) {
            Ok(mut h) => {
                // local point indices → sample indices (monotone, order kept)
                h.vertex_ids.iter_mut().for_each(|v| *v = ids[*v]);
                h.faces
                    .iter_mut()
                    .for_each(|f| *f = f.map(|v| ids[v]));
                hulls.push(Some(h));
            }
            Err(Error::Degenerate(why)) => {
                warnings.push(format!("class {c}: no hull ({why})"));
                degenerate.push(c);
                hulls.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    if degenerate.len() == num_classes {
        warnings.push("every class is degenerate; no hulls built".into());
    }

    let mut overlap = vec![vec![false; num_classes]; num_classes];
    for a in 0..num_classes {
        overlap[a][a] = true;
        for b in a + 1..num_classes {
            if let (Some(ha), Some(hb)) = (&hulls[a], &hulls[b]) {
                let hit = hulls_intersect(ha, hb);
                overlap[a][b] = hit;
                overlap[b][a] = hit;
            }
        }
    }

    let components = connected_components(&overlap);
    let score = components
        .iter()
        .filter(|comp| comp.iter().any(|c| !degenerate.contains(c)))
        .count();
    let kept_total: usize = trim.per_class_kept.iter().sum();

    Ok(SeverabilityReport {
        trim_k,
        trim_mode: mode,
        n: embedding.len(),
        per_class_kept: trim.per_class_kept,
        excluded_fraction: 1.0 - kept_total as f64 / embedding.len() as f64,
        hulls,
        degenerate,
        overlap,
        components,
        score,
        warnings,
        dataset_hash: embedding.dataset_hash,
    })
}

/// Union-find over a symmetric adjacency matrix.
pub fn connected_components(adjacency: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let n = adjacency.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for a in 0..n {
        for b in a + 1..n {
            if adjacency[a][b] {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    // smaller id becomes the root
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for c in 0..n {
        let r = find(&mut parent, c);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(c);
    }
    groups
}

/// One CSV per class (`class_<c>.csv`, columns `dim_1..dim_m`) plus
/// `summary.csv` with each class's per-dimension mean and sample std.
pub fn export_class_distributions(
    embedding: &Embedding,
    labels: &[usize],
    num_classes: usize,
    out_dir: impl AsRef<Path>,
    provenance: &BTreeMap<String, String>,
) -> Result<Vec<PathBuf>> {
    let out_dir = out_dir.as_ref();
    let preamble = comment_lines(provenance);
    let geometry = class_geometry(embedding, labels, num_classes)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let m = embedding.dims();
    let header: Vec<String> = (1..=m).map(|d| format!("dim_{d}")).collect();

    let mut written = Vec::with_capacity(num_classes + 1);
    for c in 0..num_classes {
        let mut out = preamble.clone();
        out.push_str(&header.join(","));
        out.push('\n');
        for i in (0..embedding.len()).filter(|&i| labels[i] == c) {
            let row: Vec<String> = embedding.point(i).iter().map(|x| x.to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        let path = out_dir.join(format!("class_{c}.csv"));
        fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }

    let mut summary = preamble;
    summary.push_str("class,count");
    for d in 1..=m {
        let _ = write!(summary, ",mean_{d}");
    }
    for d in 1..=m {
        let _ = write!(summary, ",std_{d}");
    }
    summary.push('\n');
    for c in 0..num_classes {
        let _ = write!(summary, "{c},{}", geometry.class_size(c));
        for x in geometry.per_dim_mean(c).iter().chain(geometry.std(c)) {
            let _ = write!(summary, ",{x}");
        }
        summary.push('\n');
    }
    let path = out_dir.join("summary.csv");
    fs::write(&path, summary).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}

/// Writes each class hull as a text mesh (`v x y z` then 1-based
/// `f i j k`) plus `hulls.json` mapping class id to file (null when the
/// class is degenerate).
pub fn export_hull_meshes(
    report: &SeverabilityReport,
    out_dir: impl AsRef<Path>,
    provenance: &BTreeMap<String, String>,
) -> Result<Vec<PathBuf>> {
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut index = BTreeMap::new();
    let mut written = Vec::new();
    for (c, hull) in report.hulls.iter().enumerate() {
        let Some(h) = hull else {
            index.insert(c.to_string(), None);
            continue;
        };
        let mut out = comment_lines(provenance);
        for v in &h.vertices {
            let _ = writeln!(out, "v {} {} {}", v[0], v[1], v[2]);
        }
        for f in &h.faces {
            let pos = f.map(|id| h.vertex_ids.binary_search(&id).expect("hull vertex") + 1);
            let _ = writeln!(out, "f {} {} {}", pos[0], pos[1], pos[2]);
        }
        let name = format!("hull_class_{c}.obj");
        let path = out_dir.join(&name);
        fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
        index.insert(c.to_string(), Some(name));
        written.push(path);
    }
    let path = out_dir.join("hulls.json");
    let listing = HullListing {
        hulls: index,
        provenance: provenance.clone(),
    };
    fs::write(&path, json::to_canonical_string(&listing)?).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}

#[derive(Serialize)]
struct HullListing {
    hulls: BTreeMap<String, Option<String>>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    provenance: BTreeMap<String, String>,
}

/// `# key=value` lines, the comment syntax shared by the CSV and mesh files.
fn comment_lines(provenance: &BTreeMap<String, String>) -> String {
    provenance.iter().map(|(k, v)| format!("# {k}={v}\n")).collect()
}
