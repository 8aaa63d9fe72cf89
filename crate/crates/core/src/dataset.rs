//! Loaders that turn benchmark image files into flattened sample matrices.
//!
//! Every loader scales pixels into `[0, 1]`, keeps multi-channel images in
//! the channel-plane-major order they have on disk, and digests the raw file
//! bytes so a dataset can be recognised independently of how it was parsed.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

pub const CIFAR_PIXELS: usize = 3 * 32 * 32;

const CIFAR10_NAMES: [&str; 10] = [
    "airplane",
    "automobile",
    "bird",
    "cat",
    "deer",
    "dog",
    "frog",
    "horse",
    "ship",
    "truck",
];

/// An immutable labelled sample matrix, row-major `n × dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<f64>,
    dim: usize,
    labels: Vec<usize>,
    class_names: Vec<String>,
    source_id: String,
    content_hash: u64,
}

impl Dataset {
    /// Builds a dataset from parts, checking every structural invariant.
    pub fn new(
        samples: Vec<f64>,
        dim: usize,
        labels: Vec<usize>,
        class_names: Vec<String>,
        source_id: impl Into<String>,
        content_hash: u64,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parameter("sample dimension must be positive".into()));
        }
        if samples.len() != dim * labels.len() {
            return Err(Error::Consistency(format!(
                "{} values cannot form {} rows of width {}",
                samples.len(),
                labels.len(),
                dim
            )));
        }
        let classes = class_names.len();
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= classes) {
            return Err(Error::Range(format!(
                "sample {i} has label {l}, only {classes} classes are named"
            )));
        }
        if let Some(v) = samples
            .iter()
            .find(|v| !(0.0..=1.0).contains(*v) || !v.is_finite())
        {
            return Err(Error::Range(format!("sample value {v} outside [0, 1]")));
        }
        Ok(Dataset {
            samples,
            dim,
            labels,
            class_names,
            source_id: source_id.into(),
            content_hash,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.samples[i * self.dim..(i + 1) * self.dim]
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn content_hash(&self) -> u64 {
        self.content_hash
    }

    /// Per-class sample counts, indexed by class id.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Replaces the class names; the new list must still cover every label.
    pub fn with_class_names(mut self, names: Vec<String>) -> Result<Self> {
        if let Some(&l) = self.labels.iter().find(|&&l| l >= names.len()) {
            return Err(Error::Range(format!(
                "label {l} has no name among {} classes",
                names.len()
            )));
        }
        self.class_names = names;
        Ok(self)
    }

    /// A view over every sample.
    pub fn full_view(&self) -> DatasetView<'_> {
        DatasetView {
            dataset: self,
            indices: (0..self.len()).collect(),
        }
    }

    /// A view over the given original indices, kept in the order supplied.
    pub fn view(&self, indices: Vec<usize>) -> Result<DatasetView<'_>> {
        if let Some(&i) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::Parameter(format!(
                "index {i} out of range for {} samples",
                self.len()
            )));
        }
        Ok(DatasetView {
            dataset: self,
            indices,
        })
    }

    /// A class-stratified subset holding `round(size / n × n_c)` samples per
    /// class, chosen by a seeded shuffle. Original order is preserved.
    pub fn stratified_subset(&self, size: usize, seed: u64) -> Result<Dataset> {
        use rand::seq::SliceRandom;

        if size == 0 || size > self.len() {
            return Err(Error::Parameter(format!(
                "subset size {size} must be in 1..={}",
                self.len()
            )));
        }
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); self.num_classes()];
        for (i, &l) in self.labels.iter().enumerate() {
            by_class[l].push(i);
        }
        let fraction = size as f64 / self.len() as f64;
        let mut chosen = Vec::with_capacity(size);
        for (class, members) in by_class.iter_mut().enumerate() {
            let take = (members.len() as f64 * fraction).round() as usize;
            let mut rng = crate::rng::stream(seed, class as u64);
            members.shuffle(&mut rng);
            chosen.extend_from_slice(&members[..take.min(members.len())]);
        }
        chosen.sort_unstable();
        let view = self.view(chosen)?;
        let mut subset = view.to_dataset();
        subset.source_id = format!("{};subset={size}@{seed}", self.source_id);
        subset.content_hash = digest_parts(&[
            &self.content_hash.to_be_bytes(),
            &(size as u64).to_be_bytes(),
            &seed.to_be_bytes(),
        ]);
        Ok(subset)
    }
}

/// A logical subset of a dataset. The backing dataset is never copied or
/// modified; positions in the view map back to original sample indices.
#[derive(Debug, Clone)]
pub struct DatasetView<'a> {
    dataset: &'a Dataset,
    indices: Vec<usize>,
}

impl<'a> DatasetView<'a> {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dataset.dim
    }

    pub fn num_classes(&self) -> usize {
        self.dataset.num_classes()
    }

    pub fn row(&self, pos: usize) -> &'a [f64] {
        self.dataset.row(self.indices[pos])
    }

    pub fn label(&self, pos: usize) -> usize {
        self.dataset.labels[self.indices[pos]]
    }

    pub fn original_index(&self, pos: usize) -> usize {
        self.indices[pos]
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.dataset
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        for pos in 0..self.len() {
            counts[self.label(pos)] += 1;
        }
        counts
    }

    /// Materialises the view as an owned dataset sharing provenance.
    pub fn to_dataset(&self) -> Dataset {
        let mut samples = Vec::with_capacity(self.len() * self.dim());
        for pos in 0..self.len() {
            samples.extend_from_slice(self.row(pos));
        }
        Dataset {
            samples,
            dim: self.dim(),
            labels: (0..self.len()).map(|p| self.label(p)).collect(),
            class_names: self.dataset.class_names.clone(),
            source_id: self.dataset.source_id.clone(),
            content_hash: self.dataset.content_hash,
        }
    }
}

/// 64-bit digest: the leading eight bytes of SHA-256 over the parts in order.
pub fn digest_parts(parts: &[&[u8]]) -> u64 {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update((part.len() as u64).to_be_bytes());
        hasher.update(part);
    }
    let out = hasher.finalize();
    u64::from_be_bytes(out[..8].try_into().expect("sha256 is 32 bytes"))
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn be_u32(bytes: &[u8], offset: usize, path: &Path) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
        .ok_or_else(|| Error::Length {
            path: path.to_path_buf(),
            detail: format!("header truncated at byte {offset}"),
        })
}

fn check_magic(bytes: &[u8], expected: u32, path: &Path) -> Result<()> {
    let found = be_u32(bytes, 0, path)?;
    if found != expected {
        return Err(Error::Format {
            path: path.to_path_buf(),
            found,
            expected,
        });
    }
    Ok(())
}

fn numeric_names(classes: usize) -> Vec<String> {
    (0..classes).map(|c| c.to_string()).collect()
}

/// Loads an IDX image/label file pair (the MNIST family layout).
pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<Dataset> {
    let images_path = images_path.as_ref();
    let labels_path = labels_path.as_ref();
    let image_bytes = read_file(images_path)?;
    let label_bytes = read_file(labels_path)?;

    check_magic(&image_bytes, IDX_IMAGES_MAGIC, images_path)?;
    check_magic(&label_bytes, IDX_LABELS_MAGIC, labels_path)?;

    let count = be_u32(&image_bytes, 4, images_path)? as usize;
    let rows = be_u32(&image_bytes, 8, images_path)? as usize;
    let cols = be_u32(&image_bytes, 12, images_path)? as usize;
    let label_count = be_u32(&label_bytes, 4, labels_path)? as usize;
    if count != label_count {
        return Err(Error::Consistency(format!(
            "{} holds {count} images but {} holds {label_count} labels",
            images_path.display(),
            labels_path.display()
        )));
    }
    let dim = rows * cols;
    if dim == 0 {
        return Err(Error::Length {
            path: images_path.to_path_buf(),
            detail: format!("image shape {rows}×{cols} is empty"),
        });
    }

    let pixels = &image_bytes[16..];
    if pixels.len() != count * dim {
        return Err(Error::Length {
            path: images_path.to_path_buf(),
            detail: format!("expected {} pixel bytes, found {}", count * dim, pixels.len()),
        });
    }
    let raw_labels = &label_bytes[8..];
    if raw_labels.len() != count {
        return Err(Error::Length {
            path: labels_path.to_path_buf(),
            detail: format!("expected {count} label bytes, found {}", raw_labels.len()),
        });
    }

    let labels: Vec<usize> = raw_labels.iter().map(|&b| b as usize).collect();
    let classes = labels.iter().map(|&l| l + 1).max().unwrap_or(0).max(10);
    let samples = pixels.iter().map(|&p| p as f64 / 255.0).collect();
    Dataset::new(
        samples,
        dim,
        labels,
        numeric_names(classes),
        format!("idx:{}", images_path.display()),
        digest_parts(&[&image_bytes, &label_bytes]),
    )
}

/// Loads CIFAR-10 (`classes = 10`) or CIFAR-100 (`classes = 100`, fine
/// labels) binary record files, concatenated in the order given.
pub fn load_cifar_bin<P: AsRef<Path>>(record_paths: &[P], classes: usize) -> Result<Dataset> {
    let label_bytes = match classes {
        10 => 1,
        100 => 2,
        other => {
            return Err(Error::Parameter(format!(
                "CIFAR class count must be 10 or 100, got {other}"
            )))
        }
    };
    let record = label_bytes + CIFAR_PIXELS;

    let mut samples = Vec::new();
    let mut labels = Vec::new();
    let mut raw: Vec<Vec<u8>> = Vec::with_capacity(record_paths.len());
    for path in record_paths {
        let path = path.as_ref();
        let bytes = read_file(path)?;
        if bytes.is_empty() || bytes.len() % record != 0 {
            return Err(Error::Length {
                path: path.to_path_buf(),
                detail: format!(
                    "{} bytes is not a whole number of {record}-byte records",
                    bytes.len()
                ),
            });
        }
        for chunk in bytes.chunks_exact(record) {
            // CIFAR-100 records are (coarse, fine); the fine label is used.
            let label = chunk[label_bytes - 1] as usize;
            if label >= classes {
                return Err(Error::Range(format!(
                    "{}: label byte {label} ≥ {classes}",
                    path.display()
                )));
            }
            labels.push(label);
            samples.extend(chunk[label_bytes..].iter().map(|&p| p as f64 / 255.0));
        }
        raw.push(bytes);
    }
    if labels.is_empty() {
        return Err(Error::Parameter("no CIFAR record files given".into()));
    }

    let names = if classes == 10 {
        CIFAR10_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        numeric_names(classes)
    };
    let parts: Vec<&[u8]> = raw.iter().map(Vec::as_slice).collect();
    let first = record_paths[0].as_ref().display();
    Dataset::new(
        samples,
        CIFAR_PIXELS,
        labels,
        names,
        format!("cifar{classes}:{first}+{}", record_paths.len() - 1),
        digest_parts(&parts),
    )
}

/// Loads the plain-text matrix format: a `D=<int> C=<int>` header, then one
/// line per sample holding the label followed by `D` reals.
///
/// If any value falls outside `[0, 1]` the whole table is min-max rescaled
/// and the original range is recorded in the source id.
pub fn load_matrix(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let bytes = read_file(path)?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Error::Parse {
        line: 0,
        detail: format!("not UTF-8: {e}"),
    })?;

    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (dim, classes) = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((n, l)) => break parse_header(n, l)?,
            None => {
                return Err(Error::Parse {
                    line: 1,
                    detail: "missing `D=<int> C=<int>` header".into(),
                })
            }
        }
    };

    let mut samples = Vec::new();
    let mut labels = Vec::new();
    for (line, content) in lines {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() != dim + 1 {
            return Err(Error::Shape {
                line,
                expected: dim,
                found: tokens.len() - 1,
            });
        }
        let label: usize = tokens[0].parse().map_err(|_| Error::Parse {
            line,
            detail: format!("label `{}` is not a non-negative integer", tokens[0]),
        })?;
        if label >= classes {
            return Err(Error::Range(format!(
                "line {line}: label {label} ≥ C={classes}"
            )));
        }
        labels.push(label);
        for tok in &tokens[1..] {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line,
                detail: format!("`{tok}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    detail: format!("`{tok}` is not finite"),
                });
            }
            samples.push(v);
        }
    }

    let mut source_id = format!("matrix:{}", path.display());
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo < 0.0 || hi > 1.0 {
        let span = hi - lo;
        for v in samples.iter_mut() {
            *v = if span > 0.0 { (*v - lo) / span } else { 0.0 };
            *v = v.clamp(0.0, 1.0);
        }
        let _ = write!(source_id, ";minmax={lo},{hi}");
    }

    Dataset::new(
        samples,
        dim,
        labels,
        numeric_names(classes),
        source_id,
        digest_parts(&[&bytes]),
    )
}

fn parse_header(line: usize, content: &str) -> Result<(usize, usize)> {
    let mut dim = None;
    let mut classes = None;
    for tok in content.split_whitespace() {
        let (key, value) = tok.split_once('=').ok_or_else(|| Error::Parse {
            line,
            detail: format!("header token `{tok}` is not key=value"),
        })?;
        let value: usize = value.parse().map_err(|_| Error::Parse {
            line,
            detail: format!("header value `{value}` is not an integer"),
        })?;
        match key {
            "D" => dim = Some(value),
            "C" => classes = Some(value),
            _ => {
                return Err(Error::Parse {
                    line,
                    detail: format!("unknown header key `{key}`"),
                })
            }
        }
    }
    match (dim, classes) {
        (Some(d), Some(c)) if d > 0 && c > 0 => Ok((d, c)),
        _ => Err(Error::Parse {
            line,
            detail: "header must be `D=<positive int> C=<positive int>`".into(),
        }),
    }
}

/// Writes a dataset in the matrix format. Values use the shortest decimal
/// that round-trips, so reloading reproduces them exactly.
pub fn write_matrix(dataset: &Dataset, path: impl AsRef<Path>) -> Result<PathBuf> {
    let path = path.as_ref();
    let mut out = format!("D={} C={}\n", dataset.dim(), dataset.num_classes());
    for i in 0..dataset.len() {
        let _ = write!(out, "{}", dataset.labels()[i]);
        for v in dataset.row(i) {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

/// Writes an IDX image/label pair from 8-bit pixels. Used to produce
/// fixtures; `pixels.len()` must equal `labels.len() * rows * cols`.
pub fn write_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    pixels: &[u8],
    labels: &[u8],
    rows: u32,
    cols: u32,
) -> Result<()> {
    let n = labels.len();
    if pixels.len() != n * (rows * cols) as usize {
        return Err(Error::Consistency(format!(
            "{} pixel bytes do not form {n} images of {rows}×{cols}",
            pixels.len()
        )));
    }
    let mut images = Vec::with_capacity(16 + pixels.len());
    for field in [IDX_IMAGES_MAGIC, n as u32, rows, cols] {
        images.extend_from_slice(&field.to_be_bytes());
    }
    images.extend_from_slice(pixels);
    let mut label_file = Vec::with_capacity(8 + n);
    for field in [IDX_LABELS_MAGIC, n as u32] {
        label_file.extend_from_slice(&field.to_be_bytes());
    }
    label_file.extend_from_slice(labels);
    let images_path = images_path.as_ref();
    let labels_path = labels_path.as_ref();
    fs::write(images_path, images).map_err(|e| Error::io(images_path, e))?;
    fs::write(labels_path, label_file).map_err(|e| Error::io(labels_path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_zero_image() {
        let dir = tempfile::tempdir().unwrap();
        let (img, lab) = (dir.path().join("i"), dir.path().join("l"));
        write_idx(&img, &lab, &[0u8; 784], &[0], 28, 28).unwrap();
        let ds = load_idx(&img, &lab).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.dim(), 784);
        assert!(ds.row(0).iter().all(|&v| v == 0.0));
        assert_eq!(ds.labels(), &[0]);
        assert_eq!(ds.class_names()[9], "9");
    }

    #[test]
    fn label_file_passed_as_images_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let (img, lab) = (dir.path().join("i"), dir.path().join("l"));
        write_idx(&img, &lab, &[0u8; 4], &[1], 2, 2).unwrap();
        match load_idx(&lab, &lab) {
            Err(Error::Format { found, .. }) => assert_eq!(found, 0x801),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn idx_count_mismatch_and_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let (img, lab) = (dir.path().join("i"), dir.path().join("l"));
        let (img2, lab2) = (dir.path().join("i2"), dir.path().join("l2"));
        write_idx(&img, &lab, &[7u8; 8], &[1, 2], 2, 2).unwrap();
        write_idx(&img2, &lab2, &[7u8; 4], &[1], 2, 2).unwrap();
        assert!(matches!(load_idx(&img, &lab2), Err(Error::Consistency(_))));

        let mut bytes = fs::read(&img).unwrap();
        bytes.pop();
        fs::write(&img, bytes).unwrap();
        assert!(matches!(load_idx(&img, &lab), Err(Error::Length { .. })));
    }

    #[test]
    fn cifar10_saturated_record() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("batch.bin");
        let mut rec = vec![3u8];
        rec.extend(std::iter::repeat(255u8).take(CIFAR_PIXELS));
        fs::write(&path, &rec).unwrap();
        let ds = load_cifar_bin(&[&path], 10).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.dim(), 3072);
        assert!(ds.row(0).iter().all(|&v| v == 1.0));
        assert_eq!(ds.labels(), &[3]);
        assert_eq!(ds.class_names()[3], "cat");
    }

    #[test]
    fn cifar_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.bin");
        fs::write(&path, vec![0u8; CIFAR_PIXELS]).unwrap();
        assert!(matches!(
            load_cifar_bin(&[&path], 10),
            Err(Error::Length { .. })
        ));

        let mut rec = vec![12u8];
        rec.extend(std::iter::repeat(0u8).take(CIFAR_PIXELS));
        fs::write(&path, &rec).unwrap();
        assert!(matches!(load_cifar_bin(&[&path], 10), Err(Error::Range(_))));
        assert!(matches!(
            load_cifar_bin(&[&path], 7),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn cifar100_uses_fine_label() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("train.bin");
        let mut rec = vec![4u8, 77u8];
        rec.extend((0..CIFAR_PIXELS).map(|i| (i % 256) as u8));
        fs::write(&path, &rec).unwrap();
        let ds = load_cifar_bin(&[&path], 100).unwrap();
        assert_eq!(ds.labels(), &[77]);
        // channel planes stay in file order
        assert_eq!(ds.row(0)[1024], (1024 % 256) as f64 / 255.0);
    }

    #[test]
    fn matrix_minimal_and_shape_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.txt");
        fs::write(&path, "D=2 C=1\n0 0.5 0.5\n").unwrap();
        let ds = load_matrix(&path).unwrap();
        assert_eq!((ds.len(), ds.dim()), (1, 2));
        assert_eq!(ds.row(0), &[0.5, 0.5]);

        fs::write(&path, "D=2 C=1\n0 0.5 0.5\n0 0.1 0.2 0.3\n").unwrap();
        match load_matrix(&path) {
            Err(Error::Shape { line, found, .. }) => assert_eq!((line, found), (3, 3)),
            other => panic!("expected shape error, got {other:?}"),
        }

        fs::write(&path, "D=2 C=1\n0 0.5 abc\n").unwrap();
        assert!(matches!(load_matrix(&path), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn matrix_rescales_byte_range() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.txt");
        fs::write(&path, "D=3 C=2\n0 0 10 255\n1 128 20 3\n").unwrap();
        let ds = load_matrix(&path).unwrap();
        let lo = ds.samples().iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ds.samples().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!((lo, hi), (0.0, 1.0));
        assert!(ds.source_id().contains("minmax=0,255"));
        assert_eq!(ds.row(1)[0], 128.0 / 255.0);
    }

    #[test]
    fn hash_tracks_raw_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.txt");
        let b = dir.path().join("b.txt");
        fs::write(&a, "D=1 C=1\n0 0.5\n").unwrap();
        fs::write(&b, "D=1 C=1\n0 0.50\n").unwrap();
        let (da, db) = (load_matrix(&a).unwrap(), load_matrix(&b).unwrap());
        assert_eq!(da.samples(), db.samples());
        assert_ne!(da.content_hash(), db.content_hash());
        assert_eq!(da.content_hash(), load_matrix(&a).unwrap().content_hash());
    }

    #[test]
    fn views_leave_dataset_untouched() {
        let ds = Dataset::new(
            (0..10).map(|i| i as f64 / 10.0).collect(),
            1,
            vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1],
            vec!["a".into(), "b".into()],
            "t",
            1,
        )
        .unwrap();
        let view = ds.view(vec![1, 2, 3]).unwrap();
        assert_eq!(view.row(0), &[0.1]);
        assert_eq!(view.class_counts(), vec![1, 2]);
        assert!(ds.view(vec![10]).is_err());
        assert_eq!(ds.len(), 10);
    }

    #[test]
    fn stratified_subset_keeps_proportions() {
        let labels: Vec<usize> = (0..100).map(|i| usize::from(i % 4 == 0)).collect();
        let ds = Dataset::new(vec![0.0; 100], 1, labels, vec!["x".into(), "y".into()], "t", 9)
            .unwrap();
        let sub = ds.stratified_subset(20, 5).unwrap();
        assert_eq!(sub.class_counts(), vec![15, 5]);
        assert_eq!(sub, ds.stratified_subset(20, 5).unwrap());
        assert_ne!(sub.content_hash(), ds.content_hash());
    }

    #[test]
    fn rejects_out_of_range_values() {
        assert!(Dataset::new(vec![1.5], 1, vec![0], vec!["a".into()], "t", 0).is_err());
        assert!(Dataset::new(vec![0.5], 1, vec![1], vec!["a".into()], "t", 0).is_err());
        assert!(Dataset::new(vec![], 0, vec![], vec![], "t", 0).is_err());
    }
}
