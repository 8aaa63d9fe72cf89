use std::fs;
use std::path::PathBuf;

use proptest::prelude::*;
use severance_core::dataset::{load_cifar_bin, load_idx, load_matrix, write_matrix, CIFAR_PIXELS};
use severance_core::Dataset;

fn mnist_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist-subset")
}

// Label histogram and pixel values read straight from the file bytes.
#[test]
fn mnist_subset_matches_byte_scan() {
    let dir = mnist_dir();
    for (images, labels) in [
        ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
        ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
    ] {
        let ds = load_idx(dir.join(images), dir.join(labels)).unwrap();
        let label_bytes = fs::read(dir.join(labels)).unwrap();
        let image_bytes = fs::read(dir.join(images)).unwrap();
        let n = u32::from_be_bytes(label_bytes[4..8].try_into().unwrap()) as usize;
        assert_eq!(ds.len(), n);
        assert_eq!(ds.dim(), 784);

        let mut histogram = [0usize; 10];
        for &b in &label_bytes[8..] {
            histogram[b as usize] += 1;
        }
        assert_eq!(ds.class_counts(), histogram.to_vec());
        assert!(histogram.iter().all(|&c| c > 0));

        for i in [0, n / 2, n - 1] {
            let raw = &image_bytes[16 + i * 784..16 + (i + 1) * 784];
            for (x, &b) in ds.row(i).iter().zip(raw) {
                assert_eq!(*x, b as f64 / 255.0);
            }
        }
    }
}

#[test]
fn mnist_train_and_test_splits_have_expected_sizes() {
    let dir = mnist_dir();
    let train = load_idx(dir.join("train-images-idx3-ubyte"), dir.join("train-labels-idx1-ubyte")).unwrap();
    let test = load_idx(dir.join("t10k-images-idx3-ubyte"), dir.join("t10k-labels-idx1-ubyte")).unwrap();
    assert_eq!((train.len(), test.len()), (8000, 2000));
    assert_ne!(train.content_hash(), test.content_hash());
}

fn cifar_record(label_bytes: &[u8], fill: impl Fn(usize) -> u8) -> Vec<u8> {
    let mut rec = label_bytes.to_vec();
    rec.extend((0..CIFAR_PIXELS).map(fill));
    rec
}

#[test]
fn cifar_records_load_plane_major() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("data_batch_1.bin");
    let b = dir.path().join("data_batch_2.bin");
    let mut first = cifar_record(&[3], |p| (p / 1024) as u8 * 100);
    first.extend(cifar_record(&[9], |p| (p % 251) as u8));
    fs::write(&a, first).unwrap();
    fs::write(&b, cifar_record(&[0], |_| 255)).unwrap();

    let ds = load_cifar_bin(&[&a, &b], 10).unwrap();
    assert_eq!(ds.len(), 3);
    assert_eq!(ds.labels(), &[3, 9, 0]);
    assert_eq!(ds.class_names()[3], "cat");
    // red plane, then green, then blue, exactly as stored
    assert_eq!(ds.row(0)[0], 0.0);
    assert_eq!(ds.row(0)[1024], 100.0 / 255.0);
    assert_eq!(ds.row(0)[2048], 200.0 / 255.0);
    assert_eq!(ds.row(1)[300], (300 % 251) as f64 / 255.0);
    assert!(ds.row(2).iter().all(|&x| x == 1.0));

    let fine = dir.path().join("train.bin");
    fs::write(&fine, cifar_record(&[4, 72], |_| 0)).unwrap();
    let ds = load_cifar_bin(&[&fine], 100).unwrap();
    assert_eq!(ds.labels(), &[72]);
    assert_eq!(ds.num_classes(), 100);
}

fn arb_dataset() -> impl Strategy<Value = Dataset> {
    (1usize..6, 1usize..30, 2usize..5).prop_flat_map(|(dim, n, classes)| {
        (
            prop::collection::vec(0.0f64..=1.0, dim * n),
            prop::collection::vec(0..classes, n),
        )
            .prop_map(move |(samples, labels)| {
                let names = (0..classes).map(|c| c.to_string()).collect();
                Dataset::new(samples, dim, labels, names, "arb", 0).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matrix_round_trip(ds in arb_dataset()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.txt");
        write_matrix(&ds, &path).unwrap();
        let back = load_matrix(&path).unwrap();
        prop_assert_eq!(back.samples(), ds.samples());
        prop_assert_eq!(back.labels(), ds.labels());
        prop_assert!(back.num_classes() >= ds.labels().iter().max().unwrap() + 1);
    }

    #[test]
    fn matrix_rescale_maps_range_to_unit_interval(values in prop::collection::vec(0.0f64..255.0, 4..40)) {
        prop_assume!(values.iter().any(|&v| v > 1.0));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.txt");
        let body: String = values.iter().map(|v| format!("0 {v}\n")).collect();
        fs::write(&path, format!("D=1 C=1\n{body}")).unwrap();
        let ds = load_matrix(&path).unwrap();
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (x, v) in ds.samples().iter().zip(&values) {
            prop_assert!((x - (v - lo) / (hi - lo)).abs() < 1e-12);
        }
        prop_assert!(ds.source_id().contains("minmax"));
    }
}
