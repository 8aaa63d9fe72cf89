#!/usr/bin/env python3
"""Rebuild a 10k-digit MNIST subset as IDX files from the `mnist` npm package.

The npm package (https://www.npmjs.com/package/mnist, v1.1.0) ships 10 000
training digits as JSON arrays of pixel/255 rounded to 3 decimals; rounding
is invertible on the 1/255 grid, so the original bytes are recovered exactly.

Usage:
    npm pack mnist@1.1.0 && tar xzf mnist-1.1.0.tgz
    python3 scripts/make_mnist_subset.py package/src/digits data/mnist-subset

Writes a class-stratified 80/20 split (train 8 000 / test 2 000) as
train-images-idx3-ubyte, train-labels-idx1-ubyte, t10k-images-idx3-ubyte,
t10k-labels-idx1-ubyte.
"""
import json
import os
import random
import struct
import sys


def write_idx(out_dir, prefix, samples):
    with open(os.path.join(out_dir, f"{prefix}-images-idx3-ubyte"), "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(samples), 28, 28))
        for pixels, _ in samples:
            f.write(bytes(pixels))
    with open(os.path.join(out_dir, f"{prefix}-labels-idx1-ubyte"), "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(samples)))
        f.write(bytes(label for _, label in samples))


def main(digits_dir, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    train, test = [], []
    for label in range(10):
        with open(os.path.join(digits_dir, f"{label}.json")) as f:
            flat = json.load(f)["data"]
        assert len(flat) % 784 == 0
        images = []
        for i in range(0, len(flat), 784):
            pixels = [int(round(v * 255.0)) for v in flat[i : i + 784]]
            assert all(0 <= p <= 255 for p in pixels)
            images.append((pixels, label))
        n_test = int(round(len(images) * 0.2))
        train.extend(images[: len(images) - n_test])
        test.extend(images[len(images) - n_test :])
    rng = random.Random(20211122)
    rng.shuffle(train)
    rng.shuffle(test)
    write_idx(out_dir, "train", train)
    write_idx(out_dir, "t10k", test)
    print(f"train={len(train)} test={len(test)}")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
