#!/usr/bin/env python3
"""Convert the CIFAR-10 test set and CIFAR-10H annotator counts into the
files `luconc` reads.

Inputs:
  --cifar   path to `test_batch` from cifar-10-python.tar.gz
  --counts  CIFAR-10H `cifar10h-counts.npy` (10000 x 10 annotator counts),
            or a CSV with 10 count columns and no header
  --out     output directory

Outputs in --out:
  points.bin   CPTS header, 10000 x 3072 float32, pixels divided by 255
               (coordinates keep the archive's channel-major order)
  labels.csv   id,label with the original CIFAR-10 test labels
  soft.csv     id,p0..p9 with counts divided by the row total

Example ids are the test-set indices 0..9999.
"""

import argparse
import csv
import os
import pickle
import struct
import sys

import numpy as np


def load_test_batch(path):
    with open(path, "rb") as f:
        batch = pickle.load(f, encoding="bytes")
    data = np.asarray(batch[b"data"], dtype=np.uint8)
    labels = np.asarray(batch[b"labels"], dtype=np.int64)
    if data.shape != (10000, 3072) or labels.shape != (10000,):
        sys.exit(f"unexpected test_batch shapes {data.shape}, {labels.shape}")
    return data, labels


def load_counts(path):
    if path.endswith(".npy"):
        counts = np.load(path)
    else:
        counts = np.loadtxt(path, delimiter=",")
    counts = np.asarray(counts, dtype=np.float64)
    if counts.shape != (10000, 10):
        sys.exit(f"unexpected count shape {counts.shape}")
    if (counts < 0).any() or (counts.sum(axis=1) <= 0).any():
        sys.exit("counts must be nonnegative with at least one annotation per row")
    return counts


def write_points(path, data):
    m, n = data.shape
    coords = (data.astype(np.float32) / np.float32(255.0)).astype("<f4")
    with open(path, "wb") as f:
        f.write(b"CPTS")
        f.write(struct.pack("<II", m, n))
        f.write(coords.tobytes(order="C"))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cifar", required=True)
    ap.add_argument("--counts", required=True)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    data, labels = load_test_batch(args.cifar)
    counts = load_counts(args.counts)
    freqs = counts / counts.sum(axis=1, keepdims=True)

    os.makedirs(args.out, exist_ok=True)
    write_points(os.path.join(args.out, "points.bin"), data)
    with open(os.path.join(args.out, "labels.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["id", "label"])
        for i, c in enumerate(labels):
            w.writerow([i, int(c)])
    with open(os.path.join(args.out, "soft.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["id"] + [f"p{j}" for j in range(10)])
        for i, row in enumerate(freqs):
            w.writerow([i] + [repr(float(p)) for p in row])
    print(f"wrote {len(labels)} examples to {args.out}")


if __name__ == "__main__":
    main()
