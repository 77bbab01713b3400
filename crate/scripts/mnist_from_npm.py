#!/usr/bin/env python3
"""Rebuild gzipped IDX files from the digit JSON shipped in the npm `mnist` package.

The package stores 10,000 MNIST digits as pixel/255 rounded to three decimals,
which is lossless: round(value * 255) recovers the original byte.

    npm pack mnist && tar xzf mnist-*.tgz
    python3 scripts/mnist_from_npm.py package/src/digits data/mnist
"""
import gzip
import json
import random
import struct
import sys
from pathlib import Path

TRAIN = 8000


def main(src, dst):
    src, dst = Path(src), Path(dst)
    samples = []
    for digit in range(10):
        data = json.loads((src / f"{digit}.json").read_text())["data"]
        assert len(data) % 784 == 0
        for k in range(len(data) // 784):
            pixels = bytes(round(v * 255) for v in data[k * 784:(k + 1) * 784])
            samples.append((pixels, digit))
    random.Random(20240601).shuffle(samples)
    dst.mkdir(parents=True, exist_ok=True)
    for prefix, part in (("train", samples[:TRAIN]), ("t10k", samples[TRAIN:])):
        with gzip.GzipFile(dst / f"{prefix}-images-idx3-ubyte.gz", "wb", mtime=0) as f:
            f.write(struct.pack(">IIII", 0x803, len(part), 28, 28))
            for pixels, _ in part:
                f.write(pixels)
        with gzip.GzipFile(dst / f"{prefix}-labels-idx1-ubyte.gz", "wb", mtime=0) as f:
            f.write(struct.pack(">II", 0x801, len(part)))
            f.write(bytes(label for _, label in part))


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
