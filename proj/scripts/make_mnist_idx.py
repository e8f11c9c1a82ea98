#!/usr/bin/env python3
"""Build IDX-format digit files from the `mnist` npm package.

The npm package (https://www.npmjs.com/package/mnist) bundles 10,000 real
MNIST digits as per-class JSON arrays of 784 floats in [0, 1]. This script
rebuilds byte-valued IDX containers from them:

    train-images-idx3-ubyte / train-labels-idx1-ubyte   (4000 images)
    t10k-images-idx3-ubyte  / t10k-labels-idx1-ubyte    (2000 images)

Classes are interleaved round-robin so that any prefix subset is roughly
class-balanced. Usage:

    npm pack mnist && tar xzf mnist-*.tgz
    python3 scripts/make_mnist_idx.py package/src/digits data/mnist
"""

import json
import struct
import sys
from pathlib import Path

TRAIN_PER_CLASS = 400
TEST_PER_CLASS = 200


def write_idx_images(path: Path, images: list[bytes]) -> None:
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(images), 28, 28))
        for img in images:
            f.write(img)


def write_idx_labels(path: Path, labels: list[int]) -> None:
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(bytes(labels))


def main() -> None:
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    src = Path(sys.argv[1])
    out = Path(sys.argv[2])
    out.mkdir(parents=True, exist_ok=True)

    per_class: list[list[bytes]] = []
    for digit in range(10):
        flat = json.loads((src / f"{digit}.json").read_text())["data"]
        n = len(flat) // 784
        needed = TRAIN_PER_CLASS + TEST_PER_CLASS
        if n < needed:
            sys.exit(f"class {digit}: only {n} samples, need {needed}")
        samples = [
            bytes(round(v * 255) for v in flat[i * 784 : (i + 1) * 784])
            for i in range(needed)
        ]
        per_class.append(samples)

    def interleave(start: int, count: int) -> tuple[list[bytes], list[int]]:
        images, labels = [], []
        for i in range(count):
            for digit in range(10):
                images.append(per_class[digit][start + i])
                labels.append(digit)
        return images, labels

    train_imgs, train_labels = interleave(0, TRAIN_PER_CLASS)
    test_imgs, test_labels = interleave(TRAIN_PER_CLASS, TEST_PER_CLASS)

    write_idx_images(out / "train-images-idx3-ubyte", train_imgs)
    write_idx_labels(out / "train-labels-idx1-ubyte", train_labels)
    write_idx_images(out / "t10k-images-idx3-ubyte", test_imgs)
    write_idx_labels(out / "t10k-labels-idx1-ubyte", test_labels)
    print(f"wrote {len(train_imgs)} train / {len(test_imgs)} test images under {out}")


if __name__ == "__main__":
    main()
