"""Shared fixtures: small blob datasets, a trial setup for pipeline tests,
and a seeded digit-image surrogate written as genuine IDX files (this
environment has no network, so the desk-scale image experiments run on a
deterministic 10-class 28x28 stand-in ingested through the real parser).
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
import pytest

from lrtune import engine, tuner
from lrtune.rng import labeled_rng

SURROGATE_SEED = 90210


def write_idx_images(path: Path, images: np.ndarray) -> None:
    """images: (n, rows, cols) uint8."""
    n, rows, cols = images.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", 0x00000803, n, rows, cols))
        fh.write(images.tobytes())


def write_idx_labels(path: Path, labels: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", 0x00000801, len(labels)))
        fh.write(labels.astype(np.uint8).tobytes())


def _digit_prototypes(rng: np.random.Generator) -> np.ndarray:
    """Ten smooth, distinct 28x28 grey-scale patterns."""
    protos = rng.uniform(0.0, 1.0, size=(10, 28, 28))
    for _ in range(8):  # box blurs leave only low-frequency structure
        protos = (
            protos
            + np.roll(protos, 1, axis=1) + np.roll(protos, -1, axis=1)
            + np.roll(protos, 1, axis=2) + np.roll(protos, -1, axis=2)
        ) / 5.0
    lo = protos.min(axis=(1, 2), keepdims=True)
    hi = protos.max(axis=(1, 2), keepdims=True)
    return (protos - lo) / (hi - lo)


def make_digit_surrogate(directory: Path, n_train: int = 5000,
                         n_test: int = 1000, seed: int = SURROGATE_SEED) -> dict:
    """Write train/test IDX image+label files; returns their paths.

    Samples are a class prototype shifted by up to 2 pixels plus pixel noise,
    balanced across the 10 classes. Everything derives from the seed.
    """
    protos = _digit_prototypes(labeled_rng(seed, "prototypes"))

    def render(count: int, tag: str) -> tuple[np.ndarray, np.ndarray]:
        rng = labeled_rng(seed, "samples", tag)
        labels = np.arange(count) % 10
        images = np.empty((count, 28, 28), dtype=np.uint8)
        for i, c in enumerate(labels):
            img = protos[c]
            dx, dy = rng.integers(-2, 3, size=2)
            img = np.roll(np.roll(img, dx, axis=0), dy, axis=1)
            img = img + rng.normal(0.0, 0.5, size=img.shape)
            images[i] = (np.clip(img, 0.0, 1.0) * 255).astype(np.uint8)
        return images, labels.astype(np.uint8)

    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "train_images": directory / "train-images-idx3-ubyte",
        "train_labels": directory / "train-labels-idx1-ubyte",
        "test_images": directory / "t10k-images-idx3-ubyte",
        "test_labels": directory / "t10k-labels-idx1-ubyte",
    }
    images, labels = render(n_train, "train")
    write_idx_images(paths["train_images"], images)
    write_idx_labels(paths["train_labels"], labels)
    images, labels = render(n_test, "test")
    write_idx_images(paths["test_images"], images)
    write_idx_labels(paths["test_labels"], labels)
    return paths


@pytest.fixture(scope="session")
def digit_idx_paths(tmp_path_factory) -> dict:
    return make_digit_surrogate(tmp_path_factory.mktemp("digits"))


@pytest.fixture(scope="session")
def small_blobs():
    """240 train / 60 test, 3 classes, well separated; fast to train on."""
    return engine.synth_blobs(seed=7, n_per_class=100, n_classes=3,
                              n_features=10, separation=8.0)


@pytest.fixture(scope="session")
def blob_setup(small_blobs) -> tuner.TrialSetup:
    train_set, test_set = small_blobs
    return tuner.TrialSetup(
        train_set=train_set,
        test_set=test_set,
        model_spec=engine.ModelSpec(arch="mlp", hidden_units=16,
                                    weight_decay=0.0005),
        optimizer_spec=engine.OptimizerSpec("momentum", 0.9),
        batch_size=20,
        epochs=3,
        seed=42,
    )
