"""Dataset ingestion: IDX image/label files, CIFAR-style binary batches, and
seeded synthetic Gaussian blobs for desk-scale experiments.

Features always come out as float64 scaled to [0, 1], applied exactly once:
pixel bytes divide by 255, blob coordinates are min-max scaled over the full
generated set before splitting.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
import numpy as np

from ..rng import labeled_rng

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801
CIFAR_RECORD_BYTES = 3073  # 1 label byte + 32*32*3 pixel bytes


class BadMagic(ValueError):
    """File does not start with the expected IDX magic number."""


class CountMismatch(ValueError):
    """Image file and label file disagree on the number of samples."""


class TruncatedFile(ValueError):
    """File is shorter than its header (or record structure) promises."""


class LabelOutOfRange(ValueError):
    """A label byte falls outside the valid class range."""


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray  # (n, d) float64 in [0, 1]
    labels: np.ndarray  # (n,) int64 in [0, n_classes)
    n_classes: int
    split: str  # "train" | "test"

    def __post_init__(self) -> None:
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        if features.ndim != 2 or labels.shape != (features.shape[0],):
            raise ValueError("features must be (n, d) with one label per row")
        if labels.size and (labels.min() < 0 or labels.max() >= self.n_classes):
            raise ValueError("labels must lie in [0, n_classes)")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def take(self, n: int) -> "Dataset":
        """First n samples (deterministic truncation for desk-scale runs)."""
        if not (1 <= n <= self.n_samples):
            raise ValueError(f"n must be in [1, {self.n_samples}], got {n}")
        return Dataset(self.features[:n], self.labels[:n], self.n_classes, self.split)


def _read_be_u32(data: bytes, offset: int) -> int:
    return int.from_bytes(data[offset : offset + 4], "big")


def load_idx(image_path, label_path, n_classes: int | None = None,
             split: str = "train") -> Dataset:
    """Load an IDX image file plus its IDX label file.

    Images: magic 0x00000803, then three big-endian u32 dims (count, rows,
    cols), then unsigned pixel bytes in row-major order. Labels: magic
    0x00000801, one u32 count, then label bytes.
    """
    image_bytes = Path(image_path).read_bytes()
    label_bytes = Path(label_path).read_bytes()

    if len(image_bytes) < 16:
        raise TruncatedFile(f"{image_path}: too short for an IDX image header")
    if _read_be_u32(image_bytes, 0) != IDX_IMAGE_MAGIC:
        raise BadMagic(
            f"{image_path}: expected magic 0x{IDX_IMAGE_MAGIC:08x}, "
            f"got 0x{_read_be_u32(image_bytes, 0):08x}"
        )
    n_images = _read_be_u32(image_bytes, 4)
    rows = _read_be_u32(image_bytes, 8)
    cols = _read_be_u32(image_bytes, 12)
    expected = 16 + n_images * rows * cols
    if len(image_bytes) < expected:
        raise TruncatedFile(
            f"{image_path}: header promises {expected} bytes, file has {len(image_bytes)}"
        )

    if len(label_bytes) < 8:
        raise TruncatedFile(f"{label_path}: too short for an IDX label header")
    if _read_be_u32(label_bytes, 0) != IDX_LABEL_MAGIC:
        raise BadMagic(
            f"{label_path}: expected magic 0x{IDX_LABEL_MAGIC:08x}, "
            f"got 0x{_read_be_u32(label_bytes, 0):08x}"
        )
    n_labels = _read_be_u32(label_bytes, 4)
    if len(label_bytes) < 8 + n_labels:
        raise TruncatedFile(
            f"{label_path}: header promises {8 + n_labels} bytes, file has {len(label_bytes)}"
        )
    if n_images != n_labels:
        raise CountMismatch(f"{n_images} images vs {n_labels} labels")

    pixels = np.frombuffer(image_bytes, dtype=np.uint8, count=n_images * rows * cols,
                           offset=16)
    features = pixels.reshape(n_images, rows * cols).astype(np.float64) / 255.0
    labels = np.frombuffer(label_bytes, dtype=np.uint8, count=n_labels, offset=8)
    labels = labels.astype(np.int64)
    if n_classes is None:
        n_classes = int(labels.max()) + 1 if labels.size else 0
    return Dataset(features, labels, n_classes, split)


def load_cifar_bin(paths, split: str = "train") -> Dataset:
    """Load one or more CIFAR-style binary batch files.

    Each record is 3073 bytes: one label byte in [0, 10) followed by 3072
    pixel bytes.
    """
    if isinstance(paths, (str, Path)):
        paths = [paths]
    feature_parts: list[np.ndarray] = []
    label_parts: list[np.ndarray] = []
    for path in paths:
        data = Path(path).read_bytes()
        if len(data) == 0 or len(data) % CIFAR_RECORD_BYTES != 0:
            raise TruncatedFile(
                f"{path}: length {len(data)} is not a positive multiple of "
                f"{CIFAR_RECORD_BYTES}"
            )
        records = np.frombuffer(data, dtype=np.uint8).reshape(-1, CIFAR_RECORD_BYTES)
        labels = records[:, 0].astype(np.int64)
        if labels.max() >= 10:
            raise LabelOutOfRange(
                f"{path}: label {int(labels.max())} outside [0, 10)"
            )
        label_parts.append(labels)
        feature_parts.append(records[:, 1:].astype(np.float64) / 255.0)
    return Dataset(
        np.concatenate(feature_parts), np.concatenate(label_parts), 10, split
    )


def synth_blobs(
    seed: int,
    n_per_class: int,
    n_classes: int,
    n_features: int,
    separation: float,
) -> tuple[Dataset, Dataset]:
    """Seeded Gaussian clusters with an 80/20 train/test split.

    Cluster centers are drawn once from the seed and rescaled so their
    minimum pairwise distance equals ``separation`` (in units of the unit
    per-cluster standard deviation), then all coordinates are min-max scaled
    to [0, 1]. Bit-identical output for identical arguments.
    """
    if n_classes < 2 or n_features < 2:
        raise ValueError("need n_classes >= 2 and n_features >= 2")
    if separation <= 0:
        raise ValueError("separation must be > 0")
    if n_per_class < 2:
        raise ValueError("need n_per_class >= 2 for an 80/20 split")

    centers = labeled_rng(seed, "blob-centers").standard_normal((n_classes, n_features))
    dists = np.linalg.norm(centers[:, None, :] - centers[None, :, :], axis=-1)
    min_dist = dists[np.triu_indices(n_classes, k=1)].min()
    centers *= separation / min_dist

    features = np.empty((n_classes * n_per_class, n_features))
    labels = np.empty(n_classes * n_per_class, dtype=np.int64)
    for c in range(n_classes):
        noise = labeled_rng(seed, "blob-samples", c).standard_normal(
            (n_per_class, n_features)
        )
        features[c * n_per_class : (c + 1) * n_per_class] = centers[c] + noise
        labels[c * n_per_class : (c + 1) * n_per_class] = c

    lo = features.min(axis=0)
    span = features.max(axis=0) - lo
    span[span == 0.0] = 1.0
    features = (features - lo) / span

    n_train = int(0.8 * n_per_class)
    train_idx: list[np.ndarray] = []
    test_idx: list[np.ndarray] = []
    for c in range(n_classes):
        start = c * n_per_class
        train_idx.append(np.arange(start, start + n_train))
        test_idx.append(np.arange(start + n_train, start + n_per_class))
    tr = np.concatenate(train_idx)
    te = np.concatenate(test_idx)
    train = Dataset(features[tr], labels[tr], n_classes, "train")
    test = Dataset(features[te], labels[te], n_classes, "test")
    return train, test
