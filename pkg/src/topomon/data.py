"""Delimited-text datasets: a feature matrix plus optional integer labels.

File layout: a single header line declaring the feature count and whether a
label column is present, then one comma-separated row per sample. Floats are
written with ``repr`` so a save/load cycle is bit-exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FileFormatError

_MAGIC = "topomon-dataset"
_VERSION = "v1"


def fmt_float(v) -> str:
    """Shortest decimal that round-trips the float64 value."""
    return repr(float(v))


@dataclass(frozen=True)
class Dataset:
    """Samples as rows of `features`; `labels` is None for unlabeled data."""

    features: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        # copies: freezing must never make the caller's arrays read-only
        feats = np.array(self.features, dtype=np.float64, order="C")
        if feats.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {feats.shape}")
        if not np.all(np.isfinite(feats)):
            raise ValueError("features contain non-finite entries")
        feats.setflags(write=False)
        object.__setattr__(self, "features", feats)
        if self.labels is not None:
            labels = np.array(self.labels, dtype=np.int64, order="C")
            if labels.shape != (feats.shape[0],):
                raise ValueError(
                    f"labels shape {labels.shape} does not match {feats.shape[0]} samples"
                )
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def labeled(self) -> bool:
        return self.labels is not None


def save_dataset(dataset: Dataset, path) -> None:
    Path(path).write_text(serialize_dataset(dataset), encoding="utf-8")


def serialize_dataset(dataset: Dataset) -> str:
    lines = [
        f"{_MAGIC} {_VERSION} features={dataset.dim} labeled={int(dataset.labeled)}"
    ]
    for i in range(len(dataset)):
        row = ",".join(fmt_float(v) for v in dataset.features[i])
        if dataset.labeled:
            row += f",{int(dataset.labels[i])}"
        lines.append(row)
    return "\n".join(lines) + "\n"


def load_dataset(path) -> Dataset:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise FileFormatError(f"{path}: empty dataset file")
    header = lines[0].split()
    if len(header) != 4 or header[0] != _MAGIC:
        raise FileFormatError(f"{path}: not a {_MAGIC} file")
    if header[1] != _VERSION:
        raise FileFormatError(f"{path}: unsupported format version {header[1]!r}")
    try:
        dim = int(header[2].removeprefix("features="))
        labeled = bool(int(header[3].removeprefix("labeled=")))
    except ValueError as exc:
        raise FileFormatError(f"{path}: malformed header: {lines[0]!r}") from exc
    width = dim + (1 if labeled else 0)
    feats, labels = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != width:
            raise FileFormatError(
                f"{path}:{lineno}: expected {width} columns, got {len(parts)}"
            )
        try:
            feats.append([float(p) for p in parts[:dim]])
            if labeled:
                labels.append(int(parts[dim]))
        except ValueError as exc:
            raise FileFormatError(f"{path}:{lineno}: unparseable value") from exc
    features = np.asarray(feats, dtype=np.float64).reshape(len(feats), dim)
    try:
        return Dataset(features, np.asarray(labels) if labeled else None)
    except ValueError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc
