"""Class-conditional topological profiles and Topological Uncertainty.

Fitting walks the training set through the network, groups samples by their
*predicted* class (the score must work label-free at deployment), and keeps
one rank-wise mean diagram per (layer, class) pair instead of every training
diagram. The Topological Uncertainty of a new observation is the average,
over the profiled layers, of the dist2 distance between its diagrams and
the mean diagrams of its predicted class: low TU means the observation
drives the network the way training data of that class did.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import metrics, topology
from .data import Dataset, fmt_float
from .errors import ClassUncoveredError, FileFormatError, FingerprintMismatchError
from .model import NetworkModel, forward, network_fingerprint
from .topology import PersistenceDiagram

_MAGIC = "topomon-profile"
_VERSION = "v1"


@dataclass(frozen=True)
class TUReport:
    """Score of one observation: tu is the arithmetic mean of the per-layer
    distances."""

    tu: float
    predicted: int
    per_layer: tuple[tuple[int, float], ...]
    confidence: float


@dataclass(frozen=True)
class TopologicalProfile:
    """Fitted reference: per (layer, class) mean diagrams, the TU values of
    the fitting samples, and the fingerprint of the network they belong to."""

    fingerprint: str
    layers: tuple[int, ...]
    num_classes: int
    means: Mapping[tuple[int, int], PersistenceDiagram]
    train_tu: np.ndarray
    counts: Mapping[int, int]

    def __post_init__(self):
        layers = tuple(int(l) for l in self.layers)
        if not layers:
            raise ValueError("profile needs a nonempty layer subset")
        means = dict(self.means)
        for layer in layers:
            sizes = {
                d.cardinality for (l, _), d in means.items() if l == layer
            }
            if len(sizes) > 1:
                raise ValueError(f"layer {layer}: inconsistent diagram sizes {sizes}")
        counts = {int(k): int(c) for k, c in self.counts.items()}
        if any(c < 1 for c in counts.values()):
            raise ValueError("per-class counts must be >= 1")
        tu = np.asarray(self.train_tu, dtype=np.float64)
        if tu.ndim != 1:
            raise ValueError("train_tu must be a vector")
        if tu.size and (np.any(tu < 0) or np.any(np.diff(tu) < 0)):
            raise ValueError("train_tu must be sorted non-decreasing and >= 0")
        tu = tu.copy()
        tu.setflags(write=False)
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "train_tu", tu)

    def diagram_size(self, layer: int) -> int:
        for (l, _), d in self.means.items():
            if l == layer:
                return d.cardinality
        raise KeyError(f"layer {layer} not in profile")


def _features_array(train_data) -> np.ndarray:
    if isinstance(train_data, Dataset):
        return train_data.features
    feats = np.ascontiguousarray(train_data, dtype=np.float64)
    if feats.ndim != 2:
        raise ValueError(f"training data must be 2-D, got shape {feats.shape}")
    return feats


def _include_output(net: NetworkModel, layers: Sequence[int]) -> bool:
    return max(layers) >= net.depth


def fit_profile(
    net: NetworkModel,
    train_data,
    *,
    layers=None,
    subsample: int | None = None,
    seed: int = 0,
    include_output: bool = False,
) -> TopologicalProfile:
    """Fit the per-class topological profile of `net` on training features.

    Samples are grouped by predicted class; every class 0..K-1 must receive
    at least one sample, otherwise a ClassUncoveredError lists the missing
    ones (a silent fallback would make later scores meaningless for those
    classes). `subsample` caps each class at that many samples, drawn
    uniformly without replacement from per-class generators spawned off
    `seed`, so results are reproducible and independent of other classes.
    The TU of every fitting sample against the finished profile is stored
    sorted as `train_tu`.
    """
    feats = _features_array(train_data)
    if feats.shape[0] == 0:
        raise ValueError("empty training set")
    if subsample is not None and subsample < 1:
        raise ValueError(f"subsample cap must be >= 1, got {subsample}")
    if layers is None:
        layers = topology.default_layers(net, include_output)
    layers = tuple(sorted(int(l) for l in set(layers)))
    for l in layers:
        if not 1 <= l <= (net.depth if include_output else net.depth - 1):
            raise ValueError(f"layer index {l} out of range")
    include_output = include_output or _include_output(net, layers)

    traces = [forward(net, x) for x in feats]
    by_class: dict[int, list[int]] = {}
    for i, t in enumerate(traces):
        by_class.setdefault(t.predicted, []).append(i)

    missing = [k for k in range(net.num_classes) if k not in by_class]
    if missing:
        raise ClassUncoveredError(
            f"no training sample is predicted as class(es) {missing}; "
            "the profile cannot cover them"
        )

    if subsample is not None:
        children = np.random.SeedSequence(seed).spawn(net.num_classes)
        for k in sorted(by_class):
            idx = by_class[k]
            if len(idx) > subsample:
                rng = np.random.default_rng(children[k])
                chosen = rng.choice(len(idx), size=subsample, replace=False)
                by_class[k] = [idx[i] for i in sorted(chosen)]

    fitting = sorted(i for idx in by_class.values() for i in idx)
    diagrams = {
        i: topology.diagrams_from_trace(net, traces[i], layers, include_output)
        for i in fitting
    }

    means: dict[tuple[int, int], PersistenceDiagram] = {}
    for k, idx in sorted(by_class.items()):
        for pos, layer in enumerate(layers):
            means[(layer, k)] = metrics.frechet_mean([diagrams[i][pos] for i in idx])

    profile = TopologicalProfile(
        fingerprint=network_fingerprint(net),
        layers=layers,
        num_classes=net.num_classes,
        means=means,
        train_tu=np.empty(0),
        counts={k: len(idx) for k, idx in by_class.items()},
    )
    train_tu = [
        _tu_from_diagrams(profile, diagrams[i], traces[i].predicted).tu
        for i in fitting
    ]
    return replace(profile, train_tu=np.sort(np.asarray(train_tu)))


def _tu_from_diagrams(
    profile: TopologicalProfile,
    diagrams: Sequence[PersistenceDiagram],
    predicted: int,
    confidence: float = float("nan"),
) -> TUReport:
    per_layer = []
    for layer, diag in zip(profile.layers, diagrams):
        mean = profile.means.get((layer, predicted))
        if mean is None:
            raise ClassUncoveredError(
                f"profile has no mean diagram for predicted class {predicted} "
                f"at layer {layer}"
            )
        per_layer.append((layer, metrics.diagram_distance(diag, mean, "dist2")))
    tu = float(np.mean([d for _, d in per_layer]))
    return TUReport(
        tu=tu, predicted=predicted, per_layer=tuple(per_layer), confidence=confidence
    )


def topological_uncertainty(
    profile: TopologicalProfile, net: NetworkModel, x
) -> TUReport:
    """Topological Uncertainty of one observation: the mean over profiled
    layers of the dist2 distance between the observation's diagrams and the
    stored means of its predicted class."""
    if network_fingerprint(net) != profile.fingerprint:
        raise FingerprintMismatchError(
            "profile was fitted on a different network (fingerprint mismatch)"
        )
    trace = forward(net, x)
    include_output = _include_output(net, profile.layers)
    diagrams = topology.diagrams_from_trace(net, trace, profile.layers, include_output)
    return _tu_from_diagrams(profile, diagrams, trace.predicted, trace.confidence)


def tu_min_over_train(
    net: NetworkModel,
    stored: Sequence[tuple[Mapping[int, PersistenceDiagram], int]],
    x,
    layer: int,
    include_output: bool = False,
) -> float:
    """Minimum dist2 between the observation's layer diagram and the stored
    diagrams of training samples sharing its predicted class. This is the
    raw nearest-training-diagram view of uncertainty that profile means
    summarize."""
    trace = forward(net, x)
    own = topology.diagrams_from_trace(net, trace, (layer,), include_output)[0]
    best = None
    for sample_diagrams, predicted in stored:
        if predicted != trace.predicted:
            continue
        ref = sample_diagrams[layer]
        d = metrics.diagram_distance(own, ref, "dist2")
        if best is None or d < best:
            best = d
    if best is None:
        raise ClassUncoveredError(
            f"no stored sample has predicted class {trace.predicted}"
        )
    return best


def score_batch(
    profile: TopologicalProfile, net: NetworkModel, batch
) -> list[TUReport]:
    """Score a batch sample by sample, preserving order. The first failing
    sample aborts the batch with its index prepended to the error."""
    reports = []
    for i, x in enumerate(batch):
        try:
            reports.append(topological_uncertainty(profile, net, x))
        except (ValueError, ClassUncoveredError, FingerprintMismatchError) as exc:
            raise type(exc)(f"sample {i}: {exc}") from exc
    return reports


# ---------------------------------------------------------------------------
# profile files


def serialize_profile(profile: TopologicalProfile) -> str:
    lines = [
        f"{_MAGIC} {_VERSION}",
        f"fingerprint {profile.fingerprint}",
        f"num_classes {profile.num_classes}",
        "layers " + " ".join(str(l) for l in profile.layers),
        "diagram_sizes "
        + " ".join(f"{l}:{profile.diagram_size(l)}" for l in profile.layers),
        "counts "
        + " ".join(f"{k}:{profile.counts[k]}" for k in sorted(profile.counts)),
    ]
    for (layer, k) in sorted(profile.means):
        lines.append(f"mean {layer} {k}")
        lines.append(" ".join(fmt_float(v) for v in profile.means[(layer, k)].weights))
    lines.append(f"train_tu {profile.train_tu.size}")
    if profile.train_tu.size:
        lines.append(" ".join(fmt_float(v) for v in profile.train_tu))
    lines.append("end")
    return "\n".join(lines) + "\n"


def save_profile(profile: TopologicalProfile, path) -> None:
    Path(path).write_text(serialize_profile(profile), encoding="utf-8")


def load_profile(path) -> TopologicalProfile:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    pos = 0

    def next_line() -> str:
        nonlocal pos
        while pos < len(lines):
            line = lines[pos].strip()
            pos += 1
            if line:
                return line
        raise FileFormatError(f"{path}: truncated profile file")

    header = next_line().split()
    if len(header) != 2 or header[0] != _MAGIC:
        raise FileFormatError(f"{path}: not a {_MAGIC} file")
    if header[1] != _VERSION:
        raise FileFormatError(f"{path}: unsupported format version {header[1]!r}")
    fp = next_line().split()
    if len(fp) != 2 or fp[0] != "fingerprint":
        raise FileFormatError(f"{path}: fingerprint line missing")
    fingerprint = fp[1]

    def tagged(tag: str) -> list[str]:
        parts = next_line().split()
        if not parts or parts[0] != tag:
            raise FileFormatError(f"{path}: expected {tag!r} line, got {parts!r}")
        return parts[1:]

    try:
        num_classes = int(tagged("num_classes")[0])
        layers = tuple(int(v) for v in tagged("layers"))
        sizes = dict(
            (int(a), int(b))
            for a, b in (tok.split(":") for tok in tagged("diagram_sizes"))
        )
        counts = dict(
            (int(a), int(b)) for a, b in (tok.split(":") for tok in tagged("counts"))
        )
        means: dict[tuple[int, int], PersistenceDiagram] = {}
        while True:
            parts = next_line().split()
            if parts[0] == "train_tu":
                break
            if parts[0] != "mean" or len(parts) != 3:
                raise FileFormatError(f"{path}: expected 'mean <layer> <class>' line")
            layer, k = int(parts[1]), int(parts[2])
            weights = np.array([float(v) for v in next_line().split()])
            if layer not in sizes or weights.size != sizes[layer]:
                raise FileFormatError(
                    f"{path}: mean {layer} {k}: expected {sizes.get(layer)} weights, "
                    f"got {weights.size}"
                )
            means[(layer, k)] = PersistenceDiagram(weights)
        n_tu = int(parts[1])
        train_tu = (
            np.array([float(v) for v in next_line().split()])
            if n_tu
            else np.empty(0)
        )
        if train_tu.size != n_tu:
            raise FileFormatError(
                f"{path}: expected {n_tu} train_tu values, got {train_tu.size}"
            )
        if next_line() != "end":
            raise FileFormatError(f"{path}: missing end marker")
        return TopologicalProfile(
            fingerprint=fingerprint,
            layers=layers,
            num_classes=num_classes,
            means=means,
            train_tu=train_tu,
            counts=counts,
        )
    except FileFormatError:
        raise
    except ValueError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc
