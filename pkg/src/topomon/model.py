"""Sequential dense networks: evaluation, a portable text format, and a
small gradient-checked trainer for producing experiment fixtures.

A network is a chain of dense layers; layer ``l`` maps a vector of size
``d_l`` to size ``d_{l+1}`` through ``act(x @ W + b)`` with ``W`` of shape
(d_l, d_{l+1}). The last layer always applies a max-subtracted softmax, so
outputs are probability vectors over ``num_classes`` classes.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .data import Dataset, fmt_float
from .errors import FileFormatError

HIDDEN_ACTIVATIONS = ("relu", "sigmoid", "identity")
OUTPUT_ACTIVATION = "softmax"

_MAGIC = "topomon-network"
_VERSION = "v1"


def softmax(logits):
    """Numerically stabilized softmax (max subtraction)."""
    z = np.asarray(logits, dtype=np.float64)
    e = np.exp(z - np.max(z, axis=-1, keepdims=True))
    return e / np.sum(e, axis=-1, keepdims=True)


def apply_activation(kind: str, z):
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "sigmoid":
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out
    if kind == "identity":
        return np.array(z, copy=True)
    raise ValueError(f"unknown activation {kind!r}")


def _activation_derivative(kind: str, z, activated):
    # derivative w.r.t. the pre-activation z; `activated` = act(z) is reused
    # where cheaper
    if kind == "relu":
        return (z > 0.0).astype(np.float64)
    if kind == "sigmoid":
        return activated * (1.0 - activated)
    if kind == "identity":
        return np.ones_like(z)
    raise ValueError(f"unknown activation {kind!r}")


@dataclass(frozen=True)
class DenseLayer:
    """One dense layer: weights (rows = input units, cols = output units),
    bias of length cols, and the activation applied after the affine map."""

    weights: np.ndarray
    bias: np.ndarray
    activation: str

    def __post_init__(self):
        # copies: freezing must never make the caller's arrays read-only
        w = np.array(self.weights, dtype=np.float64, order="C")
        b = np.array(self.bias, dtype=np.float64, order="C")
        if w.ndim != 2:
            raise ValueError(f"weights must be 2-D, got shape {w.shape}")
        if b.shape != (w.shape[1],):
            raise ValueError(
                f"bias length {b.shape} does not match {w.shape[1]} output units"
            )
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ValueError("non-finite entry in weights or bias")
        if self.activation not in HIDDEN_ACTIVATIONS + (OUTPUT_ACTIVATION,):
            raise ValueError(f"unknown activation {self.activation!r}")
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def in_size(self) -> int:
        return self.weights.shape[0]

    @property
    def out_size(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class NetworkModel:
    """Immutable stack of dense layers; safe to share across threads."""

    layers: tuple[DenseLayer, ...]

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ValueError("network needs at least one layer")
        for i, layer in enumerate(layers, start=1):
            if i < len(layers):
                if layer.activation not in HIDDEN_ACTIVATIONS:
                    raise ValueError(
                        f"layer {i}: hidden activation must be one of "
                        f"{HIDDEN_ACTIVATIONS}, got {layer.activation!r}"
                    )
            elif layer.activation != OUTPUT_ACTIVATION:
                raise ValueError(
                    f"layer {i}: final activation must be {OUTPUT_ACTIVATION!r}"
                )
            if i > 1 and layer.in_size != layers[i - 2].out_size:
                raise ValueError(
                    f"layer {i}: expects {layers[i - 2].out_size} inputs "
                    f"but weight matrix has {layer.in_size} rows"
                )
        object.__setattr__(self, "layers", layers)

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_size

    @property
    def num_classes(self) -> int:
        return self.layers[-1].out_size

    @property
    def depth(self) -> int:
        """Number of dense layers L."""
        return len(self.layers)

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        """(d_1, ..., d_{L+1}): input size followed by every output size."""
        return (self.input_dim,) + tuple(l.out_size for l in self.layers)


@dataclass(frozen=True)
class ActivationTrace:
    """Per-layer activation vectors x_1..x_L (x_1 is the input; the softmax
    result lives in `output`), plus the prediction it induces."""

    activations: tuple[np.ndarray, ...]
    output: np.ndarray
    predicted: int
    confidence: float


def forward(net: NetworkModel, x) -> ActivationTrace:
    """Evaluate the network on one input, recording every intermediate
    activation. Ties in the output argmax resolve to the lowest index."""
    a = np.array(x, dtype=np.float64, order="C")
    if a.shape != (net.input_dim,):
        raise ValueError(
            f"input has shape {a.shape}, network expects ({net.input_dim},)"
        )
    if not np.all(np.isfinite(a)):
        raise ValueError("input contains non-finite entries")
    activations = [a]
    for layer in net.layers[:-1]:
        a = apply_activation(layer.activation, a @ layer.weights + layer.bias)
        activations.append(a)
    last = net.layers[-1]
    output = softmax(a @ last.weights + last.bias)
    for vec in activations:
        vec.setflags(write=False)
    output.setflags(write=False)
    predicted = int(np.argmax(output))
    return ActivationTrace(
        activations=tuple(activations),
        output=output,
        predicted=predicted,
        confidence=float(output[predicted]),
    )


def predict(net: NetworkModel, x) -> tuple[int, float]:
    """(predicted class, confidence) for one input."""
    trace = forward(net, x)
    return trace.predicted, trace.confidence


def evaluate_accuracy(net: NetworkModel, features, labels) -> float:
    """Fraction of samples whose predicted class equals the label."""
    labels = np.asarray(labels)
    if len(labels) == 0:
        raise ValueError("empty evaluation set")
    hits = sum(predict(net, x)[0] == int(y) for x, y in zip(features, labels))
    return hits / len(labels)


# ---------------------------------------------------------------------------
# portable text format


def serialize_network(net: NetworkModel) -> str:
    """Canonical text form; `network_fingerprint` hashes exactly this."""
    lines = [
        f"{_MAGIC} {_VERSION}",
        f"input_dim {net.input_dim}",
        f"num_classes {net.num_classes}",
        f"layers {net.depth}",
    ]
    for i, layer in enumerate(net.layers, start=1):
        lines.append(
            f"layer {i} {layer.in_size} {layer.out_size} {layer.activation}"
        )
        for row in layer.weights:
            lines.append(" ".join(fmt_float(v) for v in row))
        lines.append(" ".join(fmt_float(v) for v in layer.bias))
    lines.append("end")
    return "\n".join(lines) + "\n"


def save_network(net: NetworkModel, path) -> None:
    Path(path).write_text(serialize_network(net), encoding="utf-8")


def network_fingerprint(net: NetworkModel) -> str:
    """SHA-256 of the canonical serialization; equals the file hash for
    files written by save_network."""
    return hashlib.sha256(serialize_network(net).encode("utf-8")).hexdigest()


class _LineReader:
    def __init__(self, path, lines):
        self.path = path
        self.lines = lines
        self.pos = 0

    def next(self) -> str:
        while self.pos < len(self.lines):
            line = self.lines[self.pos].strip()
            self.pos += 1
            if line:
                return line
        raise FileFormatError(f"{self.path}: truncated file")

    def floats(self, count: int, context: str) -> np.ndarray:
        parts = self.next().split()
        if len(parts) != count:
            raise FileFormatError(
                f"{self.path}: {context}: expected {count} values, got {len(parts)}"
            )
        try:
            return np.array([float(p) for p in parts], dtype=np.float64)
        except ValueError as exc:
            raise FileFormatError(f"{self.path}: {context}: unparseable value") from exc


def load_network(path) -> NetworkModel:
    """Parse a network file, validating structure as it goes. Errors name
    the offending layer."""
    reader = _LineReader(path, Path(path).read_text(encoding="utf-8").splitlines())
    header = reader.next().split()
    if len(header) != 2 or header[0] != _MAGIC:
        raise FileFormatError(f"{path}: not a {_MAGIC} file")
    if header[1] != _VERSION:
        raise FileFormatError(f"{path}: unsupported format version {header[1]!r}")

    def int_field(name):
        parts = reader.next().split()
        if len(parts) != 2 or parts[0] != name or not parts[1].lstrip("-").isdigit():
            raise FileFormatError(f"{path}: expected '{name} <int>', got {parts!r}")
        return int(parts[1])

    input_dim = int_field("input_dim")
    num_classes = int_field("num_classes")
    depth = int_field("layers")
    if input_dim < 1 or num_classes < 1 or depth < 1:
        raise FileFormatError(f"{path}: header fields must be positive")

    layers = []
    for i in range(1, depth + 1):
        parts = reader.next().split()
        if len(parts) != 5 or parts[0] != "layer":
            raise FileFormatError(f"{path}: layer {i}: malformed layer header")
        if int(parts[1]) != i:
            raise FileFormatError(f"{path}: layer {i}: index mismatch ({parts[1]})")
        rows, cols, activation = int(parts[2]), int(parts[3]), parts[4]
        weights = np.stack(
            [reader.floats(cols, f"layer {i} weights") for _ in range(rows)]
        )
        bias = reader.floats(cols, f"layer {i} bias")
        try:
            layers.append(DenseLayer(weights, bias, activation))
        except ValueError as exc:
            raise FileFormatError(f"{path}: layer {i}: {exc}") from exc
    if reader.next() != "end":
        raise FileFormatError(f"{path}: missing end marker")

    try:
        net = NetworkModel(tuple(layers))
    except ValueError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc
    if net.input_dim != input_dim:
        raise FileFormatError(
            f"{path}: layer 1: has {net.input_dim} input rows, header declares {input_dim}"
        )
    if net.num_classes != num_classes:
        raise FileFormatError(
            f"{path}: layer {depth}: has {net.num_classes} outputs, "
            f"header declares {num_classes}"
        )
    return net


# ---------------------------------------------------------------------------
# toy trainer (fixture generator): plain mini-batch SGD on cross-entropy


@dataclass(frozen=True)
class TrainResult:
    network: NetworkModel
    train_accuracy: float
    final_loss: float


def _batch_forward_cache(weights, biases, kinds, X):
    """Forward pass on a batch, keeping pre- and post-activations for
    backprop. Returns (activations list, pre-activations list, probs)."""
    acts = [X]
    pres = []
    a = X
    for W, b, kind in zip(weights[:-1], biases[:-1], kinds[:-1]):
        z = a @ W + b
        a = apply_activation(kind, z)
        pres.append(z)
        acts.append(a)
    logits = a @ weights[-1] + biases[-1]
    probs = softmax(logits)
    return acts, pres, probs


def _cross_entropy(probs, labels):
    n = probs.shape[0]
    picked = np.clip(probs[np.arange(n), labels], 1e-300, None)
    return float(-np.mean(np.log(picked)))


def _batch_gradients(weights, biases, kinds, X, labels):
    """Mean cross-entropy loss and its gradients for every (W, b)."""
    acts, pres, probs = _batch_forward_cache(weights, biases, kinds, X)
    n = X.shape[0]
    loss = _cross_entropy(probs, labels)
    delta = probs.copy()
    delta[np.arange(n), labels] -= 1.0
    delta /= n
    grads = [None] * len(weights)
    for li in reversed(range(len(weights))):
        grads[li] = (acts[li].T @ delta, delta.sum(axis=0))
        if li > 0:
            upstream = delta @ weights[li].T
            delta = upstream * _activation_derivative(
                kinds[li - 1], pres[li - 1], acts[li]
            )
    return loss, grads


def loss_and_gradients(net: NetworkModel, features, labels):
    """Cross-entropy loss and per-layer (dW, db) for a labeled batch; the
    analytic counterpart of a finite-difference check."""
    X = np.ascontiguousarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    weights = [l.weights for l in net.layers]
    biases = [l.bias for l in net.layers]
    kinds = [l.activation for l in net.layers]
    return _batch_gradients(weights, biases, kinds, X, y)


def train_toy(
    layer_sizes: Sequence[int],
    hidden_activation,
    data: Dataset,
    *,
    learning_rate: float = 0.5,
    epochs: int = 200,
    batch_size: int = 32,
    seed: int = 0,
) -> TrainResult:
    """Train a fixture network with mini-batch SGD, deterministically for a
    given seed.

    `layer_sizes` is the full chain (input dim, hidden sizes..., classes).
    `hidden_activation` is one name applied to every hidden layer, or a
    sequence with one name per hidden slot. No adaptive optimizer on
    purpose: fixtures must be cheap and reproducible, not state of the art.
    """
    if len(layer_sizes) < 2:
        raise ValueError("need at least input and output sizes")
    if not data.labeled:
        raise ValueError("training data must be labeled")
    n = len(data)
    if n == 0:
        raise ValueError("empty dataset")
    num_classes = layer_sizes[-1]
    y = np.asarray(data.labels, dtype=np.int64)
    if y.min() < 0 or y.max() >= num_classes:
        raise ValueError(
            f"labels must lie in [0, {num_classes - 1}], got range "
            f"[{y.min()}, {y.max()}]"
        )
    if data.dim != layer_sizes[0]:
        raise ValueError(
            f"dataset has {data.dim} features, network expects {layer_sizes[0]}"
        )

    n_hidden = len(layer_sizes) - 2
    if isinstance(hidden_activation, str):
        kinds = [hidden_activation] * n_hidden
    else:
        kinds = list(hidden_activation)
        if len(kinds) != n_hidden:
            raise ValueError(
                f"expected {n_hidden} hidden activation names, got {len(kinds)}"
            )
    for kind in kinds:
        if kind not in HIDDEN_ACTIVATIONS:
            raise ValueError(f"unknown hidden activation {kind!r}")
    kinds.append(OUTPUT_ACTIVATION)

    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out, kind in zip(layer_sizes[:-1], layer_sizes[1:], kinds):
        scale = np.sqrt(2.0 / fan_in) if kind == "relu" else np.sqrt(1.0 / fan_in)
        weights.append(rng.normal(0.0, scale, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))

    X = data.features
    loss = np.inf
    for _ in range(epochs):
        perm = rng.permutation(n)
        for start in range(0, n, batch_size):
            idx = perm[start : start + batch_size]
            loss, grads = _batch_gradients(weights, biases, kinds, X[idx], y[idx])
            for li, (dW, db) in enumerate(grads):
                weights[li] -= learning_rate * dW
                biases[li] -= learning_rate * db

    net = NetworkModel(
        tuple(DenseLayer(W, b, k) for W, b, k in zip(weights, biases, kinds))
    )
    _, _, probs = _batch_forward_cache(
        [l.weights for l in net.layers], [l.bias for l in net.layers], kinds, X
    )
    accuracy = float(np.mean(np.argmax(probs, axis=1) == y))
    return TrainResult(
        network=net, train_accuracy=accuracy, final_loss=_cross_entropy(probs, y)
    )
