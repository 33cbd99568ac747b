"""Activation graphs and their spanning-tree persistence diagrams.

For a network and an input, every layer l induces a complete bipartite graph
between its d_l input units and d_{l+1} output units; edge (i, j) weighs
|W_l(i, j) * x_l(i)|, how strongly the observation drives that connection.
The 0-dimensional superlevel persistence of such a graph reduces to the
weights of a maximum spanning tree (each edge inserted in decreasing weight
order either merges two components, contributing a diagram point, or closes
a loop, which we ignore), so a diagram is simply the non-increasing vector
of the d_l + d_{l+1} - 1 MST edge weights. The unbounded birth coordinate
shared by every point carries no information and is discarded.

Layer indices are 1-based: layer 1 connects the input to the first hidden
activation. The final layer (the linear map feeding the softmax) is excluded
by default and admitted with ``include_output=True``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import ActivationTrace, NetworkModel, forward


@dataclass(frozen=True)
class ActivationGraph:
    """Dense non-negative weight matrix of one layer's bipartite graph."""

    layer_index: int
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64, order="C")
        if w.ndim != 2 or w.shape[0] == 0 or w.shape[1] == 0:
            raise ValueError(f"weights must be a nonempty 2-D matrix, got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("non-finite edge weight")
        if np.any(w < 0.0):
            raise ValueError("negative edge weight")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def in_size(self) -> int:
        return self.weights.shape[0]

    @property
    def out_size(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class PersistenceDiagram:
    """Non-increasing vector of non-negative spanning-tree weights.

    The constructor sorts defensively, so any non-negative weight multiset
    is accepted; equality of diagrams is equality of the sorted vectors.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ValueError(f"diagram weights must be a nonempty vector, got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("non-finite diagram weight")
        if np.any(w < 0.0):
            raise ValueError("negative diagram weight")
        w = np.sort(w)[::-1].copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.weights.size

    @property
    def cardinality(self) -> int:
        return self.weights.size


def _check_layer_index(net: NetworkModel, layer: int, include_output: bool) -> None:
    top = net.depth if include_output else net.depth - 1
    if top < 1:
        raise ValueError(
            "network has a single (softmax) layer; pass include_output=True "
            "to build its activation graph"
        )
    if not 1 <= layer <= top:
        raise ValueError(f"layer index {layer} out of range [1, {top}]")


def activation_graph(
    trace: ActivationTrace,
    net: NetworkModel,
    layer: int,
    include_output: bool = False,
) -> ActivationGraph:
    """Bipartite graph of one layer: entry (i, j) is |W(i, j) * x(i)| with x
    the layer's input activation from the trace."""
    _check_layer_index(net, layer, include_output)
    x = trace.activations[layer - 1]
    w = net.layers[layer - 1].weights
    return ActivationGraph(layer_index=layer, weights=np.abs(w * x[:, None]))


def persistence_diagram(graph: ActivationGraph) -> PersistenceDiagram:
    """Maximum-spanning-tree weight multiset of the graph, computed by
    Kruskal on edges sorted by decreasing weight with union-find."""
    return PersistenceDiagram(_kernels.mst_weights(graph.weights))


def default_layers(net: NetworkModel, include_output: bool = False) -> tuple[int, ...]:
    """All admissible layer indices, in order."""
    top = net.depth if include_output else net.depth - 1
    return tuple(range(1, top + 1))


def diagrams_from_trace(
    net: NetworkModel,
    trace: ActivationTrace,
    layers=None,
    include_output: bool = False,
) -> list[PersistenceDiagram]:
    """Diagrams for the selected layers of an already-computed trace.

    Touches only the selected layers' weight matrices, so restricting
    `layers` restricts cost proportionally.
    """
    if layers is None:
        layers = default_layers(net, include_output)
    layers = tuple(int(l) for l in layers)
    if not layers:
        raise ValueError("layer subset must be nonempty")
    return [
        persistence_diagram(activation_graph(trace, net, l, include_output))
        for l in layers
    ]


def diagrams_for(
    net: NetworkModel,
    x,
    layers=None,
    include_output: bool = False,
) -> list[PersistenceDiagram]:
    """Forward pass followed by one diagram per selected layer, in layer
    order."""
    return diagrams_from_trace(net, forward(net, x), layers, include_output)


def lipschitz_constants(net: NetworkModel) -> np.ndarray:
    """Per-layer stability bounds: entry l-1 bounds how fast layer l's
    diagram can move per unit sup-norm change of the input.

    A single layer contributes the maximum over output units of the
    column-wise sum of |W|; the bound for layer l is the product of the
    contributions of layers 1..l. For any inputs x, y the sup distance
    between layer-l diagrams is at most bound[l-1] * max|x - y| (each edge
    weight moves by at most |W(i,j)| * |x_l(i) - y_l(i)|, and a sup-norm
    perturbation of a graph's weights moves its spanning-tree multiset by
    no more than that perturbation).
    """
    per_layer = np.array(
        [np.abs(l.weights).sum(axis=0).max() for l in net.layers], dtype=np.float64
    )
    return np.cumprod(per_layer)
