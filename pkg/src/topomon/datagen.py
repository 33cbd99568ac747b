"""Input generators for the experiments: synthetic datasets, image shifts,
random reference graphs, and spectral graph features.

Every generator is a pure function of its parameters and an integer seed.
Functions that draw many independent objects spawn one child generator per
object from a seed sequence, so outputs are reproducible bit for bit and
independent of how many objects are requested before them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from ._stats import nearest_rank_quantile
from .data import Dataset
from .errors import FileFormatError


@dataclass(frozen=True)
class SimpleGraph:
    """Undirected graph: vertex count plus a set of (u, v) pairs with
    u < v < n; no self-loops, no duplicates."""

    n: int
    edges: frozenset

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph needs at least one vertex")
        edges = frozenset((int(u), int(v)) for u, v in self.edges)
        for u, v in edges:
            if not 0 <= u < v < self.n:
                raise ValueError(f"invalid edge ({u}, {v}) for {self.n} vertices")
        object.__setattr__(self, "edges", edges)

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for u, v in self.edges:
            a[u, v] = a[v, u] = 1.0
        return a


@dataclass(frozen=True)
class ShiftSpec:
    """A parametric image shift: 'pixel_corruption' flips `level` pixels
    (x -> 1 - x), 'gaussian_blur' convolves with a Gaussian of std `level`.
    Level 0 is the identity for both."""

    kind: str
    level: float
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("pixel_corruption", "gaussian_blur"):
            raise ValueError(f"unknown shift kind {self.kind!r}")
        if self.level < 0:
            raise ValueError("shift level must be >= 0")

    def apply(self, image: np.ndarray) -> np.ndarray:
        if self.kind == "pixel_corruption":
            return corrupt_pixels(image, int(self.level), self.seed)
        return gaussian_blur(image, self.level)


# ---------------------------------------------------------------------------
# image shifts


def corrupt_pixels(image, n: int, seed: int = 0) -> np.ndarray:
    """Flip exactly n distinct uniformly-chosen pixels: x -> 1 - x."""
    img = np.array(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"image must be 2-D, got shape {img.shape}")
    if np.any(img < 0) or np.any(img > 1):
        raise ValueError("pixel values must lie in [0, 1]")
    if not 0 <= n <= img.size:
        raise ValueError(f"cannot corrupt {n} of {img.size} pixels")
    if n == 0:
        return img
    rng = np.random.default_rng(seed)
    flat = img.ravel()
    chosen = rng.choice(img.size, size=n, replace=False)
    flat[chosen] = 1.0 - flat[chosen]
    return img


def gaussian_blur(image, sigma: float) -> np.ndarray:
    """Separable convolution with a normalized Gaussian kernel truncated at
    radius ceil(3*sigma); borders are reflect-padded (edge value repeated,
    which preserves the image sum exactly for a symmetric kernel)."""
    img = np.array(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"image must be 2-D, got shape {img.shape}")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return img
    radius = math.ceil(3.0 * sigma)
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(xs**2) / (2.0 * sigma**2))
    kernel /= kernel.sum()

    def convolve_axis(m: np.ndarray, axis: int) -> np.ndarray:
        pad = [(0, 0), (0, 0)]
        pad[axis] = (radius, radius)
        padded = np.pad(m, pad, mode="symmetric")
        out = np.zeros_like(m)
        for k, c in enumerate(kernel):
            sl = [slice(None), slice(None)]
            sl[axis] = slice(k, k + m.shape[axis])
            out += c * padded[tuple(sl)]
        return out

    return convolve_axis(convolve_axis(img, 0), 1)


# ---------------------------------------------------------------------------
# random reference graphs


def fake_graphs(vertex_counts, edge_counts, count: int, seed: int = 0) -> list[SimpleGraph]:
    """Erdos-Renyi lookalikes of an empirical graph population.

    Per graph: draw a vertex count n and an edge count m uniformly from the
    given empirical sample lists, then keep each of the n(n-1)/2 possible
    edges independently with probability min(1, m / n^2). On average the
    output matches the vertex and edge counts of the population it mimics.
    """
    vertex_counts = [int(v) for v in vertex_counts]
    edge_counts = [int(e) for e in edge_counts]
    if not vertex_counts or not edge_counts:
        raise ValueError("empirical sample lists must be nonempty")
    if min(vertex_counts) < 1 or min(edge_counts) < 1:
        raise ValueError("empirical samples must be positive")
    graphs = []
    for child in np.random.SeedSequence(seed).spawn(count):
        rng = np.random.default_rng(child)
        n = vertex_counts[rng.integers(len(vertex_counts))]
        m = edge_counts[rng.integers(len(edge_counts))]
        p = min(1.0, m / n**2)
        pairs = list(combinations(range(n), 2))
        keep = rng.random(len(pairs)) < p
        graphs.append(
            SimpleGraph(n=n, edges=frozenset(L for L, k in zip(pairs, keep) if k))
        )
    return graphs


def save_graph(graph: SimpleGraph, path) -> None:
    lines = [str(graph.n)]
    lines += [f"{u} {v}" for u, v in sorted(graph.edges)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_graph(path) -> SimpleGraph:
    lines = [l for l in Path(path).read_text(encoding="utf-8").splitlines() if l.strip()]
    if not lines:
        raise FileFormatError(f"{path}: empty graph file")
    try:
        n = int(lines[0])
        edges = []
        for line in lines[1:]:
            u, v = line.split()
            u, v = int(u), int(v)
            edges.append((min(u, v), max(u, v)))
        return SimpleGraph(n=n, edges=frozenset(edges))
    except ValueError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# spectral features


def jacobi_eigendecomposition(matrix, tol: float = 1e-10, max_sweeps: int = 100):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps rotate every (p, q) pair until the largest off-diagonal entry
    drops below `tol`. Returns (eigenvalues ascending, eigenvectors as
    columns, orthonormal). Input must be symmetric within 1e-12 and of size
    at most 1000.
    """
    a = np.array(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    n = a.shape[0]
    if n > 1000:
        raise ValueError("matrix too large for the Jacobi solver")
    if np.max(np.abs(a - a.T), initial=0.0) > 1e-12:
        raise ValueError("matrix is not symmetric within 1e-12")
    q = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), q

    for _ in range(max_sweeps):
        off = np.max(np.abs(a - np.diag(a.diagonal())))
        if off < tol:
            break
        for p in range(n - 1):
            for r in range(p + 1, n):
                apr = a[p, r]
                if apr == 0.0:
                    continue
                tau = (a[r, r] - a[p, p]) / (2.0 * apr)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # A <- J^T A J and Q <- Q J with the (p, r) Givens rotation
                col_p, col_r = a[:, p].copy(), a[:, r].copy()
                a[:, p] = c * col_p - s * col_r
                a[:, r] = s * col_p + c * col_r
                row_p, row_r = a[p, :].copy(), a[r, :].copy()
                a[p, :] = c * row_p - s * row_r
                a[r, :] = s * row_p + c * row_r
                a[p, r] = a[r, p] = 0.0
                qp, qr = q[:, p].copy(), q[:, r].copy()
                q[:, p] = c * qp - s * qr
                q[:, r] = s * qp + c * qr
    else:
        raise RuntimeError(f"Jacobi did not converge within {max_sweeps} sweeps")

    evals = a.diagonal().copy()
    order = np.argsort(evals, kind="stable")
    return evals[order], q[:, order]


def normalized_laplacian(graph: SimpleGraph) -> np.ndarray:
    """I - D^{-1/2} A D^{-1/2} with the zero-degree convention: an isolated
    vertex gets a zero row and diagonal, hence eigenvalue 0."""
    a = graph.adjacency()
    deg = a.sum(axis=1)
    inv_sqrt = np.where(deg > 0, 1.0 / np.sqrt(np.where(deg > 0, deg, 1.0)), 0.0)
    lap = -a * np.outer(inv_sqrt, inv_sqrt)
    np.fill_diagonal(lap, np.where(deg > 0, 1.0, 0.0))
    return lap


def heat_kernel_signature(evals, evecs, t: float) -> np.ndarray:
    """Per-vertex diffusion signature sum_i exp(-t * lambda_i) * phi_i(v)^2."""
    return (evecs**2) @ np.exp(-t * np.asarray(evals))


def graph_spectral_features(
    graph: SimpleGraph,
    eig_count: int = 30,
    hks_time: float = 10.0,
    hks_quantiles: int = 10,
) -> np.ndarray:
    """Fixed-length spectral description of a graph: the smallest `eig_count`
    eigenvalues of the normalized Laplacian (ascending, zero-padded when the
    graph has fewer vertices), followed by `hks_quantiles` nearest-rank
    quantiles (0.05, 0.15, ...) of the per-vertex heat kernel signature at
    scale `hks_time`. Defaults give a 40-vector."""
    evals, evecs = jacobi_eigendecomposition(normalized_laplacian(graph))
    eig_block = np.zeros(eig_count)
    take = min(graph.n, eig_count)
    eig_block[:take] = evals[:take]
    hks = heat_kernel_signature(evals, evecs, hks_time)
    qs = (np.arange(hks_quantiles) + 0.5) / hks_quantiles
    hks_block = np.array([nearest_rank_quantile(hks, q) for q in qs])
    return np.concatenate([eig_block, hks_block])


# ---------------------------------------------------------------------------
# synthetic datasets


def two_moons(n: int, noise: float = 0.1, seed: int = 0) -> Dataset:
    """Two interleaved unit half-circles with additive Gaussian coordinate
    noise; labels 0 (outer) and 1 (inner)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    n_out = n // 2
    n_in = n - n_out
    t_out = np.linspace(0.0, np.pi, n_out)
    t_in = np.linspace(0.0, np.pi, n_in)
    pts = np.concatenate(
        [
            np.column_stack([np.cos(t_out), np.sin(t_out)]),
            np.column_stack([1.0 - np.cos(t_in), 0.5 - np.sin(t_in)]),
        ]
    )
    if noise > 0:
        pts = pts + rng.normal(0.0, noise, size=pts.shape)
    labels = np.concatenate([np.zeros(n_out, dtype=int), np.ones(n_in, dtype=int)])
    return Dataset(pts, labels)


def gaussian_blobs(n: int, centers, sigma: float = 0.5, seed: int = 0) -> Dataset:
    """Isotropic Gaussian clusters; labels are center indices. `centers` is
    an array of center coordinates, or an int for that many random centers
    in [-5, 5]^2."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    if isinstance(centers, int):
        centers = rng.uniform(-5.0, 5.0, size=(centers, 2))
    centers = np.asarray(centers, dtype=np.float64)
    if centers.ndim != 2 or centers.shape[0] < 1:
        raise ValueError("centers must be a (k, dim) array or a positive int")
    k = centers.shape[0]
    labels = np.arange(n) % k
    pts = centers[labels] + rng.normal(0.0, sigma, size=(n, centers.shape[1]))
    return Dataset(pts, labels)


def uniform_images(n: int, shape: tuple[int, int], seed: int = 0) -> Dataset:
    """Unlabeled images with i.i.d. U[0, 1] pixels, flattened row-major."""
    rows, cols = _check_shape(shape)
    rng = np.random.default_rng(seed)
    return Dataset(rng.random((n, rows * cols)))


def gaussian_images(
    n: int,
    shape: tuple[int, int],
    mean: float = 0.5,
    sigma: float = 0.1,
    seed: int = 0,
) -> Dataset:
    """Unlabeled images with i.i.d. N(mean, sigma) pixels clamped to [0, 1]."""
    rows, cols = _check_shape(shape)
    rng = np.random.default_rng(seed)
    pixels = rng.normal(mean, sigma, size=(n, rows * cols))
    return Dataset(np.clip(pixels, 0.0, 1.0))


def _check_shape(shape) -> tuple[int, int]:
    try:
        rows, cols = (int(v) for v in shape)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"invalid image shape {shape!r}") from exc
    if rows < 1 or cols < 1:
        raise ValueError(f"invalid image shape {shape!r}")
    return rows, cols


def synthetic_dataset(kind: str, seed: int = 0, **params) -> Dataset:
    """Dispatch by kind name; used by the command-line generator."""
    generators = {
        "two_moons": two_moons,
        "gaussian_blobs": gaussian_blobs,
        "uniform_images": uniform_images,
        "gaussian_images": gaussian_images,
    }
    if kind not in generators:
        raise ValueError(f"unknown dataset kind {kind!r}; expected {sorted(generators)}")
    return generators[kind](seed=seed, **params)
