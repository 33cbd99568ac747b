"""Independent oracles and small utilities shared by the test modules.

Everything here recomputes expected values by a route different from the
library: dense Prim instead of Kruskal, exhaustive spanning-tree and
matching enumeration instead of sorted reductions, scalar loops instead of
matmuls.
"""

from itertools import combinations, permutations

import numpy as np

from topomon.model import DenseLayer, NetworkModel


def random_net(rng, sizes, hidden="relu", scale=1.0):
    """Random network with the given layer sizes; hidden may be one name or
    a per-layer list."""
    n_hidden = len(sizes) - 2
    kinds = [hidden] * n_hidden if isinstance(hidden, str) else list(hidden)
    kinds.append("softmax")
    layers = []
    for (a, b), kind in zip(zip(sizes[:-1], sizes[1:]), kinds):
        layers.append(
            DenseLayer(rng.normal(0.0, scale, (a, b)), rng.normal(0.0, scale, b), kind)
        )
    return NetworkModel(tuple(layers))


def prim_max_weights(matrix):
    """Maximum-spanning-tree weight multiset of a complete bipartite graph,
    by dense Prim (grow the tree from vertex 0, always adding the heaviest
    crossing edge). Independent of the library's Kruskal."""
    m = np.asarray(matrix, dtype=np.float64)
    a, b = m.shape
    n = a + b
    adj = np.full((n, n), -np.inf)
    adj[:a, a:] = m
    adj[a:, :a] = m.T
    in_tree = np.zeros(n, dtype=bool)
    key = np.full(n, -np.inf)
    key[0] = 0.0
    picked = []
    for _ in range(n):
        u = int(np.argmax(np.where(in_tree, -np.inf, key)))
        if in_tree[u]:
            break
        in_tree[u] = True
        if u != 0:
            picked.append(key[u])
        key = np.where(in_tree, key, np.maximum(key, adj[u]))
    return np.sort(np.asarray(picked))[::-1]


def kruskal_shuffled_ties(matrix, rng):
    """Kruskal with a random order inside each tie group, written from
    scratch; exposes any dependence of the result on tie order."""
    m = np.asarray(matrix, dtype=np.float64)
    a, b = m.shape
    edges = [(m[i, j], i, a + j) for i in range(a) for j in range(b)]
    rng.shuffle(edges)
    edges.sort(key=lambda e: -e[0])  # stable: shuffled order survives within ties
    parent = list(range(a + b))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    out = []
    for w, u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            out.append(w)
    return np.sort(np.asarray(out))[::-1]


def exhaustive_max_spanning_multiset(matrix):
    """Sorted weight multiset of a maximum-total-weight spanning tree found
    by enumerating every (n-1)-edge subset. Usable only for tiny graphs."""
    m = np.asarray(matrix, dtype=np.float64)
    a, b = m.shape
    n = a + b
    edges = [(i, a + j, m[i, j]) for i in range(a) for j in range(b)]
    best_total, best = -np.inf, None
    for subset in combinations(edges, n - 1):
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        merges = 0
        for u, v, _ in subset:
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
                merges += 1
        if merges != n - 1:
            continue  # not spanning
        total = sum(w for _, _, w in subset)
        if total > best_total:
            best_total = total
            best = [w for _, _, w in subset]
    return np.sort(np.asarray(best))[::-1]


def brute_matching_cost(a, b, p):
    """Minimal partial-matching cost by raw enumeration over subset pairs
    and permutations; cross-checks the library's DP oracle for tiny sizes."""
    a = list(np.asarray(a, dtype=np.float64))
    b = list(np.asarray(b, dtype=np.float64))
    n, m = len(a), len(b)
    best = np.inf
    for k in range(min(n, m) + 1):
        for ia in combinations(range(n), k):
            rest_a = sum(a[i] ** p for i in range(n) if i not in ia)
            for ib in combinations(range(m), k):
                rest_b = sum(b[j] ** p for j in range(m) if j not in ib)
                for perm in permutations(ib):
                    cost = (
                        sum(abs(a[i] - b[j]) ** p for i, j in zip(ia, perm))
                        + rest_a
                        + rest_b
                    )
                    best = min(best, cost)
    return best


def straight_line_forward(net, x):
    """Scalar-loop re-evaluation of the network, no numpy linear algebra."""
    import math

    a = [float(v) for v in x]
    activations = [a]
    for li, layer in enumerate(net.layers):
        w, bias, kind = layer.weights, layer.bias, layer.activation
        z = []
        for j in range(w.shape[1]):
            s = float(bias[j])
            for i in range(w.shape[0]):
                s += a[i] * float(w[i, j])
            z.append(s)
        if kind == "relu":
            a = [max(v, 0.0) for v in z]
        elif kind == "sigmoid":
            a = [1.0 / (1.0 + math.exp(-v)) for v in z]
        elif kind == "identity":
            a = list(z)
        elif kind == "softmax":
            mx = max(z)
            es = [math.exp(v - mx) for v in z]
            total = sum(es)
            a = [v / total for v in es]
        if li < len(net.layers) - 1:
            activations.append(a)
    return activations, a


def spearman(x, y):
    """Spearman rank correlation for tie-free sequences."""
    x = np.asarray(x)
    y = np.asarray(y)
    rx = np.argsort(np.argsort(x))
    ry = np.argsort(np.argsort(y))
    d = rx - ry
    n = len(x)
    return 1.0 - 6.0 * float(np.sum(d * d)) / (n * (n * n - 1))
