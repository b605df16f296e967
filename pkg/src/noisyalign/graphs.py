"""Graph data model, dataset ingestion, synthetic pair generation and
structural-noise injection.

Graphs are undirected, unweighted and immutable once built: the adjacency is a
symmetric CSR matrix with an empty diagonal, plus an optional dense node
attribute matrix. Everything downstream (aligners, influence propagation,
cleanliness scores) consumes the derived products computed here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected graph with optional node attributes.

    adj is symmetric CSR with zero diagonal and binary entries; attributes,
    when present, has one row per node.
    """

    adj: sp.csr_matrix
    attributes: np.ndarray | None = None

    def __post_init__(self):
        n, m = self.adj.shape
        if n != m:
            raise ValueError(f"adjacency must be square, got {n}x{m}")
        if self.adj.diagonal().any():
            raise ValueError("self-loops are not allowed")
        if abs(self.adj - self.adj.T).nnz != 0:
            raise ValueError("adjacency must be symmetric")
        if self.attributes is not None and self.attributes.shape[0] != n:
            raise ValueError(
                f"attribute rows ({self.attributes.shape[0]}) != node count ({n})"
            )

    @classmethod
    def from_edges(cls, node_count, edges, attributes=None):
        """Build a graph from an iterable of (u, v) pairs.

        Edges are symmetrized and deduplicated; self-loops are dropped.
        """
        rows, cols = [], []
        for u, v in edges:
            if u == v:
                continue
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise ValueError(f"edge ({u}, {v}) out of range for {node_count} nodes")
            rows.extend((u, v))
            cols.extend((v, u))
        adj = sp.csr_matrix(
            (np.ones(len(rows)), (rows, cols)), shape=(node_count, node_count)
        )
        adj.data[:] = 1.0  # collapse duplicate entries summed by the constructor
        return cls(adj=adj, attributes=attributes)

    @property
    def node_count(self):
        return self.adj.shape[0]

    @property
    def edge_count(self):
        return self.adj.nnz // 2

    def degrees(self):
        return np.asarray(self.adj.sum(axis=1)).ravel()

    def neighbors(self, v):
        if not 0 <= v < self.node_count:
            raise IndexError(f"node {v} out of range")
        return self.adj.indices[self.adj.indptr[v] : self.adj.indptr[v + 1]]

    def edge_set(self):
        """All edges as a set of (min, max) tuples."""
        coo = self.adj.tocoo()
        return {(int(u), int(v)) for u, v in zip(coo.row, coo.col) if u < v}

    def with_attributes(self, attributes):
        return Graph(adj=self.adj, attributes=attributes)


@dataclass(frozen=True)
class NoiseSpec:
    """Additive structural noise: a fraction of spurious edges and its seed."""

    edge_noise_ratio: float
    seed: int

    def __post_init__(self):
        if not 0.0 <= self.edge_noise_ratio <= 1.0:
            raise ValueError(f"edge_noise_ratio must be in [0, 1], got {self.edge_noise_ratio}")


@dataclass(frozen=True, eq=False)
class NetworkPair:
    """Source and target graphs tied by an injective ground-truth mapping.

    anchors is the initially-labeled subset of the ground truth.
    """

    source: Graph
    target: Graph
    groundtruth: dict[int, int]
    anchors: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        targets = list(self.groundtruth.values())
        if len(set(targets)) != len(targets):
            raise ValueError("groundtruth is not injective")
        for s, t in self.groundtruth.items():
            if not 0 <= s < self.source.node_count:
                raise ValueError(f"groundtruth source node {s} out of range")
            if not 0 <= t < self.target.node_count:
                raise ValueError(f"groundtruth target node {t} out of range")
        for s, t in self.anchors.items():
            if self.groundtruth.get(s) != t:
                raise ValueError(f"anchor ({s}, {t}) not in groundtruth")

    def with_anchors(self, anchors):
        return NetworkPair(self.source, self.target, self.groundtruth, dict(anchors))


def _parse_int_pairs(path):
    """Yield (line_number, a, b) for each whitespace-separated integer pair."""
    with open(path) as fh:
        for ln, line in enumerate(fh, start=1):
            tokens = line.split()
            if not tokens:
                continue
            if len(tokens) != 2:
                raise ValueError(f"{path}: line {ln}: expected two fields, got {len(tokens)}")
            try:
                a, b = int(tokens[0]), int(tokens[1])
            except ValueError:
                raise ValueError(f"{path}: line {ln}: non-integer field") from None
            if a < 0 or b < 0:
                raise ValueError(f"{path}: line {ln}: negative node id")
            yield ln, a, b


def load_edge_list(path, node_count_hint=None):
    """Read an edge list of whitespace-separated node-id pairs, one per line.

    Edges are symmetrized and deduplicated, self-loops dropped. The node count
    is max id + 1 unless a hint is given; ids at or above the hint are
    rejected.
    """
    edges = []
    max_id = -1
    for ln, u, v in _parse_int_pairs(path):
        if node_count_hint is not None and (u >= node_count_hint or v >= node_count_hint):
            raise ValueError(
                f"{path}: line {ln}: node id exceeds declared node count {node_count_hint}"
            )
        max_id = max(max_id, u, v)
        edges.append((u, v))
    node_count = node_count_hint if node_count_hint is not None else max_id + 1
    return Graph.from_edges(max(node_count, 0), edges)


def load_attributes(path, graph):
    """Attach a headerless CSV attribute matrix to a graph.

    The file must hold exactly node_count rows with a uniform column count.
    """
    rows = []
    width = None
    with open(path) as fh:
        for ln, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            cells = line.strip().split(",")
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise ValueError(f"{path}: line {ln}: expected {width} columns, got {len(cells)}")
            try:
                rows.append([float(c) for c in cells])
            except ValueError:
                raise ValueError(f"{path}: line {ln}: non-numeric cell") from None
    if len(rows) != graph.node_count:
        raise ValueError(
            f"{path}: {len(rows)} attribute rows for {graph.node_count} nodes"
        )
    return graph.with_attributes(np.asarray(rows, dtype=float))


def load_groundtruth(path, source, target):
    """Read 'src tgt' pairs and validate an injective in-bounds mapping."""
    mapping = {}
    seen_targets = set()
    for ln, s, t in _parse_int_pairs(path):
        if s >= source.node_count or t >= target.node_count:
            raise ValueError(f"{path}: line {ln}: node id out of range")
        if s in mapping or t in seen_targets:
            raise ValueError(f"{path}: line {ln}: duplicate node in mapping")
        mapping[s] = t
        seen_targets.add(t)
    return mapping


def inject_structural_noise(graph, spec):
    """Add floor(ratio * |E|) spurious edges uniformly over absent slots.

    Never removes an edge. Deterministic for a fixed spec; ratio 0 returns the
    graph unchanged.
    """
    n_new = int(spec.edge_noise_ratio * graph.edge_count)
    if n_new == 0:
        return graph
    n = graph.node_count
    capacity = n * (n - 1) // 2 - graph.edge_count
    if n_new > capacity:
        raise ValueError(
            f"cannot add {n_new} edges: only {capacity} free slots in a {n}-node graph"
        )
    existing = graph.edge_set()
    rng = np.random.default_rng(spec.seed)
    added = set()
    while len(added) < n_new:
        u = int(rng.integers(n))
        v = int(rng.integers(n))
        if u == v:
            continue
        e = (min(u, v), max(u, v))
        if e in existing or e in added:
            continue
        added.add(e)
    return Graph.from_edges(n, list(existing) + sorted(added), attributes=graph.attributes)


def synthesize_pair(n, edge_density, permute_seed, noise, attr_dim=16):
    """Generate a random source graph and a permuted, noised copy of it.

    The ground truth is the permutation; Gaussian node attributes are shared
    through the permutation so attribute consistency holds exactly. The target
    receives additive structural noise per the spec.
    """
    if n < 2:
        raise ValueError(f"need at least 2 nodes, got {n}")
    if not 0.0 < edge_density < 1.0:
        raise ValueError(f"edge_density must be in (0, 1), got {edge_density}")
    rng = np.random.default_rng(permute_seed)
    upper = np.triu_indices(n, k=1)
    mask = rng.random(len(upper[0])) < edge_density
    edges = list(zip(upper[0][mask].tolist(), upper[1][mask].tolist()))
    attrs = rng.standard_normal((n, attr_dim))
    source = Graph.from_edges(n, edges, attributes=attrs)

    perm = rng.permutation(n)
    groundtruth = {int(s): int(perm[s]) for s in range(n)}
    permuted_edges = [(int(perm[u]), int(perm[v])) for u, v in edges]
    target_attrs = np.empty_like(attrs)
    target_attrs[perm] = attrs
    target = Graph.from_edges(n, permuted_edges, attributes=target_attrs)
    target = inject_structural_noise(target, noise)
    return NetworkPair(source=source, target=target, groundtruth=groundtruth)


def normalized_adjacency(graph):
    """Row-stochastic adjacency: rows with degree > 0 sum to 1, others stay 0."""
    deg = graph.degrees()
    inv = np.divide(1.0, deg, out=np.zeros_like(deg, dtype=float), where=deg > 0)
    return sp.diags(inv) @ graph.adj


def structural_features(graph, k, top=None):
    """k-step random-walk landing distributions, one row per start node.

    Serves as the node feature matrix wherever real attributes are absent.
    With top set, only the largest entries per row are kept.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    a_hat = normalized_adjacency(graph)
    walk = a_hat
    for _ in range(k - 1):
        walk = walk @ a_hat
    out = walk.toarray()
    if top is not None and top < graph.node_count:
        thresh = -np.partition(-out, top - 1, axis=1)[:, top - 1 : top]
        out = np.where(out >= thresh, out, 0.0)
    return out


def feature_matrix(graph, k=2):
    """Node attributes, or the k-step structural surrogate when absent."""
    if graph.attributes is not None:
        return graph.attributes
    return structural_features(graph, k)


def two_hop_features(graph):
    """Features aggregated over two propagation steps: A_hat^2 @ X."""
    a_hat = normalized_adjacency(graph)
    x = feature_matrix(graph)
    return a_hat @ (a_hat @ x)
