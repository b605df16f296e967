"""Normalized k-step influence scores.

The raw influence of node i on node m is the k-step random-walk landing
probability (A_hat^k)[i, m] -- the closed form of how much a change in i's
input features moves m's mean-aggregated features after k propagation steps.
Per-target normalization over all influencing sources turns the raw scores
into a distribution, and entries at or below a truncation threshold are
dropped to keep rows sparse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graphs import normalized_adjacency


@dataclass(frozen=True, eq=False)
class InfluenceField:
    """Per-source sparse rows of normalized influence.

    rows[i] maps target node m to I(m, i, k), the share of m's total incoming
    k-step influence contributed by source i. Stored values exceed trunc_eps.
    """

    k: int
    trunc_eps: float
    node_count: int
    rows: tuple[dict[int, float], ...]


def compute_influence(graph, k, trunc_eps=0.0):
    """Normalized k-step influence for every (source, target) node pair.

    Raw influence is (A_hat^k)[i, m]; each target column is normalized over
    its sources, then entries <= trunc_eps are discarded.
    """
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    if trunc_eps < 0:
        raise ValueError(f"trunc_eps must be >= 0, got {trunc_eps}")
    n = graph.node_count
    walk = sp.identity(n, format="csr")
    a_hat = normalized_adjacency(graph)
    for _ in range(k):
        walk = walk @ a_hat

    col_sums = np.asarray(walk.sum(axis=0)).ravel()
    inv = np.divide(1.0, col_sums, out=np.zeros_like(col_sums), where=col_sums > 0)
    normalized = (walk @ sp.diags(inv)).tocsr()

    rows = []
    for i in range(n):
        lo, hi = normalized.indptr[i], normalized.indptr[i + 1]
        row = {
            int(m): float(v)
            for m, v in zip(normalized.indices[lo:hi], normalized.data[lo:hi])
            if v > trunc_eps
        }
        rows.append(row)
    return InfluenceField(k=k, trunc_eps=trunc_eps, node_count=n, rows=tuple(rows))


def influence_row(field, i):
    """Sparse influence row for source node i; empty if fully truncated."""
    if not 0 <= i < field.node_count:
        raise IndexError(f"node {i} out of range for {field.node_count} nodes")
    return field.rows[i]
