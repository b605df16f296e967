"""Ranking metrics over alignment scores and uncertainty-sampling baselines.

Metrics are computed over ground-truth anchors outside the training set, so
label leakage cannot inflate them. The rank of a true target within its score
row breaks ties toward the smallest column index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BASELINE_STRATEGIES = ("random", "entropy", "margin", "least_confident")


@dataclass(frozen=True)
class MetricsReport:
    """Top-k hit rates and mean reciprocal rank over the evaluated anchors."""

    acc_at: dict[int, float]
    map_score: float
    evaluated_on: int


def _true_rank(row, j):
    """1-based rank of column j in descending score order, ties to smaller index."""
    t = row[j]
    return int((row > t).sum()) + int((row[:j] == t).sum()) + 1


def _evaluated_items(scores, groundtruth, exclude):
    exclude = set(exclude)
    items = [(u, v) for u, v in groundtruth.items() if u not in exclude]
    if not items:
        raise ValueError("no ground-truth anchors left to evaluate")
    return items


def acc_at_k(scores, groundtruth, k, exclude=()):
    """Fraction of evaluated anchors whose true target ranks in the top k."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    items = _evaluated_items(scores, groundtruth, exclude)
    hits = sum(1 for u, v in items if _true_rank(scores[u], v) <= k)
    return hits / len(items)


def map_score(scores, groundtruth, exclude=()):
    """Mean reciprocal rank of the true target over evaluated anchors."""
    items = _evaluated_items(scores, groundtruth, exclude)
    return sum(1.0 / _true_rank(scores[u], v) for u, v in items) / len(items)


def evaluate(scores, groundtruth, exclude=(), ks=(1, 5, 10)):
    return MetricsReport(
        acc_at={k: acc_at_k(scores, groundtruth, k, exclude) for k in ks},
        map_score=map_score(scores, groundtruth, exclude),
        evaluated_on=len(_evaluated_items(scores, groundtruth, exclude)),
    )


def _entropy(p):
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log(p), 0.0)
    return float(terms.sum())


def baseline_select(strategy, state, pool, b, seed=0):
    """Uncertainty-sampling batch: b sources from pool, paired with their argmax.

    entropy ranks by row entropy descending, least_confident by 1 - max p
    descending, margin by (max p - min p) ascending, random uniformly by
    seed. Ties break on the smaller source id. Returns fewer than b pairs
    when the pool is smaller than b.
    """
    if strategy not in BASELINE_STRATEGIES:
        raise ValueError(f"strategy must be one of {BASELINE_STRATEGIES}")
    pool = list(pool)
    if not pool or b < 1:
        raise ValueError("pool must be non-empty and b >= 1")

    if strategy == "random":
        rng = np.random.default_rng(seed)
        order = [pool[idx] for idx in rng.permutation(len(pool))]
    else:
        if strategy == "entropy":
            key = lambda v: (-_entropy(state.prob[v]), v)
        elif strategy == "least_confident":
            key = lambda v: (-(1.0 - float(state.prob[v].max())), v)
        else:  # margin: smallest max-min spread first
            key = lambda v: (float(state.prob[v].max() - state.prob[v].min()), v)
        order = sorted(pool, key=key)

    chosen = order[: min(b, len(order))]
    return [(v, int(np.argmax(state.S[v]))) for v in chosen]
