"""Base alignment solvers.

Both solvers iterate a damped propagation of cross-network score mass to a
fixed point: scores flow along matched neighborhoods while a restart term
pulls toward the prior built from anchors and actively acquired labels. The
attributed variant additionally weights every propagated cell by the cosine
similarity of the endpoint features, so mass only accumulates where topology
and attributes agree.

Labels feed back without gradient training: positive labels concentrate prior
mass on their cell, negative labels zero the prior cell and mask the final
scores.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import feature_matrix, normalized_adjacency

MODEL_KINDS = ("isorank", "final_lite")


@dataclass(frozen=True)
class AlignerConfig:
    """Solver hyperparameters.

    damping is the restart weight toward the prior; 1.0 reduces the update to
    the prior itself.
    """

    damping: float = 0.85
    max_iters: int = 100
    tol: float = 1e-6
    model_kind: str = "isorank"

    def __post_init__(self):
        if not 0.0 < self.damping <= 1.0:
            raise ValueError(f"damping must be in (0, 1], got {self.damping}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.tol <= 0:
            raise ValueError(f"tol must be > 0, got {self.tol}")
        if self.model_kind not in MODEL_KINDS:
            raise ValueError(f"model_kind must be one of {MODEL_KINDS}")


@dataclass(frozen=True, eq=False)
class ModelState:
    """Solver output: scores, row probabilities, estimated accuracy."""

    S: np.ndarray
    prob: np.ndarray
    acc: float
    iteration: int
    converged: bool = True
    residual: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.acc <= 1.0:
            raise ValueError(f"acc must be in [0, 1], got {self.acc}")


def build_prior(pair, labeled=()):
    """Prior score matrix from anchors plus actively acquired labels.

    Every cell gets a uniform background mass; each positively-labeled cell
    additionally receives one full unit; negatively-labeled cells are zeroed.
    The result is globally normalized to sum 1. Two positive labels for one
    source node conflict.
    """
    n_s, n_t = pair.source.node_count, pair.target.node_count
    positives = dict(pair.anchors)
    negatives = []
    for lp in labeled:
        if lp.label == 1:
            if positives.get(lp.i, lp.j) != lp.j:
                raise ValueError(
                    f"conflicting positive labels for source {lp.i}: "
                    f"{positives[lp.i]} vs {lp.j}"
                )
            positives[lp.i] = lp.j
        else:
            negatives.append((lp.i, lp.j))

    h = np.full((n_s, n_t), 1.0 / (n_s * n_t))
    for i, j in positives.items():
        h[i, j] += 1.0
    for i, j in negatives:
        if (i, j) in positives.items():
            raise ValueError(f"pair ({i}, {j}) labeled both positive and negative")
        h[i, j] = 0.0
    total = h.sum()
    if total > 0:
        h /= total
    return h


def row_probabilities(scores, candidates=None):
    """Normalize each score row into probabilities over its candidate set.

    candidates maps row -> iterable of columns; None means all columns for
    every row. All-zero rows become uniform over their candidates. Entries
    outside a row's candidate set are 0.
    """
    scores = np.asarray(scores, dtype=float)
    if candidates is None:
        sums = scores.sum(axis=1, keepdims=True)
        out = np.divide(scores, sums, out=np.zeros_like(scores), where=sums > 0)
        zero_rows = (sums.ravel() == 0)
        out[zero_rows] = 1.0 / scores.shape[1]
        return out
    out = np.zeros_like(scores)
    for i, cand in candidates.items():
        cand = list(cand)
        if not cand:
            raise ValueError(f"empty candidate set for row {i}")
        row = scores[i, cand]
        total = row.sum()
        out[i, cand] = row / total if total > 0 else 1.0 / len(cand)
    return out


def estimate_accuracy(scores, positives):
    """Add-one-smoothed hit rate of the row-argmax on labeled positives.

    A hit means the argmax of a labeled source's row lands on its labeled
    target. Smoothing keeps the estimate strictly inside (0, 1).
    """
    if not positives:
        raise ValueError("cannot estimate accuracy without labeled positives")
    hits = sum(1 for i, j in positives.items() if int(np.argmax(scores[i])) == j)
    return (hits + 1) / (len(positives) + 2)


def predicted_label(state, i, j, candidates=None):
    """1 iff j is the argmax of row i over its candidate set, ties to smallest j."""
    row = state.S[i]
    if candidates is None:
        return int(int(np.argmax(row)) == j)
    cand = list(candidates)
    best = cand[int(np.argmax(row[cand]))]
    return int(best == j)


def _propagate(pair, prior, cfg, weight=None):
    """Iterate S <- (1 - damping) * W o (As^T S At) + damping * H to a fixed point."""
    a_s = normalized_adjacency(pair.source)
    a_t = normalized_adjacency(pair.target)
    a_s_t = a_s.T.tocsr()
    s = prior.copy()
    residual = np.inf
    iteration = 0
    for iteration in range(1, cfg.max_iters + 1):
        prop = a_s_t @ s @ a_t
        if weight is not None:
            prop *= weight
        s_next = (1.0 - cfg.damping) * prop + cfg.damping * prior
        residual = float(np.max(np.abs(s_next - s)))
        s = s_next
        if residual <= cfg.tol:
            break
    return s, iteration, residual


def _finalize(pair, s, iteration, residual, cfg, positives, forbidden):
    np.clip(s, 0.0, None, out=s)
    for i, j in forbidden:
        s[i, j] = 0.0
    prob = row_probabilities(s)
    acc = estimate_accuracy(s, positives) if positives else 0.5
    return ModelState(
        S=s,
        prob=prob,
        acc=acc,
        iteration=iteration,
        converged=residual <= cfg.tol,
        residual=residual,
    )


def isorank_align(pair, prior, cfg, positives=None, forbidden=()):
    """Topology-only fixed-point alignment.

    positives (source -> target, defaults to the pair's anchors) feed the
    accuracy estimate; forbidden cells are zeroed in the returned scores.
    Non-convergence within max_iters is flagged on the state, not fatal.
    """
    if prior.shape != (pair.source.node_count, pair.target.node_count):
        raise ValueError(f"prior shape {prior.shape} does not match the pair")
    if positives is None:
        positives = pair.anchors
    s, iteration, residual = _propagate(pair, prior, cfg)
    return _finalize(pair, s, iteration, residual, cfg, positives, forbidden)


def attribute_similarity(pair, k=2):
    """Cross-network cosine similarity of node features, clamped to [0, 1]."""
    x_s = np.asarray(feature_matrix(pair.source, k), dtype=float)
    x_t = np.asarray(feature_matrix(pair.target, k), dtype=float)
    norm_s = np.linalg.norm(x_s, axis=1, keepdims=True)
    norm_t = np.linalg.norm(x_t, axis=1, keepdims=True)
    unit_s = np.divide(x_s, norm_s, out=np.zeros_like(x_s), where=norm_s > 0)
    unit_t = np.divide(x_t, norm_t, out=np.zeros_like(x_t), where=norm_t > 0)
    return np.clip(unit_s @ unit_t.T, 0.0, 1.0)


def final_lite_align(pair, prior, cfg, positives=None, forbidden=(), weight=None):
    """Attribute-weighted fixed-point alignment.

    Identical to isorank_align except every propagated cell is scaled by the
    feature cosine-similarity matrix (real attributes, or the structural
    surrogate when a graph carries none). An all-ones weight reproduces
    isorank_align exactly.
    """
    if prior.shape != (pair.source.node_count, pair.target.node_count):
        raise ValueError(f"prior shape {prior.shape} does not match the pair")
    if positives is None:
        positives = pair.anchors
    if weight is None:
        weight = attribute_similarity(pair)
    s, iteration, residual = _propagate(pair, prior, cfg, weight=weight)
    return _finalize(pair, s, iteration, residual, cfg, positives, forbidden)


def align(pair, prior, cfg, positives=None, forbidden=()):
    """Dispatch on cfg.model_kind."""
    if cfg.model_kind == "final_lite":
        return final_lite_align(pair, prior, cfg, positives=positives, forbidden=forbidden)
    return isorank_align(pair, prior, cfg, positives=positives, forbidden=forbidden)
