"""Multi-source label fusion.

Three labeling routes depend on where the model confidence for a pair falls:
confident-enough predictions are taken as labels outright (free of oracle
budget), untrusted ones fall back to a raw oracle answer, and the band in
between fuses oracle and model votes. A disagreement there is arbitrated by
querying the oracle about the pair's twin: the unlabeled pair closest in
two-hop aggregated features, whose answer sides with either the oracle or the
model and is itself kept as a fresh label.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .aligners import predicted_label
from .oracle import BudgetExhaustedError
from .selection import posterior_confidence

PROVENANCES = ("oracle", "model", "twin_backed_oracle", "twin_backed_model")


@dataclass(frozen=True)
class LabeledPair:
    """A fused label with its origin and reliability."""

    i: int
    j: int
    label: int
    provenance: str
    confidence: float
    twin: tuple[int, int, int] | None = None

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"label must be binary, got {self.label}")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0, 1], got {self.confidence}")
        if (self.twin is not None) != self.provenance.startswith("twin_backed"):
            raise ValueError("twin recorded iff the label is twin-backed")


def confidence_region(cm, cfg):
    """Which of the three labeling routes applies at model confidence cm."""
    if cm > cfg.oracle_conf:
        return "high"
    if cm <= cfg.gamma:
        return "low"
    return "moderate"


def model_assisted_label(state, i, j, alpha):
    """The model's label when its confidence beats the oracle, else None."""
    if state.acc * state.prob[i, j] > alpha:
        return predicted_label(state, i, j)
    return None


def find_twin_pair(pair_nodes, feats, pool):
    """The pool pair closest to pair_nodes in summed two-hop cosine distance.

    The pool must exclude pair_nodes itself and every labeled pair. Ties
    break to the lexicographically smallest pair.
    """
    i, j = pair_nodes
    pool = sorted(p for p in pool if p != (i, j))
    if not pool:
        raise ValueError("twin lookup over an empty pool")
    xs, xt = feats
    arr = np.asarray(pool, dtype=int)
    d_src = _cosine_distance(xs[arr[:, 0]], xs[i])
    d_tgt = _cosine_distance(xt[arr[:, 1]], xt[j])
    best = int(np.argmin(d_src + d_tgt))
    return pool[best]


def _cosine_distance(rows, ref):
    norms = np.linalg.norm(rows, axis=1) * np.linalg.norm(ref)
    cos = np.divide(rows @ ref, norms, out=np.zeros(len(rows)), where=norms > 0)
    return 1.0 - cos


def _ensure_budget(oracle, cfg, i, j):
    if not oracle.was_queried(i, j) and oracle.queries_used >= cfg.budget:
        raise BudgetExhaustedError(
            f"query budget {cfg.budget} exhausted before labeling ({i}, {j})"
        )


def fuse_labels(i, j, state, oracle, cfg, pool, feats, cs=0.0):
    """Label one pair, returning the fused pair plus any twin side-label.

    High confidence takes the model label without a query. Low confidence
    takes a single raw oracle answer. In between, the oracle is queried and a
    disagreement with the model triggers a twin query whose answer decides;
    the twin's own label is kept too, so one disagreement yields two labels
    for two queries.
    """
    cm = float(state.acc * state.prob[i, j])
    y_hat = predicted_label(state, i, j)
    region = confidence_region(cm, cfg)

    if region == "high":
        return [LabeledPair(i, j, y_hat, "model", cm)]

    _ensure_budget(oracle, cfg, i, j)
    y = oracle.query(i, j)
    if region == "low":
        return [LabeledPair(i, j, y, "oracle", min(cs, cfg.oracle_conf))]

    if y == y_hat:
        conf = posterior_confidence(y, y_hat, None, cm, cfg)
        return [LabeledPair(i, j, y, "oracle", conf)]

    ti, tj = find_twin_pair((i, j), feats, pool)
    _ensure_budget(oracle, cfg, ti, tj)
    y_twin = oracle.query(ti, tj)
    twin_label = LabeledPair(ti, tj, y_twin, "oracle", cfg.oracle_conf)
    conf = posterior_confidence(y, y_hat, y_twin, cm, cfg)
    if y_twin == y:
        fused = LabeledPair(i, j, y, "twin_backed_oracle", conf, twin=(ti, tj, y_twin))
    else:
        fused = LabeledPair(i, j, y_hat, "twin_backed_model", conf, twin=(ti, tj, y_twin))
    return [fused, twin_label]


def label_batch(batch, state, oracle, cfg, pool, feats):
    """Fuse a selected batch in order, stopping early when the budget dies.

    Twin side-labels join the result and leave the twin pool, so a later
    batch pair that was already labeled as someone's twin is skipped.
    """
    remaining = set(pool)
    labels = []
    labeled_pairs = set()
    for cand in batch:
        key = (cand.i, cand.j)
        if key in labeled_pairs:
            continue
        remaining.discard(key)
        try:
            fused = fuse_labels(
                cand.i, cand.j, state, oracle, cfg, remaining, feats, cs=cand.cs
            )
        except BudgetExhaustedError:
            break
        for lp in fused:
            labels.append(lp)
            labeled_pairs.add((lp.i, lp.j))
            remaining.discard((lp.i, lp.j))
    return labels
