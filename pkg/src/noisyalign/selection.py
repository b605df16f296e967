"""Noise-aware node-pair selection.

Candidates are scored on three axes: a cleanliness score (mean feature
similarity between each endpoint and its neighbors, a proxy for local
structural reliability), a model confidence (estimated accuracy times the
pair's predicted probability), and a three-region confidence that fuses the
two with the oracle's accuracy. Each candidate activates the nodes whose
confidence-weighted influence clears a threshold, and a batch is grown
greedily to maximize newly activated coverage, which is monotone submodular,
so lazy marginal-gain evaluation applies.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .graphs import feature_matrix, normalized_adjacency
from .influence import influence_row


@dataclass(frozen=True)
class SelectionConfig:
    """Selection and labeling thresholds.

    theta gates node activation, gamma is the floor under which model
    predictions are untrusted, oracle_conf is the annotator accuracy.
    """

    theta: float = 0.05
    gamma: float = 0.01
    budget: int = 100
    batch: int = 10
    cand_k: int = 5
    oracle_conf: float = 0.8

    def __post_init__(self):
        if self.theta < 0:
            raise ValueError(f"theta must be >= 0, got {self.theta}")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must be in (0, 1), got {self.gamma}")
        if not 0.0 < self.oracle_conf <= 1.0:
            raise ValueError(f"oracle_conf must be in (0, 1], got {self.oracle_conf}")
        if self.gamma >= self.oracle_conf:
            raise ValueError("gamma must be below oracle_conf")
        if self.budget < 0:
            raise ValueError(f"budget must be >= 0, got {self.budget}")
        if self.batch < 1:
            raise ValueError(f"batch must be >= 1, got {self.batch}")
        if self.budget > 0 and self.batch > self.budget:
            raise ValueError("batch cannot exceed a positive budget")
        if self.cand_k < 1:
            raise ValueError(f"cand_k must be >= 1, got {self.cand_k}")


@dataclass
class CandidatePair:
    """A scored (source, target) pair awaiting a labeling decision."""

    i: int
    j: int
    cs: float
    cm: float
    sel_conf: float
    post_conf: float | None = None

    def __post_init__(self):
        for name in ("cs", "cm", "sel_conf"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


@dataclass
class ActivationSet:
    """Activated nodes on both sides, as boolean masks."""

    src_bits: np.ndarray
    tgt_bits: np.ndarray

    @classmethod
    def empty(cls, n_source, n_target):
        return cls(np.zeros(n_source, dtype=bool), np.zeros(n_target, dtype=bool))

    @property
    def cardinality(self):
        return int(self.src_bits.sum()) + int(self.tgt_bits.sum())

    def gain_over(self, covered):
        """Nodes here that are not yet in covered."""
        return int((self.src_bits & ~covered.src_bits).sum()) + int(
            (self.tgt_bits & ~covered.tgt_bits).sum()
        )

    def union_update(self, other):
        self.src_bits |= other.src_bits
        self.tgt_bits |= other.tgt_bits

    def copy(self):
        return ActivationSet(self.src_bits.copy(), self.tgt_bits.copy())


def node_cleanliness(graph):
    """Per-node mean cosine similarity to neighbors, clamped to [0, 1].

    Isolated nodes score 0. Features are real attributes or the structural
    surrogate.
    """
    x = np.asarray(feature_matrix(graph), dtype=float)
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    unit = np.divide(x, norms, out=np.zeros_like(x), where=norms > 0)
    mean_neighbor = normalized_adjacency(graph) @ unit
    return np.clip(np.einsum("ij,ij->i", unit, mean_neighbor), 0.0, 1.0)


def cleanliness_score(pair_nodes, source, target):
    """Average of the two endpoints' neighborhood feature similarity."""
    i, j = pair_nodes
    return 0.5 * (float(node_cleanliness(source)[i]) + float(node_cleanliness(target)[j]))


def model_confidence(acc, p):
    """Estimated model accuracy scaled by the pair's predicted probability."""
    if not 0.0 <= acc <= 1.0 or not 0.0 <= p <= 1.0:
        raise ValueError("acc and p must be in [0, 1]")
    return acc * p


def posterior_confidence(y, y_hat, y_twin, cm, cfg):
    """Reliability of a labeled pair given oracle, model and twin votes.

    Agreement: the odds both votes are right against both being wrong.
    Disagreement: the twin's answer arbitrates, and the winning side's
    correctness odds are taken against any-disagreement odds.
    """
    corc = cfg.oracle_conf
    if corc * cm >= 1.0 - 1e-12:
        return 1.0
    if y == y_hat:
        return (corc * cm) / (corc * cm + (1.0 - corc) * (1.0 - cm))
    if y_twin is None:
        raise ValueError("twin label required when oracle and model disagree")
    if y_twin == y:
        return corc * (1.0 - cm) / (1.0 - corc * cm)
    return cm * (1.0 - corc) / (1.0 - corc * cm)


def selection_confidence(pair, cfg):
    """Confidence used for ranking before any label exists.

    High region passes the model confidence through; the moderate region uses
    the agreement posterior (agreement is the modal outcome once both voters
    beat chance); the low region falls back to min(cleanliness, oracle).
    """
    if pair.cm >= cfg.oracle_conf:
        return pair.cm
    if pair.cm > cfg.gamma:
        return posterior_confidence(1, 1, None, pair.cm, cfg)
    return min(pair.cs, cfg.oracle_conf)


def activated_nodes(pair, fields, cfg):
    """Nodes whose confidence-weighted influence from the pair clears theta."""
    src_field, tgt_field = fields
    act = ActivationSet.empty(src_field.node_count, tgt_field.node_count)
    conf = pair.sel_conf
    for v, infl in influence_row(src_field, pair.i).items():
        if conf * infl >= cfg.theta:
            act.src_bits[v] = True
    for u, infl in influence_row(tgt_field, pair.j).items():
        if conf * infl >= cfg.theta:
            act.tgt_bits[u] = True
    return act


def greedy_select(candidates, fields, cfg, already_covered, b=None):
    """Pick b pairs by maximal marginal activation coverage.

    Coverage gain is monotone submodular, so stale heap entries are lazily
    refreshed. Ties break on higher selection confidence, then lower (i, j).
    already_covered is updated in place with the winners' activations.
    Returns fewer than b pairs when the pool runs out.
    """
    if not candidates:
        raise ValueError("candidate pool is empty")
    if b is None:
        b = cfg.batch
    acts = [activated_nodes(c, fields, cfg) for c in candidates]
    heap = [
        (-acts[idx].gain_over(already_covered), -c.sel_conf, c.i, c.j, idx)
        for idx, c in enumerate(candidates)
    ]
    heapq.heapify(heap)
    batch = []
    while heap and len(batch) < b:
        neg_gain, neg_conf, i, j, idx = heapq.heappop(heap)
        fresh = acts[idx].gain_over(already_covered)
        if fresh != -neg_gain:
            heapq.heappush(heap, (-fresh, neg_conf, i, j, idx))
            continue
        batch.append(candidates[idx])
        already_covered.union_update(acts[idx])
    return batch
