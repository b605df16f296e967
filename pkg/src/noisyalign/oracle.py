"""Simulated noisy annotator for anchor-link membership queries.

Each (i, j) query gets its own counter-based random stream keyed by the
oracle seed and the pair, so the answer is a pure function of (seed, i, j):
re-querying a pair returns the same answer and is charged only once, and two
oracles with the same seed agree everywhere.
"""

from __future__ import annotations

import numpy as np


class BudgetExhaustedError(RuntimeError):
    """Raised when a fresh oracle query is needed but the budget is spent."""


class Oracle:
    """Annotator answering anchor-link queries with accuracy alpha."""

    def __init__(self, pair, alpha, seed):
        if not 0.0 < alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {alpha}")
        self.alpha = float(alpha)
        self.seed = int(seed)
        self.groundtruth = pair.groundtruth
        self.n_source = pair.source.node_count
        self.n_target = pair.target.node_count
        self.queries_used = 0
        self._answers = {}

    def was_queried(self, i, j):
        return (i, j) in self._answers

    def query(self, i, j):
        """Noisy binary answer: the true label with probability alpha.

        The first query of a pair charges one budget unit; repeats are free
        and return the cached answer.
        """
        if not 0 <= i < self.n_source:
            raise IndexError(f"source node {i} out of range")
        if not 0 <= j < self.n_target:
            raise IndexError(f"target node {j} out of range")
        if (i, j) in self._answers:
            return self._answers[(i, j)]
        truth = int(self.groundtruth.get(i) == j)
        rng = np.random.Generator(
            np.random.Philox(key=self.seed & (2**128 - 1), counter=[i, j, 0, 0])
        )
        answer = truth if rng.random() < self.alpha else 1 - truth
        self._answers[(i, j)] = answer
        self.queries_used += 1
        return answer
