"""End-to-end experiment driver.

One run repeats three stages until the oracle budget is spent: fit the base
aligner on all labels acquired so far, select a batch of node pairs (coverage
greedy for the noise-aware strategy, uncertainty sampling for baselines), and
label the batch (multi-source fusion, or raw oracle answers for baselines).
Metrics land in a per-iteration log; sweeps run the cross product of
parameter grids over seeds and aggregate the final rows.

Every random decision draws from a stream derived from (run seed, salt), so a
(config, seed) pair fully determines the output bytes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .aligners import MODEL_KINDS, AlignerConfig, align, build_prior
from .denoising import LabeledPair, confidence_region, label_batch
from .graphs import (
    NoiseSpec,
    inject_structural_noise,
    load_attributes,
    load_edge_list,
    load_groundtruth,
    synthesize_pair,
    two_hop_features,
)
from .influence import compute_influence
from .metrics import BASELINE_STRATEGIES, baseline_select, evaluate
from .oracle import Oracle
from .selection import (
    ActivationSet,
    CandidatePair,
    SelectionConfig,
    greedy_select,
    model_confidence,
    node_cleanliness,
    selection_confidence,
)

STRATEGIES = ("rana",) + BASELINE_STRATEGIES

# Salts for per-purpose random streams derived from the run seed.
_SALT_PAIR = 1
_SALT_NOISE_SOURCE = 2
_SALT_NOISE_TARGET = 3
_SALT_ANCHORS = 4
_SALT_ORACLE = 5
_SALT_BASELINE = 6

CSV_HEADER = (
    "iteration,labeled_count,oracle_queries,model_labels,twin_queries,"
    "acc1,acc5,acc10,map"
)

SWEEP_HEADER = (
    "training_rate,budget,alpha,edge_noise_ratio,strategy,n_seeds,"
    "acc1_mean,acc1_std,acc5_mean,acc5_std,acc10_mean,acc10_std,"
    "map_mean,map_std,oracle_queries_mean,error"
)


def derive_seed(seed, *salts):
    """A 64-bit sub-seed that is a pure function of (seed, salts)."""
    return int(np.random.SeedSequence([int(seed), *salts]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class DatasetSpec:
    """Either a synthetic pair recipe or file paths for a real dataset."""

    nodes: int = 200
    density: float = 0.05
    attr_dim: int = 16
    source_edges: str | None = None
    target_edges: str | None = None
    groundtruth: str | None = None
    source_attributes: str | None = None
    target_attributes: str | None = None

    @property
    def synthetic(self):
        return self.source_edges is None

    def __post_init__(self):
        paths = (self.source_edges, self.target_edges, self.groundtruth)
        if any(p is not None for p in paths) and not all(p is not None for p in paths):
            raise ValueError(
                "file datasets need source_edges, target_edges and groundtruth together"
            )


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one run or sweep needs, validated on construction."""

    dataset: DatasetSpec = field(default_factory=DatasetSpec)
    model_kind: str = "isorank"
    strategy: str = "rana"
    training_rate: float = 0.1
    budget: int = 100
    batch: int = 10
    alpha: float = 0.8
    theta: float = 0.05
    gamma: float = 0.01
    influence_k: int = 2
    cand_k: int = 5
    trunc_eps: float = 1e-4
    edge_noise_ratio: float = 0.0
    seeds: tuple[int, ...] = (0,)
    output_path: str = "results.csv"

    def __post_init__(self):
        if self.model_kind not in MODEL_KINDS:
            raise ValueError(f"model_kind must be one of {MODEL_KINDS}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        if not 0.0 < self.training_rate < 1.0:
            raise ValueError(f"training_rate must be in (0, 1), got {self.training_rate}")
        if not 0.0 <= self.edge_noise_ratio <= 1.0:
            raise ValueError(f"edge_noise_ratio must be in [0, 1]")
        if self.influence_k < 0:
            raise ValueError("influence_k must be >= 0")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if any(int(s) < 0 for s in self.seeds):
            raise ValueError("seeds must be non-negative")
        # Remaining bounds are re-checked by the module configs built below.
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))

    def selection_config(self):
        return SelectionConfig(
            theta=self.theta,
            gamma=self.gamma,
            budget=self.budget,
            batch=self.batch,
            cand_k=self.cand_k,
            oracle_conf=self.alpha,
        )

    def aligner_config(self):
        return AlignerConfig(model_kind=self.model_kind)


@dataclass(frozen=True)
class IterationRow:
    iteration: int
    labeled_count: int
    oracle_queries: int
    model_labels: int
    twin_queries: int
    acc1: float
    acc5: float
    acc10: float
    map: float

    def as_csv(self):
        return ",".join(
            str(v)
            for v in (
                self.iteration,
                self.labeled_count,
                self.oracle_queries,
                self.model_labels,
                self.twin_queries,
                self.acc1,
                self.acc5,
                self.acc10,
                self.map,
            )
        )


@dataclass(frozen=True)
class FusionRecord:
    """One acquired label with its routing region and the hidden truth."""

    iteration: int
    i: int
    j: int
    label: int
    provenance: str
    region: str
    true_label: int


@dataclass
class RunLog:
    rows: list[IterationRow] = field(default_factory=list)
    fusions: list[FusionRecord] = field(default_factory=list)

    @property
    def final(self):
        return self.rows[-1]

    def to_csv(self):
        return "\n".join([CSV_HEADER] + [r.as_csv() for r in self.rows]) + "\n"

    def write(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())


def load_pair(cfg, seed):
    """Materialize the network pair for one run, anchors sampled by seed."""
    if cfg.dataset.synthetic:
        noise = NoiseSpec(cfg.edge_noise_ratio, seed=derive_seed(seed, _SALT_NOISE_TARGET))
        pair = synthesize_pair(
            cfg.dataset.nodes,
            cfg.dataset.density,
            permute_seed=derive_seed(seed, _SALT_PAIR),
            noise=noise,
            attr_dim=cfg.dataset.attr_dim,
        )
    else:
        source = load_edge_list(cfg.dataset.source_edges)
        target = load_edge_list(cfg.dataset.target_edges)
        if cfg.dataset.source_attributes:
            source = load_attributes(cfg.dataset.source_attributes, source)
        if cfg.dataset.target_attributes:
            target = load_attributes(cfg.dataset.target_attributes, target)
        if cfg.edge_noise_ratio > 0:
            source = inject_structural_noise(
                source, NoiseSpec(cfg.edge_noise_ratio, derive_seed(seed, _SALT_NOISE_SOURCE))
            )
            target = inject_structural_noise(
                target, NoiseSpec(cfg.edge_noise_ratio, derive_seed(seed, _SALT_NOISE_TARGET))
            )
        gt = load_groundtruth(cfg.dataset.groundtruth, source, target)
        from .graphs import NetworkPair

        pair = NetworkPair(source=source, target=target, groundtruth=gt)

    rng = np.random.default_rng(derive_seed(seed, _SALT_ANCHORS))
    sources = sorted(pair.groundtruth)
    n_anchor = max(1, round(cfg.training_rate * len(sources)))
    chosen = rng.choice(len(sources), size=n_anchor, replace=False)
    anchors = {sources[k]: pair.groundtruth[sources[k]] for k in sorted(chosen)}
    return pair.with_anchors(anchors)


def _refit(pair, labeled, aligner_cfg):
    prior = build_prior(pair, labeled.values())
    forbidden = [key for key, lp in labeled.items() if lp.label == 0]
    positives = dict(pair.anchors)
    positives.update({lp.i: lp.j for lp in labeled.values() if lp.label == 1})
    return align(pair, prior, aligner_cfg, positives=positives, forbidden=forbidden), positives


def _candidate_pool(state, pair, labeled, cand_k):
    """Top cand_k unlabeled targets per source without a positive label."""
    positive_sources = set(pair.anchors)
    positive_sources.update(lp.i for lp in labeled.values() if lp.label == 1)
    taken = set(labeled)
    pool = []
    for i in range(pair.source.node_count):
        if i in positive_sources:
            continue
        order = np.argsort(-state.S[i], kind="stable")
        picked = 0
        for j in order:
            j = int(j)
            if (i, j) in taken:
                continue
            pool.append((i, j))
            picked += 1
            if picked == cand_k:
                break
    return pool


def _metrics_row(state, pair, labeled, counters, iteration):
    exclude = set(pair.anchors)
    exclude.update(lp.i for lp in labeled.values() if lp.label == 1)
    report = evaluate(state.S, pair.groundtruth, exclude=exclude)
    return IterationRow(
        iteration=iteration,
        labeled_count=len(labeled),
        oracle_queries=counters["queries"],
        model_labels=counters["model"],
        twin_queries=counters["twin"],
        acc1=report.acc_at[1],
        acc5=report.acc_at[5],
        acc10=report.acc_at[10],
        map=report.map_score,
    )


def run_experiment(cfg, seed):
    """One seeded active-learning run; returns the per-iteration log."""
    pair = load_pair(cfg, seed)
    sel_cfg = cfg.selection_config()
    aligner_cfg = cfg.aligner_config()
    oracle = Oracle(pair, cfg.alpha, seed=derive_seed(seed, _SALT_ORACLE))

    fields = (
        compute_influence(pair.source, cfg.influence_k, cfg.trunc_eps),
        compute_influence(pair.target, cfg.influence_k, cfg.trunc_eps),
    )
    clean_src = node_cleanliness(pair.source)
    clean_tgt = node_cleanliness(pair.target)
    feats = (two_hop_features(pair.source), two_hop_features(pair.target))
    covered = ActivationSet.empty(pair.source.node_count, pair.target.node_count)

    labeled: dict[tuple[int, int], LabeledPair] = {}
    counters = {"queries": 0, "model": 0, "twin": 0}
    log = RunLog()

    state, _ = _refit(pair, labeled, aligner_cfg)
    log.rows.append(_metrics_row(state, pair, labeled, counters, iteration=0))

    iteration = 0
    while oracle.queries_used < cfg.budget:
        iteration += 1
        pool = _candidate_pool(state, pair, labeled, cfg.cand_k)
        if not pool:
            break

        if cfg.strategy == "rana":
            candidates = []
            for i, j in pool:
                cs = 0.5 * (clean_src[i] + clean_tgt[j])
                cm = model_confidence(state.acc, state.prob[i, j])
                cand = CandidatePair(i=i, j=j, cs=float(cs), cm=float(cm), sel_conf=0.0)
                cand.sel_conf = selection_confidence(cand, sel_cfg)
                candidates.append(cand)
            batch = greedy_select(candidates, fields, sel_cfg, covered)
            batch_keys = {(c.i, c.j) for c in batch}
            new_labels = label_batch(batch, state, oracle, sel_cfg, pool, feats)
        else:
            sources = sorted({i for i, _ in pool})
            picks = baseline_select(
                cfg.strategy,
                state,
                sources,
                cfg.batch,
                seed=derive_seed(seed, _SALT_BASELINE, iteration),
            )
            batch_keys = set(picks)
            new_labels = []
            for i, j in picks:
                if (i, j) in labeled or oracle.queries_used >= cfg.budget:
                    continue
                y = oracle.query(i, j)
                new_labels.append(LabeledPair(i, j, y, "oracle", cfg.alpha))

        if not new_labels:
            break
        for lp in new_labels:
            labeled[(lp.i, lp.j)] = lp
            if lp.provenance == "model":
                counters["model"] += 1
            if cfg.strategy == "rana":
                if (lp.i, lp.j) in batch_keys:
                    cm = model_confidence(state.acc, state.prob[lp.i, lp.j])
                    region = confidence_region(cm, sel_cfg)
                else:
                    region = "twin_side"
                    counters["twin"] += 1
            else:
                region = "baseline"
            log.fusions.append(
                FusionRecord(
                    iteration=iteration,
                    i=lp.i,
                    j=lp.j,
                    label=lp.label,
                    provenance=lp.provenance,
                    region=region,
                    true_label=int(pair.groundtruth.get(lp.i) == lp.j),
                )
            )
        counters["queries"] = oracle.queries_used

        state, _ = _refit(pair, labeled, aligner_cfg)
        log.rows.append(_metrics_row(state, pair, labeled, counters, iteration))

    return log


_SWEEP_AXES = ("training_rate", "budget", "alpha", "edge_noise_ratio", "strategy")


@dataclass(frozen=True)
class SweepCell:
    training_rate: float
    budget: int
    alpha: float
    edge_noise_ratio: float
    strategy: str
    n_seeds: int
    means: dict[str, float]
    stds: dict[str, float]
    error: str = ""

    def as_csv(self):
        fields = [
            self.training_rate,
            self.budget,
            self.alpha,
            self.edge_noise_ratio,
            self.strategy,
            self.n_seeds,
        ]
        for name in ("acc1", "acc5", "acc10"):
            fields.extend((self.means.get(name, ""), self.stds.get(name, "")))
        fields.extend(
            (
                self.means.get("map", ""),
                self.stds.get("map", ""),
                self.means.get("oracle_queries", ""),
                self.error,
            )
        )
        return ",".join(str(v) for v in fields)


def _mean_std(values):
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return mean, std


def sweep(base_cfg, grid=None, seeds=None):
    """Run the cross product of grid axes, averaging final metrics over seeds.

    grid maps any of training_rate/budget/alpha/edge_noise_ratio/strategy to a
    list of values; missing axes stay at the base config. A failing cell is
    recorded with its error message and the sweep continues.
    """
    grid = dict(grid or {})
    unknown = set(grid) - set(_SWEEP_AXES)
    if unknown:
        raise ValueError(f"unknown sweep axes: {sorted(unknown)}")
    seeds = tuple(seeds) if seeds is not None else base_cfg.seeds
    axes = [list(grid.get(name, [getattr(base_cfg, name)])) for name in _SWEEP_AXES]
    if any(not axis for axis in axes):
        raise ValueError("sweep axes must be non-empty")

    cells = []
    for combo in itertools.product(*axes):
        overrides = dict(zip(_SWEEP_AXES, combo))
        finals, error = [], ""
        try:
            cfg = replace(base_cfg, **overrides)
            for seed in seeds:
                finals.append(run_experiment(cfg, seed).final)
        except Exception as exc:  # per-cell failures must not kill the sweep
            error = f"{type(exc).__name__}: {exc}"
        means, stds = {}, {}
        if finals:
            for name in ("acc1", "acc5", "acc10", "map"):
                means[name], stds[name] = _mean_std([getattr(r, name) for r in finals])
            means["oracle_queries"], _ = _mean_std([r.oracle_queries for r in finals])
        cells.append(
            SweepCell(
                training_rate=overrides["training_rate"],
                budget=overrides["budget"],
                alpha=overrides["alpha"],
                edge_noise_ratio=overrides["edge_noise_ratio"],
                strategy=overrides["strategy"],
                n_seeds=len(finals) if finals else 0,
                means=means,
                stds=stds,
                error=error,
            )
        )
    return cells


def sweep_csv(cells):
    return "\n".join([SWEEP_HEADER] + [c.as_csv() for c in cells]) + "\n"


def write_sweep(cells, path):
    with open(path, "w", newline="") as fh:
        fh.write(sweep_csv(cells))
