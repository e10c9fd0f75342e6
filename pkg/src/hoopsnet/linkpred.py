"""Embedding-based link prediction experiments with repeated-iteration aggregation."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .embedding import (EmbeddingMatrix, TrainConfig, WalkConfig, concat_features,
                        cosine_similarity, embed_graph)
from .glm import FitResult, fit_logistic
from .graph import WeightedDigraph
from .ingest import BlockRecord
from .seeding import derive_seed

log = logging.getLogger(__name__)

SIGNIFICANCE = 0.05


class ExperimentError(RuntimeError):
    pass


@dataclass
class LabeledPairSet:
    pairs: list[tuple[str, str]]
    features: np.ndarray
    labels: np.ndarray
    ordered: bool
    feature_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64).reshape(len(self.pairs), -1)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if len(set(self.pairs)) != len(self.pairs):
            raise ValueError("duplicate pairs in pair set")

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    @property
    def num_positive(self) -> int:
        return int(self.labels.sum())


# -- dataset builders ----------------------------------------------------------

def build_matchup_dataset(regular_season: WeightedDigraph, embeddings: EmbeddingMatrix,
                          matchups: Iterable[tuple[str, str]]) -> LabeledPairSet:
    """All unordered pairs of tournament teams present in the regular-season graph.

    Feature: cosine similarity of the two embeddings. Label: 1 if the pair met.
    """
    matchups = list(matchups)
    if not matchups:
        raise ValueError("tournament matchup list is empty")
    teams = sorted({t for m in matchups for t in m})
    present = [t for t in teams if t in regular_season and t in embeddings]
    dropped = sorted(set(teams) - set(present))
    if dropped:
        log.warning("dropping %d tournament teams without regular-season nodes: %s",
                    len(dropped), ", ".join(dropped))
    met = {tuple(sorted(m)) for m in matchups}
    pairs = list(combinations(present, 2))
    feats = [cosine_similarity(embeddings.vector(a), embeddings.vector(b)) for a, b in pairs]
    labels = [1 if (a, b) in met else 0 for a, b in pairs]
    return LabeledPairSet(pairs, np.array(feats), labels, ordered=False,
                          feature_names=["cosine_similarity"])


def build_blocking_dataset(embeddings: EmbeddingMatrix, blocks_next: Iterable[BlockRecord],
                           require_next_season: bool = False,
                           teams: Mapping[str, str] | None = None) -> LabeledPairSet:
    """All ordered pairs of embedded players; features are concatenated embeddings.

    Label (u, v) is 1 if u blocked v at least once in ``blocks_next``.
    ``require_next_season`` keeps only players appearing in ``blocks_next``;
    ``teams`` (player -> team) drops same-team pairs.
    """
    blocks_next = list(blocks_next)
    observed = {(b.blocker, b.blocked) for b in blocks_next if b.count > 0}
    players = sorted(embeddings.labels)
    if require_next_season:
        active = {b.blocker for b in blocks_next} | {b.blocked for b in blocks_next}
        players = [p for p in players if p in active]
    pairs = [(u, v) for u, v in permutations(players, 2)
             if teams is None or teams.get(u) is None or teams.get(u) != teams.get(v)]
    d = embeddings.dimensions
    feats = np.array([concat_features(embeddings.vector(u), embeddings.vector(v)) for u, v in pairs])
    labels = [1 if p in observed else 0 for p in pairs]
    names = [f"src_e{i}" for i in range(d)] + [f"tgt_e{i}" for i in range(d)]
    return LabeledPairSet(pairs, feats.reshape(len(pairs), 2 * d), labels, ordered=True,
                          feature_names=names)


def build_passing_dataset(q1_graph: WeightedDigraph, embeddings: EmbeddingMatrix,
                          later_graph: WeightedDigraph) -> LabeledPairSet:
    """Ordered region pairs (u != v); label 1 if u -> v occurs in ``later_graph``."""
    if set(q1_graph.labels) != set(later_graph.labels):
        raise ValueError("passing graphs must share the same regions")
    regions = sorted(later_graph.labels)
    pairs = list(permutations(regions, 2))
    feats = [cosine_similarity(embeddings.vector(u), embeddings.vector(v)) for u, v in pairs]
    labels = [1 if later_graph.has_edge(later_graph.node_id(u), later_graph.node_id(v)) else 0
              for u, v in pairs]
    return LabeledPairSet(pairs, np.array(feats), labels, ordered=True,
                          feature_names=["cosine_similarity"])


def shuffled_labels(builder: Callable[[EmbeddingMatrix], LabeledPairSet], seed: int
                    ) -> Callable[[EmbeddingMatrix], LabeledPairSet]:
    """Permutation-null control: same features, labels permuted once by ``seed``."""
    def wrapped(emb):
        ds = builder(emb)
        rng = np.random.Generator(np.random.PCG64(derive_seed(seed, "shuffle")))
        return LabeledPairSet(ds.pairs, ds.features, rng.permutation(ds.labels), ds.ordered,
                              ds.feature_names)
    return wrapped


# -- experiment loop -------------------------------------------------------------

@dataclass
class IterationResult:
    index: int
    seed: int
    fit: FitResult | None
    error: str | None = None


@dataclass
class ExperimentAggregate:
    iterations: int
    excluded: int
    num_pairs: int
    num_positive: int
    num_features: int
    mean_pseudo_r2: float
    mean_llr_p: float
    median_llr_p: float
    mean_coefficients: list[float]
    median_p_values: list[float]
    mean_p_values: list[float]
    significant_dimensions: int
    results: list[IterationResult] = field(repr=False, default_factory=list)

    def summary(self, pair_key: str = "pairs") -> dict:
        return {
            pair_key: self.num_pairs,
            "positive_pairs": self.num_positive,
            "embedding_features": self.num_features,
            "pseudo_r2": self.mean_pseudo_r2,
            "llr_p": self.mean_llr_p,
            "median_llr_p": self.median_llr_p,
            "significant_dimensions": self.significant_dimensions,
            "iterations": self.iterations,
            "excluded_iterations": self.excluded,
            "mean_coefficients": self.mean_coefficients,
            "median_p_values": self.median_p_values,
            "mean_p_values": self.mean_p_values,
        }


def aggregate(results: Sequence[IterationResult], dataset: LabeledPairSet) -> ExperimentAggregate:
    ok = [r.fit for r in results if r.fit is not None]
    excluded = len(results) - len(ok)
    if not ok or excluded * 2 > len(results):
        raise ExperimentError(f"{excluded} of {len(results)} iterations failed; "
                              f"first error: {next((r.error for r in results if r.error), None)}")
    pvals = np.array([f.p_values[1:] for f in ok]).reshape(len(ok), -1)
    coefs = np.array([f.coefficients for f in ok])
    llr_p = np.array([f.llr_p for f in ok])
    median_p = np.median(pvals, axis=0)
    return ExperimentAggregate(
        iterations=len(results),
        excluded=excluded,
        num_pairs=len(dataset),
        num_positive=dataset.num_positive,
        num_features=dataset.num_features,
        mean_pseudo_r2=float(np.mean([f.pseudo_r2 for f in ok])),
        mean_llr_p=float(llr_p.mean()),
        median_llr_p=float(np.median(llr_p)),
        mean_coefficients=[float(c) for c in coefs.mean(axis=0)],
        median_p_values=[float(p) for p in median_p],
        mean_p_values=[float(p) for p in pvals.mean(axis=0)],
        significant_dimensions=int(np.sum(median_p < SIGNIFICANCE)),
        results=list(results),
    )


def iteration_configs(walk_cfg: WalkConfig, train_cfg: TrainConfig, base_seed: int, i: int
                      ) -> tuple[int, WalkConfig, TrainConfig]:
    seed = derive_seed(base_seed, "iteration", i)
    walk = WalkConfig(walk_cfg.p, walk_cfg.q, walk_cfg.walk_length, walk_cfg.walks_per_node,
                      seed=derive_seed(seed, "walks"))
    train = TrainConfig(train_cfg.dimensions, train_cfg.window, train_cfg.negative_samples,
                        train_cfg.epochs, train_cfg.lr_initial, train_cfg.lr_final,
                        seed=derive_seed(seed, "train"))
    return seed, walk, train


def run_experiment(graph: WeightedDigraph, build: Callable[[EmbeddingMatrix], LabeledPairSet],
                   walk_cfg: WalkConfig, train_cfg: TrainConfig, n_iterations: int = 100,
                   base_seed: int = 0, threads: int = 1) -> ExperimentAggregate:
    """Re-embed ``graph`` ``n_iterations`` times and fit a logistic model each time.

    Iteration ``i`` derives its walk and training seeds from ``(base_seed, i)``;
    the dataset universe and labels come from ``build`` and do not change.
    Failed fits are recorded and excluded; more than half failing is an error.
    """
    if n_iterations < 1:
        raise ValueError("n_iterations must be >= 1")

    def one(i: int) -> tuple[IterationResult, LabeledPairSet]:
        seed, walk, train = iteration_configs(walk_cfg, train_cfg, base_seed, i)
        ds = build(embed_graph(graph, walk, train))
        try:
            fit = fit_logistic(ds.features, ds.labels)
        except (ArithmeticError, ValueError) as exc:
            return IterationResult(i, seed, None, f"{type(exc).__name__}: {exc}"), ds
        return IterationResult(i, seed, fit), ds

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(one, range(n_iterations)))
    else:
        outcomes = [one(i) for i in range(n_iterations)]
    return aggregate([r for r, _ in outcomes], outcomes[0][1])


# -- similarity report -----------------------------------------------------------

def node_similarity_report(embeddings: EmbeddingMatrix, focus: str,
                           include_focus: bool = False) -> list[tuple[str, float]]:
    """Cosine similarity from ``focus`` to every node, highest first (ties by label)."""
    focus = str(focus)
    if focus not in embeddings:
        raise KeyError(f"no embedding for {focus!r}")
    base = embeddings.vector(focus)
    rows = [(lab, cosine_similarity(base, embeddings.vector(lab)))
            for lab in embeddings.labels if include_focus or lab != focus]
    return sorted(rows, key=lambda r: (-r[1], r[0]))
