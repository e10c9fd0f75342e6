"""Seeded planted-community digraphs with community-biased future links."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .embedding import cosine_similarity
from .graph import WeightedDigraph
from .linkpred import LabeledPairSet
from .seeding import derive_seed


@dataclass(frozen=True)
class PlantedAffinityModel:
    num_nodes: int = 60
    num_communities: int = 2
    p_in: float = 0.5
    p_out: float = 0.05
    future_link_bias: float = 6.0
    base_future_prob: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p_out < self.p_in <= 1.0:
            raise ValueError("need 0 <= p_out < p_in <= 1")
        if not 1 <= self.num_communities <= self.num_nodes:
            raise ValueError("need 1 <= num_communities <= num_nodes")
        if self.future_link_bias < 1.0:
            raise ValueError("future_link_bias must be >= 1")
        if not 0.0 < self.base_future_prob < 1.0:
            raise ValueError("base_future_prob must lie in (0, 1)")


@dataclass
class FuturePairs:
    """Unordered future-link skeleton: pairs, labels and node communities."""
    pairs: list[tuple[str, str]]
    labels: np.ndarray
    communities: dict[str, int]

    def label_map(self) -> dict[tuple[str, str], int]:
        return {p: int(y) for p, y in zip(self.pairs, self.labels)}


def node_labels(n: int) -> list[str]:
    width = len(str(max(n - 1, 0)))
    return [f"n{i:0{width}d}" for i in range(n)]


def communities_of(model: PlantedAffinityModel) -> np.ndarray:
    """Contiguous near-equal blocks: node i belongs to block floor(i * C / n)."""
    return (np.arange(model.num_nodes) * model.num_communities) // model.num_nodes


def generate_planted(model: PlantedAffinityModel) -> tuple[WeightedDigraph, FuturePairs]:
    """Sample a directed planted-partition graph and future labels.

    Each ordered pair (u, v), u != v, gets a unit-weight edge with probability
    ``p_in`` inside a community and ``p_out`` across. Each unordered pair is a
    future link with odds ``base_odds * future_link_bias`` inside a community
    and ``base_odds`` across.
    """
    n = model.num_nodes
    labels = node_labels(n)
    comm = communities_of(model)
    same = comm[:, None] == comm[None, :]
    edge_rng = np.random.Generator(np.random.PCG64(derive_seed(model.seed, "edges")))
    draws = edge_rng.random((n, n))
    probs = np.where(same, model.p_in, model.p_out)
    adj = (draws < probs) & ~np.eye(n, dtype=bool)
    g = WeightedDigraph(labels)
    for u, v in zip(*np.nonzero(adj)):
        g.add_edge(int(u), int(v), 1.0)
    g.freeze()

    base_odds = model.base_future_prob / (1.0 - model.base_future_prob)
    iu, ju = np.triu_indices(n, k=1)
    odds = np.where(same[iu, ju], base_odds * model.future_link_bias, base_odds)
    future_rng = np.random.Generator(np.random.PCG64(derive_seed(model.seed, "future")))
    future = (future_rng.random(len(iu)) < odds / (1.0 + odds)).astype(np.int64)
    pairs = [(labels[i], labels[j]) for i, j in zip(iu, ju)]
    return g, FuturePairs(pairs, future, {labels[i]: int(comm[i]) for i in range(n)})


def write_future_pairs(fp: FuturePairs, path: str | Path, comments: Sequence[str] = ()) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["source", "target", "label", "same_community"])
        for (a, b), y in zip(fp.pairs, fp.labels):
            writer.writerow([a, b, int(y), int(fp.communities[a] == fp.communities[b])])


def planted_builder(future: FuturePairs):
    """Dataset builder for :func:`hoopsnet.linkpred.run_experiment`: cosine similarity feature."""
    def build(emb):
        feats = [cosine_similarity(emb.vector(a), emb.vector(b)) for a, b in future.pairs]
        return LabeledPairSet(list(future.pairs), np.array(feats), future.labels, ordered=False,
                              feature_names=["cosine_similarity"])
    return build
