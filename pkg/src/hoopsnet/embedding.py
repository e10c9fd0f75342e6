"""node2vec: biased second-order random walks and skip-gram with negative sampling.

The walk sampler and the SGD loop are numba kernels driven by a splitmix64
generator whose state lives on the stack, so results are bit-reproducible and
independent kernels can run concurrently in threads.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from numba import njit

from .graph import WeightedDigraph
from .seeding import derive_seed


@dataclass(frozen=True)
class WalkConfig:
    p: float = 1.0
    q: float = 1.0
    walk_length: int = 80
    walks_per_node: int = 10
    seed: int = 0

    def __post_init__(self):
        if not (self.p > 0 and self.q > 0):
            raise ValueError("p and q must be positive")
        if self.walk_length < 1 or self.walks_per_node < 1:
            raise ValueError("walk_length and walks_per_node must be >= 1")


@dataclass(frozen=True)
class TrainConfig:
    dimensions: int = 128
    window: int = 10
    negative_samples: int = 5
    epochs: int = 5
    lr_initial: float = 0.025
    lr_final: float = 0.0001
    seed: int = 0

    def __post_init__(self):
        if self.dimensions < 1 or self.window < 1 or self.negative_samples < 1:
            raise ValueError("dimensions, window and negative_samples must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if not 0 < self.lr_final <= self.lr_initial:
            raise ValueError("need 0 < lr_final <= lr_initial")


class DeadEndError(LookupError):
    """The current node has no out-neighbors; the walk stops here."""


def _adjacent(g: WeightedDigraph, a: int, b: int) -> bool:
    return g.has_edge(a, b) or g.has_edge(b, a)


def transition_distribution(g: WeightedDigraph, t: int | None, v: int,
                            p: float = 1.0, q: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Next-step probabilities from ``v`` having arrived from ``t``.

    Returns ``(neighbors, probs)`` ordered by neighbor id. The bias is 1/p for
    returning to ``t``, 1 for neighbors adjacent to ``t`` in either direction,
    and 1/q otherwise. ``t=None`` gives the first-order (weight-proportional)
    step used at the start of a walk.
    """
    nbrs = g.neighborhood(v, "out")
    if not nbrs:
        raise DeadEndError(f"node {v} has no out-neighbors")
    ids = np.array([x for x, _ in nbrs], dtype=np.int64)
    w = np.array([wt for _, wt in nbrs], dtype=np.float64)
    if t is not None:
        alpha = np.array([1.0 / p if x == t else (1.0 if _adjacent(g, t, x) else 1.0 / q)
                          for x in ids])
        w = w * alpha
    return ids, w / w.sum()


# -- random numbers ----------------------------------------------------------

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S11 = np.uint64(11)
_S27 = np.uint64(27)
_S30 = np.uint64(30)
_S31 = np.uint64(31)
_INV53 = 1.0 / 9007199254740992.0


@njit(cache=True, nogil=True)
def _uniform(state):
    state = state + _GOLDEN
    z = state
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    z = z ^ (z >> _S31)
    return state, float(z >> _S11) * _INV53


# -- walks -------------------------------------------------------------------

@njit(cache=True, nogil=True)
def _is_adjacent(und_ptr, und_idx, a, b):
    lo = und_ptr[a]
    hi = und_ptr[a + 1]
    pos = lo + np.searchsorted(und_idx[lo:hi], b)
    return pos < hi and und_idx[pos] == b


@njit(cache=True, nogil=True)
def _walk_kernel(indptr, indices, weights, und_ptr, und_idx, starts, seeds,
                 walk_length, inv_p, inv_q, out, lengths):
    for k in range(starts.shape[0]):
        state = seeds[k]
        cur = starts[k]
        prev = -1
        out[k, 0] = cur
        length = 1
        while length < walk_length:
            lo = indptr[cur]
            hi = indptr[cur + 1]
            if lo == hi:
                break
            total = 0.0
            for e in range(lo, hi):
                x = indices[e]
                if prev < 0:
                    a = 1.0
                elif x == prev:
                    a = inv_p
                elif _is_adjacent(und_ptr, und_idx, prev, x):
                    a = 1.0
                else:
                    a = inv_q
                total += weights[e] * a
            state, r = _uniform(state)
            target = r * total
            acc = 0.0
            choice = indices[hi - 1]
            for e in range(lo, hi):
                x = indices[e]
                if prev < 0:
                    a = 1.0
                elif x == prev:
                    a = inv_p
                elif _is_adjacent(und_ptr, und_idx, prev, x):
                    a = 1.0
                else:
                    a = inv_q
                acc += weights[e] * a
                if target < acc:
                    choice = x
                    break
            out[k, length] = choice
            length += 1
            prev = cur
            cur = choice
        lengths[k] = length


def _walk_tables(g: WeightedDigraph):
    n = g.num_nodes
    # neighbors ordered by label so walks do not depend on id assignment
    rank = np.empty(n, dtype=np.int64)
    rank[np.array(sorted(range(n), key=g.label), dtype=np.int64)] = np.arange(n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    indices, weights = [], []
    und_ptr = np.zeros(n + 1, dtype=np.int64)
    und_idx = []
    for u in range(n):
        nbrs = sorted(g.neighborhood(u, "out"), key=lambda xw: rank[xw[0]])
        indices.extend(x for x, _ in nbrs)
        weights.extend(w for _, w in nbrs)
        indptr[u + 1] = len(indices)
        und = sorted({x for x, _ in g.neighborhood(u, "out")} | {x for x, _ in g.neighborhood(u, "in")})
        und_idx.extend(und)
        und_ptr[u + 1] = len(und_idx)
    return (indptr, np.array(indices, dtype=np.int64), np.array(weights, dtype=np.float64),
            und_ptr, np.array(und_idx, dtype=np.int64))


def walk_matrix(g: WeightedDigraph, cfg: WalkConfig, starts: Sequence[int] | None = None
                ) -> tuple[np.ndarray, np.ndarray]:
    """Walks as a padded ``(n_walks, walk_length)`` array (-1 padded) plus lengths.

    Walk ``r`` from node ``u`` uses the seed ``derive_seed(cfg.seed, "walk",
    label(u), r)``. Rows are ordered round by round, nodes ascending within a
    round.
    """
    indptr, indices, weights, und_ptr, und_idx = _walk_tables(g)
    if starts is None:
        starts = [u for _ in range(cfg.walks_per_node) for u in range(g.num_nodes)]
        rounds = [r for r in range(cfg.walks_per_node) for _ in range(g.num_nodes)]
    else:
        counter: dict[int, int] = {}
        rounds = []
        for u in starts:
            rounds.append(counter.get(u, 0))
            counter[u] = rounds[-1] + 1
    starts_arr = np.asarray(starts, dtype=np.int64)
    seeds = np.array([derive_seed(cfg.seed, "walk", g.label(int(u)), r)
                      for u, r in zip(starts_arr, rounds)], dtype=np.uint64)
    out = np.full((len(starts_arr), cfg.walk_length), -1, dtype=np.int64)
    lengths = np.zeros(len(starts_arr), dtype=np.int64)
    if len(starts_arr):
        _walk_kernel(indptr, indices, weights, und_ptr, und_idx, starts_arr, seeds,
                     cfg.walk_length, 1.0 / cfg.p, 1.0 / cfg.q, out, lengths)
    return out, lengths


def generate_walks(g: WeightedDigraph, cfg: WalkConfig) -> list[np.ndarray]:
    out, lengths = walk_matrix(g, cfg)
    return [out[i, :lengths[i]].copy() for i in range(len(lengths))]


# -- skip-gram ---------------------------------------------------------------

@dataclass
class EmbeddingMatrix:
    labels: tuple[str, ...]
    vectors: np.ndarray
    context_vectors: np.ndarray | None = field(default=None, repr=False)

    @property
    def dimensions(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label) -> bool:
        return str(label) in self._index

    @property
    def _index(self) -> dict[str, int]:
        idx = self.__dict__.get("_index_cache")
        if idx is None:
            idx = {lab: i for i, lab in enumerate(self.labels)}
            self.__dict__["_index_cache"] = idx
        return idx

    def vector(self, label) -> np.ndarray:
        return self.vectors[self._index[str(label)]]


@njit(cache=True, nogil=True)
def _sigmoid(f):
    if f >= 0:
        return 1.0 / (1.0 + math.exp(-f))
    e = math.exp(f)
    return e / (1.0 + e)


@njit(cache=True, nogil=True)
def _sgns_kernel(tokens, offsets, w_in, w_out, cdf, window, negatives, epochs, lr0, lr1, seed):
    state = seed
    dim = w_in.shape[1]
    total = epochs * tokens.shape[0]
    processed = 0
    grad = np.zeros(dim)
    for _ in range(epochs):
        for wi in range(offsets.shape[0] - 1):
            a = offsets[wi]
            b = offsets[wi + 1]
            for i in range(a, b):
                lr = lr0 - (lr0 - lr1) * processed / total
                processed += 1
                c = tokens[i]
                lo = max(a, i - window)
                hi = min(b, i + window + 1)
                for j in range(lo, hi):
                    if j == i:
                        continue
                    o = tokens[j]
                    grad[:] = 0.0
                    for s in range(negatives + 1):
                        if s == 0:
                            target = o
                            label = 1.0
                        else:
                            state, r = _uniform(state)
                            target = np.searchsorted(cdf, r, side="right")
                            if target == o:
                                continue
                            label = 0.0
                        f = 0.0
                        for k in range(dim):
                            f += w_in[c, k] * w_out[target, k]
                        g = (label - _sigmoid(f)) * lr
                        for k in range(dim):
                            grad[k] += g * w_out[target, k]
                            w_out[target, k] += g * w_in[c, k]
                    for k in range(dim):
                        w_in[c, k] += grad[k]


@njit(cache=True, nogil=True)
def _objective_kernel(tokens, offsets, w_in, w_out, cdf, window, negatives, seed):
    state = seed
    dim = w_in.shape[1]
    acc = 0.0
    count = 0
    for wi in range(offsets.shape[0] - 1):
        a = offsets[wi]
        b = offsets[wi + 1]
        for i in range(a, b):
            c = tokens[i]
            for j in range(max(a, i - window), min(b, i + window + 1)):
                if j == i:
                    continue
                for s in range(negatives + 1):
                    if s == 0:
                        target = tokens[j]
                        sign = 1.0
                    else:
                        state, r = _uniform(state)
                        target = np.searchsorted(cdf, r, side="right")
                        sign = -1.0
                    f = 0.0
                    for k in range(dim):
                        f += w_in[c, k] * w_out[target, k]
                    acc += math.log(max(_sigmoid(sign * f), 1e-300))
                count += 1
    return acc / max(count, 1)


def _corpus(walks: Sequence[Sequence[int]]) -> tuple[np.ndarray, np.ndarray]:
    walks = [np.asarray(w, dtype=np.int64) for w in walks if len(w) >= 2]
    if not walks:
        raise ValueError("need at least one walk of length >= 2")
    offsets = np.zeros(len(walks) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(w) for w in walks])
    return np.concatenate(walks), offsets


def _negative_cdf(tokens: np.ndarray, num_nodes: int) -> np.ndarray:
    counts = np.bincount(tokens, minlength=num_nodes).astype(np.float64) ** 0.75
    cdf = np.cumsum(counts / counts.sum())
    cdf[-1] = 1.0
    return cdf


def initial_vectors(num_nodes: int, cfg: TrainConfig) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.Generator(np.random.PCG64(derive_seed(cfg.seed, "init")))
    half = 0.5 / cfg.dimensions
    w_in = rng.uniform(-half, half, size=(num_nodes, cfg.dimensions))
    return w_in, np.zeros((num_nodes, cfg.dimensions))


def train_skipgram(walks: Sequence[Sequence[int]], cfg: TrainConfig,
                   labels: Sequence[str] | None = None) -> EmbeddingMatrix:
    """Skip-gram with negative sampling over walks of node ids.

    Each (center, context) pair within ``cfg.window`` takes one SGD step on
    log sigmoid(u_o . v_c) plus ``negative_samples`` terms log sigmoid(-u_n . v_c),
    negatives drawn from walk frequencies raised to 0.75. The learning rate
    decays linearly from ``lr_initial`` to ``lr_final`` over all epochs.
    ``epochs=0`` returns the initialization.
    """
    tokens, offsets = _corpus(walks)
    num_nodes = len(labels) if labels is not None else int(tokens.max()) + 1
    if labels is None:
        labels = [str(i) for i in range(num_nodes)]
    w_in, w_out = initial_vectors(num_nodes, cfg)
    if cfg.epochs > 0:
        cdf = _negative_cdf(tokens, num_nodes)
        _sgns_kernel(tokens, offsets, w_in, w_out, cdf, cfg.window, cfg.negative_samples,
                     cfg.epochs, cfg.lr_initial, cfg.lr_final,
                     np.uint64(derive_seed(cfg.seed, "sgns")))
    if not np.all(np.isfinite(w_in)):
        raise FloatingPointError("non-finite embedding entries after training")
    return EmbeddingMatrix(tuple(labels), w_in, w_out)


def skipgram_objective(walks: Sequence[Sequence[int]], w_in: np.ndarray, w_out: np.ndarray,
                       cfg: TrainConfig, seed: int = 0) -> float:
    """Mean negative-sampling objective per (center, context) pair.

    Negatives come from a fixed seeded stream, so two evaluations with the
    same ``seed`` score the same sample.
    """
    tokens, offsets = _corpus(walks)
    cdf = _negative_cdf(tokens, w_in.shape[0])
    return float(_objective_kernel(tokens, offsets, w_in, w_out, cdf, cfg.window,
                                   cfg.negative_samples, np.uint64(derive_seed(seed, "objective"))))


def embed_graph(g: WeightedDigraph, walk_cfg: WalkConfig, train_cfg: TrainConfig) -> EmbeddingMatrix:
    walks = generate_walks(g, walk_cfg)
    return train_skipgram(walks, train_cfg, labels=g.labels)


# -- features ----------------------------------------------------------------

def cosine_similarity(a, b) -> float:
    """Cosine of the angle between ``a`` and ``b``; 0.0 if either is the zero vector."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def concat_features(src, tgt) -> np.ndarray:
    """Source entries followed by target entries."""
    src = np.asarray(src, dtype=np.float64)
    tgt = np.asarray(tgt, dtype=np.float64)
    if src.shape != tgt.shape:
        raise ValueError(f"dimension mismatch: {src.shape} vs {tgt.shape}")
    return np.concatenate([src, tgt])


# -- CSV ---------------------------------------------------------------------

def write_embeddings(emb: EmbeddingMatrix, path: str | Path, comments: Sequence[str] = ()) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["label", *(f"e{i}" for i in range(emb.dimensions))])
        for label, row in zip(emb.labels, emb.vectors):
            writer.writerow([label, *(repr(float(x)) for x in row)])


def read_embeddings(path: str | Path) -> EmbeddingMatrix:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(ln for ln in fh if not ln.startswith("#"))]
    header, body = rows[0], [r for r in rows[1:] if r]
    if header[0] != "label":
        raise ValueError(f"{path}: embedding header must start with 'label'")
    labels = tuple(r[0] for r in body)
    vectors = np.array([[float(x) for x in r[1:]] for r in body], dtype=np.float64)
    return EmbeddingMatrix(labels, vectors.reshape(len(labels), len(header) - 1))
