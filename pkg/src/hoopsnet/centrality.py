"""Common out-neighbor scores, adversarial PageRank and low-key leader strength."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import WeightedDigraph


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, last_iterate: np.ndarray, residual: float):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


@dataclass(frozen=True)
class PageRankParams:
    damping: float = 0.85
    tolerance: float = 1e-10
    max_iterations: int = 200
    weighted: bool = True

    def __post_init__(self):
        if not 0.0 < self.damping < 1.0:
            raise ValueError(f"damping must lie in (0, 1), got {self.damping}")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


def con_pair(g: WeightedDigraph, u: int, v: int) -> int:
    """Number of nodes that both ``u`` and ``v`` point to."""
    a = {x for x, _ in g.neighborhood(u, "out")}
    b = {x for x, _ in g.neighborhood(v, "out")}
    return len(a & b)


def con_scores(g: WeightedDigraph, include_self: bool = True) -> np.ndarray:
    """CON(u) = sum over v of con_pair(u, v).

    Every common out-neighbor w of u is shared with each in-neighbor of w, so
    CON(u) is the sum of in-degrees over u's out-neighbors. Dropping the
    ``v = u`` term subtracts out-degree(u).
    """
    src, dst, _ = g.edge_arrays()
    indeg = np.bincount(dst, minlength=g.num_nodes).astype(np.int64)
    scores = np.bincount(src, weights=indeg[dst], minlength=g.num_nodes)
    scores = np.rint(scores).astype(np.int64)
    if not include_self:
        scores -= g.out_degrees()
    return scores


def pagerank_adversarial(g: WeightedDigraph, params: PageRankParams | None = None) -> np.ndarray:
    """PageRank of the reversed graph by power iteration.

    Reversal means a node gains rank from the nodes it beat. Nodes with no
    out-edges in the reversed graph spread their mass uniformly.
    """
    params = params or PageRankParams()
    n = g.num_nodes
    if n == 0:
        raise ValueError("PageRank needs at least one node")
    src, dst, wts = g.edge_arrays()
    # reversed edge (dst -> src)
    rsrc, rdst = dst, src
    rw = wts if params.weighted else np.ones_like(wts)
    out_w = np.bincount(rsrc, weights=rw, minlength=n)
    dangling = out_w == 0
    share = rw / np.where(out_w[rsrc] > 0, out_w[rsrc], 1.0)
    d = params.damping
    rank = np.full(n, 1.0 / n)
    residual = np.inf
    for _ in range(params.max_iterations):
        flow = np.bincount(rdst, weights=rank[rsrc] * share, minlength=n)
        new = (1.0 - d) / n + d * (flow + rank[dangling].sum() / n)
        new /= new.sum()
        residual = float(np.abs(new - rank).sum())
        rank = new
        if residual < params.tolerance:
            return rank
    raise ConvergenceError(
        f"PageRank did not converge in {params.max_iterations} iterations "
        f"(L1 residual {residual:.3e})", rank, residual)


def unity_normalize(values) -> np.ndarray:
    """Min-max rescale into [0, 1]; a constant vector maps to all zeros."""
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        raise ValueError("cannot normalize an empty sequence")
    lo, hi = x.min(), x.max()
    if hi == lo:
        return np.zeros_like(x)
    return (x - lo) / (hi - lo)


@dataclass
class CentralityTable:
    labels: tuple[str, ...]
    con: np.ndarray
    pagerank: np.ndarray
    con_norm: np.ndarray
    pr_norm: np.ndarray
    lkl: np.ndarray

    def rows(self):
        for i, label in enumerate(self.labels):
            yield (label, int(self.con[i]), float(self.pagerank[i]),
                   float(self.con_norm[i]), float(self.pr_norm[i]), float(self.lkl[i]))

    def as_dict(self) -> dict[str, float]:
        """Label to low-key leader strength."""
        return {label: float(v) for label, v in zip(self.labels, self.lkl)}


def low_key_leader_strengths(g: WeightedDigraph, pr_params: PageRankParams | None = None,
                             include_self: bool = True) -> CentralityTable:
    con = con_scores(g, include_self=include_self)
    pr = pagerank_adversarial(g, pr_params)
    con_norm = unity_normalize(con)
    pr_norm = unity_normalize(pr)
    return CentralityTable(g.labels, con, pr, con_norm, pr_norm, con_norm - pr_norm)
