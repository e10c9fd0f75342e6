"""Directed weighted graph with dense integer node ids and a label table."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np


class GraphError(ValueError):
    pass


class FrozenGraphError(GraphError):
    pass


class WeightedDigraph:
    """Simple digraph; parallel observations accumulate into one weight.

    Nodes are ``0..num_nodes-1`` and each carries a string label. The graph is
    mutable until :meth:`freeze` is called, after which it is read-only and
    safe to share between threads.
    """

    def __init__(self, labels: Iterable[str] = ()):
        self._labels: list[str] = []
        self._index: dict[str, int] = {}
        self._out: list[dict[int, float]] = []
        self._in: list[dict[int, float]] = []
        self._frozen = False
        self._arrays = None
        for label in labels:
            self.add_node(label)

    # -- construction -----------------------------------------------------

    def add_node(self, label: str) -> int:
        """Return the id of ``label``, creating the node if needed."""
        label = str(label)
        if label in self._index:
            return self._index[label]
        if self._frozen:
            raise FrozenGraphError("cannot add nodes to a frozen graph")
        idx = len(self._labels)
        self._labels.append(label)
        self._index[label] = idx
        self._out.append({})
        self._in.append({})
        return idx

    def add_edge(self, u: int, v: int, w: float) -> "WeightedDigraph":
        if self._frozen:
            raise FrozenGraphError("cannot add edges to a frozen graph")
        self._check_node(u)
        self._check_node(v)
        w = float(w)
        if not w > 0 or not np.isfinite(w):
            raise GraphError(f"edge weight must be positive and finite, got {w!r}")
        self._out[u][v] = self._out[u].get(v, 0.0) + w
        self._in[v][u] = self._out[u][v]
        return self

    def freeze(self) -> "WeightedDigraph":
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    # -- queries ----------------------------------------------------------

    @property
    def num_nodes(self) -> int:
        return len(self._labels)

    @property
    def num_edges(self) -> int:
        return sum(len(nbrs) for nbrs in self._out)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self._labels)

    def label(self, u: int) -> str:
        return self._labels[u]

    def node_id(self, label: str) -> int:
        try:
            return self._index[str(label)]
        except KeyError:
            raise KeyError(f"unknown node label {label!r}") from None

    def __contains__(self, label: object) -> bool:
        return str(label) in self._index

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._out[u]

    def weight(self, u: int, v: int) -> float:
        """Weight of edge ``(u, v)``; 0.0 if absent."""
        return self._out[u].get(v, 0.0)

    def neighborhood(self, u: int, direction: str = "out") -> list[tuple[int, float]]:
        """Adjacency of ``u`` as ``(node, weight)`` pairs, ascending by node id."""
        self._check_node(u)
        if direction == "out":
            nbrs = self._out[u]
        elif direction == "in":
            nbrs = self._in[u]
        else:
            raise ValueError(f"direction must be 'out' or 'in', got {direction!r}")
        return sorted(nbrs.items())

    def out_degree(self, u: int) -> int:
        return len(self._out[u])

    def in_degree(self, u: int) -> int:
        return len(self._in[u])

    def out_degrees(self) -> np.ndarray:
        return np.array([len(n) for n in self._out], dtype=np.int64)

    def in_degrees(self) -> np.ndarray:
        return np.array([len(n) for n in self._in], dtype=np.int64)

    def edges(self) -> Iterator[tuple[int, int, float]]:
        """All edges ordered by (source id, target id)."""
        for u in range(self.num_nodes):
            for v, w in sorted(self._out[u].items()):
                yield u, v, w

    def labeled_edges(self) -> set[tuple[str, str, float]]:
        return {(self._labels[u], self._labels[v], w) for u, v, w in self.edges()}

    def total_weight(self) -> float:
        return float(sum(sum(n.values()) for n in self._out))

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(src, dst, weight)`` arrays in :meth:`edges` order (cached once frozen)."""
        if self._arrays is not None:
            return self._arrays
        rows = list(self.edges())
        src = np.array([r[0] for r in rows], dtype=np.int64)
        dst = np.array([r[1] for r in rows], dtype=np.int64)
        wts = np.array([r[2] for r in rows], dtype=np.float64)
        if self._frozen:
            self._arrays = (src, dst, wts)
        return src, dst, wts

    def adjacency_matrix(self, weighted: bool = False) -> np.ndarray:
        n = self.num_nodes
        a = np.zeros((n, n), dtype=np.float64 if weighted else np.int64)
        src, dst, wts = self.edge_arrays()
        a[src, dst] = wts if weighted else 1
        return a

    def reverse(self) -> "WeightedDigraph":
        """Copy with every edge flipped; labels and ids are preserved."""
        r = WeightedDigraph(self._labels)
        for u, v, w in self.edges():
            r.add_edge(v, u, w)
        if self._frozen:
            r.freeze()
        return r

    def same_as(self, other: "WeightedDigraph") -> bool:
        """Equality of label sets and labeled edge sets (ids may differ)."""
        return (set(self._labels) == set(other._labels)
                and self.labeled_edges() == other.labeled_edges())

    def __repr__(self) -> str:
        return f"WeightedDigraph(nodes={self.num_nodes}, edges={self.num_edges})"

    def _check_node(self, u: int) -> None:
        if not isinstance(u, (int, np.integer)) or not 0 <= u < len(self._labels):
            raise GraphError(f"node id {u!r} out of range [0, {len(self._labels)})")


def add_edge_accumulate(g: WeightedDigraph, u: int, v: int, w: float) -> WeightedDigraph:
    return g.add_edge(u, v, w)


def reverse(g: WeightedDigraph) -> WeightedDigraph:
    return g.reverse()


def neighborhood(g: WeightedDigraph, u: int, direction: str = "out") -> list[tuple[int, float]]:
    return g.neighborhood(u, direction)


def from_edges(labels: Sequence[str], edges: Iterable[tuple[int, int, float]]) -> WeightedDigraph:
    g = WeightedDigraph(labels)
    for u, v, w in edges:
        g.add_edge(u, v, w)
    return g.freeze()


# -- edge-list CSV ---------------------------------------------------------

EDGELIST_HEADER = ("source_label", "target_label", "weight")


def format_weight(w: float) -> str:
    return format(w, ".6g")


def write_edgelist(g: WeightedDigraph, dest, comments: Sequence[str] = ()) -> None:
    """Write ``source_label,target_label,weight`` rows.

    Nodes with no incident edges are written as ``label,,`` so the node set
    survives a round trip.
    """
    own = isinstance(dest, (str, Path))
    fh = open(dest, "w", encoding="utf-8", newline="") if own else dest
    try:
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(EDGELIST_HEADER)
        for u, v, w in g.edges():
            writer.writerow((g.label(u), g.label(v), format_weight(w)))
        for u in range(g.num_nodes):
            if g.out_degree(u) == 0 and g.in_degree(u) == 0:
                writer.writerow((g.label(u), "", ""))
    finally:
        if own:
            fh.close()


def read_edgelist(src) -> WeightedDigraph:
    """Inverse of :func:`write_edgelist`; ``#`` lines are skipped."""
    if isinstance(src, (str, Path)):
        text = Path(src).read_text(encoding="utf-8")
    else:
        text = src.read()
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    reader = csv.reader(io.StringIO("\n".join(lines)))
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != EDGELIST_HEADER:
        raise GraphError(f"edge list header must be {','.join(EDGELIST_HEADER)}, got {header}")
    g = WeightedDigraph()
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 3:
            raise GraphError(f"edge list row {lineno}: expected 3 fields, got {len(row)}")
        s, t, w = row
        u = g.add_node(s)
        if t == "" and w == "":
            continue
        v = g.add_node(t)
        try:
            g.add_edge(u, v, float(w))
        except ValueError as exc:
            raise GraphError(f"edge list row {lineno}: {exc}") from None
    return g.freeze()
