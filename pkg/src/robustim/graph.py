"""Directed multigraphs over dense node ids, event-log ingestion and edge-list I/O."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    """Immutable directed multigraph.

    Edges are stored as parallel arrays ``src``, ``dst``, ``param``. The
    meaning of ``param`` depends on the diffusion model that consumes the
    graph (activation probability, threshold weight or delay parameter).
    """

    n: int
    src: np.ndarray
    dst: np.ndarray
    param: np.ndarray
    names: Optional[tuple] = None
    _indptr: np.ndarray = field(init=False, repr=False, compare=False)
    _order: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        src = np.ascontiguousarray(self.src, dtype=np.int64)
        dst = np.ascontiguousarray(self.dst, dtype=np.int64)
        param = np.ascontiguousarray(self.param, dtype=np.float64)
        if not (src.shape == dst.shape == param.shape) or src.ndim != 1:
            raise GraphError("src, dst and param must be 1-d arrays of equal length")
        if self.n < 0:
            raise GraphError("node count must be non-negative")
        if src.size and (src.min() < 0 or dst.min() < 0
                         or src.max() >= self.n or dst.max() >= self.n):
            raise GraphError(f"edge endpoint outside [0, {self.n})")
        if param.size and (not np.all(np.isfinite(param)) or param.min() < 0):
            raise GraphError("edge parameters must be finite and non-negative")
        if self.names is not None and len(self.names) != self.n:
            raise GraphError("names table must have one entry per node")
        for arr in (src, dst, param):
            arr.setflags(write=False)
        order = np.argsort(src, kind="stable")
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=self.n), out=indptr[1:])
        object.__setattr__(self, "src", src)
        object.__setattr__(self, "dst", dst)
        object.__setattr__(self, "param", param)
        object.__setattr__(self, "_indptr", indptr)
        object.__setattr__(self, "_order", order)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple], names=None) -> "Graph":
        edges = list(edges)
        if edges:
            src, dst, param = (np.asarray(col) for col in zip(*edges))
        else:
            src = dst = np.zeros(0, dtype=np.int64)
            param = np.zeros(0)
        return cls(n, src, dst, param, None if names is None else tuple(names))

    @property
    def m(self) -> int:
        return int(self.src.size)

    def out_edges(self, u: int) -> np.ndarray:
        """Indices of the edges leaving ``u``."""
        return self._order[self._indptr[u]:self._indptr[u + 1]]

    def in_weight(self) -> np.ndarray:
        return np.bincount(self.dst, weights=self.param, minlength=self.n)

    def in_degree(self) -> np.ndarray:
        return np.bincount(self.dst, minlength=self.n)

    def with_params(self, param) -> "Graph":
        return Graph(self.n, self.src, self.dst, np.asarray(param, dtype=float), self.names)

    def has_parallel_edges(self) -> bool:
        if self.m < 2:
            return False
        keys = self.src * self.n + self.dst
        return np.unique(keys).size != keys.size

    def edge_list(self) -> list:
        return list(zip(self.src.tolist(), self.dst.tolist(), self.param.tolist()))

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.src, other.src)
                and np.array_equal(self.dst, other.dst)
                and np.array_equal(self.param, other.param))

    __hash__ = None


def merge_parallel_edges(g: Graph, mode: str = "or-probability", scale: float = 0.1) -> Graph:
    """Collapse parallel edges into one.

    ``or-probability`` combines independent activation probabilities as
    ``1 - prod(1 - p)``. ``sum-weight-capped`` sums the parallel parameters
    into a weight ``w`` and sets the result to ``min(1, scale * w)``; with
    unit edges and ``scale=0.1`` this is the co-authorship multigraph rule.
    A graph without parallel edges is returned unchanged under either mode.
    """
    if mode not in ("or-probability", "sum-weight-capped"):
        raise GraphError(f"unknown merge mode {mode!r}")
    if not g.has_parallel_edges():
        return g
    keys = g.src * g.n + g.dst
    uniq, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    # keep first-occurrence order of edges so ids stay stable
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    group = rank[inverse]
    if mode == "or-probability":
        if g.param.size and g.param.max() > 1:
            raise GraphError("or-probability merge needs params in [0, 1]")
        log_miss = np.zeros(uniq.size)
        with np.errstate(divide="ignore"):
            np.add.at(log_miss, group, np.log1p(-g.param))
        param = -np.expm1(log_miss)
    else:
        w = np.zeros(uniq.size)
        np.add.at(w, group, g.param)
        param = np.minimum(1.0, scale * w)
    src = uniq[order] // g.n
    dst = uniq[order] % g.n
    return Graph(g.n, src, dst, param, g.names)


def build_from_event_log(events: Sequence[tuple], top_k_actors: int,
                         param: float = 1.0) -> dict:
    """Build one influence graph per category from a reshare log.

    ``events`` holds ``(timestamp, actor, parent, category)`` tuples where
    ``parent`` is the actor being reshared, or ``None``. The ``top_k_actors``
    most active actors (events taken part in, ties by name) form the shared node set;
    node ids follow activity rank. An event whose parent and actor are both
    kept yields an edge parent -> actor in that event's category. Duplicate
    edges collapse to one and self-loops are dropped.
    """
    if top_k_actors < 1:
        raise GraphError("top_k_actors must be >= 1")
    events = list(events)
    if not events:
        raise GraphError("empty event log")
    if all(_is_none(ev[2]) for ev in events):
        raise GraphError("event log carries no parent links")
    # activity = events an actor takes part in, as resharer or as the one reshared
    activity = Counter(str(ev[1]) for ev in events)
    activity.update(str(ev[2]) for ev in events if not _is_none(ev[2]))
    ranked = sorted(activity, key=lambda a: (-activity[a], a))[:top_k_actors]
    ids = {a: i for i, a in enumerate(ranked)}
    categories = sorted({str(ev[3]) for ev in events})
    edge_sets = {c: {} for c in categories}
    for ts, actor, parent, cat in sorted(events, key=lambda ev: ev[0]):
        if _is_none(parent):
            continue
        a, p = str(actor), str(parent)
        if a == p or a not in ids or p not in ids:
            continue
        edge_sets[str(cat)].setdefault((ids[p], ids[a]), None)
    n = len(ranked)
    return {c: Graph.from_edges(n, [(u, v, param) for u, v in es], names=ranked)
            for c, es in edge_sets.items()}


def _is_none(parent) -> bool:
    return parent is None or parent == "-" or parent == ""


def read_event_log(path) -> list:
    """Parse ``timestamp<TAB>actor<TAB>parent<TAB>category`` lines."""
    events = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise GraphError(f"{path}:{lineno}: expected 4 tab-separated fields")
            ts, actor, parent, cat = parts
            try:
                t = float(ts)
            except ValueError:
                raise GraphError(f"{path}:{lineno}: bad timestamp {ts!r}") from None
            events.append((t, actor, None if _is_none(parent) else parent, cat))
    return events


def read_edge_list(path, n: Optional[int] = None) -> Graph:
    """Read a ``src<TAB>dst<TAB>param`` file.

    The node count comes from ``n`` if given, else from a ``# n=<N>`` header
    comment, else from the largest id seen.
    """
    src, dst, param = [], [], []
    header_n = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("n="):
                    header_n = int(body[2:])
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise GraphError(f"{path}:{lineno}: expected src<TAB>dst<TAB>param")
            try:
                src.append(int(parts[0]))
                dst.append(int(parts[1]))
                param.append(float(parts[2]))
            except ValueError:
                raise GraphError(f"{path}:{lineno}: malformed edge line") from None
    if n is None:
        n = header_n
    if n is None:
        n = max(max(src, default=-1), max(dst, default=-1)) + 1
    return Graph(n, np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64),
                 np.array(param, dtype=float))


def write_edge_list(g: Graph, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# n={g.n}\n")
        for u, v, p in g.edge_list():
            fh.write(f"{u}\t{v}\t{p!r}\n")


def undirected_to_arcs(n: int, edges: Iterable[tuple]) -> Graph:
    """Expand undirected ``(u, v, param)`` edges into two opposite arcs."""
    arcs = []
    for u, v, p in edges:
        arcs.append((u, v, p))
        arcs.append((v, u, p))
    return Graph.from_edges(n, arcs)
