"""Synthetic instances: stochastic Kronecker graphs and adversarial fixtures."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .diffusion import DiffusionScenario
from .graph import Graph

# Seed matrices per structure; the generator rescales them to a target mean degree.
STRUCTURES = {
    "random": ((0.5, 0.5), (0.5, 0.5)),
    "core-peripheral": ((0.9, 0.5), (0.5, 0.1)),
    "hierarchical-community": ((0.9, 0.1), (0.1, 0.9)),
}


class GeneratorError(ValueError):
    pass


@dataclass(frozen=True)
class KroneckerSpec:
    seed: tuple
    power: int
    structure: str = "custom"

    def __post_init__(self):
        mat = np.asarray(self.seed, dtype=float)
        if mat.shape != (2, 2):
            raise GeneratorError("Kronecker seed matrix must be 2x2")
        if np.any(mat < 0) or np.any(mat > 1):
            raise GeneratorError("Kronecker seed entries must lie in [0, 1]")
        if self.power < 1:
            raise GeneratorError("Kronecker power must be >= 1")
        object.__setattr__(self, "seed", tuple(map(tuple, mat.tolist())))

    @property
    def n(self) -> int:
        return 2 ** self.power

    @property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.seed, dtype=float)

    def expected_edges(self) -> float:
        """Expected edge count after self-loops are dropped."""
        mat = self.matrix
        return mat.sum() ** self.power - np.trace(mat) ** self.power

    @classmethod
    def for_structure(cls, structure: str, power: int,
                      mean_degree: float = 10.0) -> "KroneckerSpec":
        """Scale a structure's seed matrix (entries clipped at 1) so the
        expected out-degree is ``mean_degree``, or as close as clipping allows."""
        if structure not in STRUCTURES:
            raise GeneratorError(f"unknown structure {structure!r}")
        base = np.asarray(STRUCTURES[structure], dtype=float)
        n = 2 ** power
        target = mean_degree * n

        def edges(s):
            mat = np.minimum(1.0, base * s)
            return mat.sum() ** power - np.trace(mat) ** power

        lo, hi = 0.0, 1.0 / base[base > 0].min()
        if edges(hi) <= target:
            return cls(np.minimum(1.0, base * hi), power, structure)
        for _ in range(100):
            mid = (lo + hi) / 2
            if edges(mid) < target:
                lo = mid
            else:
                hi = mid
        return cls(np.minimum(1.0, base * (lo + hi) / 2), power, structure)


def kronecker_generate(spec: KroneckerSpec, rng: np.random.Generator,
                       param: float = 1.0) -> Graph:
    """Stochastic Kronecker graph: arc ``u -> v`` appears independently with
    probability ``prod_i seed[bit_i(u)][bit_i(v)]``. Self-loops are dropped."""
    power = spec.power
    hi_bits = power // 2
    lo_bits = power - hi_bits
    P_hi = _kron_power(spec.matrix, hi_bits)
    P_lo = _kron_power(spec.matrix, lo_bits)
    n_lo = P_lo.shape[0]
    srcs, dsts = [], []
    # one block of rows per high-order source prefix keeps memory at O(n * n_lo)
    for u_hi in range(P_hi.shape[0]):
        block = np.kron(P_hi[u_hi], P_lo)  # rows: low bits of u; cols: all v
        hit = rng.random(block.shape) < block
        r, v = np.nonzero(hit)
        u = u_hi * n_lo + r
        keep = u != v
        srcs.append(u[keep])
        dsts.append(v[keep])
    src = np.concatenate(srcs)
    dst = np.concatenate(dsts)
    return Graph(spec.n, src, dst, np.full(src.size, float(param)))


def _kron_power(mat: np.ndarray, p: int) -> np.ndarray:
    out = np.ones((1, 1))
    for _ in range(p):
        out = np.kron(out, mat)
    return out


def adversarial_layout(k: int, m: int) -> dict:
    """Node ids of the gap family: ``x`` then ``y`` then ``u`` then ``v``."""
    return {
        "x": list(range(k)),
        "y": list(range(k, k + m)),
        "u": list(range(k + m, 2 * k + m)),
        "v": list(range(2 * k + m, 3 * k + m)),
    }


def adversarial_instance(k: int, m: int) -> list:
    """``k`` DIC scenarios on a complete bipartite ``x -> y`` graph plus ``k``
    isolated arcs ``u_i -> v_i``.

    In scenario ``i`` only the arcs leaving ``x_i`` (and all ``u -> v`` arcs)
    have probability 1; every other bipartite arc has probability 0.
    """
    if k < 1 or m < 1:
        raise GeneratorError("k and m must be >= 1")
    lay = adversarial_layout(k, m)
    n = 3 * k + m
    scenarios = []
    for i in range(k):
        edges = []
        for a, x in enumerate(lay["x"]):
            p = 1.0 if a == i else 0.0
            edges.extend((x, y, p) for y in lay["y"])
        edges.extend((u, v, 1.0) for u, v in zip(lay["u"], lay["v"]))
        scenarios.append(DiffusionScenario("DIC", Graph.from_edges(n, edges), name=f"scenario-{i}"))
    return scenarios


def _validate_cover(universe: Sequence, sets: Sequence) -> tuple:
    universe = list(universe)
    sets = [frozenset(T) for T in sets]
    if len(set(universe)) != len(universe):
        raise GeneratorError("universe elements must be distinct")
    covered = set().union(*sets) if sets else set()
    missing = [a for a in universe if a not in covered]
    if missing:
        raise GeneratorError(f"elements {missing!r} are not contained in any set")
    stray = covered - set(universe)
    if stray:
        raise GeneratorError(f"sets mention elements outside the universe: {sorted(map(str, stray))}")
    return universe, sets


def setcover_layout(universe: Sequence, sets: Sequence, m: int) -> dict:
    universe = list(universe)
    M = len(sets)
    return {
        "x": list(range(M)),
        "y": {a: list(range(M + i * m, M + (i + 1) * m)) for i, a in enumerate(universe)},
    }


def setcover_fixture(universe: Sequence, sets: Sequence, m: int,
                     model: str = "DIC", window: Optional[float] = None,
                     three_layer: bool = False):
    """One scenario per element ``a_i``: every set-node ``x_T`` with
    ``a_i in T`` points (probability 1) at all ``m`` copies ``y_{a_i, j}``.

    Nodes: ``M`` set-nodes followed by ``m`` copies per element. Under
    ``model="CIC"`` the arcs carry exponential delays with rate 1 and the
    window defaults to ``N * M``.

    ``three_layer=True`` returns the interval-model variant from
    :func:`setcover_three_layer` instead.
    """
    if three_layer:
        return setcover_three_layer(universe, sets, m)
    universe, sets = _validate_cover(universe, sets)
    if m < 1:
        raise GeneratorError("m must be >= 1")
    lay = setcover_layout(universe, sets, m)
    n = len(sets) + m * len(universe)
    scenarios = []
    for a in universe:
        edges = [(lay["x"][t], y, 1.0) for t, T in enumerate(sets) if a in T for y in lay["y"][a]]
        g = Graph.from_edges(n, edges)
        if model.upper() == "CIC":
            w = window if window is not None else float(len(universe) * len(sets))
            scenarios.append(DiffusionScenario("CIC", g, window=w, name=f"element-{a}"))
        else:
            scenarios.append(DiffusionScenario("DIC", g, name=f"element-{a}"))
    return scenarios


def setcover_three_layer(universe: Sequence, sets: Sequence, m: int):
    """Three-layer variant ``X -> Y -> Z`` for the perturbation-interval model.

    ``x_T -> y_a`` arcs (``a in T``) are certain (interval ``[1, 1]``); every
    ``y_a -> z`` arc is completely uncertain (interval ``[0, 1]``). Returns an
    :class:`~robustim.perturbation.IntervalModel`.
    """
    from .perturbation import IntervalModel

    universe, sets = _validate_cover(universe, sets)
    M, N = len(sets), len(universe)
    y_of = {a: M + i for i, a in enumerate(universe)}
    z0 = M + N
    edges, lower, upper = [], [], []
    for t, T in enumerate(sets):
        for a in universe:
            if a in T:
                edges.append((t, y_of[a], 1.0))
                lower.append(1.0)
                upper.append(1.0)
    for a in universe:
        for j in range(m):
            edges.append((y_of[a], z0 + j, 0.5))
            lower.append(0.0)
            upper.append(1.0)
    g = Graph.from_edges(M + N + m, edges)
    return IntervalModel(g, np.array(lower), np.array(upper))
