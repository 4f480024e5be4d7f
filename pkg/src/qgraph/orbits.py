"""Periodic orbits on the bond graph of a metric graph.

A periodic orbit is a closed walk up to cyclic rotation, with backtracking
allowed. Walks are sequences of directed bonds; bond ``2i`` traverses edge
``i`` (in id order) from tail to head and ``2i + 1`` the other way. The
canonical representative of an orbit is its lexicographically minimal
rotation in that bond order. Reversed orbits are distinct orbits.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from .graph import GraphError, MetricGraph
from .kernels import BudgetExceeded, closed_walks

__all__ = [
    "BondGraph",
    "PeriodicOrbit",
    "ScatteringTable",
    "OrbitBudgetExceeded",
    "enumerate_orbits",
    "orbit_from_bonds",
    "primitive_part",
    "scattering_coefficient",
    "minimal_rotation",
    "repetition_count",
    "orbit_invariants",
]

DEFAULT_BUDGET = 10_000_000


class OrbitBudgetExceeded(RuntimeError):
    """More orbits than the configured cap; lower ``lmax``."""


def minimal_rotation(seq: tuple[int, ...]) -> tuple[int, ...]:
    n = len(seq)
    return min(seq[i:] + seq[:i] for i in range(n)) if n else seq


def repetition_count(seq: tuple[int, ...]) -> int:
    n = len(seq)
    for p in range(1, n + 1):
        if n % p == 0 and seq == seq[:p] * (n // p):
            return n // p
    return 1


class ScatteringTable:
    """Vertex scattering coefficients ``S_v(e, e') = 2/deg(v) - [e == e']``."""

    def __init__(self, g: MetricGraph):
        self.graph = g

    def __call__(self, v: str, e: str, e2: str) -> float:
        inc = self.graph.incidence[v]
        if e not in inc or e2 not in inc:
            raise GraphError(f"edges {e!r}, {e2!r} are not both incident to {v!r}")
        return 2.0 / len(inc) - (1.0 if e == e2 else 0.0)

    def matrix(self, v: str) -> np.ndarray:
        d = self.graph.degree(v)
        return np.full((d, d), 2.0 / d) - np.eye(d)


class BondGraph:
    """Directed bonds, their successors and the transition factors."""

    def __init__(self, g: MetricGraph):
        self.graph = g
        self.bonds = g.bonds()
        nb = len(self.bonds)
        self.lengths = np.array([b.edge.length for b in self.bonds])
        starts: dict[str, list[int]] = {v: [] for v in g.vertices}
        for i, b in enumerate(self.bonds):
            starts[b.start].append(i)
        fac = np.full((nb, nb), np.nan)
        ptr = [0]
        idx: list[int] = []
        for i, b in enumerate(self.bonds):
            v = b.end
            d = g.degree(v)
            for j in starts[v]:
                fac[i, j] = 2.0 / d - (1.0 if self.bonds[j].edge.id == b.edge.id else 0.0)
                idx.append(j)
            ptr.append(len(idx))
        self.succ_ptr = np.array(ptr, dtype=np.int64)
        self.succ_idx = np.array(idx, dtype=np.int64)
        self.factors = fac

    @cached_property
    def labels(self) -> list[str]:
        return [b.label for b in self.bonds]

    def index(self, label: str) -> int:
        return self.labels.index(label)


@dataclass(frozen=True)
class PeriodicOrbit:
    """Canonical (rotation-minimal) bond sequence with derived quantities."""

    bonds: tuple[int, ...]
    length: float
    repetition: int
    scattering: float
    labels: tuple[str, ...] = ()

    @property
    def n_bonds(self) -> int:
        return len(self.bonds)

    @property
    def primitive_length(self) -> float:
        return self.length / self.repetition

    @property
    def canonical_id(self) -> str:
        return " ".join(self.labels) if self.labels else " ".join(map(str, self.bonds))

    @property
    def amplitude(self) -> float:
        """Weight ``s(p) * l(prim p)`` of the orbit in the trace formula."""
        return self.scattering * self.primitive_length


def _walk_scattering(bg: BondGraph, seq: tuple[int, ...]) -> float:
    s = 1.0
    n = len(seq)
    for i in range(n):
        f = bg.factors[seq[i], seq[(i + 1) % n]]
        if math.isnan(f):
            raise GraphError("bond sequence is not a closed walk")
        s *= f
    return s


def orbit_from_bonds(bg: BondGraph, seq: Iterable[int]) -> PeriodicOrbit:
    """Canonicalise an arbitrary closed bond walk."""
    seq = tuple(int(b) for b in seq)
    if not seq:
        raise GraphError("empty walk")
    can = minimal_rotation(seq)
    length = 0.0
    for b in can:
        length += bg.lengths[b]
    return PeriodicOrbit(
        can,
        float(length),
        repetition_count(can),
        _walk_scattering(bg, can),
        tuple(bg.labels[b] for b in can),
    )


def scattering_coefficient(p: PeriodicOrbit, table: ScatteringTable) -> float:
    """Product of vertex scattering coefficients along the orbit."""
    bonds = table.graph.bonds()
    s = 1.0
    n = p.n_bonds
    for i in range(n):
        b, b2 = bonds[p.bonds[i]], bonds[p.bonds[(i + 1) % n]]
        if b.end != b2.start:
            raise GraphError("orbit is not a closed walk on this graph")
        s *= table(b.end, b.edge.id, b2.edge.id)
    return s


def primitive_part(p: PeriodicOrbit, bond_graph: BondGraph | None = None) -> PeriodicOrbit:
    """The orbit traversed once. Pass ``bond_graph`` to recompute the
    scattering coefficient exactly instead of taking an r-th root."""
    if p.repetition == 1:
        return p
    n = p.n_bonds // p.repetition
    bonds = p.bonds[:n]
    if bond_graph is not None:
        s = _walk_scattering(bond_graph, bonds)
    else:
        s = abs(p.scattering) ** (1.0 / p.repetition)
        if p.scattering < 0:
            s = -s
    return PeriodicOrbit(bonds, p.primitive_length, 1, s, p.labels[:n])


def enumerate_orbits(
    g: MetricGraph,
    lmax: float,
    *,
    skip_zero: bool = False,
    budget: int = DEFAULT_BUDGET,
    backend=None,
) -> list[PeriodicOrbit]:
    """All periodic orbits with length ``<= lmax``, sorted by (length, canonical id).

    ``skip_zero`` drops every orbit containing a transition with zero
    scattering factor (backtracking at degree-2 vertices); such orbits do not
    contribute to the trace formula.
    """
    if not lmax > 0:
        raise GraphError("lmax must be positive")
    bg = BondGraph(g)
    kernel = backend or closed_walks
    try:
        flat, offsets, lengths, scat, reps = kernel(
            bg.succ_ptr, bg.succ_idx, bg.factors, bg.lengths, float(lmax), bool(skip_zero), int(budget)
        )
    except BudgetExceeded:
        raise OrbitBudgetExceeded(f"more than {budget} orbits up to length {lmax}") from None
    labels = bg.labels
    orbits = []
    for i in range(lengths.size):
        seq = tuple(int(b) for b in flat[offsets[i]:offsets[i + 1]])
        orbits.append(PeriodicOrbit(seq, float(lengths[i]), int(reps[i]), float(scat[i]),
                                    tuple(labels[b] for b in seq)))
    orbits.sort(key=lambda p: (p.length, p.bonds))
    return orbits


def orbit_invariants(orbits: Iterable[PeriodicOrbit], nonzero: bool = True, digits: int | None = None) -> Counter:
    """Multiset of ``(length, primitive length, scattering)`` triples.

    With ``nonzero`` only orbits with ``s(p) != 0`` are kept; ``digits``
    rounds the triples for comparisons across models.
    """
    out: Counter = Counter()
    for p in orbits:
        if nonzero and p.scattering == 0.0:
            continue
        key = (p.length, p.primitive_length, p.scattering)
        if digits is not None:
            key = tuple(round(x, digits) + 0.0 for x in key)
        out[key] += 1
    return out
