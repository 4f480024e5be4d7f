"""Discrete Laplacians attached to a metric graph and the equilateral correspondence.

Two weightings are supported:

* normalized: vertex weight ``deg(v)``, edge weight 1;
* metric: vertex weight ``m(v)`` = total length of the edges at ``v``,
  edge weight ``1 / length``.

In both cases ``(Lf)(v) = (1/m(v)) sum_{u ~ v} b(uv) (f(v) - f(u))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .graph import GraphError, GraphPoint, MetricGraph, scaled
from .spectrum import EigenvalueList, eigenvalues

__all__ = [
    "DiscreteLaplacian",
    "vertex_weights",
    "edge_weights",
    "discrete_spectrum",
    "cluster_eigenvalues",
    "equilateral_map",
    "MappedValue",
    "equilateral_compare",
    "EquilateralReport",
    "AffineInterpolant",
    "interpolate_affine",
    "kirchhoff_defect",
]


def vertex_weights(g: MetricGraph) -> dict[str, float]:
    return {v: math.fsum(g.edge(eid).length for eid in g.incidence[v]) for v in g.vertices}


def edge_weights(g: MetricGraph) -> dict[str, float]:
    return {e.id: 1.0 / e.length for e in g.edges}


@dataclass
class DiscreteLaplacian:
    graph: MetricGraph
    m: dict[str, float]
    b: dict[str, float]

    @classmethod
    def normalized(cls, g: MetricGraph) -> "DiscreteLaplacian":
        return cls(g, {v: float(g.degree(v)) for v in g.vertices}, {e.id: 1.0 for e in g.edges})

    @classmethod
    def metric(cls, g: MetricGraph) -> "DiscreteLaplacian":
        return cls(g, vertex_weights(g), edge_weights(g))

    def matrix(self) -> np.ndarray:
        """The operator in the vertex basis (not symmetric)."""
        g = self.graph
        idx = g.vertex_index
        n = g.n_vertices
        A = np.zeros((n, n))
        for e in g.edges:
            i, j = idx[e.tail], idx[e.head]
            w = self.b[e.id]
            A[i, i] += w / self.m[e.tail]
            A[j, j] += w / self.m[e.head]
            A[i, j] -= w / self.m[e.tail]
            A[j, i] -= w / self.m[e.head]
        return A

    def symmetrized(self) -> np.ndarray:
        """``M^(1/2) A M^(-1/2)``, symmetric since the operator is self-adjoint in l2(V; m)."""
        r = np.sqrt(np.array([self.m[v] for v in self.graph.vertices]))
        return r[:, None] * self.matrix() / r[None, :]

    def apply(self, f: Mapping[str, float]) -> dict[str, float]:
        g = self.graph
        out = {}
        for v in g.vertices:
            acc = math.fsum(self.b[e.id] * (f[v] - f[u]) for u, e in g.neighbors(v))
            out[v] = acc / self.m[v]
        return out


def cluster_eigenvalues(vals, rtol: float = 1e-10) -> list[tuple[float, int]]:
    """Group sorted values that agree within ``rtol * (1 + |value|)``."""
    vals = np.sort(np.asarray(vals, dtype=float))
    out: list[list] = []
    for x in vals:
        if out and abs(x - out[-1][2]) <= rtol * (1.0 + abs(x)):
            out[-1][1] += 1
            out[-1][0] += (x - out[-1][0]) / out[-1][1]
            out[-1][2] = x
        else:
            out.append([x, 1, x])
    return [(0.0 if abs(c) < 1e-12 else float(c), int(m)) for c, m, _ in out]


def discrete_spectrum(L: DiscreteLaplacian, rtol: float = 1e-10) -> list[tuple[float, int]]:
    """Sorted ``(eigenvalue, multiplicity)`` pairs."""
    D = L.symmetrized()
    vals = np.linalg.eigvalsh(0.5 * (D + D.T))
    return cluster_eigenvalues(vals, rtol)


@dataclass(frozen=True)
class MappedValue:
    lam: float
    excluded: bool


def _is_excluded(k: float, atol: float = 1e-6) -> bool:
    n = round(k / math.pi)
    return n >= 1 and abs(k - n * math.pi) <= atol


def equilateral_map(mu: float, lam_max: float) -> list[MappedValue]:
    """All ``lambda`` in ``[0, lam_max]`` with ``1 - cos(sqrt(lambda)) = mu``.

    Values in ``{(pi n)**2 : n >= 1}``, where the correspondence is not
    asserted, are marked ``excluded``.
    """
    if not -1e-12 <= mu <= 2.0 + 1e-12:
        raise ValueError(f"mu = {mu} outside [0, 2]")
    mu = min(max(mu, 0.0), 2.0)
    base = math.acos(1.0 - mu)
    kmax = math.sqrt(lam_max)
    ks = set()
    n = 0
    while 2.0 * math.pi * n - base <= kmax + 1e-12:
        for k in (2.0 * math.pi * n - base, 2.0 * math.pi * n + base):
            if -1e-12 <= k <= kmax + 1e-12:
                ks.add(round(max(k, 0.0), 13))
        n += 1
    return [MappedValue(k * k, _is_excluded(k)) for k in sorted(ks)]


@dataclass
class EquilateralReport:
    discrete_spectrum: list[tuple[float, int]]
    mapped: list[dict]
    solver: list[tuple[float, int]]
    mismatches: list[dict] = field(default_factory=list)
    excluded_hits: list[tuple[float, int]] = field(default_factory=list)
    scale: float = 1.0

    @property
    def passed(self) -> bool:
        return not self.mismatches

    def to_dict(self) -> dict:
        return {
            "discrete_spectrum": [{"mu": m, "multiplicity": k} for m, k in self.discrete_spectrum],
            "mapped": self.mapped,
            "solver": [{"lambda": lam, "multiplicity": k} for lam, k in self.solver],
            "mismatches": self.mismatches,
            "excluded_hits": [{"lambda": lam, "multiplicity": k} for lam, k in self.excluded_hits],
            "scale": self.scale,
            "pass": self.passed,
        }


def equilateral_compare(g: MetricGraph, kmax: float, tol: float = 1e-8,
                        ev: EigenvalueList | None = None) -> EquilateralReport:
    """Match the solver spectrum against the normalized-Laplacian spectrum.

    A graph with common edge length ``a`` is rescaled to unit lengths and
    the solver runs up to ``a * kmax`` on the rescaled graph; reported
    ``lambda`` values are for the original lengths. Away from ``(pi n)**2``
    every solver eigenvalue must map to a discrete eigenvalue with the same
    multiplicity and vice versa.
    """
    if not g.is_equilateral():
        raise GraphError("equilateral_compare needs all edge lengths equal")
    a = g.edges[0].length
    unit = scaled(g, 1.0 / a) if a != 1.0 else g
    kunit = kmax * a
    if ev is None:
        ev = eigenvalues(unit, kunit)
    dspec = discrete_spectrum(DiscreteLaplacian.normalized(unit))
    solver = [(v.lam, v.multiplicity) for v in ev.values]
    lam_max = kunit * kunit
    mismatches: list[dict] = []
    excluded_hits = []
    mapped = []

    def close(l1: float, l2: float) -> bool:
        return abs(l1 - l2) <= tol * max(1.0, l2)

    # solver -> discrete
    for lam, mult in solver:
        k = math.sqrt(lam)
        if _is_excluded(k):
            excluded_hits.append((lam / a**2, mult))
            continue
        mu = 1.0 - math.cos(k)
        hit = [m for m in dspec if abs(m[0] - mu) <= tol]
        if not hit:
            mismatches.append({"direction": "solver->discrete", "lambda": lam / a**2, "mu": mu,
                               "reason": "no discrete eigenvalue"})
        elif hit[0][1] != mult and lam > 0:
            mismatches.append({"direction": "solver->discrete", "lambda": lam / a**2, "mu": mu,
                               "reason": f"multiplicity {mult} vs {hit[0][1]}"})
    # discrete -> solver
    for mu, dmult in dspec:
        for mv in equilateral_map(mu, lam_max):
            mapped.append({"mu": mu, "lambda": mv.lam / a**2, "excluded": mv.excluded})
            if mv.excluded:
                continue
            hit = [s for s in solver if close(s[0], mv.lam)]
            if not hit:
                mismatches.append({"direction": "discrete->solver", "lambda": mv.lam / a**2, "mu": mu,
                                   "reason": "missing from solver"})
            elif hit[0][1] != dmult and mv.lam > 0:
                mismatches.append({"direction": "discrete->solver", "lambda": mv.lam / a**2, "mu": mu,
                                   "reason": f"multiplicity {hit[0][1]} vs {dmult}"})
    return EquilateralReport(
        discrete_spectrum=dspec,
        mapped=mapped,
        solver=[(lam / a**2, m) for lam, m in solver],
        mismatches=mismatches,
        excluded_hits=excluded_hits,
        scale=a,
    )


@dataclass
class AffineInterpolant:
    """Edgewise affine function with prescribed vertex values."""

    graph: MetricGraph
    values: dict[str, float]

    def slope(self, eid: str) -> float:
        e = self.graph.edge(eid)
        return (self.values[e.head] - self.values[e.tail]) / e.length

    def __call__(self, p: GraphPoint) -> float:
        e = self.graph.edge(p.edge)
        if not 0.0 <= p.offset <= e.length:
            raise GraphError(f"offset {p.offset!r} outside edge {e.id!r}")
        return self.values[e.tail] + self.slope(p.edge) * p.offset

    def outward_derivative(self, v: str, eid: str) -> float:
        """Derivative at ``v`` in the direction pointing into edge ``eid``."""
        e = self.graph.edge(eid)
        if v == e.tail:
            return self.slope(eid)
        if v == e.head:
            return -self.slope(eid)
        raise GraphError(f"{v!r} is not an endpoint of {eid!r}")


def interpolate_affine(g: MetricGraph, f: Mapping[str, float]) -> AffineInterpolant:
    missing = set(g.vertices) - set(f)
    if missing:
        raise GraphError(f"vertex function undefined at {sorted(missing)}")
    return AffineInterpolant(g, {v: float(f[v]) for v in g.vertices})


def kirchhoff_defect(g: MetricGraph, f: Mapping[str, float], v: str) -> float:
    """Sum of the outgoing derivatives of the affine interpolant of ``f`` at ``v``."""
    F = interpolate_affine(g, f)
    return math.fsum(F.outward_derivative(v, eid) for eid in g.incidence[v])
