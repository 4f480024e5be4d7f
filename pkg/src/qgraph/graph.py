"""Finite metric graphs: data model, validation, refinement and metrics.

A metric graph is a simple connected combinatorial graph whose edges carry
positive lengths. Every edge has a fixed orientation ``(tail, head)`` used
only to place the coordinate ``x in [0, length]`` on it; nothing computed in
this package depends on that choice.

Vertex and edge ids are opaque strings. All iteration happens in sorted-id
order so that every derived quantity is reproducible.
"""
from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

__all__ = [
    "Edge",
    "MetricGraph",
    "DirectedBond",
    "GraphPoint",
    "GraphError",
    "ValidationReport",
    "validate",
    "subdivide",
    "path_metric",
    "star_lengths",
    "scaled",
    "flipped",
    "load_graph",
    "graph_from_dict",
    "graph_to_dict",
]


class GraphError(ValueError):
    """Raised for malformed graph input or invalid operation arguments."""


@dataclass(frozen=True)
class Edge:
    id: str
    tail: str
    head: str
    length: float

    def other(self, v: str) -> str:
        if v == self.tail:
            return self.head
        if v == self.head:
            return self.tail
        raise GraphError(f"vertex {v!r} is not an endpoint of edge {self.id!r}")


@dataclass(frozen=True)
class DirectedBond:
    """An edge traversed in one direction.

    ``forward`` means tail -> head.
    """

    edge: Edge
    forward: bool = True

    @property
    def start(self) -> str:
        return self.edge.tail if self.forward else self.edge.head

    @property
    def end(self) -> str:
        return self.edge.head if self.forward else self.edge.tail

    def reversed(self) -> "DirectedBond":
        return DirectedBond(self.edge, not self.forward)

    @property
    def label(self) -> str:
        return f"{self.edge.id}{'+' if self.forward else '-'}"


@dataclass(frozen=True)
class GraphPoint:
    edge: str
    offset: float


@dataclass(frozen=True)
class MetricGraph:
    """Immutable finite metric graph.

    Construction does not check the graph invariants; call :func:`validate`
    (or use :func:`graph_from_dict`, which does) before computing with
    untrusted input.
    """

    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(sorted(self.vertices)))
        object.__setattr__(self, "edges", tuple(sorted(self.edges, key=lambda e: e.id)))

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str, str, float]],
                   vertices: Iterable[str] | None = None) -> "MetricGraph":
        """Build from ``(id, tail, head, length)`` tuples."""
        es = [Edge(str(i), str(a), str(b), float(length)) for i, a, b, length in edges]
        vs = set(vertices or ())
        for e in es:
            vs.update((e.tail, e.head))
        return cls(tuple(vs), tuple(es))

    @cached_property
    def edge_index(self) -> dict[str, int]:
        return {e.id: i for i, e in enumerate(self.edges)}

    @cached_property
    def vertex_index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    def edge(self, eid: str) -> Edge:
        try:
            return self.edges[self.edge_index[eid]]
        except KeyError:
            raise GraphError(f"unknown edge {eid!r}") from None

    @cached_property
    def incidence(self) -> dict[str, tuple[str, ...]]:
        """Vertex -> sorted ids of incident edges."""
        inc: dict[str, list[str]] = {v: [] for v in self.vertices}
        for e in self.edges:
            if e.tail in inc:
                inc[e.tail].append(e.id)
            if e.head in inc and e.head != e.tail:
                inc[e.head].append(e.id)
        return {v: tuple(ids) for v, ids in inc.items()}

    def degree(self, v: str) -> int:
        return len(self.incidence[v])

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def volume(self) -> float:
        return math.fsum(e.length for e in self.edges)

    @property
    def betti(self) -> int:
        return self.n_edges - self.n_vertices + 1

    @property
    def max_length(self) -> float:
        return max(e.length for e in self.edges)

    @property
    def min_length(self) -> float:
        return min(e.length for e in self.edges)

    def is_equilateral(self, rtol: float = 1e-12) -> bool:
        lo, hi = self.min_length, self.max_length
        return hi - lo <= rtol * hi

    def neighbors(self, v: str) -> list[tuple[str, Edge]]:
        return [(self.edge(eid).other(v), self.edge(eid)) for eid in self.incidence[v]]

    def bonds(self) -> list[DirectedBond]:
        """All 2E directed bonds ordered by (edge id, direction), forward first."""
        out = []
        for e in self.edges:
            out.append(DirectedBond(e, True))
            out.append(DirectedBond(e, False))
        return out


@dataclass
class ValidationReport:
    valid: bool
    errors: list[str] = field(default_factory=list)
    volume: float = 0.0
    betti: int = 0
    degrees: dict[str, int] = field(default_factory=dict)


def validate(g: MetricGraph, allow_trivial: bool = False) -> ValidationReport:
    """Check simplicity, connectedness and length positivity.

    ``allow_trivial`` accepts the single-vertex, edgeless graph, which is only
    meaningful as the core of an ended-graph description.
    """
    errors: list[str] = []
    vset = set(g.vertices)
    if len(vset) != len(g.vertices):
        errors.append("duplicate vertex ids")
    if not g.vertices:
        errors.append("graph has no vertices")
    ids = [e.id for e in g.edges]
    if len(set(ids)) != len(ids):
        errors.append("duplicate edge ids")
    seen_pairs: dict[frozenset, str] = {}
    for e in g.edges:
        if e.tail not in vset or e.head not in vset:
            errors.append(f"edge {e.id}: unknown endpoint")
            continue
        if e.tail == e.head:
            errors.append(f"edge {e.id}: loop edge")
            continue
        pair = frozenset((e.tail, e.head))
        if pair in seen_pairs:
            errors.append(f"edge {e.id}: multi-edge (parallel to {seen_pairs[pair]})")
        else:
            seen_pairs[pair] = e.id
        if not (math.isfinite(e.length) and e.length > 0):
            errors.append(f"edge {e.id}: nonpositive or non-finite length {e.length!r}")
    if not g.edges and not (allow_trivial and len(g.vertices) == 1):
        errors.append("graph has no edges (volume must be positive)")
    if not errors and g.vertices:
        # connectivity by BFS over the vertex skeleton
        adj: dict[str, list[str]] = {v: [] for v in g.vertices}
        for e in g.edges:
            adj[e.tail].append(e.head)
            adj[e.head].append(e.tail)
        start = g.vertices[0]
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != len(g.vertices):
            errors.append(f"graph is disconnected ({len(seen)} of {len(g.vertices)} vertices reachable)")
    degrees = {v: g.degree(v) for v in g.vertices} if not errors else {}
    if degrees:
        assert sum(degrees.values()) == 2 * g.n_edges
    return ValidationReport(
        valid=not errors,
        errors=errors,
        volume=g.volume if not errors else 0.0,
        betti=g.betti if not errors else 0,
        degrees=degrees,
    )


def _fresh_id(existing: Iterable[str], base: str) -> str:
    taken = set(existing)
    if base not in taken:
        return base
    i = 1
    while f"{base}.{i}" in taken:
        i += 1
    return f"{base}.{i}"


def subdivide(g: MetricGraph, eid: str, t: float) -> MetricGraph:
    """Split edge ``eid`` at distance ``t`` from its tail by a new degree-2 vertex."""
    e = g.edge(eid)
    if not 0.0 < t < e.length:
        raise GraphError(f"subdivision point {t!r} not interior to edge {eid!r} of length {e.length!r}")
    v = _fresh_id(g.vertices, f"{eid}@")
    id_a = _fresh_id(g.edge_index, f"{eid}a")
    id_b = _fresh_id(set(g.edge_index) | {id_a}, f"{eid}b")
    new_edges = [x for x in g.edges if x.id != eid]
    new_edges.append(Edge(id_a, e.tail, v, t))
    new_edges.append(Edge(id_b, v, e.head, e.length - t))
    return MetricGraph(g.vertices + (v,), tuple(new_edges))


def scaled(g: MetricGraph, c: float) -> MetricGraph:
    """Same combinatorics, every length multiplied by ``c``."""
    if not c > 0:
        raise GraphError("scale factor must be positive")
    return MetricGraph(g.vertices, tuple(Edge(e.id, e.tail, e.head, e.length * c) for e in g.edges))


def flipped(g: MetricGraph, eid: str) -> MetricGraph:
    """Reverse the coordinate orientation of one edge."""
    return MetricGraph(
        g.vertices,
        tuple(Edge(e.id, e.head, e.tail, e.length) if e.id == eid else e for e in g.edges),
    )


def _vertex_distances(g: MetricGraph, sources: Mapping[str, float]) -> dict[str, float]:
    """Multi-source Dijkstra over the vertex skeleton."""
    dist = {v: math.inf for v in g.vertices}
    heap = []
    for v, d in sources.items():
        if d < dist[v]:
            dist[v] = d
            heap.append((d, v))
    heapq.heapify(heap)
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for w, e in g.neighbors(u):
            nd = d + e.length
            if nd < dist[w]:
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return dist


def path_metric(g: MetricGraph, x: GraphPoint, y: GraphPoint) -> float:
    """Length of the shortest path between two points of the metric graph."""
    ex, ey = g.edge(x.edge), g.edge(y.edge)
    for p, e in ((x, ex), (y, ey)):
        if not 0.0 <= p.offset <= e.length:
            raise GraphError(f"offset {p.offset!r} outside edge {e.id!r}")
    src: dict[str, float] = {}
    for v, d in ((ex.tail, x.offset), (ex.head, ex.length - x.offset)):
        src[v] = min(src.get(v, math.inf), d)
    dist = _vertex_distances(g, src)
    best = min(dist[ey.tail] + y.offset, dist[ey.head] + ey.length - y.offset)
    if ex.id == ey.id:
        best = min(best, abs(x.offset - y.offset))
    return best


def star_lengths(g: MetricGraph) -> dict[str, float]:
    """Edge lengths of the star metric: each edge gets m(u) + m(v),
    where m(v) sums the lengths of the edges at v."""
    m = {v: math.fsum(g.edge(eid).length for eid in g.incidence[v]) for v in g.vertices}
    return {e.id: m[e.tail] + m[e.head] for e in g.edges}


# ---------------------------------------------------------------- JSON io

def _parse_length(raw, where: str) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float, str)):
        raise GraphError(f"{where}.length: expected a number, got {raw!r}")
    try:
        val = float(raw)
    except ValueError:
        raise GraphError(f"{where}.length: not a decimal literal: {raw!r}") from None
    if not math.isfinite(val) or val <= 0:
        raise GraphError(f"{where}.length: must be positive and finite, got {raw!r}")
    return val


def graph_from_dict(data: Mapping, allow_trivial: bool = False) -> MetricGraph:
    """Parse the metric-graph JSON object and validate it."""
    if not isinstance(data, Mapping):
        raise GraphError("graph: expected a JSON object")
    if "vertices" not in data:
        raise GraphError("vertices: missing field")
    if "edges" not in data:
        raise GraphError("edges: missing field")
    verts = data["vertices"]
    if not isinstance(verts, list) or not all(isinstance(v, str) for v in verts):
        raise GraphError("vertices: expected a list of string ids")
    raw_edges = data["edges"]
    if not isinstance(raw_edges, list):
        raise GraphError("edges: expected a list")
    edges = []
    for i, item in enumerate(raw_edges):
        where = f"edges[{i}]"
        if not isinstance(item, Mapping):
            raise GraphError(f"{where}: expected an object")
        for key in ("id", "ends", "length"):
            if key not in item:
                raise GraphError(f"{where}.{key}: missing field")
        ends = item["ends"]
        if not (isinstance(ends, list) and len(ends) == 2 and all(isinstance(v, str) for v in ends)):
            raise GraphError(f"{where}.ends: expected two vertex ids")
        if not isinstance(item["id"], str):
            raise GraphError(f"{where}.id: expected a string")
        edges.append(Edge(item["id"], ends[0], ends[1], _parse_length(item["length"], where)))
    g = MetricGraph(tuple(verts), tuple(edges))
    report = validate(g, allow_trivial=allow_trivial)
    if not report.valid:
        raise GraphError("invalid graph: " + "; ".join(report.errors))
    return g


def graph_to_dict(g: MetricGraph) -> dict:
    return {
        "vertices": list(g.vertices),
        "edges": [{"id": e.id, "ends": [e.tail, e.head], "length": e.length} for e in g.edges],
    }


def load_graph(path: str | Path) -> MetricGraph:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GraphError(f"malformed JSON in {path}: {exc}") from None
    return graph_from_dict(data)
