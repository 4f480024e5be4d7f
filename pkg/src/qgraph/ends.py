"""Infinite metric graphs given as a finite core with rays and regular trees attached.

Edge lengths along a gadget follow a :class:`SequenceLaw`. A ray attached at
``v`` has vertices ``v = v_0 ~ v_1 ~ ...`` and its ``n``-th edge (``n >= 0``)
has length ``law(n)``. A regular tree with branching ``b`` gives the attach
vertex ``b`` children and every later vertex ``b`` children, so level
``n >= 1`` consists of ``b**n`` edges of length ``law(n - 1)``.

Within this family all series questions (end volumes, ray lengths, star
lengths) reduce to closed-form convergence tests on the laws, so every
verdict below is exact rather than numerical.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Union

import numpy as np

from .graph import GraphError, MetricGraph, graph_from_dict

__all__ = [
    "SequenceLaw",
    "Constant",
    "Geometric",
    "Power",
    "Prefixed",
    "Ray",
    "RegularTree",
    "EndedGraph",
    "Verdict",
    "GadgetReport",
    "ClassificationReport",
    "count_ends",
    "end_volume",
    "markovian_uniqueness",
    "self_adjointness",
    "total_volume",
    "classify",
    "law_from_dict",
    "ended_graph_from_dict",
    "load_ended_graph",
    "power_sum",
]

INFINITE = "infinite"


def power_sum(s: float, n_terms: int = 10000) -> float:
    """``sum_{j >= 1} j**(-s)`` for ``s > 1``: direct sum plus an Euler-Maclaurin tail."""
    if not s > 1:
        raise ValueError("power series diverges for s <= 1")
    N = n_terms
    j = np.arange(1, N, dtype=float)
    head = math.fsum(j ** (-s))
    tail = (N ** (1 - s) / (s - 1) + 0.5 * N ** (-s) + s * N ** (-s - 1) / 12.0
            - s * (s + 1) * (s + 2) * N ** (-s - 3) / 720.0)
    return head + tail


class SequenceLaw:
    """Positive length sequence ``l_0, l_1, ...`` with decidable summability."""

    def __call__(self, n: int) -> float:
        raise NotImplementedError

    def lengths(self, count: int) -> np.ndarray:
        return np.array([self(n) for n in range(count)])

    def infimum(self) -> float:
        raise NotImplementedError

    def converges(self) -> bool:
        """Whether ``sum_n l_n`` is finite."""
        raise NotImplementedError

    def total(self) -> float:
        """``sum_n l_n`` (``inf`` when divergent)."""
        raise NotImplementedError

    def weighted_converges(self, b: int) -> bool:
        """Whether ``sum_n b**(n+1) l_n`` is finite."""
        raise NotImplementedError

    def weighted_total(self, b: int) -> float:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


def _positive(x, what: str) -> float:
    x = float(x)
    if not (math.isfinite(x) and x > 0):
        raise GraphError(f"{what} must be positive and finite, got {x!r}")
    return x


@dataclass(frozen=True)
class Constant(SequenceLaw):
    a: float

    def __post_init__(self):
        _positive(self.a, "constant law a")

    def __call__(self, n):
        return self.a

    def infimum(self):
        return self.a

    def converges(self):
        return False

    def total(self):
        return math.inf

    def weighted_converges(self, b):
        return False

    def weighted_total(self, b):
        return math.inf

    def to_dict(self):
        return {"kind": "constant", "a": self.a}


@dataclass(frozen=True)
class Geometric(SequenceLaw):
    """``l_n = a q**n``."""

    a: float
    q: float

    def __post_init__(self):
        _positive(self.a, "geometric law a")
        _positive(self.q, "geometric law q")

    def __call__(self, n):
        return self.a * self.q**n

    def infimum(self):
        return self.a if self.q >= 1 else 0.0

    def converges(self):
        return self.q < 1

    def total(self):
        return self.a / (1.0 - self.q) if self.q < 1 else math.inf

    def weighted_converges(self, b):
        return b * self.q < 1

    def weighted_total(self, b):
        return self.a * b / (1.0 - b * self.q) if b * self.q < 1 else math.inf

    def to_dict(self):
        return {"kind": "geometric", "a": self.a, "q": self.q}


@dataclass(frozen=True)
class Power(SequenceLaw):
    """``l_n = a (n+1)**(-s)``."""

    a: float
    s: float

    def __post_init__(self):
        _positive(self.a, "power law a")
        _positive(self.s, "power law s")

    def __call__(self, n):
        return self.a * (n + 1) ** (-self.s)

    def infimum(self):
        return 0.0

    def converges(self):
        return self.s > 1

    def total(self):
        return self.a * power_sum(self.s) if self.s > 1 else math.inf

    def weighted_converges(self, b):
        # b**n outgrows any power
        return False

    def weighted_total(self, b):
        return math.inf

    def to_dict(self):
        return {"kind": "power", "a": self.a, "s": self.s}


@dataclass(frozen=True)
class Prefixed(SequenceLaw):
    """Explicit leading lengths followed by another law (re-indexed from 0)."""

    prefix: tuple[float, ...]
    tail: SequenceLaw

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(_positive(x, "prefix length") for x in self.prefix))

    def __call__(self, n):
        p = len(self.prefix)
        return self.prefix[n] if n < p else self.tail(n - p)

    def infimum(self):
        return min((*self.prefix, self.tail.infimum()))

    def converges(self):
        return self.tail.converges()

    def total(self):
        t = self.tail.total()
        return math.fsum(self.prefix) + t if math.isfinite(t) else math.inf

    def weighted_converges(self, b):
        return self.tail.weighted_converges(b)

    def weighted_total(self, b):
        t = self.tail.weighted_total(b)
        if not math.isfinite(t):
            return math.inf
        p = len(self.prefix)
        return math.fsum(b ** (n + 1) * x for n, x in enumerate(self.prefix)) + b**p * t

    def to_dict(self):
        return {"kind": "prefix", "prefix": list(self.prefix), "tail": self.tail.to_dict()}


@dataclass(frozen=True)
class Ray:
    attach: str
    law: SequenceLaw

    kind = "ray"


@dataclass(frozen=True)
class RegularTree:
    attach: str
    branching: int
    law: SequenceLaw

    kind = "tree"

    def __post_init__(self):
        if int(self.branching) != self.branching or self.branching < 2:
            raise GraphError(f"tree branching must be an integer >= 2, got {self.branching!r}")


Gadget = Union[Ray, RegularTree]


@dataclass
class EndedGraph:
    core: MetricGraph
    gadgets: list[Gadget] = field(default_factory=list)

    def __post_init__(self):
        for gd in self.gadgets:
            if gd.attach not in self.core.vertex_index:
                raise GraphError(f"gadget attach vertex {gd.attach!r} not in the core")


def _fmt(x: float):
    return INFINITE if math.isinf(x) else x


def count_ends(d: EndedGraph):
    """Rays contribute one end each; a regular tree contributes infinitely many."""
    if any(isinstance(gd, RegularTree) for gd in d.gadgets):
        return INFINITE
    return sum(1 for gd in d.gadgets if isinstance(gd, Ray))


def end_volume(gd: Gadget):
    """Volume of the gadget, which decides the volume of each of its ends.

    Every neighbourhood of an end of the gadget differs from a tail of the
    same series by finitely many terms, so all neighbourhoods share the
    verdict. The finite value reported is the volume of the whole gadget.
    """
    if isinstance(gd, Ray):
        return _fmt(gd.law.total())
    return _fmt(gd.law.weighted_total(gd.branching))


def _gadget_volume(gd: Gadget) -> float:
    v = end_volume(gd)
    return math.inf if v == INFINITE else v


def total_volume(d: EndedGraph):
    return _fmt(math.fsum([d.core.volume] + [_gadget_volume(gd) for gd in d.gadgets])
                if all(math.isfinite(_gadget_volume(gd)) for gd in d.gadgets) else math.inf)


def markovian_uniqueness(d: EndedGraph) -> tuple[bool, list[dict]]:
    """True iff every end has infinite volume; evidence per gadget."""
    evidence = []
    for gd in d.gadgets:
        vol = end_volume(gd)
        evidence.append({"attach": gd.attach, "type": gd.kind, "end_volume": vol,
                         "infinite_volume": vol == INFINITE})
    return all(e["infinite_volume"] for e in evidence), evidence


def _escape_length_diverges(gd: Gadget) -> bool:
    # every escape path runs through one edge per level
    return not gd.law.converges()


def _star_escape_diverges(gd: Gadget) -> bool:
    # star length of the level-n edge is m(v_n) + m(v_{n+1}) with
    # m(v_n) = l_{n-1} + b l_n (b = 1 on a ray); the terms are bounded
    # above and below by fixed multiples of l_{n-1} + l_n + l_{n+1}, so the
    # series diverges exactly when sum l_n does
    return not gd.law.converges()


def star_lengths_along(gd: Gadget, count: int) -> np.ndarray:
    """Star-metric lengths of the first ``count`` level edges past the attach vertex."""
    b = gd.branching if isinstance(gd, RegularTree) else 1
    ell = gd.law.lengths(count + 2)
    m = ell[:-1] + b * ell[1:]  # m(v_n) for n = 1 .. count + 1
    return m[:-1] + m[1:]


@dataclass
class Verdict:
    verdict: str  # "yes" | "no" | "inconclusive"
    criterion: str | None = None
    reason: str | None = None

    def to_dict(self):
        out = {"verdict": self.verdict}
        if self.criterion:
            out["criterion"] = self.criterion
        if self.reason:
            out["reason"] = self.reason
        return out


def self_adjointness(d: EndedGraph) -> Verdict:
    """First sufficient criterion that applies, else ``no`` when Markovian
    uniqueness fails, else ``inconclusive``."""
    if not d.gadgets:
        return Verdict("yes", "i", "finite graph")
    core_inf = d.core.min_length if d.core.edges else math.inf
    inf_len = min([core_inf] + [gd.law.infimum() for gd in d.gadgets])
    if inf_len > 0:
        return Verdict("yes", "ii", f"edge lengths bounded below by {inf_len:.12g}")
    if all(_escape_length_diverges(gd) for gd in d.gadgets):
        return Verdict("yes", "iii", "complete in the path metric: every escape path has infinite length")
    if all(_star_escape_diverges(gd) for gd in d.gadgets):
        return Verdict("yes", "iv", "complete in the star metric")
    mu, _ = markovian_uniqueness(d)
    if not mu:
        return Verdict("no", reason="Markovian uniqueness fails (an end has finite volume)")
    return Verdict("inconclusive", reason="no sufficient criterion applies; none of them is necessary")


@dataclass
class GadgetReport:
    type: str
    attach: str
    ends: object
    end_volume: object
    escape_length: object
    infimum_length: float
    branching: int | None = None

    def to_dict(self):
        out = {
            "type": self.type,
            "attach": self.attach,
            "ends": self.ends,
            "end_volume": self.end_volume,
            "escape_length": self.escape_length,
            "infimum_length": self.infimum_length,
        }
        if self.branching is not None:
            out["branching"] = self.branching
        return out


@dataclass
class ClassificationReport:
    end_count: object
    gadgets: list[GadgetReport]
    markovian_unique: bool
    self_adjoint: Verdict
    total_volume: object
    notes: list[str]

    def to_dict(self):
        return {
            "end_count": self.end_count,
            "gadgets": [g.to_dict() for g in self.gadgets],
            "markovian_unique": self.markovian_unique,
            "self_adjoint": self.self_adjoint.to_dict(),
            "total_volume": self.total_volume,
            "notes": self.notes,
        }


_NOTES = [
    "tree gadgets: the attach vertex and every later vertex have `branching` children; level n has branching**n edges of length law(n-1)",
    "end volume of a tree gadget is decided by sum branching**(n+1) law(n); the finite value reported is the volume of the whole gadget",
    "path- and star-metric completeness are decided per gadget along the level sequence, which every escape route to an end traverses; valid for ray/tree gadgets only",
]


def classify(d: EndedGraph) -> ClassificationReport:
    mu, _ = markovian_uniqueness(d)
    sa = self_adjointness(d)
    if sa.verdict == "yes" and not mu:
        raise AssertionError("rule tables inconsistent: self-adjoint without Markovian uniqueness")
    gadgets = []
    for gd in d.gadgets:
        gadgets.append(GadgetReport(
            type=gd.kind,
            attach=gd.attach,
            ends=1 if isinstance(gd, Ray) else INFINITE,
            end_volume=end_volume(gd),
            escape_length=_fmt(gd.law.total()),
            infimum_length=gd.law.infimum(),
            branching=gd.branching if isinstance(gd, RegularTree) else None,
        ))
    return ClassificationReport(
        end_count=count_ends(d),
        gadgets=gadgets,
        markovian_unique=mu,
        self_adjoint=sa,
        total_volume=total_volume(d),
        notes=list(_NOTES),
    )


# ---------------------------------------------------------------- JSON io

def law_from_dict(data: Mapping, where: str = "law") -> SequenceLaw:
    if not isinstance(data, Mapping):
        raise GraphError(f"{where}: expected an object")
    kind = data.get("kind")

    def num(key):
        if key not in data:
            raise GraphError(f"{where}.{key}: missing field")
        val = data[key]
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise GraphError(f"{where}.{key}: expected a number")
        return _positive(val, f"{where}.{key}")
    if kind == "constant":
        return Constant(num("a"))
    if kind == "geometric":
        return Geometric(num("a"), num("q"))
    if kind == "power":
        return Power(num("a"), num("s"))
    if kind == "prefix":
        prefix = data.get("prefix")
        if not isinstance(prefix, list):
            raise GraphError(f"{where}.prefix: expected a list of lengths")
        for i, x in enumerate(prefix):
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise GraphError(f"{where}.prefix[{i}]: expected a number")
            _positive(x, f"{where}.prefix[{i}]")
        return Prefixed(tuple(prefix), law_from_dict(data.get("tail"), f"{where}.tail"))
    raise GraphError(f"{where}.kind: unknown law kind {kind!r}")


def ended_graph_from_dict(data: Mapping) -> EndedGraph:
    core = graph_from_dict(data, allow_trivial=True)
    raw = data.get("gadgets", [])
    if not isinstance(raw, list):
        raise GraphError("gadgets: expected a list")
    gadgets: list[Gadget] = []
    for i, item in enumerate(raw):
        where = f"gadgets[{i}]"
        if not isinstance(item, Mapping):
            raise GraphError(f"{where}: expected an object")
        attach = item.get("attach")
        if not isinstance(attach, str):
            raise GraphError(f"{where}.attach: expected a vertex id")
        if attach not in core.vertex_index:
            raise GraphError(f"{where}.attach: unknown vertex {attach!r}")
        law = law_from_dict(item.get("law"), f"{where}.law")
        kind = item.get("type")
        if kind == "ray":
            gadgets.append(Ray(attach, law))
        elif kind == "tree":
            b = item.get("branching")
            if isinstance(b, bool) or not isinstance(b, int) or b < 2:
                raise GraphError(f"{where}.branching: expected an integer >= 2")
            gadgets.append(RegularTree(attach, b, law))
        else:
            raise GraphError(f"{where}.type: expected 'ray' or 'tree', got {kind!r}")
    return EndedGraph(core, gadgets)


def load_ended_graph(path: str | Path) -> EndedGraph:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GraphError(f"malformed JSON in {path}: {exc}") from None
    return ended_graph_from_dict(data)
