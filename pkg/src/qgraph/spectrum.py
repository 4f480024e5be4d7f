"""Kirchhoff-Laplacian eigenvalues of finite metric graphs.

On every edge an eigenfunction at ``lambda = k**2 > 0`` has the form
``a cos(kx) + b sin(kx)``. Continuity and the Kirchhoff current condition at
the vertices give ``2E`` linear equations in the ``2E`` unknowns ``(a_e, b_e)``;
the resulting real matrix ``M(k)`` is singular exactly at the wavenumbers of
eigenvalues, and its nullity is the multiplicity.

Roots are located by scanning the smallest singular value of ``M(k)`` on a
uniform grid and refining every local minimum by golden-section search.
Determinant sign changes are not used: double roots (the circle) do not
change sign. Each grid cell is then cross-checked against an exact root
count taken from the eigenphases of the unitary bond scattering matrix, and
cells that disagree are rescanned on a finer grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import MetricGraph

__all__ = [
    "Eigenvalue",
    "EigenvalueList",
    "SpectrumError",
    "SecularSystem",
    "build_secular_matrix",
    "grid_step",
    "sigma_scan",
    "eigenvalues",
    "BondPhases",
    "counting_function",
    "weyl_fit",
    "weyl_samples",
    "WeylReport",
    "weyl_consistency_check",
]

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class SpectrumError(ValueError):
    pass


@dataclass(frozen=True)
class Eigenvalue:
    lam: float
    multiplicity: int

    @property
    def sqrt(self) -> float:
        return math.sqrt(self.lam)


@dataclass
class EigenvalueList:
    """Distinct eigenvalues in increasing order, zero first.

    ``kmax`` records the wavenumber up to which the list is complete.
    """

    values: list[Eigenvalue]
    kmax: float
    flags: list[str] = field(default_factory=list)

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([v.lam for v in self.values])

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.array([v.sqrt for v in self.values])

    @property
    def multiplicities(self) -> np.ndarray:
        return np.array([v.multiplicity for v in self.values], dtype=int)

    def expanded(self) -> np.ndarray:
        """Eigenvalues repeated according to multiplicity."""
        return np.repeat(self.lambdas, self.multiplicities)

    @property
    def total(self) -> int:
        return int(self.multiplicities.sum())


class SecularSystem:
    """Assembly rule for ``M(k)`` on a fixed graph.

    Rows: for each vertex, one continuity row per incident edge end other
    than the first (sorted by edge id), then one Kirchhoff row. Columns:
    ``(a_e, b_e)`` for each edge in id order. Derivative rows are divided
    by ``k``.
    """

    def __init__(self, g: MetricGraph):
        self.graph = g
        n = 2 * g.n_edges
        self.size = n
        self.lengths = np.array([e.length for e in g.edges])
        # terms: (row, col, kind, edge index, coefficient); kind 0 = const, 1 = cos, 2 = sin
        terms: list[tuple[int, int, int, int, float]] = []
        row = 0
        idx = g.edge_index

        def value_terms(j: int, at_head: bool, sign: float):
            if at_head:
                return [(2 * j, 1, j, sign), (2 * j + 1, 2, j, sign)]
            return [(2 * j, 0, j, sign)]

        def deriv_terms(j: int, at_head: bool):
            # derivative into the edge, divided by k
            if at_head:
                return [(2 * j, 2, j, 1.0), (2 * j + 1, 1, j, -1.0)]
            return [(2 * j + 1, 0, j, 1.0)]

        for v in g.vertices:
            ends = []
            for eid in g.incidence[v]:
                e = g.edges[idx[eid]]
                ends.append((idx[eid], e.head == v))
            ref = ends[0]
            for other in ends[1:]:
                for col, kind, j, c in value_terms(*other, 1.0) + value_terms(*ref, -1.0):
                    terms.append((row, col, kind, j, c))
                row += 1
            for end in ends:
                for col, kind, j, c in deriv_terms(*end):
                    terms.append((row, col, kind, j, c))
            row += 1
        if row != n:
            raise SpectrumError(f"secular system has {row} rows for {n} unknowns")
        t = np.array(terms, dtype=float).reshape(-1, 5)
        self._rows = t[:, 0].astype(int)
        self._cols = t[:, 1].astype(int)
        self._kind = t[:, 2].astype(int)
        self._edge = t[:, 3].astype(int)
        self._coef = t[:, 4]

    def matrices(self, ks) -> np.ndarray:
        """Stack of ``M(k)`` for an array of wavenumbers, shape ``(len(ks), 2E, 2E)``."""
        ks = np.atleast_1d(np.asarray(ks, dtype=float))
        if np.any(ks <= 0):
            raise SpectrumError("wavenumber k must be positive")
        kl = np.outer(ks, self.lengths)
        basis = np.stack([np.ones_like(kl), np.cos(kl), np.sin(kl)])  # (3, nk, E)
        vals = basis[self._kind, :, self._edge] * self._coef[:, None]  # (terms, nk)
        out = np.zeros((ks.size, self.size, self.size))
        np.add.at(out, (slice(None), self._rows, self._cols), vals.T)
        return out

    def singular_values(self, ks) -> np.ndarray:
        """Singular values in decreasing order, shape ``(len(ks), 2E)``."""
        return np.linalg.svd(self.matrices(ks), compute_uv=False)

    def sigma_min(self, ks) -> np.ndarray:
        s = self.singular_values(ks)
        return s[:, -1] / s[:, 0]

    def nullity(self, k: float, tol: float = 1e-8) -> int:
        s = self.singular_values([k])[0]
        return int(np.sum(s < tol * s[0]))


def build_secular_matrix(g: MetricGraph, k: float) -> np.ndarray:
    if not k > 0:
        raise SpectrumError("wavenumber k must be positive")
    return SecularSystem(g).matrices([k])[0]


def grid_step(g: MetricGraph) -> float:
    return math.pi / (8.0 * g.max_length * max(1, 2 * g.n_edges))


def sigma_scan(g: MetricGraph, kmax: float, step: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Relative smallest singular value ``sigma_min / sigma_max`` on a uniform grid."""
    step = step or grid_step(g)
    n = int(math.ceil(kmax / step)) + 1
    ks = step * np.arange(1, n + 1)
    return ks, SecularSystem(g).sigma_min(ks)


def _golden_batch(fn, lo: np.ndarray, hi: np.ndarray, xtol: float) -> np.ndarray:
    """Vectorised golden-section minimisation over independent brackets."""
    lo, hi = lo.copy(), hi.copy()
    width = float(np.max(hi - lo)) if lo.size else 0.0
    iters = int(math.ceil(math.log(max(width, xtol) / xtol) / -math.log(_INVPHI))) + 1
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        left = fc < fd
        # left: minimum in [lo, d]; right: minimum in [c, hi]
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
        new_c = np.where(left, hi - _INVPHI * (hi - lo), d)
        new_d = np.where(left, c, lo + _INVPHI * (hi - lo))
        # one fresh evaluation per bracket; the other point is reused
        f_new = fn(np.where(left, new_c, new_d))
        fc, fd = np.where(left, f_new, fd), np.where(left, fc, f_new)
        c, d = new_c, new_d
    return 0.5 * (lo + hi)


class BondPhases:
    """Exact root counting from the unitary bond scattering matrix.

    ``U(k) = S exp(ikL)`` has eigenvalue 1 exactly when ``k**2`` is an
    eigenvalue, with the same multiplicity for ``k > 0``. Its eigenphases
    increase in ``k`` at rates between the shortest and the longest edge, and
    ``det U(k)`` turns at the constant rate ``2 vol``. Summing principal
    phases at the two ends of a short interval therefore counts the roots
    inside it without locating them.
    """

    def __init__(self, g: MetricGraph):
        from .orbits import BondGraph

        bg = BondGraph(g)
        self.S = np.nan_to_num(bg.factors).T
        self.lengths = bg.lengths
        self.volume = g.volume
        self.max_step = math.pi / g.max_length

    def phase_sums(self, ks) -> np.ndarray:
        ks = np.atleast_1d(np.asarray(ks, dtype=float))
        U = self.S[None, :, :] * np.exp(1j * np.outer(ks, self.lengths))[:, None, :]
        theta = np.mod(np.angle(np.linalg.eigvals(U)), 2.0 * math.pi)
        return theta.sum(axis=1)

    def crossings(self, ks) -> np.ndarray:
        """Number of roots in each interval ``(ks[i], ks[i + 1]]``."""
        ks = np.asarray(ks, dtype=float)
        if np.any(np.diff(ks) >= self.max_step):
            raise SpectrumError("phase counting needs steps below pi / max length")
        sums = self.phase_sums(ks)
        raw = (2.0 * self.volume * np.diff(ks) + sums[:-1] - sums[1:]) / (2.0 * math.pi)
        return np.rint(raw).astype(int)


def _local_roots(system: SecularSystem, ks: np.ndarray, tol: float, kmin: float) -> list[tuple[float, int]]:
    sig = system.sigma_min(ks)
    interior = np.arange(1, ks.size - 1)
    is_min = (sig[interior] <= sig[interior - 1]) & (sig[interior] <= sig[interior + 1])
    centers = interior[is_min]
    if not centers.size:
        return []
    roots = _golden_batch(system.sigma_min, ks[centers - 1], ks[centers + 1], xtol=1e-13)
    svals = system.singular_values(roots)
    rel = svals / svals[:, :1]
    accepted = (rel[:, -1] < tol) & (roots >= kmin)
    found: list[tuple[float, int]] = []
    for k, r in zip(roots[accepted], rel[accepted]):
        mult = int(np.sum(r < tol))
        if found and abs(k - found[-1][0]) < 1e-9:
            if mult > found[-1][1]:
                found[-1] = (found[-1][0], mult)
            continue
        found.append((float(k), mult))
    return found


def _find_roots(system, phases, a, b, step, tol, kmin, depth, unresolved):
    """Roots in ``(a, b]``; cells whose phase count disagrees are rescanned finer."""
    n = max(2, int(math.ceil((b - a) / step)))
    ks = np.linspace(a, b, n + 1)
    h = ks[1] - ks[0]
    padded = np.concatenate([[a - h] if a - h > 0 else [], ks, [b + h, b + 2 * h]])
    found = [(k, m) for k, m in _local_roots(system, padded, tol, kmin) if a < k <= b + h]
    roots = [(k, m) for k, m in found if k <= b]
    if phases is None:
        return roots
    # one probe cell past b, so a root sitting on b pairs like an interior one
    ext = np.append(ks, b + h)
    expected = phases.crossings(ext)
    rk = np.array([k for k, _ in found])
    rm = np.array([m for _, m in found], dtype=int)
    cell = np.clip(np.searchsorted(ext, rk, side="left") - 1, 0, n) if rk.size else np.array([], dtype=int)
    got = np.bincount(cell, weights=rm, minlength=n + 1).astype(int) if rk.size else np.zeros(n + 1, dtype=int)
    bad = expected != got
    # a root sitting on a grid point may be counted in either neighbouring cell
    for j in np.flatnonzero(bad):
        if j + 1 <= n and bad[j + 1] and expected[j] + expected[j + 1] == got[j] + got[j + 1]:
            bad[j] = bad[j + 1] = False
    bad = bad[:n]
    cell = cell[: len(roots)]
    if not bad.any():
        return roots
    if depth >= 4:
        unresolved.append((float(ks[np.argmax(bad)]), int(expected[bad].sum() - got[bad].sum())))
        return roots
    keep = [(k, m) for (k, m), c in zip(roots, cell) if not bad[c]]
    j = 0
    while j < n:
        if not bad[j]:
            j += 1
            continue
        j2 = j
        while j2 + 1 < n and bad[j2 + 1]:
            j2 += 1
        keep.extend(_find_roots(system, phases, ks[j], ks[j2 + 1], h / 8.0, tol, kmin, depth + 1, unresolved))
        j = j2 + 1
    return sorted(keep)


def eigenvalues(
    g: MetricGraph,
    kmax: float,
    tol: float = 1e-8,
    step: float | None = None,
    check: bool = True,
    verify: bool = True,
) -> EigenvalueList:
    """All eigenvalues ``lambda = k**2`` with ``0 < k <= kmax``, plus ``lambda = 0``.

    Multiplicity is the number of singular values of ``M(k)`` below
    ``tol * sigma_max`` at the refined root. With ``verify`` each grid cell
    is checked against the exact phase count of :class:`BondPhases` and
    rescanned on a finer grid when they disagree. With ``check`` the result
    is passed through :func:`weyl_consistency_check`; all flags are copied
    onto the returned list.
    """
    if not kmax > 0:
        raise SpectrumError("kmax must be positive")
    if not 0 < tol <= 1e-4:
        raise SpectrumError("tol must lie in (0, 1e-4]")
    system = SecularSystem(g)
    step = step or grid_step(g)
    # no nonzero eigenvalue lies below pi/vol; the k -> 0 end of the
    # scan only sees the constant function
    kmin = 0.5 * math.pi / g.volume
    start = min(step, 0.5 * kmin)
    phases = BondPhases(g) if verify else None
    unresolved: list[tuple[float, int]] = []
    roots = _find_roots(system, phases, start, kmax, step, tol, kmin, 0, unresolved)
    values = [Eigenvalue(0.0, 1)] + [Eigenvalue(k * k, m) for k, m in roots]
    ev = EigenvalueList(values, kmax)
    for k, missing in unresolved:
        ev.flags.append(f"grid-resolution: {missing:+d} roots unresolved near k = {k:.6g}")
    if check:
        report = weyl_consistency_check(ev, g)
        ev.flags.extend(report.flags)
    return ev


def counting_function(ev: EigenvalueList, t: float) -> int:
    """Number of eigenvalues, with multiplicity, whose square root is ``<= t``."""
    if t > ev.kmax:
        raise SpectrumError(f"t = {t} exceeds the computed range kmax = {ev.kmax}")
    if t < 0:
        return 0
    k = ev.wavenumbers
    return int(ev.multiplicities[k <= t].sum())


def _counting_on(ev: EigenvalueList, ts: np.ndarray) -> np.ndarray:
    k = ev.wavenumbers
    cum = np.cumsum(ev.multiplicities)
    idx = np.searchsorted(k, ts, side="right")
    return np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0)


def weyl_samples(ev: EigenvalueList, g: MetricGraph, n: int = 512) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(t, N(t), vol t / pi)`` on a uniform grid over ``[0, kmax]``."""
    ts = np.linspace(0.0, ev.kmax, n)
    return ts, _counting_on(ev, ts), g.volume / math.pi * ts


def weyl_fit(ev: EigenvalueList, g: MetricGraph, n_samples: int = 4096) -> tuple[float, float]:
    """Least-squares slope of ``N(t)`` against ``t`` and its relative error to ``vol/pi``."""
    if ev.total < 50:
        raise SpectrumError(f"weyl_fit needs at least 50 eigenvalues, got {ev.total}")
    ts = np.linspace(0.0, ev.kmax, n_samples)
    slope, _ = np.polyfit(ts, _counting_on(ev, ts).astype(float), 1)
    target = g.volume / math.pi
    return float(slope), abs(slope - target) / target


@dataclass
class WeylReport:
    ok: bool
    flags: list[str]
    max_deviation: float
    mean_remainder: float | None
    bound: float


def weyl_consistency_check(
    ev: EigenvalueList,
    g: MetricGraph,
    bound: float | None = None,
    drift_bound: float = 0.5,
    n_samples: int = 4096,
) -> WeylReport:
    """Flag windows where the counting function leaves its Weyl envelope.

    Two detectors run. The pointwise one flags ``|N(t) - vol t / pi| > bound``
    (default ``2 + 2 #V``). The drift detector averages the remainder
    ``N(t) - vol t / pi - (1 - betti) / 2`` over the upper half of the
    window; its mean is zero for a complete spectrum, so a lost or spurious
    eigenvalue shifts it by about one. The drift test is skipped when the
    window is shorter than ten periods of the slowest orbit oscillation.
    """
    bound = 2.0 + 2.0 * g.n_vertices if bound is None else bound
    flags: list[str] = []
    if ev.total <= 1 or ev.kmax <= 0:
        return WeylReport(False, ["insufficient-data"], math.nan, None, bound)
    ts = np.linspace(0.0, ev.kmax, n_samples)
    rem = _counting_on(ev, ts) - g.volume / math.pi * ts
    dev = np.abs(rem)
    bad = ts[dev > bound]
    if bad.size:
        flags.append(f"count-mismatch: |N - vol t/pi| > {bound:g} from t = {bad[0]:.6g}")
    mean_rem = None
    period = math.pi / g.min_length
    if ev.kmax >= 20 * period:
        upper = ts >= 0.5 * ev.kmax
        mean_rem = float(np.mean(rem[upper] - (1 - g.betti) / 2.0))
        if abs(mean_rem) > drift_bound:
            flags.append(f"count-drift: mean remainder {mean_rem:+.3f} over t in [{0.5 * ev.kmax:.6g}, {ev.kmax:.6g}]")
    return WeylReport(not flags, flags, float(dev.max()), mean_rem, bound)
