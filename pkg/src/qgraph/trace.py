"""Both sides of the periodic-orbit trace formula, paired with Gaussians.

Spectral side::

    (betti + 1) F(0) + sum_k F(sqrt(lambda_k)) + F(-sqrt(lambda_k))

Orbit side::

    2 vol f(0) + sum_p s(p) l(prim p) (f(l(p)) + f(-l(p)))

with ``F(xi) = integral exp(-i xi x) f(x) dx``. Both sides only see the even
part of ``f``, so a shifted Gaussian is paired through ``Re F`` and the two
sides stay real.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from .graph import Edge, MetricGraph
from .orbits import BondGraph, PeriodicOrbit, enumerate_orbits
from .spectrum import EigenvalueList, eigenvalues

__all__ = [
    "GaussianTest",
    "SpectralMeasure",
    "TailBoundError",
    "spectral_measure",
    "lhs",
    "rhs",
    "rhs_tail_bound",
    "trace_check",
    "TraceReport",
    "cycle_graph",
    "poisson_demo",
    "recover_orbit_lengths",
    "PeakScan",
]

_SQRT2PI = math.sqrt(2.0 * math.pi)


class TailBoundError(RuntimeError):
    pass


@dataclass(frozen=True)
class GaussianTest:
    """``f(x) = exp(-(x - center)**2 / (2 width**2))``."""

    width: float
    center: float = 0.0

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("Gaussian width must be positive")

    def __call__(self, x):
        return np.exp(-((np.asarray(x, dtype=float) - self.center) ** 2) / (2.0 * self.width**2))

    def fourier(self, xi):
        xi = np.asarray(xi, dtype=float)
        return self.width * _SQRT2PI * np.exp(-0.5 * (self.width * xi) ** 2) * np.exp(-1j * xi * self.center)

    def fourier_even(self, xi):
        """Real part of the transform: the transform of the even part of ``f``."""
        xi = np.asarray(xi, dtype=float)
        return self.width * _SQRT2PI * np.exp(-0.5 * (self.width * xi) ** 2) * np.cos(xi * self.center)

    def sup_beyond(self, t: float) -> float:
        """``sup |f(x)|`` over ``|x| >= t``."""
        c = abs(self.center)
        if t <= c:
            return 1.0
        return math.exp(-((t - c) ** 2) / (2.0 * self.width**2))


@dataclass
class SpectralMeasure:
    """Atoms of the wave-spectrum counting measure, symmetric about zero."""

    positions: np.ndarray
    masses: np.ndarray
    kmax: float
    volume: float
    betti: int

    def __post_init__(self):
        zero = self.masses[self.positions == 0.0]
        assert zero.size == 1 and zero[0] == self.betti + 1
        order = np.argsort(self.positions)
        assert np.array_equal(self.positions[order], -self.positions[order][::-1])
        assert np.array_equal(self.masses[order], self.masses[order][::-1])
        assert np.all(self.masses > 0)


def spectral_measure(ev: EigenvalueList, g: MetricGraph) -> SpectralMeasure:
    k = ev.wavenumbers[1:]
    m = ev.multiplicities[1:].astype(float)
    positions = np.concatenate([-k[::-1], [0.0], k])
    masses = np.concatenate([m[::-1], [g.betti + 1.0], m])
    return SpectralMeasure(positions, masses, ev.kmax, g.volume, g.betti)


def lhs(mu: SpectralMeasure, f: GaussianTest, tol: float | None = None,
        safety: float = 2.0) -> tuple[float, float]:
    """Spectral side and a bound on the atoms beyond ``kmax``.

    The tail uses the Weyl density ``vol/pi`` for the missing eigenvalues.
    """
    value = math.fsum(mu.masses * f.fourier_even(mu.positions))
    # integral_K^inf of |F(xi)| + |F(-xi)| for the Gaussian modulus
    integral = 2.0 * f.width * _SQRT2PI * math.sqrt(math.pi / 2.0) / f.width * erfc(f.width * mu.kmax / math.sqrt(2.0))
    tail = safety * mu.volume / math.pi * integral
    if tol is not None and tail > tol:
        raise TailBoundError(f"spectral tail bound {tail:.3g} exceeds {tol:g}: increase kmax")
    return value, tail


def rhs_tail_bound(g: MetricGraph, f: GaussianTest, lmax: float, n_terms: int = 100000) -> float:
    """Bound on the orbit terms with length ``> lmax``.

    An orbit with ``N`` bonds has ``|s(p)| l(prim p) <= N max_l``, length at
    least ``max(lmax, N min_l)``, and the orbits with ``N`` bonds carry total
    ``|s|`` at most ``trace(|S|^N) <= 2E rho^N`` with ``rho`` the largest row
    sum of the bond transition factors.
    """
    bg = BondGraph(g)
    absf = np.nan_to_num(np.abs(bg.factors))
    rho = float(absf.sum(axis=1).max())
    nb = len(bg.bonds)
    lmin, lmx = g.min_length, g.max_length
    n0 = int(math.floor(lmax / lmx)) + 1
    total = 0.0
    for n in range(n0, n0 + n_terms):
        t = max(lmax, n * lmin)
        sup = f.sup_beyond(t)
        if sup == 0.0:
            break
        log_term = math.log(nb) + n * math.log(max(rho, 1e-300)) + math.log(n * lmx) + math.log(2.0 * sup)
        term = math.exp(log_term) if log_term > -745 else 0.0
        total += term
        # past the Gaussian centre the terms decay superexponentially
        if n * lmin > abs(f.center) + 1 and term < 1e-30 * max(total, 1e-300):
            break
    else:
        return math.inf
    return total


def rhs(g: MetricGraph, orbits: list[PeriodicOrbit], f: GaussianTest, lmax: float,
        tol: float | None = None) -> tuple[float, float]:
    """Orbit side from orbits complete up to ``lmax``."""
    terms = [2.0 * g.volume * float(f(0.0))]
    for p in orbits:
        if p.length > lmax or p.scattering == 0.0:
            continue
        terms.append(p.amplitude * float(f(p.length) + f(-p.length)))
    tail = rhs_tail_bound(g, f, lmax)
    if tol is not None and tail > tol:
        raise TailBoundError(f"orbit tail bound {tail:.3g} exceeds {tol:g}: increase lmax")
    return math.fsum(terms), tail


@dataclass
class TraceReport:
    lhs: float
    rhs: float
    diff: float
    lhs_tail: float
    rhs_tail: float
    tol: float
    passed: bool
    n_eigenvalues: int
    n_orbits: int
    kmax: float
    lmax: float

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "diff": self.diff,
            "lhs_tail": self.lhs_tail,
            "rhs_tail": self.rhs_tail,
            "tol": self.tol,
            "pass": self.passed,
            "n_eigenvalues": self.n_eigenvalues,
            "n_orbits": self.n_orbits,
            "kmax": self.kmax,
            "lmax": self.lmax,
        }


def trace_check(g: MetricGraph, f: GaussianTest, kmax: float, lmax: float, tol: float = 1e-6,
                ev: EigenvalueList | None = None) -> TraceReport:
    """Compare both sides; pass iff ``|lhs - rhs| <= tol + lhs_tail + rhs_tail``."""
    ev = ev if ev is not None else eigenvalues(g, kmax)
    mu = spectral_measure(ev, g)
    left, left_tail = lhs(mu, f, tol=tol)
    orbits = enumerate_orbits(g, lmax, skip_zero=True)
    right, right_tail = rhs(g, orbits, f, lmax, tol=tol)
    diff = abs(left - right)
    return TraceReport(
        lhs=left, rhs=right, diff=diff, lhs_tail=left_tail, rhs_tail=right_tail, tol=tol,
        passed=diff <= tol + left_tail + right_tail,
        n_eigenvalues=ev.total, n_orbits=len(orbits), kmax=ev.kmax, lmax=lmax,
    )


def cycle_graph(n: int, total_length: float = 1.0) -> MetricGraph:
    if n < 3:
        raise ValueError("a simple cycle needs at least 3 vertices")
    vs = [f"v{i}" for i in range(n)]
    return MetricGraph(tuple(vs), tuple(
        Edge(f"e{i}", vs[i], vs[(i + 1) % n], total_length / n) for i in range(n)
    ))


def poisson_demo(n: int, f: GaussianTest, kmax: float = 40.0, lmax: float = 8.0,
                 tol: float = 1e-6, poisson_tol: float = 1e-10) -> dict:
    """Trace check on the unit circle as an n-cycle, plus the direct summation
    identity ``sum_k F(2 pi k) = sum_k f(k)``."""
    g = cycle_graph(n)
    report = trace_check(g, f, kmax, lmax, tol)
    # truncate where the Gaussian terms are below 1e-18
    reach = math.sqrt(2.0 * 41.5)
    kf = int(math.ceil(abs(f.center) + reach * f.width)) + 1
    kF = int(math.ceil(reach / (2.0 * math.pi * f.width))) + 1
    spectral_sum = math.fsum(f.fourier_even(2.0 * math.pi * np.arange(-kF, kF + 1)))
    lattice_sum = math.fsum(f(np.arange(-kf, kf + 1)))
    pdiff = abs(spectral_sum - lattice_sum)
    return {
        "n": n,
        "sigma": f.width,
        "center": f.center,
        "fourier_sum": spectral_sum,
        "lattice_sum": lattice_sum,
        "poisson_diff": pdiff,
        "poisson_pass": pdiff <= poisson_tol,
        "fhat0": float(f.fourier_even(0.0)),
        "trace": report.to_dict(),
        "pass": bool(pdiff <= poisson_tol and report.passed),
    }


@dataclass
class PeakScan:
    t: np.ndarray
    values: np.ndarray
    peaks: list[float]
    heights: list[float]
    noise_floor: float
    window: float
    resolution: float = field(default=0.0)


def recover_orbit_lengths(mu: SpectralMeasure, window: float | None = None, t_max: float = 5.0,
                          noise_factor: float = 3.0) -> PeakScan:
    """Locate orbit lengths as peaks of the Gaussian-smoothed transform of the
    spectral measure, ``F(t) = sum mass exp(-(window x)**2 / 2) cos(x t)``.

    ``window`` is the peak width in ``t``; it must exceed ``5 / kmax`` so the
    cut-off at ``kmax`` is invisible. Peaks below ``noise_factor`` times the
    median of ``|F|`` are dropped.
    """
    resolution = 1.0 / mu.kmax
    window = 6.0 / mu.kmax if window is None else window
    if window * mu.kmax < 5.0:
        raise ValueError(f"window {window:g} too narrow for spectrum up to kmax = {mu.kmax:g}; "
                         f"resolution bound is about {resolution:.3g}, need window >= {5.0 / mu.kmax:.3g}")
    step = min(window, 0.01)
    ts = np.arange(0.0, t_max + step / 2, step)
    weights = mu.masses * np.exp(-0.5 * (window * mu.positions) ** 2)
    values = np.cos(np.outer(ts, mu.positions)) @ weights
    mag = np.abs(values)
    floor = noise_factor * float(np.median(mag))
    peaks, heights = [], []
    for i in range(1, ts.size - 1):
        if mag[i] >= mag[i - 1] and mag[i] > mag[i + 1] and mag[i] > floor:
            y0, y1, y2 = mag[i - 1], mag[i], mag[i + 1]
            denom = y0 - 2.0 * y1 + y2
            shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
            peaks.append(float(ts[i] + shift * step))
            heights.append(float(values[i]))
    return PeakScan(ts, values, peaks, heights, floor, window, resolution)
