import math

import numpy as np
import pytest
from scipy.integrate import quad

from qgraph.graph import scaled, subdivide
from qgraph.orbits import enumerate_orbits
from qgraph.spectrum import Eigenvalue, EigenvalueList, eigenvalues
from qgraph.trace import (GaussianTest, SpectralMeasure, TailBoundError, cycle_graph, lhs, poisson_demo,
                          recover_orbit_lengths, rhs, rhs_tail_bound, spectral_measure, trace_check)

from conftest import bundled, graph

FAMILY = [(0.15, 0.0), (0.2, 2.0), (0.25, 3.0)]


@pytest.mark.parametrize("width, center", [(0.3, 0.0), (0.2, 1.5), (1.0, -0.7)])
def test_gaussian_fourier_against_quadrature(width, center):
    f = GaussianTest(width, center)
    for xi in (0.0, 0.7, 3.0, 10.0):
        re = quad(lambda x: math.cos(xi * x) * float(f(x)), -40, 40, points=[center], limit=400)[0]
        im = quad(lambda x: -math.sin(xi * x) * float(f(x)), -40, 40, points=[center], limit=400)[0]
        assert complex(f.fourier(xi)) == pytest.approx(complex(re, im), abs=1e-10)
        # the even part of f transforms to Re F
        ev = quad(lambda x: math.cos(xi * x) * 0.5 * float(f(x) + f(-x)), -40, 40, points=[center, -center], limit=400)[0]
        assert float(f.fourier_even(xi)) == pytest.approx(ev, abs=1e-10)


def test_fhat_zero():
    f = GaussianTest(0.2)
    assert float(f.fourier_even(0.0)) == pytest.approx(0.2 * math.sqrt(2 * math.pi), rel=1e-15)


def test_spectral_measure_invariants(triangle):
    mu = spectral_measure(eigenvalues(triangle, 20.0), triangle)
    assert mu.masses[mu.positions == 0.0][0] == 2
    assert np.array_equal(np.sort(mu.positions), np.sort(-mu.positions))
    with pytest.raises(AssertionError):
        SpectralMeasure(np.array([-1.0, 0.0, 1.0]), np.array([1.0, 1.0, 2.0]), 2.0, 1.0, 0)


def test_lhs_examples(circle3):
    f = GaussianTest(0.2)
    mu = spectral_measure(eigenvalues(circle3, 40.0), circle3)
    value, tail = lhs(mu, f)
    assert tail < 1e-12
    # betti + 1 = 2 at zero and every nonzero eigenvalue double
    direct = 2 * math.fsum(float(f.fourier_even(2 * math.pi * k)) for k in range(-6, 7))
    assert value == pytest.approx(direct, abs=1e-12)
    only_zero = spectral_measure(EigenvalueList([Eigenvalue(0.0, 1)], 0.5), circle3)
    assert lhs(only_zero, f)[0] == pytest.approx(2 * float(f.fourier_even(0.0)))
    assert lhs(mu, GaussianTest(0.2, 1.3))[0] == pytest.approx(lhs(mu, GaussianTest(0.2, -1.3))[0], abs=1e-14)


def test_lhs_tail_error(circle3):
    mu = spectral_measure(eigenvalues(circle3, 5.0), circle3)
    with pytest.raises(TailBoundError, match="kmax"):
        lhs(mu, GaussianTest(0.2), tol=1e-6)


def test_rhs_examples(circle3):
    # no orbit inside the Gaussian's reach: only the volume term
    f = GaussianTest(0.05)
    g = graph(("a", "b", 1.0))
    value, _ = rhs(g, enumerate_orbits(g, 10.0, skip_zero=True), f, 10.0)
    assert value == pytest.approx(2 * g.volume, abs=1e-30)
    # circle: each k-fold loop in both orientations, s = 1, primitive length 1,
    # so the orbit side is 2 f(0) + 2 sum_{k >= 1} (f(k) + f(-k)) = 2 sum_Z f
    f = GaussianTest(0.4, 0.3)
    value, tail = rhs(circle3, enumerate_orbits(circle3, 8.0, skip_zero=True), f, 8.0)
    lattice = math.fsum(float(f(k)) for k in range(-30, 31))
    assert value == pytest.approx(2 * lattice, abs=1e-12)
    assert tail < 1e-12


def test_rhs_scaling_doubles_orbit_lengths(k4):
    a = enumerate_orbits(k4, 5.0)
    b = enumerate_orbits(scaled(k4, 2.0), 10.0)
    assert [2 * p.length for p in a] == pytest.approx([p.length for p in b])


def test_rhs_tail_bound_dominates_truncated_terms():
    g = graph(("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0), ("a", "p", 0.7))
    f = GaussianTest(1.0, 2.0)
    lmax, lfar = 4.0, 9.0
    far = sum(abs(p.amplitude * float(f(p.length) + f(-p.length)))
              for p in enumerate_orbits(g, lfar, skip_zero=True) if p.length > lmax)
    assert far <= rhs_tail_bound(g, f, lmax)


def test_rhs_subdivision_invariance(triangle):
    f = GaussianTest(0.3, 2.0)
    base = rhs(triangle, enumerate_orbits(triangle, 10.0, skip_zero=True), f, 10.0)[0]
    for e in triangle.edges:
        h = subdivide(triangle, e.id, 0.3)
        assert rhs(h, enumerate_orbits(h, 10.0, skip_zero=True), f, 10.0)[0] == pytest.approx(base, abs=1e-10)


@pytest.mark.parametrize("name", ["circle3", "interval", "star3", "triangle"])
def test_trace_check_bundled(name):
    g = bundled(name)
    ev = eigenvalues(g, 60.0)
    for width, center in FAMILY:
        rep = trace_check(g, GaussianTest(width, center), 60.0, 10.0, ev=ev)
        assert rep.passed, rep.to_dict()


def test_trace_check_pendant_triangle():
    g = graph(("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0), ("a", "p", 0.7))
    ev = eigenvalues(g, 60.0)
    for width, center in FAMILY:
        assert trace_check(g, GaussianTest(width, center), 60.0, 10.0, ev=ev).passed


def test_trace_check_detects_missing_eigenvalue(triangle):
    ev = eigenvalues(triangle, 60.0)
    broken = EigenvalueList(ev.values[:3] + ev.values[4:], ev.kmax)
    assert not trace_check(triangle, GaussianTest(0.15), 60.0, 10.0, ev=broken).passed


def test_trace_check_tail_failure(triangle):
    with pytest.raises(TailBoundError):
        trace_check(triangle, GaussianTest(0.15, 3.0), 60.0, 1.5)


def test_poisson_demo():
    f = GaussianTest(0.2)
    r3 = poisson_demo(3, f)
    assert r3["pass"] and r3["poisson_diff"] <= 1e-10
    r4 = poisson_demo(4, f)
    assert r4["trace"]["lhs"] == pytest.approx(r3["trace"]["lhs"], abs=1e-12)
    assert r4["trace"]["rhs"] == pytest.approx(r3["trace"]["rhs"], abs=1e-12)
    assert r3["fhat0"] == pytest.approx(0.2 * math.sqrt(2 * math.pi))
    with pytest.raises(ValueError):
        cycle_graph(2)


def _peaks_match(g, kmax, t_max, lengths):
    scan = recover_orbit_lengths(spectral_measure(eigenvalues(g, kmax), g), t_max=t_max)
    peaks = np.array(scan.peaks)
    lengths = np.array(sorted(set(lengths)))
    for ell in lengths:
        assert np.min(np.abs(peaks - ell)) <= 2 / kmax, ell
    for p in peaks:
        assert np.min(np.abs(lengths - p)) <= 2 / kmax, p


def test_recover_lengths_circle(circle3):
    _peaks_match(circle3, 60.0, 5.5, [1, 2, 3, 4, 5])


def test_recover_lengths_interval(interval):
    _peaks_match(interval, 60.0, 7.0, [2, 4, 6])


def test_recover_lengths_star_against_orbits():
    g = graph(("o", "a", 1.0), ("o", "b", 1.41421356), ("o", "c", 1.73205081))
    lengths = [p.length for p in enumerate_orbits(g, 4.0)]
    _peaks_match(g, 60.0, 4.0 + 0.1, lengths)


def test_recover_lengths_window_check(circle3):
    mu = spectral_measure(eigenvalues(circle3, 20.0), circle3)
    with pytest.raises(ValueError, match="resolution"):
        recover_orbit_lengths(mu, window=0.05)
