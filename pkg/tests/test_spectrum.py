import math

import numpy as np
import pytest
from scipy.optimize import brentq

from qgraph.graph import flipped, scaled, subdivide
from qgraph.spectrum import (BondPhases, EigenvalueList, SecularSystem, SpectrumError, build_secular_matrix,
                             counting_function, eigenvalues, weyl_consistency_check, weyl_fit)

from conftest import graph


def star_oracle(lengths, kmax, step=1e-3):
    """Roots of sum_j sin(k l_j) prod_{i != j} cos(k l_i) on a star with Neumann leaves.

    Valid when the roots are simple, i.e. no two legs share a Dirichlet
    frequency; used with incommensurate lengths.
    """
    lengths = np.asarray(lengths)

    def F(k):
        c = np.cos(k * lengths)
        s = np.sin(k * lengths)
        return sum(s[j] * np.prod(np.delete(c, j)) for j in range(len(lengths)))

    ks = np.arange(step, kmax, step)
    vals = np.array([F(k) for k in ks])
    roots = []
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        roots.append(brentq(F, ks[i], ks[i + 1], xtol=1e-14))
    return np.array(roots)


def test_secular_size_and_roots(triangle, interval):
    assert build_secular_matrix(triangle, 1.0).shape == (6, 6)
    sys_i = SecularSystem(interval)
    for n in range(1, 5):
        assert sys_i.nullity(n * math.pi) == 1
        assert sys_i.nullity(n * math.pi + 0.3) == 0
    assert SecularSystem(triangle).nullity(2 * math.pi) >= 1
    assert SecularSystem(triangle).nullity(2.5) == 0


def test_secular_rejects_nonpositive_k(triangle):
    with pytest.raises(SpectrumError):
        build_secular_matrix(triangle, 0.0)


def test_circle_spectrum(circle3):
    ev = eigenvalues(circle3, 40.0)
    assert ev.values[0].lam == 0.0 and ev.values[0].multiplicity == 1
    ks = ev.wavenumbers[1:]
    np.testing.assert_allclose(ks, 2 * math.pi * np.arange(1, ks.size + 1), atol=1e-8)
    assert ks.size == 6
    assert all(m == 2 for m in ev.multiplicities[1:])
    assert not ev.flags


def test_interval_spectrum(interval):
    ev = eigenvalues(interval, 12.5 * math.pi)
    np.testing.assert_allclose(ev.lambdas, (math.pi * np.arange(13)) ** 2, rtol=1e-10, atol=1e-12)
    assert set(ev.multiplicities) == {1}


def test_unit_star_spectrum(star3):
    ev = eigenvalues(star3, 20.0)
    got = {(round(k / math.pi, 8), m) for k, m in zip(ev.wavenumbers[1:], ev.multiplicities[1:])}
    expected = {(float(n), 1) for n in range(1, 7)} | {(n + 0.5, 2) for n in range(0, 6)}
    assert got == expected


def test_generic_star_against_oracle():
    lengths = (1.0, 1.41421356, 1.73205081)
    g = graph(*[("o", f"v{i}", l) for i, l in enumerate(lengths)])
    ev = eigenvalues(g, 30.0)
    oracle = star_oracle(lengths, 30.0)
    assert set(ev.multiplicities[1:]) == {1}
    np.testing.assert_allclose(ev.wavenumbers[1:], oracle, atol=1e-8)


def test_close_roots_resolved():
    # two roots closer than the grid step; the phase count forces a rescan
    g = graph(("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0), ("a", "p", 0.7))
    ev = eigenvalues(g, 40.0)
    assert not ev.flags
    bp = BondPhases(g)
    ks = np.linspace(0.05, 40.0, 4000)
    assert bp.crossings(ks).sum() == ev.total - 1
    near = ev.wavenumbers[(ev.wavenumbers > 4.1) & (ev.wavenumbers < 4.3)]
    assert near.size == 2


def test_counting_function(circle3):
    ev = eigenvalues(circle3, 40.0)
    assert counting_function(ev, 0.0) == 1
    assert counting_function(ev, 2 * math.pi + 0.1) == 3
    ts = np.linspace(0, 40, 200)
    counts = [counting_function(ev, t) for t in ts]
    assert all(a <= b for a, b in zip(counts, counts[1:]))
    with pytest.raises(SpectrumError):
        counting_function(ev, 41.0)


def test_weyl_fit_circle_and_scaling(circle3):
    ev = eigenvalues(circle3, 700.0)
    slope, rel = weyl_fit(ev, circle3)
    assert rel < 0.01
    assert slope == pytest.approx(1 / math.pi, rel=0.01)
    g2 = scaled(circle3, 2.0)
    slope2, _ = weyl_fit(eigenvalues(g2, 350.0), g2)
    assert slope2 == pytest.approx(2 * slope, rel=0.01)


def test_weyl_fit_needs_data(interval):
    with pytest.raises(SpectrumError):
        weyl_fit(eigenvalues(interval, 10.0), interval)


def test_weyl_check_flags_deleted_eigenvalue(circle3):
    ev = eigenvalues(circle3, 200.0)
    assert weyl_consistency_check(ev, circle3).ok
    broken = EigenvalueList(ev.values[:5] + ev.values[6:], ev.kmax)
    rep = weyl_consistency_check(broken, circle3)
    assert not rep.ok
    assert rep.flags


def test_weyl_check_insufficient_data(circle3):
    ev = eigenvalues(circle3, 1.0)
    rep = weyl_consistency_check(ev, circle3)
    assert not rep.ok and rep.flags == ["insufficient-data"]


@pytest.mark.parametrize("c", [0.5, 2.0])
def test_scaling_covariance(c):
    g = graph(("a", "b", 1.0), ("b", "c", 1.3), ("c", "a", 0.8), ("c", "d", 0.6))
    base = eigenvalues(g, 25.0)
    sc = eigenvalues(scaled(g, c), 25.0 / c)
    np.testing.assert_allclose(sc.lambdas[1:] * c**2, base.lambdas[1:], rtol=1e-8)
    assert np.array_equal(sc.multiplicities, base.multiplicities)


def test_subdivision_and_orientation_invariance():
    g = graph(("a", "b", 1.0), ("b", "c", 1.3), ("c", "a", 0.8), ("c", "d", 0.6))
    base = eigenvalues(g, 25.0)
    for e in g.edges:
        sub = eigenvalues(subdivide(g, e.id, 0.37 * e.length), 25.0)
        np.testing.assert_allclose(sub.lambdas, base.lambdas, atol=1e-8, rtol=1e-10)
        flip = eigenvalues(flipped(g, e.id), 25.0)
        np.testing.assert_allclose(flip.lambdas, base.lambdas, atol=1e-10, rtol=1e-12)
        assert np.array_equal(flip.multiplicities, base.multiplicities)


def test_argument_checks(triangle):
    with pytest.raises(SpectrumError):
        eigenvalues(triangle, 0.0)
    with pytest.raises(SpectrumError):
        eigenvalues(triangle, 5.0, tol=1e-3)


def test_root_on_kmax_boundary(circle3):
    # 2 pi * 105 coincides with kmax up to rounding
    ev = eigenvalues(circle3, 210 * math.pi)
    assert not ev.flags
    assert ev.total == 211
