import math

import numpy as np
import pytest
from scipy.special import zeta

from qgraph.ends import (INFINITE, Constant, EndedGraph, Geometric, Power, Prefixed, Ray, RegularTree, classify,
                         count_ends, end_volume, ended_graph_from_dict, markovian_uniqueness, power_sum,
                         self_adjointness, star_lengths_along, total_volume)
from qgraph.graph import GraphError, MetricGraph, star_lengths

from conftest import bundled_dict, graph

POINT = MetricGraph(("o",), ())

LAWS = [
    Constant(1.0), Constant(0.2),
    Geometric(1.0, 0.5), Geometric(2.0, 1.0), Geometric(0.5, 1.5), Geometric(1.0, 0.9),
    Power(1.0, 1.0), Power(1.0, 2.0), Power(3.0, 0.5), Power(1.0, 1.5),
    Prefixed((5.0, 0.1), Geometric(1.0, 0.25)), Prefixed((1.0,), Constant(2.0)),
]


def ray(law, attach="o"):
    return Ray(attach, law)


def test_end_counts():
    assert count_ends(ended_graph_from_dict(bundled_dict("z_ray2"))) == 2
    assert count_ends(ended_graph_from_dict(bundled_dict("tree3"))) == INFINITE
    assert count_ends(EndedGraph(graph(("a", "b", 1.0)))) == 0


def test_end_volumes():
    assert end_volume(ray(Geometric(1.0, 0.5))) == 2.0
    assert end_volume(ray(Power(1.0, 1.0))) == INFINITE
    assert end_volume(RegularTree("o", 3, Geometric(1.0, 0.5))) == INFINITE
    # 2 children at level 1 of length 1, 4 at level 2 of length 1/4, ...
    assert end_volume(RegularTree("o", 2, Geometric(1.0, 0.25))) == pytest.approx(4.0)


@pytest.mark.parametrize("s", [1.1, 1.5, 2.0, 3.0, 4.5])
def test_power_sum_against_zeta(s):
    assert power_sum(s) == pytest.approx(zeta(s), rel=1e-10)
    assert end_volume(ray(Power(2.0, s))) == pytest.approx(2.0 * zeta(s), rel=1e-10)
    with pytest.raises(ValueError):
        power_sum(1.0)


def test_markovian_uniqueness_examples():
    mu, evidence = markovian_uniqueness(ended_graph_from_dict(bundled_dict("z_ray2")))
    assert mu and len(evidence) == 2
    mu, evidence = markovian_uniqueness(EndedGraph(POINT, [ray(Geometric(1.0, 0.5))]))
    assert not mu and evidence[0]["end_volume"] == 2.0
    one_end = EndedGraph(graph(("o", "x", 1.0)), [ray(Power(1.0, 0.8))])
    assert markovian_uniqueness(one_end)[0]
    assert total_volume(one_end) == INFINITE


def test_self_adjointness_examples():
    assert self_adjointness(EndedGraph(graph(("a", "b", 1.0)))).criterion == "i"
    z = self_adjointness(ended_graph_from_dict(bundled_dict("z_ray2")))
    assert (z.verdict, z.criterion) == ("yes", "ii")
    h = self_adjointness(EndedGraph(POINT, [ray(Power(1.0, 1.0))]))
    assert (h.verdict, h.criterion) == ("yes", "iii")
    geo = self_adjointness(EndedGraph(POINT, [ray(Geometric(1.0, 0.5))]))
    assert geo.verdict == "no" and "Markovian uniqueness fails" in geo.reason


def test_inconclusive_tree():
    # escape paths have finite length 2 but the tree volume sum 3^n 2^-n diverges
    d = EndedGraph(POINT, [RegularTree("o", 3, Geometric(1.0, 0.5))])
    assert markovian_uniqueness(d)[0]
    assert self_adjointness(d).verdict == "inconclusive"


def test_total_volume():
    core = graph(("a", "b", 1.0), ("b", "c", 2.0))
    assert total_volume(EndedGraph(core)) == 3.0
    assert total_volume(EndedGraph(core, [ray(Geometric(1.0, 0.5), "a")])) == 5.0
    assert total_volume(EndedGraph(core, [ray(Geometric(1.0, 0.5), "a"), ray(Constant(1.0), "c")])) == INFINITE


def tail_bound(law, n):
    """Upper bound on sum_{j >= n} law(j) for the convergent laws in LAWS."""
    if isinstance(law, Prefixed):
        return tail_bound(law.tail, n - len(law.prefix))
    if isinstance(law, Geometric):
        return law.a * law.q**n / (1 - law.q)
    if isinstance(law, Power):
        # integral test: sum_{j >= n+1} j^-s <= integral_n^inf x^-s dx
        return law.a * n ** (1 - law.s) / (law.s - 1)
    raise TypeError(law)


@pytest.mark.parametrize("law", LAWS, ids=repr)
def test_partial_sum_probe(law):
    horizon = 20000
    if law.converges():
        partial = math.fsum(law(n) for n in range(horizon))
        gap = law.total() - partial
        assert -1e-12 * law.total() <= gap <= tail_bound(law, horizon) + 1e-12 * law.total()
    else:
        # exceeds a fixed bound within the horizon (harmonic reaches 9 near n = 4550)
        partial, n = 0.0, 0
        while partial <= 9.0 and n < horizon:
            partial += law(n)
            n += 1
        assert partial > 9.0


@pytest.mark.parametrize("law", LAWS, ids=repr)
@pytest.mark.parametrize("b", [2, 3])
def test_tree_volume_against_truncation(law, b):
    levels = 60
    partial = math.fsum(b ** (n + 1) * law(n) for n in range(levels))
    total = law.weighted_total(b)
    if law.weighted_converges(b):
        assert total == pytest.approx(partial, rel=1e-6)
    else:
        half = math.fsum(b ** (n + 1) * law(n) for n in range(levels // 2))
        assert math.isinf(total) and partial >= 1.9 * half


@pytest.mark.parametrize("law", LAWS, ids=repr)
def test_criteria_ordering_and_gate(law):
    for gadget in (ray(law), RegularTree("o", 2, law)):
        d = EndedGraph(POINT, [gadget])
        rep = classify(d)
        if law.infimum() > 0:
            # (ii) holding forces the escape series to diverge, so (iii) would hold too
            assert not law.converges()
        if rep.self_adjoint.verdict == "yes":
            assert rep.markovian_unique
        if not rep.markovian_unique:
            assert rep.self_adjoint.verdict == "no"


@pytest.mark.parametrize("law", LAWS, ids=repr)
def test_one_end_corollary(law):
    d = EndedGraph(graph(("o", "x", 1.5)), [ray(law)])
    assert markovian_uniqueness(d)[0] == (total_volume(d) == INFINITE)


def test_star_lengths_along_ray_match_truncation():
    law = Prefixed((0.5, 2.0), Power(1.0, 1.3))
    n = 40
    ell = law.lengths(n)
    g = graph(*[(f"v{i}", f"v{i + 1}", float(ell[i])) for i in range(n)])
    core_metric = star_lengths(g)
    along = star_lengths_along(ray(law), n - 3)
    np.testing.assert_allclose(along, [core_metric[f"e{i + 1}"] for i in range(1, n - 2)], rtol=1e-14)


def test_classify_bundled_reports():
    z = classify(ended_graph_from_dict(bundled_dict("z_ray2"))).to_dict()
    assert z["end_count"] == 2 and z["markovian_unique"] and z["self_adjoint"]["criterion"] == "ii"
    g = classify(ended_graph_from_dict(bundled_dict("ray_geometric"))).to_dict()
    assert g["end_count"] == 1 and g["gadgets"][0]["end_volume"] == 2.0
    assert not g["markovian_unique"] and g["self_adjoint"]["verdict"] == "no"
    h = classify(ended_graph_from_dict(bundled_dict("ray_harmonic"))).to_dict()
    assert h["markovian_unique"] and h["self_adjoint"]["criterion"] == "iii"
    t = classify(ended_graph_from_dict(bundled_dict("tree3"))).to_dict()
    assert t["end_count"] == INFINITE and t["markovian_unique"] and t["self_adjoint"]["criterion"] == "ii"
    assert t["total_volume"] == INFINITE and t["notes"]


@pytest.mark.parametrize("gadgets, field", [
    ([{"type": "ray", "attach": "zz", "law": {"kind": "constant", "a": 1}}], "gadgets[0].attach"),
    ([{"type": "loop", "attach": "o", "law": {"kind": "constant", "a": 1}}], "gadgets[0].type"),
    ([{"type": "tree", "attach": "o", "branching": 1, "law": {"kind": "constant", "a": 1}}], "gadgets[0].branching"),
    ([{"type": "ray", "attach": "o", "law": {"kind": "geometric", "a": 1}}], "gadgets[0].law.q"),
    ([{"type": "ray", "attach": "o", "law": {"kind": "power", "a": 1, "s": -1}}], "gadgets[0].law.s"),
    ([{"type": "ray", "attach": "o", "law": {"kind": "spline"}}], "gadgets[0].law.kind"),
    ([{"type": "ray", "attach": "o", "law": {"kind": "prefix", "prefix": [1, 0], "tail": {"kind": "constant", "a": 1}}}],
     "gadgets[0].law.prefix[1]"),
    ({"type": "ray"}, "gadgets"),
])
def test_json_errors_name_field(gadgets, field):
    with pytest.raises(GraphError, match=field.replace("[", r"\[").replace("]", r"\]")):
        ended_graph_from_dict({"vertices": ["o"], "edges": [], "gadgets": gadgets})


def test_tree_branching_validated():
    with pytest.raises(GraphError):
        RegularTree("o", 1, Constant(1.0))
    with pytest.raises(GraphError):
        EndedGraph(POINT, [ray(Constant(1.0), "missing")])
