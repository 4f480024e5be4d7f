import json
from importlib import resources

import pytest

from qgraph.graph import MetricGraph, graph_from_dict


def bundled(name: str) -> MetricGraph:
    path = resources.files("qgraph") / "data" / "graphs" / f"{name}.json"
    return graph_from_dict(json.loads(path.read_text()))


def bundled_dict(name: str) -> dict:
    path = resources.files("qgraph") / "data" / "graphs" / f"{name}.json"
    return json.loads(path.read_text())


def graph(*edges) -> MetricGraph:
    """``graph(("a", "b", 1.0), ...)`` with edge ids e1, e2, ..."""
    return MetricGraph.from_edges([(f"e{i + 1}", u, v, l) for i, (u, v, l) in enumerate(edges)])


@pytest.fixture
def triangle():
    return bundled("triangle")


@pytest.fixture
def circle3():
    return bundled("circle3")


@pytest.fixture
def interval():
    return bundled("interval")


@pytest.fixture
def star3():
    return bundled("star3")


@pytest.fixture
def k4():
    return bundled("k4")
