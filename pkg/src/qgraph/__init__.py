"""Kirchhoff Laplacians on metric graphs: spectra, periodic orbits, the trace
formula, discrete correspondences and ends of infinite graphs."""
from .graph import (Edge, GraphError, GraphPoint, MetricGraph, graph_from_dict, graph_to_dict,
                    load_graph, path_metric, scaled, star_lengths, subdivide, validate)
from .spectrum import (EigenvalueList, SpectrumError, counting_function, eigenvalues, weyl_consistency_check,
                       weyl_fit)
from .orbits import PeriodicOrbit, enumerate_orbits, orbit_invariants, primitive_part
from .trace import GaussianTest, poisson_demo, recover_orbit_lengths, spectral_measure, trace_check
from .discrete import DiscreteLaplacian, discrete_spectrum, equilateral_compare, kirchhoff_defect
from .ends import classify, ended_graph_from_dict, load_ended_graph
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "DiscreteLaplacian", "Edge", "EigenvalueList", "GaussianTest", "GraphError", "GraphPoint",
    "MetricGraph", "PeriodicOrbit", "SpectrumError", "classify", "counting_function", "discrete_spectrum",
    "eigenvalues", "ended_graph_from_dict", "enumerate_orbits", "equilateral_compare", "graph_from_dict",
    "graph_to_dict", "kirchhoff_defect", "load_ended_graph", "load_graph", "orbit_invariants", "path_metric",
    "poisson_demo", "primitive_part", "recover_orbit_lengths", "scaled", "spectral_measure", "star_lengths",
    "subdivide", "trace_check", "validate", "weyl_consistency_check", "weyl_fit",
]
