"""Select the compiled orbit kernel when it is importable, else the Python twin.

Set ``QGRAPH_PURE_PYTHON=1`` to force the fallback.
"""
import os

from ._kernels_py import BudgetExceeded
from ._kernels_py import closed_walks as closed_walks_py

closed_walks_ext = None
if not os.environ.get("QGRAPH_PURE_PYTHON"):
    try:
        from ._kernels import closed_walks as closed_walks_ext
    except ImportError:  # extension not built
        closed_walks_ext = None

closed_walks = closed_walks_ext or closed_walks_py
BACKEND = "cython" if closed_walks_ext is not None else "python"

__all__ = ["closed_walks", "closed_walks_py", "closed_walks_ext", "BACKEND", "BudgetExceeded"]
