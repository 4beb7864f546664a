"""Select the compiled path kernels when available, else the pure-Python ones.

Set ``TNSIM_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

IMPLEMENTATION = "python"
greedy_path = _kernels_py.greedy_path
tree_cost = _kernels_py.tree_cost

if os.environ.get("TNSIM_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None
    if _compiled is not None:
        IMPLEMENTATION = "cython"
        greedy_path = _compiled.greedy_path
        tree_cost = _compiled.tree_cost

__all__ = ["IMPLEMENTATION", "greedy_path", "tree_cost"]
