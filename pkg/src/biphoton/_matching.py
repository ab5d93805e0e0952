"""Selects the compiled matching kernel, falling back to pure Python.

Set ``BIPHOTON_PURE_PYTHON=1`` to force the fallback.
"""
import os

if os.environ.get("BIPHOTON_PURE_PYTHON", "") not in ("", "0"):
    from ._kernels_py import greedy_match
    BACKEND = "python"
else:
    try:
        from ._kernels import greedy_match
        BACKEND = "cython"
    except ImportError:
        from ._kernels_py import greedy_match
        BACKEND = "python"

__all__ = ["greedy_match", "BACKEND"]
