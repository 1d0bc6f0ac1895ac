"""Numeric kernel backends.

Two interchangeable implementations of the hot loops live here: a
jit-compiled one (``numba_backend``) and a pure-NumPy reference
(``numpy_backend``). The FRAUDLAB_BACKEND environment variable picks one
at import time:

  auto   (default) jit backend if numba imports cleanly, else numpy
  numba  require the jit backend; error out if it cannot load
  numpy  force the reference path

Both backends produce bitwise-identical outputs (asserted by the test
suite), so the flag only changes speed, never results.
"""

from __future__ import annotations

import os

from ..errors import ConfigError
from . import numpy_backend

_ENV_VAR = "FRAUDLAB_BACKEND"
_requested = os.environ.get(_ENV_VAR, "auto").strip().lower()
if _requested not in ("auto", "numba", "numpy"):
    raise ConfigError(
        f"{_ENV_VAR} must be one of auto|numba|numpy, got {_requested!r}")

BACKEND = "numpy"
_impl = numpy_backend
if _requested in ("auto", "numba"):
    try:
        from . import numba_backend
    except ImportError as exc:
        if _requested == "numba":
            raise ConfigError(f"{_ENV_VAR}=numba but the jit backend "
                              f"failed to import: {exc}") from exc
    else:
        BACKEND = "numba"
        _impl = numba_backend

gini_scan = _impl.gini_scan
gbt_scan = _impl.gbt_scan
build_gini_tree = _impl.build_gini_tree
build_gbt_tree = _impl.build_gbt_tree
apply_tree = _impl.apply_tree
knn_brute = _impl.knn_brute


def get_backend(name: str):
    """Return a backend module by name ('numba' or 'numpy').

    Used by the parity tests and the benchmark; normal code goes through
    the module-level aliases above.
    """
    if name == "numpy":
        return numpy_backend
    if name == "numba":
        from . import numba_backend
        return numba_backend
    raise ConfigError(f"unknown kernel backend {name!r}")
