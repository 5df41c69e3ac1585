"""Kernel backend selection.

The compiled Cython core is preferred; the pure numpy backend is the
fallback (and the oracle the core is tested against).  Set
``MEDAX_FORCE_PURE=1`` to skip the compiled core, e.g. for benchmarking.
"""

from __future__ import annotations

import os

from . import _pure

if os.environ.get("MEDAX_FORCE_PURE"):
    _impl = _pure
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pure

KDTree = _impl.KDTree
radius_pairs = _impl.radius_pairs
dijkstra = _impl.dijkstra
connected_components = _impl.connected_components
linkage_components = _impl.linkage_components
BACKEND: str = _impl.BACKEND


def backend_name() -> str:
    """Name of the active kernel backend ("compiled" or "pure")."""
    return BACKEND
