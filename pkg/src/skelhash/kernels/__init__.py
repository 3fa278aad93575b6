"""Hot numeric kernels with a selectable backend.

The default backend is the numba-compiled one whenever numba imports
cleanly; set ``SKELHASH_BACKEND=numpy`` to force the pure-numpy fallback
or ``SKELHASH_BACKEND=numba`` to fail loudly if numba is unavailable.
``benchmarks/compare_backends.py`` times the two against each other.
"""

import os

from . import _numpy

KERNEL_NAMES = (
    "nearest_center",
    "accumulate_clusters",
    "vlad_residuals",
    "vlad_residuals_assigned",
    "hamming_distances",
    "dcc_sweeps",
)


def resolve_backend(requested):
    """Return ``(module, name)`` for a backend request; pure, for tests."""
    if requested not in ("auto", "numba", "numpy"):
        raise ValueError(
            f"unknown backend {requested!r}; expected auto, numba, or numpy"
        )
    if requested == "numpy":
        return _numpy, "numpy"
    try:
        from . import _numba
    except ImportError:
        if requested == "numba":
            raise RuntimeError(
                "SKELHASH_BACKEND=numba but numba is not importable"
            ) from None
        return _numpy, "numpy"
    return _numba, "numba"


_impl, BACKEND = resolve_backend(os.environ.get("SKELHASH_BACKEND", "auto"))

nearest_center = _impl.nearest_center
accumulate_clusters = _impl.accumulate_clusters
vlad_residuals = _impl.vlad_residuals
vlad_residuals_assigned = _impl.vlad_residuals_assigned
hamming_distances = _impl.hamming_distances
dcc_sweeps = _impl.dcc_sweeps
