"""Hot kernels for run-index arithmetic.

Run sets are boolean masks over a mixed-radix index space, so lifting,
projection and measuring all reduce to two primitives over that space:

* ``mixed_radix_map``: for every index of a source space, re-encode a
  subset (or permutation) of its digits into a target space, giving the
  gather/scatter map used by lift, project and renaming.
* ``group_any``: OR-reduce a mask over the groups induced by such a map,
  used by projection and by the per-history goodness test.

Both carry a numba ``@njit`` fast path and a pure-numpy fallback.  The
backend is picked once at import from the ``PCT_KERNEL`` environment
variable (``numba``, ``numpy`` or ``auto``); ``set_backend`` overrides it
at runtime, which the benchmark harness uses to compare the two paths.
"""

from __future__ import annotations

import os
import warnings

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

_BACKEND = "numba" if HAS_NUMBA else "numpy"


def backend() -> str:
    return _BACKEND


def set_backend(name: str) -> None:
    """Select 'numba' or 'numpy'.  Falls back to numpy when numba is absent."""
    global _BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown kernel backend {name!r}")
    if name == "numba" and not HAS_NUMBA:
        warnings.warn("numba unavailable, staying on the numpy backend")
        name = "numpy"
    _BACKEND = name


def _mixed_radix_map_numpy(n, src_strides, src_radices, dst_strides):
    out = np.zeros(n, dtype=np.int64)
    if n == 0:
        return out
    idx = np.arange(n, dtype=np.int64)
    for k in range(len(src_strides)):
        out += ((idx // src_strides[k]) % src_radices[k]) * dst_strides[k]
    return out


def _group_any_numpy(groups, mask, n_groups):
    hit = groups[mask]
    if hit.size == 0:
        return np.zeros(n_groups, dtype=bool)
    return np.bincount(hit, minlength=n_groups).astype(bool)


if HAS_NUMBA:

    @njit(cache=True)
    def _mixed_radix_map_numba(n, src_strides, src_radices, dst_strides):  # pragma: no cover - jitted
        out = np.empty(n, dtype=np.int64)
        m = len(src_strides)
        for i in range(n):
            acc = 0
            for k in range(m):
                acc += ((i // src_strides[k]) % src_radices[k]) * dst_strides[k]
            out[i] = acc
        return out

    @njit(cache=True)
    def _group_any_numba(groups, mask, n_groups):  # pragma: no cover - jitted
        out = np.zeros(n_groups, dtype=np.bool_)
        for i in range(groups.shape[0]):
            if mask[i]:
                out[groups[i]] = True
        return out


def mixed_radix_map(n: int, src_strides, src_radices, dst_strides) -> np.ndarray:
    """Map each index of an n-point space digit-by-digit into another space.

    ``out[i] = sum_k ((i // src_strides[k]) % src_radices[k]) * dst_strides[k]``.
    The k-th entries describe one digit: where it sits in the source index
    and where it goes in the target index.
    """
    src_strides = np.ascontiguousarray(src_strides, dtype=np.int64)
    src_radices = np.ascontiguousarray(src_radices, dtype=np.int64)
    dst_strides = np.ascontiguousarray(dst_strides, dtype=np.int64)
    if _BACKEND == "numba":
        return _mixed_radix_map_numba(n, src_strides, src_radices, dst_strides)
    return _mixed_radix_map_numpy(n, src_strides, src_radices, dst_strides)


def group_any(groups: np.ndarray, mask: np.ndarray, n_groups: int) -> np.ndarray:
    """Boolean OR of ``mask`` within each group id of ``groups``."""
    groups = np.ascontiguousarray(groups, dtype=np.int64)
    mask = np.ascontiguousarray(mask, dtype=bool)
    if _BACKEND == "numba":
        return _group_any_numba(groups, mask, n_groups)
    return _group_any_numpy(groups, mask, n_groups)


_env = os.environ.get("PCT_KERNEL", "auto").lower()
if _env in ("numba", "numpy"):
    set_backend(_env)
elif _env != "auto":
    warnings.warn(f"PCT_KERNEL={_env!r} not recognised, using {_BACKEND}")
