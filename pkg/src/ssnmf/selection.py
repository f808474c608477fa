"""Top-p selection rules used by the extraction algorithms.

All rules break ties by the smallest column index and return index sets as
sorted ``int64`` arrays (0-based).
"""

import numpy as np

from .errors import ParameterError


def _check(u, p):
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    if not 1 <= p <= u.size:
        raise ParameterError(f"p={p} must lie in [1, n={u.size}]")
    return u


def largest_indices(u, p):
    """Indices of the ``p`` largest entries of ``u``, ties to smallest index."""
    u = _check(u, p)
    n = u.size
    if p == n:
        return np.arange(n)
    kth = np.partition(u, n - p)[n - p]
    above = np.flatnonzero(u > kth)
    tied = np.flatnonzero(u == kth)[: p - above.size]
    return np.sort(np.concatenate([above, tied]))


def smallest_indices(u, p):
    """Indices of the ``p`` smallest entries of ``u``, ties to smallest index."""
    u = _check(u, p)
    n = u.size
    if p == n:
        return np.arange(n)
    kth = np.partition(u, p - 1)[p - 1]
    below = np.flatnonzero(u < kth)
    tied = np.flatnonzero(u == kth)[: p - below.size]
    return np.sort(np.concatenate([below, tied]))


def top_p_abs(u, p):
    """Indices of the ``p`` largest ``|u(j)|``."""
    return largest_indices(np.abs(np.asarray(u, dtype=np.float64)), p)


def top_p_signed_median(u, p):
    """Choose the ``p`` largest or ``p`` smallest entries of ``u``.

    The largest set wins when its median is at least the absolute value of
    the median of the smallest set. Returns ``(indices, sign)``.
    """
    u = _check(u, p)
    hi = largest_indices(u, p)
    lo = smallest_indices(u, p)
    if np.median(u[hi]) >= abs(np.median(u[lo])):
        return hi, 1
    return lo, -1


def top_p_signed_extreme(u, p):
    """Like :func:`top_p_signed_median` but compares ``max(u)`` with ``-min(u)``."""
    u = _check(u, p)
    if u.max() >= -u.min():
        return largest_indices(u, p), 1
    return smallest_indices(u, p), -1
