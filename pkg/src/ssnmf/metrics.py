"""Mean removed spectral angle with optimal column matching, and purity."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DegenerateInputError, DimensionError, ParameterError

_CENTERED_NORM_MIN = 1e-15


@dataclass(frozen=True)
class MatchResult:
    """Optimal matching of estimated to reference columns.

    ``permutation[k]`` is the column of the estimate matched to reference
    column ``k``; ``per_column_angles[k]`` is the normalized angle of that pair.
    """

    permutation: np.ndarray
    per_column_angles: np.ndarray
    total: float

    @property
    def mean(self):
        return self.total / len(self.per_column_angles)


def _centered_unit(Z, what):
    Z = np.asarray(Z, dtype=np.float64)
    Zc = Z - Z.mean(axis=0)
    norms = np.linalg.norm(Zc, axis=0)
    if np.any(norms <= _CENTERED_NORM_MIN):
        raise DegenerateInputError(f"{what} has a constant column; its spectral angle is undefined")
    return Zc / norms


def _unit_angle(a, b):
    # angle between unit vectors (along axis 0); the atan2 form keeps full
    # relative accuracy near 0 and pi, where arccos of the cosine does not
    return 2.0 * np.arctan2(np.linalg.norm(a - b, axis=0), np.linalg.norm(a + b, axis=0))


def mrsa_pair(x, y):
    """Mean removed spectral angle between two vectors, scaled to [0, 1]."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.shape != y.shape:
        raise DimensionError(f"length mismatch: {x.size} vs {y.size}")
    a = _centered_unit(x[:, None], "x")[:, 0]
    b = _centered_unit(y[:, None], "y")[:, 0]
    return float(_unit_angle(a, b) / np.pi)


def mrsa_matrix(W, W_est):
    """``C[i, j] = mrsa_pair(W[:, i], W_est[:, j])``."""
    A = _centered_unit(W, "W")
    B = _centered_unit(W_est, "W_est")
    return _unit_angle(A[:, :, None], B[:, None, :]) / np.pi


def mrsa(W, W_est):
    """MRSA between ``W`` and ``W_est`` after optimally reordering ``W_est``."""
    W = np.atleast_2d(np.asarray(W, dtype=np.float64))
    W_est = np.atleast_2d(np.asarray(W_est, dtype=np.float64))
    if W.shape != W_est.shape:
        raise ParameterError(f"shape mismatch: {W.shape} vs {W_est.shape}")
    C = mrsa_matrix(W, W_est)
    rows, cols = linear_sum_assignment(C)
    perm = cols[np.argsort(rows)]
    angles = C[np.arange(len(perm)), perm]
    return MatchResult(perm, angles, float(angles.sum()))


def purity_fraction(H, threshold=0.95):
    """Per-row fraction of columns whose entry exceeds ``threshold``."""
    H = np.asarray(H, dtype=np.float64)
    if H.ndim != 2:
        raise DimensionError("H must be 2-D")
    if not 0 < threshold < 1:
        raise ParameterError("threshold must lie in (0, 1)")
    if np.any(H < 0):
        raise ParameterError("H must be nonnegative")
    return (H > threshold).mean(axis=1)
