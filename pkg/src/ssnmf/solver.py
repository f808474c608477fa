"""Nonnegative least squares by cyclic coordinate descent.

Solves ``min_{H >= 0} ||X - W H||_F``. The problem decouples over the
columns of ``H``; for a fixed row ``k`` the exact coordinate update is
applied to every column at once, which gives the same iterates as sweeping
each column ``k = 1..r`` on its own.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .linalg import as_data_matrix


@dataclass(frozen=True)
class NnlsSettings:
    max_sweeps: int = 500
    rel_tol: float = 1e-8
    init: str = "zeros"

    def __post_init__(self):
        if self.max_sweeps < 1:
            raise ParameterError("max_sweeps must be >= 1")
        if not self.rel_tol > 0:
            raise ParameterError("rel_tol must be > 0")
        if self.init not in ("zeros", "given"):
            raise ParameterError(f"init must be 'zeros' or 'given', got {self.init!r}")


def _objective(xx, WtX, WtW, H):
    # ||X - WH||_F^2 expanded through the Gram matrices
    return xx - 2.0 * np.sum(H * WtX) + np.sum(H * (WtW @ H))


def nnls_cd(X, W, settings=None, H0=None, trace=None):
    """Nonnegative abundances ``H`` (r x n) minimizing ``||X - W H||_F``.

    Parameters
    ----------
    X : array_like (m, n)
    W : array_like (m, r)
        No column may be zero.
    settings : NnlsSettings, optional
    H0 : array_like (r, n), optional
        Starting point, used when ``settings.init == "given"``; negative
        entries are clipped to zero.
    trace : list, optional
        If given, the squared objective after every sweep is appended to it
        (the first entry is the starting objective).
    """
    settings = settings or NnlsSettings()
    X = as_data_matrix(X)
    W = as_data_matrix(W, "W")
    if W.shape[0] != X.shape[0]:
        raise DimensionError(f"W has {W.shape[0]} rows but X has {X.shape[0]}")
    r, n = W.shape[1], X.shape[1]
    WtW = W.T @ W
    diag = np.diag(WtW).copy()
    if np.any(diag <= 0):
        raise ParameterError("W has an all-zero column")

    if settings.init == "given":
        if H0 is None:
            raise ParameterError("init='given' requires H0")
        H = np.maximum(as_data_matrix(H0, "H0"), 0.0)
        if H.shape != (r, n):
            raise DimensionError(f"H0 must have shape {(r, n)}, got {H.shape}")
        H = H.copy()
    else:
        H = np.zeros((r, n))

    WtX = W.T @ X
    xx = float(np.sum(X * X))
    f = _objective(xx, WtX, WtW, H)
    if trace is not None:
        trace.append(f)
    for _ in range(settings.max_sweeps):
        for k in range(r):
            # W(:,k)^T R = WtX[k] - WtW[k] @ H, with R the current residual
            H[k] = np.maximum(0.0, H[k] + (WtX[k] - WtW[k] @ H) / diag[k])
        f_new = _objective(xx, WtX, WtW, H)
        if trace is not None:
            trace.append(f_new)
        converged = f - f_new <= settings.rel_tol * f or f_new <= 1e-28 * xx
        f = f_new
        if converged:
            break
    return H


def relative_error(X, W, settings=None, H=None):
    """``min_{H >= 0} ||X - W H||_F / ||X||_F`` (H computed unless given)."""
    X = as_data_matrix(X)
    norm_x = np.linalg.norm(X)
    if norm_x == 0:
        raise ParameterError("relative error is undefined for X = 0")
    if H is None:
        H = nnls_cd(X, W, settings)
    return float(np.linalg.norm(X - np.asarray(W) @ H) / norm_x)
