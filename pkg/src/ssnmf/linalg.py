"""Dense linear-algebra kernels: randomized truncated SVD and implicit
orthogonal-complement projections.

Matrices are plain float64 ``numpy`` arrays. Data matrices are ``m x n`` with
one data point per column; orthonormal bases are ``m x k`` arrays whose
columns are the basis vectors (``k`` may be 0).
"""

import numpy as np

from .errors import DimensionError, InputError, ParameterError, RankDeficiencyError

DEFAULT_POWER_ITERS = 10
DEFAULT_OVERSAMPLING = 10
DEGENERATE_RTOL = 1e-12

_SVD_STREAM = 0xFFFF_FFFF


def as_data_matrix(X, name="X"):
    """Validate and return ``X`` as a 2-D finite float64 array."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InputError(f"{name} contains non-finite values")
    return X


def seeded_stream(seed, *key):
    """Counter-based generator (Philox) for the stream ``(seed, *key)``.

    Distinct keys give statistically independent streams, so draws do not
    depend on the order in which streams are consumed.
    """
    words = [int(seed) % 2**64, *(int(k) % 2**64 for k in key)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(words)))


def mix_seed(*words):
    """Fold integers into one 64-bit seed with the splitmix64 finalizer."""
    mask = 2**64 - 1
    h = 0x9E3779B97F4A7C15
    for w in words:
        h = (h ^ (int(w) & mask)) & mask
        h = (h + 0x9E3779B97F4A7C15) & mask
        h = ((h ^ (h >> 30)) * 0xBF58476D1CE4E5B9) & mask
        h = ((h ^ (h >> 27)) * 0x94D049BB133111EB) & mask
        h ^= h >> 31
    return h


def empty_basis(m):
    return np.zeros((m, 0))


def truncated_svd_basis(X, r, power_iters=DEFAULT_POWER_ITERS, seed=0,
                        oversampling=DEFAULT_OVERSAMPLING):
    """Orthonormal ``m x r`` basis of the dominant left singular subspace of X.

    Randomized subspace iteration: a Gaussian test matrix is multiplied
    alternately by ``X`` and ``X.T`` with a QR re-orthonormalization after
    every product, then a Rayleigh-Ritz step extracts the top ``r``
    directions from the (oversampled) iterated subspace.

    Parameters
    ----------
    X : array_like, shape (m, n)
    r : int
        Target rank, ``1 <= r <= min(m, n)``.
    power_iters : int
        Number of ``X X^T`` applications, at least 1.
    seed : int
        Seed of the Gaussian start; the result is a deterministic function
        of ``(X, r, power_iters, seed, oversampling)``.
    oversampling : int
        Extra columns carried through the iteration (capped at ``min(m, n)``).
    """
    X = as_data_matrix(X)
    m, n = X.shape
    if not 1 <= r <= min(m, n):
        raise DimensionError(f"rank r={r} must lie in [1, min(m, n)={min(m, n)}]")
    if power_iters < 1:
        raise ParameterError("power_iters must be >= 1")
    k = min(r + max(int(oversampling), 0), m, n)

    omega = seeded_stream(seed, _SVD_STREAM).standard_normal((n, k))
    Q, _ = np.linalg.qr(X @ omega)
    for _ in range(power_iters):
        Z, _ = np.linalg.qr(X.T @ Q)
        Q, _ = np.linalg.qr(X @ Z)

    U, _, _ = np.linalg.svd(Q.T @ X, full_matrices=False)
    return Q @ U[:, :r]


def projector_apply(V, x):
    """Apply ``I - V V^T`` to ``x`` (a vector or the columns of a matrix)."""
    V = np.asarray(V, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != V.shape[0]:
        raise DimensionError(f"vector length {x.shape[0]} does not match basis rows {V.shape[0]}")
    if V.shape[1] == 0:
        return x.copy()
    return x - V @ (V.T @ x)


def projector_extend(V, w, rtol=DEGENERATE_RTOL):
    """Return ``V`` with the normalized residual of ``w`` appended.

    The residual is computed with one round of re-orthogonalization so the
    basis stays orthonormal to working precision. Raises
    :class:`RankDeficiencyError` when ``w`` is (numerically) in ``span(V)``.
    """
    V = np.asarray(V, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64).reshape(-1)
    res = projector_apply(V, w)
    res_norm = np.linalg.norm(res)
    if not res_norm > rtol * np.linalg.norm(w):
        raise RankDeficiencyError(
            f"vector lies in the span of the current {V.shape[1]}-dimensional basis "
            f"(residual norm {res_norm:.3e})"
        )
    res = projector_apply(V, res)
    v = res / np.linalg.norm(res)
    return np.column_stack([V, v])
