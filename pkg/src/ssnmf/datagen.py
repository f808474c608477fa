"""Synthetic separable data: ``X = W H + N`` with ``H = [I_r, H']``,
Dirichlet-distributed ``H'`` and Gaussian noise of prescribed relative norm.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InputError, ParameterError
from .linalg import seeded_stream

MAX_CONDITION = 100.0
_W_STREAM, _H_STREAM, _N_STREAM = 0, 1, 2


def log_standard_gamma(shape, size, rng):
    """Logarithm of ``Gamma(shape, 1)`` variates.

    Marsaglia-Tsang squeeze/rejection for ``shape >= 1``. For ``shape < 1``
    the boost ``G(a) = G(a + 1) * U^(1/a)`` is applied in log space, which
    keeps tiny shapes such as 0.01 free of underflow.
    """
    if not shape > 0:
        raise ParameterError(f"gamma shape must be > 0, got {shape}")
    size = tuple(np.atleast_1d(size))
    count = int(np.prod(size))
    a = shape + 1.0 if shape < 1 else float(shape)
    d = a - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)

    out = np.empty(count)
    pending = np.arange(count)
    while pending.size:
        x = rng.standard_normal(pending.size)
        u = rng.random(pending.size)
        v = (1.0 + c * x) ** 3
        ok = v > 0
        logv = np.log(np.where(ok, v, 1.0))
        accept = ok & (
            (u < 1.0 - 0.0331 * x**4) | (np.log(u) < 0.5 * x**2 + d * (1.0 - v + logv))
        )
        out[pending[accept]] = np.log(d) + logv[accept]
        pending = pending[~accept]

    if shape < 1:
        out += np.log(rng.random(count)) / shape
    return out.reshape(size)


def dirichlet_columns(alpha, r, n, rng):
    """``r x n`` matrix whose columns are i.i.d. symmetric Dirichlet(alpha) draws."""
    if not alpha > 0:
        raise ParameterError(f"alpha must be > 0, got {alpha}")
    logg = log_standard_gamma(alpha, (r, n), rng)
    logg -= logg.max(axis=0)
    g = np.exp(logg)
    return g / g.sum(axis=0)


def dirichlet_column(alpha, r, rng):
    """One symmetric Dirichlet(alpha) draw of length ``r``."""
    return dirichlet_columns(alpha, r, 1, rng)[:, 0]


@dataclass(frozen=True)
class SyntheticSpec:
    m: int = 224
    n: int = 1000
    r: int = 10
    alpha: float = 0.05
    epsilon: float = 0.0
    seed: int = 0
    W_source: object = "random"
    noise_seed: int | None = None

    def __post_init__(self):
        if min(self.m, self.n, self.r) < 1:
            raise ParameterError("m, n and r must be positive")
        if self.n < self.r:
            raise ParameterError(f"n={self.n} must be >= r={self.r} (identity block)")
        if not self.alpha > 0:
            raise ParameterError("alpha must be > 0")
        if self.epsilon < 0:
            raise ParameterError("epsilon must be >= 0")


@dataclass(frozen=True)
class SyntheticInstance:
    X: np.ndarray
    W_true: np.ndarray
    H_true: np.ndarray
    noise_norm: float


def random_endmembers(m, r, rng, max_condition=MAX_CONDITION):
    """Uniform [0, 1] ``m x r`` matrix, redrawn until its condition number is small."""
    if r > m:
        raise ParameterError(f"cannot draw a full-rank {m}x{r} endmember matrix")
    for _ in range(1000):
        W = rng.random((m, r))
        if np.linalg.cond(W) <= max_condition:
            return W
    raise ParameterError(f"no {m}x{r} draw reached condition number <= {max_condition}")


def _load_endmembers(source, m, r):
    if isinstance(source, np.ndarray):
        W = source
    else:
        from .io import read_any_matrix

        try:
            W = read_any_matrix(source)
        except OSError as exc:
            raise InputError(f"cannot read endmember file {source}: {exc}") from exc
    if W.shape != (m, r):
        raise DimensionError(f"endmember matrix has shape {W.shape}, expected {(m, r)}")
    return np.asarray(W, dtype=np.float64)


def endmembers_for(spec):
    if isinstance(spec.W_source, str) and spec.W_source == "random":
        return random_endmembers(spec.m, spec.r, seeded_stream(spec.seed, _W_STREAM))
    return _load_endmembers(spec.W_source, spec.m, spec.r)


def abundances_for(spec):
    H = np.empty((spec.r, spec.n))
    H[:, : spec.r] = np.eye(spec.r)
    if spec.n > spec.r:
        H[:, spec.r :] = dirichlet_columns(
            spec.alpha, spec.r, spec.n - spec.r, seeded_stream(spec.seed, _H_STREAM)
        )
    return H


def add_noise(WH, epsilon, rng):
    """``WH + N`` with Gaussian ``N`` rescaled so ``||N||_F = epsilon ||WH||_F``."""
    if epsilon == 0:
        return WH.copy(), 0.0
    N = rng.standard_normal(WH.shape)
    N *= epsilon * np.linalg.norm(WH) / np.linalg.norm(N)
    return WH + N, float(np.linalg.norm(N))


def generate(spec, W=None, H=None):
    """Build a synthetic instance. ``W``/``H`` may be passed to reuse them
    across a noise sweep; otherwise they are derived from ``spec``."""
    W = endmembers_for(spec) if W is None else W
    H = abundances_for(spec) if H is None else H
    noise_seed = spec.seed if spec.noise_seed is None else spec.noise_seed
    X, noise_norm = add_noise(W @ H, spec.epsilon, seeded_stream(noise_seed, _N_STREAM))
    return SyntheticInstance(X, W, H, noise_norm)
