"""Vertex extraction: VCA, SPA, ALLS and the smoothed variants SVCA, SSPA.

Every algorithm runs ``r`` greedy steps. A step picks a set of columns of
``X``, aggregates them into one endmember estimate and removes that
direction from the data through an implicit orthogonal-complement
projector. The algorithms differ in how the scoring direction is chosen
(random within the dominant subspace, or the largest residual column) and
in the rule turning scores into a selected set.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ParameterError, RankDeficiencyError
from .linalg import (
    DEFAULT_POWER_ITERS,
    as_data_matrix,
    empty_basis,
    mix_seed,
    projector_apply,
    projector_extend,
    seeded_stream,
    truncated_svd_basis,
)
from .selection import top_p_abs, top_p_signed_extreme, top_p_signed_median

ALGORITHMS = ("vca", "spa", "alls", "svca", "sspa")
AGGREGATIONS = ("mean", "median")
RANDOMIZED = ("vca", "alls", "svca")


@dataclass(frozen=True)
class AlgoConfig:
    r: int
    p: int = 1
    aggregation: str = "median"
    seed: int = 0
    power_iters: int = DEFAULT_POWER_ITERS

    def __post_init__(self):
        if self.r < 1:
            raise ParameterError(f"r must be >= 1, got {self.r}")
        if self.p < 1:
            raise ParameterError(f"p must be >= 1, got {self.p}")
        if self.aggregation not in AGGREGATIONS:
            raise ParameterError(f"aggregation must be one of {AGGREGATIONS}, got {self.aggregation!r}")
        if self.power_iters < 1:
            raise ParameterError("power_iters must be >= 1")


@dataclass(frozen=True)
class ExtractionResult:
    """Estimated endmembers and the column sets they were built from.

    ``selected_sets[k]`` holds the sorted 0-based column indices aggregated
    into ``endmembers[:, k]``; ``signs[k]`` is +1 when the set maximized the
    step's score and -1 when it minimized it. ``pivots`` lists the column
    that defined each step's direction for SPA/SSPA (empty otherwise).
    """

    endmembers: np.ndarray
    selected_sets: tuple
    signs: tuple
    algorithm: str
    p: int
    aggregation: str
    pivots: tuple = field(default=())

    @property
    def r(self):
        return self.endmembers.shape[1]

    @property
    def indices(self):
        """First index of each selected set (the extracted column when p = 1)."""
        return [int(s[0]) for s in self.selected_sets]

    def to_json(self):
        return {
            "algorithm": self.algorithm,
            "p": self.p,
            "aggregation": self.aggregation,
            "signs": list(self.signs),
            "selected_sets": [[int(j) for j in s] for s in self.selected_sets],
            "pivots": [int(j) for j in self.pivots],
        }


def aggregate(X, S, method="median"):
    """Coordinate-wise mean or median of the columns ``X[:, S]``."""
    S = np.asarray(S, dtype=np.intp).reshape(-1)
    if S.size == 0:
        raise ParameterError("cannot aggregate an empty column set")
    cols = np.asarray(X)[:, S]
    if method == "mean":
        return cols.mean(axis=1)
    if method == "median":
        return np.median(cols, axis=1)
    raise ParameterError(f"unknown aggregation {method!r}")


def _config(cfg, kwargs):
    if cfg is None:
        return AlgoConfig(**kwargs)
    if kwargs:
        raise TypeError("pass either an AlgoConfig or keyword arguments, not both")
    return cfg


def _check_sizes(X, cfg):
    m, n = X.shape
    if cfg.r > min(m, n):
        raise ParameterError(f"r={cfg.r} exceeds min(m, n)={min(m, n)}")
    if cfg.p > n:
        raise ParameterError(f"p={cfg.p} exceeds the number of columns n={n}")


def _extend(V, w, algorithm, k):
    try:
        return projector_extend(V, w)
    except RankDeficiencyError as exc:
        raise RankDeficiencyError(f"{algorithm}: step {k + 1} produced a degenerate endmember; {exc}") from None


def _argmax_abs(u):
    return np.array([int(np.argmax(np.abs(u)))]), 1


def _random_direction_extraction(X, cfg, algorithm, select, aggregation):
    """Shared loop of VCA, ALLS and SVCA.

    Step k scores the columns with ``(P d_k)^T X`` where ``d_k = Y g_k``,
    ``Y`` spans the dominant rank-r left subspace and ``g_k`` is drawn from
    the stream ``(seed, k)``.
    """
    X = as_data_matrix(X)
    _check_sizes(X, cfg)
    m = X.shape[0]
    Y = truncated_svd_basis(X, cfg.r, power_iters=cfg.power_iters, seed=cfg.seed)
    V = empty_basis(m)
    W = np.empty((m, cfg.r))
    sets, signs = [], []
    for k in range(cfg.r):
        d = Y @ seeded_stream(cfg.seed, k).standard_normal(cfg.r)
        u = projector_apply(V, d) @ X
        S, sign = select(u)
        W[:, k] = aggregate(X, S, aggregation)
        V = _extend(V, W[:, k], algorithm, k)
        sets.append(S)
        signs.append(sign)
    return ExtractionResult(W, tuple(sets), tuple(signs), algorithm, cfg.p, aggregation)


def vca(X, cfg=None, **kwargs):
    """Vertex component analysis: one column per step, maximizing ``|u|``."""
    cfg = _config(cfg, kwargs)
    if cfg.p != 1:
        raise ParameterError("vca selects single columns; use alls/svca for p > 1")
    return _random_direction_extraction(X, cfg, "vca", _argmax_abs, "mean")


def alls(X, cfg=None, **kwargs):
    """Learning a latent simplex: average of the ``p`` columns with largest ``|u|``."""
    cfg = _config(cfg, kwargs)
    return _random_direction_extraction(X, cfg, "alls", lambda u: (top_p_abs(u, cfg.p), 1), "mean")


def svca(X, cfg=None, **kwargs):
    """Smoothed VCA: the ``p`` largest or ``p`` smallest scores, by signed median."""
    cfg = _config(cfg, kwargs)
    return _random_direction_extraction(
        X, cfg, "svca", lambda u: top_p_signed_median(u, cfg.p), cfg.aggregation
    )


def _successive_projection(X, cfg, algorithm, smoothed, callback):
    """Shared loop of SPA and SSPA.

    ``q`` holds the squared residual norms ``||P X(:, j)||^2`` and is
    downdated with the squared coefficients on each new basis vector.
    """
    X = as_data_matrix(X)
    _check_sizes(X, cfg)
    m = X.shape[0]
    q = np.einsum("ij,ij->j", X, X)
    V = empty_basis(m)
    W = np.empty((m, cfg.r))
    sets, signs, pivots = [], [], []
    for k in range(cfg.r):
        j = int(np.argmax(q))
        if smoothed:
            u = projector_apply(V, X[:, j]) @ X
            S, sign = top_p_signed_extreme(u, cfg.p)
            W[:, k] = aggregate(X, S, cfg.aggregation)
        else:
            S, sign = np.array([j]), 1
            W[:, k] = X[:, j]
        V = _extend(V, W[:, k], algorithm, k)
        q = q - (V[:, -1] @ X) ** 2
        sets.append(S)
        signs.append(sign)
        pivots.append(j)
        if callback is not None:
            callback(k, V, q)
    aggregation = cfg.aggregation if smoothed else "mean"
    p = cfg.p if smoothed else 1
    return ExtractionResult(W, tuple(sets), tuple(signs), algorithm, p, aggregation, tuple(pivots))


def spa(X, cfg=None, callback=None, **kwargs):
    """Successive projection algorithm (deterministic).

    ``callback(k, V, q)``, if given, is called after step ``k`` with the
    current basis and the maintained squared residual norms.
    """
    cfg = _config(cfg, kwargs)
    if cfg.p != 1:
        raise ParameterError("spa selects single columns; use sspa for p > 1")
    return _successive_projection(X, cfg, "spa", False, callback)


def sspa(X, cfg=None, callback=None, **kwargs):
    """Smoothed SPA: score columns against the largest residual column and
    aggregate the ``p`` most extreme ones (deterministic)."""
    cfg = _config(cfg, kwargs)
    return _successive_projection(X, cfg, "sspa", True, callback)


_DISPATCH = {"vca": vca, "spa": spa, "alls": alls, "svca": svca, "sspa": sspa}


def extract(X, algorithm, cfg):
    try:
        fn = _DISPATCH[algorithm]
    except KeyError:
        raise ParameterError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}") from None
    return fn(X, cfg)


def extract_best(X, algorithm, cfg, trials=1, settings=None):
    """Run a randomized algorithm ``trials`` times and keep the run with the
    smallest relative reconstruction error.

    Trial ``t`` uses seed ``mix_seed(cfg.seed, t)`` (trial 0 uses ``cfg.seed``
    itself). Deterministic algorithms run once. Returns ``(result, rel_error)``.
    """
    from .solver import relative_error

    if trials < 1:
        raise ParameterError("trials must be >= 1")
    if algorithm not in RANDOMIZED:
        trials = 1
    best = None
    for t in range(trials):
        seed = cfg.seed if t == 0 else mix_seed(cfg.seed, t)
        res = extract(X, algorithm, replace(cfg, seed=seed))
        err = relative_error(X, res.endmembers, settings)
        if best is None or err < best[1]:
            best = (res, err)
    return best
