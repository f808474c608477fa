import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import nnls_objective_by_enumeration
from ssnmf import NnlsSettings, nnls_cd, relative_error
from ssnmf.errors import DimensionError, InputError, ParameterError

TIGHT = NnlsSettings(max_sweeps=20000, rel_tol=1e-14)


def kkt_violation(X, W, H):
    """Largest KKT violation relative to ``||W(:,k)|| ||X(:,j)||``."""
    G = W.T @ (X - W @ H)
    scale = np.outer(np.linalg.norm(W, axis=0), np.linalg.norm(X, axis=0))
    scale = np.where(scale > 0, scale, 1.0)
    active = np.where(H > 0, np.abs(G), np.maximum(G, 0.0))
    return float(np.max(active / scale))


def test_identity_one_sweep(rng):
    X = rng.random((5, 7))
    trace = []
    H = nnls_cd(X, np.eye(5), NnlsSettings(max_sweeps=1), trace=trace)
    np.testing.assert_array_equal(H, X)
    assert len(trace) == 2


def test_orthonormal_columns_recover_h0(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((10, 4)))
    H0 = rng.random((4, 12))
    H = nnls_cd(Q @ H0, Q)
    np.testing.assert_allclose(H, H0, atol=1e-8)


@pytest.mark.parametrize("seed", range(20))
def test_matches_enumeration_oracle(seed):
    rng = np.random.default_rng(seed)
    W = rng.random((8, 4))
    X = rng.standard_normal((8, 6)) + 0.5
    H = nnls_cd(X, W, TIGHT)
    assert abs(np.linalg.norm(X - W @ H) - nnls_objective_by_enumeration(W, X)) <= 1e-6
    assert kkt_violation(X, W, H) <= 1e-6
    assert np.all(H >= 0)


def test_objective_non_increasing(rng):
    W = rng.random((20, 6))
    X = rng.random((20, 50))
    trace = []
    nnls_cd(X, W, NnlsSettings(max_sweeps=300, rel_tol=1e-12), trace=trace)
    assert all(b <= a * (1 + 1e-13) + 1e-13 for a, b in zip(trace, trace[1:]))


def test_warm_start(rng):
    W = rng.random((8, 3))
    H0 = rng.random((3, 5))
    X = W @ H0
    trace = []
    H = nnls_cd(X, W, NnlsSettings(init="given"), H0=H0, trace=trace)
    assert trace[0] <= 1e-12 * np.sum(X * X)
    np.testing.assert_allclose(H, H0, atol=1e-10)
    with pytest.raises(ParameterError):
        nnls_cd(X, W, NnlsSettings(init="given"))
    with pytest.raises(DimensionError):
        nnls_cd(X, W, NnlsSettings(init="given"), H0=np.ones((3, 4)))


def test_column_decoupling(rng):
    W = rng.random((9, 3))
    X = rng.random((9, 8))
    H = nnls_cd(X, W, TIGHT)
    for j in range(8):
        # the stopping test is global, so agreement is up to convergence depth
        h = nnls_cd(X[:, j:j + 1], W, TIGHT)
        np.testing.assert_allclose(h[:, 0], H[:, j], atol=1e-6)


def test_errors():
    X = np.ones((3, 2))
    W = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(ParameterError):
        nnls_cd(X, W)
    with pytest.raises(DimensionError):
        nnls_cd(X, np.ones((4, 2)))
    with pytest.raises(InputError):
        nnls_cd(np.array([[np.nan]]), np.ones((1, 1)))
    with pytest.raises(ParameterError):
        NnlsSettings(rel_tol=0)
    with pytest.raises(ParameterError):
        NnlsSettings(max_sweeps=0)


class TestRelativeError:
    def test_exact_factorization(self, rng):
        W = rng.random((12, 4))
        X = W @ rng.random((4, 30))
        assert relative_error(X, W) <= 1e-6

    def test_orthogonal_w_gives_one(self):
        X = np.array([[1.0, 2.0], [0.0, 0.0]])
        W = np.array([[0.0], [3.0]])
        assert relative_error(X, W) == 1.0

    def test_negative_correlation_gives_one(self):
        # best nonnegative coefficient is 0
        X = np.array([[1.0], [1.0]])
        assert relative_error(X, -X) == 1.0

    def test_zero_x_rejected(self):
        with pytest.raises(ParameterError):
            relative_error(np.zeros((3, 3)), np.ones((3, 1)))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 6))
def test_relative_error_in_unit_interval(seed, r, n):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((6, n))
    W = rng.standard_normal((6, r))
    e = relative_error(X, W)
    assert 0.0 <= e <= 1.0 + 1e-12
