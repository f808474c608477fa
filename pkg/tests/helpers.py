import numpy as np

from ssnmf.datagen import SyntheticSpec, generate


def two_cluster_data(w1, w2, size=10, jitter=0.01, seed=0):
    """``2 x 2*size`` matrix: ``size`` jittered copies of ``w1`` then of ``w2``."""
    rng = np.random.default_rng(seed)
    A = np.asarray(w1, float)[:, None] + jitter * rng.standard_normal((2, size))
    B = np.asarray(w2, float)[:, None] + jitter * rng.standard_normal((2, size))
    return np.hstack([A, B])


def mixes_clusters(S, size=10):
    S = {int(j) for j in S}
    return not (S <= set(range(size)) or S <= set(range(size, 2 * size)))


def random_instance(i, m=30, n=200, r=5, epsilons=(0.0, 0.01, 0.1), alphas=(0.05, 0.2, 1.0)):
    """Instance ``i`` of a small synthetic family cycling through noise levels and alphas."""
    spec = SyntheticSpec(m=m, n=n, r=r, alpha=alphas[(i // len(epsilons)) % len(alphas)],
                         epsilon=epsilons[i % len(epsilons)], seed=1000 + i)
    return generate(spec)
