"""Pure-numpy Gibbs factor update (fallback for the compiled kernel)."""

import numpy as np

from .truncnorm import rectified_normal_from_uniform

TINY = 1e-300


def sample_factor(X, B, G, sigma2, rate, U):
    """Resample every entry of ``X`` (n x C) in place, one column at a time.

    For the model ``D ~ N(X Y^T, sigma2)`` with ``Y`` fixed, ``B = D Y`` and
    ``G = Y^T Y``. Entries of one column are conditionally independent given
    the other columns, so each column is a vectorized rectified-normal draw.
    A column whose partner has zero norm is drawn from its exponential prior.
    """
    n, C = X.shape
    cols = np.arange(C)
    for c in range(C):
        nrm = G[c, c]
        if nrm <= TINY:
            X[:, c] = -np.log(U[:, c]) / rate[:, c]
            continue
        others = cols != c
        acc = X[:, others] @ G[others, c]
        mu = (B[:, c] - acc - rate[:, c] * sigma2) / nrm
        sd = np.sqrt(sigma2 / nrm)
        X[:, c] = rectified_normal_from_uniform(mu, sd, U[:, c])
