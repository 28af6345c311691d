"""Rectified (non-negatively truncated) Gaussian sampling by inverse CDF.

A draw from N(mu, sd^2) restricted to [0, inf) is obtained from one uniform
``u`` in (0, 1]. With ``a = -mu / sd`` the standardized lower bound, the
reflected variable ``-z`` has CDF ``Phi(y) / Phi(-a)`` on ``(-inf, -a]`` so

    z = -Phi^{-1}(u * Phi(-a)),

evaluated in log space (``ndtri_exp``/``log_ndtr``) so deep tails, where
``Phi(-a)`` underflows, stay accurate. One uniform per draw keeps the random
stream layout fixed, which the compiled kernel relies on to reproduce the
numpy path.
"""

import numpy as np
from scipy.special import log_ndtr, ndtri_exp


def rectified_normal_from_uniform(mu, sd, u):
    """Map uniforms ``u`` in (0, 1] to rectified-normal draws (vectorized)."""
    mu = np.asarray(mu, dtype=np.float64)
    sd = np.asarray(sd, dtype=np.float64)
    a = -mu / sd
    z = -ndtri_exp(np.log(u) + log_ndtr(-a))
    z = np.maximum(z, a)
    return np.maximum(mu + sd * z, 0.0)


def sample_rectified_normal(mean, variance, size, rng):
    """Draw ``size`` samples from N(mean, variance) truncated to [0, inf)."""
    u = 1.0 - rng.random(size)
    return rectified_normal_from_uniform(mean, np.sqrt(variance), u)


def truncated_normal_moments(mean, variance):
    """Analytic mean and variance of N(mean, variance) truncated to [0, inf)."""
    from scipy.stats import truncnorm

    sd = np.sqrt(variance)
    dist = truncnorm(-mean / sd, np.inf, loc=mean, scale=sd)
    return float(dist.mean()), float(dist.var())
