"""Bayesian NMF with exponential priors, inferred by Gibbs sampling.

Model: ``D = R W + E`` with ``E ~ N(0, sigma2)`` iid, ``R[s, c] ~ Exp(rho)``,
``W[c, v] ~ Exp(gamma)`` and ``sigma2 ~ InvGamma(alpha, beta)``. The full
conditional of every factor entry is a rectified Gaussian and that of
``sigma2`` is inverse-gamma, so each sweep resamples all of R, then all of
W, then sigma2.
"""

from __future__ import annotations

import numpy as np

from ..data import Factorization, GibbsConfig, as_response_matrix
from ..rng import seeded_rng
from ._backend import default_backend, get_kernel
from ._common import check_components, init_factors, label_ranks


def _rates(rate, shape):
    return np.ascontiguousarray(np.broadcast_to(np.asarray(rate, dtype=np.float64), shape))


def bnmf_decompose(d, c, cfg: GibbsConfig | None = None, seed: int = 0, backend=None) -> Factorization:
    """Run one Gibbs chain and return its point estimate.

    Parameters
    ----------
    d : ResponseMatrix or array_like
        Real-valued stimuli x units matrix; negative entries are allowed.
    c : int
        Number of components, ``1 <= c <= min(S, V)``.
    cfg : GibbsConfig, optional
        Chain length, burn-in, priors and point-estimate rule.
    seed : int
        Seed of the chain. Output is bit-reproducible for a given backend.
    backend : {"cython", "python"}, optional
        Kernel used for the factor updates. Defaults to the compiled one.

    Returns
    -------
    Factorization
        ``method="bnmf"``; ``diagnostics["sigma2_trace"]`` holds the
        sampled noise variance of every sweep.
    """
    d = as_response_matrix(d)
    cfg = cfg or GibbsConfig()
    S, V = d.shape
    check_components(c, min(S, V))
    kernel = get_kernel(backend)
    priors = cfg.priors
    D = np.ascontiguousarray(d.data)
    Dt = np.ascontiguousarray(D.T)

    rho = _rates(priors.response_rate, (S, c))
    gamma_t = np.ascontiguousarray(_rates(priors.weight_rate, (c, V)).T)
    srank = label_ranks(d.stimulus_ids)
    urank = label_ranks(d.unit_ids)

    rng = seeded_rng(seed, "bnmf")
    R, Wt = init_factors(d, c, rng)
    power = float(np.mean(D * D))
    sigma2 = power if power > 0 else priors.noise_scale / (priors.noise_shape + 1.0)
    post_shape = priors.noise_shape + 0.5 * S * V

    sum_R = np.zeros_like(R)
    sum_Wt = np.zeros_like(Wt)
    sum_s2 = 0.0
    n_kept = 0
    trace = np.empty(cfg.n_sweeps)
    for sweep in range(cfg.n_sweeps):
        u_r = np.ascontiguousarray((1.0 - rng.random((S, c)))[srank])
        u_w = np.ascontiguousarray((1.0 - rng.random((V, c)))[urank])
        g = rng.standard_gamma(post_shape)

        kernel(R, np.ascontiguousarray(D @ Wt), np.ascontiguousarray(Wt.T @ Wt), sigma2, rho, u_r)
        kernel(Wt, np.ascontiguousarray(Dt @ R), np.ascontiguousarray(R.T @ R), sigma2, gamma_t, u_w)
        resid = D - R @ Wt.T
        sigma2 = (priors.noise_scale + 0.5 * float(np.sum(resid * resid))) / g
        trace[sweep] = sigma2

        if sweep >= cfg.burn_in:
            sum_R += R
            sum_Wt += Wt
            sum_s2 += sigma2
            n_kept += 1

    if cfg.point_estimate == "posterior_mean":
        R_hat, W_hat, s2_hat = sum_R / n_kept, (sum_Wt / n_kept).T, sum_s2 / n_kept
    else:
        R_hat, W_hat, s2_hat = R.copy(), Wt.T.copy(), sigma2
    return Factorization(
        responses=R_hat,
        weights=W_hat,
        method="bnmf",
        noise_variance=float(s2_hat),
        seed=int(seed),
        stimulus_ids=d.stimulus_ids,
        unit_ids=d.unit_ids,
        params={"c": c, **cfg.to_dict(), "backend": backend or default_backend()},
        diagnostics={"sigma2_trace": trace},
    )
