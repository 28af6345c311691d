"""Lee-Seung multiplicative-update NMF, plain and with an L1 penalty on W."""

import numpy as np

from ..data import Factorization, as_response_matrix
from ..rng import seeded_rng
from ._common import check_components, init_factors, require_nonnegative

EPS = 1e-12


def _multiplicative_updates(D, R, W, n_iter, l1_penalty):
    errors = [float(np.linalg.norm(D - R @ W))]
    for _ in range(n_iter):
        W *= (R.T @ D) / (R.T @ R @ W + l1_penalty + EPS)
        R *= (D @ W.T) / (R @ (W @ W.T) + EPS)
        if l1_penalty > 0:
            # unit-norm responses stop the penalty being dodged by rescaling
            norms = np.linalg.norm(R, axis=0)
            norms[norms == 0] = 1.0
            R /= norms
            W *= norms[:, None]
        errors.append(float(np.linalg.norm(D - R @ W)))
    return R, W, errors


def _run(d, c, n_iter, seed, l1_penalty, method):
    d = as_response_matrix(d)
    require_nonnegative(d)
    S, V = d.shape
    check_components(c, min(S, V))
    if n_iter < 1:
        raise ValueError("n_iter must be positive")
    if l1_penalty < 0:
        raise ValueError("l1_penalty must be non-negative")
    rng = seeded_rng(seed, "nmf")
    R, Wt = init_factors(d, c, rng)
    R, W, errors = _multiplicative_updates(d.data, R, np.ascontiguousarray(Wt.T), n_iter, l1_penalty)
    params = {"c": c, "n_iter": n_iter}
    if method == "snmf":
        params["l1_penalty"] = float(l1_penalty)
    return Factorization(
        responses=R,
        weights=W,
        method=method,
        seed=int(seed),
        stimulus_ids=d.stimulus_ids,
        unit_ids=d.unit_ids,
        params=params,
        diagnostics={"reconstruction_error": errors},
    )


def nmf_decompose(d, c, n_iter=500, seed=0) -> Factorization:
    """Standard NMF minimizing the Frobenius error.

    ``diagnostics["reconstruction_error"]`` traces ``||D - RW||_F`` from the
    initialization through every iteration; it is non-increasing.
    """
    return _run(d, c, n_iter, seed, 0.0, "nmf")


def snmf_decompose(d, c, l1_penalty=0.1, n_iter=500, seed=0) -> Factorization:
    """Sparse NMF: Frobenius error plus ``l1_penalty * sum(W)``.

    Only W is penalized. After each iteration the columns of R are scaled to
    unit L2 norm (and the rows of W compensated). With ``l1_penalty == 0``
    this is exactly :func:`nmf_decompose`.
    """
    return _run(d, c, n_iter, seed, float(l1_penalty), "snmf")
