"""Matrix decomposition engines: PCA, NMF, sparse NMF and Bayesian NMF."""

import numpy as np

from ..data import Factorization, GibbsConfig, PriorSpec, as_response_matrix
from ..errors import DimensionError, UndefinedVarianceError
from ._backend import available_backends, default_backend
from ._common import preprocess
from .bnmf import bnmf_decompose
from .nmf import nmf_decompose, snmf_decompose
from .pca import pca_decompose, sign_convention
from .truncnorm import sample_rectified_normal

__all__ = [
    "GibbsConfig",
    "PriorSpec",
    "available_backends",
    "bnmf_decompose",
    "decompose",
    "default_backend",
    "explained_variance",
    "nmf_decompose",
    "pca_decompose",
    "preprocess",
    "sample_rectified_normal",
    "sign_convention",
    "snmf_decompose",
]


def decompose(d, method, c, seed=0, cfg=None, n_iter=500, l1_penalty=0.1, backend=None):
    """Dispatch to one of the four engines by name."""
    if method == "bnmf":
        return bnmf_decompose(d, c, cfg=cfg, seed=seed, backend=backend)
    if method == "nmf":
        return nmf_decompose(d, c, n_iter=n_iter, seed=seed)
    if method == "snmf":
        return snmf_decompose(d, c, l1_penalty=l1_penalty, n_iter=n_iter, seed=seed)
    if method == "pca":
        return pca_decompose(d, c)
    raise ValueError(f"unknown method {method!r}")


def explained_variance(d, f: Factorization) -> float:
    """``1 - ||D - D_hat||^2 / ||D - colmean(D)||^2``.

    For PCA the reconstruction includes the column means removed before the
    SVD. Raises UndefinedVarianceError for a matrix with constant columns.
    """
    D = as_response_matrix(d).data
    if f.responses.shape[0] != D.shape[0] or f.weights.shape[1] != D.shape[1]:
        raise DimensionError(
            f"factorization {f.responses.shape} x {f.weights.shape} does not match data {D.shape}"
        )
    total = float(np.sum((D - D.mean(axis=0)) ** 2))
    if total == 0.0:
        raise UndefinedVarianceError("data has zero variance about its column means")
    resid = D - f.reconstruction()
    return 1.0 - float(np.sum(resid * resid)) / total
