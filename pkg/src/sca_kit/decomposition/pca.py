import numpy as np

from ..data import Factorization, as_response_matrix
from ._common import check_components


def sign_convention(W, R=None):
    """Flip rows of ``W`` (and matching columns of ``R``) so that the
    largest-magnitude entry of each row is positive."""
    W = np.array(W, dtype=np.float64)
    idx = np.argmax(np.abs(W), axis=1)
    signs = np.sign(W[np.arange(W.shape[0]), idx])
    signs[signs == 0] = 1.0
    W *= signs[:, None]
    if R is None:
        return W
    return W, np.asarray(R, dtype=np.float64) * signs[None, :]


def pca_decompose(d, c) -> Factorization:
    """PCA of the column-centered matrix via SVD.

    ``responses`` are the scores (S x c), ``weights`` the loadings (c x V)
    with orthonormal rows, ``center`` the column means.
    """
    d = as_response_matrix(d)
    S, V = d.shape
    check_components(c, min(S - 1, V), what="min(S - 1, V)")
    center = d.data.mean(axis=0)
    U, s, Vt = np.linalg.svd(d.data - center, full_matrices=False)
    W, R = sign_convention(Vt[:c], U[:, :c] * s[:c])
    return Factorization(
        responses=R,
        weights=W,
        method="pca",
        center=center,
        stimulus_ids=d.stimulus_ids,
        unit_ids=d.unit_ids,
        params={"c": c},
        diagnostics={"singular_values": s},
    )
