import numpy as np
from scipy.spatial.distance import pdist, squareform
from scipy.stats import rankdata

from ..data import ConnectivityMatrix, as_response_matrix
from ..errors import DegenerateMatrixError, DimensionError
from .connectivity import check_same_stimuli, pearson
from .matching import AlignmentScore


def build_rdm(d, metric="correlation") -> ConnectivityMatrix:
    """Stimulus x stimulus dissimilarities: ``1 - r`` or Euclidean distance."""
    d = as_response_matrix(d)
    X = d.data
    if X.shape[0] < 3:
        raise DimensionError("an RDM needs at least 3 stimuli")
    if metric == "correlation":
        Xc = X - X.mean(axis=1, keepdims=True)
        norms = np.linalg.norm(Xc, axis=1)
        if np.any(norms == 0):
            row = int(np.flatnonzero(norms == 0)[0])
            raise DegenerateMatrixError(f"stimulus row {row} is constant; correlation distance undefined")
        Z = Xc / norms[:, None]
        rdm = np.clip(1.0 - Z @ Z.T, 0.0, 2.0)
    elif metric == "euclidean":
        rdm = squareform(pdist(X, metric="euclidean"))
    else:
        raise ValueError(f"unknown RDM metric {metric!r}")
    return ConnectivityMatrix(rdm, "rdm", d.stimulus_ids)


def rsa_score(a: ConnectivityMatrix, b: ConnectivityMatrix) -> AlignmentScore:
    """Spearman rank correlation (average ranks for ties) of upper triangles."""
    check_same_stimuli(a, b)
    value = pearson(rankdata(a.upper()), rankdata(b.upper()))
    return AlignmentScore(
        value=value,
        metric="rsa",
        n_stimuli=len(a.stimulus_ids),
        metadata={"kinds": [a.kind, b.kind]},
    )
