"""Image connectivity matrices and Sparse Component Alignment."""

from __future__ import annotations

import numpy as np

from ..data import ConnectivityMatrix, GibbsConfig, as_response_matrix
from ..errors import DegenerateMatrixError, StimulusMismatchError
from .matching import AlignmentScore


def dominant_components(responses):
    """Index of the highest-responding component for each stimulus.

    Ties go to the lowest component index (``np.argmax`` semantics).
    """
    return np.argmax(np.asarray(responses), axis=1)


def icm_from_responses(response_list, stimulus_ids=None) -> ConnectivityMatrix:
    """Average the co-assignment matrices of several S x C response matrices."""
    response_list = list(response_list)
    if not response_list:
        raise ValueError("need at least one response matrix")
    S = np.shape(response_list[0])[0]
    total = np.zeros((S, S))
    for R in response_list:
        top = dominant_components(R)
        total += top[:, None] == top[None, :]
    icm = total / len(response_list)
    if stimulus_ids is None:
        stimulus_ids = tuple(f"s{i}" for i in range(S))
    return ConnectivityMatrix(icm, "icm", stimulus_ids, n_runs=len(response_list))


def build_icm(d, c, n_runs, cfg: GibbsConfig | None = None, seed=0, jobs=1, backend=None) -> ConnectivityMatrix:
    """ICM over ``n_runs`` Bayesian NMF chains of ``d``.

    Run ``i`` uses the same derived seed as run ``i`` of a consensus with
    the same master seed.
    """
    from ..consensus import bnmf_runs

    d = as_response_matrix(d)
    if n_runs < 1:
        raise ValueError("n_runs must be positive")
    runs = bnmf_runs(d, c, n_runs, cfg=cfg, seed=seed, jobs=jobs, backend=backend)
    return icm_from_responses([f.responses for f in runs], d.stimulus_ids)


def check_same_stimuli(a: ConnectivityMatrix, b: ConnectivityMatrix):
    if a.stimulus_ids != b.stimulus_ids:
        raise StimulusMismatchError("matrices must share the same stimulus ids in the same order")


def pearson(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = np.dot(xc, xc)
    syy = np.dot(yc, yc)
    if sxx == 0 or syy == 0:
        raise DegenerateMatrixError("upper triangle has zero variance; correlation undefined")
    # a single sqrt of the product makes identical inputs give exactly 1
    return float(np.clip(np.dot(xc, yc) / np.sqrt(sxx * syy), -1.0, 1.0))


def sca_score(a: ConnectivityMatrix, b: ConnectivityMatrix) -> AlignmentScore:
    """Pearson r between the strict upper triangles of two ICMs.

    Either side may also be a behavioural similarity matrix. Two ICMs must
    average the same number of runs when both record it.
    """
    check_same_stimuli(a, b)
    if a.kind == "icm" and b.kind == "icm" and None not in (a.n_runs, b.n_runs) and a.n_runs != b.n_runs:
        raise ValueError(f"ICMs average different run counts ({a.n_runs} vs {b.n_runs})")
    return AlignmentScore(
        value=pearson(a.upper(), b.upper()),
        metric="sca",
        n_stimuli=len(a.stimulus_ids),
        metadata={"kinds": [a.kind, b.kind], "n_runs": [a.n_runs, b.n_runs]},
    )
