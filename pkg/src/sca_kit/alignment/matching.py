"""Component Matching Score: permutation-optimal mean column correlation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..errors import ConstantColumnError, DimensionError

METRICS = ("sca", "rsa", "cms", "encoding")


@dataclass(frozen=True)
class AlignmentScore:
    value: float
    metric: str
    n_stimuli: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        if not np.isfinite(self.value):
            raise ValueError("alignment score must be finite")

    def to_dict(self):
        return {
            "metric": self.metric,
            "value": float(self.value),
            "n_stimuli": int(self.n_stimuli),
            "params": self.metadata,
        }


def _standardize(X, similarity):
    X = np.asarray(X, dtype=np.float64)
    if similarity == "pearson":
        X = X - X.mean(axis=0)
    elif similarity != "cosine":
        raise ValueError(f"unknown similarity {similarity!r}")
    norms = np.linalg.norm(X, axis=0)
    bad = np.flatnonzero(norms == 0)
    if bad.size:
        raise ConstantColumnError(f"column {int(bad[0])} is constant; correlation undefined")
    return X / norms


def similarity_matrix(x, y, similarity="pearson"):
    """C x C matrix whose (i, j) entry compares column i of x with column j of y."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or x.shape != y.shape:
        raise DimensionError(f"cms needs equal-shape matrices, got {x.shape} and {y.shape}")
    return np.clip(_standardize(x, similarity).T @ _standardize(y, similarity), -1.0, 1.0)


def best_assignment(sim):
    """Permutation maximizing the mean of ``sim[j, perm[j]]`` and that mean."""
    _, perm = linear_sum_assignment(sim, maximize=True)
    return perm, float(np.mean(sim[np.arange(sim.shape[0]), perm]))


def cms(x, y, similarity="pearson") -> AlignmentScore:
    """Mean per-component correlation under the best one-to-one matching.

    ``metadata["permutation"][j]`` is the column of ``y`` matched to column
    ``j`` of ``x``; ``metadata["matched_r"]`` the matched correlations.
    """
    sim = similarity_matrix(x, y, similarity)
    perm, value = best_assignment(sim)
    matched = sim[np.arange(sim.shape[0]), perm]
    return AlignmentScore(
        value=value,
        metric="cms",
        n_stimuli=int(np.shape(x)[0]),
        metadata={
            "permutation": [int(p) for p in perm],
            "matched_r": [float(r) for r in matched],
            "similarity": similarity,
        },
    )


def recovery_score(l_true, l_inferred) -> AlignmentScore:
    """Latent recovery score; the same quantity as :func:`cms`."""
    return cms(l_true, l_inferred)
