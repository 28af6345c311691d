import numpy as np

from ..data import ResponseMatrix, as_response_matrix
from ..errors import DimensionError, NegativeInputError


def check_components(c, upper, what="min(S, V)"):
    if not isinstance(c, (int, np.integer)) or not 1 <= c <= upper:
        raise DimensionError(f"component count must satisfy 1 <= c <= {what} = {upper}, got {c}")


def require_nonnegative(d: ResponseMatrix):
    if np.any(d.data < 0):
        r, c = np.argwhere(d.data < 0)[0]
        raise NegativeInputError(f"negative entry at cell ({r},{c}); nmf/snmf require D >= 0")


def label_ranks(labels):
    """Rank of each label in sorted order.

    Random draws are laid out in sorted-label order and then moved to each
    row's position, so reordering the stimuli (or units) of a matrix moves
    its random numbers with it.
    """
    order = np.argsort(np.asarray(labels, dtype=object), kind="stable")
    ranks = np.empty(len(labels), dtype=np.intp)
    ranks[order] = np.arange(len(labels))
    return ranks


def init_scale(D, c):
    scale = np.sqrt(np.mean(np.abs(D)) / c)
    return scale if scale > 0 else 1.0


def init_factors(d: ResponseMatrix, c, rng):
    """|N(0,1)| draws scaled by sqrt(mean|D| / c); returns (R, W^T)."""
    S, V = d.shape
    scale = init_scale(d.data, c)
    R = np.abs(rng.standard_normal((S, c)))[label_ranks(d.stimulus_ids)] * scale
    Wt = np.abs(rng.standard_normal((V, c)))[label_ranks(d.unit_ids)] * scale
    return np.ascontiguousarray(R), np.ascontiguousarray(Wt)


def preprocess(d, mode="none") -> ResponseMatrix:
    """Optional per-unit rescaling applied before decomposition.

    ``"max"`` maps each unit (column) linearly onto [0, 1] via its min and
    max; constant units become zero.
    """
    d = as_response_matrix(d)
    if mode == "none":
        return d
    if mode != "max":
        raise ValueError(f"unknown preprocessing mode {mode!r}")
    lo = d.data.min(axis=0)
    span = d.data.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    return d.with_data(np.where(span > 0, (d.data - lo) / safe, 0.0))
