"""Hoyer sparsity and moment-based shape statistics of factor matrices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Factorization
from .errors import UndefinedVarianceError, ZeroVectorError


def hoyer_sparsity(x) -> float:
    """``(sqrt(n) - ||x||_1 / ||x||_2) / (sqrt(n) - 1)``.

    1 for a vector with a single non-zero entry, 0 for a constant vector.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    n = x.size
    if n < 2:
        raise ValueError("hoyer sparsity needs at least two entries")
    l2 = np.sqrt(np.sum(x * x))
    if l2 == 0:
        raise ZeroVectorError("hoyer sparsity is undefined for the zero vector")
    l1 = np.sum(np.abs(x))
    if l1 == l2:  # a single non-zero entry
        return 1.0
    rn = np.sqrt(n)
    # one division instead of two keeps hand-checkable cases exact
    return float((rn * l2 - l1) / ((rn - 1.0) * l2))


def moments(x):
    """Central sample moments m2, m3, m4 with 1/n normalization."""
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size < 2:
        raise ValueError("moments need at least two entries")
    dev = x - x.mean()
    sq = dev * dev
    return {"m2": float(np.mean(sq)), "m3": float(np.mean(sq * dev)), "m4": float(np.mean(sq * sq))}


def kurtosis(x) -> float:
    """``m4 / m2**2``. This is the raw (non-excess) kurtosis: 3 for a normal."""
    m = moments(x)
    if m["m2"] == 0:
        raise UndefinedVarianceError("kurtosis undefined for zero-variance input")
    return m["m4"] / m["m2"] ** 2


def skewness(x, power=3) -> float:
    """Squared skewness ``m3**2 / m2**power``.

    The default ``power=3`` is scale-invariant. ``power=2`` gives the
    unnormalized variant, which changes with the scale of ``x``.
    """
    if power not in (2, 3):
        raise ValueError("power must be 2 or 3")
    m = moments(x)
    if m["m2"] == 0:
        raise UndefinedVarianceError("skewness undefined for zero-variance input")
    return m["m3"] ** 2 / m["m2"] ** power


@dataclass(frozen=True)
class SparsityReport:
    axis: str  # "rows" or "columns"
    per_vector: list  # dicts with hoyer/kurtosis/skewness, None where skipped
    aggregate: dict
    skipped: list = field(default_factory=list)

    def to_dict(self):
        return {
            "axis": self.axis,
            "per_vector": self.per_vector,
            "aggregate": self.aggregate,
            "skipped": self.skipped,
        }


def vector_stats(x, power=3):
    out = {"hoyer": hoyer_sparsity(x)}
    m2 = moments(x)["m2"]
    out["kurtosis"] = kurtosis(x) if m2 > 0 else None
    out["skewness"] = skewness(x, power) if m2 > 0 else None
    return out


def sparsity_report(vectors, axis, power=3) -> SparsityReport:
    """Statistics of each vector; all-zero vectors are skipped and listed."""
    per_vector, skipped = [], []
    for i, v in enumerate(vectors):
        if not np.any(v):
            per_vector.append(None)
            skipped.append(i)
            continue
        per_vector.append(vector_stats(v, power))
    aggregate = {}
    for key in ("hoyer", "kurtosis", "skewness"):
        vals = [p[key] for p in per_vector if p is not None and p[key] is not None]
        aggregate[key] = float(np.mean(vals)) if vals else None
    return SparsityReport(axis=axis, per_vector=per_vector, aggregate=aggregate, skipped=skipped)


def factor_sparsity_report(f: Factorization, power=3):
    """Per-component statistics: rows of W and columns of R."""
    return {
        "w_report": sparsity_report(f.weights, "rows", power),
        "r_report": sparsity_report(f.responses.T, "columns", power),
    }
