"""Domain types shared across the package.

All containers are frozen dataclasses holding read-only float64 arrays, so
they can be passed between threads and worker processes without copies
being mutated behind anyone's back.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DimensionError, NaNError

METHODS = ("pca", "nmf", "snmf", "bnmf")
CONNECTIVITY_KINDS = ("icm", "rdm", "behavioral")


def _frozen(a, ndim=2) -> np.ndarray:
    arr = np.array(a, dtype=np.float64, copy=True)
    if arr.ndim != ndim:
        raise DimensionError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def check_finite(a: np.ndarray) -> None:
    bad = ~np.isfinite(a)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise NaNError((int(r), int(c)))


def _check_labels(labels, n, what):
    labels = tuple(str(s) for s in labels)
    if len(labels) != n:
        raise DimensionError(f"{len(labels)} {what} labels for {n} {what}s")
    if len(set(labels)) != n:
        raise DimensionError(f"{what} labels must be unique")
    return labels


@dataclass(frozen=True)
class ResponseMatrix:
    """Stimuli x units response matrix with labelled axes."""

    data: np.ndarray
    stimulus_ids: tuple
    unit_ids: tuple

    def __post_init__(self):
        data = _frozen(self.data)
        s, v = data.shape
        if s < 2:
            raise DimensionError(f"S >= 2 required, got S={s}")
        if v < 1:
            raise DimensionError(f"V >= 1 required, got V={v}")
        check_finite(data)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "stimulus_ids", _check_labels(self.stimulus_ids, s, "stimulus"))
        object.__setattr__(self, "unit_ids", _check_labels(self.unit_ids, v, "unit"))

    @classmethod
    def from_array(cls, data, stimulus_ids=None, unit_ids=None) -> "ResponseMatrix":
        data = np.asarray(data, dtype=np.float64)
        if data.ndim != 2:
            raise DimensionError(f"expected a 2-d array, got shape {data.shape}")
        s, v = data.shape
        if stimulus_ids is None:
            stimulus_ids = [f"s{i}" for i in range(s)]
        if unit_ids is None:
            unit_ids = [f"u{j}" for j in range(v)]
        return cls(data, tuple(stimulus_ids), tuple(unit_ids))

    @property
    def shape(self):
        return self.data.shape

    def with_data(self, data) -> "ResponseMatrix":
        return ResponseMatrix(data, self.stimulus_ids, self.unit_ids)

    def take_stimuli(self, index) -> "ResponseMatrix":
        index = np.asarray(index)
        return ResponseMatrix(
            self.data[index], tuple(self.stimulus_ids[i] for i in index), self.unit_ids
        )


@dataclass(frozen=True)
class PriorSpec:
    """Hyperparameters of the Bayesian NMF model.

    ``response_rate`` and ``weight_rate`` are exponential rates for entries of
    R and W. Either may be a scalar or an array broadcastable to the factor's
    shape for per-entry priors.
    """

    response_rate: Union[float, np.ndarray] = 1.0
    weight_rate: Union[float, np.ndarray] = 1.0
    noise_shape: float = 1.0
    noise_scale: float = 1.0

    def __post_init__(self):
        for name in ("response_rate", "weight_rate", "noise_shape", "noise_scale"):
            value = np.asarray(getattr(self, name), dtype=np.float64)
            if not np.all(np.isfinite(value)) or np.any(value <= 0):
                raise ValueError(f"{name} must be strictly positive and finite")

    def to_dict(self):
        def enc(v):
            return float(v) if np.ndim(v) == 0 else "per-entry"

        return {
            "response_rate": enc(self.response_rate),
            "weight_rate": enc(self.weight_rate),
            "noise_shape": float(self.noise_shape),
            "noise_scale": float(self.noise_scale),
        }


@dataclass(frozen=True)
class GibbsConfig:
    n_sweeps: int = 400
    burn_in: int = 200
    priors: PriorSpec = field(default_factory=PriorSpec)
    point_estimate: str = "posterior_mean"

    def __post_init__(self):
        if self.n_sweeps < 1:
            raise ValueError("n_sweeps must be positive")
        if not 0 <= self.burn_in < self.n_sweeps:
            raise ValueError("burn_in must satisfy 0 <= burn_in < n_sweeps")
        if self.point_estimate not in ("posterior_mean", "last_sample"):
            raise ValueError(f"unknown point_estimate {self.point_estimate!r}")

    def to_dict(self):
        return {
            "n_sweeps": self.n_sweeps,
            "burn_in": self.burn_in,
            "point_estimate": self.point_estimate,
            "priors": self.priors.to_dict(),
        }


@dataclass(frozen=True)
class Factorization:
    """Result of one decomposition: ``D ~ responses @ weights``.

    ``center`` holds the column means removed before PCA; it is ``None`` for
    the NMF engines. ``noise_variance`` is ``None`` unless method is bnmf.
    """

    responses: np.ndarray
    weights: np.ndarray
    method: str
    noise_variance: Optional[float] = None
    seed: Optional[int] = None
    center: Optional[np.ndarray] = None
    stimulus_ids: Optional[tuple] = None
    unit_ids: Optional[tuple] = None
    params: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        r = _frozen(self.responses)
        w = _frozen(self.weights)
        if r.shape[1] != w.shape[0]:
            raise DimensionError(f"responses {r.shape} and weights {w.shape} disagree on C")
        if self.method != "pca" and (np.any(r < 0) or np.any(w < 0)):
            raise ValueError(f"{self.method} factors must be non-negative")
        if self.method == "bnmf":
            if self.noise_variance is None or not (
                np.isfinite(self.noise_variance) and self.noise_variance > 0
            ):
                raise ValueError("bnmf noise_variance must be finite and positive")
        object.__setattr__(self, "responses", r)
        object.__setattr__(self, "weights", w)
        if self.center is not None:
            object.__setattr__(self, "center", _frozen(self.center, ndim=1))

    @property
    def n_components(self) -> int:
        return self.responses.shape[1]

    def reconstruction(self) -> np.ndarray:
        out = self.responses @ self.weights
        if self.center is not None:
            out = out + self.center
        return out


@dataclass(frozen=True)
class ConnectivityMatrix:
    """Symmetric stimulus x stimulus matrix (ICM, RDM or behavioural RDM).

    ``n_runs`` records how many decompositions an ICM averages over.
    """

    data: np.ndarray
    kind: str
    stimulus_ids: tuple
    n_runs: Optional[int] = None

    def __post_init__(self):
        if self.kind not in CONNECTIVITY_KINDS:
            raise ValueError(f"unknown connectivity kind {self.kind!r}")
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise DimensionError(f"connectivity matrix must be square, got {data.shape}")
        check_finite(data)
        n = data.shape[0]
        scale = max(1.0, float(np.abs(data).max())) if data.size else 1.0
        if np.abs(data - data.T).max(initial=0.0) > 1e-9 * scale:
            raise ValueError("connectivity matrix is not symmetric")
        # exact symmetry by construction
        data = np.triu(data, 1)
        data = data + data.T
        if self.kind == "icm":
            np.fill_diagonal(data, 1.0)
            if data.min(initial=0.0) < 0 or data.max(initial=0.0) > 1:
                raise ValueError("icm entries must lie in [0, 1]")
        else:
            np.fill_diagonal(data, 0.0)
            if self.kind == "rdm" and data.min(initial=0.0) < 0:
                raise ValueError("rdm entries must be non-negative")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "stimulus_ids", _check_labels(self.stimulus_ids, n, "stimulus"))

    def upper(self) -> np.ndarray:
        """Strict upper-triangle entries in row-major order."""
        return self.data[np.triu_indices(self.data.shape[0], k=1)]


def as_response_matrix(x, stimulus_ids: Optional[Sequence] = None) -> ResponseMatrix:
    if isinstance(x, ResponseMatrix):
        return x
    return ResponseMatrix.from_array(x, stimulus_ids=stimulus_ids)
