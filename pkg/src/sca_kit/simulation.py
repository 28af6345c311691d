"""Synthetic latent-component data, plane rotations, and the experiments that
contrast axis-sensitive and rotation-invariant measures."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .alignment import AlignmentScore, build_icm, build_rdm, cms, recovery_score, rsa_score, sca_score
from .data import GibbsConfig, ResponseMatrix, as_response_matrix
from .decomposition import decompose, sign_convention
from .errors import DimensionError
from .parallel import pmap
from .rng import derive_seed, seeded_rng

DEFAULT_ANGLES = (math.pi / 20, math.pi / 40, math.pi / 60, math.pi / 80)
SWEEP_METRICS = ("sca", "rsa_euclidean", "rsa_correlation")


@dataclass(frozen=True)
class LatentSpec:
    m: int = 200
    n: int = 30
    k: int = 5
    sparsity: float = 0.3
    noise_sigma: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if min(self.m, self.n, self.k) < 1 or self.k > min(self.m, self.n):
            raise ValueError("need 1 <= k <= min(m, n)")
        if not 0 <= self.sparsity < 1:
            raise ValueError("sparsity must lie in [0, 1)")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")


@dataclass(frozen=True)
class RotationSpec:
    n_dims: int
    theta: float
    n_planes: int
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.n_planes <= max_planes(self.n_dims):
            raise ValueError(f"n_planes must lie in [0, {max_planes(self.n_dims)}]")


@dataclass(frozen=True)
class SweepRecord:
    theta: float
    n_planes: int
    metric: str
    score: float
    seed: int


class LatentData(NamedTuple):
    x: ResponseMatrix
    l: np.ndarray  # noqa: E741
    a: np.ndarray


def max_planes(n):
    return n * (n - 1) // 2


def default_plane_counts(n):
    """Ten evenly spaced plane counts from 0 to n(n-1)/2 inclusive."""
    return [int(round(v)) for v in np.linspace(0, max_planes(n), 10)]


def gen_latent_data(spec: LatentSpec) -> LatentData:
    """``X = L A + eps`` with uniform, Bernoulli-masked L (m x k) and A (k x n)."""
    rng = seeded_rng(spec.seed, "latent")
    L = rng.random((spec.m, spec.k))
    A = rng.random((spec.k, spec.n))
    L[rng.random(L.shape) < spec.sparsity] = 0.0
    A[rng.random(A.shape) < spec.sparsity] = 0.0
    X = L @ A + spec.noise_sigma * rng.standard_normal((spec.m, spec.n))
    return LatentData(ResponseMatrix.from_array(X), L, A)


def plane_rotation(n, i, j, theta):
    """Rotation by ``theta`` in the (i, j) coordinate plane (0-based, i < j)."""
    G = np.eye(n)
    c, s = math.cos(theta), math.sin(theta)
    G[i, i] = G[j, j] = c
    G[i, j] = s
    G[j, i] = -s
    return G


def compose_rotation(n, planes, theta):
    """Ordered product of plane rotations over ``planes`` (applied as given)."""
    R = np.eye(n)
    c, s = math.cos(theta), math.sin(theta)
    for i, j in planes:
        # right-multiplying by a plane rotation only mixes columns i and j
        ci, cj = R[:, i].copy(), R[:, j].copy()
        R[:, i] = c * ci - s * cj
        R[:, j] = s * ci + c * cj
    return R


def select_planes(n, n_planes, seed):
    """``n_planes`` distinct planes, chosen by seed, in lexicographic order.

    A seed fixes one random ordering of all planes and takes its prefix, so
    for one seed a larger count always contains the smaller count's planes.
    """
    planes = list(itertools.combinations(range(n), 2))
    chosen = seeded_rng(seed, "planes").permutation(len(planes))[:n_planes]
    return [planes[p] for p in sorted(chosen)]


def make_rotation(spec: RotationSpec) -> np.ndarray:
    return compose_rotation(spec.n_dims, select_planes(spec.n_dims, spec.n_planes, spec.seed), spec.theta)


def apply_rotation(x, r) -> ResponseMatrix:
    x = as_response_matrix(x)
    r = np.asarray(r, dtype=np.float64)
    V = x.shape[1]
    if r.shape != (V, V):
        raise DimensionError(f"rotation {r.shape} does not match {V} units")
    return x.with_data(x.data @ r)


def rotated_component_similarity(
    x, spec: RotationSpec, method="bnmf", c=None, seed=0, cfg: GibbsConfig | None = None, similarity="pearson"
):
    """Similarity of components derived before and after rotating ``x``.

    The rotated data's unit loadings are mapped back with ``R^T`` and matched
    one-to-one against the original loadings. PCA loadings are
    re-signed after the back-rotation with the same sign rule used by the
    engine.
    """
    x = as_response_matrix(x)
    if method not in ("pca", "bnmf"):
        raise ValueError("method must be 'pca' or 'bnmf'")
    c = c or min(x.shape) - 1
    R = make_rotation(spec)
    xr = apply_rotation(x, R)
    f = decompose(x, method, c, seed=seed, cfg=cfg)
    fr = decompose(xr, method, c, seed=seed, cfg=cfg)
    corrected = fr.weights @ R.T
    if method == "pca":
        corrected = sign_convention(corrected)
    score = cms(f.weights.T, corrected.T, similarity=similarity)
    meta = dict(score.metadata, method=method, theta=spec.theta, n_planes=spec.n_planes, c=c)
    return AlignmentScore(score.value, "cms", x.shape[0], meta)


def latent_recovery(spec: LatentSpec, methods=("pca", "nmf", "snmf", "bnmf"), cfg=None, l1_penalty=0.1, seed=None):
    """Recovery score of the latent response matrix for each engine.

    The multiplicative engines (nmf, snmf) see the data with the small
    negative noise excursions clipped to zero.
    """
    data = gen_latent_data(spec)
    seed = spec.seed if seed is None else seed
    clipped = data.x.with_data(np.maximum(data.x.data, 0.0))
    out = {}
    for method in methods:
        source = clipped if method in ("nmf", "snmf") else data.x
        f = decompose(source, method, spec.k, seed=seed, cfg=cfg, l1_penalty=l1_penalty)
        out[method] = (recovery_score(data.l, f.responses).value, f)
    return data, out


def _sweep_cell(args):
    x, theta, n_planes, rot_seed, metrics, c, n_runs, cfg, icm_seed, ref_icm, ref_rdms = args
    R = compose_rotation(x.shape[1], select_planes(x.shape[1], n_planes, rot_seed), theta)
    xr = apply_rotation(x, R)
    scores = {}
    if "sca" in metrics:
        scores["sca"] = sca_score(ref_icm, build_icm(xr, c, n_runs, cfg=cfg, seed=icm_seed)).value
    for name in metrics:
        if name.startswith("rsa_"):
            scores[name] = rsa_score(ref_rdms[name], build_rdm(xr, name[4:])).value
    return scores


def sensitivity_sweep(
    spec: LatentSpec,
    thetas=DEFAULT_ANGLES,
    plane_counts=None,
    metrics=SWEEP_METRICS,
    n_runs_icm=20,
    seed=0,
    c=None,
    cfg: GibbsConfig | None = None,
    jobs=1,
):
    """Alignment between latent data and rotated copies over an angle x
    plane-count grid.

    The reference ICM and every rotated ICM use two fixed, distinct derived
    seeds, so the zero-rotation cells measure run-to-run agreement. Plane
    subsets are nested across counts. Records come back sorted by
    (theta, n_planes, metric).
    """
    metrics = tuple("rsa_euclidean" if m == "rsa" else m for m in metrics)
    unknown = set(metrics) - set(SWEEP_METRICS)
    if unknown:
        raise ValueError(f"unknown sweep metrics {sorted(unknown)}")
    x = gen_latent_data(spec).x
    n = spec.n
    plane_counts = default_plane_counts(n) if plane_counts is None else list(plane_counts)
    c = c or spec.k
    rot_seed = derive_seed(seed, "rotation")
    icm_seed = derive_seed(seed, "icm-rotated")
    ref_icm = build_icm(x, c, n_runs_icm, cfg=cfg, seed=derive_seed(seed, "icm-reference"), jobs=jobs) if "sca" in metrics else None
    ref_rdms = {m: build_rdm(x, m[4:]) for m in metrics if m.startswith("rsa_")}

    cells = [(float(t), int(p)) for t in thetas for p in plane_counts]
    tasks = [(x, t, p, rot_seed, metrics, c, n_runs_icm, cfg, icm_seed, ref_icm, ref_rdms) for t, p in cells]
    results = pmap(_sweep_cell, tasks, jobs=jobs)
    records = [
        SweepRecord(theta=t, n_planes=p, metric=m, score=float(scores[m]), seed=int(seed))
        for (t, p), scores in zip(cells, results)
        for m in metrics
    ]
    return sorted(records, key=lambda r: (r.theta, r.n_planes, r.metric))
