"""Consensus aggregation of repeated Bayesian NMF runs.

Response columns from all runs are stacked and L2-normalized; components
far from their neighbours are dropped as unreplicable; the survivors are
clustered with k-means and each cluster's elementwise median becomes a
consensus profile. Unit weights come from matching each consensus profile
back to its best-correlated component in every run.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.cluster.vq import kmeans2
from scipy.spatial.distance import cdist

from .data import GibbsConfig, as_response_matrix
from .decomposition import bnmf_decompose
from .errors import DimensionError, InsufficientComponentsError
from .io import read_binary, write_binary, write_json
from .parallel import pmap
from .rng import derive_seed, seeded_rng

DEFAULT_RUNS = 50
DEFAULT_COMPONENTS = 20
DEFAULT_OUTLIER_THRESHOLD = 0.8
KMEANS_RESTARTS = 10
KMEANS_ITER = 50


@dataclass(frozen=True)
class ConsensusResult:
    profiles: np.ndarray  # S x C
    weights: np.ndarray  # C x V, rows sum to 1
    kept_fraction: float
    cluster_sizes: tuple
    stimulus_ids: tuple = None
    unit_ids: tuple = None
    params: dict = None

    @property
    def n_components(self):
        return self.profiles.shape[1]


def run_seed(seed, i):
    """Seed of the ``i``-th decomposition run under a master seed."""
    return derive_seed(seed, f"run-{i}")


def _one_run(args):
    d, c, cfg, seed, backend = args
    return bnmf_decompose(d, c, cfg=cfg, seed=seed, backend=backend)


def bnmf_runs(d, c, n_runs, cfg=None, seed=0, jobs=1, backend=None):
    """``n_runs`` independent chains with seeds derived from ``seed``."""
    tasks = [(d, c, cfg, run_seed(seed, i), backend) for i in range(n_runs)]
    return pmap(_one_run, tasks, jobs=jobs)


def _normalize_columns(X):
    norms = np.linalg.norm(X, axis=0)
    norms[norms == 0] = 1.0
    return X / norms


def _column_correlations(a, B):
    """Pearson r between vector ``a`` and every column of ``B`` (NaN if constant)."""
    ac = a - a.mean()
    Bc = B - B.mean(axis=0)
    denom = np.linalg.norm(ac) * np.linalg.norm(Bc, axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        return (ac @ Bc) / denom


def outlier_distances(stacked, n_neighbors):
    """Mean Euclidean distance of each column to its ``n_neighbors`` nearest
    other columns."""
    dist = cdist(stacked.T, stacked.T)
    np.fill_diagonal(dist, np.inf)
    k = min(n_neighbors, dist.shape[0] - 1)
    nearest = np.sort(dist, axis=1)[:, :k]
    return nearest.mean(axis=1)


def _kmeans(points, k, seed):
    """Best-of-restarts k-means++ on rows of ``points``."""
    best = None
    for restart in range(KMEANS_RESTARTS):
        rng = seeded_rng(seed, f"kmeans-{restart}")
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                centroids, labels = kmeans2(points, k, iter=KMEANS_ITER, minit="++", seed=rng, missing="raise")
        except Exception:  # empty cluster on this restart
            continue
        inertia = float(np.sum((points - centroids[labels]) ** 2))
        if best is None or inertia < best[0]:
            best = (inertia, labels)
    if best is None:
        raise InsufficientComponentsError(f"k-means could not form {k} non-empty clusters", 1.0)
    return best[1]


def aggregate_runs(runs, c, outlier_threshold=DEFAULT_OUTLIER_THRESHOLD, seed=0) -> ConsensusResult:
    """Consensus over already-computed factorizations (all with ``c`` components)."""
    n_runs = len(runs)
    if n_runs < 2:
        raise ValueError("consensus needs at least two runs")
    stacked = _normalize_columns(np.hstack([f.responses for f in runs]))
    total = stacked.shape[1]

    dists = outlier_distances(stacked, n_runs)
    keep = dists <= outlier_threshold
    kept_fraction = float(keep.sum()) / total
    if keep.sum() < c:
        raise InsufficientComponentsError(
            f"only {int(keep.sum())} of {total} components survived outlier filtering; need {c}",
            kept_fraction,
        )
    survivors = stacked[:, keep]

    labels = _kmeans(survivors.T, c, derive_seed(seed, "kmeans"))
    sizes = np.bincount(labels, minlength=c)
    first = np.array([np.flatnonzero(labels == j)[0] for j in range(c)])
    order = sorted(range(c), key=lambda j: (-sizes[j], first[j]))
    profiles = np.column_stack([np.median(survivors[:, labels == j], axis=1) for j in order])

    V = runs[0].weights.shape[1]
    weights = np.zeros((c, V))
    for f in runs:
        for j in range(c):
            r = np.nan_to_num(_column_correlations(profiles[:, j], f.responses), nan=-np.inf)
            row = f.weights[int(np.argmax(r))]
            total_w = row.sum()
            weights[j] += row / total_w if total_w > 0 else np.full(V, 1.0 / V)
    weights /= n_runs

    first_run = runs[0]
    return ConsensusResult(
        profiles=profiles,
        weights=weights,
        kept_fraction=kept_fraction,
        cluster_sizes=tuple(int(sizes[j]) for j in order),
        stimulus_ids=first_run.stimulus_ids,
        unit_ids=first_run.unit_ids,
        params={"c": c, "n_runs": n_runs, "outlier_threshold": outlier_threshold, "seed": seed},
    )


def run_consensus(
    d,
    c=DEFAULT_COMPONENTS,
    n_runs=DEFAULT_RUNS,
    cfg: GibbsConfig | None = None,
    outlier_threshold=DEFAULT_OUTLIER_THRESHOLD,
    seed=0,
    jobs=1,
    backend=None,
) -> ConsensusResult:
    """Run ``n_runs`` Bayesian NMF chains and aggregate them.

    Raises InsufficientComponentsError when fewer than ``c`` components
    survive outlier filtering.
    """
    if n_runs < 2:
        raise ValueError("n_runs must be at least 2")
    if outlier_threshold < 0:
        raise ValueError("outlier_threshold must be non-negative")
    d = as_response_matrix(d)
    cfg = cfg or GibbsConfig()
    runs = bnmf_runs(d, c, n_runs, cfg=cfg, seed=seed, jobs=jobs, backend=backend)
    result = aggregate_runs(runs, c, outlier_threshold=outlier_threshold, seed=seed)
    params = dict(result.params, gibbs=cfg.to_dict())
    return ConsensusResult(**{**result.__dict__, "params": params})


def component_consistency(a: ConsensusResult, b: ConsensusResult):
    """Per-component Pearson r after optimal one-to-one matching of profiles."""
    from .alignment.matching import cms

    if a.profiles.shape != b.profiles.shape:
        raise DimensionError(f"profile shapes differ: {a.profiles.shape} vs {b.profiles.shape}")
    score = cms(a.profiles, b.profiles)
    return list(score.metadata["matched_r"])


def save_consensus(result: ConsensusResult, outdir, extra_meta=None):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    S, C = result.profiles.shape
    V = result.weights.shape[1]
    stim = result.stimulus_ids or tuple(f"s{i}" for i in range(S))
    units = result.unit_ids or tuple(f"u{j}" for j in range(V))
    comps = tuple(f"c{j}" for j in range(C))
    write_binary(outdir / "profiles.bin", result.profiles, stim, comps, kind="factor")
    write_binary(outdir / "weights.bin", result.weights, comps, units, kind="factor")
    meta = {
        "kept_fraction": result.kept_fraction,
        "cluster_sizes": list(result.cluster_sizes),
        "params": result.params or {},
    }
    if extra_meta:
        meta.update(extra_meta)
    write_json(outdir / "meta.json", meta)


def load_consensus(indir) -> ConsensusResult:
    indir = Path(indir)
    profiles, stim, _, _, _ = read_binary(indir / "profiles.bin")
    weights, _, units, _, _ = read_binary(indir / "weights.bin")
    meta = json.loads((indir / "meta.json").read_text(encoding="utf-8"))
    return ConsensusResult(
        profiles=profiles,
        weights=weights,
        kept_fraction=meta["kept_fraction"],
        cluster_sizes=tuple(meta["cluster_sizes"]),
        stimulus_ids=stim,
        unit_ids=units,
        params=meta.get("params"),
    )
