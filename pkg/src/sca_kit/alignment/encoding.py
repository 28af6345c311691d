"""Linear encoding: ridge regression from one system's responses to another's."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..data import as_response_matrix
from ..errors import DimensionError, StimulusMismatchError
from ..rng import seeded_rng
from .matching import AlignmentScore


def _default_grid():
    return tuple(float(x) for x in np.logspace(-2, 4, 7))


@dataclass(frozen=True)
class EncodingConfig:
    train_fraction: float = 0.8
    ridge_penalties: tuple = field(default_factory=_default_grid)
    n_folds_inner: int = 5
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must lie in (0, 1)")
        if len(self.ridge_penalties) == 0 or any(p <= 0 for p in self.ridge_penalties):
            raise ValueError("ridge_penalties must be a non-empty list of positive values")
        if self.n_folds_inner < 2:
            raise ValueError("n_folds_inner must be at least 2")

    def to_dict(self):
        return {
            "train_fraction": self.train_fraction,
            "ridge_penalties": list(self.ridge_penalties),
            "n_folds_inner": self.n_folds_inner,
            "seed": self.seed,
        }


def _zscore(X, mean, std):
    return (X - mean) / np.where(std > 0, std, 1.0)


def ridge_predictions(X_train, Y_train, X_eval, penalties):
    """Predictions on ``X_eval`` for every penalty, shape (P, n_eval, T).

    Uses one thin SVD of the training design: the ridge solution is
    ``V diag(s / (s^2 + lam)) U^T Y``.
    """
    U, s, Vt = np.linalg.svd(X_train, full_matrices=False)
    UtY = U.T @ Y_train
    XV = X_eval @ Vt.T
    out = np.empty((len(penalties), X_eval.shape[0], Y_train.shape[1]))
    for i, lam in enumerate(penalties):
        out[i] = XV @ ((s / (s * s + lam))[:, None] * UtY)
    return out


def encoding_score(features, targets, cfg: EncodingConfig | None = None) -> AlignmentScore:
    """Mean held-out R^2 of a ridge mapping from ``features`` to ``targets``.

    The stimuli are split at random into train and test sets. Both matrices
    are z-scored with training-split statistics, the penalty for each target
    unit is picked by k-fold cross-validation within the training split, and
    R^2 on the test split is averaged over target units.
    ``metadata["per_unit_r2"]`` and ``metadata["penalty"]`` hold the
    per-unit values.
    """
    cfg = cfg or EncodingConfig()
    X = as_response_matrix(features)
    Y = as_response_matrix(targets)
    if X.stimulus_ids != Y.stimulus_ids:
        raise StimulusMismatchError("features and targets must share stimulus ids in the same order")
    S = X.shape[0]
    n_train = int(round(cfg.train_fraction * S))
    if S - n_train < 2 or n_train < cfg.n_folds_inner:
        raise DimensionError(f"degenerate split: {n_train} train / {S - n_train} test stimuli")

    order = seeded_rng(cfg.seed, "encoding-split").permutation(S)
    train, test = order[:n_train], order[n_train:]
    mx, sx = X.data[train].mean(axis=0), X.data[train].std(axis=0)
    my, sy = Y.data[train].mean(axis=0), Y.data[train].std(axis=0)
    Xtr, Xte = _zscore(X.data[train], mx, sx), _zscore(X.data[test], mx, sx)
    Ytr, Yte = _zscore(Y.data[train], my, sy), _zscore(Y.data[test], my, sy)

    penalties = np.asarray(cfg.ridge_penalties, dtype=np.float64)
    folds = np.array_split(seeded_rng(cfg.seed, "encoding-folds").permutation(n_train), cfg.n_folds_inner)
    cv_err = np.zeros((len(penalties), Ytr.shape[1]))
    for fold in folds:
        mask = np.ones(n_train, dtype=bool)
        mask[fold] = False
        pred = ridge_predictions(Xtr[mask], Ytr[mask], Xtr[fold], penalties)
        cv_err += np.sum((pred - Ytr[fold][None]) ** 2, axis=1)
    best = np.argmin(cv_err, axis=0)

    pred_all = ridge_predictions(Xtr, Ytr, Xte, penalties)
    pred = pred_all[best, :, np.arange(Ytr.shape[1])].T
    ss_res = np.sum((Yte - pred) ** 2, axis=0)
    ss_tot = np.sum((Yte - Yte.mean(axis=0)) ** 2, axis=0)
    valid = ss_tot > 0
    if not valid.any():
        raise DimensionError("every target unit is constant on the test split")
    r2 = np.full(Ytr.shape[1], np.nan)
    r2[valid] = 1.0 - ss_res[valid] / ss_tot[valid]
    return AlignmentScore(
        value=float(np.mean(r2[valid])),
        metric="encoding",
        n_stimuli=S,
        metadata={
            **cfg.to_dict(),
            "per_unit_r2": [None if np.isnan(v) else float(v) for v in r2],
            "penalty": [float(penalties[b]) for b in best],
            "n_train": int(n_train),
            "n_test": int(S - n_train),
        },
    )
