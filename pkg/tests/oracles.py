"""Independent reference implementations used to check the package.

None of these import the code under test.
"""

import itertools
import math

import numpy as np
from scipy import stats


def pearson_by_hand(x, y):
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


def spearman(x, y):
    return stats.spearmanr(x, y).statistic


def brute_force_best_mean(sim):
    """Max over all permutations of mean(sim[j, perm[j]]), same reduction as the package."""
    c = sim.shape[0]
    best = -np.inf
    rows = np.arange(c)
    for perm in itertools.permutations(range(c)):
        val = float(np.mean(sim[rows, list(perm)]))
        best = max(best, val)
    return best


def corr_columns(x, y):
    c = x.shape[1]
    full = np.corrcoef(x.T, y.T)
    return full[:c, c:]


def hoyer_naive(x):
    n = len(x)
    l1 = sum(abs(v) for v in x)
    l2 = math.sqrt(sum(v * v for v in x))
    return (math.sqrt(n) - l1 / l2) / (math.sqrt(n) - 1)


def central_moments_loop(x):
    n = len(x)
    mu = sum(x) / n
    return tuple(sum((v - mu) ** r for v in x) / n for r in (2, 3, 4))


def pca_ev_by_eigh(D, c):
    """Explained variance of the top-c principal subspace via the covariance eigenvalues."""
    Dc = D - D.mean(axis=0)
    evals = np.linalg.eigvalsh(Dc.T @ Dc)[::-1]
    return float(evals[:c].sum() / evals.sum())


def leading_left_vector(D, n_iter=2000):
    """Leading left singular vector by power iteration on D D^T."""
    v = np.ones(D.shape[0])
    M = D @ D.T
    for _ in range(n_iter):
        v = M @ v
        v /= np.linalg.norm(v)
    return v


def truncnorm_mean_sd(mu, var):
    sd = math.sqrt(var)
    a = -mu / sd
    dist = stats.truncnorm(a, np.inf, loc=mu, scale=sd)
    return dist.mean(), dist.std()


def block_data(n_stim_per_block=10, n_unit_per_block=5, noise=0.0, seed=0, high=1.0, low=0.0):
    """Two-block matrix: first stimuli drive the first units, the rest the rest."""
    S, V = 2 * n_stim_per_block, 2 * n_unit_per_block
    D = np.full((S, V), low)
    D[:n_stim_per_block, :n_unit_per_block] = high
    D[n_stim_per_block:, n_unit_per_block:] = high
    if noise:
        D = D + noise * np.abs(np.random.default_rng(seed).standard_normal((S, V)))
    truth = np.zeros((S, 2))
    truth[:n_stim_per_block, 0] = 1
    truth[n_stim_per_block:, 1] = 1
    return D, truth


def givens_displayed(n, i, j, theta):
    """Plane rotation written out entry by entry (0-based i < j)."""
    R = [[1.0 if a == b else 0.0 for b in range(n)] for a in range(n)]
    R[i][i] = math.cos(theta)
    R[j][j] = math.cos(theta)
    R[i][j] = math.sin(theta)
    R[j][i] = -math.sin(theta)
    return np.array(R)
