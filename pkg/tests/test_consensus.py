import numpy as np
import pytest

from oracles import block_data
from sca_kit import Factorization, GibbsConfig, ResponseMatrix, component_consistency, run_consensus
from sca_kit.consensus import ConsensusResult, aggregate_runs, load_consensus, save_consensus
from sca_kit.errors import DimensionError, InsufficientComponentsError

CFG = GibbsConfig(150, 75)


def best_match_corr(profiles, truth):
    c = np.corrcoef(profiles.T, truth.T)[: profiles.shape[1], profiles.shape[1] :]
    return c.max(axis=0)


@pytest.fixture(scope="module")
def block_result():
    D, truth = block_data(noise=0.05, seed=1)
    return run_consensus(ResponseMatrix.from_array(D), 2, 10, CFG, seed=0), truth


def test_block_profiles_recovered(block_result):
    result, truth = block_result
    assert np.all(best_match_corr(result.profiles, truth) > 0.95)
    assert result.profiles.min() >= 0


def test_weight_rows_sum_to_one(block_result):
    result, _ = block_result
    np.testing.assert_allclose(result.weights.sum(axis=1), 1.0, atol=1e-9)
    assert sum(result.cluster_sizes) == round(result.kept_fraction * 20)
    assert list(result.cluster_sizes) == sorted(result.cluster_sizes, reverse=True)


def test_identical_runs_degenerate_agreement():
    rng = np.random.default_rng(0)
    R = rng.random((12, 3))
    W = rng.random((3, 8))
    runs = [Factorization(R, W, "bnmf", noise_variance=1e-3) for _ in range(5)]
    result = aggregate_runs(runs, 3, seed=0)
    assert result.kept_fraction == 1.0
    normalized = R / np.linalg.norm(R, axis=0)
    for j in range(3):
        diffs = np.abs(normalized - result.profiles[:, [j]]).max(axis=0)
        assert diffs.min() < 1e-6
    np.testing.assert_allclose(np.sort(result.weights, axis=0), np.sort(W / W.sum(axis=1, keepdims=True), axis=0), atol=1e-12)


def test_zero_threshold_filters_everything():
    D, _ = block_data(noise=0.05, seed=2)
    with pytest.raises(InsufficientComponentsError) as info:
        run_consensus(ResponseMatrix.from_array(D), 2, 3, GibbsConfig(40, 20), outlier_threshold=0.0, seed=0)
    assert info.value.kept_fraction == 0.0


def test_needs_two_runs():
    with pytest.raises(ValueError):
        run_consensus(ResponseMatrix.from_array(np.ones((4, 3))), 1, 1)


def test_bit_reproducible():
    D, _ = block_data(noise=0.05, seed=3)
    d = ResponseMatrix.from_array(D)
    a = run_consensus(d, 2, 4, GibbsConfig(60, 30), seed=7)
    b = run_consensus(d, 2, 4, GibbsConfig(60, 30), seed=7)
    assert a.profiles.tobytes() == b.profiles.tobytes()
    assert a.weights.tobytes() == b.weights.tobytes()


def test_parallel_matches_serial():
    D, _ = block_data(noise=0.05, seed=4)
    d = ResponseMatrix.from_array(D)
    a = run_consensus(d, 2, 4, GibbsConfig(40, 20), seed=1, jobs=1)
    b = run_consensus(d, 2, 4, GibbsConfig(40, 20), seed=1, jobs=2)
    assert a.profiles.tobytes() == b.profiles.tobytes()


def test_stimulus_order_equivariance():
    D, _ = block_data(noise=0.05, seed=5)
    d = ResponseMatrix.from_array(D)
    perm = np.random.default_rng(9).permutation(d.shape[0])
    a = run_consensus(d, 2, 4, GibbsConfig(60, 30), seed=2)
    b = run_consensus(d.take_stimuli(perm), 2, 4, GibbsConfig(60, 30), seed=2)
    np.testing.assert_allclose(b.profiles, a.profiles[perm], atol=1e-8)
    np.testing.assert_allclose(b.weights, a.weights, atol=1e-8)


def test_consistency_self_and_permuted(block_result):
    result, _ = block_result
    assert np.allclose(component_consistency(result, result), 1.0)
    swapped = ConsensusResult(result.profiles[:, ::-1], result.weights[::-1], 1.0, (1, 1))
    assert np.allclose(component_consistency(result, swapped), 1.0)
    with pytest.raises(DimensionError):
        component_consistency(result, ConsensusResult(result.profiles[:, :1], result.weights[:1], 1.0, (1,)))


def test_split_half_consistency():
    D, _ = block_data(n_unit_per_block=20, noise=0.1, seed=6)
    left, right = D[:, 0::2], D[:, 1::2]
    a = run_consensus(ResponseMatrix.from_array(left), 2, 10, CFG, seed=0)
    b = run_consensus(ResponseMatrix.from_array(right), 2, 10, CFG, seed=1)
    assert min(component_consistency(a, b)) > 0.9


def test_save_load(tmp_path, block_result):
    result, _ = block_result
    save_consensus(result, tmp_path / "c")
    back = load_consensus(tmp_path / "c")
    assert back.profiles.tobytes() == result.profiles.tobytes()
    assert back.cluster_sizes == result.cluster_sizes
