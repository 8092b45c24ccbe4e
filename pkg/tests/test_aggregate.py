"""Sequence aggregation: majority vote, trajectory features, pooling."""
import itertools

import numpy as np
import pytest

from videoqoe.aggregate import (
    extract_feature_vector,
    majority_vote,
    pool_feature_vector,
)
from videoqoe.errors import AggregationError, ConfigError, DimensionError
from videoqoe.network import ModelConfig, build_model
from videoqoe.optim import OptimizerConfig
from videoqoe.video import VideoVolume

from oracles import majority_vote_brute


def test_majority_vote_matches_brute_force_on_all_small_multisets():
    # every multiset of up to 6 labels over 3 classes
    for n in range(1, 7):
        for labels in itertools.combinations_with_replacement(range(3), n):
            assert majority_vote(labels) == majority_vote_brute(labels)


def test_majority_vote_tie_goes_to_smallest_class():
    assert majority_vote([2, 1, 1, 2]) == 1
    assert majority_vote([0, 2]) == 0


def test_majority_vote_rejects_degenerate_input():
    with pytest.raises(AggregationError):
        majority_vote([])
    with pytest.raises(AggregationError):
        majority_vote([0, -1])


def _volume(h=32, w=32, f=16, seed=0, fps=25.0):
    rng = np.random.default_rng(seed)
    luma = rng.integers(0, 256, size=(h, w, f)).astype(np.float64)
    return VideoVolume(luma=luma, frame_rate=fps)


def test_feature_length_is_patches_times_num_params():
    rng = np.random.default_rng(42)
    vol = _volume()
    for _ in range(10):
        cfg = ModelConfig(
            num_conv_layers=2,
            first_layer_filters=int(rng.integers(1, 4)),
            fc_sizes=(int(rng.integers(4, 10)), int(rng.integers(3, 8))),
            num_classes=int(rng.integers(2, 5)),
        )
        p = int(rng.integers(1, 5))
        net = build_model(cfg, 16, seed=0)
        vec = extract_feature_vector(vol, cfg, 16, patches_per_video=p, seed=0)
        assert vec.shape == (p * net.num_params,)


def test_zero_learning_rate_yields_copies_of_the_initial_coefficients():
    cfg = ModelConfig(num_conv_layers=2, first_layer_filters=2, fc_sizes=(8, 6), num_classes=3)
    vol = _volume()
    p = 4
    frozen = OptimizerConfig(kind="sgd", learning_rate=0.0)
    vec = extract_feature_vector(vol, cfg, 16, patches_per_video=p, seed=5, optimizer=frozen)
    init = build_model(cfg, 16, seed=5).coefficients()
    np.testing.assert_array_equal(vec.reshape(p, -1), np.tile(init, (p, 1)))


def test_nonzero_learning_rate_moves_every_snapshot():
    cfg = ModelConfig(num_conv_layers=2, first_layer_filters=2, fc_sizes=(8, 6), num_classes=3)
    vol = _volume(seed=3)
    vec = extract_feature_vector(
        vol, cfg, 16, patches_per_video=3, seed=5,
        optimizer=OptimizerConfig(kind="sgd", learning_rate=1e-2),
    )
    init = build_model(cfg, 16, seed=5).coefficients()
    snaps = vec.reshape(3, -1)
    for i in range(3):
        assert not np.array_equal(snaps[i], init)
    # consecutive snapshots differ too: one optimizer step sits between them
    assert not np.array_equal(snaps[0], snaps[1])


def test_feature_vector_is_deterministic_in_the_seed():
    cfg = ModelConfig(num_conv_layers=2, first_layer_filters=2, fc_sizes=(8, 6), num_classes=3)
    vol = _volume(seed=1)
    a = extract_feature_vector(vol, cfg, 16, patches_per_video=3, seed=9)
    b = extract_feature_vector(vol, cfg, 16, patches_per_video=3, seed=9)
    c = extract_feature_vector(vol, cfg, 16, patches_per_video=3, seed=10)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_oversampling_a_small_grid_resamples_cells():
    # 16x16x16 volume has exactly one 16^3 cell; asking for 5 patches must work
    cfg = ModelConfig(num_conv_layers=2, first_layer_filters=1, fc_sizes=(4, 4), num_classes=2)
    vol = _volume(h=16, w=16, f=16)
    net = build_model(cfg, 16, seed=0)
    vec = extract_feature_vector(vol, cfg, 16, patches_per_video=5, seed=0)
    assert vec.shape == (5 * net.num_params,)


def test_volume_too_small_for_one_patch():
    cfg = ModelConfig(num_conv_layers=2, first_layer_filters=1, fc_sizes=(4, 4), num_classes=2)
    with pytest.raises(DimensionError):
        extract_feature_vector(_volume(h=8, w=8, f=8), cfg, 16, patches_per_video=1)


def test_patch_count_must_be_positive():
    cfg = ModelConfig(num_conv_layers=2, first_layer_filters=1, fc_sizes=(4, 4), num_classes=2)
    with pytest.raises(ConfigError):
        extract_feature_vector(_volume(), cfg, 16, patches_per_video=0)


def test_pooling_within_cap_is_identity():
    vec = np.arange(10.0)
    out = pool_feature_vector(vec, cap=10)
    np.testing.assert_array_equal(out, vec)
    out[0] = -1.0
    assert vec[0] == 0.0  # caller data must not alias the result


def test_pooling_reduces_with_window_means():
    vec = np.arange(10.0)
    out = pool_feature_vector(vec, cap=5)
    np.testing.assert_allclose(out, [0.5, 2.5, 4.5, 6.5, 8.5])


def test_pooling_partial_tail_window():
    vec = np.arange(7.0)  # cap 3 -> window ceil(7/3)=3 -> [1, 4] plus tail mean 6
    out = pool_feature_vector(vec, cap=3)
    np.testing.assert_allclose(out, [1.0, 4.0, 6.0])
    assert out.size <= 3


def test_pooling_never_exceeds_cap():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(1, 2000))
        cap = int(rng.integers(1, 60))
        out = pool_feature_vector(rng.normal(size=n), cap=cap)
        assert out.size <= cap
        if n <= cap:
            assert out.size == n


def test_pooling_rejects_bad_input():
    with pytest.raises(ConfigError):
        pool_feature_vector(np.arange(4.0), cap=0)
    with pytest.raises(DimensionError):
        pool_feature_vector(np.zeros((2, 2)))
    with pytest.raises(DimensionError):
        pool_feature_vector(np.zeros(0))
