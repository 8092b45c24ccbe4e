"""Training loop behaviour: memorization, determinism, divergence, curves."""
import numpy as np
import pytest

from videoqoe.errors import ConfigError, DivergenceError, LabelError
from videoqoe.network import ModelConfig, build_model
from videoqoe.optim import OptimizerConfig
from videoqoe.training import EpochCurves, read_curves_csv, train_network

CFG = ModelConfig(num_conv_layers=2, first_layer_filters=2, fc_sizes=(16, 8), num_classes=2)


def _toy_data(n_per_class=6, k=8, seed=0):
    """Two blob classes separated by mean luminance level."""
    rng = np.random.default_rng(seed)
    cubes = []
    labels = []
    for c, level in enumerate((-0.5, 0.5)):
        for _ in range(n_per_class):
            cubes.append(level + 0.1 * rng.normal(size=(1, k, k, k)))
            labels.append(c)
    X = np.stack(cubes)
    y = np.array(labels)
    return X, y


def test_memorizes_separable_toy_data():
    X, y = _toy_data()
    net = build_model(CFG, 8, seed=1)
    curves = train_network(
        net, X, y, X, y,
        optimizer=OptimizerConfig(kind="adagrad", learning_rate=1e-2),
        epochs=30, batch_size=4, seed=1,
    )
    assert curves.train_acc[-1] == 1.0
    assert curves.val_acc[-1] == 1.0
    assert curves.train_loss[-1] < curves.train_loss[0]


def test_identical_seeds_give_identical_weights_and_curves():
    X, y = _toy_data()
    results = []
    for _ in range(2):
        net = build_model(CFG, 8, seed=7)
        curves = train_network(
            net, X, y, X[:4], y[:4],
            optimizer=OptimizerConfig(kind="sgd", learning_rate=1e-2),
            epochs=5, batch_size=3, seed=7,
        )
        results.append((net.coefficients(), list(curves.rows())))
    np.testing.assert_array_equal(results[0][0], results[1][0])
    assert results[0][1] == results[1][1]


def test_different_shuffle_seeds_change_the_trajectory():
    X, y = _toy_data()
    coeffs = []
    for seed in (1, 2):
        net = build_model(CFG, 8, seed=9)
        train_network(
            net, X, y, X[:4], y[:4],
            optimizer=OptimizerConfig(kind="sgd", learning_rate=1e-2),
            epochs=2, batch_size=4, seed=seed,
        )
        coeffs.append(net.coefficients())
    assert not np.array_equal(coeffs[0], coeffs[1])


def test_single_sample_splits_are_accepted():
    X, y = _toy_data(n_per_class=1)
    net = build_model(CFG, 8, seed=0)
    curves = train_network(
        net, X, y, X[:1], y[:1],
        optimizer=OptimizerConfig(kind="sgd", learning_rate=1e-3),
        epochs=1, batch_size=32, seed=0,
    )
    assert len(curves.train_acc) == 1


def test_divergence_is_reported_with_the_epoch():
    X, y = _toy_data(n_per_class=2)
    net = build_model(CFG, 8, seed=0)
    with pytest.raises(DivergenceError) as err:
        train_network(
            net, X * 1e3, y, X[:2] * 1e3, y[:2],
            optimizer=OptimizerConfig(kind="sgd", learning_rate=1e30),
            epochs=10, batch_size=4, seed=0,
        )
    assert "epoch" in str(err.value)


def test_label_out_of_range_rejected():
    X, y = _toy_data(n_per_class=2)
    net = build_model(CFG, 8, seed=0)
    with pytest.raises(LabelError):
        train_network(
            net, X, y + 1, X, y,
            optimizer=OptimizerConfig(), epochs=1, batch_size=4, seed=0,
        )


def test_bad_loop_parameters_rejected():
    X, y = _toy_data(n_per_class=1)
    net = build_model(CFG, 8, seed=0)
    with pytest.raises(ConfigError):
        train_network(net, X, y, X, y, optimizer=OptimizerConfig(), epochs=0, batch_size=4)
    with pytest.raises(ConfigError):
        train_network(net, X, y, X, y, optimizer=OptimizerConfig(), epochs=1, batch_size=0)


def test_curves_csv_round_trip(tmp_path):
    curves = EpochCurves(
        train_acc=[0.5, 0.75],
        val_acc=[0.4, 0.6],
        train_loss=[1.0986122886681098, 0.7],
        val_loss=[1.1, 0.8],
    )
    path = tmp_path / "curves.csv"
    curves.write_csv(path)
    text = path.read_text()
    assert text.splitlines()[0] == "epoch,train_acc,val_acc,train_loss,val_loss"
    back = read_curves_csv(path)
    assert back.train_acc == curves.train_acc
    assert back.val_loss == curves.val_loss
    assert back.train_loss[0] == curves.train_loss[0]  # full precision survives
