import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from saopt.evo_core import Direction, GeneSpec, single_objective_order
from saopt.nsga import nsga_rank_order
from saopt.surrogate import (
    ForestHyperparams,
    RandomForestModel,
    TrainingSet,
    Tree,
    divergence_check,
    dump_forest,
    elite_deviation,
    fit_forest,
    fit_tree,
    load_forest,
    normalized_mae,
    predict_forest,
    predict_tree,
    r2_score,
    read_forest,
    retrain,
    save_forest,
    warm_start,
)

from oracles import best_threshold_scan


def _step_data():
    x = np.concatenate([np.linspace(-1, -0.05, 10), np.linspace(0.05, 1, 10)])
    return TrainingSet(x[:, None], (x >= 0).astype(float))


def _leaf(v, d=1):
    return Tree(np.array([-1]), np.array([0.0]), np.array([-1]), np.array([-1]), np.array([float(v)]), d)


def _sine(n=200, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, 2 * np.pi, n)
    return TrainingSet(x[:, None], np.sin(x))


# -- trees --------------------------------------------------------------------

def test_hyperparam_defaults_and_validation():
    hp = ForestHyperparams()
    assert (hp.n_trees, hp.criterion, hp.min_samples_split, hp.min_samples_leaf, hp.max_features, hp.bootstrap) == (
        100, "mse", 2, 1, 5, True)
    with pytest.raises(ValueError):
        ForestHyperparams(n_trees=0)
    with pytest.raises(ValueError):
        ForestHyperparams(criterion="mae")


def test_constant_target_is_single_leaf():
    data = TrainingSet(np.random.default_rng(0).random((30, 3)), np.full(30, 4.25))
    tree = fit_tree(data)
    assert tree.n_nodes == 1 and tree.feature[0] == -1 and tree.value[0] == 4.25


def test_step_function_depth_one_exact():
    data = _step_data()
    tree = fit_tree(data)
    assert tree.depth == 1
    assert -0.05 < tree.threshold[0] < 0.05
    _, thr = best_threshold_scan(data.inputs[:, 0], data.targets)
    assert tree.threshold[0] == pytest.approx(thr)
    pred = predict_tree(tree, data.inputs)
    assert np.mean((pred - data.targets) ** 2) == 0.0
    assert predict_tree(tree, np.array([-1.0])) == 0.0


def test_two_samples_one_split():
    tree = fit_tree(TrainingSet([[0.0], [1.0]], [2.0, 5.0]))
    assert tree.n_nodes == 3
    assert predict_tree(tree, np.array([[0.0], [1.0]])).tolist() == [2.0, 5.0]


def test_tree_errors():
    with pytest.raises(ValueError):
        fit_tree(TrainingSet(np.zeros((0, 2)), np.zeros(0)))
    tree = fit_tree(_step_data())
    with pytest.raises(ValueError):
        predict_tree(tree, np.zeros(2))
    with pytest.raises(ValueError):
        TrainingSet(np.zeros((3, 2)), np.zeros(4))


def test_leaf_tree_prediction_and_piecewise_constancy():
    assert predict_tree(_leaf(7.0, 3), np.array([1.0, -5.0, 9.0])) == 7.0
    tree = fit_tree(_step_data())
    assert predict_tree(tree, np.array([0.3])) == predict_tree(tree, np.array([0.9]))


def test_threshold_scan_tiebreak_uses_lower_feature():
    # two identical features: the split must land on feature 0
    x = np.linspace(0, 1, 20)
    data = TrainingSet(np.column_stack([x, x]), (x > 0.5).astype(float))
    tree = fit_tree(data, ForestHyperparams(max_features=2))
    assert tree.feature[0] == 0


# -- forests ------------------------------------------------------------------

def test_forest_default_size_and_constant():
    data = TrainingSet(np.random.default_rng(1).random((40, 4)), np.full(40, -3.5))
    model = fit_forest(data, rng=0)
    assert len(model.trees) == 100
    assert np.all(predict_forest(model, np.random.default_rng(2).random((10, 4))) == -3.5)
    assert model.sigma_train == 0.0


def test_forest_sine_r2():
    data = _sine()
    model = fit_forest(data, rng=3)
    assert r2_score(data.targets, predict_forest(model, data.inputs)) >= 0.95


def test_forest_mean_of_trees():
    model = RandomForestModel(ForestHyperparams(n_trees=2), [_leaf(1.0), _leaf(3.0)], None, 1.0)
    assert predict_forest(model, np.array([0.0])) == 2.0
    swapped = RandomForestModel(ForestHyperparams(n_trees=2), [_leaf(3.0), _leaf(1.0)], None, 1.0)
    assert predict_forest(swapped, np.array([0.0])) == 2.0


def test_forest_tree_order_irrelevant():
    data = _sine(60)
    model = fit_forest(data, ForestHyperparams(n_trees=10), rng=4)
    Q = np.linspace(0, 6, 50)[:, None]
    rev = RandomForestModel(model.hyperparams, model.trees[::-1], model.training, model.sigma_train)
    np.testing.assert_allclose(predict_forest(rev, Q), predict_forest(model, Q), rtol=0, atol=1e-12)


def test_forest_errors():
    with pytest.raises(ValueError):
        fit_forest(TrainingSet([[1.0]], [1.0]))
    with pytest.raises(RuntimeError):
        predict_forest(RandomForestModel(), np.zeros(2))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 40), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_forest_predictions_within_target_hull(n, d, seed):
    rng = np.random.default_rng(seed)
    data = TrainingSet(rng.random((n, d)), rng.normal(0, 10, n))
    model = fit_forest(data, ForestHyperparams(n_trees=8), rng=seed)
    pred = predict_forest(model, rng.uniform(-1, 2, (30, d)))
    lo, hi = data.targets.min(), data.targets.max()
    assert np.all(pred >= lo - 1e-9 * max(1, abs(lo))) and np.all(pred <= hi + 1e-9 * max(1, abs(hi)))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 40), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_single_unbagged_tree_equals_cart(n, d, seed):
    rng = np.random.default_rng(seed)
    data = TrainingSet(rng.random((n, d)), rng.normal(0, 1, n))
    hp = ForestHyperparams(n_trees=1, bootstrap=False, max_features=d)
    model = fit_forest(data, hp, rng=seed)
    tree = fit_tree(data, hp)
    Q = rng.random((20, d))
    assert np.array_equal(predict_forest(model, Q), predict_tree(tree, Q))


def test_forest_deterministic_and_worker_independent():
    data = _sine(120, seed=5)
    a = fit_forest(data, ForestHyperparams(n_trees=20), rng=9)
    b = fit_forest(data, ForestHyperparams(n_trees=20), rng=9)
    c = fit_forest(data, ForestHyperparams(n_trees=20), rng=9, workers=3)
    Q = np.linspace(0, 6, 40)[:, None]
    pa = predict_forest(a, Q)
    assert np.array_equal(pa, predict_forest(b, Q)) and np.array_equal(pa, predict_forest(c, Q))
    d = fit_forest(data, ForestHyperparams(n_trees=20), rng=10)
    assert not np.array_equal(pa, predict_forest(d, Q))


def test_accuracy_metrics():
    y = np.array([1.0, 2.0, 3.0])
    assert r2_score(y, y) == 1.0
    assert r2_score(y, np.full(3, 2.0)) == 0.0
    assert normalized_mae(y, y + 0.5, 1.0) == 0.5


def test_serialization_round_trip(tmp_path):
    data = _sine(80)
    model = fit_forest(data, ForestHyperparams(n_trees=7), rng=11)
    buf = io.StringIO()
    dump_forest(model, buf)
    buf.seek(0)
    back = load_forest(buf)
    Q = np.linspace(-1, 7, 100)[:, None]
    assert np.array_equal(predict_forest(back, Q), predict_forest(model, Q))
    assert back.hyperparams == model.hyperparams and back.sigma_train == model.sigma_train
    assert np.array_equal(back.training.inputs, model.training.inputs)
    path = tmp_path / "f.txt"
    save_forest(model, path)
    assert np.array_equal(predict_forest(read_forest(path), Q), predict_forest(model, Q))


def test_load_rejects_garbage():
    with pytest.raises(ValueError):
        load_forest(io.StringIO("not a forest\n"))


# -- policy -------------------------------------------------------------------

SPECS = [GeneSpec(f"x{i}", 0.0, 1.0) for i in range(3)]


def _evaluator(G):
    return G.sum(axis=1)


@pytest.mark.parametrize("keep", [75, 60])
def test_warm_start_sizes(keep):
    pop, sets = warm_start(SPECS, 800, keep, _evaluator, single_objective_order, np.random.default_rng(0))
    assert len(pop) == keep and len(sets) == 1 and len(sets[0]) == 800
    kept = pop.objectives()[:, 0]
    assert kept.min() >= np.sort(sets[0].targets)[-keep]


def test_warm_start_keep_all_and_errors():
    pop, sets = warm_start(SPECS, 20, 20, _evaluator, single_objective_order, np.random.default_rng(1))
    assert sorted(pop.objectives()[:, 0].tolist()) == sorted(sets[0].targets.tolist())
    with pytest.raises(ValueError):
        warm_start(SPECS, 10, 11, _evaluator, single_objective_order, np.random.default_rng(1))


def test_warm_start_two_objectives():
    def two(G):
        return np.column_stack([G[:, 0], 1 - G[:, 0] + G[:, 1]])

    pop, sets = warm_start(SPECS, 100, 60, two, nsga_rank_order, np.random.default_rng(2),
                           (Direction.MAXIMIZE, Direction.MAXIMIZE))
    assert len(pop) == 60 and len(sets) == 2
    assert np.array_equal(sets[0].inputs, sets[1].inputs)


def _constant_model(sigma_targets):
    data = TrainingSet(np.random.default_rng(0).random((len(sigma_targets), 1)), sigma_targets)
    return fit_forest(data, ForestHyperparams(n_trees=3), rng=0)


def test_divergence_examples():
    data = _sine(50)
    model = fit_forest(data, ForestHyperparams(n_trees=5), rng=1)
    E = data.inputs[:5]
    assert not divergence_check(model, E, predict_forest(model, E))

    # forest constant at 50 whose targets have sample std 10
    targets = np.array([40.0, 60.0] * 25)
    targets = 50 + (targets - 50) * 10 / np.std(targets, ddof=1)
    hp = ForestHyperparams(n_trees=3, bootstrap=False)
    model = fit_forest(TrainingSet(np.zeros((50, 1)), targets), hp, rng=0)
    assert model.sigma_train == pytest.approx(10.0)
    E = np.zeros((4, 1))
    assert np.allclose(predict_forest(model, E), 50.0)
    assert elite_deviation(model, E, np.full(4, 100.0)) == pytest.approx(50.0)
    assert divergence_check(model, E, np.full(4, 100.0))

    flat = _constant_model(np.full(10, 2.0))
    assert flat.sigma_train == 0.0
    assert divergence_check(flat, np.zeros((1, 1)), [2.5])

    with pytest.raises(ValueError):
        elite_deviation(flat, np.zeros((0, 1)), [])


def test_retrain_accounting_and_sigma():
    rng = np.random.default_rng(3)
    data = TrainingSet(rng.random((100, 2)), rng.normal(0, 4, 100))
    model = fit_forest(data, ForestHyperparams(n_trees=5), rng=0)
    one = retrain(model, TrainingSet(rng.random((1, 2)), [1.0]), rng=1)
    assert one.n_samples == 101
    dup = retrain(model, data, rng=2)
    assert dup.sigma_train == pytest.approx(model.sigma_train, rel=0.01)
    with pytest.raises(ValueError):
        retrain(model, TrainingSet(np.zeros((0, 2)), np.zeros(0)), rng=0)


def test_retrain_fills_missing_region():
    x = np.linspace(-1, 1, 40)
    y = (x >= 0).astype(float)
    left = x < 0
    hp = ForestHyperparams(n_trees=10, max_features=1)
    model = fit_forest(TrainingSet(x[left][:, None], y[left]), hp, rng=0)
    mse_before = np.mean((predict_forest(model, x[:, None]) - y) ** 2)
    model = retrain(model, TrainingSet(x[~left][:, None], y[~left]), rng=1)
    mse_after = np.mean((predict_forest(model, x[:, None]) - y) ** 2)
    assert mse_after <= mse_before
