"""Both kernel backends must agree bit for bit."""

import numpy as np
import pytest

from saopt import _backend

from oracles import best_threshold_scan, peel_fronts

needs_both = pytest.mark.skipif(len(_backend.available()) < 2, reason="compiled extension not built")


def _tree_inputs(rng, n=120, d=6):
    X = rng.random((n, d))
    y = np.sin(6 * X[:, 0]) + X[:, 1] ** 2 + 0.05 * rng.standard_normal(n)
    order = np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T.astype(np.int64))
    return X, y, np.ascontiguousarray(y - y.mean()), order


def _plant_inputs(rng, n_trains=2, H=500):
    feed = np.clip(rng.normal(100, 10, (n_trains, H)), 0, None)
    fail_u = rng.random((n_trains, H))
    alpha = np.repeat(rng.uniform(0.05, 0.5, H // 24 + 1), 24)[:H].copy()
    pause = (rng.random(H) < 0.05).astype(np.uint8)
    return (
        feed,
        np.full(n_trains, 300.0), np.full(n_trains, 110.0), np.full(n_trains, 250.0),
        np.full(n_trains, 90.0), np.full(n_trains, np.inf),
        fail_u, 0.01, alpha, pause, 1, 1, 2, 72, 4, 24,
    )


def test_backend_names(kernels):
    assert kernels.NAME in ("python", "cython")
    assert _backend.kernels.NAME == _backend.BACKEND


@needs_both
def test_build_tree_identical():
    py, cy = _backend.load("python"), _backend.load("cython")
    rng = np.random.default_rng(0)
    for seed in range(5):
        X, y, yc, order = _tree_inputs(rng)
        for mf in (1, 3, 6):
            a = py.build_tree(X, y, yc, order, mf, 2, 1, seed)
            b = cy.build_tree(X, y, yc, order, mf, 2, 1, seed)
            for u, v in zip(a, b):
                assert np.array_equal(np.asarray(u), np.asarray(v))


@needs_both
def test_predict_forest_identical():
    py, cy = _backend.load("python"), _backend.load("cython")
    rng = np.random.default_rng(1)
    X, y, yc, order = _tree_inputs(rng)
    trees = [py.build_tree(X, y, yc, order, 3, 2, 1, s) for s in range(7)]
    offsets = np.cumsum([0] + [len(t[0]) for t in trees[:-1]]).astype(np.int64)
    feature = np.concatenate([t[0] for t in trees])
    threshold = np.concatenate([t[1] for t in trees])
    left = np.concatenate([np.where(t[2] >= 0, t[2] + o, -1) for t, o in zip(trees, offsets)])
    right = np.concatenate([np.where(t[3] >= 0, t[3] + o, -1) for t, o in zip(trees, offsets)])
    value = np.concatenate([t[4] for t in trees])
    Q = rng.random((300, X.shape[1]))
    a = py.predict_forest(feature, threshold, left, right, value, offsets, Q)
    b = cy.predict_forest(feature, threshold, left, right, value, offsets, Q)
    assert np.array_equal(np.asarray(a), np.asarray(b))


@needs_both
@pytest.mark.parametrize("n_trains", [1, 2])
def test_run_plant_identical(n_trains):
    py, cy = _backend.load("python"), _backend.load("cython")
    args = _plant_inputs(np.random.default_rng(2 + n_trains), n_trains)
    a = py.run_plant(*args)
    b = cy.run_plant(*args)
    for u, v in zip(a, b):
        assert np.array_equal(np.asarray(u), np.asarray(v))


@needs_both
def test_nds_ranks_identical():
    py, cy = _backend.load("python"), _backend.load("cython")
    rng = np.random.default_rng(4)
    for _ in range(20):
        G = np.round(rng.random((50, 2)) * 8)  # ties on purpose
        assert np.array_equal(np.asarray(py.nds_ranks(G)), np.asarray(cy.nds_ranks(G)))


def test_nds_ranks_match_peeling(kernels):
    rng = np.random.default_rng(5)
    for _ in range(20):
        G = np.round(rng.random((40, 3)) * 5)
        rank = np.asarray(kernels.nds_ranks(np.ascontiguousarray(G)))
        for r, front in enumerate(peel_fronts(G, [1, 1, 1]), start=1):
            assert sorted(np.flatnonzero(rank == r).tolist()) == front


def test_root_split_is_optimal_single_feature(kernels):
    rng = np.random.default_rng(6)
    x = rng.random(60)
    y = np.where(x < 0.4, 1.0, 3.0) + 0.1 * rng.standard_normal(60)
    X = x[:, None].copy()
    order = np.argsort(X, axis=0, kind="stable").T.astype(np.int64).copy()
    feature, threshold, *_ = kernels.build_tree(X, y, np.ascontiguousarray(y - y.mean()), order, 1, 2, 1, 0)
    _, thr = best_threshold_scan(x, y)
    assert feature[0] == 0
    assert threshold[0] == pytest.approx(thr, rel=0, abs=1e-12)


def test_plant_zero_feed_does_nothing(kernels):
    args = list(_plant_inputs(np.random.default_rng(7), 2, 100))
    args[0] = np.zeros_like(args[0])
    product, flares, levels, recycle, procured, failures, downtime = kernels.run_plant(*args)
    assert product == 0.0 and recycle == 0.0
    assert np.all(np.asarray(flares) == 0) and np.all(np.asarray(levels) == 0)
