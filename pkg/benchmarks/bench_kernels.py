"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each kernel is fed identical inputs on both backends; outputs are checked for
bit equality before timings are reported.
"""

import argparse
import timeit

import numpy as np

from saopt import _backend


def _tree_case(rng):
    X = rng.random((800, 8))
    y = np.sin(5 * X[:, 0]) + X[:, 1] * X[:, 2] + 0.1 * rng.standard_normal(800)
    order = np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T.astype(np.int64))
    return (X, y, np.ascontiguousarray(y - y.mean()), order, 5, 2, 1, 12345)


def _forest_case(rng, py):
    X, y, yc, order, *_ = _tree_case(rng)
    trees = [py.build_tree(X, y, yc, order, 5, 2, 1, s) for s in range(100)]
    offsets = np.cumsum([0] + [len(t[0]) for t in trees[:-1]]).astype(np.int64)
    cat = [np.concatenate([t[i] for t in trees]) for i in range(5)]
    left = np.concatenate([np.where(t[2] >= 0, t[2] + o, -1) for t, o in zip(trees, offsets)])
    right = np.concatenate([np.where(t[3] >= 0, t[3] + o, -1) for t, o in zip(trees, offsets)])
    return (cat[0], cat[1], left, right, cat[4], offsets, rng.random((63, 8)))


def _plant_case(rng):
    H = 8760
    feed = np.clip(rng.normal(100, 7, (2, H)), 0, None)
    return (feed, np.full(2, 700.0), np.full(2, 110.0), np.full(2, 800.0), np.full(2, 90.0), np.full(2, np.inf),
            rng.random((2, H)), 0.001, np.zeros(H), np.zeros(H, dtype=np.uint8), 3, 3, 5, 72, 4, 24)


def _nds_case(rng):
    return (np.ascontiguousarray(rng.random((120, 2))),)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    names = _backend.available()
    if "cython" not in names:
        print("compiled extension not built; only the Python backend is available")
    mods = {n: _backend.load(n) for n in names}
    py = mods["python"]
    rng = np.random.default_rng(0)
    cases = {
        "build_tree (800x8)": ("build_tree", _tree_case(rng)),
        "predict_forest (100 trees, 63 rows)": ("predict_forest", _forest_case(rng, py)),
        "run_plant (2 trains, 8760 h)": ("run_plant", _plant_case(rng)),
        "nds_ranks (120x2)": ("nds_ranks", _nds_case(rng)),
    }
    print(f"{'kernel':38s}" + "".join(f"{n:>12s}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for label, (fn, inputs) in cases.items():
        outs = [getattr(m, fn)(*inputs) for m in mods.values()]
        ref = outs[0] if isinstance(outs[0], tuple) else (outs[0],)
        for o in outs[1:]:
            o = o if isinstance(o, tuple) else (o,)
            assert all(np.array_equal(np.asarray(a), np.asarray(b)) for a, b in zip(ref, o)), label
        times = []
        for m in mods.values():
            f = getattr(m, fn)
            times.append(min(timeit.repeat(lambda: f(*inputs), number=1, repeat=args.repeat)))
        row = f"{label:38s}" + "".join(f"{1e3 * t:10.2f}ms" for t in times)
        if len(times) > 1:
            row += f"{times[0] / times[1]:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
