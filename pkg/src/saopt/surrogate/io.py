"""Plain-text forest serialization.

Layout, one record per line, fields separated by single spaces, every float
written with ``float.hex`` so a round trip is bit-exact::

    saopt-forest 1
    hyperparams <n_trees> <criterion> <min_samples_split> <min_samples_leaf> <max_features> <bootstrap 0|1>
    sigma <hex>
    training <n_samples> <n_features>
    <hex x_1> ... <hex x_d> <hex y>          (n_samples lines)
    tree <n_nodes> <n_features>
    <kind S|L> <feature> <hex threshold> <hex value> <left> <right>   (n_nodes lines)
    ...                                      (one tree block per tree)
    end

Leaves carry feature and children as -1. Child ids are offsets within the tree.
"""

from __future__ import annotations

import os
from typing import IO

import numpy as np

from .forest import ForestHyperparams, RandomForestModel, TrainingSet, Tree

MAGIC = "saopt-forest"
VERSION = 1


def _hex(x) -> str:
    return float(x).hex()


def dump_forest(model: RandomForestModel, fh: IO[str]):
    hp = model.hyperparams
    fh.write(f"{MAGIC} {VERSION}\n")
    fh.write(
        f"hyperparams {hp.n_trees} {hp.criterion} {hp.min_samples_split} "
        f"{hp.min_samples_leaf} {hp.max_features} {int(hp.bootstrap)}\n"
    )
    fh.write(f"sigma {_hex(model.sigma_train)}\n")
    data = model.training
    n, d = (0, 0) if data is None else (len(data), data.n_features)
    fh.write(f"training {n} {d}\n")
    for i in range(n):
        row = [_hex(v) for v in data.inputs[i]] + [_hex(data.targets[i])]
        fh.write(" ".join(row) + "\n")
    for t in model.trees:
        fh.write(f"tree {t.n_nodes} {t.n_features}\n")
        for i in range(t.n_nodes):
            kind = "S" if t.feature[i] >= 0 else "L"
            fh.write(
                f"{kind} {int(t.feature[i])} {_hex(t.threshold[i])} {_hex(t.value[i])} "
                f"{int(t.left[i])} {int(t.right[i])}\n"
            )
    fh.write("end\n")


def load_forest(fh: IO[str]) -> RandomForestModel:
    lines = iter(fh.read().splitlines())

    def expect(tag):
        parts = next(lines).split()
        if not parts or parts[0] != tag:
            raise ValueError(f"malformed forest file: expected {tag!r}, got {parts[:1]}")
        return parts[1:]

    head = expect(MAGIC)
    if int(head[0]) != VERSION:
        raise ValueError(f"unsupported forest file version {head[0]}")
    n_trees, crit, mss, msl, mf, boot = expect("hyperparams")
    hp = ForestHyperparams(int(n_trees), crit, int(mss), int(msl), int(mf), bool(int(boot)))
    sigma = float.fromhex(expect("sigma")[0])
    n, d = map(int, expect("training"))
    training = None
    if n:
        rows = np.array([[float.fromhex(v) for v in next(lines).split()] for _ in range(n)]).reshape(n, d + 1)
        training = TrainingSet(rows[:, :d], rows[:, d])
    trees = []
    for line in lines:
        parts = line.split()
        if parts[0] == "end":
            break
        if parts[0] != "tree":
            raise ValueError(f"malformed forest file: unexpected record {parts[0]!r}")
        n_nodes, n_feat = int(parts[1]), int(parts[2])
        recs = [next(lines).split() for _ in range(n_nodes)]
        trees.append(
            Tree(
                np.array([int(r[1]) for r in recs], dtype=np.int64),
                np.array([float.fromhex(r[2]) for r in recs]),
                np.array([int(r[4]) for r in recs], dtype=np.int64),
                np.array([int(r[5]) for r in recs], dtype=np.int64),
                np.array([float.fromhex(r[3]) for r in recs]),
                n_feat,
            )
        )
    else:
        raise ValueError("malformed forest file: missing end record")
    return RandomForestModel(hp, trees, training, sigma)


def save_forest(model: RandomForestModel, path: str | os.PathLike):
    with open(path, "w", encoding="ascii") as fh:
        dump_forest(model, fh)


def read_forest(path: str | os.PathLike) -> RandomForestModel:
    with open(path, encoding="ascii") as fh:
        return load_forest(fh)
