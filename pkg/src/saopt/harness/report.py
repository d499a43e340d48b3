"""Speedup accounting and on-disk results.

Each run is written to ``<out>/<experiment id>/``:

generations.csv
    One row per generation, numeric cells only. ``experiment_id`` holds the
    repetition index; the descriptive id lives in the manifest. GA runs have
    columns experiment_id, generation, best_fitness, best_so_far, elite_mean,
    elite_best, population_mean, sim_calls, surrogate_calls, diverged, retrains.
    NSGA-II runs have experiment_id, generation, hv, gd_plus, igd_plus,
    sim_calls, surrogate_calls, diverged, retrains (missing values are nan).
final_front.csv
    Simulator-evaluated final front (final elite for GA runs): one column per
    objective followed by one column per gene.
manifest.json
    Full config, repetition, package version, kernel backend and wall time.
    ``saopt run --config manifest.json`` repeats the run bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
import os
import platform
from dataclasses import dataclass

import numpy as np

from .. import __version__
from .._backend import BACKEND
from ..nsga import DominanceOrdering, non_dominated
from ..surrogate import TrainingSet, normalized_mae, predict_forest, r2_score
from .loops import RunResult
from .problems import make_problem

MANIFEST_VERSION = 1

GA_COLUMNS = (
    "experiment_id", "generation", "best_fitness", "best_so_far", "elite_mean", "elite_best",
    "population_mean", "sim_calls", "surrogate_calls", "diverged", "retrains",
)
NSGA_COLUMNS = (
    "experiment_id", "generation", "hv", "gd_plus", "igd_plus",
    "sim_calls", "surrogate_calls", "diverged", "retrains",
)


@dataclass
class SpeedupReport:
    sim_call_ratio: float
    sim_call_ratio_excluding_warm: float
    wall_time_ratio: float
    direct_sim_calls: int
    surrogate_sim_calls: int
    warm_size: int
    holdout_r2: tuple[float, ...] = ()
    holdout_nmae: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def compute_speedup(direct: RunResult, surrogate: RunResult, holdout: list[TrainingSet] | None = None) -> SpeedupReport:
    """Simulator-call and wall-time ratios of a direct run over its surrogate twin."""
    dc, sc = direct.config, surrogate.config
    if dc.mode != "direct" or sc.mode != "surrogate":
        raise ValueError("compute_speedup needs a direct run and a surrogate run, in that order")
    if (dc.problem, dc.algorithm, dc.generations) != (sc.problem, sc.algorithm, sc.generations):
        raise ValueError("runs differ in problem, algorithm or generation count")
    if len(direct.records) != len(surrogate.records):
        raise ValueError("runs have different numbers of generation records")
    d_calls = direct.records[-1].sim_calls
    s_calls = surrogate.records[-1].sim_calls
    d_ex, s_ex = d_calls - dc.warm_size, s_calls - sc.warm_size
    r2, nmae = (), ()
    if holdout is not None:
        if not surrogate.models:
            raise ValueError("surrogate run carries no fitted models")
        preds = [predict_forest(m, h.inputs) for m, h in zip(surrogate.models, holdout)]
        r2 = tuple(r2_score(h.targets, p) for h, p in zip(holdout, preds))
        nmae = tuple(normalized_mae(h.targets, p, m.sigma_train) for h, p, m in zip(holdout, preds, surrogate.models))
    return SpeedupReport(
        sim_call_ratio=d_calls / s_calls,
        sim_call_ratio_excluding_warm=d_ex / s_ex if s_ex > 0 else math.inf,
        wall_time_ratio=direct.wall_time / surrogate.wall_time if surrogate.wall_time > 0 else math.inf,
        direct_sim_calls=d_calls,
        surrogate_sim_calls=s_calls,
        warm_size=sc.warm_size,
        holdout_r2=r2,
        holdout_nmae=nmae,
    )


def _cell(v) -> str:
    if v is None:
        return "nan"
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def generation_rows(result: RunResult) -> tuple[tuple[str, ...], list[list[str]]]:
    rid = result.repetition
    rows = []
    if result.config.algorithm == "ga":
        for r in result.records:
            rows.append([rid, r.generation, r.best, r.best_so_far, r.elite_mean, r.elite_best, r.population_mean,
                         r.sim_calls, r.surrogate_calls, r.diverged, r.retrains])
        cols = GA_COLUMNS
    else:
        for r in result.records:
            rows.append([rid, r.generation, r.hv, r.gd_plus, r.igd_plus,
                         r.sim_calls, r.surrogate_calls, r.diverged, r.retrains])
        cols = NSGA_COLUMNS
    return cols, [[_cell(v) for v in row] for row in rows]


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def export_results(result: RunResult, out_dir: str | os.PathLike | None = None) -> dict[str, str]:
    """Write generations.csv, final_front.csv and manifest.json; returns their paths."""
    if not result.records:
        raise ValueError("nothing to export: run has no generation records")
    cfg = result.config
    root = os.path.join(os.fspath(out_dir if out_dir is not None else cfg.out), result.experiment_id)
    try:
        os.makedirs(root, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {root}: {exc.strerror}") from exc

    paths = {
        "generations": os.path.join(root, "generations.csv"),
        "final_front": os.path.join(root, "final_front.csv"),
        "manifest": os.path.join(root, "manifest.json"),
    }
    cols, rows = generation_rows(result)
    _write_csv(paths["generations"], cols, rows)

    problem = make_problem(cfg.problem, cfg.cps)
    front = result.final_front
    header = list(problem.objective_names) + [s.name for s in problem.specs]
    body = [[_cell(v) for v in list(m.fitness.values) + list(m.genome)] for m in front]
    _write_csv(paths["final_front"], header, body)

    manifest = {
        "manifest_version": MANIFEST_VERSION,
        "experiment_id": result.experiment_id,
        "repetition": result.repetition,
        "config": cfg.to_dict(),
        "package_version": __version__,
        "backend": BACKEND,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "wall_time_s": result.wall_time,
        "reference_point": None if result.reference_point is None else [float(v) for v in result.reference_point],
        "target_hv": result.target_hv,
        "files": {k: os.path.basename(v) for k, v in paths.items() if k != "manifest"},
    }
    with open(paths["manifest"], "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return paths


def read_numeric_csv(path: str | os.PathLike) -> tuple[list[str], np.ndarray]:
    """Strict reader: a header row, then rows of floats of equal length."""
    with open(path, newline="", encoding="ascii") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    for i, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise ValueError(f"{path}:{i}: expected {len(header)} cells, got {len(row)}")
    data = np.array([[float(c) for c in row] for row in body], dtype=np.float64).reshape(len(body), len(header))
    return header, data


def scan_runs(out_dir: str | os.PathLike) -> list[dict]:
    """Manifests (with the parsed generations table attached) found under ``out_dir``."""
    found = []
    for name in sorted(os.listdir(out_dir)):
        mpath = os.path.join(out_dir, name, "manifest.json")
        if not os.path.isfile(mpath):
            continue
        with open(mpath, encoding="utf-8") as fh:
            m = json.load(fh)
        m["dir"] = os.path.join(out_dir, name)
        m["columns"], m["table"] = read_numeric_csv(os.path.join(m["dir"], m["files"]["generations"]))
        found.append(m)
    return found


def union_reference_front(out_dir: str | os.PathLike, problem: str) -> np.ndarray:
    """Non-dominated union of every direct-mode final front for ``problem`` under ``out_dir``."""
    pts = []
    n_obj = None
    for m in scan_runs(out_dir):
        c = m["config"]
        if c["problem"] != problem or c["mode"] != "direct":
            continue
        n_obj = len(make_problem(problem).objective_names)
        _, data = read_numeric_csv(os.path.join(m["dir"], m["files"]["final_front"]))
        pts.append(data[:, :n_obj])
    if not pts:
        raise ValueError(f"no direct-mode runs of {problem} under {out_dir}")
    P = np.vstack(pts)
    idx = non_dominated(P, DominanceOrdering(make_problem(problem).directions))
    return np.unique(P[idx], axis=0)


def summarize(out_dir: str | os.PathLike) -> list[dict]:
    """Pair direct and surrogate runs by (problem, algorithm, seed, repetition) and compare calls."""
    runs = scan_runs(out_dir)
    by_key: dict[tuple, dict] = {}
    for m in runs:
        c = m["config"]
        key = (c["problem"], c["algorithm"], c["seed"], m["repetition"])
        by_key.setdefault(key, {})[c["mode"]] = m
    out = []
    for key, pair in sorted(by_key.items()):
        if set(pair) != {"direct", "surrogate"}:
            continue
        d, s = pair["direct"], pair["surrogate"]
        col = d["columns"].index("sim_calls")
        dc, sc = d["table"][-1, col], s["table"][-1, col]
        out.append({
            "problem": key[0],
            "algorithm": key[1],
            "seed": key[2],
            "repetition": key[3],
            "direct_sim_calls": int(dc),
            "surrogate_sim_calls": int(sc),
            "sim_call_ratio": float(dc / sc),
            "wall_time_ratio": float(d["wall_time_s"] / s["wall_time_s"]),
        })
    return out
