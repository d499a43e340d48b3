"""Experiment configuration and its JSON form.

Schema (``config_version`` 1); every key is optional except ``problem``:

    problem            cps1 | cps2 | psa_proxy
    mode               direct | surrogate
    algorithm          ga | nsga2 (default: ga for CPS problems, nsga2 for psa_proxy)
    generations        default 50 (ga) / 60 (nsga2)
    population         default 75 (ga) / 60 (nsga2)
    warm_size          random genomes simulated before the first generation (800)
    elite_fraction     share of the ranked population simulated every generation (0.15)
    offspring          children per generation (default population - elite for ga,
                       population for nsga2)
    blx_alpha, ga_crossover_rate, ga_mutation_rate
    nsga_crossover_rate, nsga_mutation_rate, mutation_scale, mutation_shrink
    tournament_size    members sampled per tournament (2)
    divergence_sigma   retrain when mean elite error exceeds this many training sigmas
    forest             random forest hyperparameters
    holdout_size       fresh simulations used to score the final surrogate
    front_points       points on the analytic proxy front used by GD+/IGD+
    repetitions, seed, workers, out
    cps                plant simulator parameters (see ``saopt/data/cps_default.json``)
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field

from ..evo_core import elite_size
from ..sims import CpsConfig
from ..surrogate import ForestHyperparams
from .problems import PROBLEMS

CONFIG_VERSION = 1


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str = "cps1"
    mode: str = "surrogate"
    algorithm: str | None = None
    generations: int | None = None
    population: int | None = None
    warm_size: int = 800
    elite_fraction: float = 0.15
    offspring: int | None = None
    blx_alpha: float = 0.15
    ga_crossover_rate: float = 1.0
    ga_mutation_rate: float = 0.3
    nsga_crossover_rate: float = 2 / 6
    nsga_mutation_rate: float = 2 / 6
    mutation_scale: float = 0.1
    mutation_shrink: float = 0.5
    tournament_size: int = 2
    divergence_sigma: float = 1.0
    forest: ForestHyperparams = field(default_factory=ForestHyperparams)
    holdout_size: int = 200
    front_points: int = 100
    repetitions: int = 1
    seed: int = 0
    workers: int = 1
    out: str = "results"
    cps: CpsConfig = field(default_factory=CpsConfig)

    def __post_init__(self):
        if isinstance(self.forest, dict):
            object.__setattr__(self, "forest", ForestHyperparams(**self.forest))
        if isinstance(self.cps, dict):
            object.__setattr__(self, "cps", CpsConfig.from_dict(self.cps))
        if self.problem not in PROBLEMS:
            raise ValueError(f"unknown problem {self.problem!r}; choose one of {PROBLEMS}")
        if self.mode not in ("direct", "surrogate"):
            raise ValueError(f"mode must be 'direct' or 'surrogate', got {self.mode!r}")
        algo = self.algorithm or ("nsga2" if self.problem == "psa_proxy" else "ga")
        object.__setattr__(self, "algorithm", algo)
        if algo not in ("ga", "nsga2"):
            raise ValueError(f"algorithm must be 'ga' or 'nsga2', got {algo!r}")
        two_obj = self.problem == "psa_proxy"
        if algo == "ga" and two_obj:
            raise ValueError("ga needs a single-objective problem; psa_proxy has two objectives")
        if algo == "nsga2" and not two_obj:
            raise ValueError(f"nsga2 needs a two-objective problem; {self.problem} has one")
        if self.generations is None:
            object.__setattr__(self, "generations", 50 if algo == "ga" else 60)
        if self.population is None:
            object.__setattr__(self, "population", 75 if algo == "ga" else 60)
        n_elite = elite_size(self.population, self.elite_fraction)
        if self.offspring is None:
            object.__setattr__(self, "offspring", self.population - n_elite if algo == "ga" else self.population)
        if self.generations < 1 or self.population < 2 or self.offspring < 1 or self.repetitions < 1:
            raise ValueError("generations, offspring and repetitions must be >= 1 and population >= 2")
        if algo == "nsga2" and self.offspring % 2:
            raise ValueError("nsga2 offspring count must be even (children come in pairs)")
        if algo == "ga" and n_elite + self.offspring != self.population:
            raise ValueError(f"ga keeps a steady population: elite {n_elite} + offspring {self.offspring} != {self.population}")
        if not self.population <= self.warm_size:
            raise ValueError("warm_size must be at least the population size")
        if self.workers < 1 or self.seed < 0:
            raise ValueError("workers must be >= 1 and seed >= 0")

    @property
    def n_elite(self) -> int:
        return elite_size(self.population, self.elite_fraction)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        d["forest"] = self.forest.to_dict()
        d["cps"] = self.cps.to_dict()
        return {"config_version": CONFIG_VERSION, **d}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        version = d.pop("config_version", CONFIG_VERSION)
        if version != CONFIG_VERSION:
            raise ValueError(f"unsupported config_version {version}")
        unknown = set(d) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    """Read a config file, or the ``config`` section of a run manifest."""
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    if "manifest_version" in d:
        d = d["config"]
    return ExperimentConfig.from_dict(d)


def save_config(cfg: ExperimentConfig, path: str | os.PathLike):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(cfg.to_dict(), fh, indent=2)
        fh.write("\n")
