"""Surrogate-assisted GA and NSGA-II main loops, plus their direct baselines.

Every random draw is taken from a stream named by (seed, repetition, purpose,
...) so two runs with the same config agree bit for bit whatever the worker
count, and direct and surrogate runs share their warm-start sample.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .. import _rng
from ..evo_core import (
    Individual,
    Population,
    Source,
    blx_alpha_crossover,
    gaussian_mutation,
    init_random_population,
    intermediate_crossover,
    random_substitution_mutation,
    single_objective_order,
    tournament_selection,
)
from ..metrics import gd_plus, hypervolume_2d, igd_plus
from ..nsga import DominanceOrdering, non_dominated, nsga_rank_order
from ..sims import analytic_front, normalize_objectives
from ..surrogate import RandomForestModel, TrainingSet, evaluate_population, fit_forest, predict_forest, warm_start
from .config import ExperimentConfig
from .problems import Problem, make_problem


@dataclass
class GenerationRecord:
    generation: int
    sim_calls: int
    surrogate_calls: int
    diverged: bool
    retrains: int
    wall_time: float
    best: float | None = None
    best_so_far: float | None = None
    elite_mean: float | None = None
    elite_best: float | None = None
    population_mean: float | None = None
    front: np.ndarray | None = None
    hv: float | None = None
    gd_plus: float | None = None
    igd_plus: float | None = None
    elite_sources: tuple[str, ...] = ()
    elite_deviation: tuple[float, ...] = ()


@dataclass
class RunResult:
    config: ExperimentConfig
    repetition: int
    records: list[GenerationRecord]
    population: Population
    elite: Population
    models: list[RandomForestModel]
    warm: list[TrainingSet]
    reference_point: np.ndarray | None = None
    target_hv: float | None = None
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def experiment_id(self) -> str:
        c = self.config
        return f"{c.problem}-{c.algorithm}-{c.mode}-s{c.seed}-r{self.repetition}"

    @property
    def final_front(self) -> Population:
        """Simulator-evaluated final front (the final elite for single-objective runs)."""
        if self.config.algorithm == "ga":
            return self.elite
        return self.extra["front_pop"]


class _Run:
    """Shared state of one repetition: streams, call counters and surrogates."""

    def __init__(self, cfg: ExperimentConfig, repetition: int):
        self.cfg = cfg
        self.rep = repetition
        self.problem: Problem = make_problem(cfg.problem, cfg.cps)
        self.sim_calls = 0
        self.surrogate_calls = 0
        self.retrains = 0
        self.fits = 0
        self.models: list[RandomForestModel] = []
        self.buf_X: list[np.ndarray] = []
        self.buf_Y: list[np.ndarray] = []
        self.t0 = time.perf_counter()

    def stream(self, *key) -> np.random.Generator:
        return _rng.derive(self.cfg.seed, self.rep, *key)

    def simulate(self, G: np.ndarray, generation: int, role: int) -> np.ndarray:
        keys = [(self.cfg.seed, self.rep, _rng.SIM, generation, role, i) for i in range(G.shape[0])]
        self.sim_calls += G.shape[0]
        return self.problem.evaluate(G, keys, workers=self.cfg.workers)

    @property
    def surrogate(self) -> bool:
        return self.cfg.mode == "surrogate"

    def fit(self, sets: list[TrainingSet]):
        self.models = [
            fit_forest(s, self.cfg.forest, self.stream(_rng.FOREST, self.fits, j), workers=self.cfg.workers)
            for j, s in enumerate(sets)
        ]
        self.fits += 1

    def predict(self, G: np.ndarray) -> np.ndarray:
        self.surrogate_calls += G.shape[0]
        return np.column_stack([predict_forest(m, G) for m in self.models])

    def deviations(self, E: np.ndarray, S: np.ndarray) -> tuple[float, ...]:
        P = np.column_stack([predict_forest(m, E) for m in self.models])
        return tuple(float(v) for v in np.mean(np.abs(P - S), axis=0))

    def breached(self, dev) -> bool:
        return any(d > self.cfg.divergence_sigma * m.sigma_train for d, m in zip(dev, self.models))

    def remember(self, G: np.ndarray, Y: np.ndarray):
        self.buf_X.append(G)
        self.buf_Y.append(Y)

    def retrain(self):
        X = np.vstack(self.buf_X)
        Y = np.vstack(self.buf_Y)
        sets = [m.training.append(TrainingSet(X, Y[:, j])) for j, m in enumerate(self.models)]
        self.fit(sets)
        self.buf_X.clear()
        self.buf_Y.clear()
        self.retrains += 1

    def evaluate_children(self, C: np.ndarray, generation: int, diverged: bool) -> Population:
        """Offspring go to the surrogate unless it just diverged (or there is none)."""
        if self.surrogate and not diverged:
            Y, src = self.predict(C), Source.SURROGATE
        else:
            Y, src = self.simulate(C, generation, _rng.ROLE_OFFSPRING), Source.SIMULATION
            if self.surrogate:
                self.remember(C, Y)
        kids = Population([Individual(c) for c in C], generation)
        return evaluate_population(kids, Y, self.problem.directions, src)

    def elapsed(self) -> float:
        return time.perf_counter() - self.t0


def _warm(run: _Run, comparator):
    cfg = run.cfg
    pop, sets = warm_start(
        run.problem.specs,
        cfg.warm_size,
        cfg.population,
        lambda G: run.simulate(G, 0, _rng.ROLE_WARM),
        comparator,
        run.stream(_rng.WARM_GENOMES),
        run.problem.directions,
    )
    if run.surrogate:
        run.fit(sets)
    return pop, sets


def _elite_step(run: _Run, elite: Population, generation: int):
    """Simulate the elite; in surrogate mode, test the models against it."""
    E = elite.genomes()
    S = run.simulate(E, generation, _rng.ROLE_ELITE)
    elite = evaluate_population(elite, S, run.problem.directions, Source.SIMULATION)
    dev, diverged = (), False
    if run.surrogate:
        dev = run.deviations(E, S)
        diverged = run.breached(dev)
        run.remember(E, S)
    return elite, S, dev, diverged


def run_sa_ga(cfg: ExperimentConfig, repetition: int = 0) -> RunResult:
    """Elitist real-coded GA; offspring scored by the forest in surrogate mode."""
    if cfg.algorithm != "ga":
        raise ValueError("run_sa_ga needs algorithm='ga'")
    run = _Run(cfg, repetition)
    specs, dirs = run.problem.specs, run.problem.directions
    sign = dirs[0].sign
    pop, warm = _warm(run, single_objective_order)
    k = cfg.n_elite
    records: list[GenerationRecord] = []
    best_so_far = -np.inf
    elite = pop.subset(range(k))

    for g in range(1, cfg.generations + 1):
        rng = run.stream(_rng.OPERATORS, g)
        order = single_objective_order(pop)
        elite, S, dev, diverged = _elite_step(run, pop.subset(order[:k]), g)
        E = elite.genomes()

        children = np.empty((cfg.offspring, len(specs)))
        for i in range(cfg.offspring):
            a, b = rng.choice(k, size=2, replace=False) if k > 1 else (0, 0)
            if rng.random() < cfg.ga_crossover_rate:
                child = blx_alpha_crossover(E[a], E[b], cfg.blx_alpha, specs, rng)
            else:
                child = E[a].copy()
            children[i] = random_substitution_mutation(child, specs, cfg.ga_mutation_rate, rng)

        kids = run.evaluate_children(children, g, diverged)
        if diverged:
            run.retrain()
        pop = Population(elite.members + kids.members, g)

        sim_vals = np.array([m.fitness.values[0] for m in pop if m.source is Source.SIMULATION]) * sign
        best = float(sim_vals.max())
        best_so_far = max(best_so_far, best)
        records.append(
            GenerationRecord(
                generation=g,
                sim_calls=run.sim_calls,
                surrogate_calls=run.surrogate_calls,
                diverged=diverged,
                retrains=run.retrains,
                wall_time=run.elapsed(),
                best=best * sign,
                best_so_far=best_so_far * sign,
                elite_mean=float(S[:, 0].mean()),
                elite_best=float(S[:, 0].max() if sign > 0 else S[:, 0].min()),
                population_mean=float(pop.objectives()[:, 0].mean()),
                elite_sources=tuple(m.source.value for m in elite),
                elite_deviation=dev,
            )
        )

    return RunResult(cfg, repetition, records, pop, elite, run.models, warm, wall_time=run.elapsed())


def _hv_inside(points: np.ndarray, ref: np.ndarray) -> float:
    """Hypervolume of the points that weakly dominate ``ref``; the rest add nothing."""
    return hypervolume_2d(points[np.all(points >= ref, axis=1)], ref)


def _front(pop: Population, ordering: DominanceOrdering) -> Population:
    sim = pop.subset([i for i, m in enumerate(pop) if m.source is Source.SIMULATION])
    return sim.subset(non_dominated(sim, ordering).tolist())


def run_sa_nsga(cfg: ExperimentConfig, repetition: int = 0) -> RunResult:
    """NSGA-II with one forest per objective standing in for the simulator in surrogate mode."""
    if cfg.algorithm != "nsga2":
        raise ValueError("run_sa_nsga needs algorithm='nsga2'")
    run = _Run(cfg, repetition)
    specs, dirs = run.problem.specs, run.problem.directions
    ordering = DominanceOrdering(dirs)

    def comparator(p):
        return nsga_rank_order(p, ordering)

    pop, warm = _warm(run, comparator)
    # worst warm-start value per objective, in maximization orientation
    W = np.column_stack([s.targets for s in warm]) * ordering.signs
    ref = W.min(axis=0)
    Z = target_hv = None
    if cfg.problem == "psa_proxy":
        Z = normalize_objectives(analytic_front(cfg.front_points))
        target_hv = _hv_inside(analytic_front(10_001), ref)

    k = cfg.n_elite
    records: list[GenerationRecord] = []
    front_pop = _front(pop, ordering)
    elite = pop.subset(range(k))

    for g in range(1, cfg.generations + 1):
        rng = run.stream(_rng.OPERATORS, g)
        selected = pop.subset(comparator(pop)[: cfg.population])
        elite, S, dev, diverged = _elite_step(run, selected.subset(range(k)), g)
        selected = Population(elite.members + selected.members[k:], g)

        pool = tournament_selection(selected, cfg.tournament_size, cfg.offspring, comparator, rng).genomes()
        children = np.empty((cfg.offspring, len(specs)))
        for i in range(0, cfg.offspring, 2):
            c1, c2 = intermediate_crossover(pool[i], pool[i + 1], cfg.nsga_crossover_rate, specs, rng)
            for j, c in ((i, c1), (i + 1, c2)):
                children[j] = gaussian_mutation(
                    c, specs, cfg.nsga_mutation_rate, cfg.mutation_scale, cfg.mutation_shrink, g, cfg.generations, rng
                )

        kids = run.evaluate_children(children, g, diverged)
        if diverged:
            run.retrain()
        pop = Population(selected.members + kids.members, g)

        front_pop = _front(pop, ordering)
        F = front_pop.objectives()
        rec = GenerationRecord(
            generation=g,
            sim_calls=run.sim_calls,
            surrogate_calls=run.surrogate_calls,
            diverged=diverged,
            retrains=run.retrains,
            wall_time=run.elapsed(),
            front=F,
            hv=_hv_inside(F * ordering.signs, ref),
            elite_sources=tuple(m.source.value for m in elite),
            elite_deviation=dev,
        )
        if Z is not None:
            X = normalize_objectives(F)
            rec.gd_plus = gd_plus(X, Z)
            rec.igd_plus = igd_plus(X, Z)
        records.append(rec)

    return RunResult(
        cfg,
        repetition,
        records,
        pop,
        elite,
        run.models,
        warm,
        reference_point=ref * ordering.signs,
        target_hv=target_hv,
        wall_time=run.elapsed(),
        extra={"front_pop": front_pop},
    )


def run_single(cfg: ExperimentConfig, repetition: int = 0) -> RunResult:
    return (run_sa_ga if cfg.algorithm == "ga" else run_sa_nsga)(cfg, repetition)


def run_experiment(cfg: ExperimentConfig) -> list[RunResult]:
    return [run_single(cfg, r) for r in range(cfg.repetitions)]


def run_direct_baseline(cfg: ExperimentConfig) -> list[RunResult]:
    """The same loops with every evaluation sent to the simulator."""
    return run_experiment(cfg.replace(mode="direct"))


def holdout_sets(cfg: ExperimentConfig, repetition: int = 0, size: int | None = None) -> list[TrainingSet]:
    """Fresh simulated samples, disjoint in stream from everything a run draws."""
    size = cfg.holdout_size if size is None else size
    problem = make_problem(cfg.problem, cfg.cps)
    G = init_random_population(problem.specs, size, _rng.derive(cfg.seed, repetition, _rng.HOLDOUT)).genomes()
    keys = [(cfg.seed, repetition, _rng.SIM, 0, _rng.ROLE_HOLDOUT, i) for i in range(size)]
    Y = problem.evaluate(G, keys, workers=cfg.workers)
    return [TrainingSet(G, Y[:, j]) for j in range(Y.shape[1])]
