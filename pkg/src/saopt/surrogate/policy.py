"""Warm start, divergence test and retraining around the forest surrogate."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from ..evo_core import Comparator, Direction, GeneSpec, Population, Source, init_random_population
from .forest import ForestHyperparams, RandomForestModel, TrainingSet, fit_forest, predict_forest

# maps an (n, d) genome batch to an (n, m) objective matrix
Evaluator = Callable[[np.ndarray], np.ndarray]


def evaluate_population(pop: Population, values, directions: Sequence[Direction], source: Source) -> Population:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    if values.shape[0] != len(pop):
        raise ValueError(f"{values.shape[0]} fitness rows for {len(pop)} members")
    members = [m.with_fitness(v, directions, source) for m, v in zip(pop.members, values)]
    return Population(members, pop.generation)


def warm_start(
    specs: Sequence[GeneSpec],
    warm_size: int,
    keep: int,
    evaluator: Evaluator,
    comparator: Comparator,
    rng: np.random.Generator,
    directions: Sequence[Direction] = (Direction.MAXIMIZE,),
) -> tuple[Population, list[TrainingSet]]:
    """Simulate ``warm_size`` random genomes; keep the best ``keep`` as the first population.

    Returns one training set per objective, each holding every evaluated pair.
    """
    if not 1 <= keep <= warm_size:
        raise ValueError(f"need 1 <= keep ({keep}) <= warm_size ({warm_size})")
    sample = init_random_population(specs, warm_size, rng)
    G = sample.genomes()
    Y = np.asarray(evaluator(G), dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.shape[1] != len(directions):
        raise ValueError(f"evaluator returned {Y.shape[1]} objectives, expected {len(directions)}")
    evaluated = evaluate_population(sample, Y, directions, Source.SIMULATION)
    best = list(comparator(evaluated))[:keep]
    sets = [TrainingSet(G.copy(), Y[:, j].copy()) for j in range(Y.shape[1])]
    return evaluated.subset(best), sets


def elite_deviation(model: RandomForestModel, elite, sim_values) -> float:
    """Mean absolute gap between surrogate and simulator over the elite."""
    G = elite.genomes() if isinstance(elite, Population) else np.asarray(elite, dtype=np.float64)
    sim = np.asarray(sim_values, dtype=np.float64).ravel()
    if G.shape[0] == 0:
        raise ValueError("elite is empty")
    if G.shape[0] != sim.shape[0]:
        raise ValueError(f"{sim.shape[0]} simulator values for {G.shape[0]} elite members")
    pred = predict_forest(model, G.reshape(G.shape[0], -1))
    return float(np.mean(np.abs(pred - sim)))


def divergence_check(model: RandomForestModel, elite, sim_values, k_sigma: float = 1.0) -> bool:
    """True when the mean elite deviation exceeds ``k_sigma`` training-target deviations."""
    return elite_deviation(model, elite, sim_values) > k_sigma * model.sigma_train


def retrain(model: RandomForestModel, new_pairs: TrainingSet, rng, workers: int = 1) -> RandomForestModel:
    """Refit from scratch on the accumulated training set plus ``new_pairs``."""
    if len(new_pairs) == 0:
        raise ValueError("no new training pairs")
    data = new_pairs if model.training is None else model.training.append(new_pairs)
    return fit_forest(data, model.hyperparams, rng, workers=workers)


def fit_surrogates(sets: Sequence[TrainingSet], hp: ForestHyperparams, rngs, workers: int = 1) -> list[RandomForestModel]:
    return [fit_forest(s, hp, r, workers=workers) for s, r in zip(sets, rngs)]
