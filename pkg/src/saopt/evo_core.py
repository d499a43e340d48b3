"""Real-coded GA primitives shared by the single- and multi-objective loops.

Every operator takes an explicit ``numpy.random.Generator`` and returns new
arrays; bounds are enforced by clamping.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class Direction(enum.Enum):
    MAXIMIZE = "max"
    MINIMIZE = "min"

    @property
    def sign(self) -> float:
        return 1.0 if self is Direction.MAXIMIZE else -1.0


class Source(enum.Enum):
    UNEVALUATED = "unevaluated"
    SIMULATION = "simulation"
    SURROGATE = "surrogate"


@dataclass(frozen=True)
class GeneSpec:
    name: str
    lower: float
    upper: float

    def __post_init__(self):
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ValueError(f"gene {self.name!r}: bounds must be finite")
        if not self.lower < self.upper:
            raise ValueError(f"gene {self.name!r}: lower {self.lower} must be < upper {self.upper}")

    @property
    def span(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class FitnessVector:
    values: tuple[float, ...]
    directions: tuple[Direction, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "directions", tuple(self.directions))
        if len(self.values) == 0 or len(self.values) != len(self.directions):
            raise ValueError("fitness needs >= 1 value and one direction per value")

    def __len__(self):
        return len(self.values)

    def oriented(self) -> np.ndarray:
        """Values with minimised objectives negated, so larger is always better."""
        return np.array([v * d.sign for v, d in zip(self.values, self.directions)])


@dataclass
class Individual:
    genome: np.ndarray
    fitness: FitnessVector | None = None
    source: Source = Source.UNEVALUATED

    def __post_init__(self):
        self.genome = np.asarray(self.genome, dtype=np.float64)
        if (self.source is Source.UNEVALUATED) != (self.fitness is None):
            raise ValueError("source must be UNEVALUATED exactly when fitness is absent")

    @property
    def evaluated(self) -> bool:
        return self.fitness is not None

    def with_fitness(self, values: Sequence[float], directions: Sequence[Direction], source: Source) -> "Individual":
        return Individual(self.genome.copy(), FitnessVector(tuple(values), tuple(directions)), source)


@dataclass
class Population:
    members: list[Individual] = field(default_factory=list)
    generation: int = 0

    def __post_init__(self):
        if self.generation < 0:
            raise ValueError("generation must be non-negative")
        lengths = {len(m.genome) for m in self.members}
        n_obj = {len(m.fitness) for m in self.members if m.fitness is not None}
        if len(lengths) > 1 or len(n_obj) > 1:
            raise ValueError("members must share genome length and objective count")

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i):
        return self.members[i]

    def subset(self, indices: Sequence[int]) -> "Population":
        return Population([self.members[i] for i in indices], self.generation)

    def genomes(self) -> np.ndarray:
        return np.array([m.genome for m in self.members], dtype=np.float64)

    def objectives(self) -> np.ndarray:
        self.require_evaluated()
        return np.array([m.fitness.values for m in self.members], dtype=np.float64)

    def directions(self) -> tuple[Direction, ...]:
        self.require_evaluated()
        return self.members[0].fitness.directions

    def require_evaluated(self):
        for i, m in enumerate(self.members):
            if m.fitness is None:
                raise RuntimeError(f"member {i} is unevaluated")


Comparator = Callable[[Population], Sequence[int]]


def _bounds(specs: Sequence[GeneSpec]) -> tuple[np.ndarray, np.ndarray]:
    lo = np.array([s.lower for s in specs], dtype=np.float64)
    hi = np.array([s.upper for s in specs], dtype=np.float64)
    return lo, hi


def _check_length(genome: np.ndarray, specs: Sequence[GeneSpec]):
    if genome.ndim != 1 or genome.shape[0] != len(specs):
        raise ValueError(f"genome length {genome.shape} does not match {len(specs)} gene specs")


def _check_probability(name: str, p: float):
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must be in [0, 1], got {p}")


def init_random_population(specs: Sequence[GeneSpec], size: int, rng: np.random.Generator) -> Population:
    if not specs:
        raise ValueError("at least one gene spec is required")
    if size < 1:
        raise ValueError(f"population size must be >= 1, got {size}")
    lo, hi = _bounds(specs)
    genomes = rng.uniform(lo, hi, size=(size, len(specs)))
    # uniform() is half-open on the upper side; clamp guards fp edge cases anyway
    genomes = np.minimum(hi, np.maximum(lo, genomes))
    return Population([Individual(g) for g in genomes], generation=0)


def clamp_to_bounds(genome, specs: Sequence[GeneSpec]) -> np.ndarray:
    genome = np.asarray(genome, dtype=np.float64)
    _check_length(genome, specs)
    lo, hi = _bounds(specs)
    return np.minimum(hi, np.maximum(lo, genome))


def blx_alpha_crossover(p1, p2, alpha: float, specs: Sequence[GeneSpec], rng: np.random.Generator) -> np.ndarray:
    """Blend crossover: each child gene is uniform on the parents' hull widened by ``alpha * range``."""
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    p1 = np.asarray(p1, dtype=np.float64)
    p2 = np.asarray(p2, dtype=np.float64)
    if p1.shape != p2.shape:
        raise ValueError("parents must have the same length")
    _check_length(p1, specs)
    lo = np.minimum(p1, p2)
    hi = np.maximum(p1, p2)
    spread = (hi - lo) * alpha
    low, high = lo - spread, hi + spread
    u = rng.random(p1.shape[0])
    child = np.clip(low + u * (high - low), low, high)
    return clamp_to_bounds(child, specs)


def random_substitution_mutation(genome, specs: Sequence[GeneSpec], rate: float, rng: np.random.Generator) -> np.ndarray:
    _check_probability("mutation rate", rate)
    genome = np.asarray(genome, dtype=np.float64)
    _check_length(genome, specs)
    lo, hi = _bounds(specs)
    mask = rng.random(genome.shape[0]) < rate
    fresh = rng.uniform(lo, hi)
    return clamp_to_bounds(np.where(mask, fresh, genome), specs)


def intermediate_crossover(p1, p2, crossover_rate: float, specs: Sequence[GeneSpec], rng: np.random.Generator):
    """Weighted-average crossover on a random binary gene mask.

    ``child1 = p1 + mask*ratio*(p2 - p1)`` and ``child2 = p2 - mask*ratio*(p2 - p1)``
    with one uniform ratio per gene.
    """
    _check_probability("crossover rate", crossover_rate)
    p1 = np.asarray(p1, dtype=np.float64)
    p2 = np.asarray(p2, dtype=np.float64)
    if p1.shape != p2.shape:
        raise ValueError("parents must have the same length")
    _check_length(p1, specs)
    mask = rng.random(p1.shape[0]) < crossover_rate
    ratio = rng.random(p1.shape[0])
    c1, c2 = intermediate_children(p1, p2, mask, ratio)
    return clamp_to_bounds(c1, specs), clamp_to_bounds(c2, specs)


def intermediate_children(p1, p2, mask, ratio):
    """Unclamped children for a given gene mask and per-gene ratios."""
    p1 = np.asarray(p1, dtype=np.float64)
    p2 = np.asarray(p2, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    step = np.where(mask, np.asarray(ratio, dtype=np.float64) * (p2 - p1), 0.0)
    c1 = np.where(mask, p1 + step, p1)
    c2 = np.where(mask, p2 - step, p2)
    return c1, c2


def gaussian_sigma(specs: Sequence[GeneSpec], scale: float, shrink: float, generation: int, max_generations: int) -> np.ndarray:
    lo, hi = _bounds(specs)
    return scale * (hi - lo) * (1.0 - shrink * generation / max_generations)


def gaussian_mutation(
    genome,
    specs: Sequence[GeneSpec],
    rate: float,
    scale: float,
    shrink: float,
    generation: int,
    max_generations: int,
    rng: np.random.Generator,
) -> np.ndarray:
    _check_probability("mutation rate", rate)
    if scale <= 0:
        raise ValueError(f"scale must be > 0, got {scale}")
    if not 0.0 <= shrink <= 1.0:
        raise ValueError(f"shrink must be in [0, 1], got {shrink}")
    if max_generations < 1 or not 0 <= generation <= max_generations:
        raise ValueError(f"need 0 <= generation ({generation}) <= max_generations ({max_generations})")
    genome = np.asarray(genome, dtype=np.float64)
    _check_length(genome, specs)
    sigma = gaussian_sigma(specs, scale, shrink, generation, max_generations)
    mask = rng.random(genome.shape[0]) < rate
    noise = rng.standard_normal(genome.shape[0]) * sigma
    return clamp_to_bounds(np.where(mask, genome + noise, genome), specs)


def tournament_selection(
    pop: Population,
    tournament_size: int,
    n_select: int,
    comparator: Comparator,
    rng: np.random.Generator,
) -> Population:
    """``n_select`` tournaments, each over ``tournament_size`` members drawn with replacement."""
    if len(pop) == 0:
        raise ValueError("cannot select from an empty population")
    if tournament_size < 1:
        raise ValueError("tournament_size must be >= 1")
    position = np.empty(len(pop), dtype=np.int64)
    position[np.asarray(comparator(pop), dtype=np.int64)] = np.arange(len(pop))
    draws = rng.integers(0, len(pop), size=(n_select, tournament_size))
    winners = draws[np.arange(n_select), np.argmin(position[draws], axis=1)]
    return pop.subset(winners.tolist())


def elite_size(n: int, fraction: float) -> int:
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"elite fraction must be in (0, 1], got {fraction}")
    # 1e-9 keeps e.g. 0.15*60 = 9.000000000000002 from rounding up to 10
    return min(n, max(1, math.ceil(fraction * n - 1e-9)))


def elite_selection(pop: Population, fraction: float, comparator: Comparator) -> Population:
    """The best ``ceil(fraction * len(pop))`` members, best first."""
    k = elite_size(len(pop), fraction)
    pop.require_evaluated()
    return pop.subset(list(comparator(pop))[:k])


def single_objective_order(pop: Population) -> list[int]:
    """Best-first member indices for one objective; ties keep member order."""
    pop.require_evaluated()
    key = pop.objectives()[:, 0] * pop.directions()[0].sign
    return np.argsort(-key, kind="stable").tolist()
