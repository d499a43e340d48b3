"""Pareto dominance, fast non-dominated sorting and crowding distance."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._backend import kernels
from .evo_core import Direction, FitnessVector, Population


@dataclass(frozen=True)
class DominanceOrdering:
    directions: tuple[Direction, ...]

    def __post_init__(self):
        object.__setattr__(self, "directions", tuple(self.directions))
        if not self.directions:
            raise ValueError("at least one objective direction is required")

    @classmethod
    def maximize(cls, n: int) -> "DominanceOrdering":
        return cls((Direction.MAXIMIZE,) * n)

    @property
    def signs(self) -> np.ndarray:
        return np.array([d.sign for d in self.directions])

    def orient(self, objs) -> np.ndarray:
        """Objective matrix with every column turned into larger-is-better."""
        F = _as_matrix(objs)
        if F.shape[1] != len(self.directions):
            raise ValueError(f"expected {len(self.directions)} objectives, got {F.shape[1]}")
        return np.ascontiguousarray(F * self.signs)


@dataclass
class FrontPartition:
    fronts: list[np.ndarray]
    rank: np.ndarray


def _as_matrix(objs) -> np.ndarray:
    if isinstance(objs, Population):
        return objs.objectives()
    if len(objs) and isinstance(objs[0], FitnessVector):
        return np.array([f.values for f in objs], dtype=np.float64)
    F = np.asarray(objs, dtype=np.float64)
    if F.ndim == 1:
        F = F[:, None]
    return F


def dominates(a, b, ordering: DominanceOrdering) -> bool:
    a = a.values if isinstance(a, FitnessVector) else a
    b = b.values if isinstance(b, FitnessVector) else b
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.shape[0] != len(ordering.directions):
        raise ValueError("objective vectors must match the ordering length")
    ga, gb = a * ordering.signs, b * ordering.signs
    return bool(np.all(ga >= gb) and np.any(ga > gb))


def fast_non_dominated_sort(objs, ordering: DominanceOrdering) -> FrontPartition:
    """Partition into Pareto fronts via domination sets and counts.

    Every member's domination count is decremented as each front is peeled;
    members reaching zero form the next front. Ranks are 1-based and each
    front lists member indices in ascending order.
    """
    G = ordering.orient(objs)
    if G.shape[0] == 0:
        raise ValueError("cannot sort an empty set")
    rank = np.asarray(kernels.nds_ranks(G), dtype=np.int64)
    fronts = [np.flatnonzero(rank == r) for r in range(1, int(rank.max()) + 1)]
    return FrontPartition(fronts, rank)


def crowding_distance(front_objs, ordering: DominanceOrdering | None = None) -> np.ndarray:
    F = _as_matrix(front_objs)
    n, m = F.shape
    if n == 0:
        raise ValueError("cannot compute crowding distance of an empty front")
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for j in range(m):
        order = np.argsort(F[:, j], kind="stable")
        col = F[order, j]
        span = col[-1] - col[0]
        dist[order[0]] = dist[order[-1]] = np.inf
        if span > 0:
            dist[order[1:-1]] += (col[2:] - col[:-2]) / span
    return dist


def rank_and_crowding(objs, ordering: DominanceOrdering) -> tuple[np.ndarray, np.ndarray]:
    F = _as_matrix(objs)
    part = fast_non_dominated_sort(F, ordering)
    crowd = np.zeros(F.shape[0])
    for front in part.fronts:
        crowd[front] = crowding_distance(F[front])
    return part.rank, crowd


def nsga_rank_order(pop, ordering: DominanceOrdering | None = None) -> list[int]:
    """Member indices best-first: front rank, then crowding (descending), then index."""
    if isinstance(pop, Population):
        pop.require_evaluated()
        ordering = ordering or DominanceOrdering(pop.directions())
    if ordering is None:
        raise ValueError("an ordering is required for raw objective arrays")
    rank, crowd = rank_and_crowding(pop, ordering)
    idx = np.arange(rank.shape[0])
    return np.lexsort((idx, -crowd, rank)).tolist()


def non_dominated(objs, ordering: DominanceOrdering) -> np.ndarray:
    """Indices of the first front."""
    return fast_non_dominated_sort(objs, ordering).fronts[0]


def as_ordering(directions: Sequence[Direction] | DominanceOrdering) -> DominanceOrdering:
    if isinstance(directions, DominanceOrdering):
        return directions
    return DominanceOrdering(tuple(directions))
