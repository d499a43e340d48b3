"""Problem registry: gene bounds, objective directions and a batched simulator."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..evo_core import Direction, GeneSpec
from ..sims import CPS1_GENES, CPS2_GENES, PSA_GENES, CpsConfig, psa_objectives, simulate_cps1, simulate_cps2


@dataclass(frozen=True)
class Problem:
    name: str
    specs: tuple[GeneSpec, ...]
    directions: tuple[Direction, ...]
    objective_names: tuple[str, ...]
    stochastic: bool
    # (genome, seed key) -> objective values
    _one: Callable[[np.ndarray, tuple], Sequence[float]] | None = None
    _batch: Callable[[np.ndarray], np.ndarray] | None = None

    @property
    def n_objectives(self) -> int:
        return len(self.directions)

    def evaluate(self, genomes, keys: Sequence[tuple], workers: int = 1) -> np.ndarray:
        """Simulate every genome; ``keys[i]`` names the random stream of genome ``i``."""
        G = np.atleast_2d(np.asarray(genomes, dtype=np.float64))
        if len(keys) != G.shape[0]:
            raise ValueError(f"{len(keys)} seed keys for {G.shape[0]} genomes")
        if self._batch is not None:
            return np.asarray(self._batch(G), dtype=np.float64).reshape(G.shape[0], -1)
        if workers > 1 and G.shape[0] > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(self._one, G, keys))
        else:
            rows = [self._one(g, k) for g, k in zip(G, keys)]
        return np.asarray(rows, dtype=np.float64).reshape(G.shape[0], -1)


def make_problem(name: str, cps: CpsConfig | None = None) -> Problem:
    cps = cps or CpsConfig()
    if name == "cps1":
        return Problem(
            "cps1", CPS1_GENES, (Direction.MAXIMIZE,), ("revenue",), True,
            _one=lambda g, k: (simulate_cps1(g, cps, seed=k).revenue,),
        )
    if name == "cps2":
        return Problem(
            "cps2", CPS2_GENES, (Direction.MAXIMIZE,), ("revenue",), True,
            _one=lambda g, k: (simulate_cps2(g, cps, seed=k).revenue,),
        )
    if name == "psa_proxy":
        return Problem(
            "psa_proxy", PSA_GENES, (Direction.MAXIMIZE, Direction.MAXIMIZE), ("purity", "recovery"), False,
            _batch=psa_objectives,
        )
    raise ValueError(f"unknown problem {name!r}; choose cps1, cps2 or psa_proxy")


PROBLEMS = ("cps1", "cps2", "psa_proxy")
