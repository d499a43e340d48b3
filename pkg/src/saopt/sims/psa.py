"""Deterministic two-objective stand-in for a pressure-swing adsorption cycle.

Six bounded operating variables map to CO2 purity and recovery through a
ZDT1-shaped construction, so the true trade-off front is known in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..evo_core import GeneSpec
from .plant import check_genome

PSA_GENES = (
    GeneSpec("adsorption_pressure", 1.0, 10.0),  # bar
    GeneSpec("adsorption_time", 10.0, 1000.0),  # s
    GeneSpec("light_reflux", 0.01, 0.99),
    GeneSpec("feed_velocity", 0.1, 2.0),  # m/s
    GeneSpec("heavy_reflux", 0.0, 1.0),
    GeneSpec("purge_pressure", 0.1, 0.5),  # bar
)

_LO = np.array([s.lower for s in PSA_GENES])
_SPAN = np.array([s.span for s in PSA_GENES])

FED_MOLES = 100.0
PURITY_FLOOR = 1e-12


@dataclass(frozen=True)
class MoleAccounting:
    moles_co2_product: float
    total_moles_product: float
    moles_co2_fed: float

    def __post_init__(self):
        if min(self.moles_co2_product, self.total_moles_product, self.moles_co2_fed) < 0:
            raise ValueError("mole counts must be non-negative")


def purity(m: MoleAccounting) -> float:
    """CO2 share of the product stream, in percent."""
    if m.total_moles_product <= 0:
        raise ZeroDivisionError("purity is undefined for an empty product stream")
    return 100.0 * m.moles_co2_product / m.total_moles_product


def recovery(m: MoleAccounting) -> float:
    """Share of the fed CO2 that ends up in the product, in percent."""
    if m.moles_co2_fed <= 0:
        raise ZeroDivisionError("recovery is undefined when no CO2 is fed")
    return 100.0 * m.moles_co2_product / m.moles_co2_fed


def _fractions(U: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    f1 = U[:, 0]
    g = 1.0 + 9.0 * U[:, 1:].mean(axis=1)
    f2 = g * (1.0 - np.sqrt(f1 / g))
    return 1.0 - f1, 1.0 - f2 / 10.0


def normalize(genomes) -> np.ndarray:
    G = np.atleast_2d(np.asarray(genomes, dtype=np.float64))
    return (G - _LO) / _SPAN


def evaluate_psa_proxy(genome) -> MoleAccounting:
    g = check_genome(genome, PSA_GENES)
    pur, rec = _fractions(normalize(g))
    product = FED_MOLES * float(rec[0])
    return MoleAccounting(product, product / max(float(pur[0]), PURITY_FLOOR), FED_MOLES)


def psa_objectives(genomes) -> np.ndarray:
    """(n, 2) array of [purity %, recovery %] for a batch of genomes."""
    G = np.atleast_2d(np.asarray(genomes, dtype=np.float64))
    for row in G:
        check_genome(row, PSA_GENES)
    pur, rec = _fractions(normalize(G))
    # product / (product / purity) collapses to purity; an empty stream keeps the fraction
    return np.column_stack([100.0 * pur, 100.0 * rec])


def analytic_front(n_points: int = 100) -> np.ndarray:
    """Points of the true purity/recovery trade-off, in percent, purity ascending."""
    purity_frac = np.linspace(0.0, 1.0, n_points)
    rec = 1.0 - (1.0 - np.sqrt(1.0 - purity_frac)) / 10.0
    return np.column_stack([100.0 * purity_frac, 100.0 * rec])


# ideal and nadir of the analytic front, used to put both objectives on [0, 1]
FRONT_IDEAL = np.array([100.0, 100.0])
FRONT_NADIR = np.array([0.0, 90.0])


def normalize_objectives(F) -> np.ndarray:
    return (np.asarray(F, dtype=np.float64) - FRONT_NADIR) / (FRONT_IDEAL - FRONT_NADIR)
