"""Stochastic hourly simulators for the parallel-train and recycle-loop plants.

Both plants share one train layout: feed -> tank 1 -> process 1 -> tank 2 ->
pump -> process 2 -> product. Overflowing tanks flare their excess. Pumps
fail at random; a failed pump is swapped for a spare from a shared pool if one
is in stock (short repair) or otherwise repaired in place (long repair). The
pool is topped up by a fixed order quantity, arriving after a lead time,
whenever it drops below its minimum level.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np

from .._backend import kernels
from .._rng import as_generator
from ..evo_core import GeneSpec

# upper bound on maintenance hours: 15% of a year of hourly operation
MAINTENANCE_MAX_HOURS = 1314.0


@dataclass(frozen=True)
class CostTable:
    final_product_rev: float = 6042.0
    flare1: float = 2848.0
    flare2: float = 3907.0
    flare3: float = 2848.0
    flare4: float = 3907.0
    tank_fixed: float = 9.94e7
    tank_per_m3: float = 1.52e6
    pump_fixed: float = 4.44e6
    pump_per_m3: float = 2.96e5
    maintenance_per_hr: float = 474036.0

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if not (v >= 0 and math.isfinite(v)):
                raise ValueError(f"cost {f.name} must be finite and non-negative, got {v}")

    @property
    def flares(self) -> tuple[float, ...]:
        return (self.flare1, self.flare2, self.flare3, self.flare4)


@dataclass(frozen=True)
class CpsConfig:
    horizon_hours: int = 8760
    feeds_per_train: int = 2
    feed_mean: float = 50.0
    feed_std: float = 5.0
    process1_cap: float = 110.0
    process2_cap: float = math.inf
    pump_fail_prob: float = 0.001
    repair_hours_without_spare: int = 24
    repair_hours_with_spare: int = 4
    lead_time_hours: int = 72
    alpha_max: float = 0.5
    alpha_min: float = 0.05
    alpha_rel_std: float = 0.1
    alpha_interval_hours: int = 24
    maintenance_pauses_production: bool = False
    costs: CostTable = field(default_factory=CostTable)
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.costs, dict):
            object.__setattr__(self, "costs", CostTable(**self.costs))
        if self.horizon_hours <= 0:
            raise ValueError("horizon_hours must be positive")
        if self.feeds_per_train < 1:
            raise ValueError("feeds_per_train must be >= 1")
        if not (self.feed_mean > 0 and self.feed_std >= 0):
            raise ValueError("feed_mean must be positive and feed_std non-negative")
        if not (self.process1_cap > 0 and self.process2_cap > 0):
            raise ValueError("process capacities must be positive")
        if not 0.0 <= self.pump_fail_prob <= 1.0:
            raise ValueError("pump_fail_prob must lie in [0, 1]")
        if min(self.repair_hours_with_spare, self.repair_hours_without_spare) < 1 or self.lead_time_hours < 0:
            raise ValueError("repair durations must be >= 1 h and lead time >= 0 h")
        if not 0.0 <= self.alpha_min <= self.alpha_max <= 1.0:
            raise ValueError("need 0 <= alpha_min <= alpha_max <= 1")
        if self.alpha_rel_std < 0 or self.alpha_interval_hours < 1:
            raise ValueError("alpha_rel_std must be >= 0 and alpha_interval_hours >= 1")

    def replace(self, **changes) -> "CpsConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        # JSON has no infinity; null means unlimited
        for k in ("process1_cap", "process2_cap"):
            if math.isinf(d[k]):
                d[k] = None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CpsConfig":
        d = dict(d)
        unknown = set(d) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ValueError(f"unknown CPS config keys: {sorted(unknown)}")
        for k in ("process1_cap", "process2_cap"):
            if k in d and d[k] is None:
                d[k] = math.inf
        if "costs" in d:
            d["costs"] = CostTable(**d["costs"])
        return cls(**d)


def load_cps_config(path: str | os.PathLike) -> CpsConfig:
    with open(path, encoding="utf-8") as fh:
        return CpsConfig.from_dict(json.load(fh))


def default_config_path() -> str:
    return os.path.join(os.path.dirname(os.path.dirname(__file__)), "data", "cps_default.json")


@dataclass
class SimOutcome:
    final_product_m3: float
    flare_m3: tuple[float, ...]
    tank_capacities: tuple[float, ...]
    pump_capacities: tuple[float, ...]
    maintenance_hours: float = 0.0
    revenue: float = 0.0
    feed_m3: float = 0.0
    holdup_m3: float = 0.0
    recycle_holdup_m3: float = 0.0
    failures: int = 0
    downtime_hours: int = 0
    spares_procured: int = 0

    @property
    def n_tanks(self) -> int:
        return len(self.tank_capacities)

    @property
    def n_pumps(self) -> int:
        return len(self.pump_capacities)

    @property
    def mass_balance_error(self) -> float:
        out = self.final_product_m3 + sum(self.flare_m3) + self.holdup_m3 + self.recycle_holdup_m3
        return abs(self.feed_m3 - out) / max(self.feed_m3, 1e-300)


def revenue(outcome: SimOutcome, costs: CostTable) -> float:
    """Product income minus flaring, tank, pump and maintenance costs."""
    if len(outcome.flare_m3) > len(costs.flares):
        raise ValueError(f"cost table prices {len(costs.flares)} flares, outcome has {len(outcome.flare_m3)}")
    total = costs.final_product_rev * outcome.final_product_m3
    for price, vol in zip(costs.flares, outcome.flare_m3):
        total -= price * vol
    for cap in outcome.tank_capacities:
        total -= costs.tank_fixed + costs.tank_per_m3 * cap
    for cap in outcome.pump_capacities:
        total -= costs.pump_fixed + costs.pump_per_m3 * cap
    total -= costs.maintenance_per_hr * outcome.maintenance_hours
    return total


CPS1_GENES = (
    GeneSpec("tank1", 500.0, 1000.0),
    GeneSpec("tank2", 500.0, 1000.0),
    GeneSpec("tank3", 500.0, 1000.0),
    GeneSpec("tank4", 500.0, 1000.0),
    GeneSpec("pump1", 60.0, 120.0),
    GeneSpec("pump2", 60.0, 120.0),
    GeneSpec("min_spares", 0.0, 20.0),
    GeneSpec("spares_per_purchase", 1.0, 20.0),
)

CPS2_GENES = (
    GeneSpec("tank1", 500.0, 1000.0),
    GeneSpec("tank2", 500.0, 1000.0),
    GeneSpec("pump1", 60.0, 120.0),
    GeneSpec("min_spares", 0.0, 20.0),
    GeneSpec("spares_per_purchase", 1.0, 20.0),
    GeneSpec("maintenance_hours", 0.0, MAINTENANCE_MAX_HOURS),
)


def check_genome(genome, specs: Sequence[GeneSpec]) -> np.ndarray:
    g = np.asarray(genome, dtype=np.float64)
    if g.shape != (len(specs),):
        raise ValueError(f"expected a genome of {len(specs)} genes, got shape {g.shape}")
    for v, s in zip(g, specs):
        if not s.lower <= v <= s.upper:
            raise ValueError(f"gene {s.name}={v} outside [{s.lower}, {s.upper}]")
    return g


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def run_trains(
    feed,
    tank1_cap,
    proc1_cap,
    tank2_cap,
    pump_cap,
    proc2_cap,
    fail_u,
    fail_prob: float,
    alpha=None,
    pause=None,
    initial_spares: int = 0,
    min_spares: int = 0,
    reorder_qty: int = 1,
    lead_time: int = 0,
    repair_with: int = 1,
    repair_without: int = 1,
) -> dict:
    """Run the hourly plant kernel on explicit arrays; one row per train."""
    feed = np.ascontiguousarray(feed, dtype=np.float64)
    if feed.ndim != 2:
        raise ValueError("feed must be (n_trains, horizon)")
    n, H = feed.shape

    def per_train(v):
        a = np.ascontiguousarray(np.broadcast_to(np.asarray(v, dtype=np.float64), (n,)))
        return a

    alpha = np.zeros(H) if alpha is None else alpha
    pause = np.zeros(H, dtype=np.uint8) if pause is None else pause
    res = kernels.run_plant(
        feed,
        per_train(tank1_cap),
        per_train(proc1_cap),
        per_train(tank2_cap),
        per_train(pump_cap),
        per_train(proc2_cap),
        np.ascontiguousarray(fail_u, dtype=np.float64).reshape(n, H),
        float(fail_prob),
        np.ascontiguousarray(alpha, dtype=np.float64),
        np.ascontiguousarray(pause, dtype=np.uint8),
        int(initial_spares),
        int(min_spares),
        int(reorder_qty),
        int(lead_time),
        int(repair_with),
        int(repair_without),
    )
    keys = ("product", "flares", "levels", "recycle", "procured", "failures", "downtime")
    out = dict(zip(keys, res))
    out["feed"] = float(feed.sum())
    return out


def _draw_feed(cfg: CpsConfig, n_trains: int, rng: np.random.Generator) -> np.ndarray:
    streams = rng.normal(cfg.feed_mean, cfg.feed_std, size=(n_trains, cfg.feeds_per_train, cfg.horizon_hours))
    return np.maximum(streams, 0.0).sum(axis=1)


def alpha_mean(hours: float, cfg: CpsConfig) -> float:
    """Mean recycle ratio after ``hours`` of maintenance; linear and decreasing."""
    return cfg.alpha_max - (cfg.alpha_max - cfg.alpha_min) * hours / MAINTENANCE_MAX_HOURS


def sample_alpha(mu: float, rel_std: float, size: int, rng: np.random.Generator, max_tries: int = 100) -> np.ndarray:
    """Normal(mu, rel_std * mu) draws kept in [0, 1] by resampling, then clamping stragglers."""
    sd = rel_std * mu
    a = rng.normal(mu, sd, size=size)
    for _ in range(max_tries):
        bad = np.flatnonzero((a < 0.0) | (a > 1.0))
        if bad.size == 0:
            break
        a[bad] = rng.normal(mu, sd, size=bad.size)
    return np.clip(a, 0.0, 1.0)


def maintenance_pause(hours: float, horizon: int) -> np.ndarray:
    """Spread ``hours`` of downtime evenly over the horizon: hour t pauses when a
    new multiple of ``horizon / hours`` is crossed during it."""
    t = np.arange(horizon, dtype=np.float64)
    h = min(float(hours), float(horizon))
    return (np.floor((t + 1) * h / horizon) > np.floor(t * h / horizon)).astype(np.uint8)


def _finish(res, tanks, pumps, spare_cap, maint, cfg: CpsConfig) -> SimOutcome:
    procured = int(res["procured"])
    out = SimOutcome(
        final_product_m3=float(res["product"]),
        flare_m3=tuple(float(v) for v in np.asarray(res["flares"]).ravel()),
        tank_capacities=tuple(float(v) for v in tanks),
        pump_capacities=tuple(float(v) for v in pumps) + (float(spare_cap),) * procured,
        maintenance_hours=float(maint),
        feed_m3=res["feed"],
        holdup_m3=float(np.sum(res["levels"])),
        recycle_holdup_m3=float(res["recycle"]),
        failures=int(res["failures"]),
        downtime_hours=int(res["downtime"]),
        spares_procured=procured,
    )
    out.revenue = revenue(out, cfg.costs)
    return out


def simulate_cps1(genome, cfg: CpsConfig | None = None, seed=None) -> SimOutcome:
    """Two parallel trains drawing replacement pumps from one spares pool.

    Genes: tank1..tank4 (m3), pump1, pump2 (m3/h), min spares, spares per
    purchase. Train A uses tank1, tank2, pump1 and flares 1-2; train B uses
    tank3, tank4, pump2 and flares 3-4.
    """
    cfg = cfg or CpsConfig()
    g = check_genome(genome, CPS1_GENES)
    rng = as_generator(cfg.seed if seed is None else seed)
    feed = _draw_feed(cfg, 2, rng)
    fail_u = rng.random((2, cfg.horizon_hours))
    min_sp, qty = _round_half_up(g[6]), _round_half_up(g[7])
    res = run_trains(
        feed,
        [g[0], g[2]],
        cfg.process1_cap,
        [g[1], g[3]],
        [g[4], g[5]],
        cfg.process2_cap,
        fail_u,
        cfg.pump_fail_prob,
        initial_spares=min_sp,
        min_spares=min_sp,
        reorder_qty=qty,
        lead_time=cfg.lead_time_hours,
        repair_with=cfg.repair_hours_with_spare,
        repair_without=cfg.repair_hours_without_spare,
    )
    return _finish(res, g[:4], g[4:6], max(g[4], g[5]), 0.0, cfg)


def simulate_cps2(genome, cfg: CpsConfig | None = None, seed=None) -> SimOutcome:
    """Single train whose pumped flow is partly recycled to the head of tank 1.

    Genes: tank1, tank2 (m3), pump1 (m3/h), min spares, spares per purchase,
    maintenance hours. The recycle ratio is redrawn every production interval
    around a mean that falls linearly with maintenance hours.
    """
    cfg = cfg or CpsConfig()
    g = check_genome(genome, CPS2_GENES)
    rng = as_generator(cfg.seed if seed is None else seed)
    H = cfg.horizon_hours
    feed = _draw_feed(cfg, 1, rng)
    fail_u = rng.random((1, H))
    n_int = -(-H // cfg.alpha_interval_hours)
    alpha = sample_alpha(alpha_mean(g[5], cfg), cfg.alpha_rel_std, n_int, rng)
    alpha = np.repeat(alpha, cfg.alpha_interval_hours)[:H]
    pause = maintenance_pause(g[5], H) if cfg.maintenance_pauses_production else None
    min_sp, qty = _round_half_up(g[3]), _round_half_up(g[4])
    res = run_trains(
        feed,
        g[0],
        cfg.process1_cap,
        g[1],
        g[2],
        cfg.process2_cap,
        fail_u,
        cfg.pump_fail_prob,
        alpha=alpha,
        pause=pause,
        initial_spares=min_sp,
        min_spares=min_sp,
        reorder_qty=qty,
        lead_time=cfg.lead_time_hours,
        repair_with=cfg.repair_hours_with_spare,
        repair_without=cfg.repair_hours_without_spare,
    )
    return _finish(res, g[:2], g[2:3], g[2], g[5], cfg)


OUTCOME_COLUMNS = (
    "final_product_m3",
    "flare1_m3",
    "flare2_m3",
    "flare3_m3",
    "flare4_m3",
    "n_tanks",
    "tank_capacity_total",
    "n_pumps",
    "pump_capacity_total",
    "maintenance_hours",
    "failures",
    "downtime_hours",
    "spares_procured",
    "revenue",
)


def outcome_row(o: SimOutcome) -> list[float]:
    flares = list(o.flare_m3) + [0.0] * (4 - len(o.flare_m3))
    return [
        o.final_product_m3,
        *flares,
        o.n_tanks,
        sum(o.tank_capacities),
        o.n_pumps,
        sum(o.pump_capacities),
        o.maintenance_hours,
        o.failures,
        o.downtime_hours,
        o.spares_procured,
        o.revenue,
    ]


def write_outcomes_csv(outcomes: Sequence[SimOutcome], fh: IO[str]):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(OUTCOME_COLUMNS)
    for o in outcomes:
        w.writerow([repr(float(v)) if isinstance(v, float) else v for v in outcome_row(o)])
