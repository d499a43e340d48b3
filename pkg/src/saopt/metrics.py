"""Quality indicators for two-objective fronts: hypervolume, GD+, IGD+ and AES.

All point sets are in maximization orientation: larger is better in every
column.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


@dataclass
class FrontSet:
    points: np.ndarray
    label: str = ""

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(1, -1) if pts.size else pts.reshape(0, 0)
        if pts.ndim != 2:
            raise ValueError("points must form a 2-D array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("front points must be finite")
        self.points = pts

    def __len__(self):
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __array__(self, dtype=None, copy=None):
        return self.points if dtype is None else self.points.astype(dtype)


@dataclass(frozen=True)
class ReferencePoint:
    coordinates: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "coordinates", tuple(float(c) for c in self.coordinates))

    def __array__(self, dtype=None, copy=None):
        return np.array(self.coordinates, dtype=dtype or np.float64)


def _points(front) -> np.ndarray:
    if isinstance(front, FrontSet):
        return front.points
    return FrontSet(front).points


def hypervolume_2d(front, ref) -> float:
    """Exact area dominated by ``front`` and bounded below by ``ref``."""
    P = _points(front)
    r = np.asarray(ref, dtype=np.float64).ravel()
    if P.size and P.shape[1] != 2 or r.shape[0] != 2:
        raise ValueError("hypervolume_2d supports exactly two objectives")
    if P.shape[0] == 0:
        return 0.0
    bad = np.flatnonzero(np.any(P < r, axis=1))
    if bad.size:
        raise ValueError(f"point {P[bad[0]].tolist()} does not weakly dominate reference {r.tolist()}")
    # descending f1, ties by descending f2 so the stronger twin is swept first
    order = np.lexsort((-P[:, 1], -P[:, 0]))
    area = 0.0
    top = r[1]
    for i in order:
        f1, f2 = P[i]
        if f2 > top:
            area += (f1 - r[0]) * (f2 - top)
            top = f2
    return float(area)


def _shortfall_matrix(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """``D[i, j]`` = Euclidean norm of the amount by which ``A[i]`` falls short of ``B[j]``."""
    short = np.maximum(B[None, :, :] - A[:, None, :], 0.0)
    return np.sqrt(np.sum(short * short, axis=2))


def _check_pair(X, Z):
    X, Z = _points(X), _points(Z)
    if X.shape[0] and Z.shape[0] and X.shape[1] != Z.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Z.shape[1]}")
    return X, Z


def gd_plus(X, Z) -> float:
    """(1/|X|) * sqrt(sum_i d_i^2), d_i the shortest shortfall distance from x_i to Z."""
    X, Z = _check_pair(X, Z)
    if Z.shape[0] == 0:
        raise ValueError("reference set Z is empty")
    if X.shape[0] == 0:
        raise ValueError("solution set X is empty")
    d = _shortfall_matrix(X, Z).min(axis=1)
    return float(np.sqrt(np.sum(d * d)) / X.shape[0])


def igd_plus(X, Z) -> float:
    """(1/|Z|) * sqrt(sum_j d_j^2), d_j the shortest shortfall distance from X to z_j."""
    X, Z = _check_pair(X, Z)
    if X.shape[0] == 0:
        raise ValueError("solution set X is empty")
    if Z.shape[0] == 0:
        raise ValueError("reference set Z is empty")
    d = _shortfall_matrix(X, Z).min(axis=0)
    return float(np.sqrt(np.sum(d * d)) / Z.shape[0])


def aes(hv_series: Sequence[float], target_hv: float, success_fraction: float) -> int | None:
    """First generation whose HV reaches ``success_fraction * target_hv``; None if never."""
    if not 0.0 < success_fraction <= 1.0:
        raise ValueError(f"success_fraction must be in (0, 1], got {success_fraction}")
    hv = np.asarray(hv_series, dtype=np.float64)
    if hv.size == 0:
        raise ValueError("empty HV series")
    hit = np.flatnonzero(hv >= success_fraction * target_hv)
    return int(hit[0]) if hit.size else None
