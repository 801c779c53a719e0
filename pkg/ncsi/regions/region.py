from __future__ import annotations

import functools
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Optional, Sequence

import numpy as np

from ncsi.misc import DimensionMismatchError, ZERO_TOL

# a candidate vertex may violate a constraint by this much before it is rejected
VERTEX_TOL = 1e-9
# rate coordinate names by region dimension
RATE_NAMES = {2: ("R1", "R2"), 3: ("R0", "R1", "R2")}


@dataclass(frozen=True)
class RatePoint:
    """A rate tuple (R1, R2) or (R0, R1, R2) in bits per channel use."""

    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) not in RATE_NAMES:
            raise DimensionMismatchError(f"Rate points have 2 or 3 coordinates, got {self.values}")
        if min(self.values) < -ZERO_TOL:
            raise DimensionMismatchError(f"Rates must be nonnegative, got {self.values}")
        object.__setattr__(self, "values", tuple(max(0.0, float(v)) for v in self.values))

    @property
    def dim(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.array(self.values)


@dataclass(frozen=True)
class LinearRateConstraint:
    """sum_i coefs[i] * R_i <= rhs, e.g. coefs (2, 1, 1) for 2 R0 + R1 + R2."""

    coefs: tuple[int, ...]
    rhs: float
    label: str = ""

    def value(self, point: Sequence[float]) -> float:
        return float(np.dot(self.coefs, point))


def support_directions(dim: int) -> np.ndarray:
    """Fixed direction set: 64 angles on the unit circle, or a 64-point Fibonacci sphere."""
    if dim == 2:
        theta = 2 * np.pi * np.arange(64) / 64
        return np.stack([np.cos(theta), np.sin(theta)], axis=1)
    if dim == 3:
        n = 64
        i = np.arange(n) + 0.5
        z = 1 - 2 * i / n
        r = np.sqrt(1 - z**2)
        phi = np.pi * (3 - np.sqrt(5)) * i
        return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    raise DimensionMismatchError(f"Regions have dimension 2 or 3, got {dim}")


@dataclass
class RateRegion:
    """A down-closed rate region in the nonnegative orthant.

    The region is the down-closure of the convex hull of `corners` when `convex` is set,
    and the union of the member polytopes otherwise. Members are kept as stacked
    half-space systems `member_a @ r <= member_b` (r >= 0 implied); `raw_corners` is the
    non-dominated cloud of all member vertices.
    """

    dim: int
    corners: np.ndarray
    member_a: np.ndarray
    member_b: np.ndarray
    raw_corners: np.ndarray
    convex: bool = True
    # the candidate distribution behind each corner, when recorded by a sweep
    witnesses: Optional[list[Any]] = None
    _support: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def directions(self) -> np.ndarray:
        return support_directions(self.dim)

    def support(self, u: np.ndarray) -> float:
        """max over the region of u . r; negative components of u are attained at r_i = 0."""
        u = np.clip(np.asarray(u, dtype=np.float64), 0.0, None)
        return float(np.max(self.corners @ u))

    def support_samples(self) -> tuple[np.ndarray, np.ndarray]:
        if self._support is None:
            dirs = np.clip(self.directions, 0.0, None)
            self._support = np.max(self.corners @ dirs.T, axis=0)
        return self.directions, self._support

    def pareto(self) -> np.ndarray:
        return pareto_front(self.corners)

    def as_convex(self, convex: bool = True) -> RateRegion:
        return RateRegion(
            self.dim,
            self.corners,
            self.member_a,
            self.member_b,
            self.raw_corners,
            convex,
            self.witnesses,
        )

    @property
    def n_members(self) -> int:
        return self.member_a.shape[0]

    def max_rate(self, axis: int) -> float:
        return float(np.max(self.corners[:, axis]))

    def __repr__(self) -> str:
        return f"RateRegion(dim={self.dim}, corners={len(self.corners)}, members={self.n_members}, convex={self.convex})"


def polytope_from_constraints(
    constraints: Sequence[LinearRateConstraint], dim: int
) -> RateRegion:
    """Vertices of {r >= 0 : constraints hold} by intersecting `dim` active hyperplanes.

    A constraint whose right-hand side is negative beyond round-off leaves only the
    origin; tiny negative right-hand sides are treated as zero.
    """
    if dim not in RATE_NAMES:
        raise DimensionMismatchError(f"Regions have dimension 2 or 3, got {dim}")
    a = np.array([c.coefs for c in constraints], dtype=np.float64).reshape(-1, dim)
    b = np.array([c.rhs for c in constraints], dtype=np.float64)
    if np.any(a < 0):
        raise DimensionMismatchError("Rate constraint coefficients must be nonnegative")
    if np.any(a.sum(axis=0) <= 0):
        raise DimensionMismatchError(
            f"Constraints {[c.coefs for c in constraints]} leave a rate coordinate unbounded"
        )

    if np.any(b < -ZERO_TOL):
        return origin_region(dim)
    b = np.clip(b, 0.0, None)

    subsets, inverses = _vertex_solver(tuple(map(tuple, a.tolist())))
    planes_b = np.concatenate([b, np.zeros(dim)])
    candidates = np.einsum("nij,nj->ni", inverses, planes_b[subsets])
    feasible = np.all(candidates >= -VERTEX_TOL, axis=1) & np.all(
        candidates @ a.T <= b[None, :] + VERTEX_TOL, axis=1
    )
    corners = _unique_rows(np.clip(candidates[feasible], 0.0, None))
    return RateRegion(dim, corners, a[None], b[None], pareto_front(corners))


@functools.lru_cache(maxsize=256)
def _vertex_solver(coefs: tuple[tuple[float, ...], ...]) -> tuple[np.ndarray, np.ndarray]:
    """Nonsingular choices of `dim` planes among the constraints and the axes, with inverses."""
    a = np.array(coefs, dtype=np.float64)
    dim = a.shape[1]
    planes = np.vstack([a, -np.eye(dim)])
    subsets, inverses = [], []
    for idx in combinations(range(len(planes)), dim):
        sub = planes[list(idx)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        subsets.append(idx)
        inverses.append(np.linalg.inv(sub))
    return np.array(subsets, dtype=np.int64), np.array(inverses)


def origin_region(dim: int) -> RateRegion:
    origin = np.zeros((1, dim))
    return RateRegion(dim, origin, np.eye(dim)[None], np.zeros((1, dim)), origin)


def _unique_rows(points: np.ndarray, decimals: int = 12) -> np.ndarray:
    _, idx = np.unique(np.round(points, decimals), axis=0, return_index=True)
    return points[np.sort(idx)]


def pareto_front(points: np.ndarray, tol: float = ZERO_TOL) -> np.ndarray:
    """Rows of `points` not weakly dominated by another row (duplicates collapsed)."""
    points = _unique_rows(np.asarray(points, dtype=np.float64).reshape(len(points), -1))
    if len(points) <= 1:
        return points
    # visiting in decreasing coordinate sum, a point can only be dominated by kept points
    order = np.argsort(-points.sum(axis=1), kind="stable")
    kept: list[np.ndarray] = []
    for p in points[order]:
        if kept and np.any(np.all(np.array(kept) >= p - tol, axis=1)):
            continue
        kept.append(p)
    return np.array(kept)
