from __future__ import annotations

from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np
from loguru import logger
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from ncsi.misc import DimensionMismatchError, write_csv
from ncsi.regions.region import (
    RATE_NAMES,
    RatePoint,
    RateRegion,
    _unique_rows,
    pareto_front,
)

# default tolerance of membership tests
CONTAINS_TOL = 1e-9


def stack_members(
    systems: Sequence[tuple[np.ndarray, np.ndarray]], dim: int
) -> tuple[np.ndarray, np.ndarray]:
    """Stack half-space systems of different sizes, padding with the vacuous 0 <= 0."""
    if len(systems) == 0:
        return np.zeros((0, 1, dim)), np.zeros((0, 1))
    rows = max(a.shape[0] for a, _ in systems)
    out_a = np.zeros((len(systems), rows, dim))
    out_b = np.zeros((len(systems), rows))
    for i, (a, b) in enumerate(systems):
        out_a[i, : a.shape[0]] = a
        out_b[i, : b.shape[0]] = b
    return out_a, out_b


def extreme_points(points: np.ndarray) -> np.ndarray:
    """Non-dominated points that are extreme in the down-closure of their convex hull."""
    points = pareto_front(points)
    if len(points) <= 2:
        return points
    dim = points.shape[1]
    active = np.flatnonzero(np.max(points, axis=0) > 0)
    if len(active) == 0:
        return points[:1]
    if len(active) == 1:
        return points[[int(np.argmax(points[:, active[0]]))]]

    sub = points[:, active]
    # down-closure: every point together with its projections onto coordinate faces
    masks = np.array(
        [[(m >> i) & 1 for i in range(len(active))] for m in range(2 ** len(active))]
    )
    cloud = (sub[:, None, :] * masks[None, :, :]).reshape(-1, len(active))
    try:
        hull = ConvexHull(cloud)
        vertex_ids = {v // len(masks) for v in hull.vertices if v % len(masks) == len(masks) - 1}
        keep = np.array(sorted(vertex_ids), dtype=np.int64)
    except QhullError:
        logger.debug("Qhull failed on {} points in dimension {}, using LP filtering", len(sub), dim)
        keep = _extreme_by_lp(sub)
    return points[keep]


def _extreme_by_lp(points: np.ndarray) -> np.ndarray:
    keep = []
    for i in range(len(points)):
        others = np.delete(points, i, axis=0)
        if not _dominated_by_hull(others, points[i], 1e-12):
            keep.append(i)
    return np.array(keep, dtype=np.int64)


def _dominated_by_hull(corners: np.ndarray, p: np.ndarray, tol: float) -> bool:
    """Is p <= sum_j lam_j corners_j for some convex weights lam (up to tol)?"""
    m = len(corners)
    if m == 0:
        return False
    res = linprog(
        np.zeros(m),
        A_ub=-corners.T,
        b_ub=-(p - tol),
        A_eq=np.ones((1, m)),
        b_eq=np.ones(1),
        bounds=[(0, None)] * m,
        method="highs",
    )
    return res.status == 0


def union_hull(
    regions: Sequence[RateRegion], tags: Optional[Sequence[Any]] = None
) -> RateRegion:
    """Convex hull of a union of regions; members are carried over for raw queries.

    `tags` (one per region) are attached to the retained corners as witnesses.
    """
    if len(regions) == 0:
        raise DimensionMismatchError("Cannot take the hull of an empty list of regions")
    dim = regions[0].dim
    for r in regions:
        if r.dim != dim:
            raise DimensionMismatchError(f"Cannot unite regions of dimensions {dim} and {r.dim}")

    points = np.vstack([r.corners for r in regions])
    owners = np.concatenate([np.full(len(r.corners), i) for i, r in enumerate(regions)])
    corners = extreme_points(points)
    witnesses = None
    if tags is not None:
        witnesses = [tags[int(owners[_row_index(points, c)])] for c in corners]

    member_a, member_b = stack_members(
        [(r.member_a[i], r.member_b[i]) for r in regions for i in range(r.n_members)], dim
    )
    raw = pareto_front(np.vstack([r.raw_corners for r in regions]))
    return RateRegion(dim, corners, member_a, member_b, raw, True, witnesses)


def _row_index(points: np.ndarray, row: np.ndarray) -> int:
    return int(np.argmin(np.abs(points - row[None, :]).sum(axis=1)))


def contains(
    region: RateRegion, p: Union[RatePoint, Sequence[float]], tol: float = CONTAINS_TOL
) -> bool:
    p = p.as_array() if isinstance(p, RatePoint) else np.asarray(p, dtype=np.float64)
    if p.shape != (region.dim,):
        raise DimensionMismatchError(f"Point {p} does not match region dimension {region.dim}")
    if np.any(p < -tol):
        return False
    p = np.clip(p, 0.0, None)

    if not region.convex:
        lhs = region.member_a @ p
        return bool(np.any(np.all(lhs <= region.member_b + tol, axis=1)))

    dirs, values = region.support_samples()
    if np.any(np.clip(dirs, 0.0, None) @ p > values + tol):
        return False
    if np.any(np.all(region.corners >= p - tol, axis=1)):
        return True
    return _dominated_by_hull(region.corners, p, tol)


def includes(a: RateRegion, b: RateRegion, tol: float = CONTAINS_TOL) -> bool:
    """A contains B: every corner of B (its raw corner cloud when B is raw) lies in A."""
    if a.dim != b.dim:
        raise DimensionMismatchError(f"Cannot compare regions of dimensions {a.dim} and {b.dim}")
    points = b.corners if b.convex else b.raw_corners
    return all(contains(a, c, tol) for c in points)


def embed(region: RateRegion, dim: int = 3) -> RateRegion:
    """A 2-D region (R1, R2) as the R0 = 0 face of a 3-D region."""
    if region.dim == dim:
        return region
    if region.dim != 2 or dim != 3:
        raise DimensionMismatchError(f"Cannot embed dimension {region.dim} into {dim}")

    def pad(x: np.ndarray) -> np.ndarray:
        return np.hstack([np.zeros((len(x), 1)), x])

    n, k, _ = region.member_a.shape
    # R0 <= 0 is added to every member
    a = np.concatenate([np.zeros((n, k, 1)), region.member_a], axis=2)
    a = np.concatenate([a, np.tile(np.array([1.0, 0.0, 0.0]), (n, 1, 1))], axis=1)
    b = np.concatenate([region.member_b, np.zeros((n, 1))], axis=1)
    return RateRegion(
        3,
        _unique_rows(pad(region.corners)),
        a,
        b,
        pad(region.raw_corners),
        region.convex,
        region.witnesses,
    )


def write_region_csv(region: RateRegion, outfile: Union[str, Path]) -> None:
    corners = region.corners if region.convex else region.raw_corners
    write_csv(outfile, RATE_NAMES[region.dim], corners.tolist())


def write_support_csv(region: RateRegion, outfile: Union[str, Path]) -> None:
    dirs, values = region.support_samples()
    header = ("dx", "dy", "dz")[: region.dim] + ("value",)
    write_csv(outfile, header, np.hstack([dirs, values[:, None]]).tolist())
