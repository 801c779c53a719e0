"""Search over products of conditional-probability simplices.

`maximize` realizes the max/sup over candidate distributions and `region_sweep` the
unions of polytopes over them. Both evaluate the handcrafted seeds first, then either the
full product grid (when it has at most `grid_cap` points) or random Dirichlet(1) restarts;
every start point is improved by coordinate refinement, one conditional row at a time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from math import comb
from typing import Any, Callable, Iterator, Optional, Sequence

import numpy as np
from loguru import logger
from tqdm.auto import tqdm

from ncsi.misc import DimensionMismatchError
from ncsi.optimizer.candidate import CandidatePdf, CandidateShape, SearchBudget
from ncsi.prob.pmf import Pmf
from ncsi.regions.geometry import extreme_points, stack_members
from ncsi.regions.region import (
    LinearRateConstraint,
    RateRegion,
    pareto_front,
    polytope_from_constraints,
    support_directions,
)

# refinement stops once a full pass gains less than this
REFINE_GAIN = 1e-7
# initial step of the row moves; halved whenever a row does not improve
REFINE_STEP = 0.5

Objective = Callable[[CandidatePdf], Optional[float]]
ConstraintBuilder = Callable[[CandidatePdf], Optional[Sequence[LinearRateConstraint]]]


def simplex_grid_array(dim: int, k: int) -> np.ndarray:
    """All compositions of k into `dim` parts, scaled by 1/k, one per row."""
    if dim < 1 or k < 1:
        raise DimensionMismatchError(f"Simplex grid needs dim >= 1 and k >= 1, got {dim}, {k}")
    out = np.empty((comb(k + dim - 1, dim - 1), dim))
    for i, bars in enumerate(combinations(range(k + dim - 1), dim - 1)):
        edges = (-1,) + bars + (k + dim - 1,)
        out[i] = [edges[j + 1] - edges[j] - 1 for j in range(dim)]
    return out / k


def simplex_grid(dim: int, k: int) -> Iterator[Pmf]:
    for p in simplex_grid_array(dim, k):
        yield Pmf(p)


def grid_size(shapes: CandidateShape, k: int) -> int:
    size = 1
    for shape in shapes:
        size *= comb(k + shape.n_cols - 1, shape.n_cols - 1) ** shape.n_rows
    return size


@dataclass
class SearchResult:
    value: float
    argmax: Optional[CandidatePdf]
    n_evaluated: int = 0
    n_skipped: int = 0
    mode: str = "grid"


class _Evaluator:
    """Counts evaluations and skipped (non-finite or infeasible) candidates."""

    def __init__(self, objective: Callable[[CandidatePdf], Any], shapes: CandidateShape):
        self.objective = objective
        self.shapes = shapes
        self.n_evaluated = 0
        self.n_skipped = 0

    def __call__(self, rows: Sequence[np.ndarray]) -> tuple[CandidatePdf, Any]:
        cand = CandidatePdf(self.shapes, [_normalize(r) for r in rows])
        self.n_evaluated += 1
        out = self.objective(cand)
        return cand, out


def _normalize(rows: np.ndarray) -> np.ndarray:
    rows = np.clip(rows, 0.0, None)
    return rows / rows.sum(axis=1, keepdims=True)


def _random_rows(shapes: CandidateShape, rng: np.random.Generator) -> list[np.ndarray]:
    return [rng.dirichlet(np.ones(s.n_cols), size=s.n_rows) for s in shapes]


def _row_moves(row: np.ndarray, t: float) -> Iterator[np.ndarray]:
    """Local grid around one row: a step of size t toward and away from every vertex."""
    n = len(row)
    for j in range(n):
        vertex = np.zeros(n)
        vertex[j] = 1.0
        yield (1 - t) * row + t * vertex
        if row[j] < 1.0:
            # moving away from vertex j keeps the row nonnegative up to t = row[j] / (1 - row[j])
            step = min(t, row[j] / (1.0 - row[j]))
            if step > 1e-12:
                yield row + step * (row - vertex)


def _refine(
    score: Callable[[list[np.ndarray]], float],
    rows: list[np.ndarray],
    value: float,
    passes: int,
) -> tuple[list[np.ndarray], float]:
    rows = [r.copy() for r in rows]
    steps = [np.full(r.shape[0], REFINE_STEP) for r in rows]
    for _ in range(passes):
        gain = 0.0
        for b in range(len(rows)):
            for i in range(rows[b].shape[0]):
                best_row, best_value = None, value
                for new_row in _row_moves(rows[b][i], steps[b][i]):
                    trial = [r if j != b else _replace_row(r, i, new_row) for j, r in enumerate(rows)]
                    v = score(trial)
                    if v > best_value:
                        best_row, best_value = new_row, v
                if best_row is not None:
                    gain += best_value - value
                    rows[b][i] = best_row
                    value = best_value
                else:
                    steps[b][i] /= 2
        if gain < REFINE_GAIN:
            break
    return rows, value


def _replace_row(table: np.ndarray, i: int, row: np.ndarray) -> np.ndarray:
    out = table.copy()
    out[i] = row
    return out


def maximize(
    objective: Objective,
    shapes: CandidateShape,
    budget: SearchBudget,
    seeds: Sequence[CandidatePdf] = (),
) -> SearchResult:
    """Best value of `objective` over candidates of the given block shapes.

    The objective returns None (or a non-finite value) for candidates that must be
    filtered out; those are counted in `n_skipped`.
    """
    evaluator = _Evaluator(objective, shapes)
    best = SearchResult(-np.inf, None)

    def score(rows: list[np.ndarray]) -> float:
        nonlocal best
        cand, value = evaluator(rows)
        if value is None or not np.isfinite(value):
            evaluator.n_skipped += 1
            return -np.inf
        value = float(value)
        if value > best.value:
            best = SearchResult(value, cand)
        return value

    starts: list[tuple[list[np.ndarray], float]] = []
    for seed in seeds:
        rows = [np.array(r) for r in CandidatePdf.from_blocks(shapes, list(seed)).rows]
        starts.append((rows, score(rows)))

    size = grid_size(shapes, budget.grid_k)
    if size <= budget.grid_cap:
        mode = "grid"
        row_grids = [simplex_grid_array(s.n_cols, budget.grid_k) for s in shapes]
        per_block = [
            product(range(len(g)), repeat=s.n_rows) for g, s in zip(row_grids, shapes)
        ]
        grid_best: tuple[Optional[list[np.ndarray]], float] = (None, -np.inf)
        for combo in tqdm(product(*per_block), total=size, disable=not budget.progress, desc="grid"):
            rows = [g[list(idx)] for g, idx in zip(row_grids, combo)]
            v = score(rows)
            if v > grid_best[1]:
                grid_best = (rows, v)
        if grid_best[0] is not None:
            starts.append(grid_best)
        for rows, value in starts:
            if np.isfinite(value):
                _refine(score, rows, value, budget.refine_passes)
    else:
        mode = "restarts"
        for rows, value in starts:
            if np.isfinite(value):
                _refine(score, rows, value, budget.refine_passes)
        for i in tqdm(range(budget.restarts), disable=not budget.progress, desc="restarts"):
            rng = np.random.default_rng([budget.seed, i])
            rows = _random_rows(shapes, rng)
            value = score(rows)
            _refine(score, rows, value, budget.refine_passes)
            logger.trace("restart {}: best so far {:.6f}", i, best.value)

    best.n_evaluated = evaluator.n_evaluated
    best.n_skipped = evaluator.n_skipped
    best.mode = mode
    if evaluator.n_skipped > 0:
        logger.debug("Skipped {} of {} candidates", evaluator.n_skipped, evaluator.n_evaluated)
    logger.debug(
        "maximize ({}, {}): best {:.9f} after {} evaluations",
        mode,
        budget.describe(),
        best.value,
        evaluator.n_evaluated,
    )
    return best


@dataclass
class _SweepState:
    dim: int
    points: list[np.ndarray] = field(default_factory=list)
    owners: list[CandidatePdf] = field(default_factory=list)
    members: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)
    raw: list[np.ndarray] = field(default_factory=list)

    def add(self, region: RateRegion, cand: CandidatePdf) -> None:
        for i in range(region.n_members):
            self.members.append((region.member_a[i], region.member_b[i]))
        self.raw.append(region.raw_corners)
        for c in region.corners:
            self.points.append(c)
            self.owners.append(cand)
        if len(self.points) > 4096:
            self.prune()

    def prune(self) -> None:
        if not self.points:
            return
        points = np.array(self.points)
        front = pareto_front(points)
        idx = [int(np.argmin(np.abs(points - f[None, :]).sum(axis=1))) for f in front]
        self.points = [points[i] for i in idx]
        self.owners = [self.owners[i] for i in idx]
        self.raw = [pareto_front(np.vstack(self.raw))]

    def region(self) -> RateRegion:
        self.prune()
        points = np.array(self.points)
        corners = extreme_points(points)
        witnesses = [
            self.owners[int(np.argmin(np.abs(points - c[None, :]).sum(axis=1)))] for c in corners
        ]
        member_a, member_b = stack_members(self.members, self.dim)
        return RateRegion(
            self.dim, corners, member_a, member_b, pareto_front(np.vstack(self.raw)), True, witnesses
        )


def region_sweep(
    builder: ConstraintBuilder,
    shapes: CandidateShape,
    budget: SearchBudget,
    dim: int,
    seeds: Sequence[CandidatePdf] = (),
) -> RateRegion:
    """Convex hull of the union of the polytopes `builder` produces over visited candidates.

    In restart mode each restart refines the support value of its polytope along one
    direction of the fixed direction set, so that the restarts spread over the boundary.
    Every polytope evaluated along the way joins the union. Builders return None to
    filter a candidate out.
    """
    state = _SweepState(dim)
    n_skipped = 0

    def polytope(cand: CandidatePdf) -> Optional[RateRegion]:
        nonlocal n_skipped
        constraints = builder(cand)
        if constraints is None or not all(np.isfinite(c.rhs) for c in constraints):
            n_skipped += 1
            return None
        region = polytope_from_constraints(constraints, dim)
        state.add(region, cand)
        return region

    directions = np.clip(support_directions(dim), 0.0, None)
    directions = directions[directions.sum(axis=1) > 0]
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    # the all-ones direction (sum rate) first
    directions = np.vstack([np.ones(dim) / np.sqrt(dim), directions])

    def scorer(u: np.ndarray) -> Callable[[list[np.ndarray]], float]:
        def score(rows: list[np.ndarray]) -> float:
            region = polytope(CandidatePdf(shapes, [_normalize(r) for r in rows]))
            if region is None:
                return -np.inf
            return float(np.max(region.corners @ u))

        return score

    seed_rows = [
        [np.array(r) for r in CandidatePdf.from_blocks(shapes, list(s)).rows] for s in seeds
    ]
    for rows in seed_rows:
        polytope(CandidatePdf(shapes, rows))

    size = grid_size(shapes, budget.grid_k)
    if size <= budget.grid_cap:
        row_grids = [simplex_grid_array(s.n_cols, budget.grid_k) for s in shapes]
        per_block = [
            product(range(len(g)), repeat=s.n_rows) for g, s in zip(row_grids, shapes)
        ]
        for combo in tqdm(product(*per_block), total=size, disable=not budget.progress, desc="grid"):
            polytope(CandidatePdf(shapes, [g[list(idx)] for g, idx in zip(row_grids, combo)]))
    else:
        for i in tqdm(range(budget.restarts), disable=not budget.progress, desc="restarts"):
            rng = np.random.default_rng([budget.seed, i])
            u = directions[i % len(directions)]
            score = scorer(u)
            rows = _random_rows(shapes, rng)
            _refine(score, rows, score(rows), budget.refine_passes)
        # seeds are also pushed along a few directions
        for rows in seed_rows:
            for u in directions[: min(len(directions), 4)]:
                score = scorer(u)
                _refine(score, rows, score(rows), budget.refine_passes)

    if not state.points:
        raise DimensionMismatchError("Every candidate of the sweep was filtered out")
    if n_skipped > 0:
        logger.debug("Sweep skipped {} candidates", n_skipped)
    return state.region()
