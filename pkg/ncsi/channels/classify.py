from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Optional

import numpy as np
from loguru import logger

from ncsi.channels.models import (
    AnyChannel,
    BcStateChannel,
    MacStateChannel,
)
from ncsi.misc import ChannelStructureError
from ncsi.optimizer.search import simplex_grid_array

# an entry within this distance of 0 or 1 counts as deterministic
DETERMINISTIC_TOL = 1e-12
ORTHOGONAL_TOL = 1e-9
DEGRADED_TOL = 1e-7
# a sampled violation above this margin refutes a "for all P_{X|S}" condition
REFUTE_MARGIN = 1e-9


@dataclass
class DeterministicResult:
    deterministic: bool
    # per output coordinate: whether it is a deterministic function of the inputs
    outputs: dict[str, bool] = field(default_factory=dict)
    # per deterministic output coordinate: the map, indexed by the input axes
    maps: dict[str, np.ndarray] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.deterministic


def is_deterministic(ch: AnyChannel) -> DeterministicResult:
    outputs, maps = {}, {}
    for name, kernel in ch.output_kernels().items():
        ok = bool(
            np.all(
                (np.abs(kernel) <= DETERMINISTIC_TOL)
                | (np.abs(kernel - 1.0) <= DETERMINISTIC_TOL)
            )
        )
        outputs[name] = ok
        if ok:
            maps[name] = np.argmax(kernel, axis=-1)
    if isinstance(ch, MacStateChannel) and ch.is_product_output:
        # the product coordinate is deterministic iff both factors are
        deterministic = outputs["Y"]
    else:
        deterministic = all(outputs.values())
    return DeterministicResult(deterministic, outputs, maps)


@dataclass
class OrthogonalResult:
    orthogonal: bool
    # P(y1 | x1, s1) and P(y2 | x2, s2) when orthogonal
    factors: Optional[tuple[np.ndarray, np.ndarray]] = None

    def __bool__(self) -> bool:
        return self.orthogonal


def is_orthogonal(mac: MacStateChannel) -> OrthogonalResult:
    """Test whether P(y1, y2 | x1, x2, s1, s2) = P(y1 | x1, s1) P(y2 | x2, s2)."""
    if not mac.is_product_output:
        raise ChannelStructureError(
            f"The MAC output alphabet is not declared as a product Y1 x Y2 (output shape {mac.output_dims})"
        )
    t = mac.transition
    # axes: x1, x2, s1, s2, y1, y2
    p1 = t.sum(axis=5)
    p2 = t.sum(axis=4)
    f1 = p1.mean(axis=(1, 3))
    f2 = p2.mean(axis=(0, 2))
    if np.max(np.abs(p1 - f1[:, None, :, None, :])) > ORTHOGONAL_TOL:
        return OrthogonalResult(False)
    if np.max(np.abs(p2 - f2[None, :, None, :, :])) > ORTHOGONAL_TOL:
        return OrthogonalResult(False)
    product = f1[:, None, :, None, :, None] * f2[None, :, None, :, None, :]
    if np.max(np.abs(product - t)) > ORTHOGONAL_TOL:
        return OrthogonalResult(False)
    return OrthogonalResult(True, (f1, f2))


def states_independent(mac: MacStateChannel, tol: float = ORTHOGONAL_TOL) -> bool:
    table = mac.state_table
    product = np.outer(table.sum(axis=1), table.sum(axis=0))
    return bool(np.max(np.abs(product - table)) <= tol)


@dataclass
class DegradedResult:
    degraded: bool
    # the degrading channel Q(y2 | y1) when degraded
    q: Optional[np.ndarray] = None

    def __bool__(self) -> bool:
        return self.degraded


def is_degraded(bc: BcStateChannel) -> DegradedResult:
    """Find Q(y2 | y1) with P(y1, y2 | x, s) = P(y1 | x, s) Q(y2 | y1), if one exists.

    For every y1 the factorization is a linear system in the row Q(. | y1) with one equation
    per (x, s); it is solved in the least-squares sense and the solution is accepted when
    the residual, the signs and the row sum are all within tolerance.
    """
    nx, ns, ny1, ny2 = bc.transition.shape
    joint = bc.transition.reshape(nx * ns, ny1, ny2)
    p1 = joint.sum(axis=2)
    q = np.zeros((ny1, ny2))
    for y1 in range(ny1):
        a = p1[:, y1 : y1 + 1]
        b = joint[:, y1, :]
        if np.max(a) <= DEGRADED_TOL:
            # y1 is never produced, any row works
            q[y1] = 1.0 / ny2
            continue
        row, *_ = np.linalg.lstsq(a, b, rcond=None)
        row = row[0]
        if np.max(np.abs(a @ row[None, :] - b)) > DEGRADED_TOL:
            return DegradedResult(False)
        if np.min(row) < -DEGRADED_TOL or abs(row.sum() - 1.0) > DEGRADED_TOL:
            return DegradedResult(False)
        row = np.clip(row, 0.0, None)
        q[y1] = row / row.sum()
    return DegradedResult(True, q)


def mutual_info_rows(px: np.ndarray, w: np.ndarray) -> float:
    """I(X;Y) in bits for input pmf px and channel matrix w (rows P(y|x))."""
    py = px @ w
    ratio = np.divide(w, py[None, :], out=np.ones_like(w), where=(w > 0) & (py[None, :] > 0))
    return float(np.sum(px[:, None] * w * np.log2(ratio)))


def _candidate_rows(nx: int, grid_k: int, n_random: int, rng: np.random.Generator):
    for p in simplex_grid_array(nx, grid_k):
        yield p
    for _ in range(n_random):
        yield rng.dirichlet(np.ones(nx))


def _witness(ns: int, nx: int, s: int, row: np.ndarray) -> np.ndarray:
    """P_{X|S} using `row` in state s and a point mass at x = 0 elsewhere."""
    table = np.zeros((ns, nx))
    table[:, 0] = 1.0
    table[s] = row
    return table


class MoreCapableVerdict(str, Enum):
    CERTIFIED_FALSE = "certified_false"
    PROBABLY_TRUE = "probably_true"


@dataclass
class MoreCapableResult:
    verdict: MoreCapableVerdict
    # P_{X|S} (rows indexed by s) violating I(X;Y2|S) <= I(X;Y1|S)
    witness: Optional[np.ndarray] = None
    gap: float = 0.0


def is_more_capable(
    bc: BcStateChannel, grid_k: int = 8, n_random: int = 200, seed: int = 0
) -> MoreCapableResult:
    """Refute I(X;Y2|S) <= I(X;Y1|S) over a simplex grid plus random input laws.

    Both sides are averages over states of per-state terms, so the search runs state by
    state over single rows of P_{X|S}.
    """
    kernels = bc.output_kernels()
    w1, w2 = kernels["Y1"], kernels["Y2"]
    rng = np.random.default_rng(seed)
    ps = bc.state_pmf.probs
    best_gap, best = 0.0, None
    for s in range(bc.ns):
        if ps[s] <= 0:
            continue
        for row in _candidate_rows(bc.nx, grid_k, n_random, rng):
            gap = ps[s] * (
                mutual_info_rows(row, w2[:, s, :]) - mutual_info_rows(row, w1[:, s, :])
            )
            if gap > best_gap:
                best_gap, best = gap, (s, row)
    if best is not None and best_gap > REFUTE_MARGIN:
        logger.debug("More-capable condition violated by {:.3e} bits", best_gap)
        return MoreCapableResult(
            MoreCapableVerdict.CERTIFIED_FALSE, _witness(bc.ns, bc.nx, *best), best_gap
        )
    return MoreCapableResult(MoreCapableVerdict.PROBABLY_TRUE, None, best_gap)


class IndependenceVerdict(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    SAMPLED_ONLY = "sampled_only"


@dataclass
class IndependenceResult:
    verdict: IndependenceVerdict
    # P_{X|S} (rows indexed by s) with I(Y1;Y2|S) > 0
    witness: Optional[np.ndarray] = None
    # (s, x, x') for deterministic channels: both outputs differ between x and x' in state s
    pair: Optional[tuple[int, int, int]] = None


def check_outputs_independent(
    bc: BcStateChannel, grid_k: int = 8, n_random: int = 200, seed: int = 0
) -> IndependenceResult:
    """Check I(Y1;Y2|S) = 0 for every P_{X|S}.

    For a deterministic BC the condition fails iff some state admits two inputs on which
    both outputs differ (equal mass on the two gives one bit); otherwise the pairs of
    outputs of each state lie on one line and one output is constant. Stochastic BCs are
    only refuted by sampling.
    """
    det = is_deterministic(bc)
    ps = bc.state_pmf.probs
    if det.deterministic:
        f1, f2 = det.maps["Y1"], det.maps["Y2"]
        for s in range(bc.ns):
            if ps[s] <= 0:
                continue
            for x, xp in combinations(range(bc.nx), 2):
                if f1[x, s] != f1[xp, s] and f2[x, s] != f2[xp, s]:
                    row = np.zeros(bc.nx)
                    row[[x, xp]] = 0.5
                    return IndependenceResult(
                        IndependenceVerdict.FAILS, _witness(bc.ns, bc.nx, s, row), (s, x, xp)
                    )
        return IndependenceResult(IndependenceVerdict.HOLDS)

    rng = np.random.default_rng(seed)
    nx, ns, ny1, ny2 = bc.transition.shape
    for s in range(ns):
        if ps[s] <= 0:
            continue
        w = bc.transition[:, s, :, :]
        for row in _candidate_rows(nx, grid_k, n_random, rng):
            info = _pair_info(np.einsum("x,xab->ab", row, w))
            if ps[s] * info > REFUTE_MARGIN:
                return IndependenceResult(
                    IndependenceVerdict.FAILS, _witness(ns, nx, s, row)
                )
    return IndependenceResult(IndependenceVerdict.SAMPLED_ONLY)


def _pair_info(pyy: np.ndarray) -> float:
    """I(A;B) in bits of a joint table P(a, b)."""
    pa = pyy.sum(axis=1, keepdims=True)
    pb = pyy.sum(axis=0, keepdims=True)
    mask = pyy > 0
    return float(np.sum(pyy[mask] * np.log2(pyy[mask] / (pa * pb)[mask])))
