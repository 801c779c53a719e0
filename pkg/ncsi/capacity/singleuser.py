from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
from loguru import logger

from ncsi.channels.classify import is_deterministic, mutual_info_rows
from ncsi.channels.models import StateChannel
from ncsi.misc import ChannelStructureError
from ncsi.optimizer.candidate import BlockShape, CandidatePdf, SearchBudget
from ncsi.optimizer.search import SearchResult, maximize
from ncsi.prob.measures import mutual_info
from ncsi.prob.pmf import CondPmf


@dataclass
class CapacityResult:
    value: float
    # maximizing distribution (a CandidatePdf, or a CondPmf P_{X|S} for closed forms)
    argmax: Optional[Any] = None
    search: Optional[SearchResult] = None


def blahut_arimoto(
    w: np.ndarray, tol: float = 1e-9, max_iter: int = 100000
) -> tuple[float, np.ndarray]:
    """Capacity (bits) of the channel matrix w (rows P(y|x)) and an optimal input pmf.

    Iterates until the gap between the upper bound max_x D(w_x || q) and the current
    I(X;Y) is below `tol`.
    """
    w = np.asarray(w, dtype=np.float64)
    m = w.shape[0]
    r = np.full(m, 1.0 / m)
    value = 0.0
    for _ in range(max_iter):
        q = r @ w
        ratio = np.divide(w, q[None, :], out=np.ones_like(w), where=(w > 0) & (q[None, :] > 0))
        d = np.sum(w * np.log2(ratio), axis=1)
        value = float(r @ d)
        upper = float(np.max(d))
        if upper - value < tol:
            break
        r = r * np.exp2(d)
        r /= r.sum()
    return max(0.0, value), r


def gp_shapes(ch: StateChannel, card_u: Optional[int] = None) -> list[BlockShape]:
    card_u = card_u or ch.nx * ch.ns + 1
    return [BlockShape.of("P_UX|S", {"S": ch.ns}, {"U": card_u, "X": ch.nx})]


def gp_objective(ch: StateChannel):
    def objective(cand: CandidatePdf) -> float:
        j = ch.joint(cand)
        return mutual_info(j, "U", "Y") - mutual_info(j, "U", "S")

    return objective


def clean_output_map(transition: np.ndarray) -> np.ndarray:
    """g(x, s) = most likely output of input x in state s (a deterministic channel's map)."""
    return np.argmax(transition, axis=-1)


def _block_from_table(shape: BlockShape, table: np.ndarray) -> CandidatePdf:
    return CandidatePdf([shape], [table.reshape(shape.n_rows, shape.n_cols)])


def constant_table(ns: int, card_u: int, px: np.ndarray) -> np.ndarray:
    """P(u, x | s) with U = 0 and X ~ px whatever the state."""
    table = np.zeros((ns, card_u, len(px)))
    table[:, 0, :] = px
    return table


def clean_output_table(transition: np.ndarray, card_u: int) -> Optional[np.ndarray]:
    """P(u, x | s) with U = g(X, S) uniform over the image of g(., s).

    `transition` is P(y | x, s) indexed [x][s][y]. For a deterministic channel U is the
    output itself; for additive noise it is the noiseless output. None when U cannot hold
    every output symbol.
    """
    nx, ns, ny = transition.shape
    if card_u < ny:
        return None
    g = clean_output_map(transition)
    table = np.zeros((ns, card_u, nx))
    for s in range(ns):
        image = sorted(set(g[:, s].tolist()))
        for u in image:
            x = int(np.flatnonzero(g[:, s] == u)[0])
            table[s, u, x] = 1.0 / len(image)
    return table


def input_copy_table(ns: int, card_u: int, px: np.ndarray) -> np.ndarray:
    """P(u, x | s) with U = X and X ~ px whatever the state."""
    nx = len(px)
    table = np.zeros((ns, card_u, nx))
    for x in range(nx):
        table[:, x, x] = px[x]
    return table


def gp_seeds(ch: StateChannel, shape: BlockShape) -> list[CandidatePdf]:
    """Handcrafted starting points: constant U, U = clean output, U = X."""
    card_u = dict(shape.outputs)["U"]
    avg = np.einsum("s,xsy->xy", ch.state_pmf.probs, ch.transition)
    _, px = blahut_arimoto(avg)
    tables = [
        constant_table(ch.ns, card_u, np.full(ch.nx, 1.0 / ch.nx)),
        clean_output_table(ch.transition, card_u),
        input_copy_table(ch.ns, card_u, px) if card_u >= ch.nx else None,
    ]
    return [_block_from_table(shape, t) for t in tables if t is not None]


def gp_capacity(
    ch: StateChannel, budget: SearchBudget, card_u: Optional[int] = None
) -> CapacityResult:
    """max over P_{U,X|S} of I(U;Y) - I(U;S)."""
    shapes = gp_shapes(ch, card_u)
    result = maximize(gp_objective(ch), shapes, budget, seeds=gp_seeds(ch, shapes[0]))
    logger.info("gp capacity {:.6f} ({})", result.value, budget.describe())
    return CapacityResult(max(0.0, result.value), result.argmax, result)


def csirt_capacity(ch: StateChannel, tol: float = 1e-9) -> CapacityResult:
    """max over P_{X|S} of I(X;Y|S): the state-averaged per-state capacities."""
    value = 0.0
    table = np.zeros((ch.ns, ch.nx))
    for s in range(ch.ns):
        c, r = blahut_arimoto(ch.state_kernel(s), tol=tol)
        value += ch.state_pmf.probs[s] * c
        table[s] = r
    return CapacityResult(value, CondPmf(("S",), ("X",), table))


def image_sizes(fmap: np.ndarray) -> np.ndarray:
    """|image of f(., s)| per state s, for a map indexed [x][s]."""
    return np.array([len(set(fmap[:, s].tolist())) for s in range(fmap.shape[1])])


def det_capacity(ch: StateChannel) -> float:
    """sum_s P(s) log2 |image of f(., s)|, the maximum of H(Y|S) for Y = f(X, S)."""
    det = is_deterministic(ch)
    if not det.deterministic:
        raise ChannelStructureError("The channel is not deterministic")
    return float(ch.state_pmf.probs @ np.log2(image_sizes(det.maps["Y"])))


def input_info(ch: StateChannel, px_s: np.ndarray) -> float:
    """I(X;Y|S) of a given P_{X|S} (rows indexed by s)."""
    return float(
        sum(
            ch.state_pmf.probs[s] * mutual_info_rows(px_s[s], ch.state_kernel(s))
            for s in range(ch.ns)
        )
    )
