"""Broadcast channel with non-causal state at the transmitter.

Rate regions are 3-D (R0, R1, R2) when a common message is carried and 2-D (R1, R2)
otherwise. The per-candidate constraint builders are public so the reductions and
inclusions between the bounds can be checked candidate by candidate.
"""

from __future__ import annotations

from itertools import product
from typing import Iterator, Mapping, Optional

import numpy as np
from loguru import logger

from ncsi.capacity.singleuser import clean_output_map
from ncsi.channels.classify import (
    IndependenceVerdict,
    MoreCapableVerdict,
    check_outputs_independent,
    is_degraded,
    is_deterministic,
    is_more_capable,
)
from ncsi.channels.models import BcStateChannel
from ncsi.misc import ChannelStructureError, positive_part
from ncsi.optimizer.candidate import BlockShape, CandidatePdf, SearchBudget
from ncsi.optimizer.search import region_sweep, simplex_grid_array
from ncsi.prob.measures import conditional_entropy, mutual_info
from ncsi.prob.pmf import CondPmf, JointPmf
from ncsi.regions.region import LinearRateConstraint, RateRegion, polytope_from_constraints

# number of P_{X|S} grid points used to build substitution seeds
SEED_GRID_CAP = 256
# identity spot checks: one candidate in this many
IDENTITY_CHECK_EVERY = 100
IDENTITY_TOL = 1e-9

WV = ("W", "V")
WU = ("W", "U")
VUW = ("V", "U", "W")


def default_card(ch: BcStateChannel) -> int:
    return ch.nx * ch.ns + 2


def aux_shape(ch: BcStateChannel, name: str, cards: Mapping[str, Optional[int]]) -> BlockShape:
    """One block P(aux..., X | S) with the auxiliaries in the given order."""
    outputs = {a: (c if c is not None else default_card(ch)) for a, c in cards.items()}
    outputs["X"] = ch.nx
    return BlockShape.of(name, {"S": ch.ns}, outputs)


def input_shape(ch: BcStateChannel) -> BlockShape:
    return BlockShape.of("P_X|S", {"S": ch.ns}, {"X": ch.nx})


# -- constraint builders --------------------------------------------------------------


def inner_constraints(j: JointPmf) -> list[LinearRateConstraint]:
    """The five constraints of the inner bound with common message, over P_{W,V,U,X|S}."""
    i_wv_y1 = mutual_info(j, WV, "Y1")
    i_wu_y2 = mutual_info(j, WU, "Y2")
    binning = mutual_info(j, "V", "U", "W") + mutual_info(j, VUW, "S")
    return [
        LinearRateConstraint((1, 1, 0), i_wv_y1 - mutual_info(j, WV, "S"), "R0+R1"),
        LinearRateConstraint((1, 0, 1), i_wu_y2 - mutual_info(j, WU, "S"), "R0+R2"),
        LinearRateConstraint(
            (1, 1, 1), i_wv_y1 + mutual_info(j, "U", "Y2", "W") - binning, "R0+R1+R2"
        ),
        LinearRateConstraint(
            (1, 1, 1), mutual_info(j, "V", "Y1", "W") + i_wu_y2 - binning, "R0+R1+R2"
        ),
        LinearRateConstraint(
            (2, 1, 1), i_wv_y1 + i_wu_y2 - binning - mutual_info(j, "W", "S"), "2R0+R1+R2"
        ),
    ]


def marton_constraints(j: JointPmf) -> list[LinearRateConstraint]:
    """Marton's region with common message (no state), over P_{W,V,U,X}."""
    i_wv_y1 = mutual_info(j, WV, "Y1")
    i_wu_y2 = mutual_info(j, WU, "Y2")
    i_vu = mutual_info(j, "V", "U", "W")
    return [
        LinearRateConstraint((1, 1, 0), i_wv_y1, "R0+R1"),
        LinearRateConstraint((1, 0, 1), i_wu_y2, "R0+R2"),
        LinearRateConstraint((1, 1, 1), i_wv_y1 + mutual_info(j, "U", "Y2", "W") - i_vu, "R0+R1+R2"),
        LinearRateConstraint((1, 1, 1), mutual_info(j, "V", "Y1", "W") + i_wu_y2 - i_vu, "R0+R1+R2"),
        LinearRateConstraint((2, 1, 1), i_wv_y1 + i_wu_y2 - i_vu, "2R0+R1+R2"),
    ]


def outer_constraints(j: JointPmf) -> list[LinearRateConstraint]:
    """The four constraints of the outer bound, over P_{V,U,X|S}."""
    i_v = mutual_info(j, "V", "Y1", "S")
    i_u = mutual_info(j, "U", "Y2", "S")
    return [
        LinearRateConstraint((1, 1, 0), i_v, "R0+R1"),
        LinearRateConstraint((1, 0, 1), i_u, "R0+R2"),
        LinearRateConstraint((1, 1, 1), mutual_info(j, "X", "Y1", ("U", "S")) + i_u, "R0+R1+R2"),
        LinearRateConstraint((1, 1, 1), mutual_info(j, "X", "Y2", ("V", "S")) + i_v, "R0+R1+R2"),
    ]


def nair_el_gamal_constraints(j: JointPmf) -> list[LinearRateConstraint]:
    """Nair-El Gamal outer bound with common message (no state), over P_{V,U,X}."""
    i_v = mutual_info(j, "V", "Y1")
    i_u = mutual_info(j, "U", "Y2")
    return [
        LinearRateConstraint((1, 1, 0), i_v, "R0+R1"),
        LinearRateConstraint((1, 0, 1), i_u, "R0+R2"),
        LinearRateConstraint((1, 1, 1), mutual_info(j, "X", "Y1", "U") + i_u, "R0+R1+R2"),
        LinearRateConstraint((1, 1, 1), mutual_info(j, "X", "Y2", "V") + i_v, "R0+R1+R2"),
    ]


def det_constraints(j: JointPmf) -> list[LinearRateConstraint]:
    return [
        LinearRateConstraint((1, 0), conditional_entropy(j, "Y1", "S"), "R1"),
        LinearRateConstraint((0, 1), conditional_entropy(j, "Y2", "S"), "R2"),
        LinearRateConstraint((1, 1), conditional_entropy(j, ("Y1", "Y2"), "S"), "R1+R2"),
    ]


def det_common_constraints(j: JointPmf) -> list[LinearRateConstraint]:
    return [
        LinearRateConstraint((1, 1, 0), conditional_entropy(j, "Y1", "S"), "R0+R1"),
        LinearRateConstraint((1, 0, 1), conditional_entropy(j, "Y2", "S"), "R0+R2"),
    ]


def det_direct_constraints(j: JointPmf) -> list[LinearRateConstraint]:
    """Inner bound with W constant, V = Y1 and U = Y2 on a deterministic BC.

    The third constraint is implied by the first two whenever I(Y1;Y2|S) = 0.
    """
    return det_common_constraints(j) + [
        LinearRateConstraint(
            (2, 1, 1), conditional_entropy(j, ("Y1", "Y2"), "S"), "2R0+R1+R2"
        )
    ]


def semidet_constraints(j: JointPmf) -> list[LinearRateConstraint]:
    i_u = mutual_info(j, "U", "Y2", "S")
    return [
        LinearRateConstraint((1, 0), conditional_entropy(j, "Y1", "S"), "R1"),
        LinearRateConstraint((0, 1), i_u, "R2"),
        LinearRateConstraint((1, 1), conditional_entropy(j, "Y1", ("U", "S")) + i_u, "R1+R2"),
    ]


def more_capable_constraints(j: JointPmf) -> list[LinearRateConstraint]:
    i_u = mutual_info(j, "U", "Y2", "S")
    return [
        LinearRateConstraint((1, 0, 1), i_u, "R0+R2"),
        LinearRateConstraint((1, 1, 1), mutual_info(j, "X", "Y1", ("U", "S")) + i_u, "R0+R1+R2"),
        LinearRateConstraint((1, 1, 1), mutual_info(j, "X", "Y1", "S"), "R0+R1+R2"),
    ]


def degraded_det_constraints(j: JointPmf) -> list[LinearRateConstraint]:
    return [
        LinearRateConstraint((0, 1, 0), conditional_entropy(j, "Y1", ("U", "S")), "R1"),
        LinearRateConstraint(
            (1, 0, 1), positive_part(mutual_info(j, "U", "Y2") - mutual_info(j, "U", "S")), "R0+R2"
        ),
    ]


def ss_constraints(j: JointPmf) -> list[LinearRateConstraint]:
    """Superposition-and-binning region with common message, over P_{W,V,U,X|S}."""
    i_w_y1 = mutual_info(j, "W", "Y1")
    i_w_y2 = mutual_info(j, "W", "Y2")
    i_w_s = mutual_info(j, "W", "S")
    first = mutual_info(j, WV, "Y1") - mutual_info(j, WV, "S")
    second = mutual_info(j, WU, "Y2") - mutual_info(j, WU, "S")
    return [
        LinearRateConstraint((1, 0, 0), positive_part(min(i_w_y1, i_w_y2) - i_w_s), "R0"),
        LinearRateConstraint((1, 1, 0), first, "R0+R1"),
        LinearRateConstraint((1, 0, 1), second, "R0+R2"),
        LinearRateConstraint(
            (1, 1, 1),
            first
            + second
            - mutual_info(j, "U", "V", ("W", "S"))
            - positive_part(max(i_w_y1, i_w_y2) - i_w_s),
            "R0+R1+R2",
        ),
    ]


def ss_region(ch: BcStateChannel, cand: CandidatePdf) -> RateRegion:
    """The superposition-and-binning polytope of one candidate P_{W,V,U,X|S}."""
    return polytope_from_constraints(ss_constraints(ch.joint(cand)), 3)


def binning_identity_gap(j: JointPmf) -> float:
    """I(W,V;S) + I(W,U;S) + I(U;V|W,S) - [I(V;U|W) + I(V,U,W;S) + I(W;S)], zero for every law."""
    lhs = mutual_info(j, WV, "S") + mutual_info(j, WU, "S") + mutual_info(j, "U", "V", ("W", "S"))
    rhs = mutual_info(j, "V", "U", "W") + mutual_info(j, VUW, "S") + mutual_info(j, "W", "S")
    return lhs - rhs


# -- seeds ----------------------------------------------------------------------------


def input_grid(nx: int, ns: int, grid_k: int, cap: int = SEED_GRID_CAP) -> Iterator[np.ndarray]:
    """P_{X|S} tables (rows indexed by s) on a simplex grid, coarsened to at most `cap` points."""
    k = grid_k
    rows = simplex_grid_array(nx, k)
    while k > 1 and len(rows) ** ns > cap:
        k -= 1
        rows = simplex_grid_array(nx, k)
    for combo in product(range(len(rows)), repeat=ns):
        yield rows[list(combo)]


def substitution_table(
    shape: BlockShape, maps: Mapping[str, Optional[np.ndarray]], px_s: np.ndarray
) -> Optional[np.ndarray]:
    """P(aux..., x | s) with each auxiliary a function of (x, s), or constant when its map is None.

    None when an auxiliary alphabet is too small for its map.
    """
    outputs = dict(shape.outputs)
    aux = [n for n in outputs if n != "X"]
    for name in aux:
        fmap = maps.get(name)
        if fmap is not None and int(fmap.max()) >= outputs[name]:
            return None
    ns, nx = px_s.shape
    table = np.zeros((ns,) + tuple(outputs[n] for n in aux) + (nx,))
    for s in range(ns):
        for x in range(nx):
            idx = tuple(
                int(maps[n][x, s]) if maps.get(n) is not None else 0 for n in aux
            )
            table[(s,) + idx + (x,)] += px_s[s, x]
    return table


def _seeds(
    shape: BlockShape,
    assignments: list[Mapping[str, Optional[np.ndarray]]],
    grids: list[np.ndarray],
) -> list[CandidatePdf]:
    seeds = []
    for maps in assignments:
        for px_s in grids:
            table = substitution_table(shape, maps, px_s)
            if table is not None:
                seeds.append(CandidatePdf([shape], [table.reshape(shape.n_rows, shape.n_cols)]))
    return seeds


def output_maps(ch: BcStateChannel) -> dict[str, np.ndarray]:
    """Most likely output of each receiver, the map of a deterministic output."""
    return {name: clean_output_map(k) for name, k in ch.output_kernels().items()}


def inner_seeds(ch: BcStateChannel, shape: BlockShape, grid_k: int) -> list[CandidatePdf]:
    g = output_maps(ch)
    grids = list(input_grid(ch.nx, ch.ns, grid_k))
    assignments = [
        {},
        {"V": g["Y1"], "U": g["Y2"]},
        {"W": g["Y1"]},
        {"W": g["Y2"]},
    ]
    return _seeds(shape, assignments, grids)


def outer_seeds(ch: BcStateChannel, shape: BlockShape, grid_k: int) -> list[CandidatePdf]:
    g = output_maps(ch)
    grids = list(input_grid(ch.nx, ch.ns, grid_k))
    return _seeds(shape, [{}, {"V": g["Y1"], "U": g["Y2"]}], grids)


def pair_table(block: CondPmf, cards: tuple[int, int]) -> Optional[np.ndarray]:
    """P(w, v, u, x | s) rewritten as P(v', u', x | s) with V' = (W, V) and U' = (W, U).

    Returns None when the pairs do not fit in `cards`.
    """
    coords = block.given + block.outputs
    t = np.transpose(block.table, [coords.index(n) for n in ("S", "W", "V", "U", "X")])
    ns, cw, cv, cu, nx = t.shape
    if cw * cv > cards[0] or cw * cu > cards[1]:
        return None
    out = np.zeros((ns, cards[0], cards[1], nx))
    for w, v, u in np.ndindex(cw, cv, cu):
        out[:, w * cv + v, w * cu + u, :] += t[:, w, v, u, :]
    return out


def paired_cards(
    ch: BcStateChannel, card_v: Optional[int] = None, card_u: Optional[int] = None
) -> tuple[int, int, int]:
    """Inner-bound cardinalities (W, V, U) whose pairs (W, V) and (W, U) fit the outer ones."""
    cv = card_v if card_v is not None else default_card(ch)
    cu = card_u if card_u is not None else default_card(ch)
    w = 2 if min(cv, cu) >= 2 else 1
    return w, cv // w, cu // w


def witness_seeds(shape: BlockShape, inner: RateRegion) -> list[CandidatePdf]:
    """Outer-bound candidates carrying the corners of an inner region.

    With V' = (W, V) and U' = (W, U) every outer constraint of the paired law is at least
    an inner constraint of the original one, so the inner polytope of each witness lies in
    the outer polytope of its pair.
    """
    outputs = dict(shape.outputs)
    seeds = []
    for cand in inner.witnesses or ():
        table = pair_table(cand.blocks[0], (outputs["V"], outputs["U"]))
        if table is not None:
            seeds.append(CandidatePdf([shape], [table.reshape(shape.n_rows, shape.n_cols)]))
    if inner.witnesses and not seeds:
        logger.warning("Outer cardinalities {} too small to carry the inner witnesses", outputs)
    return seeds


# -- regions --------------------------------------------------------------------------


def _sweep(ch, builder, shape, budget, dim, seeds, name: str) -> RateRegion:
    region = region_sweep(lambda cand: builder(ch.joint(cand)), [shape], budget, dim, seeds=seeds)
    logger.info("BC {}: {} ({})", name, region, budget.describe())
    return region


def bc_inner_region(
    ch: BcStateChannel,
    budget: SearchBudget,
    card_w: Optional[int] = None,
    card_v: Optional[int] = None,
    card_u: Optional[int] = None,
) -> RateRegion:
    shape = aux_shape(ch, "P_WVUX|S", {"W": card_w, "V": card_v, "U": card_u})
    visited = 0

    def builder(j: JointPmf) -> list[LinearRateConstraint]:
        nonlocal visited
        visited += 1
        if visited % IDENTITY_CHECK_EVERY == 0:
            gap = binning_identity_gap(j)
            if abs(gap) > IDENTITY_TOL:
                logger.warning("Binning identity off by {:.3e} on candidate {}", gap, visited)
        return inner_constraints(j)

    return _sweep(ch, builder, shape, budget, 3, inner_seeds(ch, shape, budget.grid_k), "inner")


def bc_outer_region(
    ch: BcStateChannel,
    budget: SearchBudget,
    card_v: Optional[int] = None,
    card_u: Optional[int] = None,
    inner: Optional[RateRegion] = None,
) -> RateRegion:
    """Outer bound with common message; the witnesses of `inner` join the seeds when given."""
    shape = aux_shape(ch, "P_VUX|S", {"V": card_v, "U": card_u})
    seeds = outer_seeds(ch, shape, budget.grid_k)
    if inner is not None:
        seeds += witness_seeds(shape, inner)
    return _sweep(ch, outer_constraints, shape, budget, 3, seeds, "outer")


def _require_deterministic(ch: BcStateChannel, *names: str) -> None:
    det = is_deterministic(ch)
    for name in names:
        if not det.outputs[name]:
            raise ChannelStructureError(f"Output {name} of the BC is not deterministic")


def det_bc_capacity(ch: BcStateChannel, budget: SearchBudget) -> RateRegion:
    """Capacity region without common message of a deterministic BC."""
    _require_deterministic(ch, "Y1", "Y2")
    return _sweep(ch, det_constraints, input_shape(ch), budget, 2, (), "deterministic capacity")


def det_bc_common_capacity(ch: BcStateChannel, budget: SearchBudget) -> RateRegion:
    """Capacity region with common message of a deterministic BC with I(Y1;Y2|S) = 0."""
    _require_deterministic(ch, "Y1", "Y2")
    check = check_outputs_independent(ch)
    if check.verdict != IndependenceVerdict.HOLDS:
        s, x, xp = check.pair
        raise ChannelStructureError(
            f"I(Y1;Y2|S) = 0 fails: inputs {x} and {xp} separate both outputs in state {s}"
        )
    return _sweep(
        ch, det_common_constraints, input_shape(ch), budget, 3, (), "deterministic common capacity"
    )


def semidet_bc_capacity(
    ch: BcStateChannel, budget: SearchBudget, card_u: Optional[int] = None
) -> RateRegion:
    """Capacity region without common message when Y1 is a deterministic function of (X, S)."""
    _require_deterministic(ch, "Y1")
    shape = aux_shape(ch, "P_UX|S", {"U": card_u})
    g = output_maps(ch)
    seeds = _seeds(shape, [{}, {"U": g["Y2"]}], list(input_grid(ch.nx, ch.ns, budget.grid_k)))
    return _sweep(ch, semidet_constraints, shape, budget, 2, seeds, "semi-deterministic capacity")


def more_capable_capacity(
    ch: BcStateChannel, budget: SearchBudget, card_u: Optional[int] = None
) -> RateRegion:
    check = is_more_capable(ch, grid_k=budget.grid_k, seed=budget.seed)
    if check.verdict == MoreCapableVerdict.CERTIFIED_FALSE:
        raise ChannelStructureError(
            f"Receiver 1 is not more capable: I(X;Y2|S) exceeds I(X;Y1|S) by {check.gap:.3e} bits"
        )
    shape = aux_shape(ch, "P_UX|S", {"U": card_u})
    g = output_maps(ch)
    seeds = _seeds(shape, [{}, {"U": g["Y2"]}], list(input_grid(ch.nx, ch.ns, budget.grid_k)))
    return _sweep(ch, more_capable_constraints, shape, budget, 3, seeds, "more-capable capacity")


def degraded_det_capacity(
    ch: BcStateChannel,
    budget: SearchBudget,
    card_u: Optional[int] = None,
    csi_at_strong: bool = False,
) -> RateRegion:
    """Capacity region with common message of a degraded BC with deterministic Y1.

    With `csi_at_strong` the stronger receiver also observes the state (Y1 becomes (Y1, S)).
    """
    _require_deterministic(ch, "Y1")
    if not is_degraded(ch).degraded:
        raise ChannelStructureError("Y2 is not a degraded version of Y1")
    if csi_at_strong:
        ch = ch.with_receiver_csi("Y1")
    shape = aux_shape(ch, "P_UX|S", {"U": card_u})
    g = output_maps(ch)
    seeds = _seeds(shape, [{}, {"U": g["Y2"]}], list(input_grid(ch.nx, ch.ns, budget.grid_k)))
    return _sweep(ch, degraded_det_constraints, shape, budget, 3, seeds, "degraded capacity")
