"""Rate regions of the two-user MAC with non-causal state at the transmitters.

Transmitter i sees S_i. The inner bound quantifies over independent blocks
P_{X1 V1 | S1} P_{X2 V2 | S2}; the outer bounds over one joint block P_{X1 X2 V1 V2 | S1 S2}.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from loguru import logger

from ncsi.capacity.singleuser import (
    clean_output_table,
    constant_table,
    gp_capacity,
    image_sizes,
    input_copy_table,
)
from ncsi.channels.classify import is_deterministic, is_orthogonal, states_independent
from ncsi.channels.models import MacStateChannel, StateChannel
from ncsi.misc import ChannelStructureError
from ncsi.optimizer.candidate import BlockShape, CandidatePdf, SearchBudget
from ncsi.optimizer.search import region_sweep
from ncsi.prob.measures import mutual_info
from ncsi.prob.pmf import CondPmf, JointPmf
from ncsi.regions.region import LinearRateConstraint, RateRegion, polytope_from_constraints

V1V2 = ("V1", "V2")
S1S2 = ("S1", "S2")


def _cards(ch: MacStateChannel, card_v: Optional[int]) -> tuple[int, int]:
    sizes = ch.sizes
    if card_v is not None:
        return card_v, card_v
    return sizes["X1"] * sizes["S1"] + 1, sizes["X2"] * sizes["S2"] + 1


def inner_shapes(ch: MacStateChannel, card_v: Optional[int] = None) -> list[BlockShape]:
    return _user_shapes(ch, *_cards(ch, card_v))


def _user_shapes(ch: MacStateChannel, c1: int, c2: int) -> list[BlockShape]:
    sizes = ch.sizes
    return [
        BlockShape.of("P_V1X1|S1", {"S1": sizes["S1"]}, {"V1": c1, "X1": sizes["X1"]}),
        BlockShape.of("P_V2X2|S2", {"S2": sizes["S2"]}, {"V2": c2, "X2": sizes["X2"]}),
    ]


def outer_shapes(ch: MacStateChannel, card_v: Optional[int] = None) -> list[BlockShape]:
    sizes = ch.sizes
    c1, c2 = _cards(ch, card_v)
    return [
        BlockShape.of(
            "P_V1V2X1X2|S1S2",
            {"S1": sizes["S1"], "S2": sizes["S2"]},
            {"V1": c1, "V2": c2, "X1": sizes["X1"], "X2": sizes["X2"]},
        )
    ]


def inner_constraints(j: JointPmf) -> list[LinearRateConstraint]:
    return [
        LinearRateConstraint(
            (1, 0), mutual_info(j, "V1", "Y", "V2") - mutual_info(j, "V1", "S1", "V2"), "R1"
        ),
        LinearRateConstraint(
            (0, 1), mutual_info(j, "V2", "Y", "V1") - mutual_info(j, "V2", "S2", "V1"), "R2"
        ),
        LinearRateConstraint((1, 1), mutual_info(j, V1V2, "Y") - mutual_info(j, V1V2, S1S2), "R1+R2"),
    ]


def outer_constraints(j: JointPmf) -> list[LinearRateConstraint]:
    joint_state = mutual_info(j, V1V2, S1S2)
    return [
        LinearRateConstraint(
            (1, 0), mutual_info(j, "V1", "Y", "V2") + mutual_info(j, "V2", "S2") - joint_state, "R1"
        ),
        LinearRateConstraint(
            (0, 1), mutual_info(j, "V2", "Y", "V1") + mutual_info(j, "V1", "S1") - joint_state, "R2"
        ),
        LinearRateConstraint((1, 1), mutual_info(j, V1V2, "Y") - joint_state, "R1+R2"),
    ]


# the weak outer bound evaluates the inner-bound functions over the joint family
outer_weak_constraints = inner_constraints


def _factor_kernels(ch: MacStateChannel) -> Optional[tuple[np.ndarray, np.ndarray]]:
    if not ch.is_product_output:
        return None
    orth = is_orthogonal(ch)
    return orth.factors if orth.orthogonal else None


def _user_tables(
    ch: MacStateChannel, user: int, card_v: int, kernel: Optional[np.ndarray]
) -> list[np.ndarray]:
    """Seed tables P(v, x | s) of one user: constant V, V = X and V = clean output of its link."""
    sizes = ch.sizes
    nx, ns = sizes[f"X{user}"], sizes[f"S{user}"]
    uniform = np.full(nx, 1.0 / nx)
    tables = [constant_table(ns, card_v, uniform)]
    if card_v >= nx:
        tables.append(input_copy_table(ns, card_v, uniform))
    if kernel is not None:
        clean = clean_output_table(kernel, card_v)
        if clean is not None:
            tables.append(clean)
    return tables


def inner_seeds(ch: MacStateChannel, shapes: list[BlockShape]) -> list[CandidatePdf]:
    factors = _factor_kernels(ch)
    c1, c2 = (dict(s.outputs)[v] for s, v in zip(shapes, V1V2))
    t1 = _user_tables(ch, 1, c1, factors[0] if factors else None)
    t2 = _user_tables(ch, 2, c2, factors[1] if factors else None)
    seeds = []
    for a in t1:
        for b in t2:
            seeds.append(
                CandidatePdf(
                    shapes,
                    [a.reshape(shapes[0].n_rows, -1), b.reshape(shapes[1].n_rows, -1)],
                )
            )
    return seeds


def joint_blocks(shapes: list[BlockShape], inner: list[CandidatePdf]) -> list[CandidatePdf]:
    """Independent-block candidates P(v1 x1 | s1) P(v2 x2 | s2) written as one joint block."""
    seeds = []
    for cand in inner:
        b1, b2 = cand.blocks
        joint = np.einsum("avx,bwz->abvwxz", b1.table, b2.table)
        seeds.append(
            CandidatePdf.from_blocks(
                shapes,
                [CondPmf(S1S2, ("V1", "V2", "X1", "X2"), joint)],
            )
        )
    return seeds


def outer_seeds(
    ch: MacStateChannel, shapes: list[BlockShape], inner: Optional[RateRegion] = None
) -> list[CandidatePdf]:
    """Inner-bound seeds and the witnesses of an inner region, written as joint blocks.

    On a product law both outer bounds reduce to the inner bound, so every corner of
    `inner` is kept by a sweep that starts from these seeds.
    """
    outputs = dict(shapes[0].outputs)
    user_shapes = _user_shapes(ch, outputs["V1"], outputs["V2"])
    cands = inner_seeds(ch, user_shapes)
    if inner is not None and inner.witnesses:
        cands += [c for c in inner.witnesses if c is not None]
    return joint_blocks(shapes, cands)


def mac_inner_region(
    ch: MacStateChannel, budget: SearchBudget, card_v: Optional[int] = None
) -> RateRegion:
    shapes = inner_shapes(ch, card_v)
    region = region_sweep(
        lambda cand: inner_constraints(ch.joint(cand)),
        shapes,
        budget,
        2,
        seeds=inner_seeds(ch, shapes),
    )
    logger.info("MAC inner region: {} ({})", region, budget.describe())
    return region


def _outer_sweep(ch, builder, budget, card_v, inner, name: str) -> RateRegion:
    if inner is None:
        inner = mac_inner_region(ch, budget, card_v)
    shapes = outer_shapes(ch, card_v)
    region = region_sweep(
        lambda cand: builder(ch.joint(cand)),
        shapes,
        budget,
        2,
        seeds=outer_seeds(ch, shapes, inner),
    )
    logger.info("MAC {} region: {} ({})", name, region, budget.describe())
    return region


def mac_outer_region(
    ch: MacStateChannel,
    budget: SearchBudget,
    card_v: Optional[int] = None,
    inner: Optional[RateRegion] = None,
) -> RateRegion:
    """Outer bound, swept from the witnesses of `inner` (computed with the same budget when not given)."""
    return _outer_sweep(ch, outer_constraints, budget, card_v, inner, "outer")


def mac_outer_weak_region(
    ch: MacStateChannel,
    budget: SearchBudget,
    card_v: Optional[int] = None,
    inner: Optional[RateRegion] = None,
) -> RateRegion:
    return _outer_sweep(ch, outer_weak_constraints, budget, card_v, inner, "weak outer")


def factor_channels(ch: MacStateChannel) -> tuple[StateChannel, StateChannel]:
    """The two single-user links of an orthogonal MAC with their marginal state laws."""
    orth = is_orthogonal(ch)
    if not orth.orthogonal:
        raise ChannelStructureError("The MAC is not orthogonal")
    f1, f2 = orth.factors
    return (
        StateChannel(ch.state_table.sum(axis=1), f1),
        StateChannel(ch.state_table.sum(axis=0), f2),
    )


def _rectangle(r1: float, r2: float) -> RateRegion:
    return polytope_from_constraints(
        [LinearRateConstraint((1, 0), r1, "R1"), LinearRateConstraint((0, 1), r2, "R2")], 2
    )


def orth_mac_capacity(
    ch: MacStateChannel, budget: SearchBudget, card_v: Optional[int] = None
) -> RateRegion:
    """Rectangle of the two links' Gel'fand-Pinsker capacities (independent states)."""
    link1, link2 = factor_channels(ch)
    if not states_independent(ch):
        raise ChannelStructureError("The states S1 and S2 are dependent")
    c1 = gp_capacity(link1, budget, card_v).value
    c2 = gp_capacity(link2, budget, card_v).value
    logger.info("Orthogonal MAC capacity rectangle {:.6f} x {:.6f}", c1, c2)
    return _rectangle(c1, c2)


def det_orth_mac_capacity(ch: MacStateChannel) -> RateRegion:
    """Exact rectangle R_i <= sum_{s_i} P(s_i) log2 |image f_i(., s_i)|; states may be correlated."""
    link1, link2 = factor_channels(ch)
    sides = []
    for link in (link1, link2):
        det = is_deterministic(link)
        if not det.deterministic:
            raise ChannelStructureError("Both links of the MAC must be deterministic")
        sides.append(float(link.state_pmf.probs @ np.log2(image_sizes(det.maps["Y"]))))
    return _rectangle(*sides)
