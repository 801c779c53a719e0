"""Largest common-message rate of the BC under four schemes.

`common_rate_ss` is superposition with binning of the common layer only, `common_rate_ours`
the inner bound with R1 = R2 = 0, `common_rate_negc` the known achievable rate with
binning at every layer and `common_rate_det` the deterministic-BC lower bound. At matched
budgets the searches are chained so that ss <= ours <= negc holds: each one is seeded with
the maximizer of the previous.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from loguru import logger

from ncsi.capacity.bc import (
    WU,
    WV,
    aux_shape,
    inner_constraints,
    inner_seeds,
    input_shape,
)
from ncsi.capacity.singleuser import CapacityResult
from ncsi.channels.models import BcStateChannel
from ncsi.misc import positive_part
from ncsi.optimizer.candidate import BlockShape, CandidatePdf, SearchBudget
from ncsi.optimizer.search import maximize
from ncsi.prob.measures import conditional_entropy, mutual_info
from ncsi.prob.pmf import JointPmf


def ss_common_objective(j: JointPmf) -> float:
    return positive_part(
        min(mutual_info(j, "W", "Y1"), mutual_info(j, "W", "Y2")) - mutual_info(j, "W", "S")
    )


def ours_common_objective(j: JointPmf) -> float:
    rhs = [c.rhs for c in inner_constraints(j)]
    return min(rhs[0], rhs[1], rhs[2], rhs[3], rhs[4] / 2)


def negc_common_objective(j: JointPmf) -> float:
    first = mutual_info(j, WV, "Y1") - mutual_info(j, WV, "S")
    second = mutual_info(j, WU, "Y2") - mutual_info(j, WU, "S")
    return min(
        first, second, (first + second - mutual_info(j, "U", "V", ("W", "S"))) / 2
    )


def det_common_objective(j: JointPmf) -> float:
    return min(
        conditional_entropy(j, "Y1", "S"),
        conditional_entropy(j, "Y2", "S"),
        conditional_entropy(j, ("Y1", "Y2"), "S") / 2,
    )


def _result(name: str, result, budget: SearchBudget) -> CapacityResult:
    logger.info("{} common rate {:.6f} ({})", name, result.value, budget.describe())
    return CapacityResult(max(0.0, result.value), result.argmax, result)


def embed_common_layer(cand: CandidatePdf, shape: BlockShape) -> CandidatePdf:
    """A candidate P_{W,X|S} as P_{W,V,U,X|S} with V and U constant."""
    table = cand.blocks[0].table
    outputs = dict(shape.outputs)
    full = np.zeros((table.shape[0], outputs["W"], outputs["V"], outputs["U"], table.shape[2]))
    full[:, : table.shape[1], 0, 0, :] = table
    return CandidatePdf([shape], [full.reshape(shape.n_rows, shape.n_cols)])


def common_rate_ss(
    ch: BcStateChannel, budget: SearchBudget, card_w: Optional[int] = None
) -> CapacityResult:
    shape = aux_shape(ch, "P_WX|S", {"W": card_w})
    result = maximize(lambda cand: ss_common_objective(ch.joint(cand)), [shape], budget)
    return _result("superposition", result, budget)


def common_rate_ours(
    ch: BcStateChannel,
    budget: SearchBudget,
    card_w: Optional[int] = None,
    card_v: Optional[int] = None,
    card_u: Optional[int] = None,
    ss: Optional[CapacityResult] = None,
) -> CapacityResult:
    shape = aux_shape(ch, "P_WVUX|S", {"W": card_w, "V": card_v, "U": card_u})
    ss = ss if ss is not None else common_rate_ss(ch, budget, card_w)
    seeds = inner_seeds(ch, shape, budget.grid_k)
    if ss.argmax is not None and dict(ss.argmax.shapes[0].outputs)["W"] <= dict(shape.outputs)["W"]:
        seeds.append(embed_common_layer(ss.argmax, shape))
    result = maximize(lambda cand: ours_common_objective(ch.joint(cand)), [shape], budget, seeds)
    return _result("inner bound", result, budget)


def common_rate_negc(
    ch: BcStateChannel,
    budget: SearchBudget,
    card_w: Optional[int] = None,
    card_v: Optional[int] = None,
    card_u: Optional[int] = None,
    ours: Optional[CapacityResult] = None,
) -> CapacityResult:
    shape = aux_shape(ch, "P_WVUX|S", {"W": card_w, "V": card_v, "U": card_u})
    ours = ours if ours is not None else common_rate_ours(ch, budget, card_w, card_v, card_u)
    seeds = inner_seeds(ch, shape, budget.grid_k)
    if ours.argmax is not None and ours.argmax.shapes[0] == shape:
        seeds.append(ours.argmax)
    result = maximize(lambda cand: negc_common_objective(ch.joint(cand)), [shape], budget, seeds)
    return _result("full binning", result, budget)


def common_rate_det(ch: BcStateChannel, budget: SearchBudget) -> CapacityResult:
    """max over P_{X|S} of min{H(Y1|S), H(Y2|S), H(Y1,Y2|S) / 2}."""
    result = maximize(lambda cand: det_common_objective(ch.joint(cand)), [input_shape(ch)], budget)
    return _result("deterministic", result, budget)
