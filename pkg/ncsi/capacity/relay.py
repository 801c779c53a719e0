"""Achievable rates of the discrete relay channel with non-causal state.

Partial decode-and-forward: the source splits its message into a part U decoded by the
relay and a part V decoded by the destination only; the relay forwards with the
cooperative codeword Ur. Both the source and the relay know the state S. The
decode-and-forward specialisation is V = U. `df_relay_rate` covers the case where the
state is a pair (S1, S2) and the relay only knows S1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from loguru import logger

from ncsi.channels.models import RelayStateChannel
from ncsi.optimizer.candidate import BlockShape, CandidatePdf, SearchBudget
from ncsi.optimizer.search import maximize, simplex_grid_array
from ncsi.prob.measures import conditional_entropy, mutual_info
from ncsi.prob.pmf import JointPmf

# the strict inequalities on the source layers hold with this margin
FEASIBILITY_MARGIN = 1e-9
# a layer whose conditional entropy is below this carries no information
LAYER_TOL = 1e-9
# laws of X and Xr used to build the decode-and-forward seeds
SEED_GRID_K = 4


class SecondTerm(str, Enum):
    # H(Y|Ur,S) as the first summand of the second term
    VERBATIM = "verbatim"
    # I(V;Y|U,Ur,S), the summand that makes the term a layered decoding bound
    PLAUSIBLE = "plausible"


@dataclass
class RelayResult:
    value: float
    argmax: Optional[CandidatePdf] = None
    # False when no candidate met the strict layer conditions; value is then 0
    feasible: bool = True
    # True when the binding term of the maximizer is the second one, whose reading is uncertain
    provisional: bool = False
    terms: tuple[float, ...] = field(default_factory=tuple)


def pdf_terms(j: JointPmf, second: SecondTerm = SecondTerm.VERBATIM) -> tuple[float, float, float]:
    """The three terms of the partial decode-and-forward rate for one joint law."""
    vuur = ("V", "U", "Ur")
    relay_part = mutual_info(j, "U", "Yr", ("Ur", "S"))
    term1 = mutual_info(j, vuur, "Y") - mutual_info(j, vuur, "S")
    if second == SecondTerm.VERBATIM:
        first = conditional_entropy(j, "Y", ("Ur", "S"))
    else:
        first = mutual_info(j, "V", "Y", ("U", "Ur", "S"))
    term2 = first + relay_part - mutual_info(j, ("V", "U"), "S", "Ur")
    term3 = (
        mutual_info(j, "V", "Y", ("U", "Ur"))
        + relay_part
        - mutual_info(j, "V", "S", ("U", "Ur"))
    )
    return term1, term2, term3


def pdf_feasible(j: JointPmf) -> bool:
    """I(V,U;Y|Ur) > I(V,U;S|Ur) and I(V;Y|U,Ur) > I(V;S|U,Ur), each for layers that carry information."""
    if conditional_entropy(j, ("V", "U"), "Ur") > LAYER_TOL:
        gap = mutual_info(j, ("V", "U"), "Y", "Ur") - mutual_info(j, ("V", "U"), "S", "Ur")
        if gap <= FEASIBILITY_MARGIN:
            return False
    if conditional_entropy(j, "V", ("U", "Ur")) > LAYER_TOL:
        gap = mutual_info(j, "V", "Y", ("U", "Ur")) - mutual_info(j, "V", "S", ("U", "Ur"))
        if gap <= FEASIBILITY_MARGIN:
            return False
    return True


def _single_state(ch: RelayStateChannel) -> RelayStateChannel:
    if ch.has_state_pair:
        logger.debug("Merging the state pair into one state known at source and relay")
        return ch.merged_state()
    return ch


def pdf_shapes(
    ch: RelayStateChannel,
    card_ur: Optional[int] = None,
    card_u: Optional[int] = None,
    card_v: Optional[int] = None,
) -> list[BlockShape]:
    sizes = ch.sizes
    ns, nx, nxr = sizes["S"], sizes["X"], sizes["Xr"]
    card_ur = card_ur or nxr * ns + 1
    card_u = card_u or nx * ns + 1
    card_v = card_v or nx * ns + 1
    return [
        BlockShape.of("P_UrXr|S", {"S": ns}, {"Ur": card_ur, "Xr": nxr}),
        BlockShape.of("P_VUX|UrS", {"Ur": card_ur, "S": ns}, {"V": card_v, "U": card_u, "X": nx}),
    ]


def df_shapes(shapes: list[BlockShape]) -> list[BlockShape]:
    """The decode-and-forward family: the second block without V."""
    relay, source = shapes
    outputs = dict(source.outputs)
    return [
        relay,
        BlockShape.of(
            "P_UX|UrS", dict(source.given), {"U": outputs["U"], "X": outputs["X"]}
        ),
    ]


def _copy_tables(shapes: list[BlockShape]) -> list[list[np.ndarray]]:
    """Classical decode-and-forward starts: Ur = Xr and U = X, laws independent of the state."""
    relay, source = shapes
    r_out, s_out = dict(relay.outputs), dict(source.outputs)
    if r_out["Ur"] < r_out["Xr"] or s_out["U"] < s_out["X"]:
        return []
    starts = []
    for pr in simplex_grid_array(r_out["Xr"], SEED_GRID_K):
        t1 = np.zeros((relay.n_rows, r_out["Ur"], r_out["Xr"]))
        for xr in range(r_out["Xr"]):
            t1[:, xr, xr] = pr[xr]
        for px in simplex_grid_array(s_out["X"], SEED_GRID_K):
            t2 = np.zeros((source.n_rows, s_out["U"], s_out["X"]))
            for x in range(s_out["X"]):
                t2[:, x, x] = px[x]
            starts.append([t1.reshape(relay.n_rows, -1), t2.reshape(source.n_rows, -1)])
    return starts


def embed_df_candidate(cand: CandidatePdf, shapes: list[BlockShape]) -> Optional[CandidatePdf]:
    """A decode-and-forward candidate with V set equal to U, in the partial family."""
    relay_block, source_block = cand.blocks
    card_v = dict(shapes[1].outputs)["V"]
    table = source_block.table
    n_ur, ns, card_u, nx = table.shape
    if card_v < card_u:
        return None
    full = np.zeros((n_ur, ns, card_v, card_u, nx))
    for u in range(card_u):
        full[:, :, u, u, :] = table[:, :, u, :]
    return CandidatePdf(shapes, [relay_block.rows, full.reshape(shapes[1].n_rows, -1)])


def _with_copy(j: JointPmf) -> JointPmf:
    card_u = j.sizes["U"]
    return j.extend("U", "V", np.arange(card_u), card_u)


class _Objective:
    """min of the rate terms over candidates meeting the layer conditions.

    `informative` records whether any such candidate has a source layer that carries
    information; layers without information pass the conditions vacuously.
    """

    def __init__(self, ch: RelayStateChannel, second: SecondTerm, df: bool):
        self.ch = ch
        self.second = second
        self.df = df
        self.informative = False

    def __call__(self, cand: CandidatePdf) -> Optional[float]:
        j = self.ch.joint(cand)
        if self.df:
            j = _with_copy(j)
        if not pdf_feasible(j):
            return None
        if not self.informative and conditional_entropy(j, ("V", "U"), "Ur") > LAYER_TOL:
            self.informative = True
        return min(pdf_terms(j, self.second))


def _relay_result(ch, cand, value, objective: _Objective, name: str) -> RelayResult:
    if cand is None or not np.isfinite(value) or not objective.informative:
        logger.warning("{}: no informative candidate satisfies the layer conditions, reporting 0", name)
        return RelayResult(0.0, None, feasible=False)
    j = ch.joint(cand)
    if objective.df:
        j = _with_copy(j)
    terms = pdf_terms(j, objective.second)
    provisional = bool(np.argmin(terms) == 1)
    if provisional:
        logger.warning(
            "{}: the second term ({} reading) binds at the maximizer, the rate is provisional",
            name,
            objective.second.value,
        )
    return RelayResult(max(0.0, value), cand, True, provisional, terms)



def pdf_relay_df_rate(
    ch: RelayStateChannel,
    budget: SearchBudget,
    card_ur: Optional[int] = None,
    card_u: Optional[int] = None,
    second: SecondTerm = SecondTerm.VERBATIM,
) -> RelayResult:
    """Partial decode-and-forward rate restricted to V = U."""
    ch = _single_state(ch)
    shapes = df_shapes(pdf_shapes(ch, card_ur, card_u, card_u))
    seeds = [CandidatePdf(shapes, rows) for rows in _copy_tables(shapes)]
    objective = _Objective(ch, second, True)
    result = maximize(objective, shapes, budget, seeds)
    logger.info("relay DF rate {:.6f} ({})", result.value, budget.describe())
    return _relay_result(ch, result.argmax, result.value, objective, "relay DF rate")


def pdf_relay_rate(
    ch: RelayStateChannel,
    budget: SearchBudget,
    card_ur: Optional[int] = None,
    card_u: Optional[int] = None,
    card_v: Optional[int] = None,
    second: SecondTerm = SecondTerm.VERBATIM,
    df: Optional[RelayResult] = None,
) -> RelayResult:
    """Partial decode-and-forward rate, seeded with the decode-and-forward maximizer."""
    ch = _single_state(ch)
    shapes = pdf_shapes(ch, card_ur, card_u, card_v)
    if df is None:
        df = pdf_relay_df_rate(ch, budget, card_ur, dict(shapes[1].outputs)["U"], second)
    seeds = []
    if df.argmax is not None:
        lifted = embed_df_candidate(df.argmax, shapes)
        if lifted is not None:
            seeds.append(lifted)
    objective = _Objective(ch, second, False)
    result = maximize(objective, shapes, budget, seeds)
    logger.info("relay partial DF rate {:.6f} ({})", result.value, budget.describe())
    return _relay_result(ch, result.argmax, result.value, objective, "relay partial DF rate")


# -- state pair, relay knows S1 only ---------------------------------------------------


def _state_pair(ch: RelayStateChannel) -> RelayStateChannel:
    if ch.has_state_pair:
        return ch
    # a single state is the pair (S, trivial S2)
    return RelayStateChannel(ch.state_table[:, None], ch.transition[:, :, :, None, :, :])


def df_shapes_pair(
    ch: RelayStateChannel, card_ur: Optional[int] = None, card_u: Optional[int] = None
) -> list[BlockShape]:
    sizes = ch.sizes
    n1, n2, nx, nxr = sizes["S1"], sizes["S2"], sizes["X"], sizes["Xr"]
    card_ur = card_ur or nxr * n1 + 1
    card_u = card_u or nx * n1 * n2 + 1
    return [
        BlockShape.of("P_UrXr|S1", {"S1": n1}, {"Ur": card_ur, "Xr": nxr}),
        BlockShape.of("P_UX|UrS1S2", {"Ur": card_ur, "S1": n1, "S2": n2}, {"U": card_u, "X": nx}),
    ]


def df_pair_terms(j: JointPmf) -> tuple[float, float]:
    s12 = ("S1", "S2")
    return (
        mutual_info(j, ("U", "Ur"), "Y") - mutual_info(j, ("U", "Ur"), s12),
        mutual_info(j, "U", "Yr", ("Ur", "S1")) - mutual_info(j, "U", "S2", ("Ur", "S1")),
    )


def df_relay_rate(
    ch: RelayStateChannel,
    budget: SearchBudget,
    card_ur: Optional[int] = None,
    card_u: Optional[int] = None,
) -> RelayResult:
    """Decode-and-forward rate when the source knows (S1, S2) and the relay only S1."""
    ch = _state_pair(ch)
    shapes = df_shapes_pair(ch, card_ur, card_u)
    seeds = [CandidatePdf(shapes, rows) for rows in _copy_tables(shapes)]
    result = maximize(lambda cand: min(df_pair_terms(ch.joint(cand))), shapes, budget, seeds)
    logger.info("relay DF rate with partial relay state {:.6f} ({})", result.value, budget.describe())
    if result.argmax is None:
        return RelayResult(0.0, None, feasible=False)
    return RelayResult(
        max(0.0, result.value), result.argmax, True, False, df_pair_terms(ch.joint(result.argmax))
    )
