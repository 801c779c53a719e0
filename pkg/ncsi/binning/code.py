"""Random-binning codes for the channel with non-causal state at the encoder.

A code holds 2^{n(R+R')} i.i.d. U-sequences split into 2^{nR} bins. The encoder looks in
the message's bin for a sequence jointly typical with the state sequence and sends X
drawn symbol-wise from P_{X|U,S}; the decoder looks in the whole codebook for the unique
sequence jointly typical with the output and returns its bin.

A pair of sequences is typical when its empirical joint type Q is within total variation
delta = eps |A| |B| / 4 of the design P. Robust typicality, |Q(a, b) - P(a, b)| <= delta P(a, b)
in every cell with delta = eps |A| |B|, is available as an option.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from math import ceil
from typing import Optional

import numpy as np
from loguru import logger
from scipy.optimize import minimize
from scipy.special import rel_entr

from ncsi.channels.models import StateChannel
from ncsi.misc import ChannelStructureError, DimensionMismatchError
from ncsi.optimizer.candidate import CandidatePdf
from ncsi.prob.measures import mutual_info
from ncsi.prob.pmf import CondPmf, JointPmf

# typicality slack
DEFAULT_EPS = 0.05
# default bin excess rate is I(U;S) + EXCESS_SLACK eps
EXCESS_SLACK = 3
# codebooks up to this many codewords are drawn explicitly
EXPLICIT_CODEBOOK_CAP = 2**16
MAX_ALPHABET = 4
MAX_BLOCK_LENGTH = 10_000


@dataclass
class BinningDesign:
    """The input law P_{U,X|S} of a binning code on a given channel."""

    channel: StateChannel
    # P(u, x | s) indexed [s][u][x]
    table: np.ndarray
    joint: JointPmf = field(init=False, repr=False)

    def __post_init__(self):
        self.table = np.asarray(self.table, dtype=np.float64)
        ch = self.channel
        if max(ch.nx, ch.ns, ch.ny, self.table.shape[1]) > MAX_ALPHABET:
            raise ChannelStructureError(
                f"Binning simulation supports alphabets of at most {MAX_ALPHABET} symbols"
            )
        if self.table.shape != (ch.ns, self.table.shape[1], ch.nx):
            raise DimensionMismatchError(
                f"Design table of shape {self.table.shape} does not match |S|={ch.ns}, |X|={ch.nx}"
            )
        self.joint = ch.joint([CondPmf(("S",), ("U", "X"), self.table)])

    @staticmethod
    def from_candidate(ch: StateChannel, cand: CandidatePdf) -> BinningDesign:
        block = cand.blocks[0]
        order = [block.given.index("S")] + [
            len(block.given) + block.outputs.index(n) for n in ("U", "X")
        ]
        return BinningDesign(ch, np.transpose(block.table, order))

    @property
    def card_u(self) -> int:
        return self.table.shape[1]

    @property
    def p_u(self) -> np.ndarray:
        return self.joint.marginal_table("U")

    @property
    def p_us(self) -> np.ndarray:
        return self.joint.marginal_table(("U", "S"))

    @property
    def p_uy(self) -> np.ndarray:
        return self.joint.marginal_table(("U", "Y"))

    @property
    def u_given_s(self) -> np.ndarray:
        """P(u | s) indexed [s][u]."""
        return self.table.sum(axis=2)

    @property
    def x_given_us(self) -> np.ndarray:
        """P(x | u, s) indexed [s][u][x]; uniform where P(u | s) = 0."""
        pu = self.u_given_s[:, :, None]
        uniform = np.full_like(self.table, 1.0 / self.table.shape[2])
        return np.divide(self.table, pu, out=uniform, where=pu > 0)

    def info_us(self) -> float:
        return mutual_info(self.joint, "U", "S")

    def info_uy(self) -> float:
        return mutual_info(self.joint, "U", "Y")


def sample_rows(rows: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One symbol per row of a stack of pmfs (shape (n, k))."""
    cum = np.cumsum(rows, axis=1)
    draws = rng.random(rows.shape[0])[:, None]
    return np.minimum((draws >= cum).sum(axis=1), rows.shape[1] - 1)


def joint_type(a: np.ndarray, b: np.ndarray, na: int, nb: int) -> np.ndarray:
    counts = np.bincount(a * nb + b, minlength=na * nb).reshape(na, nb)
    return counts / len(a)


class Typicality(str, Enum):
    # half the L1 distance of the joint type to the design is at most delta
    TOTAL_VARIATION = "tv"
    # every cell within delta times its design probability; empty cells stay empty
    ROBUST = "robust"


def typicality_delta(p: np.ndarray, eps: float, mode: Typicality = Typicality.TOTAL_VARIATION) -> float:
    """Slack eps |A| |B| / 4 in total variation, eps |A| |B| robust.

    |A| and |B| count the symbols of positive probability, so unused auxiliary symbols do
    not widen the test.
    """
    cells = np.count_nonzero(p.sum(axis=1) > 0) * np.count_nonzero(p.sum(axis=0) > 0)
    if mode == Typicality.ROBUST:
        return eps * cells
    return eps * cells / 4


def is_typical(
    q: np.ndarray, p: np.ndarray, delta: float, mode: Typicality = Typicality.TOTAL_VARIATION
) -> bool:
    if mode == Typicality.ROBUST:
        return bool(np.all(np.abs(q - p) <= delta * p + 1e-12))
    return bool(0.5 * np.abs(q - p).sum() <= delta + 1e-12)


def _divergence(q: np.ndarray, m: np.ndarray) -> float:
    return float(np.sum(rel_entr(q, m)) / np.log(2))


def _segment_point(p: np.ndarray, m: np.ndarray, delta: float, mode: Typicality) -> np.ndarray:
    """Last point of the segment from P toward M inside the typicality set."""
    d = m - p
    if mode == Typicality.ROBUST:
        moving = np.abs(d) > 1e-15
        t = min(1.0, float(np.min(delta * p[moving] / np.abs(d[moving]))))
    else:
        t = min(1.0, delta / (0.5 * np.abs(d).sum()))
    return p + t * d


def typicality_exponent(
    p: np.ndarray, delta: float, mode: Typicality = Typicality.TOTAL_VARIATION
) -> float:
    """Exponent (bits) of the probability that independent sequences look jointly typical.

    The minimum of D(Q || P_A x P_B) over joint pmfs Q in the typicality set of P, found by
    SLSQP from Q = P. The last typical point on the segment from P toward the product of
    the marginals is an upper bound, returned when the solver does not improve on it.
    """
    p = np.asarray(p, dtype=np.float64)
    m = np.outer(p.sum(axis=1), p.sum(axis=0))
    if is_typical(m, p, delta, mode):
        return 0.0
    bound = _divergence(_segment_point(p, m, delta, mode), m)

    # cells outside the support of the product carry no mass in any Q
    active = m.ravel() > 0
    pa, ma = p.ravel()[active], m.ravel()[active]
    k = len(pa)

    def objective(z: np.ndarray) -> float:
        return _divergence(np.clip(z[:k], 0.0, None), ma)

    def gradient(z: np.ndarray) -> np.ndarray:
        g = np.zeros_like(z)
        g[:k] = (np.log(np.maximum(z[:k], 1e-15) / ma) + 1.0) / np.log(2)
        return g

    constraints = [
        {
            "type": "eq",
            "fun": lambda z: z[:k].sum() - 1.0,
            "jac": lambda z: np.r_[np.ones(k), np.zeros(len(z) - k)],
        }
    ]
    if mode == Typicality.ROBUST:
        bounds = [(max(0.0, (1 - delta) * c), (1 + delta) * c) for c in pa]
        x0 = pa.copy()
    else:
        # auxiliary t >= |q - p| carries the L1 distance
        eye = np.eye(k)
        constraints += [
            {"type": "ineq", "fun": lambda z: z[k:] - (z[:k] - pa), "jac": lambda z: np.hstack([-eye, eye])},
            {"type": "ineq", "fun": lambda z: z[k:] + (z[:k] - pa), "jac": lambda z: np.hstack([eye, eye])},
            {
                "type": "ineq",
                "fun": lambda z: delta - 0.5 * z[k:].sum(),
                "jac": lambda z: np.r_[np.zeros(k), -0.5 * np.ones(k)],
            },
        ]
        bounds = [(0.0, 1.0)] * (2 * k)
        x0 = np.r_[pa, np.zeros(k)]

    res = minimize(
        objective,
        x0,
        jac=gradient,
        bounds=bounds,
        constraints=constraints,
        method="SLSQP",
        options={"ftol": 1e-12, "maxiter": 500},
    )
    q = np.zeros(m.size)
    q[active] = np.clip(res.x[:k], 0.0, None)
    q = q.reshape(m.shape)
    if abs(q.sum() - 1.0) <= 1e-9 and is_typical(q / q.sum(), p, delta + 1e-9, mode):
        value = _divergence(q / q.sum(), m)
        if value < bound:
            return max(0.0, value)
    else:
        logger.debug("SLSQP left the typicality set ({}), using the segment bound", res.message)
    return bound




def default_excess(design: BinningDesign, eps: float = DEFAULT_EPS) -> float:
    return design.info_us() + EXCESS_SLACK * eps


@dataclass
class BinningCode:
    design: BinningDesign
    n: int
    rate: float
    excess: float
    eps: float = DEFAULT_EPS
    seed: int = 0
    typicality: Typicality = Typicality.TOTAL_VARIATION
    # U-sequences row by row, bin m at rows [m * bin_size, (m + 1) * bin_size); None when
    # the code is too large to draw
    codebook: Optional[np.ndarray] = None

    def __post_init__(self):
        if not 1 <= self.n <= MAX_BLOCK_LENGTH:
            raise ValueError(f"Block length must be in [1, {MAX_BLOCK_LENGTH}], got {self.n}")
        if self.rate < 0 or self.excess < 0:
            raise ValueError(f"Rates must be nonnegative, got R={self.rate}, R'={self.excess}")

    @property
    def n_bins(self) -> int:
        return max(1, ceil(2 ** (self.n * self.rate) - 1e-9))

    @property
    def bin_size(self) -> int:
        return max(1, ceil(2 ** (self.n * self.excess) - 1e-9))

    @property
    def log2_codewords(self) -> float:
        return self.n * (self.rate + self.excess)

    @property
    def explicit(self) -> bool:
        if self.log2_codewords > 20:
            return False
        return self.n_bins * self.bin_size <= EXPLICIT_CODEBOOK_CAP

    @staticmethod
    def generate(
        design: BinningDesign,
        rate: float,
        n: int,
        excess: Optional[float] = None,
        eps: float = DEFAULT_EPS,
        seed: int = 0,
        batch: int = 0,
        typicality: Typicality = Typicality.TOTAL_VARIATION,
    ) -> BinningCode:
        """Draw a code from the stream (seed, n, batch); the bin excess rate defaults to I(U;S) + 3 eps."""
        if excess is None:
            excess = default_excess(design, eps)
        code = BinningCode(design, n, rate, excess, eps, seed, Typicality(typicality))
        if code.explicit:
            rng = np.random.default_rng([seed, n, batch])
            total = code.n_bins * code.bin_size
            code.codebook = rng.choice(design.card_u, size=(total, n), p=design.p_u)
        return code

    def bin_of(self, index: int) -> int:
        return index // self.bin_size

    def typical(self, q: np.ndarray, p: np.ndarray) -> bool:
        return is_typical(q, p, typicality_delta(p, self.eps, self.typicality), self.typicality)

    def exponent(self, p: np.ndarray) -> float:
        return typicality_exponent(p, typicality_delta(p, self.eps, self.typicality), self.typicality)


def encode(
    code: BinningCode,
    s_seq: np.ndarray,
    message: int,
    rng: Optional[np.random.Generator] = None,
) -> Optional[np.ndarray]:
    """Channel input for `message` under state sequence `s_seq`, or None on encoding failure."""
    if code.codebook is None:
        raise DimensionMismatchError("The code is too large to be drawn explicitly")
    if len(s_seq) != code.n:
        raise DimensionMismatchError(f"State sequence of length {len(s_seq)} for block length {code.n}")
    if not 0 <= message < code.n_bins:
        raise DimensionMismatchError(f"Message {message} out of range [0, {code.n_bins})")
    rng = rng if rng is not None else np.random.default_rng(code.seed)
    design = code.design
    p_us = design.p_us
    start = message * code.bin_size
    for u_seq in code.codebook[start : start + code.bin_size]:
        if code.typical(joint_type(u_seq, s_seq, design.card_u, design.channel.ns), p_us):
            return sample_rows(design.x_given_us[s_seq, u_seq], rng)
    return None


def decode(code: BinningCode, y_seq: np.ndarray) -> Optional[int]:
    """Bin of the unique codeword jointly typical with `y_seq`, or None."""
    if code.codebook is None:
        raise DimensionMismatchError("The code is too large to be drawn explicitly")
    if len(y_seq) != code.n:
        raise DimensionMismatchError(f"Output sequence of length {len(y_seq)} for block length {code.n}")
    design = code.design
    p_uy = design.p_uy
    found = None
    for i, u_seq in enumerate(code.codebook):
        if code.typical(joint_type(u_seq, y_seq, design.card_u, design.channel.ny), p_uy):
            if found is not None:
                return None
            found = i
    return None if found is None else code.bin_of(found)
