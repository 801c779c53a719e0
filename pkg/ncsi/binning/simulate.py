"""Monte Carlo estimate of the block error rate of random-binning codes.

Codes small enough to be drawn are simulated with `encode`/`decode`. Larger codes use
the typicality counts instead of the codebook: the number of codewords of the message's
bin that are typical with the state sequence, and the number of wrong codewords typical
with the output, are Poisson with means given by the method of types. The transmitted
codeword itself is drawn from P_{U|S} and its typicality with the output is checked on the
actual sequences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
from loguru import logger
from tqdm.auto import tqdm

from ncsi.binning.code import (
    DEFAULT_EPS,
    BinningCode,
    BinningDesign,
    Typicality,
    decode,
    default_excess,
    encode,
    joint_type,
    sample_rows,
)
from ncsi.misc import write_csv

# trials sharing one drawn code
BATCH_SIZE = 50
# Poisson means are clipped to 2^-LOG2_CLIP .. 2^LOG2_CLIP
LOG2_CLIP = 40.0

BATCH_HEADER = ("batch", "trials", "encode_failures", "block_errors", "block_error_rate")


@dataclass
class SimulationResult:
    block_error_rate: float
    encode_failure_rate: float
    trials: int
    # one row per batch: (batch, trials, encode failures, block errors, block error rate)
    batches: list[tuple] = field(default_factory=list)
    explicit: bool = True


def _poisson_mean(log2_mean: float) -> float:
    return float(2.0 ** np.clip(log2_mean, -LOG2_CLIP, LOG2_CLIP))


def _transmit(design: BinningDesign, s_seq: np.ndarray, x_seq: np.ndarray, rng) -> np.ndarray:
    transition = design.channel.transition
    return sample_rows(transition[x_seq, s_seq], rng)


def _explicit_trial(code: BinningCode, rng: np.random.Generator) -> tuple[bool, bool]:
    """(encoding failed, block error) of one transmission with a drawn codebook."""
    design = code.design
    s_seq = rng.choice(design.channel.ns, size=code.n, p=design.channel.state_pmf.probs)
    message = int(rng.integers(code.n_bins))
    x_seq = encode(code, s_seq, message, rng)
    if x_seq is None:
        return True, True
    y_seq = _transmit(design, s_seq, x_seq, rng)
    return False, decode(code, y_seq) != message


@dataclass
class _CountModel:
    """Poisson means of the typicality counts of a code too large to draw."""

    log2_encoder: float
    log2_decoder: float

    @staticmethod
    def of(code: BinningCode) -> _CountModel:
        design = code.design
        e_enc = code.exponent(design.p_us)
        e_dec = code.exponent(design.p_uy)
        logger.debug(
            "Typicality exponents ({}): encoder {:.4f}, decoder {:.4f} bits",
            code.typicality.value,
            e_enc,
            e_dec,
        )
        return _CountModel(code.n * (code.excess - e_enc), code.n * (code.rate + code.excess - e_dec))


def _count_trial(code: BinningCode, model: _CountModel, rng: np.random.Generator) -> tuple[bool, bool]:
    design = code.design
    ch = design.channel
    if rng.poisson(_poisson_mean(model.log2_encoder)) == 0:
        return True, True
    s_seq = rng.choice(ch.ns, size=code.n, p=ch.state_pmf.probs)
    u_seq = sample_rows(design.u_given_s[s_seq], rng)
    x_seq = sample_rows(design.x_given_us[s_seq, u_seq], rng)
    y_seq = _transmit(design, s_seq, x_seq, rng)
    if not code.typical(joint_type(u_seq, y_seq, design.card_u, ch.ny), design.p_uy):
        return False, True
    return False, rng.poisson(_poisson_mean(model.log2_decoder)) > 0


def simulate(
    design: BinningDesign,
    rate: float,
    n: int,
    trials: int,
    excess: Optional[float] = None,
    eps: float = DEFAULT_EPS,
    seed: int = 0,
    outfile: Optional[Union[str, Path]] = None,
    progress: bool = False,
    typicality: Typicality = Typicality.TOTAL_VARIATION,
) -> SimulationResult:
    """Block error and encoding failure rates over `trials` transmissions.

    A fresh code is drawn for every batch of BATCH_SIZE trials. Batch b uses the random
    streams seeded by (seed, b), so results are reproducible.
    """
    if trials < 1:
        raise ValueError(f"At least one trial is needed, got {trials}")
    if excess is None:
        excess = default_excess(design, eps)
    n_batches = (trials + BATCH_SIZE - 1) // BATCH_SIZE
    rows = []
    failures = errors = 0
    explicit = True
    for b in tqdm(range(n_batches), disable=not progress, desc="batches"):
        size = min(BATCH_SIZE, trials - b * BATCH_SIZE)
        code = BinningCode.generate(design, rate, n, excess, eps, seed, b, typicality)
        rng = np.random.default_rng([seed, b])
        explicit = code.explicit
        model = None if explicit else _CountModel.of(code)
        batch_failures = batch_errors = 0
        for _ in range(size):
            if explicit:
                failed, error = _explicit_trial(code, rng)
            else:
                failed, error = _count_trial(code, model, rng)
            batch_failures += failed
            batch_errors += error
        failures += batch_failures
        errors += batch_errors
        rows.append((b, size, batch_failures, batch_errors, batch_errors / size))

    result = SimulationResult(errors / trials, failures / trials, trials, rows, explicit)
    logger.info(
        "Binning R={:.4f} R'={:.4f} n={} ({} typicality): block error {:.4f}, encoding failures {:.4f} over {} trials ({} codebook, seed={})",
        rate,
        excess,
        n,
        Typicality(typicality).value,
        result.block_error_rate,
        result.encode_failure_rate,
        trials,
        "explicit" if explicit else "typicality-count",
        seed,
    )
    if outfile is not None:
        write_csv(outfile, BATCH_HEADER, rows)
    return result
