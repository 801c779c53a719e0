"""Degraded Gaussian relay channel with additive interferences.

    Yr = X + Sr + Zr
    Y  = X + Xr + Sd + Zr + Zd

The source knows (Sr, Sd), the relay knows Sd and the destination knows Sr. The
achievable rate is evaluated exactly from covariance matrices for the dirty-paper
construction below, and compared with the interference-free capacity

    max over a in [0, 1] of min{ C((P + Pr + 2 sqrt((1 - a) P Pr)) / (Nr + Nd)), C(a P / Nr) }

where a is the fraction of the source power spent on the fresh (non-coherent) part.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np
from loguru import logger

from ncsi.prob.gaussian import GaussianVector, gaussian_mutual_info

# alpha grid step and width of the final ternary refinement
ALPHA_STEP = 1e-4
ALPHA_TOL = 1e-8

# base variables: fresh source part, unit coherent part, interferences, noises
X0, XI, SR, SD, ZR, ZD = range(6)


def capacity_awgn(snr):
    """C(x) = 1/2 log2(1 + x)."""
    return 0.5 * np.log2(1.0 + snr)


@dataclass(frozen=True)
class GaussianRelayParams:
    P: float
    Pr: float
    Nr: float
    Nd: float
    Psr: float = 0.0
    Psd: float = 0.0
    rho: float = 0.0

    def __post_init__(self):
        if self.P < 0 or self.Pr < 0:
            raise ValueError(f"Powers must be nonnegative, got P={self.P}, Pr={self.Pr}")
        if self.Nr <= 0 or self.Nd <= 0:
            raise ValueError(f"Noise variances must be positive, got Nr={self.Nr}, Nd={self.Nd}")
        if self.Psr < 0 or self.Psd < 0:
            raise ValueError(f"Interference variances must be nonnegative, got {self.Psr}, {self.Psd}")
        if abs(self.rho) > 1:
            raise ValueError(f"Correlation must lie in [-1, 1], got {self.rho}")


@dataclass(frozen=True)
class DpcCoefficients:
    alpha: float
    # Sd coefficient of the relay codeword normalized to a unit coherent part
    beta_r: float
    beta_1: float
    beta_2: float
    # coefficient of the coherent part in U = beta_1 Sr + beta_2 Sd + beta_c Xi + X0
    beta_c: float

    @staticmethod
    def derive(params: GaussianRelayParams, alpha: float) -> DpcCoefficients:
        p = params.P
        a = coherent_amplitude(params, alpha)
        total = a * a + alpha * p + params.Nr + params.Nd
        beta_1 = alpha * p / (alpha * p + params.Nr)
        beta_2 = alpha * p / (alpha * p + params.Nr + params.Nd)
        return DpcCoefficients(alpha, a / total, beta_1, beta_2, beta_2 * a)


def coherent_amplitude(params: GaussianRelayParams, alpha: float) -> float:
    """Amplitude of the common part at the destination: sqrt(Pr) + sqrt((1 - alpha) P)."""
    return sqrt(params.Pr) + sqrt((1 - alpha) * params.P)


def interference_free_rate(params: GaussianRelayParams, alpha):
    """The interference-free rate min{C(coherent SNR), C(relay SNR)}; alpha may be an array."""
    alpha = np.asarray(alpha, dtype=np.float64)
    p, pr = params.P, params.Pr
    first = capacity_awgn((p + pr + 2 * np.sqrt((1 - alpha) * p * pr)) / (params.Nr + params.Nd))
    second = capacity_awgn(alpha * p / params.Nr)
    return np.minimum(first, second)


def dpc_vector(params: GaussianRelayParams, alpha: float) -> GaussianVector:
    """Joint law of the coding variables, channel inputs and outputs for one alpha."""
    if not 0 <= alpha <= 1:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    cov = np.zeros((6, 6))
    cov[X0, X0] = alpha * params.P
    cov[XI, XI] = 1.0
    cov[SR, SR] = params.Psr
    cov[SD, SD] = params.Psd
    cov[SR, SD] = cov[SD, SR] = params.rho * sqrt(params.Psr * params.Psd)
    cov[ZR, ZR] = params.Nr
    cov[ZD, ZD] = params.Nd

    coefs = DpcCoefficients.derive(params, alpha)
    a = coherent_amplitude(params, alpha)
    fresh = sqrt((1 - alpha) * params.P)

    vec = GaussianVector(cov)
    vec.define("Sr", {SR: 1.0})
    vec.define("Sd", {SD: 1.0})
    vec.define("Xr", {XI: sqrt(params.Pr)})
    vec.define("X", {XI: fresh, X0: 1.0})
    # the relay codeword normalized to a unit coherent part, so that Pr = 0 keeps it informative
    vec.define("Ur", {XI: 1.0, SD: coefs.beta_r})
    vec.define("U", {SR: coefs.beta_1, SD: coefs.beta_2, XI: coefs.beta_c, X0: 1.0})
    vec.define("Yr", {XI: fresh, X0: 1.0, SR: 1.0, ZR: 1.0})
    vec.define("Y", {XI: a, X0: 1.0, SD: 1.0, ZR: 1.0, ZD: 1.0})
    return vec


def dirty_paper_rate(params: GaussianRelayParams, alpha: float) -> tuple[float, float, float]:
    """(min, term1, term2) of the decode-and-forward rate with the dirty-paper construction.

    term1 = I(U,Ur; Y,Sr) - I(U,Ur; Sr,Sd) and term2 = I(U; Yr | Ur,Sd) - I(U; Sr | Ur,Sd).
    """
    vec = dpc_vector(params, alpha)
    parts = [
        gaussian_mutual_info(vec, ("U", "Ur"), ("Y", "Sr")),
        gaussian_mutual_info(vec, ("U", "Ur"), ("Sr", "Sd")),
        gaussian_mutual_info(vec, "U", "Yr", ("Ur", "Sd")),
        gaussian_mutual_info(vec, "U", "Sr", ("Ur", "Sd")),
    ]
    if not all(regular for _, regular in parts):
        logger.warning(
            "Degenerate covariance at alpha={}, rate evaluated with pseudo-determinants", alpha
        )
    values = [v for v, _ in parts]
    term1 = values[0] - values[1]
    term2 = values[2] - values[3]
    return min(term1, term2), term1, term2


def gaussian_rc_capacity(params: GaussianRelayParams) -> tuple[float, float]:
    """(capacity, maximizing alpha): a dense alpha grid, then ternary refinement.

    The integrand is the minimum of a nonincreasing and a nondecreasing function of alpha,
    hence unimodal.
    """
    grid = np.linspace(0.0, 1.0, int(round(1 / ALPHA_STEP)) + 1)
    values = interference_free_rate(params, grid)
    best = int(np.argmax(values))
    lo, hi = grid[max(best - 1, 0)], grid[min(best + 1, len(grid) - 1)]
    while hi - lo > ALPHA_TOL:
        m1 = lo + (hi - lo) / 3
        m2 = hi - (hi - lo) / 3
        if interference_free_rate(params, m1) < interference_free_rate(params, m2):
            lo = m1
        else:
            hi = m2
    alpha = (lo + hi) / 2
    value = float(interference_free_rate(params, alpha))
    if value < values[best]:
        alpha, value = float(grid[best]), float(values[best])
    logger.info("Gaussian relay capacity {:.9f} at alpha={:.8f}", value, alpha)
    return value, alpha


def relay_full_state_capacity(params: GaussianRelayParams) -> float:
    """Capacity when the relay knows (Sr, Sd) and the source only Sd.

    Subtracting Sr at the relay turns the model into one where the interference Sd is known
    at both the source and the relay, whose capacity is the interference-free one.
    """
    return gaussian_rc_capacity(params)[0]


def alpha_sweep(params: GaussianRelayParams, step: float = 0.05) -> list[tuple[float, ...]]:
    """Rows (alpha, term1, term2, min, interference-free integrand)."""
    rows = []
    for alpha in np.linspace(0.0, 1.0, int(round(1 / step)) + 1):
        alpha = float(alpha)
        rate, term1, term2 = dirty_paper_rate(params, alpha)
        rows.append((alpha, term1, term2, rate, float(interference_free_rate(params, alpha))))
    return rows
