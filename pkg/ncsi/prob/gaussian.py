from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
from loguru import logger

from ncsi.misc import SingularCovarianceError, UnknownCoordinateError, clamp_info
from ncsi.prob.pmf import Coords, as_coords

# relative eigenvalue threshold for the rank of a covariance matrix
RANK_TOL = 1e-12


@dataclass
class GaussianVector:
    """Jointly Gaussian variables defined as named linear combinations of base variables.

    `base_cov` is the covariance of the zero-mean base vector and `combos[name]` is the
    coefficient row producing variable `name` from it.
    """

    base_cov: np.ndarray
    combos: dict[str, np.ndarray] = field(default_factory=dict)

    def define(self, name: str, coefs: Mapping[int, float] | Sequence[float]) -> None:
        row = np.zeros(self.base_cov.shape[0])
        if isinstance(coefs, Mapping):
            for i, c in coefs.items():
                row[i] = c
        else:
            row[:] = coefs
        self.combos[name] = row

    def combination(self, name: str) -> np.ndarray:
        if name not in self.combos:
            raise UnknownCoordinateError(
                f"Unknown Gaussian variable {name}, available: {list(self.combos)}"
            )
        return self.combos[name]

    def cov(self, names: Coords) -> np.ndarray:
        names = as_coords(names)
        if len(names) == 0:
            return np.zeros((0, 0))
        A = np.stack([self.combination(n) for n in names])
        return A @ self.base_cov @ A.T

    def cross_cov(self, a: Coords, b: Coords) -> np.ndarray:
        a, b = as_coords(a), as_coords(b)
        A = np.stack([self.combination(n) for n in a])
        B = np.stack([self.combination(n) for n in b])
        return A @ self.base_cov @ B.T

    def conditional_cov(self, names: Coords, given: Coords = ()) -> np.ndarray:
        """Covariance of `names` given `given` (Schur complement with a pseudo-inverse)."""
        names, given = as_coords(names), as_coords(given)
        cov = self.cov(names)
        if len(given) == 0:
            return cov
        cross = self.cross_cov(names, given)
        cov_g = self.cov(given)
        return cov - cross @ pinv_psd(cov_g) @ cross.T


def pinv_psd(cov: np.ndarray) -> np.ndarray:
    """Pseudo-inverse of a symmetric positive semi-definite matrix."""
    eig, vecs = np.linalg.eigh((cov + cov.T) / 2)
    threshold = RANK_TOL * max(1.0, float(np.max(np.abs(eig))))
    inv = np.where(eig > threshold, 1.0 / np.where(eig > threshold, eig, 1.0), 0.0)
    return (vecs * inv) @ vecs.T


def pseudo_logdet(cov: np.ndarray) -> tuple[float, int]:
    """Natural log of the product of the non-zero eigenvalues, and the rank."""
    if cov.shape[0] == 0:
        return 0.0, 0
    eig = np.linalg.eigvalsh((cov + cov.T) / 2)
    threshold = RANK_TOL * max(1.0, float(np.max(np.abs(eig))))
    nonzero = eig[eig > threshold]
    return float(np.sum(np.log(nonzero))), int(nonzero.size)


def gaussian_mutual_info(
    vec: GaussianVector, a: Coords, b: Coords, given: Optional[Coords] = None
) -> tuple[float, bool]:
    """I(A; B | G) in bits between jointly Gaussian variables.

    Returns the value and whether every covariance involved was full rank. Rank-deficient
    covariances are handled on their support (pseudo-determinants); if A and B share a
    noiseless linear component the information is infinite and SingularCovarianceError
    is raised.
    """
    a, b = as_coords(a), as_coords(b)
    g = as_coords(given) if given is not None else ()

    logdet_a, rank_a = pseudo_logdet(vec.conditional_cov(a, g))
    logdet_b, rank_b = pseudo_logdet(vec.conditional_cov(b, g))
    logdet_ab, rank_ab = pseudo_logdet(vec.conditional_cov(a + b, g))

    if rank_ab < rank_a + rank_b:
        raise SingularCovarianceError(
            f"I({','.join(a)}; {','.join(b)} | {','.join(g)}) is infinite: the variables share a noiseless component"
        )

    regular = rank_a == len(a) and rank_b == len(b)
    if not regular:
        logger.debug(
            "Degenerate covariance in I({}; {} | {}), evaluated on its support",
            ",".join(a),
            ",".join(b),
            ",".join(g),
        )
    value = 0.5 * (logdet_a + logdet_b - logdet_ab) / np.log(2)
    return clamp_info(float(value)), regular


def gaussian_entropy(vec: GaussianVector, names: Coords) -> float:
    """Differential entropy (bits) 1/2 log2((2 pi e)^k det(cov)) on the covariance support."""
    logdet, rank = pseudo_logdet(vec.cov(names))
    return 0.5 * (rank * np.log(2 * np.pi * np.e) + logdet) / np.log(2)
