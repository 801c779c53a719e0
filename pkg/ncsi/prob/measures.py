"""Shannon information measures in bits over finite alphabets.

Every mutual-information term of the rate expressions is evaluated here. Measures of a
JointPmf address coordinates by name; a coordinate argument is a single name or an
iterable of names. Conventions: log base 2, 0 log 0 = 0, and results that are negative
only by round-off (within 1e-12) are reported as 0.
"""

from __future__ import annotations

from typing import Optional, Union

import numpy as np

from ncsi.misc import DimensionMismatchError, clamp_info
from ncsi.prob.pmf import Coords, CondPmf, JointPmf, Pmf, as_coords


def entropy(p: Union[Pmf, np.ndarray]) -> float:
    probs = p.probs if isinstance(p, Pmf) else np.asarray(p, dtype=np.float64).reshape(-1)
    probs = probs[probs > 0]
    return float(-np.sum(probs * np.log2(probs)))


def _disjoint(*groups: tuple[str, ...]) -> None:
    seen = set()
    for group in groups:
        if seen.intersection(group):
            raise DimensionMismatchError(
                f"Coordinate sets must be disjoint, {sorted(seen.intersection(group))} repeated"
            )
        seen.update(group)


def conditional_entropy(j: JointPmf, target: Coords, given: Coords = ()) -> float:
    target, given = as_coords(target), as_coords(given)
    j.axes(target + given)
    _disjoint(target, given)
    return clamp_info(j.entropy(target + given) - j.entropy(given))


def mutual_info(
    j: JointPmf, a: Coords, b: Coords, given: Optional[Coords] = None
) -> float:
    """I(A; B | G) = H(A,G) + H(B,G) - H(A,B,G) - H(G)."""
    a, b = as_coords(a), as_coords(b)
    g = as_coords(given) if given is not None else ()
    j.axes(a + b + g)
    _disjoint(a, b, g)
    value = j.entropy(a + g) + j.entropy(b + g) - j.entropy(a + b + g) - j.entropy(g)
    return clamp_info(value)


def marginalize(j: JointPmf, coords: Coords) -> JointPmf:
    return j.marginal(coords)


def extend(j: JointPmf, source: Coords, name: str, fmap: np.ndarray, size: int) -> JointPmf:
    return j.extend(source, name, fmap, size)


def compose(base: Union[JointPmf, tuple[str, Pmf]], *factors: CondPmf) -> JointPmf:
    """Chain a base law with conditional factors, e.g. compose(("S", P_S), P_{X|S}, P_{Y|X,S})."""
    if not isinstance(base, JointPmf):
        name, pmf = base
        base = JointPmf.from_pmf(name, pmf)
    for factor in factors:
        base = base.compose(factor)
    return base
