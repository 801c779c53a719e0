from __future__ import annotations

import string
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from ncsi.misc import (
    DimensionMismatchError,
    InvalidDistributionError,
    UnknownCoordinateError,
    cache_method,
)

# tolerance for a table to be accepted as a pmf
PMF_TOL = 1e-9

Coords = Union[str, Iterable[str]]


def as_coords(coords: Coords) -> tuple[str, ...]:
    """Normalize a coordinate argument: a single name or an iterable of names."""
    if isinstance(coords, str):
        return (coords,)
    return tuple(coords)


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.float64)
    arr.flags.writeable = False
    return arr


class Pmf:
    """Probability mass function over a finite alphabet {0, ..., n-1}."""

    def __init__(self, probs: Sequence[float] | np.ndarray, tol: float = PMF_TOL):
        probs = _readonly(probs)
        if probs.ndim != 1 or probs.size == 0:
            raise DimensionMismatchError(
                f"A pmf must be a non-empty vector, got shape {probs.shape}"
            )
        if np.any(probs < 0):
            raise InvalidDistributionError(f"Negative probability in {probs}")
        if abs(probs.sum() - 1.0) > tol:
            raise InvalidDistributionError(
                f"Probabilities sum to {probs.sum()} instead of 1"
            )
        self.probs = probs

    @property
    def size(self) -> int:
        return self.probs.size

    @staticmethod
    def uniform(size: int) -> Pmf:
        return Pmf(np.full(size, 1.0 / size))

    @staticmethod
    def point(size: int, symbol: int) -> Pmf:
        probs = np.zeros(size)
        probs[symbol] = 1.0
        return Pmf(probs)

    def __repr__(self) -> str:
        return f"Pmf({np.array2string(self.probs, precision=4)})"


class CondPmf:
    """Conditional pmf P(outputs | given) over named coordinates.

    The table has one axis per conditioning coordinate followed by one axis per output
    coordinate; every slice over the output axes is a pmf.
    """

    def __init__(
        self,
        given: Coords,
        outputs: Coords,
        table: np.ndarray,
        tol: float = PMF_TOL,
    ):
        self.given = as_coords(given)
        self.outputs = as_coords(outputs)
        table = _readonly(table)

        if len(set(self.given + self.outputs)) != len(self.given) + len(self.outputs):
            raise DimensionMismatchError(
                f"Coordinates must be unique: given={self.given}, outputs={self.outputs}"
            )
        if table.ndim != len(self.given) + len(self.outputs):
            raise DimensionMismatchError(
                f"Table of {table.ndim} axes does not match coordinates {self.given} -> {self.outputs}"
            )
        if np.any(table < 0):
            raise InvalidDistributionError("Negative conditional probability")

        self.table = table
        rows = self.rows
        bad = np.flatnonzero(np.abs(rows.sum(axis=1) - 1.0) > tol)
        if len(bad) > 0:
            raise InvalidDistributionError(
                f"Row {bad[0]} of P({','.join(self.outputs)}|{','.join(self.given)}) sums to {rows[bad[0]].sum()}"
            )

    @property
    def sizes(self) -> dict[str, int]:
        return dict(zip(self.given + self.outputs, self.table.shape))

    @property
    def input_size(self) -> int:
        return int(np.prod(self.table.shape[: len(self.given)], dtype=np.int64))

    @property
    def output_size(self) -> int:
        return int(np.prod(self.table.shape[len(self.given) :], dtype=np.int64))

    @property
    def rows(self) -> np.ndarray:
        """One row per conditioning symbol (row-major over the given coordinates)."""
        return self.table.reshape(self.input_size, self.output_size)

    def row(self, index: int) -> Pmf:
        return Pmf(self.rows[index])

    @staticmethod
    def from_rows(
        given: Mapping[str, int], outputs: Mapping[str, int], rows: np.ndarray
    ) -> CondPmf:
        shape = tuple(given.values()) + tuple(outputs.values())
        return CondPmf(tuple(given), tuple(outputs), np.asarray(rows).reshape(shape))

    @staticmethod
    def deterministic(
        given: Mapping[str, int], output: str, output_size: int, fmap: np.ndarray
    ) -> CondPmf:
        """P(output | given) placing all mass on `fmap[given]`."""
        fmap = np.asarray(fmap, dtype=np.int64)
        shape = tuple(given.values())
        if fmap.shape != shape:
            raise DimensionMismatchError(
                f"Deterministic map of shape {fmap.shape} does not match {shape}"
            )
        table = np.zeros(shape + (output_size,))
        np.put_along_axis(table, fmap[..., None], 1.0, axis=-1)
        return CondPmf(tuple(given), (output,), table)

    def __repr__(self) -> str:
        return f"CondPmf({','.join(self.outputs)}|{','.join(self.given)}, shape={self.table.shape})"


class JointPmf:
    """A pmf over a Cartesian product of named coordinate alphabets.

    Instances are immutable; entropies of coordinate subsets are memoized per instance.
    """

    def __init__(self, names: Coords, table: np.ndarray, tol: float = PMF_TOL):
        self.names = as_coords(names)
        table = _readonly(table)
        if len(set(self.names)) != len(self.names):
            raise DimensionMismatchError(f"Duplicate coordinate names {self.names}")
        if table.ndim != len(self.names):
            raise DimensionMismatchError(
                f"Table of {table.ndim} axes does not match coordinates {self.names}"
            )
        if np.any(table < 0):
            raise InvalidDistributionError("Negative joint probability")
        if abs(table.sum() - 1.0) > tol:
            raise InvalidDistributionError(
                f"Joint probabilities sum to {table.sum()} instead of 1"
            )
        self.table = table

    @staticmethod
    def from_pmf(name: str, pmf: Pmf) -> JointPmf:
        return JointPmf((name,), pmf.probs)

    @property
    def sizes(self) -> dict[str, int]:
        return dict(zip(self.names, self.table.shape))

    def axes(self, coords: Coords) -> tuple[int, ...]:
        coords = as_coords(coords)
        for c in coords:
            if c not in self.names:
                raise UnknownCoordinateError(
                    f"Unknown coordinate {c}, available coordinates: {self.names}"
                )
        return tuple(self.names.index(c) for c in coords)

    def marginal_table(self, coords: Coords) -> np.ndarray:
        """Table of the marginal over `coords`, axes in the requested order."""
        coords = as_coords(coords)
        keep = self.axes(coords)
        if len(set(keep)) != len(keep):
            raise DimensionMismatchError(f"Repeated coordinates in {coords}")
        drop = tuple(i for i in range(len(self.names)) if i not in keep)
        table = self.table.sum(axis=drop) if drop else self.table
        # after summation the kept axes are in increasing order of their original index
        order = sorted(keep)
        return np.transpose(table, [order.index(i) for i in keep])

    def marginal(self, coords: Coords) -> JointPmf:
        coords = as_coords(coords)
        return JointPmf(coords, self.marginal_table(coords))

    def entropy(self, coords: Coords) -> float:
        """Joint entropy (bits) of a set of coordinates; order does not matter."""
        key = tuple(sorted(set(as_coords(coords))))
        if len(key) == 0:
            return 0.0
        return self._entropy(key)

    @cache_method()
    def _entropy(self, key: tuple[str, ...]) -> float:
        probs = self.marginal_table(key).reshape(-1)
        probs = probs[probs > 0]
        return float(-np.sum(probs * np.log2(probs)))

    def compose(self, cond: CondPmf) -> JointPmf:
        """Append `cond.outputs`, drawn from P(outputs | given) with `given` already present."""
        self.axes(cond.given)
        for name in cond.outputs:
            if name in self.names:
                raise DimensionMismatchError(
                    f"Coordinate {name} already exists in {self.names}"
                )
        for name in cond.given:
            if self.sizes[name] != cond.sizes[name]:
                raise DimensionMismatchError(
                    f"Coordinate {name} has size {self.sizes[name]} but the conditional expects {cond.sizes[name]}"
                )

        letters = _letters(self.names + cond.outputs)
        lhs = "".join(letters[n] for n in self.names)
        rhs = "".join(letters[n] for n in cond.given + cond.outputs)
        out = lhs + "".join(letters[n] for n in cond.outputs)
        table = np.einsum(f"{lhs},{rhs}->{out}", self.table, cond.table)
        return JointPmf(self.names + cond.outputs, table)

    def extend(self, source: Coords, name: str, fmap: np.ndarray, size: int) -> JointPmf:
        """Append a coordinate `name` = fmap[source] (a deterministic map of existing coordinates)."""
        source = as_coords(source)
        sizes = self.sizes
        self.axes(source)
        return self.compose(
            CondPmf.deterministic({s: sizes[s] for s in source}, name, size, fmap)
        )

    def merge(self, coords: Coords, name: str) -> JointPmf:
        """Replace a group of coordinates by a single coordinate indexing their product (row-major)."""
        coords = as_coords(coords)
        self.axes(coords)
        rest = tuple(n for n in self.names if n not in coords)
        table = np.transpose(self.table, self.axes(rest + coords))
        size = int(np.prod(table.shape[len(rest) :], dtype=np.int64))
        return JointPmf(rest + (name,), table.reshape(table.shape[: len(rest)] + (size,)))

    def rename(self, mapping: Mapping[str, str]) -> JointPmf:
        return JointPmf(tuple(mapping.get(n, n) for n in self.names), self.table)

    def __repr__(self) -> str:
        return f"JointPmf({dict(self.sizes)})"


def _letters(names: Sequence[str]) -> dict[str, str]:
    if len(names) > len(string.ascii_letters):
        raise DimensionMismatchError(f"Too many coordinates: {len(names)}")
    return {n: string.ascii_letters[i] for i, n in enumerate(names)}
