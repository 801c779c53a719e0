from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ncsi.misc import DimensionMismatchError
from ncsi.prob.pmf import CondPmf


@dataclass(frozen=True)
class SearchBudget:
    # simplex grid resolution
    grid_k: int = 8
    # random restarts used when the full grid is larger than `grid_cap`
    restarts: int = 20
    # coordinate refinement passes after each start point
    refine_passes: int = 3
    seed: int = 0
    grid_cap: int = 20000
    progress: bool = False

    def __post_init__(self):
        if self.grid_k < 1:
            raise ValueError(f"Grid resolution must be >= 1, got {self.grid_k}")
        if self.restarts < 0 or self.refine_passes < 0 or self.grid_cap < 0:
            raise ValueError("Budget counts must be nonnegative")

    def describe(self) -> str:
        return f"grid_k={self.grid_k} restarts={self.restarts} refine_passes={self.refine_passes} seed={self.seed}"


@dataclass(frozen=True)
class BlockShape:
    """Shape of one conditional block P(outputs | given) of a candidate distribution."""

    name: str
    given: tuple[tuple[str, int], ...]
    outputs: tuple[tuple[str, int], ...]

    @staticmethod
    def of(name: str, given: Mapping[str, int], outputs: Mapping[str, int]) -> BlockShape:
        return BlockShape(name, tuple(given.items()), tuple(outputs.items()))

    @property
    def n_rows(self) -> int:
        return int(np.prod([n for _, n in self.given], dtype=np.int64))

    @property
    def n_cols(self) -> int:
        return int(np.prod([n for _, n in self.outputs], dtype=np.int64))

    def to_cond(self, rows: np.ndarray) -> CondPmf:
        return CondPmf.from_rows(dict(self.given), dict(self.outputs), rows)


CandidateShape = Sequence[BlockShape]


class CandidatePdf:
    """A point in a product of conditional-probability simplices, one CondPmf per block."""

    def __init__(self, shapes: CandidateShape, rows: Sequence[np.ndarray]):
        if len(shapes) != len(rows):
            raise DimensionMismatchError(
                f"{len(rows)} row tables given for {len(shapes)} blocks"
            )
        self.shapes = tuple(shapes)
        self.blocks = tuple(shape.to_cond(r) for shape, r in zip(shapes, rows))

    @staticmethod
    def from_blocks(shapes: CandidateShape, blocks: Sequence[CondPmf]) -> CandidatePdf:
        """Candidate from ready conditional pmfs, their axes reordered to the block shapes."""
        rows = []
        for shape, block in zip(shapes, blocks):
            names = [n for n, _ in shape.given] + [n for n, _ in shape.outputs]
            order = [(block.given + block.outputs).index(n) for n in names]
            rows.append(np.transpose(block.table, order).reshape(shape.n_rows, shape.n_cols))
        return CandidatePdf(shapes, rows)

    @property
    def rows(self) -> list[np.ndarray]:
        return [b.rows for b in self.blocks]

    def block(self, name: str) -> CondPmf:
        for shape, block in zip(self.shapes, self.blocks):
            if shape.name == name:
                return block
        raise KeyError(name)

    def __iter__(self):
        return iter(self.blocks)

    def __repr__(self) -> str:
        return f"CandidatePdf({', '.join(repr(b) for b in self.blocks)})"
