"""Channels with state for the four scenarios.

Every model stores its state law and a dense transition tensor whose leading axes are the
channel inputs and states and whose trailing axes are the outputs. Coordinates use fixed
names so that rate expressions can address them: S, X, Y for the single-user channel;
S1, S2, X1, X2, Y (and Y1, Y2 for a product output) for the MAC; S, X, Y1, Y2 for the
BC; S (or S1, S2), X, Xr, Y, Yr for the relay channel.
"""

from __future__ import annotations

from enum import Enum
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from ncsi.misc import DimensionMismatchError
from ncsi.prob.pmf import CondPmf, JointPmf, Pmf


class ChannelKind(str, Enum):
    SINGLE = "single"
    MAC = "mac"
    BC = "bc"
    RELAY = "relay"


class StateChannelBase:
    """Shared plumbing: state law, transition kernel and candidate composition."""

    kind: ChannelKind
    # names of the input (and state) coordinates of the transition, in axis order
    inputs: tuple[str, ...]
    # names of the output coordinates, in axis order
    outputs: tuple[str, ...]
    # names of the state coordinates
    states: tuple[str, ...]

    state_table: np.ndarray
    transition: np.ndarray

    def _validate(self) -> None:
        if self.state_table.ndim != len(self.states):
            raise DimensionMismatchError(
                f"State table of shape {self.state_table.shape} does not match states {self.states}"
            )
        if self.transition.ndim != len(self.inputs) + len(self.outputs):
            raise DimensionMismatchError(
                f"Transition of shape {self.transition.shape} does not match {self.inputs} -> {self.outputs}"
            )
        sizes = self.sizes
        for name in self.states:
            if self.transition.shape[self.inputs.index(name)] != sizes[name]:
                raise DimensionMismatchError(
                    f"State {name} has {sizes[name]} symbols but the transition expects {self.transition.shape[self.inputs.index(name)]}"
                )
        # raises InvalidDistributionError on bad rows
        self.state_joint()
        self.kernel()

    @property
    def sizes(self) -> dict[str, int]:
        out = dict(zip(self.inputs + self.outputs, self.transition.shape))
        out.update(zip(self.states, self.state_table.shape))
        return out

    def state_joint(self) -> JointPmf:
        return JointPmf(self.states, self.state_table)

    def kernel(self) -> CondPmf:
        """P(outputs | inputs, states) as a conditional pmf."""
        return CondPmf(self.inputs, self.outputs, self.transition)

    def output_kernels(self) -> dict[str, np.ndarray]:
        """Marginal transition of each output coordinate, shape inputs + (|output|,)."""
        n_in = len(self.inputs)
        kernels = {}
        for i, name in enumerate(self.outputs):
            others = tuple(n_in + j for j in range(len(self.outputs)) if j != i)
            kernels[name] = self.transition.sum(axis=others) if others else self.transition
        return kernels

    def joint(self, blocks: Iterable[CondPmf]) -> JointPmf:
        """Joint law of states, candidate coordinates and outputs.

        `blocks` are the conditional factors of a candidate distribution, applied in order
        after the state law; together they must produce every channel input.
        """
        j = self.state_joint()
        for block in blocks:
            j = j.compose(block)
        return j.compose(self.kernel())


class StateChannel(StateChannelBase):
    """Single-user channel P(y | x, s) with state law P_S."""

    kind = ChannelKind.SINGLE
    inputs = ("X", "S")
    outputs = ("Y",)
    states = ("S",)

    def __init__(self, state_pmf: Pmf | Sequence[float], transition: np.ndarray):
        self.state_pmf = state_pmf if isinstance(state_pmf, Pmf) else Pmf(state_pmf)
        self.state_table = self.state_pmf.probs
        self.transition = np.asarray(transition, dtype=np.float64)
        self._validate()

    @property
    def nx(self) -> int:
        return self.transition.shape[0]

    @property
    def ns(self) -> int:
        return self.transition.shape[1]

    @property
    def ny(self) -> int:
        return self.transition.shape[2]

    def state_kernel(self, s: int) -> np.ndarray:
        """Channel matrix P(y | x) of a fixed state, shape (|X|, |Y|)."""
        return self.transition[:, s, :]

    def __repr__(self) -> str:
        return f"StateChannel(|X|={self.nx}, |S|={self.ns}, |Y|={self.ny})"


class MacStateChannel(StateChannelBase):
    """Two-user MAC P(y | x1, x2, s1, s2) with a joint (possibly correlated) state law.

    When `output_dims` has two entries the receiver alphabet is the product Y1 x Y2 and the
    transition carries one axis per factor; `kernel()` still exposes the pair as a single
    coordinate Y (row-major index y1 * |Y2| + y2).
    """

    kind = ChannelKind.MAC
    inputs = ("X1", "X2", "S1", "S2")
    states = ("S1", "S2")

    def __init__(self, state_table: np.ndarray, transition: np.ndarray):
        self.state_table = np.asarray(state_table, dtype=np.float64)
        transition = np.asarray(transition, dtype=np.float64)
        if transition.ndim not in (5, 6):
            raise DimensionMismatchError(
                f"MAC transition must have 5 or 6 axes, got shape {transition.shape}"
            )
        self.output_dims = tuple(transition.shape[4:])
        self.outputs = ("Y",) if len(self.output_dims) == 1 else ("Y1", "Y2")
        self.transition = transition
        self._validate()

    @property
    def is_product_output(self) -> bool:
        return len(self.output_dims) == 2

    def kernel(self) -> CondPmf:
        shape = self.transition.shape[:4] + (int(np.prod(self.output_dims)),)
        return CondPmf(self.inputs, ("Y",), self.transition.reshape(shape))

    def output_kernels(self) -> dict[str, np.ndarray]:
        kernels = {"Y": self.kernel().table}
        if self.is_product_output:
            kernels.update(super().output_kernels())
        return kernels

    def __repr__(self) -> str:
        return f"MacStateChannel(sizes={self.sizes}, output={self.output_dims})"


class BcStateChannel(StateChannelBase):
    """Two-receiver BC P(y1, y2 | x, s) with state law P_S."""

    kind = ChannelKind.BC
    inputs = ("X", "S")
    outputs = ("Y1", "Y2")
    states = ("S",)

    def __init__(self, state_pmf: Pmf | Sequence[float], transition: np.ndarray):
        self.state_pmf = state_pmf if isinstance(state_pmf, Pmf) else Pmf(state_pmf)
        self.state_table = self.state_pmf.probs
        self.transition = np.asarray(transition, dtype=np.float64)
        self._validate()

    @property
    def nx(self) -> int:
        return self.transition.shape[0]

    @property
    def ns(self) -> int:
        return self.transition.shape[1]

    @staticmethod
    def from_deterministic(
        state_pmf: Pmf | Sequence[float], f1: np.ndarray, f2: np.ndarray, ny1: int, ny2: int
    ) -> BcStateChannel:
        """BC with Y1 = f1(x, s) and Y2 = f2(x, s), maps indexed [x][s]."""
        f1, f2 = np.asarray(f1), np.asarray(f2)
        transition = np.zeros(f1.shape + (ny1, ny2))
        for x in range(f1.shape[0]):
            for s in range(f1.shape[1]):
                transition[x, s, f1[x, s], f2[x, s]] = 1.0
        return BcStateChannel(state_pmf, transition)

    def with_receiver_csi(self, receiver: str) -> BcStateChannel:
        """Same BC with output `receiver` (Y1 or Y2) replaced by the pair (output, S)."""
        nx, ns, ny1, ny2 = self.transition.shape
        eye = np.eye(ns)[None, :, :]
        if receiver == "Y1":
            # new Y1 index = y1 * |S| + s
            t = self.transition[:, :, :, None, :] * eye[:, :, None, :, None]
            return BcStateChannel(self.state_pmf, t.reshape(nx, ns, ny1 * ns, ny2))
        if receiver == "Y2":
            t = self.transition[:, :, :, :, None] * eye[:, :, None, None, :]
            return BcStateChannel(self.state_pmf, t.reshape(nx, ns, ny1, ny2 * ns))
        raise DimensionMismatchError(f"Unknown BC receiver {receiver}")

    def __repr__(self) -> str:
        return f"BcStateChannel(sizes={self.sizes})"


class RelayStateChannel(StateChannelBase):
    """Relay channel P(y, yr | x, xr, s) with a single state S or a state pair (S1, S2)."""

    kind = ChannelKind.RELAY
    outputs = ("Y", "Yr")

    def __init__(self, state_table: np.ndarray, transition: np.ndarray):
        self.state_table = np.asarray(state_table, dtype=np.float64)
        if self.state_table.ndim == 1:
            self.states = ("S",)
        elif self.state_table.ndim == 2:
            self.states = ("S1", "S2")
        else:
            raise DimensionMismatchError(
                f"Relay state table must have 1 or 2 axes, got shape {self.state_table.shape}"
            )
        self.inputs = ("X", "Xr") + self.states
        self.transition = np.asarray(transition, dtype=np.float64)
        self._validate()

    @property
    def has_state_pair(self) -> bool:
        return len(self.states) == 2

    def merged_state(self) -> RelayStateChannel:
        """The pair (S1, S2) viewed as one state S (row-major); identity for a single state."""
        if not self.has_state_pair:
            return self
        nx, nxr, n1, n2, ny, nyr = self.transition.shape
        return RelayStateChannel(
            self.state_table.reshape(-1),
            self.transition.reshape(nx, nxr, n1 * n2, ny, nyr),
        )

    def __repr__(self) -> str:
        return f"RelayStateChannel(sizes={self.sizes})"


AnyChannel = Union[StateChannel, MacStateChannel, BcStateChannel, RelayStateChannel]


def channel_from_function(
    state_pmf: Pmf | Sequence[float], f: np.ndarray, ny: Optional[int] = None
) -> StateChannel:
    """Deterministic single-user channel Y = f(x, s), f indexed [x][s]."""
    f = np.asarray(f, dtype=np.int64)
    ny = int(f.max()) + 1 if ny is None else ny
    transition = np.zeros(f.shape + (ny,))
    np.put_along_axis(transition, f[..., None], 1.0, axis=-1)
    return StateChannel(state_pmf, transition)
