import numpy as np
import pytest

from ncsi.channels.models import (
    BcStateChannel,
    MacStateChannel,
    RelayStateChannel,
    StateChannel,
    channel_from_function,
)
from ncsi.optimizer.candidate import SearchBudget


def bsc(p: float) -> np.ndarray:
    return np.array([[1 - p, p], [p, 1 - p]])


def dirty_bsc(p: float, ps=(0.5, 0.5)) -> StateChannel:
    """Y = X xor S xor Z with Z ~ Bern(p)."""
    transition = np.zeros((2, 2, 2))
    for x in range(2):
        for s in range(2):
            transition[x, s] = bsc(p)[x ^ s]
    return StateChannel(ps, transition)


def orthogonal_mac(state_table, f1, f2) -> MacStateChannel:
    """MAC with product output Y = (f1(x1, s1), f2(x2, s2)), maps indexed [x][s]."""
    f1, f2 = np.asarray(f1), np.asarray(f2)
    nx1, ns1 = f1.shape
    nx2, ns2 = f2.shape
    ny1, ny2 = int(f1.max()) + 1, int(f2.max()) + 1
    t = np.zeros((nx1, nx2, ns1, ns2, ny1, ny2))
    for x1, x2, s1, s2 in np.ndindex(nx1, nx2, ns1, ns2):
        t[x1, x2, s1, s2, f1[x1, s1], f2[x2, s2]] = 1.0
    return MacStateChannel(np.asarray(state_table, dtype=np.float64), t)


def random_mac(rng: np.random.Generator, ns=2) -> MacStateChannel:
    states = rng.dirichlet(np.ones(ns * ns)).reshape(ns, ns)
    t = rng.dirichlet(np.ones(2), size=(2, 2, ns, ns))
    return MacStateChannel(states, t)


def random_bc(rng: np.random.Generator, ns=2) -> BcStateChannel:
    t = rng.dirichlet(np.ones(4), size=(2, ns)).reshape(2, ns, 2, 2)
    return BcStateChannel(rng.dirichlet(np.ones(ns)), t)


def write_spec(path, text: str) -> str:
    path.write_text(text)
    return str(path)


XOR = [[0, 1], [1, 0]]


@pytest.fixture
def xor_channel() -> StateChannel:
    return channel_from_function([0.5, 0.5], XOR)


@pytest.fixture
def dirty_bsc_channel() -> StateChannel:
    return dirty_bsc(0.1)


@pytest.fixture
def blackwell_bc() -> BcStateChannel:
    # x = 0 -> (0, 0), x = 1 -> (0, 1), x = 2 -> (1, 1)
    f1 = np.array([[0], [0], [1]])
    f2 = np.array([[0], [1], [1]])
    return BcStateChannel.from_deterministic([1.0], f1, f2, 2, 2)


@pytest.fixture
def erasure_bc() -> BcStateChannel:
    """Y1 = X xor S, Y2 = Y1 erased (symbol 2) with probability 0.3."""
    t = np.zeros((2, 2, 2, 3))
    for x in range(2):
        for s in range(2):
            y1 = x ^ s
            t[x, s, y1, y1] = 0.7
            t[x, s, y1, 2] = 0.3
    return BcStateChannel([0.5, 0.5], t)


@pytest.fixture
def correlated_xor_mac() -> MacStateChannel:
    # S1 = S2 with probability 0.8
    return orthogonal_mac([[0.4, 0.1], [0.1, 0.4]], XOR, XOR)


@pytest.fixture
def clean_relay() -> RelayStateChannel:
    """|S| = 1, Yr = X noiselessly, Y = X xor Xr: the relay decodes everything."""
    t = np.zeros((2, 2, 1, 2, 2))
    for x in range(2):
        for xr in range(2):
            t[x, xr, 0, x ^ xr, x] = 1.0
    return RelayStateChannel(np.array([1.0]), t)


@pytest.fixture
def small_budget() -> SearchBudget:
    return SearchBudget(grid_k=4, restarts=6, refine_passes=2, seed=0, grid_cap=2000)
