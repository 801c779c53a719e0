import numpy as np
import pytest
from conftest import bsc

from ncsi.capacity.singleuser import (
    blahut_arimoto,
    clean_output_table,
    csirt_capacity,
    det_capacity,
    gp_capacity,
    input_info,
)
from ncsi.channels.models import StateChannel, channel_from_function
from ncsi.misc import ChannelStructureError
from ncsi.optimizer.candidate import SearchBudget

ONE_MINUS_H01 = 1 - (-0.1 * np.log2(0.1) - 0.9 * np.log2(0.9))


def test_blahut_arimoto():
    value, r = blahut_arimoto(bsc(0.1))
    assert value == pytest.approx(ONE_MINUS_H01, abs=1e-8)
    assert r == pytest.approx([0.5, 0.5], abs=1e-6)

    # Z-channel
    p = 0.5
    value, _ = blahut_arimoto(np.array([[1.0, 0.0], [p, 1 - p]]))
    assert value == pytest.approx(np.log2(1 + (1 - p) * p ** (p / (1 - p))), abs=1e-8)


def test_det_capacity(xor_channel):
    assert det_capacity(xor_channel) == 1.0

    constant = channel_from_function([0.5, 0.5], [[0, 1], [0, 1]])
    assert det_capacity(constant) == 0.0

    mixed = channel_from_function([0.5, 0.5], [[0, 0], [0, 1], [1, 2], [1, 3]])
    assert det_capacity(mixed) == pytest.approx(1.5)

    with pytest.raises(ChannelStructureError):
        det_capacity(StateChannel([1.0], bsc(0.1)[:, None, :]))


def test_csirt_capacity(xor_channel, dirty_bsc_channel):
    assert csirt_capacity(xor_channel).value == pytest.approx(1.0, abs=1e-9)
    assert csirt_capacity(dirty_bsc_channel).value == pytest.approx(0.5310, abs=1e-4)
    assert csirt_capacity(dirty_bsc_channel).value == pytest.approx(ONE_MINUS_H01, abs=1e-6)

    deaf = StateChannel([0.5, 0.5], np.full((2, 2, 2), 0.5))
    assert csirt_capacity(deaf).value == pytest.approx(0.0, abs=1e-12)

    result = csirt_capacity(dirty_bsc_channel)
    assert input_info(dirty_bsc_channel, result.argmax.table) == pytest.approx(result.value, abs=1e-9)


def test_gp_capacity_noiseless_without_state(small_budget):
    ch = StateChannel([1.0], np.eye(2)[:, None, :])
    assert gp_capacity(ch, small_budget).value == pytest.approx(1.0, abs=1e-9)


def test_gp_capacity_xor(xor_channel):
    budget = SearchBudget(grid_k=8, restarts=200, refine_passes=3, seed=0)
    result = gp_capacity(xor_channel, budget)
    assert result.value >= 0.99
    assert result.value <= det_capacity(xor_channel) + 1e-9
    assert result.search.mode == "restarts"


def test_gp_capacity_dirty_bsc(dirty_bsc_channel, small_budget):
    oracle = csirt_capacity(dirty_bsc_channel).value
    value = gp_capacity(dirty_bsc_channel, small_budget).value
    assert oracle - 0.02 <= value <= oracle + 1e-9


def test_gp_below_csirt_on_random_channels(small_budget):
    rng = np.random.default_rng(5)
    for _ in range(5):
        ch = StateChannel(rng.dirichlet(np.ones(2)), rng.dirichlet(np.ones(2), size=(2, 2)))
        assert gp_capacity(ch, small_budget, card_u=3).value <= csirt_capacity(ch).value + 1e-7


def test_clean_output_table_is_dirty_paper_choice(dirty_bsc_channel):
    table = clean_output_table(dirty_bsc_channel.transition, 2)
    # U = X xor S, uniform and independent of S
    assert table[0] == pytest.approx(np.diag([0.5, 0.5]))
    assert table[1] == pytest.approx(np.array([[0.0, 0.5], [0.5, 0.0]]))
    assert clean_output_table(dirty_bsc_channel.transition, 1) is None
