import numpy as np
import pytest
from conftest import dirty_bsc
from scipy.special import rel_entr

from ncsi.binning.code import (
    BinningCode,
    BinningDesign,
    Typicality,
    decode,
    encode,
    is_typical,
    joint_type,
    typicality_delta,
    typicality_exponent,
)
from ncsi.binning.simulate import BATCH_HEADER, simulate
from ncsi.capacity.singleuser import clean_output_table, gp_capacity
from ncsi.channels.models import StateChannel, channel_from_function
from ncsi.misc import ChannelStructureError, DimensionMismatchError
from ncsi.optimizer.search import simplex_grid_array
from ncsi.prob.measures import entropy
from ncsi.prob.pmf import Pmf

ROBUST = Typicality.ROBUST


def h2(p: float) -> float:
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


def clean_design(ch: StateChannel) -> BinningDesign:
    """U = noiseless output, uniform and independent of the state."""
    return BinningDesign(ch, clean_output_table(ch.transition, 2))


@pytest.fixture
def xor_design(xor_channel) -> BinningDesign:
    return clean_design(xor_channel)


def test_design_information(xor_design):
    assert xor_design.info_us() == pytest.approx(0.0, abs=1e-12)
    assert xor_design.info_uy() == pytest.approx(1.0)
    assert xor_design.p_uy == pytest.approx(np.eye(2) / 2)
    # X = U xor S
    assert xor_design.x_given_us[1] == pytest.approx(np.array([[0.0, 1.0], [1.0, 0.0]]))


def test_design_validation(xor_channel):
    with pytest.raises(DimensionMismatchError):
        BinningDesign(xor_channel, np.full((2, 2, 3), 1 / 6))
    wide = channel_from_function([0.5, 0.5], np.arange(10).reshape(5, 2))
    with pytest.raises(ChannelStructureError):
        BinningDesign(wide, np.full((2, 2, 5), 0.1))


def test_joint_type_and_typicality():
    q = joint_type(np.array([0, 1, 0, 1]), np.array([0, 0, 1, 1]), 2, 2)
    assert q == pytest.approx(np.full((2, 2), 0.25))
    assert is_typical(q, np.full((2, 2), 0.25), 0.1)
    assert not is_typical(q, np.eye(2) / 2, 0.4)
    assert is_typical(q, np.full((2, 2), 0.25), 0.1, ROBUST)
    assert not is_typical(q, np.eye(2) / 2, 0.5, ROBUST)

    # total variation lets mass into empty cells, robust typicality does not
    noisy = np.array([[0.45, 0.05], [0.05, 0.45]])
    assert is_typical(noisy, np.eye(2) / 2, 0.1)
    assert not is_typical(noisy, np.eye(2) / 2, 0.9, ROBUST)

    p = np.full((2, 3), 1 / 6)
    assert typicality_delta(p, 0.05) == pytest.approx(0.075)
    assert typicality_delta(p, 0.05, ROBUST) == pytest.approx(0.3)
    # an unused symbol does not count
    assert typicality_delta(np.vstack([p, np.zeros(3)]), 0.05) == pytest.approx(0.075)


def test_typicality_exponent():
    for mode in Typicality:
        assert typicality_exponent(np.full((2, 2), 0.25), 0.2, mode) == 0.0
    # zero cells of P pin Q to P
    assert typicality_exponent(np.eye(2) / 2, 0.2, ROBUST) == pytest.approx(1.0, abs=1e-9)
    assert typicality_exponent(np.eye(2) / 2, 0.05) == pytest.approx(1 - h2(0.05), abs=1e-6)

    p = np.array([[0.45, 0.05], [0.05, 0.45]])
    q = Pmf([0.44, 0.06, 0.06, 0.44])
    assert typicality_exponent(p, 0.2, ROBUST) == pytest.approx(2.0 - entropy(q), abs=1e-8)
    assert typicality_exponent(p, 0.05) == pytest.approx(1 - h2(0.15), abs=1e-6)


@pytest.mark.parametrize("mode, delta", [(Typicality.TOTAL_VARIATION, 0.1), (ROBUST, 0.2)])
def test_typicality_exponent_matches_brute_force(mode, delta):
    p = np.array([[0.4, 0.1], [0.15, 0.35]])
    m = np.outer(p.sum(axis=1), p.sum(axis=0)).ravel()
    grid = simplex_grid_array(4, 200)
    if mode == ROBUST:
        inside = np.all(np.abs(grid - p.ravel()) <= delta * p.ravel() + 1e-12, axis=1)
    else:
        inside = 0.5 * np.abs(grid - p.ravel()).sum(axis=1) <= delta + 1e-12
    brute = float(np.min(rel_entr(grid[inside], m).sum(axis=1)) / np.log(2))

    exponent = typicality_exponent(p, delta, mode)
    assert exponent <= brute + 1e-6
    assert exponent >= brute - 0.02


def hand_code(design: BinningDesign) -> BinningCode:
    code = BinningCode(design, n=4, rate=0.5, excess=0.0)
    code.codebook = np.array([[0, 1, 0, 1], [1, 0, 1, 0], [0, 0, 1, 1], [1, 1, 0, 0]])
    return code


def test_encode_decode(xor_design):
    code = hand_code(xor_design)
    assert (code.n_bins, code.bin_size) == (4, 1)
    s_seq = np.array([0, 0, 1, 1])

    x_seq = encode(code, s_seq, 0)
    assert x_seq.tolist() == [0, 1, 1, 0]
    y_seq = x_seq ^ s_seq
    assert decode(code, y_seq) == 0

    # codeword 2 repeats the state sequence: not typical with it
    assert encode(code, s_seq, 2) is None
    assert decode(code, np.array([1, 1, 1, 1])) is None


def test_encode_decode_errors(xor_design):
    code = hand_code(xor_design)
    with pytest.raises(DimensionMismatchError):
        encode(code, np.zeros(3, dtype=int), 0)
    with pytest.raises(DimensionMismatchError):
        encode(code, np.zeros(4, dtype=int), 4)
    with pytest.raises(DimensionMismatchError):
        decode(code, np.zeros(5, dtype=int))

    code.codebook = None
    with pytest.raises(DimensionMismatchError, match="explicitly"):
        decode(code, np.zeros(4, dtype=int))


@pytest.mark.parametrize("kwargs", [{"n": 0}, {"n": 20_000}, {"rate": -0.1}, {"excess": -1.0}])
def test_code_validation(xor_design, kwargs):
    args = dict(n=10, rate=0.5, excess=0.1)
    args.update(kwargs)
    with pytest.raises(ValueError):
        BinningCode(xor_design, **args)


def test_generate_sizes(xor_design):
    small = BinningCode.generate(xor_design, rate=0.25, n=8, seed=3)
    assert small.explicit
    assert small.excess == pytest.approx(0.15)
    assert small.typicality == Typicality.TOTAL_VARIATION
    assert small.codebook.shape == (small.n_bins * small.bin_size, 8)
    again = BinningCode.generate(xor_design, rate=0.25, n=8, seed=3)
    assert np.array_equal(small.codebook, again.codebook)

    large = BinningCode.generate(xor_design, rate=0.8, n=2000)
    assert not large.explicit
    assert large.codebook is None


def test_noiseless_thresholds(xor_design):
    below = simulate(xor_design, rate=0.5, n=2000, trials=200)
    assert not below.explicit
    assert below.block_error_rate <= 0.1
    above = simulate(xor_design, rate=1.1, n=2000, trials=200)
    assert above.block_error_rate >= 0.9


def test_noiseless_thresholds_robust(xor_design):
    below = simulate(xor_design, rate=0.8, n=2000, trials=200, excess=0.15, typicality=ROBUST)
    assert below.block_error_rate <= 0.1
    above = simulate(xor_design, rate=1.1, n=2000, trials=200, excess=0.15, typicality=ROBUST)
    assert above.block_error_rate >= 0.9


def test_dirty_bsc_thresholds():
    design = clean_design(dirty_bsc(0.1))
    assert design.info_uy() == pytest.approx(0.5310, abs=1e-4)
    assert simulate(design, rate=0.2, n=5000, trials=200).block_error_rate <= 0.1
    assert simulate(design, rate=0.7, n=5000, trials=200).block_error_rate >= 0.9


def test_dirty_bsc_thresholds_robust():
    design = clean_design(dirty_bsc(0.1))
    excess = design.info_us() + 0.05
    low = simulate(design, rate=0.35, n=5000, trials=200, excess=excess, typicality=ROBUST)
    assert low.block_error_rate <= 0.1
    high = simulate(design, rate=0.7, n=5000, trials=200, excess=excess, typicality=ROBUST)
    assert high.block_error_rate >= 0.9


def test_error_rate_grows_with_rate(xor_design):
    rates = [0.3, 0.6, 0.9, 1.2]
    errors = [simulate(xor_design, rate=r, n=500, trials=200, seed=2).block_error_rate for r in rates]
    sigma = np.sqrt(0.25 / 200)
    assert all(b >= a - 2 * sigma for a, b in zip(errors, errors[1:]))
    assert errors[0] <= 0.1
    assert errors[-1] >= 0.9


@pytest.mark.parametrize("channel", ["xor_channel", "dirty_bsc_channel"])
def test_supported_rate_is_close_to_gp(channel, request, small_budget):
    ch = request.getfixturevalue(channel)
    design = clean_design(ch)
    rate = design.info_uy() - design.info_us()
    assert gp_capacity(ch, small_budget).value >= rate - 1e-6
    # 0.13 below the design rate is within 0.15 of the capacity
    result = simulate(
        design, rate=rate - 0.13, n=5000, trials=200, excess=design.info_us() + 0.05, typicality=ROBUST
    )
    assert result.block_error_rate <= 0.1


def test_explicit_simulation_is_reproducible(xor_design, tmp_path):
    first = simulate(xor_design, rate=0.25, n=8, trials=60, seed=5, outfile=tmp_path / "a.csv")
    second = simulate(xor_design, rate=0.25, n=8, trials=60, seed=5, outfile=tmp_path / "b.csv")
    assert first.explicit
    assert 0.0 <= first.encode_failure_rate <= first.block_error_rate <= 1.0
    assert first.block_error_rate == second.block_error_rate
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    lines = (tmp_path / "a.csv").read_text().splitlines()
    assert lines[0] == ",".join(BATCH_HEADER)
    assert len(lines) == 3
    assert [b[1] for b in first.batches] == [50, 10]


def test_simulate_rejects_no_trials(xor_design):
    with pytest.raises(ValueError, match="trial"):
        simulate(xor_design, rate=0.5, n=10, trials=0)
