import numpy as np
import pytest
from conftest import XOR, bsc, orthogonal_mac, write_spec

from ncsi.channels.classify import (
    IndependenceVerdict,
    MoreCapableVerdict,
    check_outputs_independent,
    is_degraded,
    is_deterministic,
    is_more_capable,
    is_orthogonal,
    states_independent,
)
from ncsi.channels.models import (
    BcStateChannel,
    ChannelKind,
    MacStateChannel,
    StateChannel,
)
from ncsi.channels.specfile import load_channel_spec, parse_channel_spec, save_channel_spec
from ncsi.misc import ChannelSpecError, ChannelStructureError, DimensionMismatchError

XOR_SPEC = """
kind = "single"
state_pmf = [0.5, 0.5]
transition = [[[1, 0], [0, 1]], [[0, 1], [1, 0]]]

[alphabets]
X = 2
S = 2
Y = 2
"""


def bc_from_kernels(w1: np.ndarray, w2: np.ndarray) -> BcStateChannel:
    """Stateless BC whose outputs are conditionally independent given X."""
    t = np.einsum("xa,xb->xab", w1, w2)[:, None, :, :]
    return BcStateChannel([1.0], t)


def test_is_deterministic(xor_channel):
    det = is_deterministic(xor_channel)
    assert det.deterministic
    assert det.maps["Y"].tolist() == XOR

    noisy = StateChannel([1.0], bsc(0.1)[:, None, :])
    assert not is_deterministic(noisy)

    f1 = np.array([[0, 0], [1, 1]])
    f2 = np.array([[0, 0], [0, 1]])
    bc = BcStateChannel.from_deterministic([0.5, 0.5], f1, f2, 2, 2)
    det = is_deterministic(bc)
    assert det.outputs == {"Y1": True, "Y2": True}
    assert det.maps["Y2"].tolist() == f2.tolist()


def test_is_orthogonal(correlated_xor_mac):
    orth = is_orthogonal(correlated_xor_mac)
    assert orth.orthogonal
    assert np.argmax(orth.factors[0], axis=-1).tolist() == XOR
    assert not states_independent(correlated_xor_mac)

    # scalar output Y = X1 xor X2
    t = np.zeros((2, 2, 1, 1, 2))
    for x1, x2 in np.ndindex(2, 2):
        t[x1, x2, 0, 0, x1 ^ x2] = 1.0
    with pytest.raises(ChannelStructureError):
        is_orthogonal(MacStateChannel(np.ones((1, 1)), t))

    # product output whose first component depends on x2
    t = np.zeros((2, 2, 1, 1, 2, 2))
    for x1, x2 in np.ndindex(2, 2):
        t[x1, x2, 0, 0, x1 ^ x2, x2] = 1.0
    assert not is_orthogonal(MacStateChannel(np.ones((1, 1)), t))


def test_independent_states():
    mac = orthogonal_mac(np.full((2, 2), 0.25), XOR, XOR)
    assert states_independent(mac)


def test_is_degraded(erasure_bc):
    assert is_degraded(erasure_bc).degraded

    copies = bc_from_kernels(bsc(0.1), bsc(0.2))
    assert not is_degraded(copies)

    same = np.zeros((2, 1, 2, 2))
    for x in range(2):
        same[x, 0] = np.diag(bsc(0.1)[x])
    result = is_degraded(BcStateChannel([1.0], same))
    assert result.degraded
    assert result.q == pytest.approx(np.eye(2))


def test_is_more_capable():
    clean, noisy = np.eye(2), bsc(0.2)
    assert is_more_capable(bc_from_kernels(clean, noisy)).verdict == MoreCapableVerdict.PROBABLY_TRUE

    swapped = is_more_capable(bc_from_kernels(noisy, clean))
    assert swapped.verdict == MoreCapableVerdict.CERTIFIED_FALSE
    assert swapped.witness is not None
    assert swapped.gap > 0

    # ternary input: Y1 merges inputs 1 and 2, Y2 merges inputs 0 and 1
    merge_12 = np.eye(2)[[0, 1, 1]]
    merge_01 = np.eye(2)[[0, 0, 1]]
    incomparable = is_more_capable(bc_from_kernels(merge_12, merge_01), grid_k=8)
    assert incomparable.verdict == MoreCapableVerdict.CERTIFIED_FALSE


def test_degraded_bc_is_never_refuted_as_more_capable():
    rng = np.random.default_rng(9)
    for _ in range(20):
        w1 = rng.dirichlet(np.ones(2), size=(2, 2))
        q = rng.dirichlet(np.ones(2), size=2)
        ch = BcStateChannel(rng.dirichlet(np.ones(2)), np.einsum("xsa,ab->xsab", w1, q))
        assert is_degraded(ch).degraded
        assert is_more_capable(ch).verdict != MoreCapableVerdict.CERTIFIED_FALSE


def test_check_outputs_independent(blackwell_bc):
    # Y1 depends only on the state
    f1 = np.array([[0, 1], [0, 1]])
    f2 = np.array([[0, 1], [1, 0]])
    holds = check_outputs_independent(BcStateChannel.from_deterministic([0.5, 0.5], f1, f2, 2, 2))
    assert holds.verdict == IndependenceVerdict.HOLDS

    same = np.array([[0], [1]])
    fails = check_outputs_independent(BcStateChannel.from_deterministic([1.0], same, same, 2, 2))
    assert fails.verdict == IndependenceVerdict.FAILS
    assert fails.pair == (0, 0, 1)
    assert fails.witness[0] == pytest.approx([0.5, 0.5])

    # inputs 0 and 2 of the Blackwell channel separate both outputs
    assert check_outputs_independent(blackwell_bc).pair == (0, 0, 2)


def test_check_outputs_independent_sampled():
    noisy = bc_from_kernels(bsc(0.1), np.full((2, 2), 0.5))
    assert check_outputs_independent(noisy).verdict == IndependenceVerdict.SAMPLED_ONLY
    copies = bc_from_kernels(bsc(0.1), bsc(0.1))
    assert check_outputs_independent(copies).verdict == IndependenceVerdict.FAILS


def test_with_receiver_csi(erasure_bc):
    lifted = erasure_bc.with_receiver_csi("Y1")
    assert lifted.sizes["Y1"] == 4
    assert is_deterministic(lifted).outputs["Y1"]
    with pytest.raises(DimensionMismatchError):
        erasure_bc.with_receiver_csi("Y3")


def test_parse_channel_spec(tmp_path):
    ch = load_channel_spec(write_spec(tmp_path / "xor.toml", XOR_SPEC))
    assert ch.kind == ChannelKind.SINGLE
    assert ch.sizes == {"X": 2, "S": 2, "Y": 2}
    assert is_deterministic(ch).maps["Y"].tolist() == XOR


def test_malformed_row_reports_index():
    text = XOR_SPEC.replace("[[0, 1], [1, 0]]]", "[[0, 0.9], [1, 0]]]")
    with pytest.raises(ChannelSpecError) as exc:
        parse_channel_spec(text)
    assert exc.value.row == 2
    assert "row 2" in str(exc.value)


@pytest.mark.parametrize(
    "text, match",
    [
        (XOR_SPEC.replace('kind = "single"', ""), "kind"),
        (XOR_SPEC.replace('"single"', '"tree"'), "Unknown channel kind"),
        (XOR_SPEC.replace("X = 2", "X = 9"), "cap"),
        (XOR_SPEC.replace("[0.5, 0.5]", "[0.5, 0.4]"), "state_pmf"),
        (XOR_SPEC.replace("[0.5, 0.5]", "[1.0]"), "entries"),
        ("kind = [", "Invalid TOML"),
    ],
)
def test_invalid_specs(text, match):
    with pytest.raises(ChannelSpecError, match=match):
        parse_channel_spec(text)


def test_save_channel_spec(tmp_path, erasure_bc, correlated_xor_mac):
    for ch in (erasure_bc, correlated_xor_mac):
        outfile = tmp_path / f"{ch.kind.value}.toml"
        save_channel_spec(ch, outfile)
        assert "index order" in outfile.read_text()
        loaded = load_channel_spec(outfile)
        assert loaded.kind == ch.kind
        assert loaded.transition == pytest.approx(ch.transition)
        assert loaded.state_table == pytest.approx(ch.state_table)
