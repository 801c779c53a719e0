from dataclasses import replace

import numpy as np
import pytest
from conftest import bsc, dirty_bsc

from ncsi.capacity.gaussian_relay import (
    DpcCoefficients,
    GaussianRelayParams,
    alpha_sweep,
    coherent_amplitude,
    dirty_paper_rate,
    dpc_vector,
    gaussian_rc_capacity,
    interference_free_rate,
    relay_full_state_capacity,
)
from ncsi.capacity.relay import (
    SecondTerm,
    df_relay_rate,
    pdf_feasible,
    pdf_relay_df_rate,
    pdf_relay_rate,
    pdf_shapes,
    pdf_terms,
)
from ncsi.capacity.singleuser import csirt_capacity
from ncsi.channels.models import RelayStateChannel
from ncsi.optimizer.candidate import CandidatePdf, SearchBudget


@pytest.fixture
def relay_budget() -> SearchBudget:
    return SearchBudget(grid_k=4, restarts=4, refine_passes=1, seed=0, grid_cap=2000)


def random_params(rng: np.random.Generator) -> GaussianRelayParams:
    return GaussianRelayParams(
        P=rng.uniform(0.1, 10),
        Pr=rng.uniform(0.1, 10),
        Nr=rng.uniform(0.1, 5),
        Nd=rng.uniform(0.1, 5),
        Psr=rng.uniform(0.1, 10),
        Psd=rng.uniform(0.1, 10),
        rho=rng.uniform(-0.9, 0.9),
    )


def test_dirty_paper_rate_matches_interference_free_rate():
    rng = np.random.default_rng(8)
    for _ in range(20):
        params = random_params(rng)
        for alpha in np.linspace(0.0, 1.0, 21):
            rate, _, _ = dirty_paper_rate(params, float(alpha))
            assert rate == pytest.approx(float(interference_free_rate(params, alpha)), abs=1e-9)


def test_dirty_paper_rate_ignores_interference():
    quiet = GaussianRelayParams(P=2.0, Pr=1.5, Nr=0.5, Nd=1.0, Psr=0.2, Psd=0.2)
    loud = GaussianRelayParams(P=2.0, Pr=1.5, Nr=0.5, Nd=1.0, Psr=8.0, Psd=3.0, rho=0.7)
    for alpha in (0.25, 0.6, 0.9):
        assert dirty_paper_rate(quiet, alpha)[0] == pytest.approx(dirty_paper_rate(loud, alpha)[0], abs=1e-9)


def test_gaussian_rc_capacity():
    value, alpha = gaussian_rc_capacity(GaussianRelayParams(P=1, Pr=1, Nr=1, Nd=1))
    assert value == pytest.approx(0.5, abs=1e-6)
    assert alpha == pytest.approx(1.0, abs=1e-3)

    # without relay power the destination link limits the rate
    value, _ = gaussian_rc_capacity(GaussianRelayParams(P=3, Pr=0, Nr=1, Nd=2))
    assert value == pytest.approx(0.5, abs=1e-6)

    params = GaussianRelayParams(P=4, Pr=2, Nr=1, Nd=0.5, Psr=1, Psd=1)
    value, alpha = gaussian_rc_capacity(params)
    grid = interference_free_rate(params, np.linspace(0, 1, 1001))
    assert value >= grid.max() - 1e-9
    assert relay_full_state_capacity(params) == pytest.approx(value)


def test_alpha_sweep():
    rows = alpha_sweep(GaussianRelayParams(P=1, Pr=1, Nr=1, Nd=1, Psr=1, Psd=1))
    assert len(rows) == 21
    assert rows[0][0] == 0.0 and rows[-1][0] == 1.0
    for alpha, term1, term2, rate, free in rows:
        assert rate == min(term1, term2)
        assert rate == pytest.approx(free, abs=1e-9)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"P": -1.0},
        {"Nr": 0.0},
        {"Nd": -2.0},
        {"Psr": -0.1},
        {"rho": 1.5},
    ],
)
def test_params_validation(kwargs):
    base = dict(P=1.0, Pr=1.0, Nr=1.0, Nd=1.0)
    base.update(kwargs)
    with pytest.raises(ValueError):
        GaussianRelayParams(**base)


def test_dpc_vector_rejects_alpha():
    with pytest.raises(ValueError, match="alpha"):
        dpc_vector(GaussianRelayParams(P=1, Pr=1, Nr=1, Nd=1), 1.5)


def copy_candidate(ch: RelayStateChannel, card: int = 2) -> CandidatePdf:
    """Ur = Xr and V = U = X, both inputs uniform and independent of the state."""
    shapes = pdf_shapes(ch, card, card, card)
    ns = ch.sizes["S"]
    relay = np.zeros((ns, card, 2))
    relay[:, 0, 0] = relay[:, 1, 1] = 0.5
    source = np.zeros((card * ns, card, card, 2))
    source[:, 0, 0, 0] = source[:, 1, 1, 1] = 0.5
    return CandidatePdf(shapes, [relay.reshape(ns, -1), source.reshape(card * ns, -1)])


def test_pdf_terms(clean_relay):
    j = clean_relay.joint(copy_candidate(clean_relay))
    assert pdf_feasible(j)
    assert pdf_terms(j, SecondTerm.VERBATIM) == pytest.approx((1.0, 2.0, 1.0), abs=1e-9)
    assert pdf_terms(j, SecondTerm.PLAUSIBLE) == pytest.approx((1.0, 1.0, 1.0), abs=1e-9)


def test_pdf_feasible_rejects_state_only_layers():
    ch = state_only_relay()
    shapes = pdf_shapes(ch, 2, 2, 2)
    relay = np.zeros((2, 2, 2))
    relay[:, 0, :] = 0.5
    # V = U = S, X uniform
    source = np.zeros((2, 2, 2, 2, 2))
    for ur, s in np.ndindex(2, 2):
        source[ur, s, s, s, :] = 0.5
    cand = CandidatePdf(shapes, [relay.reshape(2, -1), source.reshape(4, -1)])
    assert not pdf_feasible(ch.joint(cand))


def test_decode_and_forward_rates(clean_relay, relay_budget):
    df = pdf_relay_df_rate(clean_relay, relay_budget)
    assert df.feasible
    assert df.value == pytest.approx(1.0, abs=1e-9)
    assert not df.provisional
    assert len(df.terms) == 3

    pdf = pdf_relay_rate(clean_relay, relay_budget, df=df)
    assert pdf.value == pytest.approx(1.0, abs=1e-9)
    assert pdf.value >= df.value - 1e-12

    plausible = pdf_relay_rate(clean_relay, relay_budget, second=SecondTerm.PLAUSIBLE)
    assert plausible.value == pytest.approx(1.0, abs=1e-9)


def test_df_relay_rate_with_state_pair(clean_relay, relay_budget):
    result = df_relay_rate(clean_relay, relay_budget)
    assert result.value == pytest.approx(1.0, abs=1e-9)
    assert len(result.terms) == 2

    # the pair form of the same channel merges back for the partial scheme
    pair = RelayStateChannel(clean_relay.state_table[:, None], clean_relay.transition[:, :, :, None])
    assert pair.has_state_pair
    assert pdf_relay_df_rate(pair, relay_budget).value == pytest.approx(1.0, abs=1e-9)


def state_only_relay() -> RelayStateChannel:
    """Both outputs reveal the state and nothing else."""
    t = np.zeros((2, 2, 2, 2, 2))
    for x, xr, s in np.ndindex(2, 2, 2):
        t[x, xr, s, s, s] = 1.0
    return RelayStateChannel(np.array([0.5, 0.5]), t)


def test_state_only_relay_is_infeasible(relay_budget):
    ch = state_only_relay()
    for result in (pdf_relay_df_rate(ch, relay_budget, 2, 2), pdf_relay_rate(ch, relay_budget, 2, 2, 2)):
        assert result.value == 0.0
        assert not result.feasible
        assert result.argmax is None


def test_useless_relay_stays_below_single_user_capacity(relay_budget):
    # Y = X xor S xor Z with Z ~ Bern(0.1); the relay hears nothing and Xr is ignored
    t = np.zeros((2, 2, 2, 2, 2))
    for x, xr, s in np.ndindex(2, 2, 2):
        t[x, xr, s, :, 0] = bsc(0.1)[x ^ s]
    ch = RelayStateChannel(np.array([0.5, 0.5]), t)
    bound = csirt_capacity(dirty_bsc(0.1)).value
    assert bound == pytest.approx(1 + 0.1 * np.log2(0.1) + 0.9 * np.log2(0.9))

    for second in SecondTerm:
        result = pdf_relay_rate(ch, relay_budget, 2, 2, 2, second=second)
        assert result.value <= bound + 1e-9


@pytest.mark.parametrize("field, increasing", [("P", True), ("Pr", True), ("Nr", False), ("Nd", False)])
def test_gaussian_capacity_is_monotone(field, increasing):
    rng = np.random.default_rng(12)
    for _ in range(10):
        params = random_params(rng)
        values = []
        for scale in (0.5, 1.0, 2.0):
            scaled = replace(params, **{field: getattr(params, field) * scale})
            values.append(gaussian_rc_capacity(scaled)[0])
        diffs = np.diff(values) if increasing else -np.diff(values)
        assert np.all(diffs >= -1e-7)


def test_dpc_coefficients_describe_relay_codeword():
    rng = np.random.default_rng(13)
    for _ in range(10):
        params = random_params(rng)
        alpha = float(rng.uniform())
        coefs = DpcCoefficients.derive(params, alpha)
        coherent = np.sqrt((1 - alpha) * params.P * params.Pr)
        total = params.P + params.Pr + 2 * coherent + params.Nr + params.Nd
        # Ur = beta Sd + Xr before normalization
        assert coefs.beta_r * np.sqrt(params.Pr) == pytest.approx((params.Pr + coherent) / total)
        assert coefs.beta_c == pytest.approx(coefs.beta_2 * coherent_amplitude(params, alpha))
