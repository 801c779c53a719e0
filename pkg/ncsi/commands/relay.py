from __future__ import annotations

from typing import Optional

import click
from loguru import logger

from ncsi.capacity.gaussian_relay import (
    ALPHA_STEP,
    GaussianRelayParams,
    alpha_sweep,
    dirty_paper_rate,
    gaussian_rc_capacity,
)
from ncsi.capacity.relay import (
    RelayResult,
    SecondTerm,
    df_relay_rate,
    pdf_relay_df_rate,
    pdf_relay_rate,
)
from ncsi.channels.models import ChannelKind
from ncsi.commands.options import (
    budget_options,
    budget_tag,
    card_options,
    load_channel,
    make_context,
    setup_logging,
)
from ncsi.misc import write_csv

SWEEP_HEADER = ("alpha", "term1", "term2", "min", "interference_free")


@click.group()
def relay():
    """Rates of relay channels with state known at the source and the relay."""


@relay.command()
@click.option("--P", "P", type=float, required=True, help="Source power")
@click.option("--Pr", "Pr", type=float, required=True, help="Relay power")
@click.option("--Nr", "Nr", type=float, required=True, help="Noise variance at the relay")
@click.option("--Nd", "Nd", type=float, required=True, help="Extra noise variance at the destination")
@click.option("--Psr", "Psr", type=float, default=0.0, help="Variance of the interference at the relay")
@click.option("--Psd", "Psd", type=float, default=0.0, help="Variance of the interference at the destination")
@click.option("--rho", type=float, default=0.0, help="Correlation of the two interferences")
@click.option("--alpha-sweep", "sweep_out", default=None, help="Write the rate terms over alpha to this CSV file")
@click.option("-v", "--verbose", is_flag=True, help="increase verbosity")
def gaussian(
    P: float,
    Pr: float,
    Nr: float,
    Nd: float,
    Psr: float = 0.0,
    Psd: float = 0.0,
    rho: float = 0.0,
    sweep_out: Optional[str] = None,
    verbose: bool = False,
):
    """Capacity of the degraded Gaussian relay channel with interference known at the source."""
    setup_logging(verbose)
    try:
        params = GaussianRelayParams(P, Pr, Nr, Nd, Psr, Psd, rho)
    except ValueError as e:
        raise click.BadParameter(str(e))

    value, alpha = gaussian_rc_capacity(params)
    rate, term1, term2 = dirty_paper_rate(params, alpha)
    tag = f"[alpha_step={ALPHA_STEP:g}]"
    click.echo(f"capacity={value:.9f} alpha={alpha:.8f} {tag}")
    click.echo(f"dirty_paper_rate={rate:.9f} term1={term1:.9f} term2={term2:.9f} alpha={alpha:.8f} {tag}")
    if sweep_out is not None:
        write_csv(sweep_out, SWEEP_HEADER, alpha_sweep(params))
        logger.info("Wrote alpha sweep to {}", sweep_out)


def _describe(result: RelayResult) -> str:
    terms = " ".join(f"term{i + 1}={t:.6f}" for i, t in enumerate(result.terms))
    flags = f"feasible={'true' if result.feasible else 'false'}"
    if result.provisional:
        flags += " provisional=true"
    return f"{terms} {flags}".strip()


@relay.command()
@click.argument("spec")
@click.option(
    "--mode",
    type=click.Choice(["pdf", "df", "df-pair"]),
    default="pdf",
    help="Partial decode-and-forward, decode-and-forward, or decode-and-forward with the relay knowing S1 only",
)
@click.option(
    "--second-term",
    type=click.Choice([t.value for t in SecondTerm]),
    default=SecondTerm.VERBATIM.value,
    help="Reading of the second partial decode-and-forward term",
)
@card_options("ur", "u", "v")
@budget_options
def discrete(
    spec: str,
    mode: str = "pdf",
    second_term: str = SecondTerm.VERBATIM.value,
    card_ur: Optional[int] = None,
    card_u: Optional[int] = None,
    card_v: Optional[int] = None,
    cwd: str = ".",
    grid_k=None,
    restarts=None,
    refine_passes=None,
    seed=None,
    verbose: bool = False,
):
    """Achievable rate of a discrete relay channel with state."""
    cfg, budget = make_context(cwd, verbose, grid_k, restarts, refine_passes, seed)
    ch = load_channel(spec, cfg, ChannelKind.RELAY)
    second = SecondTerm(second_term)
    tag = budget_tag(budget)

    if mode == "df-pair":
        result = df_relay_rate(ch, budget, card_ur, card_u)
        click.echo(f"df={result.value:.6f} {_describe(result)} {tag}")
        return

    df = pdf_relay_df_rate(ch, budget, card_ur, card_u, second)
    click.echo(f"df={df.value:.6f} {_describe(df)} {tag}")
    if mode == "pdf":
        result = pdf_relay_rate(ch, budget, card_ur, card_u, card_v, second, df=df)
        click.echo(f"pdf={result.value:.6f} {_describe(result)} second_term={second.value} {tag}")
