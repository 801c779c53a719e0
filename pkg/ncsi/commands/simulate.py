from __future__ import annotations

from typing import Optional

import click

from ncsi.binning.code import DEFAULT_EPS, MAX_ALPHABET, BinningDesign, Typicality
from ncsi.binning.simulate import simulate as simulate_binning
from ncsi.capacity.singleuser import gp_capacity
from ncsi.channels.models import ChannelKind
from ncsi.commands.options import (
    budget_options,
    budget_tag,
    card_options,
    load_channel,
    make_context,
)


@click.group()
def simulate():
    """Monte Carlo simulation of coding schemes."""


@simulate.command()
@click.option("--channel", "spec", required=True, help="Channel spec file")
@click.option("--rate", type=float, required=True, help="Message rate R in bits per symbol")
@click.option("--excess", type=float, default=None, help="Bin rate R' (default I(U;S) + 3 eps)")
@click.option("--n", "n", type=int, required=True, help="Block length")
@click.option("--trials", type=int, default=200, help="Number of transmissions")
@click.option("--eps", type=float, default=DEFAULT_EPS, help="Typicality slack")
@click.option(
    "--typicality",
    type=click.Choice([t.value for t in Typicality]),
    default=Typicality.TOTAL_VARIATION.value,
    help="Joint typicality test: total variation (tv) or robust per-cell",
)
@click.option("--out", default=None, help="Write one CSV row per batch to this file")
@card_options("u")
@budget_options
def binning(
    spec: str,
    rate: float,
    n: int,
    excess: Optional[float] = None,
    trials: int = 200,
    eps: float = DEFAULT_EPS,
    typicality: str = Typicality.TOTAL_VARIATION.value,
    out: Optional[str] = None,
    card_u: Optional[int] = None,
    cwd: str = ".",
    grid_k=None,
    restarts=None,
    refine_passes=None,
    seed=None,
    verbose: bool = False,
):
    """Block error rate of random binning with the Gel'fand-Pinsker optimal input law."""
    cfg, budget = make_context(cwd, verbose, grid_k, restarts, refine_passes, seed)
    ch = load_channel(spec, cfg, ChannelKind.SINGLE)
    if card_u is None:
        card_u = min(MAX_ALPHABET, ch.nx * ch.ns)

    gp = gp_capacity(ch, budget, card_u)
    design = BinningDesign.from_candidate(ch, gp.argmax)
    try:
        result = simulate_binning(
            design,
            rate,
            n,
            trials,
            excess,
            eps,
            seed=budget.seed,
            outfile=out,
            progress=cfg.progress,
            typicality=Typicality(typicality),
        )
    except ValueError as e:
        raise click.BadParameter(str(e))

    click.echo(
        f"block_error_rate={result.block_error_rate:.4f} encode_failure_rate={result.encode_failure_rate:.4f} "
        f"trials={result.trials} typicality={typicality} gp={gp.value:.6f} codebook={'explicit' if result.explicit else 'typicality-count'} "
        f"{budget_tag(budget)}"
    )
