from __future__ import annotations

from typing import Optional

import click

from ncsi.capacity.bc_compare import (
    common_rate_det,
    common_rate_negc,
    common_rate_ours,
    common_rate_ss,
)
from ncsi.channels.classify import is_deterministic
from ncsi.channels.models import ChannelKind
from ncsi.commands.options import (
    budget_options,
    budget_tag,
    card_options,
    load_channel,
    make_context,
)


@click.group()
def compare():
    """Compare the common-message rates of broadcast coding schemes."""


@compare.command()
@click.argument("spec")
@click.option(
    "--against",
    type=click.Choice(["ss", "negc"]),
    default="ss",
    help="Superposition-only scheme (ss) or binning of every layer (negc)",
)
@card_options("w", "v", "u")
@budget_options
def bc(
    spec: str,
    against: str = "ss",
    card_w: Optional[int] = None,
    card_v: Optional[int] = None,
    card_u: Optional[int] = None,
    cwd: str = ".",
    grid_k=None,
    restarts=None,
    refine_passes=None,
    seed=None,
    verbose: bool = False,
):
    """Largest common-message rate of the inner bound next to another scheme."""
    cfg, budget = make_context(cwd, verbose, grid_k, restarts, refine_passes, seed)
    ch = load_channel(spec, cfg, ChannelKind.BC)

    ss = common_rate_ss(ch, budget, card_w)
    ours = common_rate_ours(ch, budget, card_w, card_v, card_u, ss=ss)
    tag = budget_tag(budget)
    if against == "ss":
        click.echo(f"ss={ss.value:.6f} ours={ours.value:.6f} {tag}")
    else:
        negc = common_rate_negc(ch, budget, card_w, card_v, card_u, ours=ours)
        click.echo(f"ours={ours.value:.6f} negc={negc.value:.6f} {tag}")
    if is_deterministic(ch).deterministic:
        click.echo(f"det={common_rate_det(ch, budget).value:.6f} {tag}")
