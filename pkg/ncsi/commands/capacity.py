from __future__ import annotations

from typing import Optional

import click

from ncsi.capacity.singleuser import csirt_capacity, det_capacity, gp_capacity
from ncsi.channels.classify import is_deterministic
from ncsi.channels.models import ChannelKind
from ncsi.commands.options import (
    budget_options,
    budget_tag,
    card_options,
    load_channel,
    make_context,
    tol_option,
)


@click.group()
def capacity():
    """Capacity of channels with state known at the encoder."""


@capacity.command()
@click.argument("spec")
@card_options("u")
@budget_options
@tol_option
def single(
    spec: str,
    card_u: Optional[int] = None,
    cwd: str = ".",
    grid_k=None,
    restarts=None,
    refine_passes=None,
    seed=None,
    tol=None,
    verbose: bool = False,
):
    """Gel'fand-Pinsker capacity, the capacity with state at both ends and, for
    deterministic channels, the exact clean-writing capacity."""
    cfg, budget = make_context(cwd, verbose, grid_k, restarts, refine_passes, seed, tol)
    ch = load_channel(spec, cfg, ChannelKind.SINGLE)

    gp = gp_capacity(ch, budget, card_u)
    csirt = csirt_capacity(ch, tol=cfg.tol)
    parts = [f"gp={gp.value:.6f}", f"csirt={csirt.value:.6f}"]
    if is_deterministic(ch).deterministic:
        parts.append(f"det={det_capacity(ch):.6f}")
    click.echo(" ".join(parts) + f" {budget_tag(budget)} mode={gp.search.mode}")
