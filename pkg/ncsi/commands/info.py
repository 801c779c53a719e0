from __future__ import annotations

import click

from ncsi.channels.classify import (
    check_outputs_independent,
    is_degraded,
    is_deterministic,
    is_more_capable,
    is_orthogonal,
    states_independent,
)
from ncsi.channels.models import ChannelKind
from ncsi.commands.options import budget_options, budget_tag, load_channel, make_context


def _flag(value: bool) -> str:
    return "true" if value else "false"


@click.command()
@click.argument("spec")
@budget_options
def info(
    spec: str,
    cwd: str = ".",
    grid_k=None,
    restarts=None,
    refine_passes=None,
    seed=None,
    verbose: bool = False,
):
    """Print the kind, alphabet sizes and structural properties of a channel."""
    cfg, budget = make_context(cwd, verbose, grid_k, restarts, refine_passes, seed)
    ch = load_channel(spec, cfg)

    click.echo(f"kind={ch.kind.value}")
    click.echo(" ".join(f"|{name}|={size}" for name, size in ch.sizes.items()))
    det = is_deterministic(ch)
    click.echo(f"deterministic={_flag(det.deterministic)}")

    if ch.kind == ChannelKind.MAC:
        orthogonal = ch.is_product_output and is_orthogonal(ch).orthogonal
        click.echo(f"orthogonal={_flag(orthogonal)}")
        click.echo(f"independent_states={_flag(states_independent(ch))}")
    elif ch.kind == ChannelKind.BC:
        for name in ("Y1", "Y2"):
            click.echo(f"deterministic_{name}={_flag(det.outputs[name])}")
        click.echo(f"degraded={_flag(is_degraded(ch).degraded)}")
        # both checks sample input laws, so they carry the budget
        capable = is_more_capable(ch, grid_k=budget.grid_k, seed=budget.seed)
        click.echo(f"more_capable={capable.verdict.value} {budget_tag(budget)}")
        cond = check_outputs_independent(ch, grid_k=budget.grid_k, seed=budget.seed)
        click.echo(f"outputs_independent_given_state={cond.verdict.value} {budget_tag(budget)}")
