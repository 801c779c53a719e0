from __future__ import annotations

from typing import Optional

import click
from loguru import logger

from ncsi.capacity.bc import (
    bc_inner_region,
    bc_outer_region,
    degraded_det_capacity,
    det_bc_capacity,
    det_bc_common_capacity,
    more_capable_capacity,
    paired_cards,
    semidet_bc_capacity,
)
from ncsi.capacity.mac import (
    det_orth_mac_capacity,
    mac_inner_region,
    mac_outer_region,
    mac_outer_weak_region,
    orth_mac_capacity,
)
from ncsi.channels.models import ChannelKind
from ncsi.commands.options import (
    budget_options,
    budget_tag,
    card_options,
    load_channel,
    make_context,
    tol_option,
)
from ncsi.optimizer.candidate import SearchBudget
from ncsi.regions.geometry import includes, write_region_csv, write_support_csv
from ncsi.regions.region import RATE_NAMES, RateRegion

MAC_BOUNDS = ["inner", "outer", "outer-weak", "det-orth", "orth"]
BC_BOUNDS = ["inner", "outer", "det", "det-common", "semidet", "more-capable", "degraded-det"]


def output_options(func):
    func = click.option(
        "--support-out", default=None, help="Write support-function samples to this CSV file"
    )(func)
    func = click.option(
        "--convexify",
        type=click.Choice(["on", "off"]),
        default=None,
        help="Report the convex hull (on) or the raw union of polytopes (off)",
    )(func)
    func = click.option("--out", default=None, help="Write the region corners to this CSV file")(func)
    return func


def report_region(
    name: str,
    region: RateRegion,
    budget: SearchBudget,
    convexify: bool,
    out: Optional[str],
    support_out: Optional[str],
) -> None:
    region = region.as_convex(convexify)
    rates = RATE_NAMES[region.dim]
    corners = region.corners if region.convex else region.raw_corners
    tag = budget_tag(budget)
    click.echo(f"{name}: {len(corners)} corners convex={'on' if region.convex else 'off'} {tag}")
    for corner in corners:
        click.echo(" ".join(f"{r}={v:.6f}" for r, v in zip(rates, corner)) + f" {tag}")
    if out is not None:
        write_region_csv(region, out)
        logger.info("Wrote region corners to {}", out)
    if support_out is not None:
        write_support_csv(region, support_out)
        logger.info("Wrote support samples to {}", support_out)


def report_inclusion(outer: RateRegion, inner: RateRegion, tol: float) -> None:
    ok = includes(outer, inner, tol)
    if not ok:
        logger.warning("Outer bound misses corners of the inner bound at tol={}", tol)
    click.echo(f"includes_inner={'true' if ok else 'false'} tol={tol:g}")


@click.group()
def region():
    """Rate regions of multiple-access and broadcast channels."""


@region.command()
@click.argument("spec")
@click.option("--bound", type=click.Choice(MAC_BOUNDS), default="inner", help="Which region to compute")
@card_options("v")
@output_options
@budget_options
@tol_option
def mac(
    spec: str,
    bound: str = "inner",
    card_v: Optional[int] = None,
    out: Optional[str] = None,
    convexify: Optional[str] = None,
    support_out: Optional[str] = None,
    cwd: str = ".",
    grid_k=None,
    restarts=None,
    refine_passes=None,
    seed=None,
    tol=None,
    verbose: bool = False,
):
    """Inner and outer bounds, and capacity regions of orthogonal MACs."""
    cfg, budget = make_context(cwd, verbose, grid_k, restarts, refine_passes, seed, tol)
    ch = load_channel(spec, cfg, ChannelKind.MAC)

    inner = None
    if bound == "inner":
        result = mac_inner_region(ch, budget, card_v)
    elif bound in ("outer", "outer-weak"):
        inner = mac_inner_region(ch, budget, card_v)
        sweep = mac_outer_region if bound == "outer" else mac_outer_weak_region
        result = sweep(ch, budget, card_v, inner)
    elif bound == "det-orth":
        result = det_orth_mac_capacity(ch)
    else:
        result = orth_mac_capacity(ch, budget, card_v)

    convex = cfg.convexify if convexify is None else convexify == "on"
    report_region(f"mac {bound}", result, budget, convex, out, support_out)
    if inner is not None:
        report_inclusion(result, inner, cfg.tol)


@region.command()
@click.argument("spec")
@click.option("--bound", type=click.Choice(BC_BOUNDS), default="inner", help="Which region to compute")
@click.option(
    "--csi-at-strong",
    is_flag=True,
    help="degraded-det: the stronger receiver also observes the state",
)
@card_options("w", "v", "u")
@output_options
@budget_options
@tol_option
def bc(
    spec: str,
    bound: str = "inner",
    csi_at_strong: bool = False,
    card_w: Optional[int] = None,
    card_v: Optional[int] = None,
    card_u: Optional[int] = None,
    out: Optional[str] = None,
    convexify: Optional[str] = None,
    support_out: Optional[str] = None,
    cwd: str = ".",
    grid_k=None,
    restarts=None,
    refine_passes=None,
    seed=None,
    tol=None,
    verbose: bool = False,
):
    """Inner and outer bounds, and capacity regions of broadcast channels."""
    cfg, budget = make_context(cwd, verbose, grid_k, restarts, refine_passes, seed, tol)
    ch = load_channel(spec, cfg, ChannelKind.BC)

    inner = None
    if bound == "inner":
        result = bc_inner_region(ch, budget, card_w, card_v, card_u)
    elif bound == "outer":
        cards = paired_cards(ch, card_v, card_u)
        inner = bc_inner_region(ch, budget, *cards)
        result = bc_outer_region(ch, budget, card_v, card_u, inner)
    elif bound == "det":
        result = det_bc_capacity(ch, budget)
    elif bound == "det-common":
        result = det_bc_common_capacity(ch, budget)
    elif bound == "semidet":
        result = semidet_bc_capacity(ch, budget, card_u)
    elif bound == "more-capable":
        result = more_capable_capacity(ch, budget, card_u)
    else:
        result = degraded_det_capacity(ch, budget, card_u, csi_at_strong)

    convex = cfg.convexify if convexify is None else convexify == "on"
    report_region(f"bc {bound}", result, budget, convex, out, support_out)
    if inner is not None:
        report_inclusion(result, inner, cfg.tol)
