from __future__ import annotations

import os
import sys
from typing import Optional

import click
from loguru import logger

from ncsi.channels.models import AnyChannel, ChannelKind
from ncsi.channels.specfile import load_channel_spec
from ncsi.config import NcsiConfig
from ncsi.misc import ChannelSpecError
from ncsi.optimizer.candidate import SearchBudget


def budget_options(func):
    """Search budget, reproducibility and verbosity flags shared by the commands."""
    options = [
        click.option("--cwd", default=".", help="Override current working directory"),
        click.option("--grid-k", type=int, default=None, help="Simplex grid resolution"),
        click.option("--restarts", type=int, default=None, help="Random restarts"),
        click.option("--refine-passes", type=int, default=None, help="Refinement passes per start"),
        click.option("--seed", type=int, default=None, help="Seed of every random stream"),
        click.option("-v", "--verbose", is_flag=True, help="increase verbosity"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def tol_option(func):
    return click.option(
        "--tol", type=float, default=None, help="Tolerance of capacity iterations and region inclusion tests"
    )(func)


def card_options(*names: str):
    def decorator(func):
        for name in reversed(names):
            func = click.option(
                f"--card-{name}", type=int, default=None, help=f"Alphabet size of the auxiliary {name.upper()}"
            )(func)
        return func

    return decorator


def setup_logging(verbose: bool) -> None:
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if verbose else "WARNING")


def make_context(
    cwd: str,
    verbose: bool,
    grid_k: Optional[int] = None,
    restarts: Optional[int] = None,
    refine_passes: Optional[int] = None,
    seed: Optional[int] = None,
    tol: Optional[float] = None,
) -> tuple[NcsiConfig, SearchBudget]:
    """Configuration of `cwd` with the command-line overrides applied."""
    setup_logging(verbose)
    cfg = NcsiConfig.from_dir(os.path.abspath(cwd))
    if verbose:
        cfg.progress = True
    if tol is not None:
        cfg.tol = tol
    try:
        budget = cfg.budget(grid_k, restarts, refine_passes, seed)
    except ValueError as e:
        raise click.BadParameter(str(e))
    logger.info("Resolved budget: {}", budget.describe())
    return cfg, budget


def load_channel(path: str, cfg: NcsiConfig, kind: Optional[ChannelKind] = None) -> AnyChannel:
    ch = load_channel_spec(path, cfg.alphabet_cap)
    if kind is not None and ch.kind != kind:
        raise ChannelSpecError(f"{path} describes a {ch.kind.value} channel, expected {kind.value}")
    return ch


def budget_tag(budget: SearchBudget) -> str:
    return f"[{budget.describe()}]"
