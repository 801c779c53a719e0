from __future__ import annotations

from pathlib import Path
from typing import Union

import numpy as np
from loguru import logger
from tomlkit.api import comment, document, dumps, loads, nl, table
from tomlkit.exceptions import TOMLKitError

from ncsi.channels.models import (
    AnyChannel,
    BcStateChannel,
    ChannelKind,
    MacStateChannel,
    RelayStateChannel,
    StateChannel,
)
from ncsi.misc import ChannelSpecError, NcsiError

# rows of a spec file must sum to one within this tolerance
SPEC_ROW_TOL = 1e-6

INDEX_ORDER = {
    "single": "transition[x][s][y]",
    "mac": "transition[x1][x2][s1][s2][y] (or [y1][y2] for a product output Y = [n1, n2])",
    "bc": "transition[x][s][y1][y2]",
    "relay": "transition[x][xr][s][y][yr] (or [x][xr][s1][s2][y][yr] for a state pair)",
}


def load_channel_spec(infile: Union[str, Path], alphabet_cap: int = 6) -> AnyChannel:
    try:
        with open(infile, "r") as f:
            text = f.read()
    except OSError as e:
        raise ChannelSpecError(f"Cannot read channel spec {infile}: {e}") from e
    return parse_channel_spec(text, alphabet_cap)


def parse_channel_spec(text: str, alphabet_cap: int = 6) -> AnyChannel:
    try:
        cfg = loads(text).unwrap()
    except TOMLKitError as e:
        raise ChannelSpecError(f"Invalid TOML: {e}") from e

    if isinstance(cfg.get("alphabets"), dict):
        # keys written below the [alphabets] header belong to that table in TOML
        for key in ("state_pmf", "transition"):
            if key not in cfg and key in cfg["alphabets"]:
                cfg[key] = cfg["alphabets"].pop(key)
    for key in ("kind", "alphabets", "state_pmf", "transition"):
        if key not in cfg:
            raise ChannelSpecError(f"Missing field `{key}`")
    try:
        kind = ChannelKind(cfg["kind"])
    except ValueError:
        raise ChannelSpecError(
            f"Unknown channel kind {cfg['kind']}, expected one of {[k.value for k in ChannelKind]}"
        )

    alphabets = cfg["alphabets"]
    if kind == ChannelKind.SINGLE:
        input_names, output_names, state_names = ("X", "S"), ("Y",), ("S",)
    elif kind == ChannelKind.MAC:
        input_names, output_names, state_names = ("X1", "X2", "S1", "S2"), ("Y",), ("S1", "S2")
    elif kind == ChannelKind.BC:
        input_names, output_names, state_names = ("X", "S"), ("Y1", "Y2"), ("S",)
    else:
        state_names = ("S1", "S2") if "S1" in alphabets else ("S",)
        input_names, output_names = ("X", "Xr") + state_names, ("Y", "Yr")

    input_dims = tuple(_alphabet_size(alphabets, name, alphabet_cap) for name in input_names)
    output_dims: tuple[int, ...] = ()
    for name in output_names:
        size = _alphabet_dims(alphabets, name, alphabet_cap)
        if len(size) > 1 and kind != ChannelKind.MAC:
            raise ChannelSpecError(f"Only a MAC output may be declared as a product, got {name} = {list(size)}")
        output_dims += size
    state_dims = tuple(_alphabet_size(alphabets, name, alphabet_cap) for name in state_names)

    state_table = _array(cfg["state_pmf"], "state_pmf", int(np.prod(state_dims)))
    if np.any(state_table < 0) or abs(state_table.sum() - 1.0) > SPEC_ROW_TOL:
        raise ChannelSpecError(f"state_pmf sums to {state_table.sum()} instead of 1")
    state_table = (state_table / state_table.sum()).reshape(state_dims)

    n_rows = int(np.prod(input_dims))
    n_out = int(np.prod(output_dims))
    rows = _array(cfg["transition"], "transition", n_rows * n_out).reshape(n_rows, n_out)
    sums = rows.sum(axis=1)
    for i in range(n_rows):
        if np.any(rows[i] < 0) or abs(sums[i] - 1.0) > SPEC_ROW_TOL:
            raise ChannelSpecError(
                f"Transition row {i} (index {np.unravel_index(i, input_dims)} over {list(input_names)}) sums to {sums[i]:.6g}",
                row=i,
            )
    transition = (rows / sums[:, None]).reshape(input_dims + output_dims)

    try:
        if kind == ChannelKind.SINGLE:
            ch: AnyChannel = StateChannel(state_table, transition)
        elif kind == ChannelKind.MAC:
            ch = MacStateChannel(state_table, transition)
        elif kind == ChannelKind.BC:
            ch = BcStateChannel(state_table, transition)
        else:
            ch = RelayStateChannel(state_table, transition)
    except NcsiError as e:
        raise ChannelSpecError(str(e)) from e
    logger.debug("Loaded {}", ch)
    return ch


def _alphabet_dims(alphabets: dict, name: str, alphabet_cap: int) -> tuple[int, ...]:
    if name not in alphabets:
        raise ChannelSpecError(f"Missing alphabet size of {name}")
    value = alphabets[name]
    dims = tuple(value) if isinstance(value, list) else (value,)
    for dim in dims:
        if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
            raise ChannelSpecError(f"Alphabet size of {name} must be a positive integer, got {value}")
        if dim > alphabet_cap:
            raise ChannelSpecError(
                f"Alphabet {name} has {dim} symbols, above the configured cap of {alphabet_cap}"
            )
    return dims


def _alphabet_size(alphabets: dict, name: str, alphabet_cap: int) -> int:
    dims = _alphabet_dims(alphabets, name, alphabet_cap)
    if len(dims) != 1:
        raise ChannelSpecError(f"Alphabet {name} cannot be a product")
    return dims[0]


def _array(value, field: str, expected: int) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=np.float64).reshape(-1)
    except (TypeError, ValueError) as e:
        raise ChannelSpecError(f"`{field}` is not a regular numeric array: {e}") from e
    if arr.size != expected:
        raise ChannelSpecError(f"`{field}` has {arr.size} entries, expected {expected}")
    return arr


def save_channel_spec(ch: AnyChannel, outfile: Union[str, Path]) -> None:
    doc = document()
    doc.add(comment(f"index order: {INDEX_ORDER[ch.kind.value]}"))
    doc.add(comment("every innermost row is a pmf over the outputs"))
    doc.add("kind", ch.kind.value)

    sizes = ch.sizes
    tbl = table()
    for name in ch.inputs:
        tbl.add(name, sizes[name])
    if isinstance(ch, MacStateChannel) and ch.is_product_output:
        tbl.add("Y", list(ch.output_dims))
    else:
        for name in ch.outputs:
            tbl.add(name, sizes[name])
    doc.add("state_pmf", ch.state_table.reshape(-1).tolist())
    doc.add("transition", ch.transition.tolist())
    doc.add(nl())
    doc.add("alphabets", tbl)

    with open(outfile, "w") as f:
        f.write(dumps(doc))
