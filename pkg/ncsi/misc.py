import csv
import functools
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np


class NcsiError(Exception):
    pass


class UnknownCoordinateError(NcsiError):
    pass


class DimensionMismatchError(NcsiError):
    pass


class InvalidDistributionError(NcsiError):
    pass


class ChannelSpecError(NcsiError):
    """A channel spec file cannot be parsed or fails validation.

    `row` is the flat index of the offending transition row (or None when the error is not
    tied to a row, e.g., a missing field).
    """

    def __init__(self, msg: str, row: Union[int, None] = None):
        super().__init__(msg)
        self.row = row


class ChannelStructureError(NcsiError):
    pass


class SingularCovarianceError(NcsiError):
    pass


# probabilities below this are treated as exact zeros
ZERO_TOL = 1e-12


def clamp_info(value: float) -> float:
    """Clamp a mutual information that is negative only due to round-off."""
    if -ZERO_TOL <= value < 0:
        return 0.0
    return value


def positive_part(value: float) -> float:
    return max(0.0, value)


def cache_method():
    """Memoise a method per instance, keyed on its positional and keyword arguments."""

    def wrapper(func):
        fn_name = func.__name__

        @functools.wraps(func)
        def fn(self, *args, **kwargs):
            if not hasattr(self, "_cache"):
                self._cache = {}
            k = (
                fn_name,
                args,
                tuple(sorted(f"{kw}={arg}" for kw, arg in kwargs.items())),
            )
            if k not in self._cache:
                self._cache[k] = func(self, *args, **kwargs)
            return self._cache[k]

        return fn

    return wrapper


def write_csv(
    outfile: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence[float]]
) -> None:
    """Write rows with a fixed float format so that identical runs give identical bytes."""
    with open(outfile, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt_float(x) for x in row])


def fmt_float(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.10f}"
