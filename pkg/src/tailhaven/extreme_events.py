"""Threshold exceedances of standardized returns and their rolling counts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SeriesTooShort

DIRECTIONS = ("negative", "absolute")


@dataclass(frozen=True)
class ExtremeCountSeries:
    """Trailing-window event counts, defined from the ``window``-th observation on."""

    threshold_k: float
    direction: str
    window: int
    dates: tuple
    counts: np.ndarray

    def __len__(self) -> int:
        return len(self.dates)


def exceedances(values: np.ndarray, k: float, direction: str = "negative") -> np.ndarray:
    """Boolean event indicator: ``z <= -k`` or, in absolute mode, ``|z| >= k``."""
    values = np.asarray(values, dtype=np.float64)
    if direction == "negative":
        return values <= -k
    if direction == "absolute":
        return np.abs(values) >= k
    raise ConfigError(f"direction must be one of {DIRECTIONS}, got {direction!r}")


def count_extremes(z, k: float, direction: str = "negative", window: int = 500) -> ExtremeCountSeries:
    """Number of events among the last ``window`` observations at each date.

    ``z`` is a :class:`~tailhaven.market_data.StandardizedSeries`.
    """
    if not k > 0:
        raise ConfigError(f"threshold k must be positive, got {k!r}")
    if int(window) != window or window < 1:
        raise ConfigError(f"window must be a positive integer, got {window!r}")
    window = int(window)
    if len(z.values) < window:
        raise SeriesTooShort(f"{len(z.values)} observations, window needs {window}")
    events = exceedances(z.values, k, direction).astype(np.int64)
    csum = np.concatenate([[0], np.cumsum(events)])
    counts = csum[window:] - csum[:-window]
    return ExtremeCountSeries(float(k), direction, window, tuple(z.dates[window - 1:]), counts)
