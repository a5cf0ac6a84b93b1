"""Empirical quantiles and the quantile correlation.

For a conditioning series ``y``, a candidate series ``x`` and a level ``tau``
the quantile correlation is::

    qcor = mean(psi(y - Q, tau) * (x - mean(x))) / sqrt((tau - tau**2) * mean((x - mean(x))**2))

where ``Q`` is the type-7 ``tau``-quantile of ``y`` and ``psi(w) = tau - 1[w < 0]``.
Observations tied with ``Q`` count as above it. The normaliser uses the
analytic variance ``tau - tau**2`` of the indicator, not its sample variance.

``y < Q`` is decided against the exact interpolated value, from the order
statistics, rather than against ``Q`` rounded to double: when two order
statistics are close relative to their magnitude the rounded ``Q`` can land on
the lower one and silently drop it from the exceedance set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptySample, InvalidQuantileLevel, SampleTooSmall, ZeroVariance

MIN_SAMPLE = 30


def check_tau(tau: float) -> float:
    tau = float(tau)
    if not 0.0 < tau < 1.0:
        raise InvalidQuantileLevel(f"tau must lie in (0, 1), got {tau!r}")
    return tau


def check_grid(taus: Sequence[float]) -> np.ndarray:
    grid = np.asarray([check_tau(t) for t in taus], dtype=np.float64)
    if grid.size == 0:
        raise InvalidQuantileLevel("empty tau grid")
    if np.any(np.diff(grid) <= 0):
        raise InvalidQuantileLevel("tau grid must be strictly increasing")
    return grid


@dataclass(frozen=True)
class QCorEstimate:
    tau: float
    value: float
    n: int


def _type7_positions(n: int, taus):
    h = (n - 1) * np.asarray(taus, dtype=np.float64)
    lo = np.floor(h).astype(np.intp)
    hi = np.minimum(lo + 1, n - 1)
    return lo, hi, h - lo


def quantile_sorted(sorted_values: np.ndarray, taus) -> np.ndarray:
    """Type-7 quantiles along the last axis of already sorted data."""
    n = sorted_values.shape[-1]
    lo, hi, frac = _type7_positions(n, taus)
    a = sorted_values[..., lo]
    b = sorted_values[..., hi]
    return a + frac * (b - a)


def empirical_quantile(sample: Sequence[float], tau: float) -> float:
    """Linear interpolation of order statistics at rank ``(n - 1) * tau + 1``.

    >>> empirical_quantile([1, 2, 3, 4], 0.5)
    2.5
    """
    values = np.sort(np.asarray(sample, dtype=np.float64).ravel())
    if values.size == 0:
        raise EmptySample("cannot take a quantile of an empty sample")
    return float(quantile_sorted(values, check_tau(tau)))


def psi(w: float, tau: float) -> float:
    return tau - 1.0 if w < 0 else tau


def below_quantile(y, tau: float) -> np.ndarray:
    """Mask of observations strictly below the exact type-7 ``tau``-quantile."""
    y = np.asarray(y, dtype=np.float64)
    ys = np.sort(y)
    lo, hi, frac = _type7_positions(len(ys), tau)
    if frac > 0 and ys[hi] > ys[lo]:
        return y <= ys[lo]
    return y < ys[lo]


def _check_xy(y: np.ndarray, x: np.ndarray, min_n: int = MIN_SAMPLE) -> None:
    if y.shape != x.shape or y.ndim != 1:
        raise ValueError("y and x must be 1-d arrays of equal length")
    if y.size < max(min_n, 2):
        raise SampleTooSmall(f"need at least {min_n} observations, got {y.size}")
    if np.ptp(x) == 0:
        raise ZeroVariance("candidate series x is constant")


def quantile_correlation(y, x, tau: float, *, min_n: int = MIN_SAMPLE) -> float:
    """Quantile correlation of ``x`` with the ``tau``-quantile exceedance of ``y``.

    ``min_n`` lowers the sample-size floor, for hand-checkable toy samples.
    """
    y = np.asarray(y, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    tau = check_tau(tau)
    _check_xy(y, x, min_n)
    xc = x - x.mean()
    weights = np.where(below_quantile(y, tau), tau - 1.0, tau)
    num = np.mean(weights * xc)
    den = math.sqrt((tau - tau * tau) * np.mean(xc * xc))
    return float(num / den)


def qcor(pair, tau: float) -> QCorEstimate:
    value = quantile_correlation(pair.y, pair.x, tau)
    return QCorEstimate(float(tau), value, len(pair))


def qcor_sorted_rows(ys: np.ndarray, xs: np.ndarray, taus: np.ndarray) -> np.ndarray:
    """Quantile correlations for many samples and levels at once.

    ``ys`` holds each sample's ``y`` sorted ascending along axis 1 and ``xs``
    the matching ``x`` values in the same order. Returns shape
    ``(rows, len(taus))``. Exceedance sums come from prefix sums of centred
    ``x``, so the cost per row is one pass instead of one pass per level.
    """
    rows, n = ys.shape
    lo, hi, frac = _type7_positions(n, taus)
    ylo = ys[:, lo]

    # index where each run of tied y values starts
    idx = np.arange(n)
    starts = np.empty(ys.shape, dtype=bool)
    starts[:, 0] = True
    np.not_equal(ys[:, 1:], ys[:, :-1], out=starts[:, 1:])
    run_start = np.maximum.accumulate(np.where(starts, idx, 0), axis=1)

    # count strictly below the exact quantile: everything up to ys[lo] when the
    # quantile sits above it, otherwise everything before ys[lo]'s run of ties
    above_lo = (frac > 0) & (ys[:, hi] > ylo)
    below = np.where(above_lo, lo + 1, run_start[:, lo])

    xc = xs - xs.mean(axis=1, keepdims=True)
    var = np.mean(xc * xc, axis=1)
    csum = np.cumsum(xc, axis=1)
    total = csum[:, -1:]
    padded = np.concatenate([np.zeros((rows, 1)), csum], axis=1)
    s_below = np.take_along_axis(padded, below, axis=1)

    num = (taus * total - s_below) / n
    den = np.sqrt((taus - taus * taus) * var[:, None])
    return num / den


def qcor_curve(y, x, taus: Sequence[float]) -> np.ndarray:
    """Quantile correlation of one sample over a grid of levels."""
    y = np.asarray(y, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    grid = check_grid(taus)
    _check_xy(y, x)
    order = np.argsort(y, kind="stable")
    return qcor_sorted_rows(y[order][None, :], x[order][None, :], grid)[0]
