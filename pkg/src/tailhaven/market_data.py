"""Daily price ingestion, calendar alignment and return construction."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from datetime import date
from typing import BinaryIO, Iterable, Optional, Union

import numpy as np

from .errors import (
    DuplicateDate,
    EmptySeries,
    MalformedHeader,
    NonPositivePrice,
    NoOverlap,
    SeriesTooShort,
    UnparsableRow,
    ZeroVariance,
)

PRICE_HEADER = ("Date", "Open", "High", "Low", "Close", "Adj Close", "Volume")
PRICE_FIELDS = ("close", "adj_close")
MIN_COMMON_DATES = 31

_COLUMNS = ("open", "high", "low", "close", "adj_close")


@dataclass(frozen=True)
class PriceSeries:
    """Dated OHLCV rows of one instrument, ascending, closes strictly positive.

    Prices are stored column-wise as float arrays with NaN for missing values.
    ``dropped`` counts input rows discarded for a missing close.
    """

    instrument_id: str
    dates: tuple
    open: np.ndarray
    high: np.ndarray
    low: np.ndarray
    close: np.ndarray
    adj_close: np.ndarray
    volume: np.ndarray
    dropped: int = 0

    def __len__(self) -> int:
        return len(self.dates)

    def field(self, name: str) -> np.ndarray:
        if name not in PRICE_FIELDS:
            raise ValueError(f"unknown price field {name!r}")
        return getattr(self, name)


@dataclass(frozen=True)
class ReturnSeries:
    instrument_id: str
    dates: tuple
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class AlignedReturnPair:
    """Benchmark (quantile side) ``y`` and candidate ``x`` on one date vector."""

    series_y: ReturnSeries
    series_x: ReturnSeries
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.series_y.dates != self.series_x.dates:
            raise ValueError("series_y and series_x must share their dates")

    @property
    def dates(self) -> tuple:
        return self.series_y.dates

    @property
    def y(self) -> np.ndarray:
        return self.series_y.values

    @property
    def x(self) -> np.ndarray:
        return self.series_x.values

    def __len__(self) -> int:
        return len(self.series_y)


@dataclass(frozen=True)
class StandardizedSeries:
    instrument_id: str
    dates: tuple
    values: np.ndarray
    mu_hat: float
    sigma_hat: float

    def __len__(self) -> int:
        return len(self.dates)


def _parse_float(text: str, lineno: int, column: str) -> float:
    text = text.strip()
    if text == "" or text == "null":
        return math.nan
    try:
        value = float(text)
    except ValueError:
        raise UnparsableRow(lineno, f"{column} is not a number: {text!r}") from None
    if not math.isfinite(value):
        raise UnparsableRow(lineno, f"{column} is not finite: {text!r}")
    return value


def parse_price_csv(stream: Union[BinaryIO, bytes, str], instrument_id: str) -> PriceSeries:
    """Read a ``Date,Open,High,Low,Close,Adj Close,Volume`` file.

    Rows whose close is empty or the literal ``null`` are dropped and counted;
    everything else that fails to parse raises with the 1-based line number.
    """
    if isinstance(stream, (bytes, bytearray)):
        text = stream.decode("utf-8-sig")
    elif isinstance(stream, str):
        text = stream
    else:
        text = stream.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8-sig")
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedHeader("empty input") from None
    header = [h.strip().lstrip("﻿") for h in header]
    if tuple(header) != PRICE_HEADER:
        raise MalformedHeader(f"expected {','.join(PRICE_HEADER)}, got {','.join(header)}")

    rows = []
    dropped = 0
    for lineno, rec in enumerate(reader, start=2):
        if not rec or all(not cell.strip() for cell in rec):
            continue
        if len(rec) != len(PRICE_HEADER):
            raise UnparsableRow(lineno, f"expected {len(PRICE_HEADER)} fields, got {len(rec)}")
        try:
            day = date.fromisoformat(rec[0].strip())
        except ValueError:
            raise UnparsableRow(lineno, f"bad date {rec[0]!r}") from None
        prices = [_parse_float(v, lineno, c) for v, c in zip(rec[1:6], _COLUMNS)]
        volume = _parse_float(rec[6], lineno, "volume")
        if math.isnan(prices[3]):
            dropped += 1
            continue
        if prices[3] <= 0:
            raise NonPositivePrice(f"{instrument_id}: line {lineno}: close {prices[3]!r}")
        if not math.isnan(volume) and volume < 0:
            raise UnparsableRow(lineno, f"negative volume {volume!r}")
        rows.append((day, lineno, prices, volume))

    if not rows:
        raise EmptySeries(f"{instrument_id}: no rows with a close price")
    rows.sort(key=lambda r: r[0])
    for prev, cur in zip(rows, rows[1:]):
        if prev[0] == cur[0]:
            raise DuplicateDate(f"{instrument_id}: {cur[0].isoformat()} at lines {prev[1]} and {cur[1]}")

    cols = np.array([r[2] for r in rows], dtype=np.float64)
    return PriceSeries(
        instrument_id=instrument_id,
        dates=tuple(r[0] for r in rows),
        open=cols[:, 0],
        high=cols[:, 1],
        low=cols[:, 2],
        close=cols[:, 3],
        adj_close=cols[:, 4],
        volume=np.array([r[3] for r in rows], dtype=np.float64),
        dropped=dropped,
    )


def read_price_csv(path, instrument_id: Optional[str] = None) -> PriceSeries:
    from pathlib import Path

    path = Path(path)
    with open(path, "rb") as fh:
        return parse_price_csv(fh, instrument_id or path.stem)


def _window(series: PriceSeries, price_field: str, start: Optional[date], end: Optional[date]):
    """``{date: price}`` for rows in ``[start, end]`` with the field present."""
    prices = series.field(price_field)
    out = {}
    for d, p in zip(series.dates, prices):
        if (start is not None and d < start) or (end is not None and d > end):
            continue
        if math.isnan(p):
            continue
        if p <= 0:
            raise NonPositivePrice(f"{series.instrument_id}: {price_field} {p!r} on {d.isoformat()}")
        out[d] = p
    return out


def _transform(prices: np.ndarray, mode: str) -> np.ndarray:
    if mode == "returns":
        return np.log(prices[1:] / prices[:-1])
    if mode == "levels":
        return prices[1:].copy()
    raise ValueError(f"unknown mode {mode!r}")


def align_and_return(
    a: PriceSeries,
    b: PriceSeries,
    price_field: str = "close",
    start: Optional[date] = None,
    end: Optional[date] = None,
    *,
    a_mode: str = "returns",
    b_mode: str = "returns",
) -> AlignedReturnPair:
    """Intersect calendars on ``[start, end]``, then difference log prices.

    ``a`` becomes the quantile-side series ``y`` and ``b`` the candidate ``x``.
    Returns run between consecutive *common* dates, so moves on days only one
    market trades are folded into the next common date. A series in
    ``"levels"`` mode contributes its price on each common date after the
    first instead of a return.
    """
    pa = _window(a, price_field, start, end)
    pb = _window(b, price_field, start, end)
    if not pa or not pb:
        raise NoOverlap(f"{a.instrument_id}/{b.instrument_id}: a series is empty on the date range")
    common = sorted(pa.keys() & pb.keys())
    if len(common) < MIN_COMMON_DATES:
        raise NoOverlap(
            f"{a.instrument_id}/{b.instrument_id}: {len(common)} common dates, need {MIN_COMMON_DATES}"
        )
    va = _transform(np.array([pa[d] for d in common]), a_mode)
    vb = _transform(np.array([pb[d] for d in common]), b_mode)
    dates = tuple(common[1:])
    meta = {
        "common_dates": len(common),
        "n": len(dates),
        "y_dropped": a.dropped,
        "x_dropped": b.dropped,
        "y_mode": a_mode,
        "x_mode": b_mode,
        "price_field": price_field,
    }
    return AlignedReturnPair(
        ReturnSeries(a.instrument_id, dates, va),
        ReturnSeries(b.instrument_id, dates, vb),
        meta,
    )


def log_returns(
    series: PriceSeries,
    price_field: str = "close",
    start: Optional[date] = None,
    end: Optional[date] = None,
) -> ReturnSeries:
    """Log returns between consecutive rows of a single series."""
    p = _window(series, price_field, start, end)
    if len(p) < 2:
        raise SeriesTooShort(f"{series.instrument_id}: fewer than 2 prices on the date range")
    days = sorted(p)
    values = _transform(np.array([p[d] for d in days]), "returns")
    return ReturnSeries(series.instrument_id, tuple(days[1:]), values)


def standardize(r: ReturnSeries, mu: Optional[float] = None, sigma: Optional[float] = None) -> StandardizedSeries:
    """Demean and scale by the full-sample mean and n-1 standard deviation.

    Passing ``mu`` and ``sigma`` uses those moments instead.
    """
    values = np.asarray(r.values, dtype=np.float64)
    if len(values) < 2:
        raise SeriesTooShort(f"{r.instrument_id}: need at least 2 values to standardize")
    if (mu is None) != (sigma is None):
        raise ValueError("give both mu and sigma, or neither")
    if mu is None:
        if np.ptp(values) == 0:
            raise ZeroVariance(f"{r.instrument_id}: constant series")
        mu = float(values.mean())
        sigma = float(values.std(ddof=1))
    if not sigma > 0:
        raise ZeroVariance(f"{r.instrument_id}: sigma must be positive, got {sigma!r}")
    return StandardizedSeries(r.instrument_id, r.dates, (values - mu) / sigma, float(mu), float(sigma))


def aligned_rows(pair: AlignedReturnPair) -> Iterable[tuple]:
    for d, y, x in zip(pair.dates, pair.y, pair.x):
        yield d, float(y), float(x)


def parse_aligned_csv(stream: Union[BinaryIO, bytes, str], y_id: str = "y", x_id: str = "x") -> AlignedReturnPair:
    """Read the ``date,ret_y,ret_x`` inspection format back into a pair."""
    if isinstance(stream, (bytes, bytearray)):
        text = stream.decode("utf-8")
    elif isinstance(stream, str):
        text = stream
    else:
        text = stream.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
    reader = csv.reader(io.StringIO(text))
    header = [h.strip() for h in next(reader, [])]
    if header != ["date", "ret_y", "ret_x"]:
        raise MalformedHeader(f"expected date,ret_y,ret_x, got {','.join(header)}")
    dates, ys, xs = [], [], []
    for lineno, rec in enumerate(reader, start=2):
        if not rec:
            continue
        if len(rec) != 3:
            raise UnparsableRow(lineno, f"expected 3 fields, got {len(rec)}")
        try:
            d = date.fromisoformat(rec[0].strip())
        except ValueError:
            raise UnparsableRow(lineno, f"bad date {rec[0]!r}") from None
        if dates and d <= dates[-1]:
            raise DuplicateDate(f"line {lineno}: {d.isoformat()} not after {dates[-1].isoformat()}")
        dates.append(d)
        ys.append(_parse_float(rec[1], lineno, "ret_y"))
        xs.append(_parse_float(rec[2], lineno, "ret_x"))
    if not dates:
        raise EmptySeries("no rows in aligned file")
    y, x = np.array(ys), np.array(xs)
    if np.isnan(y).any() or np.isnan(x).any():
        raise UnparsableRow(0, "missing values in aligned file")
    dates = tuple(dates)
    return AlignedReturnPair(
        ReturnSeries(y_id, dates, y),
        ReturnSeries(x_id, dates, x),
        {"n": len(dates), "source": "aligned"},
    )
