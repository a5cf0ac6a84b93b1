import sys
from datetime import date, timedelta
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tailhaven.market_data import AlignedReturnPair, ReturnSeries  # noqa: E402

HEADER = "Date,Open,High,Low,Close,Adj Close,Volume"


def price_csv(rows) -> str:
    """CSV text from ``(iso_date, close)`` or ``(iso_date, close, adj_close)`` tuples."""
    lines = [HEADER]
    for row in rows:
        day, close = row[0], row[1]
        adj = row[2] if len(row) > 2 else close
        lines.append(f"{day},{close},{close},{close},{close},{adj},1000")
    return "\n".join(lines) + "\n"


def daily_dates(start, n, step=1):
    d0 = date.fromisoformat(start)
    return [(d0 + timedelta(days=i * step)).isoformat() for i in range(n)]


def make_pair(y, x):
    d0 = date(2001, 1, 1)
    dates = tuple(d0 + timedelta(days=i) for i in range(len(y)))
    return AlignedReturnPair(ReturnSeries("y", dates, np.asarray(y, float)), ReturnSeries("x", dates, np.asarray(x, float)))


@pytest.fixture
def write_prices(tmp_path):
    def _write(name, rows):
        path = tmp_path / name
        path.write_text(price_csv(rows))
        return path

    return _write



def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
