"""I.i.d. bootstrap over the time index.

Replicate ``k`` draws its indices from a SplitMix64 stream seeded with
``derive_replicate_seed(master_seed, k)``; a degenerate draw (constant ``x``)
continues the same stream for the redraw. Results therefore depend only on the
data, the grid and the config, never on how replicates are scheduled.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import rng
from .errors import ConfigError, DegenerateResample
from .quantile_stats import check_grid, qcor_curve, qcor_sorted_rows, quantile_sorted

MAX_REDRAWS = 100
CHUNK = 64
THREADS_ENV = "TAILHAVEN_THREADS"


@dataclass(frozen=True)
class BootstrapConfig:
    replications: int = 1000
    ci_level: float = 0.90
    master_seed: int = 0

    def __post_init__(self):
        if int(self.replications) != self.replications or self.replications < 1:
            raise ConfigError(f"replications must be a positive integer, got {self.replications!r}")
        if not 0.0 < self.ci_level < 1.0:
            raise ConfigError(f"ci_level must lie in (0, 1), got {self.ci_level!r}")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ConfigError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed!r}")


@dataclass(frozen=True)
class QuantileCurve:
    """Per-level summary of a bootstrap run; arrays are aligned with ``taus``.

    ``point`` is the bootstrap mean (the curve one plots); ``plain`` is the
    estimate on the original sample.
    """

    taus: np.ndarray
    point: np.ndarray
    mean_boot: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    plain: np.ndarray
    n: int
    replications: int
    ci_level: float
    master_seed: int
    redraws: int = 0
    replicates: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def records(self) -> list:
        return [
            {
                "tau": float(t),
                "point": float(p),
                "mean_boot": float(m),
                "lower": float(lo),
                "upper": float(hi),
                "plain": float(pl),
                "n": self.n,
                "replications": self.replications,
            }
            for t, p, m, lo, hi, pl in zip(self.taus, self.point, self.mean_boot, self.lower, self.upper, self.plain)
        ]


def derive_replicate_seed(master_seed: int, replicate_index: int) -> int:
    """Seed of replicate ``replicate_index``: output of SplitMix64 at that position.

    SplitMix64's finaliser is a bijection on 64-bit words, so distinct
    indices below 2**64 give distinct seeds.
    """
    return rng.splitmix64(int(master_seed), int(replicate_index))


def _replicate_seeds(master_seed: int, start: int, count: int) -> np.ndarray:
    return rng.stream(np.uint64(master_seed), start, count)


def resample_indices(seed: int, n: int, attempt: int = 0) -> np.ndarray:
    """Indices of draw ``attempt`` (0 = first) for a replicate with ``seed``."""
    raw = rng.stream(np.uint64(seed), attempt * n, n)
    return rng.bounded_index(raw, n)


def default_threads() -> int:
    value = os.environ.get(THREADS_ENV)
    if value:
        try:
            threads = int(value)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {value!r}") from None
        return max(threads, 1)
    return os.cpu_count() or 1


class _Sampler:
    """Holds the sample in ``y`` order so each replicate only sorts small integer keys."""

    def __init__(self, y: np.ndarray, x: np.ndarray, grid: np.ndarray, master_seed: int):
        self.n = len(y)
        order = np.argsort(y, kind="stable")
        self.ys = y[order]
        self.xs = x[order]
        # rank of every original observation within the sorted sample
        self.rank = np.empty(self.n, dtype=np.int16 if self.n <= np.iinfo(np.int16).max else np.int64)
        self.rank[order] = np.arange(self.n)
        self.grid = grid
        self.master_seed = master_seed

    def chunk(self, start: int, count: int):
        seeds = _replicate_seeds(self.master_seed, start, count)
        keys = self.rank[rng.bounded_index(rng.stream(seeds, 0, self.n), self.n)]
        keys.sort(axis=1, kind="stable")
        xs = self.xs[keys]
        redraws = 0
        attempt = np.zeros(count, dtype=np.int64)
        bad = np.flatnonzero(np.ptp(xs, axis=1) == 0)
        while bad.size:
            attempt[bad] += 1
            redraws += bad.size
            if attempt[bad].max() > MAX_REDRAWS:
                k = start + int(bad[np.argmax(attempt[bad])])
                raise DegenerateResample(f"replicate {k}: constant x after {MAX_REDRAWS} redraws")
            raw = rng.stream(seeds[bad], attempt[bad].astype(np.uint64) * np.uint64(self.n), self.n)
            redrawn = self.rank[rng.bounded_index(raw, self.n)]
            redrawn.sort(axis=1, kind="stable")
            keys[bad] = redrawn
            xs[bad] = self.xs[redrawn]
            bad = bad[np.ptp(xs[bad], axis=1) == 0]
        values = qcor_sorted_rows(self.ys[keys], xs, self.grid)
        return values, redraws


def bootstrap_qcor(
    pair,
    grid: Sequence[float],
    config: BootstrapConfig = BootstrapConfig(),
    *,
    threads: Optional[int] = None,
    keep_replicates: bool = False,
) -> QuantileCurve:
    """Percentile-bootstrap bands for the quantile correlation over ``grid``.

    One index resample per replicate is shared by every level. ``threads``
    defaults to ``$TAILHAVEN_THREADS`` or the CPU count and never changes the
    result.
    """
    taus = check_grid(grid)
    y = np.asarray(pair.y, dtype=np.float64)
    x = np.asarray(pair.x, dtype=np.float64)
    plain = qcor_curve(y, x, taus)  # raises for a degenerate original sample

    sampler = _Sampler(y, x, taus, int(config.master_seed))
    reps = int(config.replications)
    starts = list(range(0, reps, CHUNK))
    jobs = [(s, min(CHUNK, reps - s)) for s in starts]
    threads = threads or default_threads()
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda job: sampler.chunk(*job), jobs))
    else:
        results = [sampler.chunk(*job) for job in jobs]

    values = np.concatenate([r[0] for r in results], axis=0)
    redraws = sum(r[1] for r in results)
    mean_boot = values.mean(axis=0)
    alpha = (1.0 - config.ci_level) / 2.0
    ordered = np.sort(values, axis=0).T
    lower = quantile_sorted(ordered, alpha)
    upper = quantile_sorted(ordered, 1.0 - alpha)
    return QuantileCurve(
        taus=taus,
        point=mean_boot.copy(),
        mean_boot=mean_boot,
        lower=lower,
        upper=upper,
        plain=plain,
        n=len(y),
        replications=reps,
        ci_level=float(config.ci_level),
        master_seed=int(config.master_seed),
        redraws=redraws,
        replicates=values if keep_replicates else None,
    )
