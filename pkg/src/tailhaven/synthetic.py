"""Seeded bivariate samples with known dependence, used as test oracles.

Normals come from :func:`tailhaven.rng.standard_normal` (SplitMix64 plus
Box-Muller). For a pair seeded with ``s`` the first ``n`` normals of stream
``derive_replicate_seed(s, 0)`` form ``z1`` and the next ``n`` form ``z2``;
the Student-t mixing variable uses stream ``derive_replicate_seed(s, 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np
from scipy.special import gammaincinv

from . import rng
from .errors import ConfigError, InvalidDof
from .market_data import AlignedReturnPair, ReturnSeries

SYNTHETIC_START = date(2000, 1, 3)


@dataclass(frozen=True)
class GaussianPairSpec:
    n: int
    rho: float
    seed: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ConfigError(f"n must be an integer >= 2, got {self.n!r}")
        if not -1.0 <= self.rho <= 1.0:
            raise ConfigError(f"rho must lie in [-1, 1], got {self.rho!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")


def synthetic_dates(n: int) -> tuple:
    return tuple(SYNTHETIC_START + timedelta(days=i) for i in range(n))


def _normal_pair(spec: GaussianPairSpec):
    z = rng.standard_normal(rng.splitmix64(int(spec.seed), 0), 2 * spec.n)
    z1, z2 = z[: spec.n], z[spec.n:]
    rho = float(spec.rho)
    return z1, rho * z1 + math.sqrt(1.0 - rho * rho) * z2


def _pair(y, x, label: str, meta: dict) -> AlignedReturnPair:
    dates = synthetic_dates(len(y))
    return AlignedReturnPair(ReturnSeries(f"{label}_y", dates, y), ReturnSeries(f"{label}_x", dates, x), meta)


def gen_bivariate_normal(spec: GaussianPairSpec) -> AlignedReturnPair:
    """``y = z1``, ``x = rho * z1 + sqrt(1 - rho**2) * z2`` on consecutive dates."""
    y, x = _normal_pair(spec)
    meta = {"model": "gaussian", "n": spec.n, "rho": spec.rho, "seed": int(spec.seed)}
    return _pair(y, x, "gaussian", meta)


def chi2_mixing(n: int, dof: float, seed: int) -> np.ndarray:
    """``chi2(dof) / dof`` draws by inverting the regularized lower incomplete gamma."""
    u = rng.uniform_open(rng.stream(rng.splitmix64(int(seed), 1), 0, n))
    return 2.0 * gammaincinv(dof / 2.0, u) / dof


def gen_student_t_pair(n: int, rho: float, dof: float, seed: int = 0) -> AlignedReturnPair:
    """Elliptical Student-t pair: the Gaussian pair of the same seed over a shared ``sqrt(W)``."""
    if not dof > 2:
        raise InvalidDof(f"dof must exceed 2, got {dof!r}")
    spec = GaussianPairSpec(n, rho, seed)
    y, x = _normal_pair(spec)
    scale = np.sqrt(chi2_mixing(spec.n, float(dof), spec.seed))
    meta = {"model": "student-t", "n": n, "rho": rho, "dof": dof, "seed": int(seed)}
    return _pair(y / scale, x / scale, "student_t", meta)
