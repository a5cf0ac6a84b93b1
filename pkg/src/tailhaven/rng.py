"""SplitMix64 streams, vectorised over numpy ``uint64`` arrays.

The generator is Steele, Lea and Flood's SplitMix64 with the constants from
the public reference implementation. Output ``k`` (0-based) of the stream
seeded with ``s`` is ``mix64(s + (k + 1) * GOLDEN_GAMMA)``, so any slice of a
stream can be produced without iterating through the preceding values.
"""

import numpy as np

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1

_G = np.uint64(GOLDEN_GAMMA)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31 = np.uint64(30), np.uint64(27), np.uint64(31)
_S12, _S32 = np.uint64(12), np.uint64(32)


def mix64(z: int) -> int:
    """Scalar SplitMix64 finaliser on a Python int."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def splitmix64(seed: int, k: int) -> int:
    """Output ``k`` (0-based) of the SplitMix64 stream seeded with ``seed``."""
    return mix64((seed + (k + 1) * GOLDEN_GAMMA) & _MASK64)


def stream(seeds, start, count: int) -> np.ndarray:
    """Raw 64-bit outputs ``start .. start+count-1`` for one or many seeds.

    ``seeds`` and ``start`` may be scalars or 1-d arrays of equal length; the
    result has shape ``(len(seeds), count)`` for array input, ``(count,)``
    otherwise.
    """
    scalar = np.ndim(seeds) == 0
    s = np.atleast_1d(np.asarray(seeds, dtype=np.uint64))
    k0 = np.broadcast_to(np.atleast_1d(np.asarray(start, dtype=np.uint64)), s.shape)
    steps = np.arange(1, count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = s[:, None] + (k0[:, None] + steps[None, :]) * _G
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
    z ^= z >> _S31
    return z[0] if scalar else z


def uniform_open(raw: np.ndarray) -> np.ndarray:
    """Map raw outputs to cell midpoints of a 2**-52 grid, strictly inside (0, 1).

    52 bits, not 53: ``k + 0.5`` must stay exactly representable.
    """
    return ((raw >> _S12).astype(np.float64) + 0.5) * 2.0**-52


def bounded_index(raw: np.ndarray, n: int) -> np.ndarray:
    """Integers in ``[0, n)`` by multiply-high on the top 32 bits (``n < 2**32``)."""
    return (((raw >> _S32) * np.uint64(n)) >> _S32).astype(np.intp)


def standard_normal(seed: int, count: int) -> np.ndarray:
    """Box-Muller normals from the stream seeded with ``seed``.

    Uniform pairs are taken as consecutive stream outputs ``(2j, 2j+1)``;
    each pair yields a cosine and a sine variate, emitted in that order.
    """
    m = (count + 1) // 2
    u = uniform_open(stream(seed, 0, 2 * m)).reshape(m, 2)
    r = np.sqrt(-2.0 * np.log(u[:, 0]))
    theta = 2.0 * np.pi * u[:, 1]
    out = np.empty((m, 2))
    out[:, 0] = r * np.cos(theta)
    out[:, 1] = r * np.sin(theta)
    return out.ravel()[:count]
