"""Deterministic, replicate-addressable random number generation.

All stochastic output of this package flows through counter-based Philox
streams so that every random quantity has a stable address:

    key     = (seed, purpose << 32 | unit)
    block r = the four 64-bit words at counter position r of that stream

One 256-bit block per replicate supplies the (at most four) uniforms a
replicate consumes. Because blocks are addressed by counter, replicate r can
be regenerated in isolation — or a contiguous range of replicates generated
by a worker — and the results are bit-identical to a single sequential pass.
``purpose`` namespaces independent uses (studies, bootstrap, ...) and
``unit`` separates populations or grid points within a use.

Incomplete 2x2 tables are drawn from the four cell probabilities by a chain
of conditional binomials (x11, then x10, then x01), each inverted through its
exact CDF. Inversion makes the draw a pure function of the uniforms, so
results do not depend on execution order, worker count, or library version
of a rejection sampler.
"""

from __future__ import annotations

import numpy as np
from numpy.random import Philox
from scipy.special import gammaln

__all__ = [
    "DEFAULT_SEED",
    "PURPOSE_STUDY",
    "PURPOSE_BOOTSTRAP",
    "PURPOSE_SCALING",
    "PURPOSE_SWEEP",
    "PURPOSE_BANDS",
    "key_for",
    "raw_blocks",
    "uniforms",
    "binomial_cdf",
    "draw_binomial",
    "draw_tables",
]

DEFAULT_SEED = 20260823

PURPOSE_STUDY = 0
PURPOSE_BOOTSTRAP = 1
PURPOSE_SCALING = 2
PURPOSE_SWEEP = 3
PURPOSE_BANDS = 4

_U64 = np.uint64
_INV_2_53 = 2.0**-53


def key_for(seed: int, purpose: int, unit: int) -> np.ndarray:
    """Philox key for a (seed, purpose, unit) stream address."""
    if not 0 <= purpose < 2**32:
        raise ValueError(f"purpose must fit in 32 bits, got {purpose}")
    if not 0 <= unit < 2**32:
        raise ValueError(f"unit must fit in 32 bits, got {unit}")
    return np.array([seed % 2**64, (purpose << 32) | unit], dtype=_U64)


def raw_blocks(seed: int, purpose: int, unit: int, count: int, start: int = 0) -> np.ndarray:
    """Raw 64-bit words for blocks [start, start + count), shape (count, 4).

    Seeking is done through the Philox counter, so ``raw_blocks(..., n, start=r)``
    equals rows r:r+n of ``raw_blocks(..., r + n)``.
    """
    gen = Philox(key=key_for(seed, purpose, unit), counter=[start, 0, 0, 0])
    return gen.random_raw(4 * count).reshape(count, 4)


def uniforms(seed: int, purpose: int, unit: int, count: int, start: int = 0) -> np.ndarray:
    """Uniform(0, 1) variates, shape (count, 4): one block per replicate.

    Each 64-bit word maps to a double via (word >> 11) * 2**-53, the standard
    53-bit mantissa construction; values lie in [0, 1).
    """
    raw = raw_blocks(seed, purpose, unit, count, start)
    return (raw >> _U64(11)).astype(float) * _INV_2_53


_cdf_cache: dict[tuple[int, float], np.ndarray] = {}
_CDF_CACHE_LIMIT = 1 << 16


def binomial_cdf(n: int, p: float) -> np.ndarray:
    """Exact Binomial(n, p) CDF over k = 0..n, with F[n] pinned to 1.

    Computed from log probabilities (stable for large n) and memoized: study
    sampling re-visits the same (n, p) pairs constantly.
    """
    key = (n, p)
    cached = _cdf_cache.get(key)
    if cached is not None:
        return cached
    k = np.arange(n + 1, dtype=float)
    logpmf = (
        gammaln(n + 1.0)
        - gammaln(k + 1.0)
        - gammaln(n - k + 1.0)
        + k * np.log(p)
        + (n - k) * np.log1p(-p)
    )
    f = np.cumsum(np.exp(logpmf - logpmf.max()))
    f /= f[-1]
    f[-1] = 1.0
    if len(_cdf_cache) >= _CDF_CACHE_LIMIT:
        _cdf_cache.clear()
    _cdf_cache[key] = f
    return f


def draw_binomial(n: np.ndarray, p: float, u: np.ndarray) -> np.ndarray:
    """Invert Binomial(n_i, p) at uniform u_i for each i.

    The trial counts may differ across entries; draws are grouped by unique
    count so each distinct CDF is built once.
    """
    n = np.asarray(n)
    u = np.asarray(u)
    out = np.zeros(n.shape, dtype=np.int64)
    if p <= 0.0:
        return out
    if p >= 1.0:
        return n.astype(np.int64)
    for n_val in np.unique(n):
        idx = np.nonzero(n == n_val)[0]
        if n_val == 0:
            continue
        f = binomial_cdf(int(n_val), p)
        out[idx] = np.searchsorted(f, u[idx], side="left")
    return out


def draw_tables(
    n: int, cells: tuple[float, float, float, float], u: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw incomplete 2x2 tables from cell probabilities by binomial chaining.

    Args:
        n: population size (trials of the underlying multinomial).
        cells: (p11, p10, p01, p00) summing to 1.
        u: uniforms of shape (count, >= 3); column j drives stage j.

    Returns:
        Arrays (x11, x10, x01) of shape (count,). The unobserved cell is
        n - x11 - x10 - x01 implicitly.
    """
    p11, p10, p01, _ = cells
    u = np.asarray(u)
    count = u.shape[0]
    x11 = draw_binomial(np.full(count, n, dtype=np.int64), p11, u[:, 0])
    x10 = draw_binomial(n - x11, _cond_prob(p10, 1.0 - p11), u[:, 1])
    x01 = draw_binomial(n - x11 - x10, _cond_prob(p01, 1.0 - p11 - p10), u[:, 2])
    return x11, x10, x01


def _cond_prob(num: float, denom: float) -> float:
    """Conditional stage probability num/denom clipped to [0, 1].

    A non-positive denominator means the earlier stages already exhaust the
    population, so no trials remain and the ratio value is irrelevant.
    """
    if denom <= 0.0:
        return 0.0
    return min(max(num / denom, 0.0), 1.0)
