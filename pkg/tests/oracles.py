"""Independent brute-force references used by the test suite.

Nothing here calls into the counting or criterion code under test; the
window and the translate condition are checked site by site.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from functools import lru_cache

import numba
import numpy as np


@lru_cache(maxsize=None)
def ball_offsets(rho: float, d: int) -> np.ndarray:
    """Integer vectors with max-norm at most the real radius ``rho``."""
    r = int(math.ceil(rho)) + 1
    pts = [v for v in itertools.product(range(-r, r + 1), repeat=d)
           if max(abs(x) for x in v) <= rho]
    return np.array(pts, dtype=np.int64).reshape(-1, d)


def real_window_radius(volume: int, d: int) -> float:
    return math.log(volume) ** (1.0 / (2 * d))


@numba.njit(cache=True)
def _inside(c, lo, shape):
    for k in range(c.shape[0]):
        if c[k] - lo[k] < 0 or c[k] - lo[k] >= shape[k]:
            return False
    return True


@numba.njit(cache=True)
def _flat(c, lo, shape):
    f = 0
    for k in range(c.shape[0]):
        f = f * shape[k] + c[k] - lo[k]
    return f


@numba.njit(cache=True)
def _naive_keys(flat, lo, shape, offsets, ball, m):
    d = lo.shape[0]
    n = flat.shape[0]
    keys = np.empty(n, dtype=np.int64)
    k = 0
    site = np.empty(d, dtype=np.int64)
    other = np.empty(d, dtype=np.int64)
    for s in range(n):
        rem = s
        for a in range(d - 1, -1, -1):
            site[a] = lo[a] + rem % shape[a]
            rem //= shape[a]
        ok = True
        for b in range(ball.shape[0]):
            for a in range(d):
                other[a] = site[a] + ball[b, a]
            if not _inside(other, lo, shape):
                ok = False
                break
        if ok:
            for v in range(offsets.shape[0]):
                for a in range(d):
                    other[a] = site[a] + offsets[v, a]
                if not _inside(other, lo, shape):
                    ok = False
                    break
        if not ok:
            continue
        key = 0
        for v in range(offsets.shape[0]):
            for a in range(d):
                other[a] = site[a] + offsets[v, a]
            key = key * m + flat[_flat(other, lo, shape)]
        keys[k] = key * m + flat[_flat(site, lo, shape)]
        k += 1
    return keys[:k]


def naive_block_keys(symbols, lo, offsets, m: int, rho: float) -> np.ndarray:
    """Packed keys (offsets in order, center last) of every counted site.

    A site counts when the whole max-norm ball of real radius ``rho`` and
    every translate ``site + v`` lie inside the box ``[lo, lo + shape)``.
    """
    symbols = np.asarray(symbols)
    d = symbols.ndim
    offs = np.array(list(offsets), dtype=np.int64).reshape(-1, d)
    return _naive_keys(symbols.astype(np.int64).ravel(), np.array(lo, dtype=np.int64),
                       np.array(symbols.shape, dtype=np.int64), offs, ball_offsets(rho, d), m)


def naive_counts(symbols, lo, offsets, m: int, rho: float) -> tuple[np.ndarray, np.ndarray]:
    """Sorted distinct keys and their multiplicities."""
    return np.unique(naive_block_keys(symbols, lo, offsets, m, rho), return_counts=True)


def table_keys(blocks: np.ndarray, m: int) -> np.ndarray:
    width = blocks.shape[1]
    w = np.array([m ** (width - 1 - j) for j in range(width)], dtype=np.int64)
    return blocks.astype(np.int64) @ w


def naive_rows(symbols, lo, offsets, m, rho) -> Counter:
    """Counter over ``(a(Γ) ..., center)`` tuples."""
    width = len(list(offsets)) + 1
    out = Counter()
    for key in naive_block_keys(symbols, lo, offsets, m, rho).tolist():
        digits = []
        for _ in range(width):
            key, r = divmod(key, m)
            digits.append(r)
        out[tuple(reversed(digits))] += 1
    return out


def mpl_from_counter(rows: Counter) -> float:
    """``Σ N(a(Γ,0)) log(N(a(Γ,0)) / N(a(Γ)))`` from raw block tuples."""
    marg = Counter()
    for row, n in rows.items():
        marg[row[:-1]] += n
    return math.fsum(n * math.log(n / marg[row[:-1]]) for row, n in rows.items())


def pl_from_counter(rows: Counter, prob) -> float:
    """``Σ N(a(Γ,0)) log Q(center | a(Γ))`` with ``prob(block, center)``."""
    return math.fsum(n * math.log(prob(row[:-1], row[-1])) for row, n in rows.items())
