"""Log pseudo-likelihood, its maximum, and the PIC criterion."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np

from .counts import CountTable, count_blocks, table_pairs
from .lattice import Neighborhood


@dataclass(frozen=True)
class CriterionValue:
    """``pic = -log_mpl + penalty`` for one candidate neighborhood."""

    gamma: Neighborhood
    log_mpl: float
    penalty: float
    pic: float
    sample_volume: int

    @classmethod
    def build(cls, gamma, log_mpl, penalty, sample_volume):
        return cls(gamma, log_mpl, penalty, -log_mpl + penalty, sample_volume)


@numba.njit(cache=True, nogil=True)
def _mpl_sum(nfull, nmarg):
    # Neumaier compensated summation
    s = 0.0
    comp = 0.0
    for t in range(nfull.shape[0]):
        x = nfull[t] * math.log(nfull[t] / nmarg[t])
        u = s + x
        if abs(s) >= abs(x):
            comp += (s - u) + x
        else:
            comp += (x - u) + s
        s = u
    return s + comp


def mpl_from_pairs(nfull: np.ndarray, nmarg: np.ndarray) -> float:
    """``sum N(a(Γ,0)) log(N(a(Γ,0)) / N(a(Γ)))`` over aligned count pairs.

    Pairs must come in block-key order so that every counting route sums the
    same terms in the same order and returns bit-identical values.
    """
    if len(nfull) == 0:
        return 0.0
    return _mpl_sum(np.asarray(nfull, dtype=np.int64), np.asarray(nmarg, dtype=np.int64))


def log_mpl(table: CountTable) -> float:
    """Maximum log pseudo-likelihood; 0 for an empty table."""
    return mpl_from_pairs(*table_pairs(table))


def log_pl(table: CountTable, spec) -> float:
    """Log pseudo-likelihood of ``spec`` (a table on the same Γ).

    Returns ``-inf`` when an observed block has conditional probability 0.
    """
    if spec.gamma != table.gamma:
        raise ValueError(f"specification is on {spec.gamma}, table on {table.gamma}")
    if len(table.counts) == 0:
        return 0.0
    rows = spec.rows(table.blocks[:, :-1])
    q = rows[np.arange(len(rows)), table.blocks[:, -1]]
    if np.any(q[table.counts > 0] == 0):
        return -math.inf
    return math.fsum(table.counts * np.log(q))


def penalty(m: int, gamma_size: int, sample_volume: int, c: float = 1.0) -> float:
    """``c * m^|Γ| * log |Λ|``."""
    if sample_volume < 2:
        raise ValueError("sample volume must be at least 2")
    if c <= 0:
        raise ValueError("penalty multiplier c must be positive")
    try:
        blocks = float(m**gamma_size)
    except OverflowError:
        raise OverflowError(f"{m}^{gamma_size} does not fit a double") from None
    return c * blocks * math.log(sample_volume)


def pic(sample, gamma: Neighborhood, c: float = 1.0,
        width: Optional[int] = None) -> CriterionValue:
    """PIC of one candidate; ``width`` is passed to :func:`count_blocks`."""
    table = count_blocks(sample, gamma, width)
    return CriterionValue.build(gamma, log_mpl(table),
                                penalty(sample.m, len(gamma), sample.volume, c),
                                sample.volume)
