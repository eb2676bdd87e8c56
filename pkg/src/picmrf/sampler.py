"""Single-site heat-bath Gibbs sampling of a potential on a finite torus."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numba
import numpy as np

from .lattice import Region
from .model import Potential

MASK64 = (1 << 64) - 1


@dataclass
class Sample:
    """Symbols on a box region, stored as an array shaped like the region.

    Row-major flattening (``symbols.ravel()``) gives the last coordinate fastest.
    """

    region: Region
    symbols: np.ndarray
    m: int
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        sym = np.asarray(self.symbols)
        if sym.shape != self.region.shape:
            sym = sym.reshape(self.region.shape)
        if sym.size and (sym.min() < 0 or sym.max() >= self.m):
            raise ValueError(f"symbols must lie in [0, {self.m})")
        self.symbols = sym.astype(np.uint8 if self.m <= 256 else np.int64)

    @property
    def d(self) -> int:
        return self.region.d

    @property
    def volume(self) -> int:
        return self.region.volume

    def __eq__(self, other) -> bool:
        if not isinstance(other, Sample):
            return NotImplemented
        return (self.region == other.region and self.m == other.m
                and np.array_equal(self.symbols, other.symbols)
                and self.provenance == other.provenance)

    def relabel(self, perm: Sequence[int]) -> "Sample":
        perm = np.asarray(perm)
        return Sample(self.region, perm[self.symbols], self.m, dict(self.provenance))


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, index: int) -> int:
    """Per-replicate seed mixed from a master seed and a replicate index."""
    return splitmix64((master & MASK64) ^ splitmix64(index & MASK64))


def neighbor_table(p: Potential, shape: Sequence[int]):
    """Flat torus indices of ``i + v`` and ``i - v`` for each active pair term.

    Returns ``(nbr, coupling)`` with ``nbr`` of shape ``(n_sites, 2 * n_terms)``.
    """
    shape = tuple(shape)
    idx = np.arange(int(np.prod(shape))).reshape(shape)
    cols, coup = [], []
    axes = tuple(range(len(shape)))
    for v, c in p.active_terms:
        for sign in (1, -1):
            shifted = np.roll(idx, shift=tuple(-sign * x for x in v), axis=axes)
            cols.append(shifted.ravel())
            coup.append(c)
    if not cols:
        return np.zeros((idx.size, 0), dtype=np.int64), np.zeros(0)
    return np.stack(cols, axis=1).astype(np.int64), np.asarray(coup, dtype=float)


@numba.njit(cache=True)
def site_conditional(x, i, nbr, coup, J, fld, out):
    """Heat-bath conditional law of site ``i`` given the rest, written to ``out``."""
    m = fld.shape[0]
    wmax = -np.inf
    for a in range(m):
        e = fld[a]
        for k in range(nbr.shape[1]):
            e += coup[k] * J[a, x[nbr[i, k]]]
        out[a] = e
        if e > wmax:
            wmax = e
    tot = 0.0
    for a in range(m):
        out[a] = np.exp(out[a] - wmax)
        tot += out[a]
    for a in range(m):
        out[a] /= tot


@numba.njit(cache=True)
def _sweep(x, u, nbr, coup, J, fld):
    m = fld.shape[0]
    probs = np.empty(m)
    for i in range(x.shape[0]):
        site_conditional(x, i, nbr, coup, J, fld, probs)
        acc = 0.0
        a = m - 1
        for b in range(m):
            acc += probs[b]
            if u[i] < acc:
                a = b
                break
        x[i] = a


def gibbs_sample(p: Potential, dims: Sequence[int], sweeps: int, burn_in: Optional[int] = None,
                 seed: int = 0, keep: Optional[list] = None) -> Sample:
    """Run ``burn_in + sweeps`` raster-scan heat-bath sweeps on the torus ``dims``.

    The chain starts from a uniform random configuration drawn from ``seed``.
    Each sweep draws one uniform per site, so the result is reproducible.
    ``burn_in`` defaults to ``10 * sweeps``. If ``keep`` is a list, the
    configuration after every post-burn-in sweep is appended to it.
    """
    dims = tuple(int(n) for n in dims)
    if len(dims) != p.d:
        raise ValueError(f"dims {dims} do not match dimension d={p.d}")
    if any(n <= 2 * p.range for n in dims):
        raise ValueError(f"axis too small: every length in {dims} must exceed "
                         f"2 * range = {2 * p.range}")
    if sweeps < 1:
        raise ValueError("sweeps must be at least 1")
    if burn_in is None:
        burn_in = 10 * sweeps
    if burn_in < 0:
        raise ValueError("burn_in must be nonnegative")
    rng = np.random.default_rng(seed & MASK64)
    n = int(np.prod(dims))
    x = rng.integers(0, p.m, size=n).astype(np.int64)
    nbr, coup = neighbor_table(p, dims)
    J = p.interaction()
    fld = np.asarray(p.field, dtype=float)
    for t in range(burn_in + sweeps):
        _sweep(x, rng.random(n), nbr, coup, J, fld)
        if keep is not None and t >= burn_in:
            keep.append(x.copy())
    prov = {"model": p.name, "seed": int(seed), "sweeps": int(sweeps), "burn_in": int(burn_in)}
    return Sample(Region.from_shape(dims), x.reshape(dims), p.m, prov)
