"""Pair potentials, the one-point specification they induce, and a tiny-lattice oracle.

For two symbols the interaction is the spin product with symbol ``a`` mapped
to ``2a - 1``; for three or more symbols it is the equal-symbol indicator.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .lattice import Neighborhood, Site, is_positive, negate, norm

TINY_LIMIT = 2**20


def as_blocks(blocks, n: int) -> np.ndarray:
    """Blocks as an ``(k, n)`` int array; a flat input of length ``n`` is one block."""
    b = np.asarray(blocks, dtype=np.int64)
    if b.ndim == 1 and b.size == n:
        return b.reshape(1, n)
    if b.ndim == 2 and b.shape[1] == n:
        return b
    if n and b.size % n == 0:
        return b.reshape(-1, n)
    raise ValueError(f"cannot read blocks of width {n} from shape {b.shape}")


def all_blocks(m: int, n: int) -> np.ndarray:
    """Every block of length ``n`` over ``m`` symbols, in code order."""
    return np.array(list(itertools.product(range(m), repeat=n)), dtype=np.int64).reshape(m**n, n)


@dataclass(frozen=True)
class Potential:
    """Translation-invariant pair-plus-field potential on Z^d.

    The conditional weight of symbol ``a`` at a site is
    ``field[a] + sum_pairs coupling * (J(a, x[i+v]) + J(a, x[i-v]))``.
    """

    d: int
    m: int
    pair_terms: tuple[tuple[Site, float], ...] = ()
    field: tuple[float, ...] = ()
    name: str = "custom"

    def __post_init__(self):
        if self.d < 1 or self.m < 2:
            raise ValueError("need d >= 1 and m >= 2")
        canon = []
        seen = set()
        for offset, coupling in self.pair_terms:
            v = tuple(int(c) for c in offset)
            if len(v) != self.d or not any(v):
                raise ValueError(f"bad pair offset {offset}")
            if not is_positive(v):
                v = negate(v)
            if v in seen:
                raise ValueError(f"duplicate pair offset {v}")
            seen.add(v)
            canon.append((v, float(coupling)))
        object.__setattr__(self, "pair_terms", tuple(sorted(canon)))
        fld = tuple(float(f) for f in self.field) or (0.0,) * self.m
        if len(fld) != self.m:
            raise ValueError(f"field must have length m={self.m}")
        object.__setattr__(self, "field", fld)

    @property
    def active_terms(self) -> tuple[tuple[Site, float], ...]:
        return tuple((v, c) for v, c in self.pair_terms if c != 0.0)

    @property
    def gamma0(self) -> Neighborhood:
        """Offsets with nonzero coupling, together with their negatives."""
        return Neighborhood.from_half((v for v, _ in self.active_terms), self.d)

    @property
    def range(self) -> int:
        return max((norm(v) for v, _ in self.pair_terms), default=0)

    def interaction(self) -> np.ndarray:
        """``m x m`` matrix J(a, b)."""
        a = np.arange(self.m)
        if self.m == 2:
            s = 2.0 * a - 1.0
            return np.outer(s, s)
        return (a[:, None] == a[None, :]).astype(float)


def ising(d: int, beta: float, h: float = 0.0, range_: int = 1) -> Potential:
    """Ising model coupling each site to ``k e_j`` for ``k <= range_``."""
    terms = [(tuple(k if j == ax else 0 for j in range(d)), beta)
             for ax in range(d) for k in range(1, range_ + 1)]
    return Potential(d, 2, tuple(terms), (-h, h),
                     name=f"ising(beta={beta:g},h={h:g},range={range_})")


def potts(d: int, m: int, beta: float, range_: int = 1) -> Potential:
    terms = [(tuple(k if j == ax else 0 for j in range(d)), beta)
             for ax in range(d) for k in range(1, range_ + 1)]
    return Potential(d, m, tuple(terms), (0.0,) * m,
                     name=f"potts(m={m},beta={beta:g},range={range_})")


@dataclass(frozen=True)
class Specification:
    """Conditional table ``Q(a | a(Γ))``.

    ``table[code, a]`` where ``code`` packs the block ``a(Γ)`` in base m with
    the first canonical offset most significant.
    """

    gamma: Neighborhood
    m: int
    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float)
        if t.shape != (self.m ** len(self.gamma), self.m):
            raise ValueError(f"table shape {t.shape} does not match gamma and m")
        if np.any(t < 0) or not np.allclose(t.sum(axis=1), 1.0, atol=1e-12, rtol=0):
            raise ValueError("rows must be nonnegative and sum to 1")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @property
    def q_min(self) -> float:
        return float(self.table.min())

    def block_codes(self, blocks: np.ndarray) -> np.ndarray:
        blocks = as_blocks(blocks, len(self.gamma))
        w = self.m ** np.arange(len(self.gamma) - 1, -1, -1, dtype=np.int64)
        return blocks @ w

    def rows(self, blocks: np.ndarray) -> np.ndarray:
        """Conditional rows for blocks given on ``self.gamma``'s offsets."""
        return self.table[self.block_codes(blocks)]

    def lookup(self, gamma: Neighborhood, blocks: np.ndarray) -> np.ndarray:
        """Conditional rows for blocks observed on a Markov neighborhood ``gamma``.

        ``gamma`` must contain ``self.gamma``; extra coordinates are ignored.
        """
        if not self.gamma <= gamma:
            raise ValueError(f"{gamma} does not contain the specification's "
                             f"neighborhood {self.gamma}")
        pos = [gamma.offsets.index(v) for v in self.gamma.offsets]
        blocks = as_blocks(blocks, len(gamma))
        return self.rows(blocks[:, pos])

    def prob(self, center: int, block: Sequence[int]) -> float:
        return float(self.rows(np.asarray(block))[0, center])

    def permuted(self, perm: Sequence[int]) -> "Specification":
        """Table after relabelling every symbol ``a`` as ``perm[a]``."""
        perm = np.asarray(perm)
        n = len(self.gamma)
        blocks = all_blocks(self.m, n)
        new = np.empty_like(self.table)
        new[self.block_codes(perm[blocks])[:, None], perm[None, :]] = self.table
        return Specification(self.gamma, self.m, new)


def spec_from_potential(p: Potential) -> Specification:
    gamma = p.gamma0
    J = p.interaction()
    coupling = {v: c for v, c in p.active_terms}
    n = len(gamma)
    blocks = all_blocks(p.m, n)
    energy = np.tile(np.asarray(p.field), (len(blocks), 1))
    for j, v in enumerate(gamma.offsets):
        c = coupling[v if is_positive(v) else negate(v)]
        energy += c * J[:, blocks[:, j]].T
    energy -= energy.max(axis=1, keepdims=True)
    w = np.exp(energy)
    return Specification(gamma, p.m, w / w.sum(axis=1, keepdims=True))


def alpha_bound(q_min: float, d: int, m: int) -> float:
    """Strict upper bound on alpha that excludes overestimation asymptotically."""
    if not 0 < q_min <= 1.0 / m + 1e-15:
        raise ValueError(f"q_min must lie in (0, 1/m], got {q_min}")
    return q_min / (2 ** (3 * d) * math.e) * (m - 1) / (m * m * math.log(m * m + 1))


class TinyJoint:
    """Exact Gibbs distribution of a potential on a small box.

    ``probs`` is an array of shape ``(m,) * n_sites`` indexed by the symbols
    at the sites in row-major order.
    """

    def __init__(self, p: Potential, shape: Sequence[int], periodic: bool = True):
        shape = tuple(int(s) for s in shape)
        if len(shape) != p.d:
            raise ValueError("shape dimension does not match the potential")
        n = math.prod(shape)
        if p.m**n > TINY_LIMIT:
            raise ValueError(f"{p.m}^{n} configurations exceed the tiny-lattice limit")
        if periodic and any(s <= 2 * p.range for s in shape):
            # wraparound would alias distinct neighbor offsets
            raise ValueError(f"axis too small: {shape} needs every length > {2 * p.range}")
        self.potential = p
        self.shape = shape
        self.periodic = periodic
        self.n_sites = n
        self.m = p.m

        configs = np.array(list(itertools.product(range(p.m), repeat=n)),
                           dtype=np.int64).reshape((-1,) + shape)
        J = p.interaction()
        fld = np.asarray(p.field)
        energy = fld[configs].reshape(len(configs), -1).sum(axis=1)
        axes = tuple(range(1, p.d + 1))
        idx = np.indices(shape)
        for v, c in p.active_terms:
            if periodic:
                partner = np.roll(configs, shift=tuple(-x for x in v), axis=axes)
                energy += c * J[configs, partner].reshape(len(configs), -1).sum(axis=1)
            else:
                mask = np.ones(shape, dtype=bool)
                for k, x in enumerate(v):
                    mask &= (idx[k] + x >= 0) & (idx[k] + x < shape[k])
                partner = np.roll(configs, shift=tuple(-x for x in v), axis=axes)
                energy += c * (J[configs, partner] * mask).reshape(len(configs), -1).sum(axis=1)
        energy -= energy.max()
        w = np.exp(energy)
        self.probs = (w / w.sum()).reshape((p.m,) * n)

    def site_index(self, site: Site) -> int:
        return int(np.ravel_multi_index(tuple(site), self.shape))

    def marginal(self, sites: Sequence[int]) -> np.ndarray:
        """Joint law of the given site indices, axes in the given order."""
        sites = list(sites)
        if len(set(sites)) != len(sites):
            raise ValueError("duplicate sites")
        others = tuple(i for i in range(self.n_sites) if i not in sites)
        marg = self.probs.sum(axis=others) if others else self.probs
        kept = sorted(sites)
        return np.transpose(marg, [kept.index(i) for i in sites]) if sites else marg

    def conditional(self, delta: Sequence[int], phi: Sequence[int]) -> np.ndarray:
        """``Q(a(Δ) | a(Φ))`` as an array indexed ``[a(Δ)..., a(Φ)...]``."""
        if set(delta) & set(phi):
            raise ValueError("Δ and Φ must be disjoint")
        joint = self.marginal(list(delta) + list(phi))
        cond = joint.sum(axis=tuple(range(len(delta)))) if delta else joint
        return joint / cond

    def site_conditional(self, site: int) -> np.ndarray:
        """``Q(x_i = a | rest)`` for every configuration, shape ``(m,)*n``.

        Entry at configuration x is the conditional probability of ``x[site]``.
        """
        return self.probs / self.probs.sum(axis=site, keepdims=True)


def exact_joint_tiny(p: Potential, shape: Sequence[int], periodic: bool = True) -> TinyJoint:
    """Brute-force joint law; see :class:`TinyJoint`."""
    return TinyJoint(p, shape, periodic)
