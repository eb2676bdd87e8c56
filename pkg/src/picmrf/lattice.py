"""Sites, box regions, the shrunken counting window and neighborhoods.

Sites are plain tuples of ints. Regions are half-open axis-aligned boxes.
All logarithms are natural.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Optional

Site = tuple[int, ...]

DEFAULT_CANDIDATE_CAP = 2**20


class CandidateFamilyTooLarge(ValueError):
    """Raised when the candidate family would exceed the configured cap."""


def norm(site: Site) -> int:
    """Maximum norm of a site."""
    return max((abs(c) for c in site), default=0)


def is_positive(site: Site) -> bool:
    """True if the first nonzero coordinate is positive."""
    for c in site:
        if c:
            return c > 0
    return False


def negate(site: Site) -> Site:
    return tuple(-c for c in site)


@dataclass(frozen=True)
class Region:
    """Half-open box ``[lo, hi)`` in Z^d."""

    lo: Site
    hi: Site

    def __post_init__(self):
        if len(self.lo) != len(self.hi) or len(self.lo) < 1:
            raise ValueError("lo and hi must have the same dimension d >= 1")
        if any(h <= l for l, h in zip(self.lo, self.hi)):
            raise ValueError(f"empty box [{self.lo}, {self.hi})")

    @classmethod
    def from_shape(cls, shape: Iterable[int]) -> "Region":
        shape = tuple(int(s) for s in shape)
        return cls(tuple(0 for _ in shape), shape)

    @property
    def d(self) -> int:
        return len(self.lo)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(h - l for l, h in zip(self.lo, self.hi))

    @property
    def volume(self) -> int:
        return math.prod(self.shape)

    def __contains__(self, site: Site) -> bool:
        return all(l <= c < h for c, l, h in zip(site, self.lo, self.hi))

    def sites(self) -> Iterator[Site]:
        """Sites in row-major order (last coordinate fastest)."""
        return itertools.product(*(range(l, h) for l, h in zip(self.lo, self.hi)))

    def shrink(self, widths: Iterable[int]) -> Optional["Region"]:
        """Shrink every face of axis k by ``widths[k]``; None if exhausted."""
        widths = tuple(widths)
        lo = tuple(l + w for l, w in zip(self.lo, widths))
        hi = tuple(h - w for h, w in zip(self.hi, widths))
        if any(b <= a for a, b in zip(lo, hi)):
            return None
        return Region(lo, hi)

    def translate(self, shift: Site) -> "Region":
        return Region(
            tuple(l + s for l, s in zip(self.lo, shift)),
            tuple(h + s for h, s in zip(self.hi, shift)),
        )


def window_width(volume: int, d: int) -> int:
    """Radius ``floor(log(volume) ** (1/(2d)))`` of the window ball."""
    if volume < 1:
        raise ValueError("volume must be positive")
    return math.floor(math.log(volume) ** (1.0 / (2 * d)))


def window(region: Region) -> Optional[Region]:
    """Sites of ``region`` whose window ball lies inside ``region``.

    Returns None when the shrink exhausts some axis.
    """
    w = window_width(region.volume, region.d)
    return region.shrink([w] * region.d)


def radius_schedule(volume: int, alpha: float, d: int) -> int:
    """``floor(alpha^(1/2d) * ceil(log volume)^(1/2d))`` for a window volume."""
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if volume < 1:
        raise ValueError("volume must be positive")
    e = 1.0 / (2 * d)
    return math.floor(alpha**e * math.ceil(math.log(volume)) ** e)


@dataclass(frozen=True)
class Neighborhood:
    """Central-symmetric finite set of nonzero offsets, lexicographically sorted.

    Build through :meth:`from_offsets`; the constructor itself only validates.
    """

    offsets: tuple[Site, ...]
    d: int

    def __post_init__(self):
        offs = self.offsets
        if list(offs) != sorted(set(offs)):
            raise ValueError("offsets must be sorted and distinct")
        s = set(offs)
        for v in offs:
            if len(v) != self.d:
                raise ValueError(f"offset {v} does not have dimension {self.d}")
            if not any(v):
                raise ValueError("the origin cannot belong to a neighborhood")
            if negate(v) not in s:
                raise ValueError(f"not central-symmetric: {negate(v)} missing")

    @classmethod
    def from_offsets(cls, offsets: Iterable[Site], d: Optional[int] = None,
                     symmetrize: bool = False) -> "Neighborhood":
        offs = {tuple(int(c) for c in v) for v in offsets}
        if symmetrize:
            offs |= {negate(v) for v in offs}
        if d is None:
            if not offs:
                raise ValueError("d is required for the empty neighborhood")
            d = len(next(iter(offs)))
        return cls(tuple(sorted(offs)), d)

    @classmethod
    def empty(cls, d: int) -> "Neighborhood":
        return cls((), d)

    @classmethod
    def from_half(cls, half: Iterable[Site], d: int) -> "Neighborhood":
        return cls.from_offsets(half, d, symmetrize=True)

    @cached_property
    def radius(self) -> int:
        return max((norm(v) for v in self.offsets), default=0)

    @cached_property
    def extents(self) -> tuple[int, ...]:
        """Per-axis maximum of |v_k| over the offsets."""
        return tuple(max((abs(v[k]) for v in self.offsets), default=0)
                     for k in range(self.d))

    @cached_property
    def half(self) -> tuple[Site, ...]:
        return tuple(v for v in self.offsets if is_positive(v))

    def __len__(self) -> int:
        return len(self.offsets)

    def __iter__(self) -> Iterator[Site]:
        return iter(self.offsets)

    def __contains__(self, v) -> bool:
        return tuple(v) in set(self.offsets)

    def __le__(self, other: "Neighborhood") -> bool:
        return set(self.offsets) <= set(other.offsets)

    def __lt__(self, other: "Neighborhood") -> bool:
        return set(self.offsets) < set(other.offsets)

    def __ge__(self, other: "Neighborhood") -> bool:
        return set(self.offsets) >= set(other.offsets)

    def __gt__(self, other: "Neighborhood") -> bool:
        return set(self.offsets) > set(other.offsets)

    def union(self, other: "Neighborhood") -> "Neighborhood":
        return Neighborhood.from_offsets(self.offsets + other.offsets, self.d)

    def __str__(self) -> str:
        return format_offsets(self.offsets)


def format_offsets(offsets: Iterable[Site]) -> str:
    """Canonical text form ``(dx,dy);(dx,dy);...``; empty string for none."""
    return ";".join("(" + ",".join(str(c) for c in v) + ")" for v in offsets)


def half_ball(R: int, d: int) -> tuple[Site, ...]:
    """Lexicographically positive offsets of max norm at most R, sorted."""
    return tuple(v for v in itertools.product(range(-R, R + 1), repeat=d)
                 if is_positive(v))


def ball(R: int, d: int) -> Neighborhood:
    """The neighborhood of all nonzero offsets with max norm at most R."""
    return Neighborhood.from_half(half_ball(R, d), d)


def half_ball_size(R: int, d: int) -> int:
    return ((2 * R + 1) ** d - 1) // 2


def enumerate_neighborhoods(R: int, d: int,
                            cap: int = DEFAULT_CANDIDATE_CAP) -> list[Neighborhood]:
    """All central-symmetric neighborhoods of radius at most R.

    Ordered by cardinality, then lexicographically by the sorted offsets.
    """
    if R < 0:
        raise ValueError("R must be nonnegative")
    h = half_ball_size(R, d)
    if 2**h > cap:
        raise CandidateFamilyTooLarge(
            f"candidate family too large: 2^{h} neighborhoods exceed cap {cap}")
    hb = half_ball(R, d)
    out = [Neighborhood.from_half(S, d)
           for k in range(h + 1) for S in itertools.combinations(hb, k)]
    out.sort(key=lambda g: (len(g), g.offsets))
    return out


def block_count_exact(R: int, d: int, m: int) -> int:
    """Number of pairs (Γ, a(Γ ∪ {0})) over all Γ with r(Γ) <= R.

    Equals ``m * (m^2 + 1)^h`` with ``h = ((2R+1)^d - 1) / 2``. Python ints
    are unbounded, so the exact value never overflows.
    """
    if R < 0 or m < 2:
        raise ValueError("need R >= 0 and m >= 2")
    return m * (m * m + 1) ** half_ball_size(R, d)


def block_count_bound(R: int, d: int, m: int) -> float:
    """Upper bound ``(m^2 + 1)^((2R+1)^d / 2)``; raises OverflowError if huge."""
    return math.pow(m * m + 1, (2 * R + 1) ** d / 2)
