"""Block counts ``N(a(Γ))`` and ``N(a(Γ,0))`` over the counting window.

A block ``a(Γ,0)`` is stored as a row of symbols: one column per offset of
``Γ`` in canonical order, then the center symbol. Tables keep their rows
unique and lexicographically sorted, which is also the order of the packed
base-m block keys.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numba
import numpy as np

from .lattice import Neighborhood, Region, Site, window_width

INT64_CODE_LIMIT = 2**62


class ProjectionError(ValueError):
    """Projection would not reproduce direct counting."""


def encode_block(symbols, m: int) -> int:
    """Packed base-m key; first symbol most significant, center last."""
    key = 0
    for s in symbols:
        key = key * m + int(s)
    return key


def decode_block(key: int, m: int, length: int) -> tuple[int, ...]:
    out = []
    for _ in range(length):
        key, s = divmod(key, m)
        out.append(s)
    if key:
        raise ValueError("key has more digits than length")
    return tuple(reversed(out))


def _fits_int64(m: int, width: int) -> bool:
    return m**width < INT64_CODE_LIMIT


def _pack(rows: np.ndarray, m: int) -> np.ndarray:
    w = m ** np.arange(rows.shape[1] - 1, -1, -1, dtype=np.int64)
    return rows.astype(np.int64) @ w


@numba.njit(cache=True, nogil=True)
def _unpack(codes, m, width):
    out = np.empty((codes.shape[0], width), dtype=np.uint8)
    for r in range(codes.shape[0]):
        c = codes[r]
        for j in range(width - 1, -1, -1):
            out[r, j] = c % m
            c //= m
    return out


@numba.njit(cache=True, nogil=True)
def _unique_counts(codes):
    srt = np.sort(codes)
    n = srt.shape[0]
    uniq = np.empty(n, dtype=np.int64)
    cnt = np.zeros(n, dtype=np.int64)
    k = -1
    for t in range(n):
        if t == 0 or srt[t] != srt[t - 1]:
            k += 1
            uniq[k] = srt[t]
        cnt[k] += 1
    return uniq[:k + 1], cnt[:k + 1]


def group_rows(rows: np.ndarray, m: int, weights: Optional[np.ndarray] = None):
    """Unique rows (sorted) with their multiplicities or summed weights."""
    rows = np.asarray(rows, dtype=np.uint8)
    width = rows.shape[1]
    if len(rows) == 0:
        return rows.reshape(0, width), np.zeros(0, dtype=np.int64)
    if width == 0:
        total = len(rows) if weights is None else int(np.sum(weights))
        return np.zeros((1, 0), dtype=np.uint8), np.array([total], dtype=np.int64)
    if _fits_int64(m, width):
        codes = _pack(rows, m)
        uniq, inv = np.unique(codes, return_inverse=True)
        cnt = np.bincount(inv.ravel(), weights=weights, minlength=len(uniq))
        return _unpack(uniq, m, width), cnt.astype(np.int64)
    uniq, inv = np.unique(rows, axis=0, return_inverse=True)
    cnt = np.bincount(inv.ravel(), weights=weights, minlength=len(uniq))
    return uniq, cnt.astype(np.int64)


def contributing_box(region: Region, gamma: Neighborhood,
                     width: Optional[int] = None) -> Optional[Region]:
    """Sites of the window whose whole Γ-translate lies inside ``region``.

    ``width`` overrides the window width (default: the one implied by the volume).
    """
    w = window_width(region.volume, region.d) if width is None else width
    return region.shrink([max(w, e) for e in gamma.extents])


def gather(symbols: np.ndarray, region: Region, offsets, coords) -> np.ndarray:
    """Rows ``(x(i+v) for v in offsets) + (x(i),)`` for sites on the grid ``coords``.

    ``coords`` holds one ``range`` of absolute coordinates per axis.
    """
    n = int(np.prod([len(c) for c in coords]))
    out = np.empty((n, len(offsets) + 1), dtype=np.uint8)
    for j, v in enumerate(tuple(offsets) + ((0,) * region.d,)):
        sl = tuple(slice(c.start + v[k] - region.lo[k], c.stop + v[k] - region.lo[k], c.step)
                   for k, c in enumerate(coords))
        out[:, j] = symbols[sl].ravel()
    return out


def box_coords(box: Optional[Region]):
    if box is None:
        return None
    return [range(lo, hi) for lo, hi in zip(box.lo, box.hi)]


@dataclass
class CountTable:
    """Counts ``N(a(Γ,0))`` keyed by block rows.

    ``sites`` is the box of contributing centers (None when empty).
    """

    gamma: Neighborhood
    m: int
    blocks: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)
    sites: Optional[Region] = None

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __len__(self) -> int:
        return len(self.counts)

    def keys(self) -> list[int]:
        return [encode_block(r, self.m) for r in self.blocks]

    def as_dict(self) -> dict[int, int]:
        """``{block key: N(a(Γ,0))}`` over observed blocks."""
        return dict(zip(self.keys(), (int(c) for c in self.counts)))

    def count(self, block, center: int) -> int:
        """``N(a(Γ,0))`` for one block given as a(Γ) plus the center symbol."""
        row = np.array(tuple(block) + (center,), dtype=np.uint8)
        hit = np.all(self.blocks == row, axis=1)
        return int(self.counts[hit].sum())

    def marginal_counts(self) -> np.ndarray:
        """``N(a(Γ))`` aligned with each row of :attr:`blocks`."""
        return _marginal_aligned(self.blocks, self.counts)

    def marginals(self) -> dict[tuple[int, ...], int]:
        """``{a(Γ): N(a(Γ))}`` over observed conditioning blocks."""
        out: dict[tuple[int, ...], int] = {}
        for row, c in zip(self.blocks, self.counts):
            key = tuple(int(s) for s in row[:-1])
            out[key] = out.get(key, 0) + int(c)
        return out

    def __add__(self, other: "CountTable") -> "CountTable":
        if self.gamma != other.gamma or self.m != other.m:
            raise ValueError("cannot merge tables on different neighborhoods")
        rows = np.concatenate([self.blocks, other.blocks])
        w = np.concatenate([self.counts, other.counts]).astype(float)
        b, c = group_rows(rows, self.m, w)
        return CountTable(self.gamma, self.m, b, c, self.sites)


def _marginal_aligned(blocks: np.ndarray, counts: np.ndarray) -> np.ndarray:
    if len(counts) == 0:
        return counts.copy()
    head = blocks[:, :-1]
    new = np.ones(len(counts), dtype=bool)
    if head.shape[1]:
        new[1:] = np.any(head[1:] != head[:-1], axis=1)
    else:
        new[1:] = False
    starts = np.flatnonzero(new)
    sums = np.add.reduceat(counts, starts)
    return np.repeat(sums, np.diff(np.append(starts, len(counts))))


@numba.njit(cache=True, nogil=True)
def _grid_codes(flat, shape, starts, sizes, steps, deltas, m):
    """Packed block code of every site on a strided grid, row-major."""
    d = shape.shape[0]
    total = 1
    for k in range(d):
        total *= sizes[k]
    codes = np.empty(total, dtype=np.int64)
    idx = np.zeros(d, dtype=np.int64)
    for t in range(total):
        base = 0
        for k in range(d):
            base = base * shape[k] + starts[k] + idx[k] * steps[k]
        c = 0
        for j in range(deltas.shape[0]):
            c = c * m + flat[base + deltas[j]]
        codes[t] = c
        k = d - 1
        while k >= 0:
            idx[k] += 1
            if idx[k] < sizes[k]:
                break
            idx[k] = 0
            k -= 1
    return codes


def _flat_deltas(region: Region, offsets) -> np.ndarray:
    strides = np.cumprod((region.shape + (1,))[:0:-1])[::-1]
    vs = np.array(list(offsets) + [(0,) * region.d], dtype=np.int64).reshape(-1, region.d)
    return vs @ strides.astype(np.int64)


def _count_on_grid(sample, gamma: Neighborhood, coords, sites) -> CountTable:
    width = len(gamma) + 1
    if coords is None or any(len(c) == 0 for c in coords):
        empty = np.zeros((0, width), dtype=np.uint8)
        return CountTable(gamma, sample.m, empty, np.zeros(0, dtype=np.int64), sites)
    if not _fits_int64(sample.m, width):
        rows = gather(sample.symbols, sample.region, gamma.offsets, coords)
        b, c = group_rows(rows, sample.m)
        return CountTable(gamma, sample.m, b, c, sites)
    reg = sample.region
    codes = _grid_codes(
        np.ascontiguousarray(sample.symbols, dtype=np.uint8).ravel(),
        np.array(reg.shape, dtype=np.int64),
        np.array([c.start - lo for c, lo in zip(coords, reg.lo)], dtype=np.int64),
        np.array([len(c) for c in coords], dtype=np.int64),
        np.array([c.step for c in coords], dtype=np.int64),
        _flat_deltas(reg, gamma.offsets), sample.m)
    uniq, cnt = _unique_counts(codes)
    return CountTable(gamma, sample.m, _unpack(uniq, sample.m, width), cnt, sites)


def count_blocks(sample, gamma: Neighborhood, width: Optional[int] = None) -> CountTable:
    """One scan over the window; a site counts iff its Γ-translate fits the sample.

    ``width`` replaces the default window width, e.g. to give candidates of
    radius above it a common set of counted sites.
    """
    if gamma.d != sample.d:
        raise ValueError("neighborhood and sample dimensions differ")
    box = contributing_box(sample.region, gamma, width)
    return _count_on_grid(sample, gamma, box_coords(box), box)


def count_on_box(sample, gamma: Neighborhood, box: Optional[Region]) -> CountTable:
    """Counts of Γ-blocks centered in ``box``, which must keep Γ inside the sample."""
    if box is not None:
        ext = gamma.extents
        for k in range(sample.d):
            if (box.lo[k] - ext[k] < sample.region.lo[k]
                    or box.hi[k] + ext[k] > sample.region.hi[k]):
                raise ValueError("box lets Γ-translates leave the sample region")
    return _count_on_grid(sample, gamma, box_coords(box), box)


def _columns(full: Neighborhood, gamma: Neighborhood) -> np.ndarray:
    index = {v: j for j, v in enumerate(full.offsets)}
    missing = [v for v in gamma.offsets if v not in index]
    if missing:
        raise ProjectionError(f"offsets {missing} are not in the counted neighborhood")
    return np.array([index[v] for v in gamma.offsets] + [len(full)], dtype=np.int64)


def check_projectable(full: CountTable, gamma: Neighborhood, region: Region,
                      width: Optional[int] = None) -> np.ndarray:
    """Column selection for ``gamma``; raises if the site sets would differ."""
    cols = _columns(full.gamma, gamma)
    if contributing_box(region, gamma, width) != full.sites:
        raise ProjectionError(
            f"contributing sites of {gamma or '{}'} differ from those of the counted "
            "table; count with a neighborhood whose radius is within the window width")
    return cols


def project(full: CountTable, gamma: Neighborhood, region: Region,
            width: Optional[int] = None) -> CountTable:
    """Marginalize ``full`` onto ``gamma``; equal to ``count_blocks`` on the sample.

    ``region`` and ``width`` are those the table was counted with.
    """
    cols = check_projectable(full, gamma, region, width)
    if len(full.counts) and _fits_int64(full.m, len(cols)):
        codes = _project_codes(full.blocks, cols, full.m)
        uniq, c = _unique_weighted(codes, full.counts)
        return CountTable(gamma, full.m, _unpack(uniq, full.m, len(cols)), c, full.sites)
    b, c = group_rows(full.blocks[:, cols], full.m, full.counts.astype(float))
    return CountTable(gamma, full.m, b, c, full.sites)


@numba.njit(cache=True, nogil=True)
def _radix_sort(codes, counts):
    """Sort nonnegative ``codes`` (carrying ``counts``) with 11-bit LSD passes."""
    n = codes.shape[0]
    hi = 0
    for t in range(n):
        if codes[t] > hi:
            hi = codes[t]
    a, b = codes.copy(), np.empty_like(codes)
    ca, cb = counts.copy(), np.empty_like(counts)
    hist = np.empty(2048, dtype=np.int64)
    shift = 0
    while (hi >> shift) > 0:
        hist[:] = 0
        for t in range(n):
            hist[(a[t] >> shift) & 2047] += 1
        tot = 0
        for j in range(2048):
            c = hist[j]
            hist[j] = tot
            tot += c
        for t in range(n):
            j = (a[t] >> shift) & 2047
            b[hist[j]] = a[t]
            cb[hist[j]] = ca[t]
            hist[j] += 1
        a, b = b, a
        ca, cb = cb, ca
        shift += 11
    return a, ca


@numba.njit(cache=True, nogil=True)
def _unique_weighted(codes, counts):
    order = np.argsort(codes, kind="mergesort")
    n = codes.shape[0]
    uniq = np.empty(n, dtype=np.int64)
    cnt = np.zeros(n, dtype=np.int64)
    k = -1
    for t in range(n):
        c = codes[order[t]]
        if t == 0 or c != uniq[k]:
            k += 1
            uniq[k] = c
        cnt[k] += counts[order[t]]
    return uniq[:k + 1], cnt[:k + 1]


@numba.njit(cache=True, nogil=True)
def _pairs_from_codes(codes, counts, m):
    srt, cnt = _radix_sort(codes, counts)
    n = srt.shape[0]
    nfull = np.empty(n, dtype=np.int64)
    full_grp = np.empty(n, dtype=np.int64)
    nm_acc = np.empty(n, dtype=np.int64)
    k = -1
    g = -1
    for t in range(n):
        c = srt[t]
        if t == 0 or c != srt[t - 1]:
            k += 1
            nfull[k] = 0
            if t == 0 or c // m != srt[t - 1] // m:
                g += 1
                nm_acc[g] = 0
            full_grp[k] = g
        nfull[k] += cnt[t]
        nm_acc[g] += cnt[t]
    nfull = nfull[:k + 1]
    nmarg = np.empty(k + 1, dtype=np.int64)
    for t in range(k + 1):
        nmarg[t] = nm_acc[full_grp[t]]
    return nfull, nmarg


@numba.njit(cache=True, nogil=True)
def _project_codes(blocks, cols, m):
    out = np.zeros(blocks.shape[0], dtype=np.int64)
    for r in range(blocks.shape[0]):
        c = 0
        for j in range(cols.shape[0]):
            c = c * m + blocks[r, cols[j]]
        out[r] = c
    return out


def projected_pairs(full: CountTable, cols: np.ndarray):
    """``(N(a(Γ,0)), N(a(Γ)))`` per observed projected block, in block-key order."""
    if len(full.counts) == 0:
        z = np.zeros(0, dtype=np.int64)
        return z, z
    if _fits_int64(full.m, len(cols)):
        codes = _project_codes(full.blocks, cols, full.m)
        return _pairs_from_codes(codes, full.counts, full.m)
    b, c = group_rows(full.blocks[:, cols], full.m, full.counts.astype(float))
    return c, _marginal_aligned(b, c)


def table_pairs(table: CountTable):
    """``(N(a(Γ,0)), N(a(Γ)))`` per observed block of a table, in block-key order."""
    return table.counts, table.marginal_counts()


@dataclass
class SieveCounts:
    """Per-sieve tables; sieve ``k`` holds sites congruent to ``k`` mod ``4R+1``."""

    R: int
    tables: dict[Site, CountTable]

    def merged(self) -> CountTable:
        tables = list(self.tables.values())
        out = tables[0]
        for t in tables[1:]:
            out = out + t
        return out


def sieve_offset(site: Site, R: int) -> Site:
    """Sieve index of a site: residues mod ``4R+1`` in ``[-2R, 2R]``."""
    p = 4 * R + 1
    return tuple(((c + 2 * R) % p) - 2 * R for c in site)


def count_sieves(sample, gamma: Neighborhood, R: int,
                 width: Optional[int] = None) -> SieveCounts:
    if R < 0:
        raise ValueError("R must be nonnegative")
    box = contributing_box(sample.region, gamma, width)
    coords = box_coords(box)
    p = 4 * R + 1
    tables = {}
    for k in itertools.product(range(-2 * R, 2 * R + 1), repeat=sample.d):
        if coords is None:
            sub = None
        else:
            sub = [range(c.start + (k[j] - c.start) % p, c.stop, p) for j, c in enumerate(coords)]
        tables[k] = _count_on_grid(sample, gamma, sub, box)
    return SieveCounts(R, tables)


__all__ = [
    "CountTable", "ProjectionError", "SieveCounts", "check_projectable", "contributing_box",
    "count_blocks", "count_on_box", "count_sieves", "decode_block", "encode_block",
    "group_rows", "project", "projected_pairs", "sieve_offset", "table_pairs",
]
