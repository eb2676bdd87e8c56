"""The PIC estimator, the empirical specification, and the typicality diagnostic."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .counts import (check_projectable, contributing_box, count_blocks, count_on_box,
                     projected_pairs)
from .lattice import (DEFAULT_CANDIDATE_CAP, Neighborhood, Region, enumerate_neighborhoods,
                      half_ball, radius_schedule, window, window_width)
from .model import Specification, as_blocks
from .pseudolik import CriterionValue, mpl_from_pairs, penalty, pic

TIE_TOLERANCE = 1e-9
TIE_RULE = ("smallest pic (within 1e-9), then smallest |gamma|, then smallest radius, "
            "then canonical order")


class RadiusTooLarge(ValueError):
    """Candidate radius exceeds the window width and no override was given."""


def default_workers() -> int:
    env = os.environ.get("MRF_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(cap, os.cpu_count() or 1))


WINDOW_POLICIES = ("common", "per-site")


@dataclass
class PicReport:
    """Per-candidate criterion values and the selection.

    ``window_width`` is the width implied by the sample volume;
    ``count_width`` is the one actually used for counting.
    """

    candidates: list[CriterionValue]
    selected: Neighborhood
    ties: list[CriterionValue]
    r_n: int
    c: float
    window_width: int
    window: Optional[Region]
    count_width: int
    window_policy: str = "common"
    forced: bool = False
    tie_rule: str = TIE_RULE

    @property
    def best(self) -> CriterionValue:
        return next(cv for cv in self.candidates if cv.gamma == self.selected)

    @property
    def runner_up_margin(self) -> float:
        """PIC gap between the selected candidate and the next best one."""
        others = sorted(cv.pic for cv in self.candidates if cv.gamma != self.selected)
        return others[0] - self.best.pic if others else math.inf


def _tie_key(item):
    order, cv = item
    return (len(cv.gamma), cv.gamma.radius, order)


def select(candidates: list[CriterionValue], tol: float = TIE_TOLERANCE):
    """Selected neighborhood and the candidates tied with the minimum."""
    lo = min(cv.pic for cv in candidates)
    tied = [(i, cv) for i, cv in enumerate(candidates) if cv.pic <= lo + tol]
    return min(tied, key=_tie_key)[1].gamma, [cv for _, cv in tied]


def _group_ball(region: Region, R: int, box: Region) -> Neighborhood:
    """Largest offset set of radius <= R whose translates stay in ``region`` from ``box``."""
    reach = [min(R, b_lo - r_lo, r_hi - b_hi)
             for b_lo, b_hi, r_lo, r_hi in zip(box.lo, box.hi, region.lo, region.hi)]
    half = [v for v in half_ball(R, region.d) if all(abs(x) <= e for x, e in zip(v, reach))]
    return Neighborhood.from_half(half, region.d)


def _fast_values(sample, cands: list[Neighborhood], c: float, width: int, workers: int):
    groups: dict[Optional[Region], list[int]] = {}
    for i, g in enumerate(cands):
        groups.setdefault(contributing_box(sample.region, g, width), []).append(i)
    out: list[Optional[CriterionValue]] = [None] * len(cands)

    def pens(g):
        return penalty(sample.m, len(g), sample.volume, c)

    for box, idx in groups.items():
        if box is None:
            for i in idx:
                out[i] = CriterionValue.build(cands[i], 0.0, pens(cands[i]), sample.volume)
            continue
        ball = _group_ball(sample.region, max(cands[i].radius for i in idx), box)
        full = count_on_box(sample, ball, box)

        def one(i, full=full):
            g = cands[i]
            cols = check_projectable(full, g, sample.region, width)
            lm = mpl_from_pairs(*projected_pairs(full, cols))
            return i, CriterionValue.build(g, lm, pens(g), sample.volume)

        if workers > 1:
            with ThreadPoolExecutor(workers) as ex:
                results = list(ex.map(one, idx))
        else:
            results = [one(i) for i in idx]
        for i, cv in results:
            out[i] = cv
    return out


def count_width(sample, R: int, window_policy: str = "common") -> int:
    """Window width used for counting candidates of radius at most ``R``.

    ``common`` widens the window to ``R`` so every candidate is counted over
    the same sites; ``per-site`` keeps the volume-implied width and drops the
    sites whose Γ-translate leaves the sample. Both agree when ``R`` fits.
    """
    if window_policy not in WINDOW_POLICIES:
        raise ValueError(f"window_policy must be one of {WINDOW_POLICIES}")
    w = window_width(sample.volume, sample.d)
    return max(w, R) if window_policy == "common" else w


def estimate(sample, R: int, c: float = 1.0, force_radius: bool = False, fast: bool = True,
             workers: Optional[int] = None, cap: int = DEFAULT_CANDIDATE_CAP,
             window_policy: str = "common") -> PicReport:
    """Minimize PIC over all neighborhoods with radius at most ``R``.

    ``R`` above the window width is refused unless ``force_radius`` is set.
    ``fast`` counts once per group of candidates sharing contributing sites
    and projects; otherwise every candidate is counted directly.
    """
    if c <= 0:
        raise ValueError("penalty multiplier c must be positive")
    w = window_width(sample.volume, sample.d)
    if R > w and not force_radius:
        raise RadiusTooLarge(
            f"radius {R} exceeds the window width {w} of a sample of volume "
            f"{sample.volume}; override with force_radius")
    width = count_width(sample, R, window_policy)
    cands = enumerate_neighborhoods(R, sample.d, cap)
    workers = default_workers() if workers is None else max(1, workers)
    if fast:
        values = _fast_values(sample, cands, c, width, workers)
    elif workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            values = list(ex.map(lambda g: pic(sample, g, c, width), cands))
    else:
        values = [pic(sample, g, c, width) for g in cands]
    selected, ties = select(values)
    return PicReport(values, selected, ties, R, c, w, window(sample.region), width,
                     window_policy, forced=R > w)


def theory_radius(sample, alpha: float) -> int:
    """Candidate radius from the logarithmic schedule on the window volume."""
    win = window(sample.region)
    return radius_schedule(win.volume if win else 1, alpha, sample.d)


@dataclass
class EmpiricalSpecification:
    """Ratios ``N(a(Γ,0)) / N(a(Γ))`` for every observed conditioning block."""

    gamma: Neighborhood
    m: int
    rows: dict[tuple[int, ...], np.ndarray]
    block_counts: dict[tuple[int, ...], int]

    def max_deviation(self, spec: Specification) -> float:
        """Largest entrywise gap to a true specification over observed rows."""
        blocks = as_blocks(list(self.rows), len(self.gamma))
        truth = spec.lookup(self.gamma, blocks)
        emp = np.array(list(self.rows.values()))
        return float(np.abs(emp - truth).max())


def empirical_specification(sample, gamma: Neighborhood) -> EmpiricalSpecification:
    table = count_blocks(sample, gamma)
    if table.total == 0:
        raise ValueError(f"no site of the window contributes a {gamma or '{}'}-block")
    rows: dict[tuple[int, ...], np.ndarray] = {}
    for row, n in zip(table.blocks, table.counts):
        key = tuple(int(s) for s in row[:-1])
        rows.setdefault(key, np.zeros(sample.m))[row[-1]] += n
    totals = {k: int(v.sum()) for k, v in rows.items()}
    rows = {k: v / totals[k] for k, v in rows.items()}
    return EmpiricalSpecification(gamma, sample.m, rows, totals)


def kappa_auto(d: int, m: int, alpha: float) -> float:
    """A constant just above the typicality threshold for ``kappa``."""
    return 1.01 * 2 ** (3 * d) * math.e * alpha * math.log(m * m + 1)


def typicality_bound(kappa: float, n: int) -> float:
    return math.sqrt(kappa * math.log(n) / n)


@dataclass(frozen=True)
class TypicalityRecord:
    block: tuple[int, ...]
    center: int
    n_block: int
    n_joint: int
    empirical: float
    true: float
    deviation: float
    bound: float
    passed: bool


@dataclass
class TypicalityReport:
    gamma: Neighborhood
    kappa: float
    alpha: float
    records: list[TypicalityRecord] = field(default_factory=list)

    @property
    def failures(self) -> list[TypicalityRecord]:
        return [r for r in self.records if not r.passed]

    @property
    def worst_margin(self) -> float:
        return min((r.bound - r.deviation for r in self.records), default=math.inf)


def typicality_check(sample, gamma: Neighborhood, spec: Specification, alpha: float,
                     kappa: Union[float, str] = "auto") -> TypicalityReport:
    """Compare empirical and true conditionals against ``sqrt(kappa log N / N)``.

    Blocks seen fewer than twice are skipped.
    """
    if kappa == "auto":
        kappa = kappa_auto(sample.d, sample.m, alpha)
    kappa = float(kappa)
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    emp = empirical_specification(sample, gamma)
    report = TypicalityReport(gamma, kappa, alpha)
    blocks = [b for b in emp.rows if emp.block_counts[b] >= 2]
    if not blocks:
        return report
    truth = spec.lookup(gamma, as_blocks(blocks, len(gamma)))
    for b, q in zip(blocks, truth):
        n = emp.block_counts[b]
        bound = typicality_bound(kappa, n)
        for a in range(sample.m):
            p = float(emp.rows[b][a])
            dev = abs(p - float(q[a]))
            report.records.append(TypicalityRecord(
                b, a, n, int(round(p * n)), p, float(q[a]), dev, bound, dev < bound))
    return report


def classify(selected: Neighborhood, truth: Neighborhood) -> str:
    """``correct``, ``over`` (strict superset), ``under`` (strict subset) or ``mixed``."""
    if selected == truth:
        return "correct"
    if selected > truth:
        return "over"
    if selected < truth:
        return "under"
    return "mixed"
