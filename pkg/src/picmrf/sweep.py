"""Seeded replicate studies of PIC selection across sample sizes."""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .config import ExperimentConfig
from .estimator import classify, empirical_specification, estimate, theory_radius
from .model import alpha_bound, spec_from_potential
from .sampler import derive_seed, gibbs_sample

ROW_COLUMNS = ["size_index", "volume", "dims", "replicate", "seed", "selected", "n_selected",
               "correct", "classification", "pic_margin", "wall_time_s"]
SUMMARY_COLUMNS = ["size_index", "volume", "dims", "replicates", "recovery_rate", "over_rate",
                   "under_rate", "mixed_rate"]


@dataclass(frozen=True)
class SweepRow:
    size_index: int
    volume: int
    dims: str
    replicate: int
    seed: int
    selected: str
    n_selected: int
    correct: bool
    classification: str
    pic_margin: float
    wall_time_s: float


def _radius(cfg: ExperimentConfig, sample) -> int:
    est = cfg.estimator
    if est.schedule == "fixed":
        return est.radius
    alpha = est.alpha
    if alpha is None:
        p = cfg.to_potential()
        # strictly below the bound
        alpha = 0.999 * alpha_bound(spec_from_potential(p).q_min, p.d, p.m)
    return theory_radius(sample, alpha)


def run_cell(cfg: ExperimentConfig, size_index: int, replicate: int) -> SweepRow:
    t0 = time.perf_counter()
    p = cfg.to_potential()
    dims = cfg.dims(cfg.sizes[size_index])
    seed = derive_seed(cfg.seed, replicate)
    sample = gibbs_sample(p, dims, cfg.sampler.sweeps, cfg.sampler.burn_in, seed)
    R = _radius(cfg, sample)
    rep = estimate(sample, R, cfg.estimator.c, force_radius=cfg.estimator.force_radius,
                   workers=1, window_policy=cfg.estimator.window_policy)
    kind = classify(rep.selected, p.gamma0)
    return SweepRow(size_index, sample.volume, "x".join(map(str, dims)), replicate, seed,
                    str(rep.selected), len(rep.selected), kind == "correct", kind,
                    rep.runner_up_margin, time.perf_counter() - t0)


def _cell(args):
    return run_cell(*args)


def run_sweep(cfg: ExperimentConfig, workers: int = 1) -> list[SweepRow]:
    """All (size, replicate) cells, ordered by size then replicate."""
    jobs = [(cfg, i, r) for i in range(len(cfg.sizes)) for r in range(cfg.replicates)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            return list(ex.map(_cell, jobs))
    return [_cell(j) for j in jobs]


DEVIATION_COLUMNS = ["size_index", "volume", "dims", "replicate", "seed", "n_blocks",
                     "max_deviation"]


def deviation_cell(cfg: ExperimentConfig, size_index: int, replicate: int) -> dict:
    """Max-norm gap between the empirical and true tables on the true neighborhood."""
    p = cfg.to_potential()
    dims = cfg.dims(cfg.sizes[size_index])
    seed = derive_seed(cfg.seed, replicate)
    sample = gibbs_sample(p, dims, cfg.sampler.sweeps, cfg.sampler.burn_in, seed)
    emp = empirical_specification(sample, p.gamma0)
    return {"size_index": size_index, "volume": sample.volume, "dims": "x".join(map(str, dims)),
            "replicate": replicate, "seed": seed, "n_blocks": len(emp.rows),
            "max_deviation": emp.max_deviation(spec_from_potential(p))}


def _deviation(args):
    return deviation_cell(*args)


def run_deviation_study(cfg: ExperimentConfig, workers: int = 1) -> list[dict]:
    jobs = [(cfg, i, r) for i in range(len(cfg.sizes)) for r in range(cfg.replicates)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            return list(ex.map(_deviation, jobs))
    return [_deviation(j) for j in jobs]


def deviation_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DEVIATION_COLUMNS)
    for r in rows:
        w.writerow([repr(r[k]) if k == "max_deviation" else r[k] for k in DEVIATION_COLUMNS])
    return buf.getvalue()


def summarize(rows: list[SweepRow]) -> list[dict]:
    out = []
    for size in sorted({r.size_index for r in rows}):
        sel = [r for r in rows if r.size_index == size]
        n = len(sel)

        def rate(kind):
            return sum(r.classification == kind for r in sel) / n

        # under counts every selection that misses part of the truth, mixed ones included
        out.append({"size_index": size, "volume": sel[0].volume, "dims": sel[0].dims,
                    "replicates": n, "recovery_rate": rate("correct"), "over_rate": rate("over"),
                    "under_rate": rate("under") + rate("mixed"), "mixed_rate": rate("mixed")})
    return out


def rows_csv(rows: list[SweepRow], timing: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ROW_COLUMNS)
    for r in rows:
        w.writerow([r.size_index, r.volume, r.dims, r.replicate, r.seed, r.selected,
                    r.n_selected, int(r.correct), r.classification, repr(r.pic_margin),
                    f"{r.wall_time_s:.3f}" if timing else ""])
    return buf.getvalue()


def summary_csv(summary: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, SUMMARY_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(summary)
    return buf.getvalue()
