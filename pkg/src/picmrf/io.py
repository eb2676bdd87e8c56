"""Sample files, neighborhood strings and JSON reports.

Sample file (``.mrfs``)::

    MRFS 1 d=2 dims=4x3 m=2 [origin=-2x5] [key=value ...]
    0 1 1
    ...

``origin`` is written only for boxes not starting at zero. The remaining
``key=value`` tokens carry provenance. The body holds
the symbols in row-major order, one line per run of the last axis.
"""

from __future__ import annotations

import json
import math
import re
from pathlib import Path
from typing import Optional

import numpy as np

from .estimator import PicReport, TypicalityReport, EmpiricalSpecification
from .lattice import Neighborhood, Region

MAGIC = "MRFS"
VERSION = "1"
RESERVED = ("d", "dims", "m", "origin")


class SampleFormatError(ValueError):
    pass


class GammaParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


def format_sample(sample) -> str:
    dims = "x".join(str(n) for n in sample.region.shape)
    head = [MAGIC, VERSION, f"d={sample.d}", f"dims={dims}", f"m={sample.m}"]
    if any(sample.region.lo):
        head.append("origin=" + "x".join(str(c) for c in sample.region.lo))
    for k, v in sample.provenance.items():
        v = str(v)
        if (k in RESERVED or not re.fullmatch(r"[A-Za-z_][\w.-]*", str(k))
                or re.search(r"\s", v)):
            raise ValueError(f"provenance entry {k}={v!r} cannot go in a header")
        head.append(f"{k}={v}")
    lines = [" ".join(head)]
    rows = sample.symbols.reshape(-1, sample.region.shape[-1])
    lines.extend(" ".join(str(int(s)) for s in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_sample(sample, path) -> None:
    Path(path).write_text(format_sample(sample))


def _provenance_value(v: str):
    return int(v) if re.fullmatch(r"-?\d+", v) else v


def parse_sample(text: str):
    from .sampler import Sample

    lines = text.split("\n", 1)
    head = lines[0].split()
    if len(head) < 5 or head[0] != MAGIC:
        raise SampleFormatError("missing 'MRFS' header line")
    if head[1] != VERSION:
        raise SampleFormatError(f"unsupported format version {head[1]}")
    fields = {}
    for tok in head[2:]:
        if "=" not in tok:
            raise SampleFormatError(f"malformed header token {tok!r}")
        k, v = tok.split("=", 1)
        fields[k] = v
    try:
        d = int(fields.pop("d"))
        dims = tuple(int(n) for n in fields.pop("dims").split("x"))
        m = int(fields.pop("m"))
        origin = (0,) * d
        if "origin" in fields:
            origin = tuple(int(c) for c in fields.pop("origin").split("x"))
    except (KeyError, ValueError) as e:
        raise SampleFormatError(f"bad header: {e}") from None
    if len(dims) != d or len(origin) != d:
        raise SampleFormatError(f"dims {dims} or origin {origin} do not have d={d} axes")
    body = lines[1] if len(lines) > 1 else ""
    try:
        symbols = np.array(body.split(), dtype=np.int64)
    except ValueError:
        raise SampleFormatError("non-integer symbol in body") from None
    if symbols.size != math.prod(dims):
        raise SampleFormatError(f"expected {math.prod(dims)} symbols, found {symbols.size}")
    prov = {k: _provenance_value(v) for k, v in fields.items()}
    region = Region(origin, tuple(o + n for o, n in zip(origin, dims)))
    return Sample(region, symbols.reshape(dims), m, prov)


def read_sample(path):
    return parse_sample(Path(path).read_text())


_INT = re.compile(r"\s*([+-]?\d+)\s*")


def parse_gamma(text: str, d: Optional[int] = None) -> tuple[Neighborhood, bool]:
    """Parse ``(dx,dy);(dx,dy);...`` into a neighborhood.

    Returns ``(gamma, symmetrized)``; ``symmetrized`` is True when negated
    offsets had to be added.
    """
    offsets = []
    pos = 0
    n = len(text)
    stripped = text.strip()
    if stripped in ("", "{}"):
        if d is None:
            raise GammaParseError("empty neighborhood needs a known dimension", 0)
        return Neighborhood.empty(d), False
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n or text[pos] != "(":
            raise GammaParseError("expected '('", pos)
        close = text.find(")", pos)
        if close < 0:
            raise GammaParseError("unclosed '('", pos)
        coords = []
        start = pos + 1
        for part in text[start:close].split(","):
            mt = _INT.fullmatch(part)
            if not mt:
                raise GammaParseError(f"expected an integer, got {part.strip()!r}", start)
            coords.append(int(mt.group(1)))
            start += len(part) + 1
        v = tuple(coords)
        if d is None:
            d = len(v)
        if len(v) != d:
            raise GammaParseError(f"offset {v} does not have dimension {d}", pos)
        if not any(v):
            raise GammaParseError("the origin cannot be a neighbor", pos)
        offsets.append(v)
        pos = close + 1
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        if text[pos] != ";":
            raise GammaParseError("expected ';'", pos)
        pos += 1
    if len(set(offsets)) != len(offsets):
        raise GammaParseError("duplicate offset", 0)
    given = set(offsets)
    closed = given | {tuple(-c for c in v) for v in given}
    return Neighborhood.from_offsets(closed, d), closed != given


def _offsets(gamma: Neighborhood) -> list[list[int]]:
    return [list(v) for v in gamma.offsets]


def _region(r: Optional[Region]):
    if r is None:
        return None
    return {"lo": list(r.lo), "hi": list(r.hi), "volume": r.volume}


def estimate_report(report: PicReport, sample, source: str = "") -> dict:
    return {
        "format": "picmrf-estimate 1",
        "sample": {"source": source, "d": sample.d, "dims": list(sample.region.shape),
                   "m": sample.m, "volume": sample.volume},
        "window": {"width": report.window_width, "region": _region(report.window),
                   "count_width": report.count_width, "policy": report.window_policy},
        "radius": report.r_n,
        "forced_radius": report.forced,
        "c": report.c,
        "selected": str(report.selected),
        "selected_offsets": _offsets(report.selected),
        "selected_pic": report.best.pic,
        "runner_up_margin": (report.runner_up_margin
                             if math.isfinite(report.runner_up_margin) else None),
        "tie_rule": report.tie_rule,
        "ties": [str(cv.gamma) for cv in report.ties],
        "n_candidates": len(report.candidates),
        "candidates": [
            {"gamma": str(cv.gamma), "size": len(cv.gamma), "radius": cv.gamma.radius,
             "log_mpl": cv.log_mpl, "penalty": cv.penalty, "pic": cv.pic}
            for cv in report.candidates
        ],
    }


def diagnose_report(typ: TypicalityReport, emp: EmpiricalSpecification,
                    max_deviation: Optional[float], source: str = "") -> dict:
    return {
        "format": "picmrf-diagnose 1",
        "sample": source,
        "gamma": str(typ.gamma),
        "kappa": typ.kappa,
        "alpha": typ.alpha,
        "n_records": len(typ.records),
        "n_failures": len(typ.failures),
        "worst_margin": typ.worst_margin if typ.records else None,
        "max_deviation": max_deviation,
        "typicality": [
            {"block": list(r.block), "center": r.center, "n_block": r.n_block,
             "n_joint": r.n_joint, "empirical": r.empirical, "true": r.true,
             "deviation": r.deviation, "bound": r.bound, "pass": r.passed}
            for r in typ.records
        ],
        "empirical_specification": [
            {"block": list(b), "n_block": emp.block_counts[b], "probs": [float(p) for p in row]}
            for b, row in emp.rows.items()
        ],
    }


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"
