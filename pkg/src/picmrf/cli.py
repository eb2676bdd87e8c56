"""``picmrf`` command line: simulate, estimate, diagnose, sweep.

Exit codes: 0 success, 1 validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import io as mio
from .config import ConfigError, ExperimentConfig, ModelConfig, load_config
from .estimator import (RadiusTooLarge, default_workers, empirical_specification, estimate,
                        theory_radius, typicality_check)
from .lattice import window_width
from .model import spec_from_potential
from .sampler import gibbs_sample
from .sweep import rows_csv, run_sweep, summarize, summary_csv

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def parse_dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(n) for n in text.lower().split("x"))
    except ValueError:
        raise ValueError(f"cannot parse dims {text!r}; expected e.g. 64x64") from None
    if any(n < 1 for n in dims):
        raise ValueError("dims must be positive")
    return dims


def _add_model_args(p):
    g = p.add_argument_group("model")
    g.add_argument("--model", choices=["ising", "potts"], default="ising")
    g.add_argument("--beta", type=float, default=0.0, help="coupling strength")
    g.add_argument("--field", type=float, default=0.0, help="ising external field")
    g.add_argument("--states", type=int, default=None, help="alphabet size (potts)")
    g.add_argument("--range", type=int, default=1, dest="range_",
                   help="couple each site to k*e_j for k up to this range")
    g.add_argument("--model-config",
                   help="YAML/JSON file whose 'model' block defines the potential")


def _model_from_args(args, d: int):
    if args.model_config:
        return load_config(args.model_config).to_potential()
    states = args.states if args.states is not None else (2 if args.model == "ising" else 3)
    return ModelConfig(family=args.model, d=d, beta=args.beta, h=args.field,
                       states=states, range=args.range_).to_potential()


def _write(text: str, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_simulate(args) -> int:
    dims = parse_dims(args.dims)
    p = _model_from_args(args, len(dims))
    sample = gibbs_sample(p, dims, args.sweeps, args.burn_in, args.seed)
    _write(mio.format_sample(sample), args.out)
    prov = " ".join(f"{k}={v}" for k, v in sample.provenance.items())
    print(f"wrote {sample.volume} symbols ({prov})", file=sys.stderr)
    return EXIT_OK


def cmd_estimate(args) -> int:
    sample = mio.read_sample(args.sample)
    w = window_width(sample.volume, sample.d)
    if args.alpha is not None:
        R = theory_radius(sample, args.alpha)
    else:
        R = w if args.radius is None else args.radius
    try:
        rep = estimate(sample, R, args.c, force_radius=args.force_radius,
                       fast=not args.slow, workers=args.workers,
                       window_policy=args.window_policy)
    except RadiusTooLarge as e:
        raise RadiusTooLarge(str(e).replace("force_radius", "--force-radius")) from None
    _write(mio.dump_json(mio.estimate_report(rep, sample, str(args.sample))), args.report)
    print(f"selected: {{{rep.selected}}} among {len(rep.candidates)} candidates", file=sys.stderr)
    return EXIT_OK


def cmd_diagnose(args) -> int:
    sample = mio.read_sample(args.sample)
    gamma, symmetrized = mio.parse_gamma(args.gamma, sample.d)
    if symmetrized:
        print(f"warning: --gamma was not central-symmetric; using {{{gamma}}}", file=sys.stderr)
    p = _model_from_args(args, sample.d)
    if p.m != sample.m:
        raise ValueError(f"model has {p.m} symbols, sample has {sample.m}")
    spec = spec_from_potential(p)
    kappa = "auto" if args.kappa == "auto" else float(args.kappa)
    typ = typicality_check(sample, gamma, spec, args.alpha, kappa)
    emp = empirical_specification(sample, gamma)
    dev = emp.max_deviation(spec) if spec.gamma <= gamma else None
    _write(mio.dump_json(mio.diagnose_report(typ, emp, dev, str(args.sample))), args.report)
    print(f"{len(typ.failures)} of {len(typ.records)} typicality rows fail", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    workers = args.workers if args.workers is not None else default_workers()
    rows = run_sweep(cfg, workers)
    summary = summarize(rows)
    out = args.out or cfg.output
    summ = args.summary or cfg.summary
    _write(rows_csv(rows, timing=not args.no_timing), out)
    if summ:
        _write(summary_csv(summary), summ)
    else:
        sys.stderr.write(summary_csv(summary))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="picmrf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="Gibbs-sample a field and write a .mrfs file")
    _add_model_args(p)
    p.add_argument("--dims", required=True, help="e.g. 64x64")
    p.add_argument("--sweeps", type=int, default=50)
    p.add_argument("--burn-in", type=int, default=None, help="default: 10 x sweeps")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="PIC estimate of the basic neighborhood")
    p.add_argument("sample")
    p.add_argument("--radius", type=int, default=None,
                   help="candidate radius (default: window width)")
    p.add_argument("--alpha", type=float, default=None,
                   help="use the logarithmic radius schedule with this alpha")
    p.add_argument("--c", type=float, default=1.0, help="penalty multiplier")
    p.add_argument("--force-radius", action="store_true",
                   help="allow a radius above the window width")
    p.add_argument("--window-policy", choices=["common", "per-site"], default="common")
    p.add_argument("--slow", action="store_true", help="count every candidate directly")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--report", default="-")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("diagnose", help="typicality check and empirical specification")
    p.add_argument("sample")
    p.add_argument("--gamma", required=True, help='e.g. "(1,0);(-1,0)"')
    _add_model_args(p)
    p.add_argument("--kappa", default="auto")
    p.add_argument("--alpha", type=float, default=1e-4)
    p.add_argument("--report", default="-")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("sweep", help="replicate study across sample sizes")
    p.add_argument("--config", help="YAML/JSON experiment configuration")
    p.add_argument("--out", help="per-row CSV (default: config output or stdout)")
    p.add_argument("--summary", help="summary CSV (default: config summary or stderr)")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--no-timing", action="store_true", help="leave wall_time_s empty")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as e:
        print(f"picmrf: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ConfigError) as e:
        print(f"picmrf: error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
