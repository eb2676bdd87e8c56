"""Distance between the empirical and true conditional tables as the lattice grows.

The table is estimated on the true neighborhood; the distance is the largest
entrywise gap over observed conditioning blocks.
"""

import statistics
import sys

from _common import Timer, out_path, parser, write

from picmrf.config import load_config
from picmrf.sweep import deviation_csv, run_deviation_study


def main(argv=None):
    args = parser(__doc__.splitlines()[0], "spec_convergence.yaml").parse_args(argv)
    cfg = load_config(args.config)
    with Timer():
        rows = run_deviation_study(cfg, args.workers)
    write(out_path(cfg.output, args.outdir), deviation_csv(rows))
    for i in range(len(cfg.sizes)):
        devs = [r["max_deviation"] for r in rows if r["size_index"] == i]
        print(f"size {cfg.sizes[i]}: mean {statistics.fmean(devs):.4f}  max {max(devs):.4f}")


if __name__ == "__main__":
    sys.exit(main())
