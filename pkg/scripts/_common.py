"""Shared command-line plumbing for the study scripts."""

import argparse
import time
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def parser(description: str, config: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--config", default=str(ROOT / "configs" / config))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--outdir", default=None, help="write CSVs here instead of the config paths")
    return p


def out_path(cfg_path, outdir):
    if cfg_path is None:
        return None
    path = Path(cfg_path)
    if outdir is not None:
        return Path(outdir) / path.name
    return path if path.is_absolute() else ROOT / path


def write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    print(f"wrote {path}")


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        print(f"wall time {time.perf_counter() - self.t0:.1f} s")
