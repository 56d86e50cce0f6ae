"""Write the CSV data behind every figure preset into a directory."""

import argparse
import os
import sys

from toric_dlocc.cli import FIGURE_PRESETS, main


def run(outdir: str, figures: list[str], threads: int) -> int:
    os.makedirs(outdir, exist_ok=True)
    status = 0
    for fig in figures:
        out = os.path.join(outdir, f"{fig}.csv")
        status = max(status, main(["figdata", fig, "--out", out, "--threads", str(threads)]))
    return status


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="figdata")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("figures", nargs="*", default=sorted(FIGURE_PRESETS))
    args = ap.parse_args()
    sys.exit(run(args.outdir, args.figures, args.threads))
