#!/usr/bin/env python3
"""Run the three desk presets plus both cost-model table modes into results/.

Equivalent to four ecclab invocations; handy for regenerating every artifact
after a change. Pass --skip-train to refresh only the tables.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from ecclab.cli import main as ecclab_main


def run(args: list[str]) -> None:
    print(f"$ ecclab {' '.join(args)}", flush=True)
    rc = ecclab_main(args)
    if rc != 0:
        sys.exit(rc)


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="results")
    parser.add_argument("--skip-train", action="store_true")
    args = parser.parse_args()
    out = Path(args.out)

    run(["costmodel", "tables", "--mode", "paper", "--csv", str(out / "tables_paper")])
    run(["costmodel", "tables", "--mode", "exact", "--csv", str(out / "tables_exact")])
    if args.skip_train:
        return
    for preset in ("desk-memorize", "desk-stream", "desk-ablation"):
        t0 = time.perf_counter()
        run(["train", "--preset", preset, "--out", str(out / preset)])
        print(f"  {preset}: {(time.perf_counter() - t0) / 60:.1f} min", flush=True)


if __name__ == "__main__":
    main()
