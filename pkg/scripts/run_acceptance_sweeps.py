#!/usr/bin/env python3
"""Fill (or top up) the acceptance sweep cache under data/acceptance/.

Interruptible: every finished point is flushed to its CSV immediately and
skipped on the next run.  Pass sweep names to restrict the work, e.g.

    python scripts/run_acceptance_sweeps.py xzzx-circuit-eta1e4
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from ftcluster.acceptance import load_or_run, sweep_definitions

REPO_ROOT = Path(__file__).resolve().parent.parent
DEFAULT_DATA_DIR = REPO_ROOT / "data" / "acceptance"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("names", nargs="*", help="sweep names (default: all)")
    parser.add_argument("--data-dir", default=str(DEFAULT_DATA_DIR))
    parser.add_argument("--list", action="store_true", help="list sweep names")
    args = parser.parse_args()

    defs = sweep_definitions()
    if args.list:
        for name, sweep in defs.items():
            cfg = sweep.config
            print(f"{name}: {cfg.lattice}/{cfg.model} eta={cfg.eta:g} "
                  f"d={list(cfg.d_list)} {len(cfg.p_list)} p-points x {cfg.trials} trials")
        return 0

    names = args.names or list(defs)
    unknown = [n for n in names if n not in defs]
    if unknown:
        print(f"unknown sweep name(s): {unknown}", file=sys.stderr)
        return 1

    for name in names:
        t0 = time.time()
        print(f"== {name}")
        load_or_run(name, args.data_dir, echo=print)
        print(f"== {name} complete ({time.time() - t0:.0f}s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
