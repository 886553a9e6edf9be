#!/usr/bin/env python3
"""Fit every cached acceptance sweep and print a threshold summary table."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ftcluster.acceptance import (fitted_threshold, sweep_csv_path,
                                  sweep_definitions)

REPO_ROOT = Path(__file__).resolve().parent.parent
DEFAULT_DATA_DIR = REPO_ROOT / "data" / "acceptance"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("names", nargs="*", help="sweep names (default: cached ones)")
    parser.add_argument("--data-dir", default=str(DEFAULT_DATA_DIR))
    args = parser.parse_args()

    defs = sweep_definitions()
    names = args.names or [n for n in defs
                           if sweep_csv_path(args.data_dir, n).exists()]
    if not names:
        print("no cached sweeps found; run scripts/run_acceptance_sweeps.py first",
              file=sys.stderr)
        return 1

    header = f"{'sweep':28s} {'lattice':6s} {'model':16s} {'eta':>7s} " \
             f"{'p_th':>9s} {'sigma':>9s} {'nu':>5s} {'chi2':>8s}"
    print(header)
    print("-" * len(header))
    for name in names:
        cfg = defs[name].config
        if len(cfg.d_list) < 2 or len(cfg.p_list) < 6:
            continue    # property sweeps (not threshold fits)
        try:
            # read-only: never compete with an active sweep runner
            fit, _records = fitted_threshold(name, args.data_dir, compute=False)
        except RuntimeError as exc:
            print(f"{name:28s} incomplete cache ({exc})")
            continue
        eta = "inf" if cfg.eta == float("inf") else f"{cfg.eta:g}"
        print(f"{name:28s} {cfg.lattice:6s} {cfg.model:16s} {eta:>7s} "
              f"{fit.p_th:9.5f} {fit.sigma_p_th:9.5f} {fit.nu:5.2f} "
              f"{fit.chi_square:8.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
