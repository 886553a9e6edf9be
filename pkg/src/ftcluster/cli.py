"""Command-line front end: verify | graph | sweep | fit.

Configuration comes from an optional JSON file (key/value with nested
lists) plus command-line flags; flags override file values.  Exit codes:
0 success, 1 validation problem, 2 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import decoder, fitting, lattice as lattice_mod, noise as noise_mod, oracle
from .decoder import InvariantViolationError
from .experiment import (CSV_COLUMNS, CSV_SCHEMA, ConfigError, SweepConfig,
                         format_eta, parse_eta, record_from_row, record_to_row,
                         run_sweep)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INVARIANT = 2


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def _merged(args: argparse.Namespace, file_cfg: dict, key: str, default=None):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in file_cfg:
        return file_cfg[key]
    return default


# --- verify -----------------------------------------------------------------


def _chain_expected(kind: str, n: int):
    """Closed-form teleportation identities (1-based chain sites)."""
    from .pauli import PauliFrame

    if kind == "standard":
        xl = {i: "X" for i in range(1, 2 * n + 1, 2)}
        xl[2 * n + 1] = "X"
        xl[2 * n + 2] = "Z"
        zl = {i: "X" for i in range(2, 2 * n + 1, 2)}
        zl[2 * n + 1] = "Z"
    elif kind == "x-start":
        xl = {i: "X" for i in range(1, 2 * n + 1, 2)}
        xl[2 * n + 1] = "X"
        xl[2 * n + 2] = "X"
        zl = {i: "Z" for i in range(2, 2 * n + 1, 2)}
        zl[2 * n + 1] = "Z"
    else:  # z-start
        xl = {i: "X" for i in range(2, 2 * n + 1, 2)}
        xl[2 * n + 1] = "X"
        zl = {i: "Z" for i in range(1, 2 * n + 1, 2)}
        zl[2 * n + 1] = "Z"
        zl[2 * n + 2] = "Z"
    return PauliFrame(xl), PauliFrame(zl)


def cmd_verify(args: argparse.Namespace) -> int:
    lattices = ["rhg", "xzzx"] if args.lattice == "both" else [args.lattice]
    failures = []

    def report(name: str, ok: bool, detail: str = "") -> None:
        print(f"{'PASS' if ok else 'FAIL'} {name}" + (f": {detail}" if detail else ""))
        if not ok:
            failures.append(name)

    for kind in ("standard", "x-start", "z-start"):
        for n in range(0, args.max_chain + 1):
            xl, zl = oracle.verify_chain(kind, n)
            exl, ezl = _chain_expected(kind, n)
            report(f"chain {kind} n={n}", xl == exl and zl == ezl,
                   "" if (xl == exl and zl == ezl) else f"got {xl}, {zl}")

    dims_list = [(2, 2, 2), (2, 2, 3), (3, 3, 3)]
    for kind in lattices:
        for dims in dims_list:
            lat = lattice_mod.build(kind, dims)
            tab = oracle.prepare_cluster(lat)
            ok = oracle.generators_commute(tab)
            report(f"{kind} {dims} generators commute", ok)
            bad = 0
            for chk in lat.checks:
                op = lattice_mod.check_operator(lat, chk)
                if args.inject_bad_check and chk.id == 0:
                    from .pauli import PauliFrame, compose

                    op = compose(op, PauliFrame({chk.faces[0][0]: "Y"}))
                if not oracle.is_stabilizer(tab, op):
                    bad += 1
            report(f"{kind} {dims} cell checks are stabilizers", bad == 0,
                   "" if bad == 0 else f"{bad} non-member checks")
            bad = sum(0 if oracle.is_stabilizer(tab, mem.support) else 1
                      for mem in lat.logicals)
            report(f"{kind} {dims} logical membranes are stabilizers", bad == 0)

    if failures:
        print(f"{len(failures)} verification check(s) failed")
        return EXIT_CONFIG
    print("all checks pass")
    return EXIT_OK


# --- graph ------------------------------------------------------------------


def cmd_graph(args: argparse.Namespace) -> int:
    file_cfg = _load_config_file(args.config)
    lattice_kind = _merged(args, file_cfg, "lattice")
    model = _merged(args, file_cfg, "model")
    eta = parse_eta(str(_merged(args, file_cfg, "eta", "1")))
    p = float(_merged(args, file_cfg, "p", 0.0))
    d_z = _merged(args, file_cfg, "d")
    if lattice_kind is None or model is None or d_z is None:
        raise ConfigError("graph needs --lattice, --model and --d")
    from .experiment import dims_for, validate_combination

    validate_combination(lattice_kind, model)
    if p <= 0:
        raise ConfigError("graph export needs an error rate p > 0 (no events at p = 0)")
    dims = dims_for(lattice_kind, eta, int(d_z))
    lat = lattice_mod.build(lattice_kind, dims)
    params = noise_mod.NoiseParams(model=model,
                                   base_rate=noise_mod.invert_pcz(p, model, eta),
                                   eta=eta)
    graph = decoder.build_graph(lat, params)
    text = decoder.export_text(graph)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --- sweep ------------------------------------------------------------------


def _existing_rows(path: Path) -> tuple[list[str], set[tuple]]:
    """Rows already present in a sweep CSV, keyed for resume.

    Malformed lines (e.g. a truncated tail left by a killed writer) are
    ignored; their points simply get recomputed.
    """
    lines: list[str] = []
    keys: set[tuple] = set()
    if not path.exists():
        return lines, keys
    with open(path, newline="") as fh:
        for raw in fh:
            lines.append(raw.rstrip("\n"))
    for raw in lines:
        if raw.startswith("#") or raw.startswith(CSV_COLUMNS[0] + ","):
            continue
        row = next(csv.reader([raw]))
        if not row:
            continue
        try:
            rec = record_from_row(row)
        except (ConfigError, ValueError):
            continue
        keys.add((rec.lattice, rec.model, format_eta(rec.eta), rec.d_z,
                  repr(rec.p_cz), rec.trials, rec.seed))
    return lines, keys


def sweep_resume_key(config: SweepConfig, d_z: int, p: float) -> tuple:
    return (config.lattice, config.model, format_eta(config.eta), d_z,
            repr(p), config.trials, config.seed)


def sweep_to_csv(config: SweepConfig, path: str | Path, resume: bool = False,
                 echo=print) -> int:
    """Run a sweep, appending one CSV row per point; returns rows written.

    With ``resume`` set, points whose (lattice, model, eta, d_z, p, trials,
    seed) key already appears in the file are skipped; records are
    deterministic, so a resumed file is byte-identical to a fresh one.
    An exclusive file lock serializes concurrent writers (a second caller
    blocks, then finds the finished points and skips them).
    """
    import fcntl

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path.with_name(path.name + ".lock"), "w") as lock_fh:
        fcntl.flock(lock_fh, fcntl.LOCK_EX)

        lines, have = _existing_rows(path) if resume else ([], set())
        skip = set()
        if resume:
            for d_z in config.d_list:
                for p in config.p_list:
                    if sweep_resume_key(config, d_z, p) in have:
                        skip.add((d_z, p))

        fresh = not path.exists() or not lines
        if not fresh:
            # repair a truncated tail (writer killed mid-line) so appended
            # rows start on their own line; the fragment is skipped on read
            with open(path, "rb+") as raw_fh:
                raw_fh.seek(0, 2)
                if raw_fh.tell() > 0:
                    raw_fh.seek(-1, 2)
                    if raw_fh.read(1) != b"\n":
                        raw_fh.write(b"\n")
        written = 0
        with open(path, "a", newline="") as fh:
            writer = csv.writer(fh)
            if fresh:
                fh.write(f"# {CSV_SCHEMA}\n")
                writer.writerow(CSV_COLUMNS)
                fh.flush()

            def emit(rec):
                nonlocal written
                writer.writerow(record_to_row(rec))
                fh.flush()
                written += 1
                if echo is not None:
                    echo(f"  d={rec.d_z} p={rec.p_cz:.6g} -> "
                         f"p_L={rec.p_logical:.5f} ({rec.failures}/{rec.trials})")

            run_sweep(config, skip=skip, progress=emit)
    return written


def read_sweep_csv(path: str | Path):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"no such sweep file: {path}")
    records = []
    seen = set()
    with open(path, newline="") as fh:
        for raw in fh:
            raw = raw.rstrip("\n")
            if not raw or raw.startswith("#") or raw.startswith(CSV_COLUMNS[0] + ","):
                continue
            try:
                rec = record_from_row(next(csv.reader([raw])))
            except (ConfigError, ValueError):
                continue   # truncated tail fragment; its point was recomputed
            key = (rec.lattice, rec.model, format_eta(rec.eta), rec.d_z,
                   repr(rec.p_cz), rec.trials, rec.seed)
            if key in seen:
                continue   # deterministic records: repeats are identical
            seen.add(key)
            records.append(rec)
    return records


def _parse_p_list(args, file_cfg) -> tuple[float, ...]:
    p_list = _merged(args, file_cfg, "p_list")
    if p_list:
        if isinstance(p_list, str):
            p_list = [float(tok) for tok in p_list.replace(",", " ").split()]
        return tuple(float(x) for x in p_list)
    p_range = _merged(args, file_cfg, "p_range")
    if p_range:
        if isinstance(p_range, str):
            parts = p_range.replace(",", " ").split()
        else:
            parts = list(p_range)
        if len(parts) != 3:
            raise ConfigError("p_range needs start, stop, count")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        return tuple(float(x) for x in np.linspace(start, stop, count))
    raise ConfigError("sweep needs p_list or p_range")


def cmd_sweep(args: argparse.Namespace) -> int:
    file_cfg = _load_config_file(args.config)
    d_list = _merged(args, file_cfg, "d_list")
    if isinstance(d_list, str):
        d_list = [int(tok) for tok in d_list.replace(",", " ").split()]
    if not d_list:
        raise ConfigError("sweep needs d_list")
    config = SweepConfig(
        lattice=_merged(args, file_cfg, "lattice") or "",
        model=_merged(args, file_cfg, "model") or "",
        eta=parse_eta(str(_merged(args, file_cfg, "eta", "1"))),
        d_list=tuple(int(d) for d in d_list),
        p_list=_parse_p_list(args, file_cfg),
        trials=int(_merged(args, file_cfg, "trials", 1000)),
        seed=int(_merged(args, file_cfg, "seed", 0)),
        workers=int(_merged(args, file_cfg, "workers", 0)),
    )
    out = _merged(args, file_cfg, "out")
    if not out:
        raise ConfigError("sweep needs an output CSV path (--out)")
    written = sweep_to_csv(config, out, resume=args.resume)
    print(f"wrote {written} row(s) to {out}")
    return EXIT_OK


# --- fit --------------------------------------------------------------------


def cmd_fit(args: argparse.Namespace) -> int:
    records = read_sweep_csv(args.input)
    if args.lattice:
        records = [r for r in records if r.lattice == args.lattice]
    if args.model:
        records = [r for r in records if r.model == args.model]
    if args.eta is not None:
        eta = parse_eta(args.eta)
        records = [r for r in records if (math.isinf(r.eta) and math.isinf(eta))
                   or r.eta == eta]
    if not records:
        raise ConfigError("no records match the requested filters")
    try:
        fit = fitting.fit_threshold(records)
    except fitting.FitError as exc:
        raise ConfigError(str(exc))
    sigma = fitting.bootstrap_sigma(records, fit, n_boot=args.n_boot,
                                    seed=args.boot_seed)
    fit.sigma_p_th = sigma
    sys.stdout.write(fit.summary())
    return EXIT_OK


# --- entry point ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ftcluster",
        description="Fault-tolerant cluster-state memory simulation under biased noise")
    sub = parser.add_subparsers(dest="command", required=True)

    pv = sub.add_parser("verify", help="run the exact stabilizer-oracle suite")
    pv.add_argument("--lattice", choices=["rhg", "xzzx", "both"], default="both")
    pv.add_argument("--max-chain", type=int, default=5)
    pv.add_argument("--inject-bad-check", action="store_true",
                    help=argparse.SUPPRESS)  # test hook
    pv.set_defaults(func=cmd_verify)

    pg = sub.add_parser("graph", help="build and export a decoding graph")
    pg.add_argument("--config")
    pg.add_argument("--lattice", choices=["rhg", "xzzx"])
    pg.add_argument("--model", choices=list(noise_mod.MODELS))
    pg.add_argument("--eta")
    pg.add_argument("--d", type=int)
    pg.add_argument("--p", type=float)
    pg.add_argument("--out")
    pg.add_argument("--export", action="store_true",
                    help="export the graph as structured text (default)")
    pg.set_defaults(func=cmd_graph)

    ps = sub.add_parser("sweep", help="run a Monte Carlo sweep, write CSV")
    ps.add_argument("--config")
    ps.add_argument("--lattice", choices=["rhg", "xzzx"])
    ps.add_argument("--model", choices=list(noise_mod.MODELS))
    ps.add_argument("--eta")
    ps.add_argument("--d-list", dest="d_list")
    ps.add_argument("--p-list", dest="p_list")
    ps.add_argument("--p-range", dest="p_range",
                    help="start stop count (linspace)")
    ps.add_argument("--trials", type=int)
    ps.add_argument("--seed", type=int)
    ps.add_argument("--workers", type=int)
    ps.add_argument("--out")
    ps.add_argument("--resume", action="store_true",
                    help="skip points already present in the output CSV")
    ps.set_defaults(func=cmd_sweep)

    pf = sub.add_parser("fit", help="finite-size-scaling threshold fit of a sweep CSV")
    pf.add_argument("--input", required=True)
    pf.add_argument("--lattice")
    pf.add_argument("--model")
    pf.add_argument("--eta")
    pf.add_argument("--n-boot", type=int, default=1000)
    pf.add_argument("--boot-seed", type=int, default=0)
    pf.set_defaults(func=cmd_fit)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvariantViolationError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
