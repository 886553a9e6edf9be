"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The Monte Carlo sweeps behind criteria 1-4 are expensive (hours from
scratch, single-core); their results live in resume-capable CSV caches
under data/acceptance/ and are recomputed only when missing.  Records are
deterministic, so cached and fresh runs are byte-identical;
scripts/run_acceptance_sweeps.py fills the cache incrementally.
"""

from __future__ import annotations

import math
import os
import sys
from pathlib import Path

import numpy as np
import pytest

from ftcluster import acceptance, decoder as D, lattice as L, noise as N
from ftcluster import oracle as O, propagation as P
from ftcluster.fitting import bootstrap_sigma, fit_threshold, synthetic_records
from ftcluster.matching import matching_weight, min_weight_perfect_matching

DATA_DIR = Path(os.environ.get(
    "FTCLUSTER_DATA", Path(__file__).resolve().parent.parent / "data" / "acceptance"))

_FITS: dict[str, tuple] = {}


def fit_for(name: str):
    if name not in _FITS:
        _FITS[name] = acceptance.fitted_threshold(name, DATA_DIR, echo=None)
    return _FITS[name]


def report(criterion: int, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE {criterion:2d} {'PASS' if ok else 'FAIL'}: {detail}"
    print(line)
    print(line, file=sys.stderr)
    assert ok, line


def fmt(fit) -> str:
    return f"p_th = {fit.p_th:.5f} +- {fit.sigma_p_th:.5f} (nu = {fit.nu:.2f})"


def test_criterion_01_xzzx_high_bias_threshold():
    fit, _records = fit_for("xzzx-circuit-eta1e4")
    ok = 0.020 <= fit.p_th <= 0.027
    report(1, ok, f"XZZX circuit eta=1e4: {fmt(fit)}, required within [0.020, 0.027]")


def test_criterion_02_rhg_high_bias_threshold_and_ratio():
    fit_rhg, _ = fit_for("rhg-circuit-eta1e4")
    fit_xzzx, _ = fit_for("xzzx-circuit-eta1e4")
    ratio = fit_xzzx.p_th / fit_rhg.p_th
    ok = fit_rhg.p_th <= 0.012 and ratio >= 1.8
    report(2, ok, f"RHG circuit eta=1e4: {fmt(fit_rhg)}, required <= 0.012; "
                  f"XZZX/RHG ratio = {ratio:.2f}, required >= 1.8")


def test_criterion_03_unbiased_agreement():
    names = ("rhg-circuit-z-eta1", "rhg-circuit-x-eta1", "xzzx-circuit-eta1")
    fits = [fit_for(n)[0] for n in names]
    values = [f.p_th for f in fits]
    spread = max(values) - min(values)
    ok = spread <= 0.0025
    detail = ", ".join(f"{n.split('-eta')[0]}: {f.p_th:.5f}"
                       for n, f in zip(names, fits))
    report(3, ok, f"eta=1 thresholds {detail}; spread = {spread:.5f}, "
                  f"required <= 0.00250")


def test_criterion_04_phenomenological_ordering():
    rhg100, _ = fit_for("rhg-phenom-eta100")
    rhg1e4, _ = fit_for("rhg-phenom-eta1e4")
    x1, _ = fit_for("xzzx-phenom-eta1")
    x100, _ = fit_for("xzzx-phenom-eta100")
    x1e4, _ = fit_for("xzzx-phenom-eta1e4")

    def sep(a, b):
        return (a.p_th - b.p_th) / math.hypot(a.sigma_p_th, b.sigma_p_th)

    gap100 = sep(x100, rhg100)
    gap1e4 = sep(x1e4, rhg1e4)
    # statistical reading of "non-decreasing": each step up in eta may not
    # decrease the threshold by more than 3 combined sigma
    steps = (sep(x100, x1), sep(x1e4, x100))
    ok = gap100 >= 3.0 and gap1e4 >= 3.0 and all(s >= -3.0 for s in steps)
    report(4, ok,
           f"phenomenological: XZZX-RHG separation {gap100:.1f} sigma (eta=100), "
           f"{gap1e4:.1f} sigma (eta=1e4), required >= 3; XZZX p_th over eta "
           f"{{1,100,1e4}} = {x1.p_th:.4f}, {x100.p_th:.4f}, {x1e4.p_th:.4f} "
           f"(steps {steps[0]:+.1f}, {steps[1]:+.1f} sigma, required >= -3)")


@pytest.mark.parametrize("kind,dims", [("rhg", (2, 2, 2)), ("rhg", (3, 3, 3)),
                                       ("xzzx", (2, 2, 2)), ("xzzx", (3, 3, 3))])
def test_criterion_05_oracle_equivalence(kind, dims):
    lat = L.build(kind, dims)
    params = N.NoiseParams(model="circuit-z", base_rate=0.01, eta=100.0)
    events = N.enumerate_events(lat, params)
    mismatches = 0
    for ev in events:
        fast = P.propagate_one(lat, ev.pauli, ev.time)
        slow = O.propagate_exact(lat, ev.pauli, ev.time)
        if fast != slow:
            mismatches += 1
    report(5, mismatches == 0,
           f"{kind} {dims}: {len(events)} single-fault propagations, "
           f"{mismatches} oracle mismatches (required 0)")


def test_criterion_06_stabilizer_membership_and_chains():
    bad = 0
    total = 0
    for kind in ("rhg", "xzzx"):
        for dims in ((2, 2, 2), (3, 3, 3)):
            lat = L.build(kind, dims)
            tab = O.prepare_cluster(lat)
            for chk in lat.checks:
                total += 1
                if not O.is_stabilizer(tab, L.check_operator(lat, chk)):
                    bad += 1
    chain_bad = 0
    for n in range(0, 6):
        xl, zl = O.verify_chain("standard", n)
        exp_xl = {**{i: "X" for i in range(1, 2 * n + 1, 2)},
                  2 * n + 1: "X", 2 * n + 2: "Z"}
        exp_zl = {**{i: "X" for i in range(2, 2 * n + 1, 2)}, 2 * n + 1: "Z"}
        if xl.support != exp_xl or zl.support != exp_zl:
            chain_bad += 1
        xl, zl = O.verify_chain("x-start", n)
        exp_xl = {**{i: "X" for i in range(1, 2 * n + 1, 2)},
                  2 * n + 1: "X", 2 * n + 2: "X"}
        exp_zl = {**{i: "Z" for i in range(2, 2 * n + 1, 2)}, 2 * n + 1: "Z"}
        if xl.support != exp_xl or zl.support != exp_zl:
            chain_bad += 1
        xl, zl = O.verify_chain("z-start", n)
        exp_xl = {**{i: "X" for i in range(2, 2 * n + 1, 2)}, 2 * n + 1: "X"}
        exp_zl = {**{i: "Z" for i in range(1, 2 * n + 1, 2)},
                  2 * n + 1: "Z", 2 * n + 2: "Z"}
        if xl.support != exp_xl or zl.support != exp_zl:
            chain_bad += 1
    report(6, bad == 0 and chain_bad == 0,
           f"{total} cell checks all stabilizer members ({bad} failures); "
           f"18 chain identities verbatim ({chain_bad} failures)")


def test_criterion_07_matching_exactness():
    rng = np.random.default_rng(7001)
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(1, 6)) * 2
        w = rng.random((n, n))
        w = (w + w.T) / 2
        np.fill_diagonal(w, 0.0)
        pairs = min_weight_perfect_matching(w)
        got = matching_weight(w, pairs)
        want, want_pairs = _brute_force(w)
        if sorted(map(tuple, map(sorted, pairs))) == sorted(
                map(tuple, map(sorted, want_pairs))):
            diff = abs(got - matching_weight(w, want_pairs))
        else:
            diff = abs(got - want)
        worst = max(worst, diff)
    report(7, worst <= 1e-12,
           f"500 random complete graphs <= 10 terminals: max |MWPM - brute force| "
           f"= {worst:.2e} (required exact)")


def _brute_force(w):
    n = w.shape[0]
    best = [float("inf"), None]

    def rec(avail, pairs, tot):
        if tot >= best[0]:
            return
        if not avail:
            best[0], best[1] = tot, list(pairs)
            return
        i = avail[0]
        for j in avail[1:]:
            rec([x for x in avail if x not in (i, j)], pairs + [(i, j)], tot + w[i, j])

    rec(list(range(n)), [], 0.0)
    return best


def test_criterion_08_shortest_path_exactness():
    rng = np.random.default_rng(8001)
    mismatches = 0
    for _ in range(200):
        n = int(rng.integers(2, 13))
        edges = []
        for _e in range(int(rng.integers(1, 2 * n + 1))):
            a, b = rng.integers(0, n, size=2)
            if a != b:
                edges.append((int(a), int(b),
                              float(rng.integers(1, 1 << 16)) / 1024.0))
        dist, _ = D.shortest_path_matrix(n, edges)
        oracle = _floyd_warshall(n, edges)
        if not np.array_equal(dist, oracle):
            mismatches += 1
    report(8, mismatches == 0,
           f"200 random sparse graphs <= 12 nodes: {mismatches} Dijkstra vs "
           f"Floyd-Warshall mismatches (required 0)")


def _floyd_warshall(n, edges):
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    for a, b, w in edges:
        dist[a, b] = min(dist[a, b], w)
        dist[b, a] = min(dist[b, a], w)
    for k in range(n):
        dist = np.minimum(dist, dist[:, k:k + 1] + dist[k:k + 1, :])
    return dist


def test_criterion_09_planarity_at_infinite_bias():
    params = N.NoiseParams(model="circuit-z", base_rate=0.01, eta=float("inf"))
    xzzx = L.build_xzzx((3, 3, 3))
    gx = D.build_graph(xzzx, params)
    centres = _check_centres(xzzx)
    plane_ok = True
    comp_counts = []
    for sector in ("primal", "dual"):
        sg = gx.sectors[sector]
        comp_counts.append(sg.n_components)
        by_comp = {}
        for local in range(sg.n_nodes):
            by_comp.setdefault(sg.component[local], set()).add(
                centres[local + sg.node_offset][0])
        plane_ok &= all(len(us) == 1 for us in by_comp.values())
    rhg = L.build_rhg((3, 3, 3))
    gr = D.build_graph(rhg, params)
    rhg_connected = (gr.sectors["primal"].n_components == 1
                     and gr.sectors["dual"].n_components == 1)
    ok = plane_ok and all(c >= 3 for c in comp_counts) and rhg_connected
    report(9, ok,
           f"XZZX eta=inf components per sector {comp_counts} (>= 3 layers), "
           f"each confined to one plane ({plane_ok}); RHG stays 3D-connected "
           f"({rhg_connected})")


def _check_centres(lat):
    extent = tuple(2 * d for d in lat.dims)
    centres = []
    for parity in (1, 0):
        for a in range(parity, extent[0], 2):
            for b in range(parity, extent[1], 2):
                for c in range(parity, extent[2], 2):
                    centres.append((a, b, c))
    return centres


def test_criterion_10_fit_recovery():
    records = synthetic_records(p_th=0.02, nu=1.0, A=0.1, B=2.0, C=5.0,
                                d_list=(5, 7, 9, 11),
                                p_list=tuple(np.linspace(0.016, 0.024, 12)),
                                n_s=100_000, seed=4242)
    fit = fit_threshold(records)
    sigma = bootstrap_sigma(records, fit, n_boot=acceptance.N_BOOT,
                            seed=acceptance.BOOT_SEED)
    err = abs(fit.p_th - 0.02)
    ok = err < 0.001 and err < 3 * sigma
    report(10, ok, f"synthetic fit recovery: |p_th - 0.02| = {err:.2e} "
                   f"(required < 1e-3), bootstrap sigma = {sigma:.2e} "
                   f"(required within 3 sigma)")


def test_subthreshold_suppression_invariant():
    # statistical invariant: at roughly half the eta=1 threshold, p_L at
    # d=9 sits below d=5 with >= 3 sigma separation at n_S = 1e5
    records = {r.d_z: r for r in acceptance.load_or_run("rhg-eta1-suppression",
                                                        DATA_DIR)}
    r5, r9 = records[5], records[9]
    sigma = math.hypot(r5.fit_sigma, r9.fit_sigma)
    separation = (r5.p_logical - r9.p_logical) / sigma
    assert separation >= 3.0, (r5.p_logical, r9.p_logical, separation)


def test_criterion_11_determinism_across_workers(tmp_path):
    from ftcluster.cli import sweep_to_csv
    from ftcluster.experiment import SweepConfig

    outputs = []
    for workers in (1, 3):
        cfg = SweepConfig(lattice="xzzx", model="circuit-z", eta=1e4,
                          d_list=(6,), p_list=(0.018, 0.024), trials=400,
                          seed=1111, workers=workers)
        path = tmp_path / f"workers{workers}.csv"
        sweep_to_csv(cfg, path, echo=None)
        outputs.append(path.read_bytes())
    ok = outputs[0] == outputs[1]
    report(11, ok, "sweep CSV byte-identical across worker counts 1 and 3")
