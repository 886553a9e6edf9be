"""Monte Carlo harness: trials, aggregation, parameter sweeps.

A sweep point fixes (lattice kind, d_z, noise model, eta, headline error
rate); the lattice, fault enumeration, decoding graph and shortest-path
caches are built once per point, after which a trial costs one vectorized
channel draw plus work proportional to the faults actually drawn (the
defect matching dominates).  Trial i uses the counter-derived stream
``SeedSequence(seed, point_index, i)``, so results are bit-identical for
any worker count and any execution order; aggregation is integer summation.
"""

from __future__ import annotations

import math
import multiprocessing
import os
from dataclasses import dataclass

import numpy as np

from . import decoder, lattice as lattice_mod, noise as noise_mod, propagation
from .decoder import DecodingGraph, match_local

WORKERS_ENV = "FTCLUSTER_WORKERS"


class ConfigError(ValueError):
    """Invalid sweep configuration."""


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "")
    if raw.strip():
        try:
            return max(1, int(raw))
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}")
    return 1


def dims_for(lattice_kind: str, eta: float, d_z: int) -> tuple[int, int, int]:
    """Lattice cell counts for a given code size d_z.

    The XZZX state at eta >= 100 uses (d_z/3, d_z, d_z) with the short axis
    carrying the bias-protected logical; every other combination is cubic.
    """
    if lattice_kind == "xzzx" and eta >= 100:
        if d_z % 3 != 0 or d_z < 6:
            raise ConfigError(
                f"XZZX at eta >= 100 needs d_z a multiple of 3 and >= 6, got {d_z}")
        return (d_z // 3, d_z, d_z)
    if d_z % 2 == 0 or d_z < 3:
        raise ConfigError(f"cubic lattices need odd d_z >= 3, got {d_z}")
    return (d_z, d_z, d_z)


def validate_combination(lattice_kind: str, model: str) -> None:
    if lattice_kind not in ("rhg", "xzzx"):
        raise ConfigError(f"unknown lattice {lattice_kind!r}")
    if model not in noise_mod.MODELS:
        raise ConfigError(f"unknown model {model!r}")
    if lattice_kind == "xzzx" and model == "circuit-x":
        raise ConfigError("circuit-x noise is undefined for the XZZX lattice "
                          "(its CX gates have no X-biased error table)")


@dataclass(frozen=True)
class SweepConfig:
    lattice: str
    model: str
    eta: float
    d_list: tuple[int, ...]
    p_list: tuple[float, ...]
    trials: int
    seed: int
    workers: int = 0            # 0 = use FTCLUSTER_WORKERS / 1

    def __post_init__(self) -> None:
        validate_combination(self.lattice, self.model)
        object.__setattr__(self, "d_list", tuple(int(d) for d in self.d_list))
        object.__setattr__(self, "p_list", tuple(float(p) for p in self.p_list))
        object.__setattr__(self, "eta", float(self.eta))
        if not (self.eta >= 1.0):
            raise ConfigError(f"eta must be >= 1 (or inf), got {self.eta}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.d_list or not self.p_list:
            raise ConfigError("d_list and p_list must be non-empty")
        for d in self.d_list:
            dims_for(self.lattice, self.eta, d)
        for p in self.p_list:
            if not 0.0 <= p < 0.5:
                raise ConfigError(f"error rates must lie in [0, 0.5), got {p}")

    @property
    def effective_workers(self) -> int:
        return self.workers if self.workers >= 1 else default_workers()


@dataclass
class TrialResult:
    failure_bits: tuple[int, ...]
    syndrome_size: int
    matched_weight: float


@dataclass
class SweepRecord:
    lattice: str
    model: str
    eta: float
    d_z: int
    dims: tuple[int, int, int]
    p_cz: float                      # headline rate (CZ total, or total
    trials: int                      # phenomenological per-qubit rate)
    failures: int
    failures_per_membrane: tuple[int, ...]
    seed: int

    @property
    def p_logical(self) -> float:
        return self.failures / self.trials

    @property
    def std_err(self) -> float:
        p = self.p_logical
        return math.sqrt(p * (1.0 - p) / self.trials)

    @property
    def one_sided(self) -> bool:
        """All-or-nothing counts only support a one-sided interval."""
        return self.failures in (0, self.trials)

    @property
    def fit_sigma(self) -> float:
        """Uncertainty used for 1/sigma^2 fit weights.

        The normal standard error, except for one-sided records where the
        midpoint rule (f+0.5)/(n+1) keeps the weight finite.
        """
        if not self.one_sided:
            return self.std_err
        p = (self.failures + 0.5) / (self.trials + 1.0)
        return math.sqrt(p * (1.0 - p) / self.trials)


class PointEngine:
    """Everything precomputed for one sweep point; trials are cheap.

    ``template`` may be a previous engine for the same (lattice, d_z,
    model, eta): the lattice and the per-event flip effects are then reused
    (they do not depend on the error rate), and only the probabilities and
    the decoding graph are rebuilt.
    """

    def __init__(self, lattice_kind: str, d_z: int, model: str, eta: float,
                 p_headline: float, template: "PointEngine | None" = None):
        validate_combination(lattice_kind, model)
        self.lattice_kind = lattice_kind
        self.model = model
        self.eta = eta
        self.d_z = d_z
        self.p_headline = p_headline
        self.dims = dims_for(lattice_kind, eta, d_z)

        reusable = (template is not None
                    and template.lattice_kind == lattice_kind
                    and template.d_z == d_z and template.model == model
                    and template.eta == eta and template.effects is not None)
        self.lattice = template.lattice if reusable else lattice_mod.build(
            lattice_kind, self.dims)
        base_rate = noise_mod.invert_pcz(p_headline, model, eta) if p_headline > 0 else 0.0
        self.params = noise_mod.NoiseParams(model=model, base_rate=base_rate, eta=eta)
        self.n_membranes = len(self.lattice.logicals)

        if p_headline > 0:
            self.events = noise_mod.enumerate_events(self.lattice, self.params)
            if reusable and template.effects.n_events == len(self.events):
                from dataclasses import replace

                probs = np.array([ev.probability for ev in self.events])
                self.effects = replace(template.effects, probabilities=probs)
            else:
                self.effects = propagation.compute_event_effects(self.lattice, self.events)
            self.graph: DecodingGraph | None = decoder.build_graph(
                self.lattice, self.params,
                events=self.events, effects=self.effects)
            self._groups = self._build_location_groups(self.events)
        else:
            self.events = []
            self.effects = None
            self.graph = None
            self._groups = []

    def _build_location_groups(self, events) -> list[tuple[np.ndarray, np.ndarray]]:
        """Locations bucketed by channel table, for vectorized sampling.

        Outcomes at one location are mutually exclusive (a gate suffers at
        most one Pauli per trial), so sampling draws one uniform variate per
        location and walks its cumulative table - vectorized over all
        locations sharing a table as (cumulative, event-id-matrix) pairs.
        """
        runs: dict[tuple, list] = {}
        order: list[tuple] = []
        for ev in events:
            key = (ev.location, ev.gate_id if ev.location == "gate" else ev.qubits)
            if key not in runs:
                runs[key] = []
                order.append(key)
            runs[key].append(ev)
        by_table: dict[tuple, list[list[int]]] = {}
        table_order: list[tuple] = []
        for key in order:
            evs = runs[key]
            tkey = (evs[0].location, tuple(ev.probability for ev in evs))
            if tkey not in by_table:
                by_table[tkey] = []
                table_order.append(tkey)
            by_table[tkey].append([ev.index for ev in evs])
        groups = []
        for tkey in table_order:
            _loc, probs = tkey
            cum = np.cumsum(np.asarray(probs, dtype=np.float64))
            ids = np.asarray(by_table[tkey], dtype=np.int64)
            groups.append((cum, ids))
        return groups

    def sample_event_ids(self, rng: np.random.Generator) -> np.ndarray:
        fired = []
        for cum, ids in self._groups:
            u = rng.random(ids.shape[0])
            j = np.searchsorted(cum, u, side="right")
            hit = np.nonzero(j < len(cum))[0]
            if len(hit):
                fired.append(ids[hit, j[hit]])
        if not fired:
            return np.empty(0, dtype=np.int64)
        return np.concatenate(fired)

    def run_trial(self, rng: np.random.Generator) -> TrialResult:
        if self.graph is None:
            return TrialResult((0,) * self.n_membranes, 0, 0.0)
        eff = self.effects
        fired = self.sample_event_ids(rng)
        if len(fired) == 0:
            return TrialResult((0,) * self.n_membranes, 0, 0.0)

        chunks = [eff.check_flat[eff.check_offsets[i]:eff.check_offsets[i + 1]]
                  for i in fired]
        actual_mask = 0
        for i in fired:
            actual_mask ^= int(eff.logical_mask[i])
        flat = np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int32)
        parity = np.bincount(flat, minlength=eff.n_checks) & 1
        defects = np.nonzero(parity)[0]

        n_primal = self.lattice.n_primal
        total_weight = 0.0
        corr_mask = 0
        for sector in ("primal", "dual"):
            sg = self.graph.sectors[sector]
            if sector == "primal":
                local = defects[defects < n_primal]
            else:
                local = defects[defects >= n_primal] - n_primal
            _pairs, w, m = match_local(sg, local)
            total_weight += w
            corr_mask ^= m

        fail_mask = actual_mask ^ corr_mask
        bits = tuple((fail_mask >> m) & 1 for m in range(self.n_membranes))
        return TrialResult(bits, int(len(defects)), total_weight)


def trial_rng(seed: int, point_index: int, trial: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(point_index, trial))
    return np.random.Generator(np.random.Philox(ss))


def _run_chunk(engine: PointEngine, seed: int, point_index: int,
               start: int, stop: int) -> tuple[int, np.ndarray]:
    failures = 0
    per_membrane = np.zeros(engine.n_membranes, dtype=np.int64)
    for trial in range(start, stop):
        result = engine.run_trial(trial_rng(seed, point_index, trial))
        if any(result.failure_bits):
            failures += 1
            per_membrane += np.asarray(result.failure_bits, dtype=np.int64)
    return failures, per_membrane


_FORK_ENGINE: PointEngine | None = None
_FORK_ARGS: tuple[int, int] | None = None


def _fork_worker(bounds: tuple[int, int]) -> tuple[int, np.ndarray]:
    engine = _FORK_ENGINE
    seed, point_index = _FORK_ARGS
    return _run_chunk(engine, seed, point_index, bounds[0], bounds[1])


def run_point(lattice_kind: str, d_z: int, model: str, eta: float,
              p_headline: float, n_trials: int, seed: int, *,
              point_index: int = 0, workers: int = 1,
              engine: PointEngine | None = None) -> SweepRecord:
    """One Monte Carlo data point.

    Bit-identical output for fixed (seed, point_index) regardless of the
    worker count: trial streams are derived from the trial index and the
    reduction is a sum of integers.
    """
    if n_trials < 1:
        raise ConfigError("n_trials must be >= 1")
    if engine is None:
        engine = PointEngine(lattice_kind, d_z, model, eta, p_headline)

    if workers <= 1 or n_trials < 4 * workers:
        failures, per_membrane = _run_chunk(engine, seed, point_index, 0, n_trials)
    else:
        global _FORK_ENGINE, _FORK_ARGS
        _FORK_ENGINE = engine
        _FORK_ARGS = (seed, point_index)
        bounds = []
        step = (n_trials + workers - 1) // workers
        for lo in range(0, n_trials, step):
            bounds.append((lo, min(lo + step, n_trials)))
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(workers) as pool:
            parts = pool.map(_fork_worker, bounds)
        _FORK_ENGINE = None
        _FORK_ARGS = None
        failures = sum(p[0] for p in parts)
        per_membrane = sum((p[1] for p in parts),
                           np.zeros(engine.n_membranes, dtype=np.int64))

    return SweepRecord(lattice=lattice_kind, model=model, eta=eta, d_z=d_z,
                       dims=engine.dims, p_cz=p_headline, trials=n_trials,
                       failures=failures,
                       failures_per_membrane=tuple(int(x) for x in per_membrane),
                       seed=seed)


def run_sweep(config: SweepConfig,
              skip: set[tuple[int, float]] | None = None,
              progress=None) -> list[SweepRecord]:
    """Cartesian product of (d_list x p_list), one run_point each.

    ``skip`` lists (d_z, p) points already computed (resume support); the
    point index that seeds each point's RNG streams depends only on the
    point's position in the full product, so resuming changes nothing.
    """
    records = []
    point_index = 0
    for d_z in config.d_list:
        template: PointEngine | None = None
        for p in config.p_list:
            point_index += 1
            if skip and (d_z, p) in skip:
                continue
            engine = PointEngine(config.lattice, d_z, config.model,
                                 config.eta, p, template=template)
            template = engine
            rec = run_point(config.lattice, d_z, config.model, config.eta, p,
                            config.trials, config.seed,
                            point_index=point_index,
                            workers=config.effective_workers,
                            engine=engine)
            records.append(rec)
            if progress is not None:
                progress(rec)
    return records


# --- CSV schema (exact column order used by the CLI and the golden tests)

CSV_SCHEMA = "ftcluster-sweep-v1"
CSV_COLUMNS = ["lattice", "model", "eta", "d_z", "dim_u", "dim_v", "dim_w",
               "p_cz", "trials", "failures", "failures_per_membrane",
               "p_logical", "std_err", "seed"]


def format_eta(eta: float) -> str:
    if math.isinf(eta):
        return "inf"
    if float(eta).is_integer():
        return str(int(eta))
    return repr(float(eta))


def parse_eta(text: str) -> float:
    return math.inf if text.strip().lower() == "inf" else float(text)


def record_to_row(rec: SweepRecord) -> list[str]:
    return [rec.lattice, rec.model, format_eta(rec.eta), str(rec.d_z),
            str(rec.dims[0]), str(rec.dims[1]), str(rec.dims[2]),
            repr(float(rec.p_cz)), str(rec.trials), str(rec.failures),
            ";".join(str(x) for x in rec.failures_per_membrane),
            repr(float(rec.p_logical)), repr(float(rec.std_err)), str(rec.seed)]


def record_from_row(row: list[str]) -> SweepRecord:
    if len(row) != len(CSV_COLUMNS):
        raise ConfigError(f"malformed sweep row: {row}")
    return SweepRecord(lattice=row[0], model=row[1], eta=parse_eta(row[2]),
                       d_z=int(row[3]), dims=(int(row[4]), int(row[5]), int(row[6])),
                       p_cz=float(row[7]), trials=int(row[8]), failures=int(row[9]),
                       failures_per_membrane=tuple(int(x) for x in row[10].split(";")),
                       seed=int(row[13]))
