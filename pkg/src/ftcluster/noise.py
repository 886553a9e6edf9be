"""Biased Pauli noise models as explicit per-location probability tables.

Three models are supported:

* ``circuit-z``: dephasing-biased circuit-level noise.  CZ gates suffer
  IZ and ZI with probability p, ZZ with p^2, and the remaining twelve
  two-qubit Paulis with p/eta each; CX gates suffer IZ and ZZ with p/2,
  ZI with p, and the remaining twelve with p/eta; preparations and
  measurements suffer Z with p and X, Y with p/eta each.
* ``circuit-x``: bit-flip-biased circuit-level noise for CZ-only lattices.
  CZ gates suffer IX, XI, ZX, XZ with 0.375p, IY, YI, ZY, YZ with 0.125p,
  and the remaining seven with p/eta; preparations and measurements suffer
  X with p and Y, Z with p/eta.
* ``phenomenological``: a single Pauli channel on each qubit just before
  its measurement; Z with p and X, Y with p/eta.

``eta = inf`` is a first-class value: every /eta term is exactly zero and
the corresponding fault events are omitted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import Lattice
from .pauli import PauliFrame

MODELS = ("circuit-z", "circuit-x", "phenomenological")

_TWO_QUBIT = [a + b for a in "IXYZ" for b in "IXYZ" if a + b != "II"]


@dataclass(frozen=True)
class NoiseParams:
    model: str
    base_rate: float        # the paper's p_z (or p_x for circuit-x)
    eta: float              # bias ratio, 1 <= eta <= inf

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise ValueError(f"unknown noise model {self.model!r}")
        if not 0.0 <= self.base_rate <= 0.2:
            raise ValueError(f"base_rate must be in [0, 0.2], got {self.base_rate}")
        if not (self.eta >= 1.0):
            raise ValueError(f"eta must be >= 1 (or inf), got {self.eta}")

    @property
    def rate_over_eta(self) -> float:
        return 0.0 if math.isinf(self.eta) else self.base_rate / self.eta


@dataclass(frozen=True)
class FaultEvent:
    """One possible spacetime error: location, Pauli, probability.

    Gate faults act on the gate's two qubits immediately after the gate;
    preparation faults precede the qubit's first gate and measurement
    faults follow its last.
    """

    location: str                   # "prep" | "meas" | "gate"
    qubits: tuple[int, ...]
    pauli: PauliFrame
    probability: float
    time: int                       # gates with timestep > time act on it
    gate_id: int | None = None
    index: int = field(default=-1, compare=False)


def _single_qubit_table(params: NoiseParams) -> list[tuple[str, float]]:
    p, q = params.base_rate, params.rate_over_eta
    if params.model == "circuit-x":
        table = [("X", p), ("Y", q), ("Z", q)]
    else:
        table = [("Z", p), ("X", q), ("Y", q)]
    return [(s, pr) for s, pr in table if pr > 0.0]


def _two_qubit_table(gate_kind: str, params: NoiseParams) -> list[tuple[str, float]]:
    p, q = params.base_rate, params.rate_over_eta
    if params.model == "circuit-z":
        if gate_kind == "CZ":
            named = {"IZ": p, "ZI": p, "ZZ": p * p}
        else:
            named = {"IZ": p / 2, "ZZ": p / 2, "ZI": p}
    elif params.model == "circuit-x":
        if gate_kind != "CZ":
            raise ValueError("circuit-x noise is defined only for CZ gates")
        named = {"IX": 0.375 * p, "XI": 0.375 * p, "ZX": 0.375 * p, "XZ": 0.375 * p,
                 "IY": 0.125 * p, "YI": 0.125 * p, "ZY": 0.125 * p, "YZ": 0.125 * p}
    else:
        raise ValueError("phenomenological noise has no gate table")
    table = [(pair, named.get(pair, q)) for pair in _TWO_QUBIT]
    return [(s, pr) for s, pr in table if pr > 0.0]


def channel_table(location_kind: str, params: NoiseParams) -> list[tuple[str, float]]:
    """Exhaustive nontrivial-Pauli table for one location kind.

    ``location_kind`` is "prep", "meas", "CZ" or "CX"; symbols in the
    returned strings apply to the location's qubit(s) in order.  The
    identity outcome is implicit; zero-probability entries are omitted.
    """
    if location_kind in ("prep", "meas"):
        if params.model == "phenomenological" and location_kind == "prep":
            return []
        table = _single_qubit_table(params)
    elif location_kind in ("CZ", "CX"):
        if params.model == "phenomenological":
            return []
        table = _two_qubit_table(location_kind, params)
    else:
        raise ValueError(f"unknown location kind {location_kind!r}")
    total = sum(pr for _s, pr in table)
    if total > 1.0:
        raise ValueError(f"channel table total {total} exceeds 1")
    return table


def enumerate_events(lattice: Lattice, params: NoiseParams) -> list[FaultEvent]:
    """One FaultEvent per nontrivial Pauli outcome per fault location.

    Circuit models place events at every preparation, gate and measurement;
    the phenomenological model places a single channel per qubit just
    before its measurement.
    """
    if params.model == "circuit-x" and any(g.kind == "CX" for g in lattice.gates):
        raise ValueError("circuit-x noise is undefined for lattices with CX gates")

    events: list[FaultEvent] = []

    def add(location: str, qubits: tuple[int, ...], support: dict[int, str],
            prob: float, time: int, gate_id: int | None = None) -> None:
        events.append(FaultEvent(location=location, qubits=qubits,
                                 pauli=PauliFrame(support), probability=prob,
                                 time=time, gate_id=gate_id, index=len(events)))

    if params.model == "phenomenological":
        table = _single_qubit_table(params)
        for q in lattice.qubits:
            for sym, prob in table:
                add("meas", (q.id,), {q.id: sym}, prob,
                    int(lattice.meas_timestep[q.id]))
        return events

    prep_table = channel_table("prep", params)
    meas_table = channel_table("meas", params)
    gate_tables = {kind: channel_table(kind, params)
                   for kind in {g.kind for g in lattice.gates}}

    for q in lattice.qubits:
        for sym, prob in prep_table:
            add("prep", (q.id,), {q.id: sym}, prob, int(lattice.prep_timestep[q.id]))
    for gid, g in enumerate(lattice.gates):
        for pair, prob in gate_tables[g.kind]:
            support = {}
            if pair[0] != "I":
                support[g.control] = pair[0]
            if pair[1] != "I":
                support[g.target] = pair[1]
            add("gate", (g.control, g.target), support, prob, g.timestep, gate_id=gid)
    for q in lattice.qubits:
        for sym, prob in meas_table:
            add("meas", (q.id,), {q.id: sym}, prob, int(lattice.meas_timestep[q.id]))
    return events


def sample_faults(lattice: Lattice, params: NoiseParams,
                  rng: np.random.Generator) -> list[FaultEvent]:
    """Independent draw per location from its channel table.

    Reference sampler: one uniform variate per location, walked through the
    location's cumulative table.  The Monte Carlo engine uses an equivalent
    grouped-binomial scheme; their statistics are tested to agree.
    """
    events = enumerate_events(lattice, params)
    by_location: dict[tuple, list[FaultEvent]] = {}
    for ev in events:
        key = (ev.location, ev.gate_id) if ev.location == "gate" else (ev.location, ev.qubits)
        by_location.setdefault(key, []).append(ev)

    drawn = []
    for key in sorted(by_location, key=str):
        group = by_location[key]
        u = rng.random()
        acc = 0.0
        for ev in group:
            acc += ev.probability
            if u < acc:
                drawn.append(ev)
                break
    drawn.sort(key=lambda ev: ev.index)
    return drawn


def total_gate_error(params: NoiseParams) -> float:
    """Total nontrivial-outcome probability of the model's headline channel.

    For the circuit models this is the CZ gate error (the x-axis of every
    threshold sweep); for the phenomenological model it is the total
    per-qubit rate p(1 + 2/eta).
    """
    p = params.base_rate
    inv_eta = 0.0 if math.isinf(params.eta) else 1.0 / params.eta
    if params.model == "circuit-z":
        return 2 * p + p * p + 12 * p * inv_eta
    if params.model == "circuit-x":
        return 2 * p + 7 * p * inv_eta
    return p * (1 + 2 * inv_eta)


def invert_pcz(p_total: float, model: str, eta: float) -> float:
    """Base rate that makes total_gate_error equal ``p_total``.

    Closed form: the circuit-z total is a monotone quadratic in p, the
    other two are linear.
    """
    if not 0.0 < p_total < 0.5:
        raise ValueError(f"total error rate must be in (0, 0.5), got {p_total}")
    inv_eta = 0.0 if math.isinf(eta) else 1.0 / eta
    if model == "circuit-z":
        # stable quadratic root: avoids the -b + sqrt(b^2 + eps) cancellation
        b = 2.0 + 12.0 * inv_eta
        return 2.0 * p_total / (b + math.sqrt(b * b + 4.0 * p_total))
    if model == "circuit-x":
        return p_total / (2.0 + 7.0 * inv_eta)
    if model == "phenomenological":
        return p_total / (1.0 + 2.0 * inv_eta)
    raise ValueError(f"unknown noise model {model!r}")


def params_for_total(model: str, p_total: float, eta: float) -> NoiseParams:
    """NoiseParams whose headline total error rate is ``p_total``."""
    return NoiseParams(model=model, base_rate=invert_pcz(p_total, model, eta), eta=eta)


def dephasing_to_bitflip_ratio(params: NoiseParams) -> float:
    """First-order ratio of dephasing to bit-flip-causing CZ error rates.

    Computed from the channel table: pure-Z entries (minus the second-order
    ZZ term) against entries containing X or Y.  Equals eta/6 for the
    circuit-z model.
    """
    table = channel_table("CZ", params)
    p = params.base_rate
    dephasing = sum(pr for s, pr in table if set(s) <= {"I", "Z"}) - p * p
    bitflip = sum(pr for s, pr in table if "X" in s or "Y" in s)
    return math.inf if bitflip == 0 else dephasing / bitflip
