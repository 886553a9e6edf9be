"""Fast path from fault events to measurement flips, syndromes and logical
parities.

A fault is conjugated through every strictly later entangling gate; the
accumulated final-state Pauli flips a qubit's measurement iff it
anticommutes with the qubit's measurement basis.  Flips map linearly to
flipped checks (each qubit sits in exactly two same-sector checks) and to
membrane parities, so per-event effects are precomputed once per
(lattice, model) and a Monte Carlo trial is a sparse XOR accumulation.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .lattice import Lattice
from .noise import FaultEvent
from .pauli import CX_TABLE, CZ_TABLE, PauliFrame, symbols_anticommute

FlipFrame = frozenset[int]
Syndrome = frozenset[int]


def propagate_one(lattice: Lattice, pauli: PauliFrame, time: int) -> PauliFrame:
    """Final-state Pauli of a single fault.

    Conjugates through later gates in timestep order, but only visits gates
    that touch the (growing) support; gates spawned by propagation always
    lie strictly later than the gate that spawned them, so a timestep heap
    preserves schedule order.  Agrees with the oracle's full-schedule sweep.
    """
    support = dict(pauli.support)
    gates = lattice.gates
    later = lattice.later_gates
    heap: list[tuple[int, int]] = []
    queued = set()

    def enqueue(qubit: int, after: int) -> None:
        for gid in later[qubit]:
            if gates[gid].timestep > after and gid not in queued:
                queued.add(gid)
                heapq.heappush(heap, (gates[gid].timestep, gid))

    for q in list(support):
        enqueue(q, time)
    while heap:
        _t, gid = heapq.heappop(heap)
        g = gates[gid]
        pair = support.get(g.control, "I") + support.get(g.target, "I")
        if pair == "II":
            continue
        table = CZ_TABLE if g.kind == "CZ" else CX_TABLE
        oc, ot = table[pair]
        for qubit, sym in ((g.control, oc), (g.target, ot)):
            if sym == "I":
                support.pop(qubit, None)
            else:
                fresh = qubit not in support
                support[qubit] = sym
                if fresh:
                    enqueue(qubit, g.timestep)
    return PauliFrame(support)


def flips_of_frame(lattice: Lattice, final: PauliFrame) -> FlipFrame:
    """Qubits whose measurement outcome the final-state Pauli inverts.

    X-basis qubits are flipped by Z or Y, Z-basis qubits by X or Y.
    """
    flipped = [q for q, sym in final.support.items()
               if symbols_anticommute(sym, lattice.basis(q))]
    return frozenset(flipped)


def propagate(lattice: Lattice, faults: list[FaultEvent]) -> FlipFrame:
    """Measurement-flip frame of a fault list (XOR of per-fault flips).

    Faults compose linearly because phases are discarded: the flip set of a
    union is the symmetric difference of the individual flip sets.
    """
    flips: set[int] = set()
    for ev in faults:
        final = propagate_one(lattice, ev.pauli, ev.time)
        flips ^= flips_of_frame(lattice, final)
    return frozenset(flips)


def syndrome(lattice: Lattice, frame: FlipFrame) -> Syndrome:
    """Checks containing an odd number of flipped faces."""
    counts: dict[int, int] = {}
    for q in frame:
        for chk in lattice.qubit_checks[q]:
            counts[int(chk)] = counts.get(int(chk), 0) + 1
    return frozenset(c for c, n in counts.items() if n % 2 == 1)


def logical_flips(lattice: Lattice, frame: FlipFrame) -> tuple[int, ...]:
    """Parity of |membrane support ∩ flipped qubits| for every membrane."""
    return tuple(len(mem.support.qubits() & frame) % 2 for mem in lattice.logicals)


@dataclass
class EventEffects:
    """Precomputed per-event flip data for the Monte Carlo hot loop.

    ``check_flat``/``check_offsets`` store each event's flipped-check list
    in CSR layout; ``logical_mask`` packs the membrane parities into one
    uint8 per event (bit m set = membrane m flipped).
    """

    n_events: int
    n_checks: int
    probabilities: np.ndarray      # (n_events,) float64
    check_flat: np.ndarray         # int32
    check_offsets: np.ndarray      # (n_events + 1,) int64
    logical_mask: np.ndarray       # (n_events,) uint8
    flip_flat: np.ndarray          # flipped-qubit lists, same CSR layout
    flip_offsets: np.ndarray

    def checks_of(self, i: int) -> np.ndarray:
        return self.check_flat[self.check_offsets[i]:self.check_offsets[i + 1]]

    def flips_of(self, i: int) -> np.ndarray:
        return self.flip_flat[self.flip_offsets[i]:self.flip_offsets[i + 1]]


def compute_event_effects(lattice: Lattice, events: list[FaultEvent]) -> EventEffects:
    check_lists: list[np.ndarray] = []
    flip_lists: list[np.ndarray] = []
    masks = np.zeros(len(events), dtype=np.uint8)
    probs = np.empty(len(events), dtype=np.float64)
    qubit_checks = lattice.qubit_checks
    qubit_membranes = lattice.qubit_membranes

    for i, ev in enumerate(events):
        final = propagate_one(lattice, ev.pauli, ev.time)
        flips = sorted(flips_of_frame(lattice, final))
        probs[i] = ev.probability
        flip_lists.append(np.asarray(flips, dtype=np.int32))
        mask = 0
        counts: dict[int, int] = {}
        for q in flips:
            mask ^= int(qubit_membranes[q])
            for chk in qubit_checks[q]:
                counts[int(chk)] = counts.get(int(chk), 0) + 1
        masks[i] = mask
        check_lists.append(np.asarray(
            sorted(c for c, n in counts.items() if n % 2 == 1), dtype=np.int32))

    check_offsets = np.zeros(len(events) + 1, dtype=np.int64)
    flip_offsets = np.zeros(len(events) + 1, dtype=np.int64)
    for i in range(len(events)):
        check_offsets[i + 1] = check_offsets[i] + len(check_lists[i])
        flip_offsets[i + 1] = flip_offsets[i] + len(flip_lists[i])
    check_flat = (np.concatenate(check_lists) if check_lists
                  else np.empty(0, dtype=np.int32)).astype(np.int32)
    flip_flat = (np.concatenate(flip_lists) if flip_lists
                 else np.empty(0, dtype=np.int32)).astype(np.int32)

    return EventEffects(n_events=len(events), n_checks=lattice.n_checks,
                        probabilities=probs, check_flat=check_flat,
                        check_offsets=check_offsets, logical_mask=masks,
                        flip_flat=flip_flat, flip_offsets=flip_offsets)
