"""Slow exact stabilizer-tableau simulator used as ground truth.

Tracks stabilizer generators as binary-symplectic rows (phases ignored:
syndrome bits depend only on commutation).  Deliberately simple - plain
GF(2) Gaussian elimination, per-gate row updates - so it can arbitrate
disagreements with the fast propagation path on desk-size lattices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import Lattice, schedule
from .pauli import GateRef, PauliFrame, compose, conjugate_through


@dataclass
class Tableau:
    """n mutually commuting, independent generators over n qubits."""

    n: int
    x: np.ndarray   # (n_gen, n) bool, X components
    z: np.ndarray   # (n_gen, n) bool, Z components

    @property
    def n_generators(self) -> int:
        return self.x.shape[0]

    def generator_frame(self, row: int) -> PauliFrame:
        support = {}
        for q in range(self.n):
            xb, zb = bool(self.x[row, q]), bool(self.z[row, q])
            if xb or zb:
                support[q] = "Y" if (xb and zb) else ("X" if xb else "Z")
        return PauliFrame(support)


def frame_to_bits(p: PauliFrame, n: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.zeros(n, dtype=bool)
    z = np.zeros(n, dtype=bool)
    for q, sym in p.support.items():
        if sym in ("X", "Y"):
            x[q] = True
        if sym in ("Z", "Y"):
            z[q] = True
    return x, z


def bits_to_frame(x: np.ndarray, z: np.ndarray) -> PauliFrame:
    support = {}
    for q in np.nonzero(x | z)[0]:
        xb, zb = bool(x[q]), bool(z[q])
        support[int(q)] = "Y" if (xb and zb) else ("X" if xb else "Z")
    return PauliFrame(support)


def _apply_gate(x: np.ndarray, z: np.ndarray, g: GateRef) -> None:
    """Conjugate rows (or a single vector) through one gate, in place."""
    c, t = g.control, g.target
    if g.kind == "CZ":
        z[..., t] ^= x[..., c]
        z[..., c] ^= x[..., t]
    else:  # CX
        x[..., t] ^= x[..., c]
        z[..., c] ^= z[..., t]


def prepare_cluster(lattice: Lattice) -> Tableau:
    """Tableau of the noiseless cluster state.

    Starts from the product-state generators (X_i for X-type sites, Z_i for
    Z-type) and conjugates through every entangling gate in schedule order.
    """
    n = lattice.n_qubits
    x = np.zeros((n, n), dtype=bool)
    z = np.zeros((n, n), dtype=bool)
    for q in lattice.qubits:
        if q.kind == "X":
            x[q.id, q.id] = True
        else:
            z[q.id, q.id] = True
    for g in schedule(lattice):
        _apply_gate(x, z, g)
    return Tableau(n=n, x=x, z=z)


def symplectic_products(t: Tableau, p: PauliFrame) -> np.ndarray:
    """Commutation bits of p against every generator (1 = anticommutes)."""
    px, pz = frame_to_bits(p, t.n)
    return ((t.x & pz) ^ (t.z & px)).sum(axis=1) % 2


def generators_commute(t: Tableau) -> bool:
    xi = t.x.astype(np.uint8)
    zi = t.z.astype(np.uint8)
    form = (xi @ zi.T + zi @ xi.T) % 2
    return not form.any()


def is_stabilizer(t: Tableau, p: PauliFrame) -> bool:
    """True iff p (phase-free) lies in the group generated by the rows.

    Decided by a GF(2) rank comparison: p is in the row span iff appending
    it does not increase the rank of the (x|z) matrix.
    """
    rows = np.concatenate([t.x, t.z], axis=1).astype(np.uint8)
    px, pz = frame_to_bits(p, t.n)
    target = np.concatenate([px, pz]).astype(np.uint8)
    base = gf2_rank(rows)
    return gf2_rank(np.vstack([rows, target])) == base


def gf2_rank(mat: np.ndarray) -> int:
    """Rank over GF(2) by plain Gaussian elimination."""
    m = mat.copy() % 2
    rank = 0
    n_rows, n_cols = m.shape
    for col in range(n_cols):
        pivot = None
        for r in range(rank, n_rows):
            if m[r, col]:
                pivot = r
                break
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        hits = np.nonzero(m[:, col])[0]
        for r in hits:
            if r != rank:
                m[r] ^= m[rank]
        rank += 1
        if rank == n_rows:
            break
    return rank


def fault_time(lattice: Lattice, location: str, qubit: int | None = None,
               gate_id: int | None = None) -> int:
    """Schedule time of a fault; gates with strictly later timesteps act on it."""
    if location == "prep":
        return int(lattice.prep_timestep[qubit])
    if location == "meas":
        return int(lattice.meas_timestep[qubit])
    if location == "gate":
        return lattice.gates[gate_id].timestep
    raise ValueError(f"unknown fault location {location!r}")


def propagate_exact(lattice: Lattice, pauli, time: int | None = None) -> PauliFrame:
    """Brute-force fault propagation oracle.

    Conjugates the fault through every entangling gate with timestep
    strictly greater than ``time``, sweeping the whole schedule.  Accepts
    either a (PauliFrame, time) pair or a noise.FaultEvent.
    """
    if time is None:
        pauli, time = pauli.pauli, pauli.time
    x, z = frame_to_bits(pauli, lattice.n_qubits)
    for g in schedule(lattice):
        if g.timestep > time:
            _apply_gate(x, z, g)
    return bits_to_frame(x, z)


# ---------------------------------------------------------------------------
# 1D teleportation chains


def _chain_gates(kind: str, n_qubits: int) -> list[GateRef]:
    """Entangling gates of a 1D chain with qubits 1..n_qubits.

    ``kind`` selects the type layout: "standard" (all X-type, CZ only),
    "x-start" (odd sites X-type) or "z-start" (odd sites Z-type).  The first
    qubit holds the arbitrary input state but is treated as its positional
    type for entangling and measurement.
    """
    gates = []
    for i in range(1, n_qubits):
        a, b = i, i + 1
        ka, kb = _chain_kind(kind, a), _chain_kind(kind, b)
        if ka == "X" and kb == "X":
            gates.append(GateRef("CZ", a, b, timestep=i))
        elif ka == "X":
            gates.append(GateRef("CX", a, b, timestep=i))
        else:
            gates.append(GateRef("CX", b, a, timestep=i))
    return gates


def _chain_kind(kind: str, position: int) -> str:
    if kind == "standard":
        return "X"
    if kind == "x-start":
        return "X" if position % 2 == 1 else "Z"
    if kind == "z-start":
        return "Z" if position % 2 == 1 else "X"
    raise ValueError(f"unknown chain kind {kind!r}")


def chain_stabilizers(kind: str, n_segments: int) -> dict[int, PauliFrame]:
    """Post-entanglement stabilizers K_i of the chain, keyed by centre site.

    Sites are 1-based; 2n+2 qubits teleport through n segments.  Site 1
    carries the input state, so only i >= 2 are stabilized.
    """
    n_qubits = 2 * n_segments + 2
    gates = _chain_gates(kind, n_qubits)
    out = {}
    for i in range(2, n_qubits + 1):
        base = PauliFrame({i: _chain_kind(kind, i)})
        for g in gates:
            base = conjugate_through(base, g)
        out[i] = base
    return out


def verify_chain(kind: str, n_segments: int) -> tuple[PauliFrame, PauliFrame]:
    """Logical operator pair of the 1D teleportation chain.

    Conjugates the input logicals X_1, Z_1 through the chain's entangling
    gates, then multiplies by chain stabilizers until every measured site
    (2..2n) carries only its own measurement basis.  The returned pair is
    the teleportation identity in closed form, e.g. for the standard chain
    at n=3: X_L = X1 X3 X5 X7 Z8 and Z_L = X2 X4 X6 Z7.
    """
    if n_segments < 0:
        raise ValueError("segment count must be >= 0")
    n_qubits = 2 * n_segments + 2
    gates = _chain_gates(kind, n_qubits)
    stabs = chain_stabilizers(kind, n_segments)

    logicals = []
    for sym in ("X", "Z"):
        op = PauliFrame({1: sym})
        for g in gates:
            op = conjugate_through(op, g)
        # the first 2n qubits are measured; sweep left to right clearing any
        # symbol that anticommutes with the site's measurement basis
        for site in range(1, 2 * n_segments + 1):
            current = op.symbol(site)
            if current in ("I", _chain_kind(kind, site)):
                continue
            # K_{site+1} carries the complementary symbol on `site` and
            # support only at >= site, so one multiplication clears the
            # offending symbol without disturbing earlier sites.
            op = compose(op, stabs[site + 1])
            assert op.symbol(site) in ("I", _chain_kind(kind, site))
        logicals.append(op)
    return logicals[0], logicals[1]
