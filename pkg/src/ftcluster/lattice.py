"""Construction of the RHG and bias-tailored XZZX cluster-state lattices.

Geometry convention (doubled integer coordinates on a 3-torus):

* ``dims = (Lu, Lv, Lw)`` counts primal cells; coordinates live in
  ``Z_2Lu x Z_2Lv x Z_2Lw``.
* Qubits sit on face sites (exactly two odd coordinates) and edge sites
  (exactly one odd coordinate); there are ``6 * Lu * Lv * Lw`` of them.
* Primal checks sit on cell centres (all odd), dual checks on vertices
  (all even); a check's six faces are ``centre +- e_j``.
* Cluster edges join each face site to the four edge sites on its boundary,
  so every qubit has exactly four entangling-gate neighbours.
* The w axis is the teleportation axis: the gate schedule sweeps w-slices
  one layer at a time.

For the XZZX lattice the qubit types follow the alternating X-start /
Z-start column pattern: ancilla columns (u,v both odd or both even) are
X-type throughout, while the mixed-parity data columns alternate X/Z along
w, with the two column families out of phase.  All entangling edges then
join either X-X pairs (CZ) or X-Z pairs (CX with the X-type qubit as
control); Z-Z pairs never occur.  Because types depend only on coordinate
parities, the pattern closes under periodic wrap for every ``dims >= 2``;
no extra parity restriction on ``dims`` is needed.

Logical membranes are non-contractible planes of measured-basis operators:
for each sector and each non-teleportation axis ``a``, the membrane
collects every qubit of that sector whose site is crossed by the fixed
plane ``a = const``.  A residual error chain flips the membrane parity iff
it wraps the lattice along ``a``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pauli import GateRef, PauliFrame

PRIMAL = "primal"
DUAL = "dual"

_AXES = ("u", "v", "w")

# (axis, direction) -> sub-step within a layer block; vertical gates take
# sub-step 0, in-plane gates 1..4, so a layer occupies 5 sub-steps.
_INPLANE_STEP = {("u", +1): 1, ("u", -1): 2, ("v", +1): 3, ("v", -1): 4}


@dataclass(frozen=True)
class QubitSpec:
    id: int
    kind: str              # "X" or "Z"
    coord: tuple[int, int, int]

    @property
    def basis(self) -> str:
        """Measurement basis; X-type qubits are prepared in |+> and measured
        in X, Z-type prepared in |0> and measured in Z."""
        return self.kind


@dataclass(frozen=True)
class CellCheck:
    id: int
    sector: str
    faces: tuple[tuple[int, str], ...]   # (qubit id, measured basis)


@dataclass(frozen=True)
class LogicalMembrane:
    id: int
    sector: str
    axis: str               # lattice axis the membrane is non-contractible along
    support: PauliFrame     # measured-basis operator on every member qubit


@dataclass
class Lattice:
    """Immutable geometric description of one cluster-state memory."""

    kind: str
    dims: tuple[int, int, int]
    qubits: list[QubitSpec]
    gates: list[GateRef]
    checks: list[CellCheck]
    logicals: list[LogicalMembrane]
    prep_timestep: np.ndarray
    meas_timestep: np.ndarray
    n_primal: int

    # derived lookups, filled by _finalize
    coord_to_id: dict[tuple[int, int, int], int] = field(default_factory=dict)
    qubit_checks: np.ndarray | None = None      # (n_qubits, 2) check ids
    qubit_membranes: np.ndarray | None = None   # (n_qubits,) uint8 bitmask
    later_gates: list[list[int]] | None = None  # per qubit, gate ids by timestep

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    @property
    def n_checks(self) -> int:
        return len(self.checks)

    def basis(self, qubit: int) -> str:
        return self.qubits[qubit].kind

    def check_sector(self, check_id: int) -> str:
        return PRIMAL if check_id < self.n_primal else DUAL

    def _finalize(self) -> None:
        self.coord_to_id = {q.coord: q.id for q in self.qubits}

        containing: list[list[int]] = [[] for _ in range(self.n_qubits)]
        for chk in self.checks:
            for qubit, _basis in chk.faces:
                containing[qubit].append(chk.id)
        counts = {len(c) for c in containing}
        if counts != {2}:
            raise AssertionError(f"every qubit must sit in exactly 2 checks, got {counts}")
        self.qubit_checks = np.array(containing, dtype=np.int32)

        mask = np.zeros(self.n_qubits, dtype=np.uint8)
        for mem in self.logicals:
            for qubit in mem.support.qubits():
                mask[qubit] |= 1 << mem.id
        self.qubit_membranes = mask

        per_qubit: list[list[tuple[int, int]]] = [[] for _ in range(self.n_qubits)]
        for gid, g in enumerate(self.gates):
            per_qubit[g.control].append((g.timestep, gid))
            per_qubit[g.target].append((g.timestep, gid))
        self.later_gates = [[gid for _t, gid in sorted(lst)] for lst in per_qubit]


def _wrap(coord: tuple[int, int, int], extent: tuple[int, int, int]) -> tuple[int, int, int]:
    return (coord[0] % extent[0], coord[1] % extent[1], coord[2] % extent[2])


def _shift(coord: tuple[int, int, int], axis: int, step: int,
           extent: tuple[int, int, int]) -> tuple[int, int, int]:
    c = list(coord)
    c[axis] += step
    return _wrap(tuple(c), extent)


def _odd_axes(coord: tuple[int, int, int]) -> tuple[int, ...]:
    return tuple(i for i in range(3) if coord[i] % 2 == 1)


def _neighbours(coord: tuple[int, int, int],
                extent: tuple[int, int, int]) -> list[tuple[int, int, int]]:
    """The four cluster neighbours of a qubit site.

    Faces step along their odd axes, edges along their even axes; either way
    the neighbour is a site of the opposite kind.
    """
    odd = _odd_axes(coord)
    axes = odd if len(odd) == 2 else tuple(i for i in range(3) if i not in odd)
    out = []
    for axis in axes:
        for step in (+1, -1):
            out.append(_shift(coord, axis, step, extent))
    return out


def _xzzx_kind(coord: tuple[int, int, int]) -> str:
    """Type pattern of the bias-preserving lattice (see module docstring)."""
    pu, pv, pw = coord[0] % 2, coord[1] % 2, coord[2] % 2
    if pu == pv:
        return "X"                       # ancilla columns
    if pu == 1:                          # (odd u, even v) data columns
        return "X" if pw == 1 else "Z"
    return "Z" if pw == 1 else "X"       # (even u, odd v) data columns


def _build(kind: str, dims: tuple[int, int, int]) -> Lattice:
    if len(dims) != 3:
        raise ValueError("dims must be a triple of cell counts")
    if any(d < 2 for d in dims):
        raise ValueError(f"each dimension must be >= 2, got {dims}")
    dims = tuple(int(d) for d in dims)
    extent = tuple(2 * d for d in dims)

    sites = []
    for a in range(extent[0]):
        for b in range(extent[1]):
            for c in range(extent[2]):
                if len(_odd_axes((a, b, c))) in (1, 2):
                    sites.append((a, b, c))
    coord_to_id = {coord: i for i, coord in enumerate(sites)}

    qubits = []
    for i, coord in enumerate(sites):
        q_kind = "X" if kind == "rhg" else _xzzx_kind(coord)
        qubits.append(QubitSpec(id=i, kind=q_kind, coord=coord))

    gates = _schedule_gates(qubits, coord_to_id, extent)

    prep = np.zeros(len(qubits), dtype=np.int64)
    meas = np.zeros(len(qubits), dtype=np.int64)
    steps_of: list[list[int]] = [[] for _ in qubits]
    for g in gates:
        steps_of[g.control].append(g.timestep)
        steps_of[g.target].append(g.timestep)
    for i, steps in enumerate(steps_of):
        prep[i] = min(steps) - 1
        meas[i] = max(steps) + 1

    checks = []
    for sector, parity in ((PRIMAL, 1), (DUAL, 0)):
        for a in range(parity, extent[0], 2):
            for b in range(parity, extent[1], 2):
                for c in range(parity, extent[2], 2):
                    faces = []
                    for axis in range(3):
                        for step in (+1, -1):
                            qid = coord_to_id[_shift((a, b, c), axis, step, extent)]
                            faces.append((qid, qubits[qid].kind))
                    checks.append(CellCheck(id=len(checks), sector=sector,
                                            faces=tuple(sorted(faces))))
    n_primal = dims[0] * dims[1] * dims[2]

    logicals = []
    for sector in (PRIMAL, DUAL):
        for axis in (0, 1):
            support = {}
            for q in qubits:
                odd = _odd_axes(q.coord)
                if sector == PRIMAL:
                    # faces normal to `axis` lying in the plane axis-coord = 0
                    member = len(odd) == 2 and axis not in odd and q.coord[axis] == 0
                else:
                    # edges parallel to `axis` in the plane axis-coord = 1
                    member = odd == (axis,) and q.coord[axis] == 1
                if member:
                    support[q.id] = q.kind
            logicals.append(LogicalMembrane(id=len(logicals), sector=sector,
                                            axis=_AXES[axis],
                                            support=PauliFrame(support)))

    lat = Lattice(kind=kind, dims=dims, qubits=qubits, gates=gates,
                  checks=checks, logicals=logicals,
                  prep_timestep=prep, meas_timestep=meas, n_primal=n_primal)
    lat._finalize()
    return lat


def _schedule_gates(qubits: list[QubitSpec],
                    coord_to_id: dict[tuple[int, int, int], int],
                    extent: tuple[int, int, int]) -> list[GateRef]:
    """Assign every entangling edge a timestep.

    The schedule sweeps w-slices in order; slice w occupies sub-steps
    ``5w + 0..4``: the vertical gates arriving from slice w-1 run first,
    then the four in-plane direction classes.  Each qubit touches four
    gates at distinct timesteps and is never idle between its preparation
    (one step before its first gate) and measurement (one step after its
    last).  The periodic w seam (slice 2Lw-1 back to slice 0) cannot sit
    inside a linear order twice, so its vertical gates are scheduled last,
    at step ``5 * 2Lw``.
    """
    n_w = extent[2]
    gates = []
    seen = set()
    for q in qubits:
        if len(_odd_axes(q.coord)) != 2:
            continue                      # enumerate each face-edge pair once
        for nb_coord in _neighbours(q.coord, extent):
            nb = coord_to_id[nb_coord]
            key = (min(q.id, nb), max(q.id, nb))
            if key in seen:
                continue
            seen.add(key)
            other = qubits[nb]

            if q.coord[2] != other.coord[2]:
                lower = min(q.coord[2], other.coord[2])
                upper = max(q.coord[2], other.coord[2])
                if lower == 0 and upper == n_w - 1:   # seam gate
                    step = 5 * n_w
                else:
                    step = 5 * upper
            else:
                w = q.coord[2]
                anc, chain = (q, other) if q.coord[0] % 2 == q.coord[1] % 2 else (other, q)
                for axis in (0, 1):
                    d = (chain.coord[axis] - anc.coord[axis]) % extent[axis]
                    if d == 1:
                        step = 5 * w + _INPLANE_STEP[(_AXES[axis], +1)]
                        break
                    if d == extent[axis] - 1:
                        step = 5 * w + _INPLANE_STEP[(_AXES[axis], -1)]
                        break
                else:
                    raise AssertionError("in-plane gate with no axis offset")

            if q.kind == "X" and other.kind == "X":
                gate_kind, control, target = "CZ", min(q.id, nb), max(q.id, nb)
            elif q.kind == "X":
                gate_kind, control, target = "CX", q.id, nb
            elif other.kind == "X":
                gate_kind, control, target = "CX", nb, q.id
            else:
                raise AssertionError("Z-Z entangling edge; type pattern is broken")
            gates.append(GateRef(gate_kind, control, target, step))

    gates.sort(key=lambda g: (g.timestep, g.control, g.target))
    return gates


def build_rhg(dims: tuple[int, int, int]) -> Lattice:
    """Periodic RHG cluster state: every qubit X-type, all edges CZ."""
    return _build("rhg", dims)


def build_xzzx(dims: tuple[int, int, int]) -> Lattice:
    """Periodic bias-preserving XZZX cluster state.

    Same geometry as the RHG lattice; only the qubit types (and hence the
    CZ/CX gate assignment and the measured bases) differ.
    """
    return _build("xzzx", dims)


def build(kind: str, dims: tuple[int, int, int]) -> Lattice:
    if kind == "rhg":
        return build_rhg(dims)
    if kind == "xzzx":
        return build_xzzx(dims)
    raise ValueError(f"unknown lattice kind {kind!r}")


def schedule(lattice: Lattice) -> list[GateRef]:
    """The entangling gates in execution order."""
    return sorted(lattice.gates, key=lambda g: (g.timestep, g.control, g.target))


def check_operator(lattice: Lattice, check: CellCheck) -> PauliFrame:
    """The measured-basis Pauli product over the check's six faces."""
    return PauliFrame({qubit: basis for qubit, basis in check.faces})


def wrapping_flip_loop(lattice: Lattice, sector: str, axis: str) -> frozenset[int]:
    """A syndrome-free measurement-flip set that wraps the lattice along
    ``axis`` and crosses the matching membrane exactly once.

    Used by tests: it flips the (sector, axis) membrane parity and nothing
    else.  For the primal sector it is a straight line of faces normal to
    ``axis``; for the dual sector a straight line of edges parallel to it.
    """
    ax = _AXES.index(axis)
    extent = tuple(2 * d for d in lattice.dims)
    others = [i for i in range(3) if i != ax]
    fixed = [0, 0, 0]
    if sector == PRIMAL:
        fixed[others[0]], fixed[others[1]] = 1, 1   # odd transverse coords
    else:
        fixed[others[0]], fixed[others[1]] = 0, 0   # even transverse coords
    loop = []
    start = 0 if sector == PRIMAL else 1
    for val in range(start, extent[ax], 2):
        coord = list(fixed)
        coord[ax] = val
        loop.append(lattice.coord_to_id[tuple(coord)])
    return frozenset(loop)


def export_text(lattice: Lattice) -> str:
    """Structured text dump of the lattice for inspection and golden tests."""
    lines = [f"lattice {lattice.kind} dims {lattice.dims[0]} {lattice.dims[1]} {lattice.dims[2]}"]
    for q in lattice.qubits:
        a, b, c = q.coord
        lines.append(f"qubit {q.id} kind {q.kind} coord {a} {b} {c} "
                     f"prep {lattice.prep_timestep[q.id]} meas {lattice.meas_timestep[q.id]}")
    for g in schedule(lattice):
        lines.append(f"gate {g.kind} control {g.control} target {g.target} t {g.timestep}")
    for chk in lattice.checks:
        faces = " ".join(f"{q}:{b}" for q, b in chk.faces)
        lines.append(f"check {chk.id} {chk.sector} faces {faces}")
    for mem in lattice.logicals:
        sup = " ".join(f"{q}:{s}" for q, s in sorted(mem.support.support.items()))
        lines.append(f"logical {mem.id} {mem.sector} axis {mem.axis} support {sup}")
    return "\n".join(lines) + "\n"
