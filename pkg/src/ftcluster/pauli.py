"""Phase-free Pauli algebra on sparse multi-qubit frames.

Frames map qubit ids to single-qubit symbols from {I, X, Y, Z}; identity
entries are never stored.  All products discard global phases: syndrome bits
and logical-flip parities only ever depend on supports and (anti)commutation,
so the phase is dead weight everywhere in this package.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

SYMBOLS = "IXYZ"

# Phase-free single-qubit products: X*Z = Y, etc.  Encoded as (x bit, z bit)
# pairs XORed together: I=00, X=10, Y=11, Z=01.
_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_SYM = {v: k for k, v in _BITS.items()}


def symbol_product(a: str, b: str) -> str:
    """Product of two Pauli symbols with the phase discarded."""
    xa, za = _BITS[a]
    xb, zb = _BITS[b]
    return _SYM[(xa ^ xb, za ^ zb)]


def symbols_anticommute(a: str, b: str) -> bool:
    """True iff the two single-qubit Paulis anticommute."""
    xa, za = _BITS[a]
    xb, zb = _BITS[b]
    return (xa * zb + xb * za) % 2 == 1


def _conjugation_table(rules: Mapping[str, str]) -> dict[str, str]:
    """Expand single-qubit generator rules into the full 16-entry table.

    ``rules`` gives the image of the four generators XI, IX, ZI, IZ as
    two-character strings; all other pairs follow by multiplicativity.
    """
    table = {}
    for a in SYMBOLS:
        for b in SYMBOLS:
            oc, ot = "I", "I"
            for gen, present in (("XI", _BITS[a][0]), ("ZI", _BITS[a][1]),
                                 ("IX", _BITS[b][0]), ("IZ", _BITS[b][1])):
                if present:
                    img = rules[gen]
                    oc = symbol_product(oc, img[0])
                    ot = symbol_product(ot, img[1])
            table[a + b] = oc + ot
    return table


# Circuit identities: CZ maps X_c -> X_c Z_t, X_t -> Z_c X_t, Z untouched;
# CX (control c, target t) maps X_c -> X_c X_t, Z_t -> Z_c Z_t.
CZ_TABLE = _conjugation_table({"XI": "XZ", "IX": "ZX", "ZI": "ZI", "IZ": "IZ"})
CX_TABLE = _conjugation_table({"XI": "XX", "IX": "IX", "ZI": "ZI", "IZ": "ZZ"})


@dataclass(frozen=True)
class GateRef:
    """A two-qubit entangling gate placed in the schedule.

    ``kind`` is "CZ" or "CX"; for CX the control must be an X-type qubit and
    the target a Z-type qubit (the lattice builder enforces this).
    """

    kind: str
    control: int
    target: int
    timestep: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("CZ", "CX"):
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.control == self.target:
            raise ValueError("gate control and target must differ")


class PauliFrame:
    """Sparse phase-free multi-qubit Pauli operator.

    Immutable after construction; identity entries are dropped on input.
    """

    __slots__ = ("_support",)

    def __init__(self, support: Mapping[int, str] | Iterable[tuple[int, str]] = ()):
        items = support.items() if isinstance(support, Mapping) else support
        cleaned = {}
        for qubit, sym in items:
            if sym not in _BITS:
                raise ValueError(f"bad Pauli symbol {sym!r}")
            if sym != "I":
                cleaned[int(qubit)] = sym
        object.__setattr__(self, "_support", cleaned)

    @property
    def support(self) -> dict[int, str]:
        return dict(self._support)

    def symbol(self, qubit: int) -> str:
        return self._support.get(qubit, "I")

    def qubits(self) -> frozenset[int]:
        return frozenset(self._support)

    def weight(self) -> int:
        return len(self._support)

    def __len__(self) -> int:
        return len(self._support)

    def __bool__(self) -> bool:
        return bool(self._support)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PauliFrame):
            return NotImplemented
        return self._support == other._support

    def __hash__(self) -> int:
        return hash(frozenset(self._support.items()))

    def __repr__(self) -> str:
        body = ",".join(f"{q}:{s}" for q, s in sorted(self._support.items()))
        return f"PauliFrame({{{body}}})"


def frame(spec: Mapping[int, str] | Iterable[tuple[int, str]] = ()) -> PauliFrame:
    """Convenience constructor, `frame({0: "Z", 3: "X"})`."""
    return PauliFrame(spec)


def compose(a: PauliFrame, b: PauliFrame) -> PauliFrame:
    """Symbol-wise product of two frames, phase discarded.

    Composing a frame with itself yields the empty frame.
    """
    out = dict(a._support)
    for qubit, sym in b._support.items():
        prod = symbol_product(out.get(qubit, "I"), sym)
        if prod == "I":
            out.pop(qubit, None)
        else:
            out[qubit] = prod
    return PauliFrame(out)


def commutes(a: PauliFrame, b: PauliFrame) -> bool:
    """True iff the frames commute, i.e. they anticommute on an even number
    of qubits."""
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    clashes = 0
    for qubit, sym in small._support.items():
        other = large._support.get(qubit)
        if other is not None and symbols_anticommute(sym, other):
            clashes += 1
    return clashes % 2 == 0


def conjugate_through(p: PauliFrame, g: GateRef) -> PauliFrame:
    """Return U p U^dagger for U the gate, phases dropped.

    Qubits outside {control, target} are untouched; both gates are
    self-inverse so applying this twice is the identity.
    """
    pair = p.symbol(g.control) + p.symbol(g.target)
    if pair == "II":
        return p
    table = CZ_TABLE if g.kind == "CZ" else CX_TABLE
    oc, ot = table[pair]
    out = dict(p._support)
    for qubit, sym in ((g.control, oc), (g.target, ot)):
        if sym == "I":
            out.pop(qubit, None)
        else:
            out[qubit] = sym
    return PauliFrame(out)
