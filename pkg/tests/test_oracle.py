import numpy as np
import pytest

from ftcluster import lattice as L
from ftcluster import oracle as O
from ftcluster.pauli import GateRef, PauliFrame, frame


def test_single_qubit_tableaux():
    lat = _BareLattice(kinds=["X"], gates=[])
    tab = _prepare(lat)
    assert tab.generator_frame(0) == frame({0: "X"})


class _BareLattice:
    """Minimal stand-in exposing just what prepare_cluster needs."""

    def __init__(self, kinds, gates):
        self.qubits = [type("Q", (), {"id": i, "kind": k})() for i, k in enumerate(kinds)]
        self.gates = gates

    @property
    def n_qubits(self):
        return len(self.qubits)


def _prepare(bare):
    import ftcluster.oracle as oracle_mod

    n = bare.n_qubits
    x = np.zeros((n, n), dtype=bool)
    z = np.zeros((n, n), dtype=bool)
    for q in bare.qubits:
        (x if q.kind == "X" else z)[q.id, q.id] = True
    for g in sorted(bare.gates, key=lambda g: g.timestep):
        oracle_mod._apply_gate(x, z, g)
    return O.Tableau(n=n, x=x, z=z)


def test_two_qubit_cz_cluster():
    bare = _BareLattice(["X", "X"], [GateRef("CZ", 0, 1, 0)])
    tab = _prepare(bare)
    gens = {tab.generator_frame(i) for i in range(2)}
    assert gens == {frame({0: "X", 1: "Z"}), frame({0: "Z", 1: "X"})}


def test_cx_pair_cluster():
    bare = _BareLattice(["X", "Z"], [GateRef("CX", 0, 1, 0)])
    tab = _prepare(bare)
    gens = {tab.generator_frame(i) for i in range(2)}
    assert gens == {frame({0: "X", 1: "X"}), frame({0: "Z", 1: "Z"})}


@pytest.mark.parametrize("kind", ["rhg", "xzzx"])
def test_cluster_generators_commute(kind, small_lattices, tableaux):
    assert O.generators_commute(tableaux[kind])


@pytest.mark.parametrize("kind", ["rhg", "xzzx"])
def test_generators_match_closed_form(kind, small_lattices, tableaux):
    # the conjugated product-state generators must equal the neighbour form:
    # X-type i: X_i  * Z on X-type neighbours * X on Z-type neighbours;
    # Z-type i: Z_i * Z on X-type neighbours
    lat = small_lattices[kind]
    tab = tableaux[kind]
    neighbours = {q.id: [] for q in lat.qubits}
    for g in lat.gates:
        neighbours[g.control].append(g.target)
        neighbours[g.target].append(g.control)
    for q in lat.qubits:
        expected = {}
        if q.kind == "X":
            expected[q.id] = "X"
            for nb in neighbours[q.id]:
                expected[nb] = "Z" if lat.basis(nb) == "X" else "X"
        else:
            expected[q.id] = "Z"
            for nb in neighbours[q.id]:
                if lat.basis(nb) == "X":
                    expected[nb] = "Z"
        assert tab.generator_frame(q.id) == PauliFrame(expected)


@pytest.mark.parametrize("kind", ["rhg", "xzzx"])
def test_checks_and_membranes_are_stabilizers(kind, small_lattices, tableaux):
    lat, tab = small_lattices[kind], tableaux[kind]
    for chk in lat.checks:
        assert O.is_stabilizer(tab, L.check_operator(lat, chk))
    for mem in lat.logicals:
        assert O.is_stabilizer(tab, mem.support)


def test_generator_rows_are_stabilizers(tableaux):
    tab = tableaux["rhg"]
    for row in range(0, tab.n_generators, 7):
        assert O.is_stabilizer(tab, tab.generator_frame(row))


def test_single_z_not_a_stabilizer(tableaux):
    assert not O.is_stabilizer(tableaux["rhg"], frame({0: "Z"}))
    assert not O.is_stabilizer(tableaux["xzzx"], frame({0: "Z"}))


def test_gf2_rank():
    mat = np.array([[1, 0, 1], [0, 1, 1], [1, 1, 0]], dtype=np.uint8)
    assert O.gf2_rank(mat) == 2
    assert O.gf2_rank(np.eye(4, dtype=np.uint8)) == 4


# --- 1D teleportation chains -------------------------------------------------


def _x_support(n, sites):
    return PauliFrame({i: "X" for i in sites})


def test_standard_chain_matches_worked_case():
    xl, zl = O.verify_chain("standard", 3)
    assert xl == PauliFrame({1: "X", 3: "X", 5: "X", 7: "X", 8: "Z"})
    assert zl == PauliFrame({2: "X", 4: "X", 6: "X", 7: "Z"})


def test_x_start_chain_matches_worked_case():
    xl, zl = O.verify_chain("x-start", 3)
    assert xl == PauliFrame({1: "X", 3: "X", 5: "X", 7: "X", 8: "X"})
    assert zl == PauliFrame({2: "Z", 4: "Z", 6: "Z", 7: "Z"})


def test_z_start_chain_n3():
    xl, zl = O.verify_chain("z-start", 3)
    assert xl == PauliFrame({2: "X", 4: "X", 6: "X", 7: "X"})
    assert zl == PauliFrame({1: "Z", 3: "Z", 5: "Z", 7: "Z", 8: "Z"})


def test_chains_n0_pre_teleportation_forms():
    assert O.verify_chain("standard", 0) == (frame({1: "X", 2: "Z"}), frame({1: "Z"}))
    assert O.verify_chain("x-start", 0) == (frame({1: "X", 2: "X"}), frame({1: "Z"}))
    assert O.verify_chain("z-start", 0) == (frame({1: "X"}), frame({1: "Z", 2: "Z"}))


@pytest.mark.parametrize("n", range(1, 6))
def test_chain_closed_forms_general_n(n):
    xl, zl = O.verify_chain("standard", n)
    assert xl == PauliFrame({**{i: "X" for i in range(1, 2 * n + 1, 2)},
                             2 * n + 1: "X", 2 * n + 2: "Z"})
    assert zl == PauliFrame({**{i: "X" for i in range(2, 2 * n + 1, 2)},
                             2 * n + 1: "Z"})
    xl, zl = O.verify_chain("x-start", n)
    assert xl == PauliFrame({**{i: "X" for i in range(1, 2 * n + 1, 2)},
                             2 * n + 1: "X", 2 * n + 2: "X"})
    assert zl == PauliFrame({**{i: "Z" for i in range(2, 2 * n + 1, 2)},
                             2 * n + 1: "Z"})
    xl, zl = O.verify_chain("z-start", n)
    assert xl == PauliFrame({**{i: "X" for i in range(2, 2 * n + 1, 2)},
                             2 * n + 1: "X"})
    assert zl == PauliFrame({**{i: "Z" for i in range(1, 2 * n + 1, 2)},
                             2 * n + 1: "Z", 2 * n + 2: "Z"})


@pytest.mark.parametrize("n", range(0, 6))
def test_bias_preservation_of_generalized_chains(n):
    # the standard chain converts Z_L into X support (bias destroyed);
    # X-start and Z-start keep Z_L pure-Z and X_L pure-X
    _xl, zl = O.verify_chain("standard", n)
    if n >= 1:
        assert "X" in zl.support.values()
    for kind in ("x-start", "z-start"):
        xl, zl = O.verify_chain(kind, n)
        assert set(xl.support.values()) == {"X"}
        assert set(zl.support.values()) == {"Z"}


# --- exact propagation -------------------------------------------------------


def test_propagate_after_last_gate_is_identity(rhg222):
    q = 0
    f = frame({q: "Z"})
    t = int(rhg222.meas_timestep[q])
    assert O.propagate_exact(rhg222, f, t) == f


def test_propagate_matches_manual_conjugation(rhg222):
    from ftcluster.pauli import conjugate_through

    g0 = rhg222.gates[0]
    f = frame({g0.control: "X", g0.target: "X"})
    manual = f
    for g in L.schedule(rhg222):
        if g.timestep > g0.timestep:
            manual = conjugate_through(manual, g)
    assert O.propagate_exact(rhg222, f, g0.timestep) == manual


def test_statevector_phases_are_plus_one():
    # direct state-vector check that cluster generators stabilize the
    # prepared state with +1 sign (n <= 10 qubits)
    for kind, n_seg in (("standard", 2), ("x-start", 2), ("z-start", 2)):
        n_qubits = 2 * n_seg + 2
        kinds = [O._chain_kind(kind, i) for i in range(1, n_qubits + 1)]
        gates = O._chain_gates(kind, n_qubits)
        state = _product_state(kinds)
        for g in gates:
            state = _apply_two_qubit(state, g, n_qubits)
        stabs = O.chain_stabilizers(kind, n_seg)
        for frame_ in stabs.values():
            assert np.allclose(_apply_pauli(state, frame_, n_qubits), state)


def _product_state(kinds):
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    zero = np.array([1.0, 0.0])
    state = np.array([1.0])
    for k in kinds:
        state = np.kron(state, plus if k == "X" else zero)
    return state


def _apply_two_qubit(state, g, n_qubits):
    # chain sites are 1-based; qubit 1 maps to the most significant axis
    c, t = g.control - 1, g.target - 1
    psi = state.reshape([2] * n_qubits)
    if g.kind == "CZ":
        sl = [slice(None)] * n_qubits
        sl[c], sl[t] = 1, 1
        psi = psi.copy()
        psi[tuple(sl)] *= -1.0
    else:
        sl0 = [slice(None)] * n_qubits
        sl1 = [slice(None)] * n_qubits
        sl0[c], sl1[c] = 1, 1
        sl0[t], sl1[t] = 0, 1
        psi = psi.copy()
        a, b = psi[tuple(sl0)].copy(), psi[tuple(sl1)].copy()
        psi[tuple(sl0)], psi[tuple(sl1)] = b, a
    return psi.reshape(-1)


def _apply_pauli(state, frame_, n_qubits):
    mats = {"X": np.array([[0, 1], [1, 0]], dtype=complex),
            "Y": np.array([[0, -1j], [1j, 0]]),
            "Z": np.array([[1, 0], [0, -1]], dtype=complex)}
    psi = state.astype(complex).reshape([2] * n_qubits)
    for site, sym in frame_.support.items():
        psi = np.moveaxis(np.tensordot(mats[sym], psi, axes=([1], [site - 1])),
                          0, site - 1)
    return psi.reshape(-1)
