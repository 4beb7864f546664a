import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracle
from tnsim.circuit import Circuit, Gate, PauliString, cat_circuit, random_circuit
from tnsim.errors import DimensionError, ParseError
from tnsim.executor import contract_network
from tnsim.network import (
    OPEN,
    TensorNetwork,
    build_amplitude_network,
    build_expectation_network,
    build_rdm_network,
    build_slice_network,
    build_state_network,
    lightcone,
    parse_bitstring,
)
from tnsim.tensor import Tensor

BELL = Circuit(2, [Gate("H", (0,)), Gate("CX", (0, 1))])
R2 = 1 / math.sqrt(2)


def value(net):
    t, _ = contract_network(net)
    return t.data


def check_structure(net):
    owners = {}
    for nid, t in net.nodes.items():
        for lab, ext in zip(t.labels, t.extents):
            owners.setdefault(lab, []).append((nid, ext))
    for lab, own in owners.items():
        if lab in net.open_legs:
            assert len(own) == 1
        else:
            assert len(own) == 2
            assert own[0][1] == own[1][1]


class TestTensorNetwork:
    def test_dangling_mode_rejected(self):
        with pytest.raises(ValueError, match="dangling"):
            TensorNetwork({0: Tensor([1, 0], ["a"])}, [])

    def test_extent_mismatch(self):
        with pytest.raises(DimensionError):
            TensorNetwork({0: Tensor([1, 0], ["a"]), 1: Tensor([1, 0, 0], ["a"])}, [])

    def test_hyperedge_rejected(self):
        nodes = {i: Tensor([1, 0], ["a"]) for i in range(3)}
        with pytest.raises(ValueError, match="shared by 3"):
            TensorNetwork(nodes, [])

    def test_fingerprint_ignores_values(self):
        a = build_amplitude_network(BELL, "00")
        b = build_amplitude_network(BELL, "11")
        assert a.fingerprint() == b.fingerprint()
        assert a.fingerprint() != build_amplitude_network(cat_circuit(3), "000").fingerprint()

    def test_replace_nodes_checks_modes(self):
        net = build_state_network(BELL)
        with pytest.raises(ValueError):
            net.replace_nodes({0: Tensor([1, 0, 0], net.nodes[0].labels)})


class TestBitstrings:
    @pytest.mark.parametrize("text", ["01-1", "0,1,-1,1", [0, 1, -1, 1]])
    def test_forms(self, text):
        assert parse_bitstring(text, 4) == (0, 1, OPEN, 1)

    @pytest.mark.parametrize("text", ["012", "0,2", "01"])
    def test_bad(self, text):
        with pytest.raises(ParseError):
            parse_bitstring(text, 3)


class TestStateNetwork:
    def test_empty_one_qubit(self):
        net = build_state_network(Circuit(1, []))
        assert len(net) == 1 and len(net.open_legs) == 1
        np.testing.assert_allclose(value(net), [1, 0])

    def test_single_h(self):
        net = build_state_network(Circuit(1, [Gate("H", (0,))]))
        assert len(net) == 2
        np.testing.assert_allclose(value(net), [R2, R2])

    def test_bell(self):
        net = build_state_network(BELL)
        assert len(net) == 4
        np.testing.assert_allclose(value(net).reshape(-1), [R2, 0, 0, R2], atol=1e-15)

    @given(seed=st.integers(0, 10_000), n=st.integers(1, 6), g=st.integers(0, 20))
    def test_structure_and_value(self, seed, n, g):
        c = random_circuit(n, g, seed)
        net = build_state_network(c)
        check_structure(net)
        assert net.meta["qubits"] == list(range(n))
        np.testing.assert_allclose(value(net).reshape(-1), oracle.statevector(c), atol=1e-10)


class TestAmplitude:
    def test_empty(self):
        assert complex(value(build_amplitude_network(Circuit(3, []), "000"))) == 1

    @pytest.mark.parametrize("bits, expected", [("01", 0.0), ("11", R2)])
    def test_bell(self, bits, expected):
        assert complex(value(build_amplitude_network(BELL, bits))) == pytest.approx(expected, abs=1e-15)

    @pytest.mark.parametrize("seed", range(4))
    def test_random(self, seed):
        c = random_circuit(10, 30, seed)
        bits = np.random.default_rng(seed).integers(0, 2, 10)
        got = complex(value(build_amplitude_network(c, bits)))
        assert got == pytest.approx(oracle.amplitude(c, bits), abs=1e-10)

    def test_open_entries_rejected(self):
        with pytest.raises(ValueError):
            build_amplitude_network(BELL, "0-")


class TestSlice:
    def test_bell(self):
        np.testing.assert_allclose(value(build_slice_network(BELL, "0-")), [R2, 0])

    def test_cat_raw_value(self):
        bits = [OPEN if q in (2, 47) else 0 for q in range(60)]
        np.testing.assert_allclose(value(build_slice_network(cat_circuit(60), bits)).reshape(-1), [R2, 0, 0, 0])

    @pytest.mark.parametrize("seed", range(4))
    def test_random(self, seed):
        rng = np.random.default_rng(seed)
        c = random_circuit(8, 30, seed)
        bits = rng.integers(0, 2, 8).tolist()
        for q in rng.choice(8, 3, replace=False):
            bits[q] = OPEN
        net = build_slice_network(c, bits)
        assert net.meta["qubits"] == [q for q in range(8) if bits[q] == OPEN]
        np.testing.assert_allclose(value(net).reshape(-1), oracle.slice_vector(c, bits), atol=1e-10)


class TestExpectation:
    def test_bell_zz(self):
        assert complex(value(build_expectation_network(BELL, PauliString.parse("Z0 Z1")))) == pytest.approx(1)

    def test_plus_z(self):
        c = Circuit(1, [Gate("H", (0,))])
        assert abs(complex(value(build_expectation_network(c, PauliString.parse("Z0"))))) < 1e-15

    @pytest.mark.parametrize("simplify", [True, False])
    @pytest.mark.parametrize("seed", range(3))
    def test_random(self, seed, simplify):
        rng = np.random.default_rng(seed)
        c = random_circuit(8, 30, seed)
        ops = {int(q): str(rng.choice(list("XYZ"))) for q in rng.choice(8, 3, replace=False)}
        p = PauliString(tuple(ops.items()))
        got = complex(value(build_expectation_network(c, p, simplify=simplify)))
        assert got.real == pytest.approx(oracle.expectation(c, ops), abs=1e-10)
        assert abs(got.imag) < 1e-10

    def test_lightcone_drops_unrelated_gates(self):
        c = Circuit(3, [Gate("H", (0,)), Gate("H", (2,)), Gate("CX", (1, 2))])
        assert lightcone(c, [0]).gates == (Gate("H", (0,)),)
        assert len(build_expectation_network(c, PauliString.parse("Z0"))) < len(
            build_expectation_network(c, PauliString.parse("Z0"), simplify=False)
        )


class TestRdm:
    def test_bell_marginal(self):
        np.testing.assert_allclose(value(build_rdm_network(BELL, [0])), np.eye(2) / 2, atol=1e-15)

    def test_bell_projected(self):
        np.testing.assert_allclose(value(build_rdm_network(BELL, [1], {0: 0})), np.diag([0.5, 0]), atol=1e-15)

    def test_overlap_rejected(self):
        with pytest.raises(ValueError):
            build_rdm_network(BELL, [0], {0: 1})

    @pytest.mark.parametrize("keep", [[0], [1, 4], [0, 2, 5]])
    def test_random_partial_trace(self, keep):
        c = random_circuit(6, 30, 11)
        psi = oracle.statevector(c)
        ref = oracle.partial_trace(np.outer(psi, psi.conj()), keep, 6)
        d = 2 ** len(keep)
        np.testing.assert_allclose(value(build_rdm_network(c, keep)).reshape(d, d), ref, atol=1e-10)
