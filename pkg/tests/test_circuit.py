import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracle
from tnsim.circuit import (
    GATE_KINDS,
    NUM_PARAMS,
    Circuit,
    Gate,
    PauliString,
    gate_matrix,
    gate_tensor,
    nearest_neighborize,
    parse,
    parse_observable,
    random_circuit,
    route_gate,
    to_text,
)
from tnsim.errors import ParseError

UNITARY_KINDS = [k for k in GATE_KINDS if k != "MEASURE"]


class TestParse:
    def test_bell(self):
        c = parse("qubits 2\nh 0\ncx 0 1")
        assert c.num_qubits == 2
        assert c.gates == (Gate("H", (0,)), Gate("CX", (0, 1)))

    def test_rotation(self):
        c = parse("qubits 1\nrz 0 1.5708")
        assert c.gates == (Gate("RZ", (0,), (1.5708,)),)

    def test_out_of_range_reports_line(self):
        with pytest.raises(ParseError, match="qubit out of range at line 2"):
            parse("qubits 2\ncx 0 2")

    @pytest.mark.parametrize(
        "text, fragment",
        [
            ("h 0", "header"),
            ("qubits 2\nfoo 0", "unknown gate"),
            ("qubits 2\nrx 0", "parameter"),
            ("qubits 2\ncx 1 1", "repeated"),
            ("qubits 2\nmeasure 0\nh 1", "after measure"),
            ("qubits 1\nrx 0 nan", "non-finite"),
            ("", "header"),
        ],
    )
    def test_errors(self, text, fragment):
        with pytest.raises(ParseError, match=fragment):
            parse(text)

    def test_comments_and_measure_suffix(self):
        c = parse("# demo\nqubits 3\nh 0  # first\nmeasure 2\nmeasure 0\n")
        assert c.measured_qubits == [0, 2]
        assert len(c.unitary_part()) == 1

    def test_round_trip(self):
        c = random_circuit(5, 30, seed=3)
        assert parse(to_text(c)).gates == c.gates


class TestGateValidation:
    @pytest.mark.parametrize("kind", UNITARY_KINDS)
    def test_arity_and_params(self, kind):
        n_q = 2 if kind in ("CX", "CZ", "SWAP", "ISWAP", "FSIM") else 1
        g = Gate(kind, tuple(range(n_q)), (0.1,) * NUM_PARAMS.get(kind, 0))
        assert len(g.qubits) == n_q
        with pytest.raises(ValueError):
            Gate(kind, tuple(range(n_q + 1)), g.params)
        with pytest.raises(ValueError):
            Gate(kind, g.qubits, g.params + (0.2,))

    def test_measure_must_be_suffix(self):
        with pytest.raises(ValueError, match="suffix"):
            Circuit(2, [Gate("MEASURE", (0,)), Gate("H", (1,))])


class TestGateMatrices:
    def test_hadamard(self):
        np.testing.assert_allclose(gate_matrix(Gate("H", (0,))), np.array([[1, 1], [1, -1]]) / math.sqrt(2))

    def test_cx_tensor_entries(self):
        t = gate_tensor(Gate("CX", (0, 1))).data  # (out0, out1, in0, in1)
        assert t[1, 1, 1, 0] == 1
        assert t[1, 0, 1, 0] == 0

    def test_fsim_on_01(self):
        t = gate_tensor(Gate("FSIM", (0, 1), (math.pi / 2, 0.0))).data
        out = np.einsum("abcd,cd->ab", t, np.array([[0, 1], [0, 0]]))
        np.testing.assert_allclose(out, [[0, 0], [-1j, 0]], atol=1e-15)

    @pytest.mark.parametrize("kind", UNITARY_KINDS)
    def test_against_reference(self, kind):
        params = tuple(0.37 * (i + 1) for i in range(NUM_PARAMS.get(kind, 0)))
        n_q = 2 if kind in ("CX", "CZ", "SWAP", "ISWAP", "FSIM") else 1
        m = gate_matrix(Gate(kind, tuple(range(n_q)), params))
        np.testing.assert_allclose(m, oracle.matrix(kind, params), atol=1e-15)


class TestRouting:
    def test_adjacent_unchanged(self):
        assert route_gate(Gate("CX", (0, 1))) == ([], Gate("CX", (0, 1)), [])

    def test_one_hop(self):
        before, moved, after = route_gate(Gate("CX", (0, 2)))
        assert before + [moved] + after == [Gate("SWAP", (0, 1)), Gate("CX", (1, 2)), Gate("SWAP", (0, 1))]

    @pytest.mark.parametrize("seed", range(3))
    def test_unitary_preserved(self, seed):
        c = random_circuit(5, 25, seed)
        routed = nearest_neighborize(c)
        assert all(abs(g.qubits[0] - g.qubits[1]) == 1 for g in routed.gates if len(g.qubits) == 2)
        np.testing.assert_allclose(oracle.unitary(routed), oracle.unitary(c), atol=1e-10)

    @given(a=st.integers(0, 7), b=st.integers(0, 7))
    def test_operand_order_kept(self, a, b):
        if a == b:
            return
        _, moved, _ = route_gate(Gate("CX", (a, b)))
        assert (moved.qubits[0] < moved.qubits[1]) == (a < b)
        assert abs(moved.qubits[0] - moved.qubits[1]) == 1


class TestPauli:
    def test_parse(self):
        p = PauliString.parse("Z1 x0")
        assert p.ops == ((0, "X"), (1, "Z"))
        assert PauliString.parse("I").ops == ()

    def test_duplicate_qubit(self):
        with pytest.raises(ParseError):
            PauliString.parse("Z0 X0")

    def test_observable_sum(self):
        terms = parse_observable("0.5 Z0 Z1 + -1*X2 + Y0")
        assert [c for c, _ in terms] == [0.5, -1.0, 1.0]
        assert str(terms[1][1]) == "X2"
