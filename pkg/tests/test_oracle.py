"""Sanity checks of the reference simulator against hand-derived values."""

import math

import numpy as np
import pytest

import oracle
from tnsim.circuit import Circuit, Gate


class TestOracle:
    def test_bell(self):
        c = Circuit(2, [Gate("H", (0,)), Gate("CX", (0, 1))])
        np.testing.assert_allclose(oracle.statevector(c), [1 / math.sqrt(2), 0, 0, 1 / math.sqrt(2)])

    def test_qubit_zero_is_most_significant(self):
        c = Circuit(3, [Gate("X", (0,))])
        assert oracle.statevector(c)[4] == 1

    def test_fsim_swaps_with_phase(self):
        c = Circuit(2, [Gate("X", (1,)), Gate("FSIM", (0, 1), (math.pi / 2, 0.0))])
        np.testing.assert_allclose(oracle.statevector(c), [0, 0, -1j, 0], atol=1e-15)

    @pytest.mark.parametrize("kind", ["H", "S", "T", "RX", "RY", "RZ", "CX", "CZ", "SWAP", "ISWAP", "FSIM"])
    def test_unitary(self, kind):
        params = {"RX": (0.3,), "RY": (1.1,), "RZ": (-2.0,), "FSIM": (0.4, 0.9)}.get(kind, ())
        m = oracle.matrix(kind, params)
        np.testing.assert_allclose(m @ m.conj().T, np.eye(m.shape[0]), atol=1e-14)

    def test_channel_trace_and_depolarizing_z(self):
        rho = np.diag([1.0, 0.0]).astype(complex)
        out = oracle.apply_channel(rho, oracle.depolarizing(0.3), [0], 1)
        assert np.trace(out).real == pytest.approx(1.0)
        assert (out[0, 0] - out[1, 1]).real == pytest.approx(0.7)

    def test_partial_trace_of_bell(self):
        psi = oracle.statevector(Circuit(2, [Gate("H", (0,)), Gate("CX", (0, 1))]))
        rho = np.outer(psi, psi.conj())
        np.testing.assert_allclose(oracle.partial_trace(rho, [1], 2), np.eye(2) / 2, atol=1e-15)

    def test_optimal_flops_matrix_chain(self):
        # A(i2,j4) B(j4,k8) C(k8,l2)
        labels = [["i", "j"], ["j", "k"], ["k", "l"]]
        ext = {"i": 2, "j": 4, "k": 8, "l": 2}
        assert oracle.optimal_flops(labels, ext, ["i", "l"]) == 80
