import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracle
from tnsim.circuit import Circuit, Gate, PauliString, hh_circuit, random_circuit
from tnsim.errors import NoiseModelError
from tnsim.noise import (
    KrausChannel,
    NoiseModel,
    build_dm_network,
    channel_superoperator,
    density_matrix,
    dephasing,
    depolarizing,
    dm_probability,
    dm_reduced,
    identity_channel,
    load_noise_model,
    noise_model_from_dict,
    trace_expectation,
    two_qubit_depolarizing,
)

BELL = Circuit(2, [Gate("H", (0,)), Gate("CX", (0, 1))])
Z0 = PauliString.parse("Z0")


def mixed_model():
    nm = NoiseModel()
    nm.add(depolarizing(0.05), (1,))
    nm.add(two_qubit_depolarizing(0.1), (0, 2))
    nm.add(dephasing(0.08), (3,), "any")
    return nm


def mixed_oracle(g):
    out = []
    if g.qubits == (1,):
        out.append(((1,), oracle.depolarizing(0.05)))
    if len(g.qubits) == 2 and set(g.qubits) == {0, 2}:
        out.append(((0, 2), oracle.two_qubit_depolarizing(0.1)))
    if 3 in g.qubits:
        out.append(((3,), oracle.dephasing(0.08)))
    return out


class TestChannels:
    def test_incomplete_rejected(self):
        with pytest.raises(NoiseModelError):
            KrausChannel([0.5 * np.eye(2)])

    @pytest.mark.parametrize("p", [-0.1, 1.2, float("nan")])
    def test_probability_bounds(self, p):
        with pytest.raises(NoiseModelError):
            depolarizing(p)

    def test_identity_superoperator(self):
        sup = channel_superoperator(identity_channel()).data
        np.testing.assert_allclose(np.einsum("abcd->", sup * np.einsum("ac,bd->abcd", np.eye(2), np.eye(2))), 4)
        rho = np.array([[0.3, 0.2j], [-0.2j, 0.7]])
        np.testing.assert_allclose(np.einsum("abcd,cd->ab", sup, rho), rho)

    def test_dephasing_scales_coherence(self):
        p = 0.2
        plus = np.full((2, 2), 0.5, dtype=complex)
        out = dephasing(p).apply(plus)
        assert out[0, 1].real == pytest.approx(0.5 * (1 - 2 * p))
        assert out[0, 0].real == pytest.approx(0.5)

    @pytest.mark.parametrize("p", [0.0, 0.01, 0.3, 1.0])
    def test_depolarizing_bloch(self, p):
        out = depolarizing(p).apply(np.diag([1.0, 0.0]).astype(complex))
        assert (out[0, 0] - out[1, 1]).real == pytest.approx(1 - p)
        ref = oracle.apply_channel(np.diag([1.0, 0.0]).astype(complex), oracle.depolarizing(p), [0], 1)
        np.testing.assert_allclose(out, ref, atol=1e-15)

    def test_superoperator_matches_kraus_sum(self, rng):
        ch = KrausChannel(oracle.random_kraus(2, 3, rng))
        sup = channel_superoperator(ch).data
        rho = oracle.density_matrix(random_circuit(2, 6, 3))
        via_sup = np.einsum("abefcdgh,cdgh->abef", sup, rho.reshape(2, 2, 2, 2)).reshape(4, 4)
        np.testing.assert_allclose(via_sup, ch.apply(rho), atol=1e-12)


class TestNoiseModelDocument:
    def test_calibration_values(self):
        nm = noise_model_from_dict({"single_qubit_gate_errors": {"0": 8.906e-4, "1": 1.935e-3}})
        assert len(nm) == 2
        (q0, ch0), = nm.channels_after(Gate("H", (0,)))
        assert q0 == (0,) and ch0.label == "depolarizing(0.0008906)"
        (q1, ch1), = nm.channels_after(Gate("H", (1,)))
        assert ch1.label == "depolarizing(0.001935)"
        assert nm.channels_after(Gate("CX", (0, 1))) == []

    def test_empty(self):
        nm = noise_model_from_dict({})
        assert not nm
        np.testing.assert_allclose(density_matrix(BELL, nm), density_matrix(BELL, None))

    @pytest.mark.parametrize(
        "doc",
        [
            {"single_qubit_gate_errors": {"0": 1.2}},
            {"two_qubit_gate_errors": {"0": 0.1}},
            {"single_qubit_gate_errors": {"a": 0.1}},
            {"relaxation": {}},
            [],
        ],
    )
    def test_invalid(self, doc):
        with pytest.raises(NoiseModelError):
            noise_model_from_dict(doc)

    def test_load(self, tmp_path):
        path = tmp_path / "nm.json"
        path.write_text(json.dumps({"two_qubit_gate_errors": {"0-1": 0.02}, "dephasing": {"1": 0.1}}))
        nm = load_noise_model(path)
        assert len(nm.channels_after(Gate("CX", (1, 0)))) == 2

    def test_out_of_register(self):
        nm = NoiseModel().add(depolarizing(0.1), (5,))
        with pytest.raises(NoiseModelError):
            density_matrix(BELL, nm)


class TestDensityMatrixNetworks:
    def test_hadamard(self):
        rho = density_matrix(Circuit(1, [Gate("H", (0,))]))
        np.testing.assert_allclose(rho, np.full((2, 2), 0.5), atol=1e-15)

    def test_bell_probability(self):
        assert dm_probability(BELL, None, "00") == pytest.approx(0.5)

    @pytest.mark.parametrize("k", [1, 3, 10])
    @pytest.mark.parametrize("p", [0.001, 0.05])
    def test_hh_decay(self, k, p):
        nm = NoiseModel().add(depolarizing(p), (0,))
        assert trace_expectation(hh_circuit(1, k), nm, Z0) == pytest.approx((1 - p) ** (2 * k), abs=1e-12)

    @pytest.mark.parametrize("seed", range(3))
    def test_against_oracle(self, seed):
        c = random_circuit(4, 25, seed)
        ref = oracle.density_matrix(c, mixed_oracle)
        np.testing.assert_allclose(density_matrix(c, mixed_model()), ref, atol=1e-10)

    @pytest.mark.parametrize("simplify", [True, False])
    def test_trace_probability_rdm(self, simplify):
        c = random_circuit(4, 25, 7)
        nm = mixed_model()
        rho = oracle.density_matrix(c, mixed_oracle)
        obs = {0: "X", 3: "Z"}
        val = np.real(np.trace(oracle.pauli_operator(obs, 4) @ rho))
        net = build_dm_network(c, nm, "trace", obs=PauliString(tuple(obs.items())), simplify=simplify)
        assert trace_expectation(c, nm, PauliString(tuple(obs.items()))) == pytest.approx(val, abs=1e-10)
        assert len(net.open_legs) == 0
        assert dm_probability(c, nm, "0110") == pytest.approx(np.real(rho[0b0110, 0b0110]), abs=1e-10)
        sub = dm_reduced(c, nm, [1, 2], {0: 1})
        full = rho.reshape((2,) * 8)[1, :, :, :, 1, :, :, :]
        ref = np.einsum("abcdec->abde", full).reshape(4, 4)
        np.testing.assert_allclose(sub, ref, atol=1e-10)

    @given(seed=st.integers(0, 10_000), num_ops=st.integers(1, 4))
    def test_trace_one_under_random_channels(self, seed, num_ops):
        rng = np.random.default_rng(seed)
        nm = NoiseModel()
        nm.add(KrausChannel(oracle.random_kraus(1, num_ops, rng)), (0,), "any")
        nm.add(KrausChannel(oracle.random_kraus(2, num_ops, rng)), (1, 2))
        c = random_circuit(3, 15, seed)
        rho = density_matrix(c, nm)
        assert abs(np.trace(rho) - 1) < 1e-10
        np.testing.assert_allclose(rho, rho.conj().T, atol=1e-12)
        assert np.linalg.eigvalsh(rho).min() > -1e-10

    @pytest.mark.parametrize("seed", range(3))
    def test_ideal_probabilities_are_born(self, seed):
        c = random_circuit(5, 30, seed)
        amp = oracle.amplitude(c, [1, 0, 1, 1, 0])
        assert dm_probability(c, NoiseModel(), "10110") == pytest.approx(abs(amp) ** 2, abs=1e-10)

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            build_dm_network(BELL, None, "bogus")
