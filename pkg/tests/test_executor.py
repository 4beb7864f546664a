import math

import numpy as np
import pytest

import oracle
from netgen import random_network
from tnsim.circuit import Circuit, Gate, PauliString, random_circuit
from tnsim.errors import InternalConsistencyError
from tnsim.executor import ExecutionStats, contract_network, execute, expectation_sliced
from tnsim.network import build_amplitude_network, build_expectation_network
from tnsim.planner import BYTES_PER_ELEMENT, ContractionPlan, fuse_small_tensors, path_cost, plan

BELL = Circuit(2, [Gate("H", (0,)), Gate("CX", (0, 1))])
BIG = 1 << 40


def with_slices(net, p, labels):
    flops, largest = path_cost(net, p.steps, labels)
    return ContractionPlan(
        steps=p.steps,
        sliced_indices=[(l, net.extent(l)) for l in labels],
        est_flops=flops,
        est_max_intermediate=largest,
        fingerprint=p.fingerprint,
        open_legs=p.open_legs,
    )


class TestExecute:
    def test_bell_amplitude(self):
        net = build_amplitude_network(BELL, "00")
        t, _ = contract_network(net, fuse=False)
        assert complex(t.data) == pytest.approx(1 / math.sqrt(2))

    def test_bell_one_sliced_bond(self):
        net = build_amplitude_network(BELL, "00")
        p = plan(net, BIG)
        sliced = with_slices(net, p, [net.bonds[0]])
        assert sliced.num_slices == 2
        assert complex(execute(net, sliced).data) == pytest.approx(1 / math.sqrt(2))

    def test_two_sliced_indices_on_expectation(self):
        c = random_circuit(10, 40, 4)
        net = fuse_small_tensors(build_expectation_network(c, PauliString.parse("Z1 X4 Y7"), simplify=False))
        p = plan(net, BIG)
        ref = execute(net, p).data
        sliced = with_slices(net, p, net.bonds[3:5])
        assert sliced.num_slices == 4
        assert complex(execute(net, sliced).data) == pytest.approx(complex(ref), abs=1e-10)
        assert complex(ref).real == pytest.approx(oracle.expectation(c, {1: "Z", 4: "X", 7: "Y"}), abs=1e-10)

    @pytest.mark.parametrize("seed", range(12))
    def test_slice_sum_identity_every_bond(self, seed):
        net = random_network(seed, 4 + seed % 9, num_open=seed % 3)
        p = plan(net, BIG)
        ref = execute(net, p).data
        for lab in net.bonds:
            np.testing.assert_allclose(execute(net, with_slices(net, p, [lab])).data, ref, atol=1e-10, rtol=1e-10)

    def test_workers_do_not_change_bits(self):
        net = random_network(3, 12, num_open=2)
        p = with_slices(net, plan(net, BIG), net.bonds[:3])
        a = execute(net, p, workers=1).data
        b = execute(net, p, workers=8).data
        assert a.tobytes() == b.tobytes()

    def test_peak_respects_budget(self):
        net = fuse_small_tensors(build_amplitude_network(random_circuit(10, 60, 1), "0" * 10))
        budget = 64 * BYTES_PER_ELEMENT
        p = plan(net, budget)
        stats = ExecutionStats()
        execute(net, p, stats=stats)
        assert stats.slices == p.num_slices
        assert stats.peak_intermediate * BYTES_PER_ELEMENT <= budget

    def test_result_modes_follow_open_legs(self):
        net = random_network(2, 6, num_open=3)
        t = execute(net, plan(net, BIG))
        assert t.labels == net.open_legs

    def test_foreign_plan_rejected(self):
        p = plan(random_network(1, 5), BIG)
        with pytest.raises(ValueError):
            execute(random_network(2, 6), p)

    def test_lying_plan_detected(self):
        net = random_network(4, 8)
        p = plan(net, BIG)
        p.est_max_intermediate = 1
        with pytest.raises(InternalConsistencyError):
            execute(net, p)


class TestExpectationSliced:
    def test_bell_rank_one(self):
        assert expectation_sliced(BELL, PauliString.parse("Z0 Z1"), 1) == pytest.approx(1.0)

    @pytest.mark.parametrize("obs", ["X0 X1", "Y0 Y1", "Z0", "X1"])
    def test_bell_other_paulis(self, obs):
        ops = PauliString.parse(obs).as_dict()
        assert expectation_sliced(BELL, PauliString.parse(obs), 1) == pytest.approx(
            oracle.expectation(BELL, ops), abs=1e-12
        )

    def test_full_rank_is_plain(self):
        c = random_circuit(6, 25, 8)
        p = PauliString.parse("X0 Z3")
        assert expectation_sliced(c, p, 6) == pytest.approx(oracle.expectation(c, p.as_dict()), abs=1e-10)

    def test_ten_qubits_rank_six(self):
        c = random_circuit(10, 40, 2)
        p = PauliString.parse("Y2 X5 Z9")
        conj = complex(execute(*_planned(build_expectation_network(c, p))).data).real
        assert expectation_sliced(c, p, 6) == pytest.approx(conj, abs=1e-9)

    def test_observable_wider_than_slice(self):
        c = random_circuit(6, 30, 5)
        p = PauliString.parse("X0 Y1 Z2 X3 Y4")
        assert expectation_sliced(c, p, 2) == pytest.approx(oracle.expectation(c, p.as_dict()), abs=1e-10)

    def test_workers_bit_identical(self):
        c = random_circuit(8, 30, 6)
        p = PauliString.parse("X1 Y6")
        assert expectation_sliced(c, p, 3, workers=1) == expectation_sliced(c, p, 3, workers=8)

    def test_rank_bounds(self):
        with pytest.raises(ValueError):
            expectation_sliced(BELL, PauliString.parse("Z0"), 3)


def _planned(net):
    net = fuse_small_tensors(net)
    return net, plan(net, BIG)
