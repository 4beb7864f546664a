"""Task-level front end shared by the CLI and library users.

A :class:`Simulator` binds one circuit to one backend and answers amplitude,
slice, expectation, probability, trace-expectation and sampling queries.
Network backends reuse contraction plans through a :class:`PlanCache` keyed by
the fused network's structure and the memory budget.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, PauliString, parse_observable
from .errors import NoiseModelError
from .executor import ExecutionStats, execute, expectation_sliced
from .mps import MPSState
from .network import (
    OPEN,
    TensorNetwork,
    build_amplitude_network,
    build_expectation_network,
    build_rdm_network,
    build_slice_network,
    parse_bitstring,
)
from .noise import NoiseModel, build_dm_network
from .planner import DEFAULT_MEMORY_BUDGET, ContractionPlan, fuse_small_tensors, plan
from .pmps import PMPSState
from . import sampler

BACKENDS = ("exact", "mps", "dm", "pmps")
CACHE_FORMAT = "tnsim-plan-cache"
CACHE_VERSION = 1


class PlanCache:
    """Contraction plans keyed by ``<network fingerprint>:<memory budget>``."""

    def __init__(self, plans: dict[str, ContractionPlan] | None = None):
        self.plans: dict[str, ContractionPlan] = dict(plans or {})
        self.hits = 0
        self.misses = 0

    @staticmethod
    def key(net: TensorNetwork, memory_budget_bytes: int) -> str:
        return f"{net.fingerprint()}:{int(memory_budget_bytes)}"

    def lookup(self, net: TensorNetwork, memory_budget_bytes: int, seed: int = 0) -> ContractionPlan:
        k = self.key(net, memory_budget_bytes)
        p = self.plans.get(k)
        if p is None:
            self.misses += 1
            p = plan(net, memory_budget_bytes, seed=seed)
            self.plans[k] = p
        else:
            self.hits += 1
        return p

    def to_json(self) -> str:
        doc = {
            "format": CACHE_FORMAT,
            "version": CACHE_VERSION,
            "plans": {k: p.to_dict() for k, p in sorted(self.plans.items())},
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "PlanCache":
        doc = json.loads(text)
        if doc.get("format") != CACHE_FORMAT or doc.get("version") != CACHE_VERSION:
            raise ValueError("not a version-1 tnsim plan cache")
        return cls({k: ContractionPlan.from_dict(v) for k, v in doc["plans"].items()})

    @classmethod
    def load(cls, path) -> "PlanCache":
        with open(os.fspath(path), encoding="utf-8") as fh:
            return cls.from_json(fh.read())

    def dump(self, path):
        with open(os.fspath(path), "w", encoding="utf-8") as fh:
            fh.write(self.to_json() + "\n")

    def __len__(self):
        return len(self.plans)


@dataclass
class SimulatorConfig:
    backend: str = "exact"
    memory_budget_bytes: int = DEFAULT_MEMORY_BUDGET
    workers: int = 1
    seed: int = 0
    max_bond: int | None = None
    cutoff: float = 0.0
    max_kraus: int | None = None
    noise: NoiseModel | None = None

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}; choose from {', '.join(BACKENDS)}")
        if self.noise and self.backend in ("exact", "mps"):
            raise NoiseModelError(f"the {self.backend} backend simulates pure states; use dm or pmps")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.memory_budget_bytes <= 0:
            raise ValueError("memory budget must be positive")


def _as_terms(obs) -> list[tuple[float, PauliString]]:
    if isinstance(obs, str):
        return parse_observable(obs)
    if isinstance(obs, PauliString):
        return [(1.0, obs)]
    return [(float(c), p if isinstance(p, PauliString) else PauliString(tuple(p))) for c, p in obs]


def _projections(bits, n: int) -> dict[int, int]:
    if isinstance(bits, dict):
        return {int(q): int(b) for q, b in bits.items()}
    return {q: b for q, b in enumerate(parse_bitstring(bits, n)) if b != OPEN}


class Simulator:
    """One circuit on one backend.

    Examples
    --------
    >>> from tnsim.circuit import parse
    >>> sim = Simulator(parse("qubits 2\\nH 0\\nCX 0 1\\n"))
    >>> round(sim.amplitude("11").real, 6)
    0.707107
    """

    def __init__(self, circuit: Circuit, config: SimulatorConfig | None = None, plan_cache: PlanCache | None = None):
        self.circuit = circuit
        self.config = config or SimulatorConfig()
        self.plan_cache = plan_cache if plan_cache is not None else PlanCache()
        self.stats = ExecutionStats()
        if self.config.noise is not None:
            self.config.noise.validate(circuit.num_qubits)
        self._state = None

    @property
    def num_qubits(self) -> int:
        return self.circuit.num_qubits

    # -- helpers ---------------------------------------------------------------

    def _contract(self, net: TensorNetwork) -> np.ndarray:
        cfg = self.config
        net = fuse_small_tensors(net)
        p = self.plan_cache.lookup(net, cfg.memory_budget_bytes, cfg.seed)
        return execute(net, p, cfg.workers, self.stats).data

    def _require(self, task: str, allowed: tuple[str, ...]):
        if self.config.backend not in allowed:
            raise ValueError(f"task {task!r} is not available on the {self.config.backend} backend")

    def state(self):
        """The simulated MPS / PMPS (built on first use)."""
        cfg = self.config
        if self._state is None:
            if cfg.backend == "mps":
                self._state = MPSState.init(self.num_qubits, cfg.max_bond, cfg.cutoff).apply_circuit(self.circuit)
            elif cfg.backend == "pmps":
                s = PMPSState.init(self.num_qubits, cfg.max_bond, cfg.max_kraus, cfg.cutoff)
                self._state = s.apply_noisy_circuit(self.circuit, cfg.noise)
            else:
                raise ValueError(f"the {cfg.backend} backend keeps no chain state")
        return self._state

    # -- tasks -----------------------------------------------------------------

    def amplitude(self, bits) -> complex:
        """``<bits|U|0...0>``."""
        self._require("amplitude", ("exact", "mps"))
        if self.config.backend == "mps":
            return self.state().amplitude(bits)
        return complex(self._contract(build_amplitude_network(self.circuit, bits)))

    def amplitudes(self, batch) -> list[complex]:
        return [self.amplitude(b) for b in batch]

    def slice(self, bits) -> tuple[np.ndarray, float]:
        """Conditional state of the ``OPEN`` qubits given the projected ones.

        Returns the normalised vector (qubit order, lowest open qubit most
        significant) and the norm of the raw projected vector.  A zero-norm
        slice comes back as the zero vector.
        """
        self._require("slice", ("exact", "mps"))
        if self.config.backend == "mps":
            raw = self.state().slice_vector(bits)
        else:
            raw = self._contract(build_slice_network(self.circuit, bits)).reshape(-1)
        norm = float(np.linalg.norm(raw))
        vec = raw / norm if norm > 0.0 else raw
        return vec, norm

    def expectation(self, obs, method: str = "conjugate", rank_max: int | None = None) -> float:
        """``sum_k c_k <P_k>`` for a Pauli string or weighted sum of them."""
        cfg = self.config
        if method not in ("conjugate", "sliced"):
            raise ValueError(f"unknown expectation method {method!r}")
        if method == "sliced" and cfg.backend != "exact":
            raise ValueError("the sliced method needs the exact backend")
        total = 0.0
        for coef, p in _as_terms(obs):
            if cfg.backend == "exact" and method == "sliced":
                r = rank_max if rank_max is not None else self.default_rank_max()
                val = expectation_sliced(self.circuit, p, r, cfg.workers, cfg.memory_budget_bytes, cfg.seed)
            elif cfg.backend == "exact":
                val = float(np.real(self._contract(build_expectation_network(self.circuit, p))))
            elif cfg.backend == "dm":
                val = float(np.real(self._contract(build_dm_network(self.circuit, cfg.noise, "trace", obs=p))))
            else:
                val = self.state().expectation(p)
            total += coef * val
        return total

    def trace_expectation(self, obs) -> float:
        """``Tr(O rho)`` on the noisy density matrix."""
        self._require("trace-expectation", ("dm", "pmps"))
        return self.expectation(obs)

    def default_rank_max(self) -> int:
        """Largest open-qubit count whose slice vector fits the memory budget."""
        elements = self.config.memory_budget_bytes // 16
        return max(1, min(self.num_qubits, int(elements).bit_length() - 1))

    def probability(self, bits) -> float:
        """Probability of the specified bits; ``OPEN`` entries are summed over."""
        proj = _projections(bits, self.num_qubits)
        return self.marginal(proj)

    def marginal(self, projections: dict[int, int]) -> float:
        cfg = self.config
        if any(q < 0 or q >= self.num_qubits for q in projections):
            raise ValueError("qubit outside the register")
        if cfg.backend in ("mps", "pmps"):
            return self.state().probability(dict(projections))
        if cfg.backend == "exact":
            net = build_rdm_network(self.circuit, [], projections)
        else:
            net = build_dm_network(self.circuit, cfg.noise, "rdm", projections=projections)
        return float(np.real(self._contract(net)))

    def conditional(self, q: int, projections: dict[int, int]) -> tuple[float, float]:
        """Unnormalised ``(P(prefix, q=0), P(prefix, q=1))`` from the one-qubit RDM."""
        cfg = self.config
        if cfg.backend in ("mps", "pmps"):
            s = self.state()
            return s.probability({**projections, q: 0}), s.probability({**projections, q: 1})
        if cfg.backend == "exact":
            net = build_rdm_network(self.circuit, [q], projections)
        else:
            net = build_dm_network(self.circuit, cfg.noise, "rdm", open_qubits=[q], projections=projections)
        rho = self._contract(net).reshape(2, 2)
        return float(np.real(rho[0, 0])), float(np.real(rho[1, 1]))

    def sample(self, shots: int, seed: int | None = None) -> list[str]:
        """Bit-strings over the measured qubits (ascending), one per shot."""
        seed = self.config.seed if seed is None else seed
        return sampler.draw(self.conditional, self.circuit.measured_qubits, shots, seed)


__all__ = ["BACKENDS", "PlanCache", "Simulator", "SimulatorConfig"]
