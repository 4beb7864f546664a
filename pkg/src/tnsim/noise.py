"""Kraus channels, noise models and density-matrix tensor networks.

A channel ``rho -> sum_k A_k rho A_k^dagger`` enters a density-matrix network
as a superoperator tensor joined to both the ket and the bra legs::

    N[i, j, i', j'] = sum_k A_k[i, i'] * conj(A_k[j, j'])

(rank 4 for one qubit; the two-qubit version has rank 8 with mode order
ket-out, bra-out, ket-in, bra-in, each over the two qubits).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .circuit import PAULI, Circuit, Gate, PauliString
from .errors import NoiseModelError
from .executor import contract_network
from .network import NetworkBuilder, OPEN, TensorNetwork, _observable_node, lightcone, parse_bitstring
from .planner import DEFAULT_MEMORY_BUDGET
from .tensor import Tensor

COMPLETENESS_TOL = 1e-10


class KrausChannel:
    """Completely positive trace-preserving map given by its Kraus operators."""

    def __init__(self, operators, label: str = "channel"):
        ops = [np.array(a, dtype=np.complex128) for a in operators]
        if not ops:
            raise NoiseModelError("a channel needs at least one Kraus operator")
        dim = ops[0].shape[0]
        if dim not in (2, 4) or any(a.shape != (dim, dim) for a in ops):
            raise NoiseModelError("Kraus operators must all be 2x2 or all be 4x4")
        completeness = sum(a.conj().T @ a for a in ops)
        err = np.max(np.abs(completeness - np.eye(dim)))
        if err > COMPLETENESS_TOL:
            raise NoiseModelError(f"{label}: sum_k A_k^dag A_k deviates from identity by {err:.3g}")
        for a in ops:
            a.flags.writeable = False
        self.operators = tuple(ops)
        self.label = label

    @property
    def num_qubits(self) -> int:
        return 1 if self.operators[0].shape[0] == 2 else 2

    @property
    def num_operators(self) -> int:
        return len(self.operators)

    def stack(self) -> np.ndarray:
        return np.stack(self.operators)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(a @ rho @ a.conj().T for a in self.operators)

    def __repr__(self):
        return f"KrausChannel({self.label!r}, {self.num_operators} operators)"


def _check_probability(p: float, what: str) -> float:
    p = float(p)
    if not (0.0 <= p <= 1.0) or math.isnan(p):
        raise NoiseModelError(f"{what} probability {p} outside [0, 1]")
    return p


def identity_channel(num_qubits: int = 1) -> KrausChannel:
    return KrausChannel([np.eye(2**num_qubits)], "identity")


def depolarizing(p: float) -> KrausChannel:
    """``A0 = sqrt(1 - 3p/4) I``, ``A1..3 = sqrt(p/4) {X, Y, Z}``; Bloch vector shrinks by ``1 - p``."""
    p = _check_probability(p, "depolarizing")
    ops = [math.sqrt(1 - 3 * p / 4) * PAULI["I"]]
    ops += [math.sqrt(p / 4) * PAULI[k] for k in "XYZ"]
    return KrausChannel(ops, f"depolarizing({p})")


def two_qubit_depolarizing(p: float) -> KrausChannel:
    """Identity with weight ``1 - 15p/16``, each non-identity two-qubit Pauli with ``p/16``."""
    p = _check_probability(p, "depolarizing")
    ops = []
    for a in "IXYZ":
        for b in "IXYZ":
            w = 1 - 15 * p / 16 if a == b == "I" else p / 16
            ops.append(math.sqrt(w) * np.kron(PAULI[a], PAULI[b]))
    return KrausChannel(ops, f"depolarizing2({p})")


def dephasing(p: float) -> KrausChannel:
    """``A0 = sqrt(1-p) I``, ``A1 = sqrt(p) Z``; coherences scale by ``1 - 2p``."""
    p = _check_probability(p, "dephasing")
    return KrausChannel([math.sqrt(1 - p) * PAULI["I"], math.sqrt(p) * PAULI["Z"]], f"dephasing({p})")


def channel_superoperator(ch: KrausChannel, labels=None) -> Tensor:
    a = ch.stack()
    if ch.num_qubits == 1:
        data = np.einsum("kac,kbd->abcd", a, a.conj())
    else:
        a = a.reshape(-1, 2, 2, 2, 2)
        data = np.einsum("kabcd,kefgh->abefcdgh", a, a.conj())
    return Tensor(data, labels)


# ---------------------------------------------------------------------------
# noise models


@dataclass(frozen=True)
class NoiseRule:
    """Attach ``channel`` on ``qubits`` after matching gates.

    ``scope`` is ``"single"`` (single-qubit gates on exactly these qubits),
    ``"two"`` (two-qubit gates on exactly this pair, either order) or ``"any"``
    (every gate touching the qubit).
    """

    scope: str
    qubits: tuple[int, ...]
    channel: KrausChannel

    def matches(self, g: Gate) -> bool:
        if g.kind == "MEASURE":
            return False
        if self.scope == "single":
            return len(g.qubits) == 1 and g.qubits == self.qubits
        if self.scope == "two":
            return len(g.qubits) == 2 and set(g.qubits) == set(self.qubits)
        return self.qubits[0] in g.qubits


class NoiseModel:
    """Ordered list of :class:`NoiseRule`; an empty model is the ideal simulation."""

    def __init__(self, rules: Iterable[NoiseRule] = ()):
        self.rules: list[NoiseRule] = []
        for r in rules:
            self.add(r.channel, r.qubits, r.scope)

    def add(self, channel: KrausChannel, qubits, scope: str | None = None):
        qubits = tuple(int(q) for q in qubits)
        if scope is None:
            scope = "single" if len(qubits) == 1 else "two"
        if scope not in ("single", "two", "any"):
            raise NoiseModelError(f"unknown rule scope {scope!r}")
        if len(qubits) != channel.num_qubits:
            raise NoiseModelError(f"{channel.label} acts on {channel.num_qubits} qubit(s), got {qubits}")
        if scope == "two" and len(set(qubits)) != 2:
            raise NoiseModelError("two-qubit rule needs two distinct qubits")
        if scope == "any" and len(qubits) != 1:
            raise NoiseModelError("'any' rules take a single qubit")
        self.rules.append(NoiseRule(scope, qubits, channel))
        return self

    def channels_after(self, g: Gate) -> list[tuple[tuple[int, ...], KrausChannel]]:
        return [(r.qubits, r.channel) for r in self.rules if r.matches(g)]

    def validate(self, num_qubits: int):
        for r in self.rules:
            if any(q < 0 or q >= num_qubits for q in r.qubits):
                raise NoiseModelError(f"noise rule on {r.qubits} outside a {num_qubits}-qubit register")

    def __bool__(self):
        return bool(self.rules)

    def __len__(self):
        return len(self.rules)


_KNOWN_KEYS = {"single_qubit_gate_errors", "two_qubit_gate_errors", "dephasing"}


def noise_model_from_dict(doc: Mapping) -> NoiseModel:
    if not isinstance(doc, Mapping):
        raise NoiseModelError("noise model document must be a JSON object")
    unknown = set(doc) - _KNOWN_KEYS
    if unknown:
        raise NoiseModelError(f"unknown noise model keys {sorted(unknown)}")
    nm = NoiseModel()

    def entries(key):
        section = doc.get(key, {})
        if not isinstance(section, Mapping):
            raise NoiseModelError(f"{key!r} must map qubits to probabilities")
        return sorted(section.items(), key=lambda kv: kv[0])

    def qubit(s: str) -> int:
        try:
            q = int(s)
        except ValueError:
            raise NoiseModelError(f"malformed qubit key {s!r}") from None
        if q < 0:
            raise NoiseModelError(f"negative qubit {q}")
        return q

    try:
        for key, p in entries("single_qubit_gate_errors"):
            nm.add(depolarizing(p), (qubit(key),), "single")
        for key, p in entries("two_qubit_gate_errors"):
            parts = str(key).split("-")
            if len(parts) != 2:
                raise NoiseModelError(f"two-qubit key {key!r} must look like 'q1-q2'")
            nm.add(two_qubit_depolarizing(p), (qubit(parts[0]), qubit(parts[1])), "two")
        for key, p in entries("dephasing"):
            nm.add(dephasing(p), (qubit(key),), "any")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, NoiseModelError):
            raise
        raise NoiseModelError(str(exc)) from None
    return nm


def load_noise_model(path) -> NoiseModel:
    """Read the noise-model JSON document (gate errors become depolarizing channels)."""
    try:
        with open(os.fspath(path), encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise NoiseModelError(f"malformed noise model JSON: {exc}") from None
    return noise_model_from_dict(doc)


# ---------------------------------------------------------------------------
# density-matrix networks


def _noisy_layers(b: NetworkBuilder, c: Circuit, nm: NoiseModel | None):
    ket = b.initial_layer(c.num_qubits, "k")
    bra = b.initial_layer(c.num_qubits, "b")
    for g in c.gates:
        if g.kind == "MEASURE":
            continue
        b.gate(ket, g, "k")
        b.gate(bra, g, "b", conj=True)
        if nm is None:
            continue
        for qubits, ch in nm.channels_after(g):
            k_out = [b.fresh("k", q) for q in qubits]
            b_out = [b.fresh("b", q) for q in qubits]
            labels = k_out + b_out + [ket[q] for q in qubits] + [bra[q] for q in qubits]
            b.add(channel_superoperator(ch, labels), None)
            for q, lk, lb in zip(qubits, k_out, b_out):
                ket[q], bra[q] = lk, lb
    return ket, bra


def build_dm_network(
    c: Circuit,
    nm: NoiseModel | None = None,
    mode: str = "full_dm",
    obs: PauliString | None = None,
    bits=None,
    open_qubits: Iterable[int] = (),
    projections: Mapping[int, int] | None = None,
    simplify: bool = True,
) -> TensorNetwork:
    """Density-matrix network for ``mode``.

    ``full_dm``      open ket legs then bra legs (all qubits);
    ``trace``        scalar ``Tr(obs rho)``;
    ``probability``  scalar ``<bits|rho|bits>``;
    ``rdm``          reduced matrix on ``open_qubits`` with ``projections`` applied.
    """
    n = c.num_qubits
    if nm is not None:
        nm.validate(n)
    projections = dict(projections or {})
    open_q: list[int] = []
    paulis: dict[int, str] = {}
    if mode == "full_dm":
        open_q = list(range(n))
    elif mode == "trace":
        if obs is None:
            raise ValueError("trace mode needs an observable")
        if not isinstance(obs, PauliString):
            obs = PauliString(tuple(obs))
        paulis = obs.as_dict()
        if any(q >= n for q in paulis):
            raise ValueError("observable addresses a qubit outside the register")
    elif mode == "probability":
        values = parse_bitstring(bits, n)
        if OPEN in values:
            raise ValueError("probability needs a fully specified bit-string")
        projections = dict(enumerate(values))
    elif mode == "rdm":
        open_q = sorted(set(open_qubits))
        if set(open_q) & set(projections):
            raise ValueError("qubits cannot be both open and projected")
    else:
        raise ValueError(f"unknown density-matrix mode {mode!r}")

    if simplify and mode != "full_dm":
        c = lightcone(c, [*open_q, *projections, *paulis])
    b = NetworkBuilder()
    ket, bra = _noisy_layers(b, c, nm)
    for q in range(n):
        if q in open_q:
            continue
        if q in projections:
            b.project(ket[q], projections[q])
            b.project(bra[q], projections[q])
        elif q in paulis:
            b.add(_observable_node(PAULI[paulis[q]], ket[q], bra[q]), None)
        else:
            b.join(ket[q], bra[q])
    return b.build([ket[q] for q in open_q] + [bra[q] for q in open_q], qubits=open_q)


def density_matrix(
    c: Circuit, nm: NoiseModel | None = None, memory_budget_bytes=DEFAULT_MEMORY_BUDGET, workers=1
) -> np.ndarray:
    """Dense ``2^n x 2^n`` density matrix (qubit 0 most significant)."""
    t, _ = contract_network(build_dm_network(c, nm, "full_dm"), memory_budget_bytes, workers)
    dim = 2**c.num_qubits
    return t.data.reshape(dim, dim)


def trace_expectation(
    c: Circuit, nm: NoiseModel | None, obs: PauliString, memory_budget_bytes=DEFAULT_MEMORY_BUDGET, workers=1
) -> float:
    t, _ = contract_network(build_dm_network(c, nm, "trace", obs=obs), memory_budget_bytes, workers)
    return float(np.real(t.data))


def dm_probability(
    c: Circuit, nm: NoiseModel | None, bits, memory_budget_bytes=DEFAULT_MEMORY_BUDGET, workers=1
) -> float:
    t, _ = contract_network(build_dm_network(c, nm, "probability", bits=bits), memory_budget_bytes, workers)
    return float(np.real(t.data))


def dm_reduced(
    c: Circuit,
    nm: NoiseModel | None,
    open_qubits,
    projections=None,
    memory_budget_bytes=DEFAULT_MEMORY_BUDGET,
    workers=1,
) -> np.ndarray:
    net = build_dm_network(c, nm, "rdm", open_qubits=open_qubits, projections=projections)
    t, _ = contract_network(net, memory_budget_bytes, workers)
    dim = 2 ** len(net.meta["qubits"])
    return t.data.reshape(dim, dim)
