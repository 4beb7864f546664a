"""Gate-list circuit representation, text format, gate catalog and SWAP routing.

Circuit files are UTF-8 text::

    # comment
    qubits 3
    h 0
    cx 0 2
    rz 1 0.25
    fsim 1 2 1.5707963 0.0
    measure 0

Bit-string convention: character ``i`` refers to qubit ``i``, and qubit 0 is
the most significant index of a state vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ParseError
from .tensor import Tensor

SINGLE_QUBIT = ("H", "X", "Y", "Z", "S", "T", "RX", "RY", "RZ")
TWO_QUBIT = ("CX", "CZ", "SWAP", "ISWAP", "FSIM")
GATE_KINDS = SINGLE_QUBIT + TWO_QUBIT + ("MEASURE",)
NUM_PARAMS = {"RX": 1, "RY": 1, "RZ": 1, "FSIM": 2}


def arity(kind: str) -> int:
    return 2 if kind in TWO_QUBIT else 1


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if kind not in GATE_KINDS:
            raise ValueError(f"unknown gate {kind!r}")
        if len(self.qubits) != arity(kind):
            raise ValueError(f"{kind} acts on {arity(kind)} qubit(s), got {len(self.qubits)}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{kind} qubits must be distinct, got {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise ValueError("qubit indices must be non-negative")
        if len(self.params) != NUM_PARAMS.get(kind, 0):
            raise ValueError(
                f"{kind} takes {NUM_PARAMS.get(kind, 0)} parameter(s), got {len(self.params)}"
            )

    def __str__(self):
        parts = [self.kind.lower(), *map(str, self.qubits), *(repr(p) for p in self.params)]
        return " ".join(parts)


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Gate, ...] = ()
    name: str = "circuit"

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.num_qubits < 1:
            raise ValueError("a circuit needs at least one qubit")
        seen_measure = False
        for g in self.gates:
            if any(q >= self.num_qubits for q in g.qubits):
                raise ValueError(f"{g} addresses a qubit outside a {self.num_qubits}-qubit register")
            if g.kind == "MEASURE":
                seen_measure = True
            elif seen_measure:
                raise ValueError("measure gates may only appear as a trailing suffix")

    @property
    def measured_qubits(self) -> list[int]:
        """Measured qubits in ascending order; every qubit when none are declared."""
        qs = sorted({g.qubits[0] for g in self.gates if g.kind == "MEASURE"})
        return qs or list(range(self.num_qubits))

    def unitary_part(self) -> "Circuit":
        return Circuit(self.num_qubits, [g for g in self.gates if g.kind != "MEASURE"], self.name)

    def __len__(self):
        return len(self.gates)


# ---------------------------------------------------------------------------
# text format


def parse(source: str, name: str = "circuit") -> Circuit:
    """Parse the line-oriented circuit format; errors carry the 1-based line number."""
    num_qubits = None
    gates = []
    seen_measure = False
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0].lower()
        if num_qubits is None:
            if head != "qubits" or len(tokens) != 2:
                raise ParseError("expected 'qubits N' header", lineno)
            try:
                num_qubits = int(tokens[1])
            except ValueError:
                raise ParseError(f"malformed qubit count {tokens[1]!r}", lineno) from None
            if num_qubits < 1:
                raise ParseError("qubit count must be positive", lineno)
            continue
        kind = head.upper()
        if kind not in GATE_KINDS:
            raise ParseError(f"unknown gate {head!r}", lineno)
        n_q = arity(kind)
        n_p = NUM_PARAMS.get(kind, 0)
        if len(tokens) - 1 != n_q + n_p:
            raise ParseError(
                f"{head} expects {n_q} qubit(s) and {n_p} parameter(s), got {len(tokens) - 1} operand(s)",
                lineno,
            )
        try:
            qubits = [int(tok) for tok in tokens[1 : 1 + n_q]]
        except ValueError:
            raise ParseError(f"malformed qubit index in {line!r}", lineno) from None
        try:
            params = [float(tok) for tok in tokens[1 + n_q :]]
        except ValueError:
            raise ParseError(f"malformed number in {line!r}", lineno) from None
        if any(q < 0 or q >= num_qubits for q in qubits):
            raise ParseError("qubit out of range", lineno)
        if len(set(qubits)) != len(qubits):
            raise ParseError("repeated qubit operand", lineno)
        if not all(math.isfinite(p) for p in params):
            raise ParseError("non-finite parameter", lineno)
        if kind == "MEASURE":
            seen_measure = True
        elif seen_measure:
            raise ParseError("gate after measure", lineno)
        gates.append(Gate(kind, qubits, params))
    if num_qubits is None:
        raise ParseError("missing 'qubits N' header")
    return Circuit(num_qubits, gates, name)


def to_text(c: Circuit) -> str:
    lines = [f"# {c.name}", f"qubits {c.num_qubits}"]
    lines.extend(str(g) for g in c.gates)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# gate catalog

_SQ2 = 1 / math.sqrt(2)
_FIXED = {
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]]),
    "X": np.array([[0, 1], [1, 0]]),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.array([[1, 0], [0, -1]]),
    "S": np.array([[1, 0], [0, 1j]]),
    "T": np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]]),
    "CX": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]),
    "CZ": np.diag([1, 1, 1, -1]),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]),
    "ISWAP": np.array([[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]]),
}

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": _FIXED["X"].astype(complex),
    "Y": _FIXED["Y"].astype(complex),
    "Z": _FIXED["Z"].astype(complex),
}


def gate_matrix(g: Gate) -> np.ndarray:
    """2x2 or 4x4 unitary; two-qubit rows/columns are indexed by ``2*b(q0) + b(q1)``."""
    kind = g.kind
    if kind == "MEASURE":
        raise ValueError("measure has no unitary tensor")
    if kind in _FIXED:
        return _FIXED[kind].astype(np.complex128)
    if kind == "FSIM":
        theta, phi = g.params
        c, s = math.cos(theta), math.sin(theta)
        return np.array(
            [[1, 0, 0, 0], [0, c, -1j * s, 0], [0, -1j * s, c, 0], [0, 0, 0, np.exp(-1j * phi)]],
            dtype=np.complex128,
        )
    (theta,) = g.params
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
    if kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=np.complex128)


def gate_tensor(g: Gate, labels=None) -> Tensor:
    """Rank-2 (out, in) or rank-4 (out_q0, out_q1, in_q0, in_q1) gate tensor."""
    m = gate_matrix(g)
    if m.shape == (4, 4):
        return Tensor(m.reshape(2, 2, 2, 2), labels)
    return Tensor(m, labels)


# ---------------------------------------------------------------------------
# Pauli strings


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis; qubits not listed carry the identity."""

    ops: tuple[tuple[int, str], ...] = field(default=())

    def __post_init__(self):
        ops = []
        seen = set()
        for q, p in self.ops:
            q, p = int(q), p.upper()
            if p not in PAULI:
                raise ValueError(f"unknown Pauli {p!r}")
            if q in seen:
                raise ValueError(f"qubit {q} appears twice in the Pauli string")
            seen.add(q)
            if p != "I":
                ops.append((q, p))
        object.__setattr__(self, "ops", tuple(sorted(ops)))

    @classmethod
    def parse(cls, text: str) -> "PauliString":
        ops = []
        for tok in text.split():
            if tok.upper() == "I":
                continue
            p, q = tok[0].upper(), tok[1:]
            if p not in PAULI or not q.isdigit():
                raise ParseError(f"malformed Pauli factor {tok!r}")
            ops.append((int(q), p))
        try:
            return cls(tuple(ops))
        except ValueError as exc:
            raise ParseError(str(exc)) from None

    @property
    def qubits(self) -> list[int]:
        return [q for q, _ in self.ops]

    def as_dict(self) -> dict[int, str]:
        return dict(self.ops)

    def __str__(self):
        return " ".join(f"{p}{q}" for q, p in self.ops) or "I"


def parse_observable(text: str) -> list[tuple[float, PauliString]]:
    """Parse ``"0.5 Z0 Z1 + -1.0*X2 + Y0"`` into weighted Pauli strings."""
    terms = []
    for chunk in text.split("+"):
        chunk = chunk.replace("*", " ").strip()
        if not chunk:
            raise ParseError(f"empty term in observable {text!r}")
        tokens = chunk.split()
        coef = 1.0
        try:
            coef = float(tokens[0])
            tokens = tokens[1:]
        except ValueError:
            pass
        terms.append((coef, PauliString.parse(" ".join(tokens))))
    return terms


# ---------------------------------------------------------------------------
# nearest-neighbour routing


def route_gate(g: Gate) -> tuple[list[Gate], Gate, list[Gate]]:
    """Route-and-return: SWAPs move the lower operand up to sit next to the higher one.

    Returns ``(swaps_before, relocated_gate, swaps_after)``; operand order of the
    relocated gate matches the original.
    """
    if len(g.qubits) != 2:
        return [], g, []
    a, b = g.qubits
    lo, hi = min(a, b), max(a, b)
    if hi - lo == 1:
        return [], g, []
    before = [Gate("SWAP", (q, q + 1)) for q in range(lo, hi - 1)]
    moved = tuple(hi - 1 if q == lo else q for q in g.qubits)
    return before, Gate(g.kind, moved, g.params), before[::-1]


def nearest_neighborize(c: Circuit) -> Circuit:
    gates = []
    for g in c.gates:
        before, moved, after = route_gate(g)
        gates.extend(before)
        gates.append(moved)
        gates.extend(after)
    return Circuit(c.num_qubits, gates, c.name)


# ---------------------------------------------------------------------------
# circuit generators


def random_circuit(
    num_qubits: int,
    num_gates: int,
    seed: int,
    kinds: Sequence[str] | None = None,
    adjacent_only: bool = False,
) -> Circuit:
    """Random circuit drawn from ``kinds`` (default: every unitary kind)."""
    rng = np.random.default_rng(seed)
    kinds = [k for k in (kinds or GATE_KINDS) if k != "MEASURE"]
    if num_qubits < 2:
        kinds = [k for k in kinds if arity(k) == 1]
    gates = []
    for _ in range(num_gates):
        kind = kinds[rng.integers(len(kinds))]
        if arity(kind) == 2:
            if adjacent_only:
                q = int(rng.integers(num_qubits - 1))
                qubits = (q, q + 1) if rng.random() < 0.5 else (q + 1, q)
            else:
                qubits = tuple(int(q) for q in rng.choice(num_qubits, 2, replace=False))
        else:
            qubits = (int(rng.integers(num_qubits)),)
        params = tuple(float(x) for x in rng.uniform(0, 2 * math.pi, NUM_PARAMS.get(kind, 0)))
        gates.append(Gate(kind, qubits, params))
    return Circuit(num_qubits, gates, f"random-{num_qubits}-{num_gates}-{seed}")


def brickwork_circuit(num_qubits: int, depth: int, seed: int) -> Circuit:
    """Layers of random single-qubit rotations followed by alternating CZ/FSIM bricks."""
    rng = np.random.default_rng(seed)
    gates = []
    for layer in range(depth):
        for q in range(num_qubits):
            kind = ("RX", "RY", "RZ")[rng.integers(3)]
            gates.append(Gate(kind, (q,), (float(rng.uniform(0, 2 * math.pi)),)))
        for q in range(layer % 2, num_qubits - 1, 2):
            theta, phi = rng.uniform(0, 2 * math.pi, 2)
            gates.append(Gate("FSIM", (q, q + 1), (float(theta), float(phi))))
    return Circuit(num_qubits, gates, f"brickwork-{num_qubits}-{depth}-{seed}")


def cat_circuit(num_qubits: int) -> Circuit:
    gates = [Gate("H", (0,))]
    gates.extend(Gate("CX", (0, q)) for q in range(1, num_qubits))
    return Circuit(num_qubits, gates, f"cat{num_qubits}")


def hh_circuit(num_qubits: int, cycles: int, qubits: Iterable[int] | None = None) -> Circuit:
    """``cycles`` repetitions of H-H on each listed qubit (ideally the identity)."""
    qubits = list(range(num_qubits)) if qubits is None else list(qubits)
    gates = []
    for _ in range(cycles):
        for q in qubits:
            gates.extend([Gate("H", (q,)), Gate("H", (q,))])
    return Circuit(num_qubits, gates, f"hh{cycles}")
