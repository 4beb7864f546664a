"""Tensor networks and the builders that compile circuits into them.

A network is a map ``node id -> Tensor``.  Mode labels double as edge names:
a label carried by two nodes is a bond, a label carried by one node is an
open leg and must be listed in ``open_legs``.  There are no hyperedges.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .circuit import PAULI, Circuit, Gate, PauliString, gate_matrix
from .errors import DimensionError, ParseError
from .tensor import Tensor

OPEN = -1

KET_ZERO = np.array([1.0, 0.0], dtype=np.complex128)
BASIS = (np.array([1.0, 0.0], dtype=np.complex128), np.array([0.0, 1.0], dtype=np.complex128))


@dataclass(frozen=True)
class Edge:
    """A bond ``(node, mode) -- (node, mode)`` or an open leg ``(node, mode) -- label``."""

    a: tuple[int, int]
    b: tuple[int, int] | str

    @property
    def is_open(self) -> bool:
        return isinstance(self.b, str)


class TensorNetwork:
    """Validated, immutable collection of tensors.

    Parameters
    ----------
    nodes : mapping of int to Tensor
    open_legs : sequence of str
        Output modes, in output order.
    meta : mapping, optional
        Builder bookkeeping (e.g. which node projects which qubit).
    """

    def __init__(self, nodes: Mapping[int, Tensor], open_legs: Sequence[str], meta=None):
        self.nodes = dict(sorted(nodes.items()))
        self.open_legs = tuple(open_legs)
        self.meta = dict(meta or {})
        self._extents, self._owners = self._check()

    def _check(self):
        extents: dict[str, int] = {}
        owners: dict[str, list[int]] = {}
        for nid, t in self.nodes.items():
            for lab, ext in zip(t.labels, t.extents):
                if lab in extents and extents[lab] != ext:
                    raise DimensionError(
                        f"bond {lab!r} joins extents {extents[lab]} and {ext}"
                    )
                extents[lab] = ext
                owners.setdefault(lab, []).append(nid)
        if len(set(self.open_legs)) != len(self.open_legs):
            raise ValueError("open legs must be distinct")
        open_set = set(self.open_legs)
        for lab, own in owners.items():
            if len(own) > 2:
                raise ValueError(f"label {lab!r} is shared by {len(own)} nodes")
            if len(own) == 2 and lab in open_set:
                raise ValueError(f"label {lab!r} is both a bond and an open leg")
            if len(own) == 1 and lab not in open_set:
                raise ValueError(f"dangling mode {lab!r} on node {own[0]}")
        missing = open_set - set(owners)
        if missing:
            raise ValueError(f"open legs {sorted(missing)} are not carried by any node")
        return extents, owners

    # -- structure ---------------------------------------------------------

    @property
    def extents(self) -> dict[str, int]:
        return dict(self._extents)

    def extent(self, label: str) -> int:
        return self._extents[label]

    def owners(self, label: str) -> list[int]:
        return list(self._owners[label])

    @property
    def bonds(self) -> list[str]:
        return [lab for lab, own in self._owners.items() if len(own) == 2]

    @property
    def edges(self) -> list[Edge]:
        out = []
        for lab, own in self._owners.items():
            a = (own[0], self.nodes[own[0]].labels.index(lab))
            if len(own) == 2:
                out.append(Edge(a, (own[1], self.nodes[own[1]].labels.index(lab))))
            else:
                out.append(Edge(a, lab))
        return out

    def neighbors(self, nid: int) -> list[int]:
        out = set()
        for lab in self.nodes[nid].labels:
            out.update(o for o in self._owners[lab] if o != nid)
        return sorted(out)

    def fingerprint(self) -> str:
        """Hash of the network structure (ids, labels, extents, outputs), not of values."""
        h = hashlib.sha256()
        for nid, t in self.nodes.items():
            h.update(f"{nid}:{','.join(t.labels)}:{t.extents};".encode())
        h.update(("|" + ",".join(self.open_legs)).encode())
        return h.hexdigest()[:16]

    def replace_nodes(self, updates: Mapping[int, Tensor]) -> "TensorNetwork":
        nodes = dict(self.nodes)
        for nid, t in updates.items():
            old = nodes[nid]
            if old.labels != t.labels or old.extents != t.extents:
                raise ValueError(f"replacement for node {nid} changes its modes")
            nodes[nid] = t
        return TensorNetwork(nodes, self.open_legs, self.meta)

    def __len__(self):
        return len(self.nodes)

    def __repr__(self):
        return f"TensorNetwork({len(self.nodes)} nodes, {len(self.open_legs)} open legs)"


# ---------------------------------------------------------------------------
# bit-strings


def parse_bitstring(text, num_qubits: int | None = None) -> tuple[int, ...]:
    """Accept ``"01-1"``, ``"0,1,-1,1"`` or a sequence of ints; ``-``/``-1`` mark open qubits."""
    if isinstance(text, str):
        s = text.strip()
        if "," in s:
            items = [tok.strip() for tok in s.split(",")]
            try:
                values = [int(tok) for tok in items]
            except ValueError:
                raise ParseError(f"malformed bit-string {text!r}") from None
        else:
            mapping = {"0": 0, "1": 1, "-": OPEN}
            try:
                values = [mapping[ch] for ch in s]
            except KeyError:
                raise ParseError(f"malformed bit-string {text!r}") from None
    else:
        values = [int(v) for v in text]
    if any(v not in (0, 1, OPEN) for v in values):
        raise ParseError(f"bit-string entries must be 0, 1 or -1: {text!r}")
    if num_qubits is not None and len(values) != num_qubits:
        raise ParseError(f"bit-string has {len(values)} entries for {num_qubits} qubits")
    return tuple(values)


def format_bitstring(bits: Iterable[int]) -> str:
    return "".join("-" if b == OPEN else str(b) for b in bits)


# ---------------------------------------------------------------------------
# builders


def lightcone(c: Circuit, qubits: Iterable[int]) -> Circuit:
    """Drop trailing gates that cannot influence ``qubits``; they cancel against their adjoint."""
    live = set(qubits)
    kept = []
    for g in reversed(c.gates):
        if g.kind == "MEASURE":
            continue
        if live.intersection(g.qubits):
            live.update(g.qubits)
            kept.append(g)
    return Circuit(c.num_qubits, kept[::-1], c.name)


class NetworkBuilder:
    """Incremental construction helper; labels are ``<prefix><qubit>.<time>``."""

    def __init__(self):
        self.nodes: dict[int, Tensor] = {}
        self.owner: dict[str, int] = {}
        self._clock: dict[str, int] = {}

    def add(self, data, labels: Sequence[str]) -> int:
        nid = len(self.nodes)
        t = data if isinstance(data, Tensor) else Tensor(data, labels)
        self.nodes[nid] = t
        for lab in t.labels:
            self.owner[lab] = nid
        return nid

    def fresh(self, prefix: str, q: int) -> str:
        key = f"{prefix}{q}"
        t = self._clock.get(key, -1) + 1
        self._clock[key] = t
        return f"{key}.{t}"

    def initial_layer(self, n: int, prefix: str) -> list[str]:
        wires = []
        for q in range(n):
            lab = self.fresh(prefix, q)
            self.add(KET_ZERO, [lab])
            wires.append(lab)
        return wires

    def apply(self, wires: list[str], qubits: Sequence[int], matrix: np.ndarray, prefix: str):
        """Wire a k-qubit operator (2^k x 2^k matrix) onto ``wires``."""
        k = len(qubits)
        outs = [self.fresh(prefix, q) for q in qubits]
        ins = [wires[q] for q in qubits]
        self.add(np.asarray(matrix).reshape((2,) * (2 * k)), outs + ins)
        for q, lab in zip(qubits, outs):
            wires[q] = lab

    def gate(self, wires: list[str], g: Gate, prefix: str, conj: bool = False):
        m = gate_matrix(g)
        self.apply(wires, g.qubits, np.conj(m) if conj else m, prefix)

    def circuit_layer(self, c: Circuit, prefix: str, conj: bool = False) -> list[str]:
        wires = self.initial_layer(c.num_qubits, prefix)
        for g in c.gates:
            if g.kind != "MEASURE":
                self.gate(wires, g, prefix, conj)
        return wires

    def join(self, keep: str, drop: str):
        """Identify label ``drop`` with ``keep`` (the two become one bond)."""
        nid = self.owner.pop(drop)
        t = self.nodes[nid]
        if self.owner.get(keep) == nid:
            # both legs on one node (e.g. a channel's ket and bra outputs): trace them here
            data = np.trace(t.data, axis1=t.mode(keep), axis2=t.mode(drop))
            self.nodes[nid] = Tensor(data, [l for l in t.labels if l not in (keep, drop)])
            del self.owner[keep]
            return
        self.nodes[nid] = t.relabel({drop: keep})

    def project(self, label: str, bit: int) -> int:
        return self.add(BASIS[bit], [label])

    def build(self, open_legs: Sequence[str], **meta) -> TensorNetwork:
        return TensorNetwork(self.nodes, open_legs, meta)


def build_state_network(c: Circuit) -> TensorNetwork:
    """``U|0...0>`` with one open leg per qubit, in qubit order."""
    b = NetworkBuilder()
    wires = b.circuit_layer(c, "k")
    return b.build(wires, qubits=list(range(c.num_qubits)))


def build_amplitude_network(c: Circuit, bits) -> TensorNetwork:
    """Closed network whose value is ``<bits|U|0...0>``."""
    bits = parse_bitstring(bits, c.num_qubits)
    if OPEN in bits:
        raise ValueError("amplitude bit-string has open entries; use build_slice_network")
    b = NetworkBuilder()
    wires = b.circuit_layer(c, "k")
    proj = {q: b.project(wires[q], bit) for q, bit in enumerate(bits)}
    return b.build([], projections=proj)


def build_slice_network(c: Circuit, bits) -> TensorNetwork:
    """Open legs at the ``OPEN`` positions; the rest are projected onto the given bits."""
    bits = parse_bitstring(bits, c.num_qubits)
    if OPEN not in bits:
        raise ValueError("slice bit-string needs at least one open entry")
    b = NetworkBuilder()
    wires = b.circuit_layer(c, "k")
    proj, open_q = {}, []
    for q, bit in enumerate(bits):
        if bit == OPEN:
            open_q.append(q)
        else:
            proj[q] = b.project(wires[q], bit)
    return b.build([wires[q] for q in open_q], projections=proj, qubits=open_q)


def _observable_node(matrix: np.ndarray, ket: str, bra: str) -> Tensor:
    # <psi|P|psi> = sum_ij conj(psi_j) P[j, i] psi_i
    return Tensor(np.asarray(matrix).T, [ket, bra])


def build_expectation_network(c: Circuit, obs: PauliString, simplify: bool = True) -> TensorNetwork:
    """Double-depth network: circuit, Pauli tensors, then the conjugate circuit mirrored."""
    if not isinstance(obs, PauliString):
        obs = PauliString(tuple(obs))
    if any(q >= c.num_qubits for q in obs.qubits):
        raise ValueError("observable addresses a qubit outside the register")
    if simplify:
        c = lightcone(c, obs.qubits)
    b = NetworkBuilder()
    ket = b.circuit_layer(c, "k")
    bra = b.circuit_layer(c, "b", conj=True)
    paulis = obs.as_dict()
    for q in range(c.num_qubits):
        if q in paulis:
            b.add(_observable_node(PAULI[paulis[q]], ket[q], bra[q]), None)
        else:
            b.join(ket[q], bra[q])
    return b.build([])


def build_rdm_network(
    c: Circuit,
    open_qubits: Iterable[int],
    projections: Mapping[int, int] | None = None,
    simplify: bool = True,
) -> TensorNetwork:
    """Reduced density matrix on ``open_qubits``: ket legs first, then bra legs.

    Projected qubits are closed with ``|b><b|``; every other qubit is traced.
    With projections the result is unnormalised.
    """
    open_q = sorted(set(open_qubits))
    projections = dict(projections or {})
    overlap = set(open_q) & set(projections)
    if overlap:
        raise ValueError(f"qubits {sorted(overlap)} are both open and projected")
    for q, bit in projections.items():
        if bit not in (0, 1):
            raise ValueError(f"projection of qubit {q} must be 0 or 1")
    if any(q < 0 or q >= c.num_qubits for q in [*open_q, *projections]):
        raise ValueError("qubit outside the register")
    if simplify:
        c = lightcone(c, [*open_q, *projections])
    b = NetworkBuilder()
    ket = b.circuit_layer(c, "k")
    bra = b.circuit_layer(c, "b", conj=True)
    for q in range(c.num_qubits):
        if q in projections:
            b.project(ket[q], projections[q])
            b.project(bra[q], projections[q])
        elif q not in open_q:
            b.join(ket[q], bra[q])
    return b.build([ket[q] for q in open_q] + [bra[q] for q in open_q], qubits=open_q)
