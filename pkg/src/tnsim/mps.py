"""Matrix-product-state simulation with SVD bond truncation.

Sites are stored as ``(left bond, *physical, right bond)`` arrays so the same
chain machinery serves the pure-state MPS (physical = ``(2,)``) and the
locally purified MPS in :mod:`tnsim.pmps` (physical = ``(2, kraus)``).

The chain keeps a window ``[lo, hi]`` of sites that may be non-canonical:
sites left of ``lo`` are left isometries and sites right of ``hi`` are right
isometries.  Before a two-site update the window is shrunk onto the pair with
QR sweeps, so the singular values of the merged tensor are the true Schmidt
coefficients and truncation is optimal for the current state.
"""

from __future__ import annotations

import numpy as np

from .circuit import PAULI, Circuit, Gate, PauliString, gate_matrix, route_gate
from .errors import AdjacencyError, ResourceError
from .network import OPEN, parse_bitstring
from .tensor import Tensor, svd_split

MAX_DENSE_QUBITS = 24


class _Chain:
    def __init__(self, sites, max_bond=None, cutoff=0.0):
        if max_bond is not None and max_bond < 1:
            raise ValueError("max_bond must be positive")
        if cutoff < 0:
            raise ValueError("cutoff must be non-negative")
        self._sites = [np.asarray(s, dtype=np.complex128) for s in sites]
        self.max_bond = max_bond
        self.cutoff = float(cutoff)
        self.cumulative_discarded_weight = 0.0
        self.bond_spectra: dict[int, np.ndarray] = {}
        # sites < lo are left-canonical, sites > hi right-canonical
        self._lo, self._hi = 0, -1

    @property
    def num_qubits(self) -> int:
        return len(self._sites)

    def bond_dims(self) -> list[int]:
        """Extent of bond ``k`` (between sites ``k-1`` and ``k``) for ``k = 1..n-1``."""
        return [s.shape[0] for s in self._sites[1:]]

    # -- canonical window ----------------------------------------------------

    def _left_orthonormalize(self, j: int):
        a = self._sites[j]
        shape = a.shape
        q, r = np.linalg.qr(a.reshape(-1, shape[-1]))
        self._sites[j] = q.reshape(shape[:-1] + (q.shape[1],))
        self._sites[j + 1] = np.tensordot(r, self._sites[j + 1], axes=(1, 0))

    def _right_orthonormalize(self, j: int):
        a = self._sites[j]
        shape = a.shape
        q, r = np.linalg.qr(a.reshape(shape[0], -1).conj().T)
        self._sites[j] = q.conj().T.reshape((q.shape[1],) + shape[1:])
        self._sites[j - 1] = np.tensordot(self._sites[j - 1], r.conj().T, axes=(-1, 0))

    def _center(self, i: int, j: int):
        """Make ``i..j`` the only possibly non-canonical sites."""
        for k in range(self._lo, i):
            self._left_orthonormalize(k)
        for k in range(self._hi, j, -1):
            self._right_orthonormalize(k)
        self._lo, self._hi = i, j

    # -- updates ---------------------------------------------------------------

    def _apply_one(self, q: int, m: np.ndarray):
        self._sites[q] = np.moveaxis(np.tensordot(m, self._sites[q], axes=(1, 1)), 0, 1)

    def _split_pair(self, i: int, theta: np.ndarray, n_left_phys: int):
        """SVD ``theta`` (left bond, phys..., right bond) back into sites ``i`` and ``i+1``."""
        left_modes = list(range(1 + n_left_phys))
        res = svd_split(Tensor(theta), left_modes, self.max_bond, self.cutoff)
        left, right = res.left.data, res.right.data
        if res.discarded_weight > 0.0:
            scale = (1.0 - res.discarded_weight) ** -0.25
            left, right = left * scale, right * scale
            self.cumulative_discarded_weight += res.discarded_weight
        self._sites[i] = np.array(left)
        self._sites[i + 1] = np.array(right)
        self.bond_spectra[i + 1] = res.singular_values
        return res

    def _check_pair(self, qubits):
        a, b = qubits
        if abs(a - b) != 1:
            raise AdjacencyError(
                f"two-qubit operation on non-adjacent qubits {qubits}; route the circuit first"
            )
        return min(a, b)

    def _merged(self, i: int) -> np.ndarray:
        return np.tensordot(self._sites[i], self._sites[i + 1], axes=(-1, 0))

    def _apply_two(self, qubits, m: np.ndarray):
        i = self._check_pair(qubits)
        g = m.reshape(2, 2, 2, 2)
        if qubits[0] > qubits[1]:
            g = g.transpose(1, 0, 3, 2)
        self._center(i, i + 1)
        theta = self._merged(i)
        nl = self._sites[i].ndim - 2
        ax_i, ax_j = 1, 1 + nl
        theta = np.tensordot(g, theta, axes=([2, 3], [ax_i, ax_j]))
        theta = np.moveaxis(theta, [0, 1], [ax_i, ax_j])
        return self._split_pair(i, theta, nl)

    def apply_gate(self, g: Gate):
        """Apply a unitary gate in place; two-qubit gates must act on neighbours."""
        if g.kind == "MEASURE":
            return self
        m = gate_matrix(g)
        if len(g.qubits) == 1:
            self._apply_one(g.qubits[0], m)
        else:
            self._apply_two(g.qubits, m)
        return self

    def apply_circuit(self, c: Circuit, route: bool = True):
        for g in c.gates:
            if g.kind == "MEASURE":
                continue
            before, moved, after = route_gate(g) if route else ([], g, [])
            for s in before:
                self.apply_gate(s)
            self.apply_gate(moved)
            for s in after:
                self.apply_gate(s)
        return self


class MPSState(_Chain):
    """Pure state as a chain of ``(left bond, 2, right bond)`` tensors.

    Gates are applied in place.  ``max_bond=None`` means unlimited; ``cutoff``
    discards singular values below ``cutoff * s_max``.
    """

    @classmethod
    def init(cls, n: int, max_bond=None, cutoff=0.0) -> "MPSState":
        if n < 1:
            raise ValueError("need at least one qubit")
        site = np.zeros((1, 2, 1), dtype=np.complex128)
        site[0, 0, 0] = 1.0
        return cls([site.copy() for _ in range(n)], max_bond, cutoff)

    @property
    def sites(self) -> list[np.ndarray]:
        return list(self._sites)

    def amplitude(self, bits) -> complex:
        bits = parse_bitstring(bits, self.num_qubits)
        if OPEN in bits:
            raise ValueError("amplitude needs a fully specified bit-string")
        v = np.ones(1, dtype=np.complex128)
        for site, b in zip(self._sites, bits):
            v = v @ site[:, b, :]
        return complex(v[0])

    def slice_vector(self, bits) -> np.ndarray:
        """Marginal vector over the ``OPEN`` entries (unnormalised), qubit order."""
        bits = parse_bitstring(bits, self.num_qubits)
        n_open = sum(b == OPEN for b in bits)
        if n_open > MAX_DENSE_QUBITS:
            raise ResourceError(f"slice over {n_open} qubits exceeds the dense cap")
        v = np.ones((1,), dtype=np.complex128)
        for site, b in zip(self._sites, bits):
            if b == OPEN:
                v = np.tensordot(v, site, axes=(-1, 0))
            else:
                v = np.tensordot(v, site[:, b, :], axes=(-1, 0))
        return v.reshape(-1)

    def to_vector(self) -> np.ndarray:
        if self.num_qubits > MAX_DENSE_QUBITS:
            raise ResourceError(
                f"refusing to expand {self.num_qubits} qubits (cap {MAX_DENSE_QUBITS})"
            )
        return self.slice_vector([OPEN] * self.num_qubits)

    def _sandwich(self, ops: dict[int, np.ndarray]) -> complex:
        env = np.ones((1, 1), dtype=np.complex128)
        for q, a in enumerate(self._sites):
            op = ops.get(q)
            ket = a if op is None else np.tensordot(op, a, axes=(1, 1)).transpose(1, 0, 2)
            env = np.tensordot(np.tensordot(env, a.conj(), axes=(0, 0)), ket, axes=([0, 1], [0, 1]))
        return complex(env[0, 0])

    def norm_squared(self) -> float:
        return float(np.real(self._sandwich({})))

    def expectation(self, obs: PauliString) -> float:
        if not isinstance(obs, PauliString):
            obs = PauliString(tuple(obs))
        ops = {q: PAULI[p] for q, p in obs.ops}
        if any(q >= self.num_qubits for q in ops):
            raise ValueError("observable addresses a qubit outside the register")
        return float(np.real(self._sandwich(ops)))

    def probability(self, projections: dict[int, int]) -> float:
        """Probability that the listed qubits read the given bits (others summed)."""
        env = np.ones((1, 1), dtype=np.complex128)
        for q, a in enumerate(self._sites):
            if q in projections:
                b = projections[q]
                env = a[:, b, :].conj().T @ env @ a[:, b, :]
            else:
                env = np.tensordot(np.tensordot(env, a.conj(), axes=(0, 0)), a, axes=([0, 1], [0, 1]))
        return float(np.real(env[0, 0]))


def simulate_mps(c: Circuit, max_bond=None, cutoff=0.0) -> MPSState:
    """Run ``c`` on a fresh MPS, routing long-range gates with SWAPs."""
    return MPSState.init(c.num_qubits, max_bond, cutoff).apply_circuit(c)


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """``|<a|b>|`` for normalised copies of two state vectors."""
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    return float(abs(np.vdot(a, b)) / (na * nb))


def bond_cap(n: int, k: int, max_bond=None) -> int:
    cap = 2 ** min(k, n - k)
    return cap if max_bond is None else min(cap, max_bond)


__all__ = ["MPSState", "simulate_mps", "fidelity", "bond_cap", "MAX_DENSE_QUBITS"]
