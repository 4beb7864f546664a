"""Locally purified MPS: mixed states as chains of (D, 2, K, D) tensors.

The density matrix is ``rho = sum_kraus |T><T|`` where the ket and bra copies
of the chain are contracted over their own bonds and share the Kraus legs, so
``rho`` is positive semidefinite by construction.
"""

from __future__ import annotations

import numpy as np

from .circuit import PAULI, Circuit, PauliString, route_gate
from .errors import ResourceError
from .mps import _Chain
from .network import OPEN, parse_bitstring
from .noise import KrausChannel, NoiseModel
from .tensor import Tensor, svd_split

MAX_DENSE_QUBITS = 12


class PMPSState(_Chain):
    """Locally purified MPS with bond cap ``max_bond`` and Kraus cap ``max_kraus``."""

    def __init__(self, sites, max_bond=None, max_kraus=None, cutoff=0.0):
        super().__init__(sites, max_bond, cutoff)
        if max_kraus is not None and max_kraus < 1:
            raise ValueError("max_kraus must be positive")
        self.max_kraus = max_kraus
        self.kraus_discarded_weight = 0.0

    @classmethod
    def init(cls, n: int, max_bond=None, max_kraus=None, cutoff=0.0) -> "PMPSState":
        if n < 1:
            raise ValueError("need at least one qubit")
        site = np.zeros((1, 2, 1, 1), dtype=np.complex128)
        site[0, 0, 0, 0] = 1.0
        return cls([site.copy() for _ in range(n)], max_bond, max_kraus, cutoff)

    @property
    def sites(self) -> list[np.ndarray]:
        return list(self._sites)

    def kraus_dims(self) -> list[int]:
        return [s.shape[2] for s in self._sites]

    # -- channels --------------------------------------------------------------

    def _compress_kraus(self, q: int):
        """SVD along the Kraus leg: keep ``U S`` so that ``T T^dag`` is unchanged up to truncation."""
        site = self._sites[q]
        res = svd_split(Tensor(site), [0, 1, 3], self.max_kraus, self.cutoff, absorb="left")
        new = np.transpose(res.left.data, (0, 1, 3, 2))
        if res.discarded_weight > 0.0:
            new = new * (1.0 - res.discarded_weight) ** -0.5
            self.kraus_discarded_weight += res.discarded_weight
            self.cumulative_discarded_weight += res.discarded_weight
        self._sites[q] = np.array(new)

    def apply_channel(self, qubits, ch: KrausChannel):
        """Contract the Kraus stack into the Kraus leg(s), then recompress."""
        qubits = tuple(qubits)
        if len(qubits) != ch.num_qubits:
            raise ValueError(f"{ch.label} acts on {ch.num_qubits} qubit(s), got {qubits}")
        a = ch.stack()
        m = a.shape[0]
        if ch.num_qubits == 1:
            (q,) = qubits
            self._center(q, q)
            t = self._sites[q]
            out = np.einsum("kij,ajbr->aikbr", a, t, optimize=True)
            self._sites[q] = out.reshape(t.shape[0], 2, m * t.shape[2], t.shape[3])
            self._compress_kraus(q)
            return self
        i = self._check_pair(qubits)
        g = a.reshape(m, 2, 2, 2, 2)
        if qubits[0] > qubits[1]:
            g = g.transpose(0, 2, 1, 4, 3)
        self._center(i, i + 1)
        theta = self._merged(i)  # (Dl, 2, K1, 2, K2, Dr)
        out = np.einsum("kabxy,lxuyvr->lakubvr", g, theta, optimize=True)
        dl, _, k1, _, k2, dr = theta.shape
        theta = out.reshape(dl, 2, m * k1, 2, k2, dr)
        self._split_pair(i, theta, 2)
        self._center(i, i)
        self._compress_kraus(i)
        return self

    def apply_noisy_circuit(self, c: Circuit, nm: NoiseModel | None = None):
        """Gates in order, each followed by its channels; routing SWAPs stay noiseless."""
        if nm is not None:
            nm.validate(c.num_qubits)
        for g in c.gates:
            if g.kind == "MEASURE":
                continue
            before, moved, after = route_gate(g)
            for s in before:
                self.apply_gate(s)
            self.apply_gate(moved)
            if nm is not None:
                relocate = dict(zip(g.qubits, moved.qubits))
                for qubits, ch in nm.channels_after(g):
                    self.apply_channel(tuple(relocate[q] for q in qubits), ch)
            for s in after:
                self.apply_gate(s)
        return self

    # -- readout ---------------------------------------------------------------

    def _sandwich(self, ops=None, projections=None) -> complex:
        ops = ops or {}
        projections = projections or {}
        env = np.ones((1, 1), dtype=np.complex128)
        for q, t in enumerate(self._sites):
            if q in projections:
                b = projections[q]
                t = t[:, b : b + 1]
                ket = t
            elif q in ops:
                ket = np.moveaxis(np.tensordot(ops[q], t, axes=(1, 1)), 0, 1)
            else:
                ket = t
            env = np.tensordot(np.tensordot(env, t.conj(), axes=(0, 0)), ket, axes=([0, 1, 2], [0, 1, 2]))
        return complex(env[0, 0])

    def trace(self) -> float:
        return float(np.real(self._sandwich()))

    def expectation(self, obs: PauliString) -> float:
        """``Tr(obs rho)``."""
        if not isinstance(obs, PauliString):
            obs = PauliString(tuple(obs))
        if any(q >= self.num_qubits for q in obs.qubits):
            raise ValueError("observable addresses a qubit outside the register")
        return float(np.real(self._sandwich({q: PAULI[p] for q, p in obs.ops})))

    def probability(self, projections) -> float:
        """Probability of the listed qubits reading the given bits."""
        if not isinstance(projections, dict):
            bits = parse_bitstring(projections, self.num_qubits)
            if OPEN in bits:
                raise ValueError("probability needs a fully specified bit-string")
            projections = dict(enumerate(bits))
        return float(np.real(self._sandwich(projections=projections)))

    def density_matrix(self) -> np.ndarray:
        n = self.num_qubits
        if n > MAX_DENSE_QUBITS:
            raise ResourceError(f"refusing to expand a {n}-qubit density matrix")
        # psi[(phys, bond), kraus]; only psi psi^dag matters, so after each site
        # the Kraus columns are squeezed to at most rows(psi) with a QR step
        psi = np.ones((1, 1), dtype=np.complex128)
        p = 1
        for t in self._sites:
            dl, _, k, dr = t.shape
            m = np.einsum("pls,lqkr->pqrsk", psi.reshape(p, dl, -1), t, optimize=True)
            p *= 2
            m = m.reshape(p * dr, -1)
            if m.shape[1] > m.shape[0]:
                _, r = np.linalg.qr(m.conj().T)
                m = r.conj().T
            psi = m
        return psi @ psi.conj().T


def simulate_pmps(c: Circuit, nm: NoiseModel | None = None, max_bond=None, max_kraus=None, cutoff=0.0) -> PMPSState:
    return PMPSState.init(c.num_qubits, max_bond, max_kraus, cutoff).apply_noisy_circuit(c, nm)


__all__ = ["PMPSState", "simulate_pmps"]
