"""Plan execution: slice enumeration, pairwise contraction and ordered reduction."""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .circuit import PAULI, Circuit, PauliString
from .errors import InternalConsistencyError
from .network import OPEN, BASIS, TensorNetwork, build_slice_network, build_state_network
from .planner import DEFAULT_MEMORY_BUDGET, ContractionPlan, fuse_small_tensors, plan
from .tensor import Tensor


def default_workers() -> int:
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1)


@dataclass
class ExecutionStats:
    slices: int = 0
    peak_intermediate: int = 0
    peak_live: int = 0


def _check_plan(net: TensorNetwork, p: ContractionPlan):
    if p.fingerprint and p.fingerprint != net.fingerprint():
        raise ValueError("plan was built for a different network")
    live = set(net.nodes)
    for a, b, c in p.steps:
        if a not in live or b not in live or a == b or c in live:
            raise ValueError(f"plan step {(a, b, c)} does not match the network")
        live -= {a, b}
        live.add(c)
    if len(live) != 1:
        raise ValueError(f"plan leaves {len(live)} nodes uncontracted")
    bonds = set(net.bonds)
    for lab, ext in p.sliced_indices:
        if lab not in bonds or net.extent(lab) != ext:
            raise ValueError(f"sliced index {lab!r} is not a bond of extent {ext}")


def _run_slice(net: TensorNetwork, p: ContractionPlan, assignment):
    fixed = {lab: v for (lab, _), v in zip(p.sliced_indices, assignment)}
    arrays = {}
    live = 0
    for nid, t in net.nodes.items():
        data, labels = t.data, list(t.labels)
        if fixed:
            for lab in [l for l in labels if l in fixed]:
                ax = labels.index(lab)
                data = np.take(data, fixed[lab], axis=ax)
                labels.pop(ax)
        arrays[nid] = (data, labels)
        live += data.size
    peak_live = live
    peak = max((d.size for d, _ in arrays.values()), default=1)
    for a, b, c in p.steps:
        da, la = arrays.pop(a)
        db, lb = arrays.pop(b)
        shared = [l for l in la if l in lb]
        ax_a = [la.index(l) for l in shared]
        ax_b = [lb.index(l) for l in shared]
        out = np.tensordot(da, db, axes=(ax_a, ax_b))
        if out.size > p.est_max_intermediate:
            raise InternalConsistencyError(
                f"step {(a, b, c)} produced {out.size} elements, plan promised at most "
                f"{p.est_max_intermediate}"
            )
        labels = [l for l in la if l not in shared] + [l for l in lb if l not in shared]
        arrays[c] = (out, labels)
        live += out.size - da.size - db.size
        peak = max(peak, out.size)
        peak_live = max(peak_live, live + da.size + db.size)
    ((data, labels),) = arrays.values()
    if labels:
        data = np.transpose(data, [labels.index(l) for l in net.open_legs])
    return data, int(peak), int(peak_live)


def execute(
    net: TensorNetwork,
    p: ContractionPlan,
    workers: int = 1,
    stats: ExecutionStats | None = None,
) -> Tensor:
    """Contract ``net`` along ``p``; slices are summed in slice-index order.

    The result's modes are ``net.open_legs`` in declared order.  The worker
    count only changes scheduling, never the reduction order.
    """
    _check_plan(net, p)
    assignments = list(itertools.product(*[range(e) for _, e in p.sliced_indices]))
    if workers > 1 and len(assignments) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda asg: _run_slice(net, p, asg), assignments))
    else:
        parts = [_run_slice(net, p, asg) for asg in assignments]
    total = np.array(parts[0][0], copy=True)
    for part, _, _ in parts[1:]:
        total = total + part
    if stats is not None:
        stats.slices += len(assignments)
        stats.peak_intermediate = max([stats.peak_intermediate] + [pk for _, pk, _ in parts])
        stats.peak_live = max([stats.peak_live] + [pl for _, _, pl in parts])
    return Tensor(total, net.open_legs)


def contract_network(
    net: TensorNetwork,
    memory_budget_bytes: int = DEFAULT_MEMORY_BUDGET,
    workers: int = 1,
    contraction_plan: ContractionPlan | None = None,
    fuse: bool = True,
    seed: int = 0,
    stats: ExecutionStats | None = None,
) -> tuple[Tensor, ContractionPlan]:
    """Fuse, plan (unless a plan is supplied) and execute."""
    if fuse:
        net = fuse_small_tensors(net)
    if contraction_plan is None:
        contraction_plan = plan(net, memory_budget_bytes, seed=seed)
    return execute(net, contraction_plan, workers, stats), contraction_plan


# ---------------------------------------------------------------------------
# expectation by state-vector slicing


def _apply_paulis(vec: np.ndarray, ops: list[tuple[int, str]]) -> np.ndarray:
    """Apply Paulis to axes of a ``(2,)*r`` array; ``ops`` holds (axis, Pauli)."""
    for ax, p in ops:
        vec = np.moveaxis(np.tensordot(PAULI[p], vec, axes=([1], [ax])), 0, ax)
    return vec


def _flip(bits: tuple[int, ...], proj_q: list[int], paulis: dict[int, str]):
    """``P|bits> = phase |bits'>`` restricted to the projected qubits."""
    out, phase = list(bits), 1.0 + 0j
    for i, q in enumerate(proj_q):
        p = paulis.get(q)
        b = bits[i]
        if p == "X":
            out[i] = 1 - b
        elif p == "Y":
            out[i] = 1 - b
            phase *= 1j if b == 0 else -1j
        elif p == "Z" and b == 1:
            phase = -phase
    return tuple(out), phase


def expectation_sliced(
    c: Circuit,
    obs: PauliString,
    rank_max: int,
    workers: int = 1,
    memory_budget_bytes: int = DEFAULT_MEMORY_BUDGET,
    seed: int = 0,
) -> float:
    """``<psi|P|psi>`` accumulated over ``2**(n - rank_max)`` projected slices.

    The open qubits are the observable's qubits first, then the lowest-index
    others.  A slice pairs a projected bit-string ``p`` with ``p'`` such that
    ``P|p> = phase|p'>`` on the projected qubits, so both vectors of a pair are
    computed in one task.  Partial sums are reduced in ascending ``p`` order.
    """
    n = c.num_qubits
    if rank_max <= 0 or rank_max > n:
        raise ValueError(f"rank_max must lie in 1..{n}, got {rank_max}")
    if not isinstance(obs, PauliString):
        obs = PauliString(tuple(obs))
    c = c.unitary_part()
    paulis = obs.as_dict()
    if any(q >= n for q in paulis):
        raise ValueError("observable addresses a qubit outside the register")
    preferred = sorted(paulis) + [q for q in range(n) if q not in paulis]
    open_q = sorted(preferred[:rank_max])
    proj_q = [q for q in range(n) if q not in open_q]
    local_ops = [(open_q.index(q), paulis[q]) for q in open_q if q in paulis]

    if not proj_q:
        vec, _ = contract_network(build_state_network(c), memory_budget_bytes, workers, seed=seed)
        v = vec.data
        return float(np.real(np.vdot(v, _apply_paulis(v, local_ops))))

    template = [OPEN] * n
    for q in proj_q:
        template[q] = 0
    base = build_slice_network(c, template)
    proj_nodes = base.meta["projections"]
    net = fuse_small_tensors(base, keep=proj_nodes.values())
    p = plan(net, memory_budget_bytes, seed=seed)

    def slice_vector(bits):
        updates = {
            proj_nodes[q]: Tensor(BASIS[b], net.nodes[proj_nodes[q]].labels) for q, b in zip(proj_q, bits)
        }
        return execute(net.replace_nodes(updates), p).data

    tasks = []
    for bits in itertools.product((0, 1), repeat=len(proj_q)):
        partner, _ = _flip(bits, proj_q, paulis)
        if partner >= bits:
            tasks.append(bits)

    def run(bits):
        partner, phase = _flip(bits, proj_q, paulis)
        v = slice_vector(bits)
        pv = _apply_paulis(v, local_ops)
        if partner == bits:
            return phase * np.vdot(v, pv)
        w = slice_vector(partner)
        _, back = _flip(partner, proj_q, paulis)
        return phase * np.vdot(w, pv) + back * np.vdot(v, _apply_paulis(w, local_ops))

    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, tasks))
    else:
        parts = [run(t) for t in tasks]
    total = 0j
    for part in parts:
        total += part
    return float(np.real(total))
