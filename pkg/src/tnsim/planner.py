"""Contraction-order search, index slicing and small-tensor fusion.

Cost model: contracting two tensors costs the product of the extents of the
union of their indices (multiply-adds, counted once).  A plan's cost is the sum
over its steps, multiplied by the number of slices.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

from . import kernels
from .errors import InfeasibleError
from .network import TensorNetwork
from .tensor import contract_shared

BYTES_PER_ELEMENT = 16
DEFAULT_MEMORY_BUDGET = 2 * 1024**3
PLAN_FORMAT = "tnsim-plan"
PLAN_VERSION = 1


@dataclass
class ContractionPlan:
    """Pairwise contraction order for one network.

    ``steps`` holds ``(a, b, new)`` node ids; new ids continue after the
    largest input id.  ``est_flops`` already includes the slice multiplicity;
    ``est_max_intermediate`` is per slice.
    """

    steps: list[tuple[int, int, int]]
    sliced_indices: list[tuple[str, int]]
    est_flops: float
    est_max_intermediate: int
    fingerprint: str = ""
    open_legs: tuple[str, ...] = ()
    memory_budget_bytes: int = DEFAULT_MEMORY_BUDGET
    meta: dict = field(default_factory=dict)

    @property
    def num_slices(self) -> int:
        return math.prod(e for _, e in self.sliced_indices)

    def to_dict(self) -> dict:
        return {
            "format": PLAN_FORMAT,
            "version": PLAN_VERSION,
            "fingerprint": self.fingerprint,
            "open_legs": list(self.open_legs),
            "steps": [list(s) for s in self.steps],
            "sliced_indices": [[lab, ext] for lab, ext in self.sliced_indices],
            "est_flops": self.est_flops,
            "est_max_intermediate": self.est_max_intermediate,
            "memory_budget_bytes": self.memory_budget_bytes,
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ContractionPlan":
        if d.get("format") != PLAN_FORMAT or d.get("version") != PLAN_VERSION:
            raise ValueError("not a version-1 tnsim plan document")
        return cls(
            steps=[tuple(int(x) for x in s) for s in d["steps"]],
            sliced_indices=[(str(lab), int(ext)) for lab, ext in d["sliced_indices"]],
            est_flops=float(d["est_flops"]),
            est_max_intermediate=int(d["est_max_intermediate"]),
            fingerprint=d.get("fingerprint", ""),
            open_legs=tuple(d.get("open_legs", ())),
            memory_budget_bytes=int(d.get("memory_budget_bytes", DEFAULT_MEMORY_BUDGET)),
            meta=dict(d.get("meta", {})),
        )

    @classmethod
    def from_json(cls, text: str) -> "ContractionPlan":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# integer encoding shared with the kernels


class _Encoded:
    def __init__(self, net: TensorNetwork):
        self.node_ids = list(net.nodes)
        self.label_ids: dict[str, int] = {}
        for t in net.nodes.values():
            for lab in t.labels:
                self.label_ids.setdefault(lab, len(self.label_ids))
        self.labels = list(self.label_ids)
        self.node_labels = [[self.label_ids[l] for l in t.labels] for t in net.nodes.values()]
        self.extents = [float(net.extent(l)) for l in self.labels]
        self.open = {self.label_ids[l] for l in net.open_legs}

    def extents_with(self, sliced) -> list[float]:
        ext = list(self.extents)
        for lab in sliced:
            ext[lab] = 1.0
        return ext

    def tensor_bits(self, path) -> list[int]:
        bits = []
        for labs in self.node_labels:
            m = 0
            for lab in labs:
                m |= 1 << lab
            bits.append(m)
        for a, b in path:
            bits.append(bits[a] ^ bits[b])
        return bits

    def to_steps(self, path) -> list[tuple[int, int, int]]:
        ids = list(self.node_ids)
        nxt = (max(ids) + 1) if ids else 0
        steps = []
        for a, b in path:
            steps.append((ids[a], ids[b], nxt))
            ids.append(nxt)
            nxt += 1
        return steps

    def to_path(self, steps) -> list[tuple[int, int]]:
        pos = {nid: i for i, nid in enumerate(self.node_ids)}
        path = []
        for a, b, c in steps:
            if a not in pos or b not in pos or c in pos:
                raise ValueError(f"step {(a, b, c)} does not match the network")
            path.append((pos.pop(a), pos.pop(b)))
            pos[c] = len(self.node_ids) + len(path) - 1
        return path


def left_to_right_path(n: int) -> list[tuple[int, int]]:
    """Baseline: fold nodes in id order, ``((0 1) 2) 3 ...``."""
    if n < 2:
        return []
    path = [(0, 1)]
    for k in range(2, n):
        path.append((n + k - 2, k))
    return path


def path_cost(net: TensorNetwork, steps, sliced=()) -> tuple[float, int]:
    """Reference evaluation of ``(total multiply-adds, largest per-slice tensor)``."""
    enc = _Encoded(net)
    sliced_ids = [enc.label_ids[l] for l in sliced]
    flops, largest = kernels.tree_cost(enc.node_labels, enc.extents_with(sliced_ids), enc.to_path(steps))
    mult = math.prod(net.extent(l) for l in sliced)
    return flops * mult, int(largest)


def _slices_for(enc: _Encoded, path, budget_elements: int) -> list[int]:
    bits = enc.tensor_bits(path)
    sliced: list[int] = []
    while True:
        ext = enc.extents_with(sliced)
        flops, largest = kernels.tree_cost(enc.node_labels, ext, path)
        if largest <= budget_elements:
            return sliced
        biggest = None
        for m in bits:
            p, x = 1.0, m
            while x:
                low = x & -x
                p *= ext[low.bit_length() - 1]
                x ^= low
            if p == largest:
                biggest = m
                break
        cands = []
        x = biggest
        while x:
            low = x & -x
            lab = low.bit_length() - 1
            x ^= low
            if lab not in enc.open and ext[lab] > 1.0:
                cands.append(lab)
        if not cands:
            raise InfeasibleError(
                f"largest intermediate needs {int(largest)} elements but the budget allows "
                f"{budget_elements} and no further index can be sliced"
            )
        best = None
        for lab in cands:
            trial = enc.extents_with(sliced + [lab])
            f, big = kernels.tree_cost(enc.node_labels, trial, path)
            mult = math.prod(enc.extents[s] for s in sliced) * enc.extents[lab]
            key = (big, f * mult, lab)
            if best is None or key < best:
                best = key
        sliced.append(best[2])


def choose_slices(net: TensorNetwork, steps, memory_budget_bytes: int) -> list[tuple[str, int]]:
    """Greedily slice bonds of the largest intermediate until every tensor fits the budget."""
    enc = _Encoded(net)
    budget = memory_budget_bytes // BYTES_PER_ELEMENT
    sliced = _slices_for(enc, enc.to_path(steps), budget)
    return [(enc.labels[l], int(enc.extents[l])) for l in sliced]


def plan(
    net: TensorNetwork,
    memory_budget_bytes: int = DEFAULT_MEMORY_BUDGET,
    seed: int = 0,
    restarts: int = 8,
    temperature: float = 1.0,
    time_limit: float | None = None,
) -> ContractionPlan:
    """Search a contraction order and slice it to fit ``memory_budget_bytes``.

    Candidates are the deterministic greedy order, the left-to-right baseline
    and ``restarts`` Gumbel-perturbed greedy orders; the cheapest feasible one
    wins.  Results depend only on the inputs unless ``time_limit`` cuts the
    restarts short.
    """
    enc = _Encoded(net)
    budget = memory_budget_bytes // BYTES_PER_ELEMENT
    n = len(enc.node_ids)
    start = time.perf_counter()

    candidates = [("greedy", kernels.greedy_path(enc.node_labels, enc.extents, 0.0, 0))]
    candidates.append(("left-to-right", left_to_right_path(n)))
    best = None
    infeasible = None

    def consider(name, path):
        nonlocal best, infeasible
        try:
            sliced = _slices_for(enc, path, budget)
        except InfeasibleError as exc:
            infeasible = exc
            return
        flops, largest = kernels.tree_cost(enc.node_labels, enc.extents_with(sliced), path)
        total = flops * math.prod(enc.extents[s] for s in sliced)
        key = (total, largest)
        if best is None or key < best[0]:
            best = (key, name, path, sliced, largest)

    for name, path in candidates:
        consider(name, path)
    if n > 2:
        for r in range(restarts):
            if time_limit is not None and time.perf_counter() - start > time_limit:
                break
            path = kernels.greedy_path(enc.node_labels, enc.extents, temperature, seed * 1_000_003 + r + 1)
            consider(f"greedy-t{r}", path)
    if best is None:
        raise infeasible
    (total, largest), name, path, sliced, _ = best
    return ContractionPlan(
        steps=enc.to_steps(path),
        sliced_indices=[(enc.labels[l], int(enc.extents[l])) for l in sliced],
        est_flops=float(total),
        est_max_intermediate=int(largest),
        fingerprint=net.fingerprint(),
        open_legs=net.open_legs,
        memory_budget_bytes=int(memory_budget_bytes),
        meta={"strategy": name, "seed": seed, "restarts": restarts, "kernels": kernels.IMPLEMENTATION},
    )


def fuse_small_tensors(net: TensorNetwork, keep=()) -> TensorNetwork:
    """Absorb rank-1 and rank-2 nodes into a neighbour (lowest id first).

    Nodes in ``keep`` are neither absorbed nor absorb anything.  A merge is
    skipped if it would enlarge the receiving tensor.
    """
    keep = set(keep)
    nodes = dict(net.nodes)
    owners: dict[str, set[int]] = {}
    for nid, t in nodes.items():
        for lab in t.labels:
            owners.setdefault(lab, set()).add(nid)
    changed = True
    while changed:
        changed = False
        for nid in sorted(nodes):
            if nid in keep or nid not in nodes:
                continue
            t = nodes[nid]
            if t.rank > 2:
                continue
            nbrs = sorted({o for lab in t.labels for o in owners[lab] if o != nid and o not in keep})
            for target in nbrs:
                merged = contract_shared(nodes[target], t)
                if merged.size > nodes[target].size:
                    continue
                for lab in t.labels:
                    owners[lab].discard(nid)
                    if lab in merged.labels:
                        owners[lab].add(target)
                for lab in nodes[target].labels:
                    if lab not in merged.labels:
                        owners[lab].discard(target)
                nodes[target] = merged
                del nodes[nid]
                changed = True
                break
    return TensorNetwork(nodes, net.open_legs, net.meta)
