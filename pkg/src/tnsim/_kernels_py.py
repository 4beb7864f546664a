"""Pure-Python contraction-path kernels.

Reference implementation of the routines in ``_kernels.pyx``; both must return
identical paths for identical inputs (same candidate order, same RNG draws).

Conventions shared by both implementations:

* ``node_labels[i]`` lists the integer label ids of input node ``i``; a label
  appears on at most two nodes.
* ``extents[l]`` is the (float) extent of label ``l``; set it to 1.0 to model a
  sliced index.
* Paths use single-static-assignment ids: inputs are ``0..n-1`` and step ``k``
  creates node ``n + k``.
"""

import math

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    """splitmix64 stream (Steele, Lea & Flood); ``uniform`` maps to the open interval (0, 1)."""

    def __init__(self, seed):
        self.state = int(seed) & _MASK

    def uniform(self):
        self.state = (self.state + _GOLDEN) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        z ^= z >> 31
        return ((z >> 11) + 0.5) * (1.0 / 9007199254740992.0)

    def gumbel(self):
        return -math.log(-math.log(self.uniform()))


def _bits_product(bits, extents):
    p = 1.0
    while bits:
        low = bits & -bits
        p *= extents[low.bit_length() - 1]
        bits ^= low
    return p


def greedy_path(node_labels, extents, temperature=0.0, seed=0):
    """Greedy pairwise order.

    Among node pairs sharing a label, pick the one with the smallest result,
    ties broken by the lower multiply-add count and then by the lexicographic
    pair.  With ``temperature > 0`` the score becomes
    ``log2(result size) - temperature * Gumbel noise``.  Disconnected
    components are joined last, smallest tensors first.
    """
    extents = [float(e) for e in extents]
    n = len(node_labels)
    bits, size = {}, {}
    owners = {}
    for i, labs in enumerate(node_labels):
        m = 0
        for lab in labs:
            m |= 1 << lab
            owners.setdefault(lab, []).append(i)
        bits[i] = m
        size[i] = _bits_product(m, extents)
    rng = SplitMix64(seed)
    path = []
    next_id = n
    while len(bits) > 1:
        best = None
        for a in sorted(bits):
            ba = bits[a]
            cands = set()
            x = ba
            while x:
                low = x & -x
                for o in owners[low.bit_length() - 1]:
                    if o > a:
                        cands.add(o)
                x ^= low
            for b in sorted(cands):
                ss = _bits_product(ba & bits[b], extents)
                prod = size[a] * size[b]
                res = prod / (ss * ss)
                flops = prod / ss
                if temperature > 0.0:
                    score = math.log2(res) - temperature * rng.gumbel()
                else:
                    score = res
                key = (score, flops, a, b)
                if best is None or key < best:
                    best = key
        if best is None:
            a, b = sorted(sorted(bits, key=lambda i: (size[i], i))[:2])
            res = size[a] * size[b]
        else:
            _, _, a, b = best
            ss = _bits_product(bits[a] & bits[b], extents)
            res = size[a] * size[b] / (ss * ss)
        new_bits = bits.pop(a) ^ bits.pop(b)
        del size[a], size[b]
        x = new_bits
        while x:
            low = x & -x
            lab = low.bit_length() - 1
            owners[lab] = [next_id if o in (a, b) else o for o in owners[lab]]
            x ^= low
        bits[next_id] = new_bits
        size[next_id] = res
        path.append((a, b))
        next_id += 1
    return path


def tree_cost(node_labels, extents, path):
    """Return ``(multiply-adds, largest tensor size)`` of a path, inputs included."""
    extents = [float(e) for e in extents]
    bits, size = [], []
    for labs in node_labels:
        m = 0
        for lab in labs:
            m |= 1 << lab
        bits.append(m)
        size.append(_bits_product(m, extents))
    flops = 0.0
    largest = max(size) if size else 1.0
    for a, b in path:
        ss = _bits_product(bits[a] & bits[b], extents)
        prod = size[a] * size[b]
        flops += prod / ss
        res = prod / (ss * ss)
        bits.append(bits[a] ^ bits[b])
        size.append(res)
        if res > largest:
            largest = res
    return flops, largest
