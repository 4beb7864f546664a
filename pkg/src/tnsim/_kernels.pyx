# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled contraction-path kernels.

Mirror of ``_kernels_py``: same candidate order, same splitmix64 draws, same
tie-breaking, hence identical paths.  Label sets are fixed-width bitsets.
"""

from libc.stdlib cimport malloc, calloc, free
from libc.math cimport log, log2
from libc.stdint cimport uint64_t

cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil


cdef inline double _uniform(uint64_t* state) noexcept nogil:
    state[0] += <uint64_t>0x9E3779B97F4A7C15ULL
    cdef uint64_t z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBULL
    z = z ^ (z >> 31)
    return (<double>(z >> 11) + 0.5) * (1.0 / 9007199254740992.0)


cdef inline double _bits_product(const uint64_t* bits, int W, const double* ext) noexcept nogil:
    cdef double p = 1.0
    cdef int w
    cdef uint64_t x
    for w in range(W):
        x = bits[w]
        while x:
            p *= ext[w * 64 + __builtin_ctzll(x)]
            x &= x - 1
    return p


cdef inline double _shared_product(const uint64_t* a, const uint64_t* b, int W,
                                   const double* ext) noexcept nogil:
    cdef double p = 1.0
    cdef int w
    cdef uint64_t x
    for w in range(W):
        x = a[w] & b[w]
        while x:
            p *= ext[w * 64 + __builtin_ctzll(x)]
            x &= x - 1
    return p


cdef double* _copy_extents(extents, int M) except NULL:
    cdef double* ext = <double*>malloc((M if M > 0 else 1) * sizeof(double))
    if ext == NULL:
        raise MemoryError()
    cdef int i
    for i in range(M):
        ext[i] = float(extents[i])
    return ext


def greedy_path(node_labels, extents, double temperature=0.0, seed=0):
    cdef int n = len(node_labels)
    cdef int M = len(extents)
    cdef int W = (M + 63) // 64 if M > 0 else 1
    cdef int total = 2 * n if n > 0 else 1
    cdef uint64_t rng = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef double* ext = _copy_extents(extents, M)
    cdef uint64_t* bits = <uint64_t*>calloc(total * W, sizeof(uint64_t))
    cdef double* size = <double*>malloc(total * sizeof(double))
    cdef char* active = <char*>calloc(total, sizeof(char))
    cdef int* owner = <int*>malloc(2 * (M if M > 0 else 1) * sizeof(int))
    cdef int* cand = <int*>malloc((M + 1) * sizeof(int))
    if bits == NULL or size == NULL or active == NULL or owner == NULL or cand == NULL:
        free(ext); free(bits); free(size); free(active); free(owner); free(cand)
        raise MemoryError()

    cdef int i, j, k, w, lab, a, b, o, nc, best_a, best_b, next_id, n_active, tmp
    cdef uint64_t x
    cdef double ss, prod, res, flops, score, best_score, best_flops, best_res
    path = []
    try:
        for i in range(2 * M):
            owner[i] = -1
        for i in range(n):
            for lab in node_labels[i]:
                bits[i * W + (lab >> 6)] |= (<uint64_t>1) << (lab & 63)
                if owner[2 * lab] < 0:
                    owner[2 * lab] = i
                else:
                    owner[2 * lab + 1] = i
            size[i] = _bits_product(&bits[i * W], W, ext)
            active[i] = 1
        next_id = n
        n_active = n
        with nogil:
            while n_active > 1:
                best_a = -1
                best_b = -1
                best_score = 0.0
                best_flops = 0.0
                best_res = 0.0
                for a in range(next_id):
                    if not active[a]:
                        continue
                    nc = 0
                    for w in range(W):
                        x = bits[a * W + w]
                        while x:
                            lab = w * 64 + __builtin_ctzll(x)
                            x &= x - 1
                            for k in range(2):
                                o = owner[2 * lab + k]
                                if o > a:
                                    cand[nc] = o
                                    nc += 1
                    # insertion sort, then skip duplicates
                    for i in range(1, nc):
                        tmp = cand[i]
                        j = i - 1
                        while j >= 0 and cand[j] > tmp:
                            cand[j + 1] = cand[j]
                            j -= 1
                        cand[j + 1] = tmp
                    for i in range(nc):
                        if i > 0 and cand[i] == cand[i - 1]:
                            continue
                        b = cand[i]
                        ss = _shared_product(&bits[a * W], &bits[b * W], W, ext)
                        prod = size[a] * size[b]
                        res = prod / (ss * ss)
                        flops = prod / ss
                        if temperature > 0.0:
                            score = log2(res) - temperature * (-log(-log(_uniform(&rng))))
                        else:
                            score = res
                        if best_a < 0 or score < best_score or (score == best_score and flops < best_flops):
                            best_a = a
                            best_b = b
                            best_score = score
                            best_flops = flops
                            best_res = res
                if best_a < 0:
                    # disconnected: join the two smallest (size, id)
                    for a in range(next_id):
                        if not active[a]:
                            continue
                        if best_a < 0 or size[a] < size[best_a]:
                            best_b = best_a
                            best_a = a
                        elif best_b < 0 or size[a] < size[best_b]:
                            best_b = a
                    if best_a > best_b:
                        tmp = best_a
                        best_a = best_b
                        best_b = tmp
                    best_res = size[best_a] * size[best_b]
                a = best_a
                b = best_b
                for w in range(W):
                    bits[next_id * W + w] = bits[a * W + w] ^ bits[b * W + w]
                    x = bits[next_id * W + w]
                    while x:
                        lab = w * 64 + __builtin_ctzll(x)
                        x &= x - 1
                        for k in range(2):
                            o = owner[2 * lab + k]
                            if o == a or o == b:
                                owner[2 * lab + k] = next_id
                size[next_id] = best_res
                active[a] = 0
                active[b] = 0
                active[next_id] = 1
                with gil:
                    path.append((a, b))
                next_id += 1
                n_active -= 1
    finally:
        free(ext); free(bits); free(size); free(active); free(owner); free(cand)
    return path


def tree_cost(node_labels, extents, path):
    cdef int n = len(node_labels)
    cdef int M = len(extents)
    cdef int W = (M + 63) // 64 if M > 0 else 1
    cdef int steps = len(path)
    cdef int total = n + steps if n + steps > 0 else 1
    cdef double* ext = _copy_extents(extents, M)
    cdef uint64_t* bits = <uint64_t*>calloc(total * W, sizeof(uint64_t))
    cdef double* size = <double*>malloc(total * sizeof(double))
    if bits == NULL or size == NULL:
        free(ext); free(bits); free(size)
        raise MemoryError()
    cdef int i, w, a, b, lab, c
    cdef double ss, prod, res, flops = 0.0, largest = 1.0
    try:
        for i in range(n):
            for lab in node_labels[i]:
                bits[i * W + (lab >> 6)] |= (<uint64_t>1) << (lab & 63)
            size[i] = _bits_product(&bits[i * W], W, ext)
            if i == 0 or size[i] > largest:
                largest = size[i]
        c = n
        for a, b in path:
            ss = _shared_product(&bits[a * W], &bits[b * W], W, ext)
            prod = size[a] * size[b]
            flops += prod / ss
            res = prod / (ss * ss)
            for w in range(W):
                bits[c * W + w] = bits[a * W + w] ^ bits[b * W + w]
            size[c] = res
            if res > largest:
                largest = res
            c += 1
    finally:
        free(ext); free(bits); free(size)
    return flops, largest
