# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the functions in ``_pykernels``. Same signatures, same results."""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor, fabs
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

cdef uint64_t GOLDEN_GAMMA = 0x9E3779B97F4A7C15ULL
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _mix(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


def uniform_field(key, start, Py_ssize_t n):
    cdef uint64_t k = <uint64_t>(key & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t s = <uint64_t>(start & 0xFFFFFFFFFFFFFFFF)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            o[i] = <double>(_mix(k + (s + <uint64_t>i + 1) * GOLDEN_GAMMA) >> 11) * INV_2_53
    return out


cdef int64_t _merge_count(double* src, double* dst, Py_ssize_t k) nogil:
    cdef int64_t swaps = 0
    cdef Py_ssize_t width = 1, lo, mid, hi, i, j, t
    cdef double* tmp
    cdef int flipped = 0
    while width < k:
        lo = 0
        while lo < k:
            mid = lo + width
            if mid > k:
                mid = k
            hi = lo + 2 * width
            if hi > k:
                hi = k
            i = lo
            j = mid
            t = lo
            while i < mid and j < hi:
                if src[i] <= src[j]:
                    dst[t] = src[i]
                    i += 1
                else:
                    dst[t] = src[j]
                    swaps += mid - i
                    j += 1
                t += 1
            while i < mid:
                dst[t] = src[i]
                i += 1
                t += 1
            while j < hi:
                dst[t] = src[j]
                j += 1
                t += 1
            lo += 2 * width
        tmp = src
        src = dst
        dst = tmp
        flipped = 1 - flipped
        width *= 2
    if flipped:
        for i in range(k):
            dst[i] = src[i]
    return swaps


def kendall_counts(a, b):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t k = av.shape[0]
    order = np.lexsort((bv, av))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a_s = av[order]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] b_s = np.ascontiguousarray(bv[order])
    cdef cnp.ndarray[cnp.float64_t, ndim=1] work = np.empty(k, dtype=np.float64)
    cdef int64_t n_a = 0, n_ab = 0, n_b = 0, swaps, run, r
    cdef Py_ssize_t i, j, p, q
    i = 0
    while i < k:
        j = i
        while j + 1 < k and a_s[j + 1] == a_s[i]:
            j += 1
        run = j - i + 1
        n_a += run * (run - 1) // 2
        p = i
        while p <= j:
            q = p
            while q + 1 <= j and b_s[q + 1] == b_s[p]:
                q += 1
            r = q - p + 1
            n_ab += r * (r - 1) // 2
            p = q + 1
        i = j + 1
    swaps = _merge_count(&b_s[0], &work[0], k) if k > 0 else 0
    i = 0
    while i < k:
        j = i
        while j + 1 < k and b_s[j + 1] == b_s[i]:
            j += 1
        run = j - i + 1
        n_b += run * (run - 1) // 2
        i = j + 1
    cdef int64_t n_p = k * (k - 1) // 2
    cdef int64_t n_c = n_p - n_a - n_b + n_ab - swaps
    return int(n_c), int(swaps), int(n_a), int(n_b), int(n_ab)


def cdf_l1(p, q):
    cdef const double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef const double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef double acc = 0.0, total = 0.0
    cdef Py_ssize_t i, n = min(pv.shape[0], qv.shape[0])
    for i in range(n):
        acc += pv[i] - qv[i]
        total += fabs(acc)
    return total


def cdf_l1_counts(cp, cq):
    cdef const int64_t[::1] pv = np.ascontiguousarray(cp, dtype=np.int64)
    cdef const int64_t[::1] qv = np.ascontiguousarray(cq, dtype=np.int64)
    cdef Py_ssize_t i, n = min(pv.shape[0], qv.shape[0])
    cdef int64_t tp = 0, tq = 0, run_p = 0, run_q = 0, d, total = 0
    for i in range(n):
        tp += pv[i]
        tq += qv[i]
    # beyond this bound an int64 accumulator could overflow
    if tp > 0 and tq > 0 and (<double>tp) * (<double>tq) * (<double>(n + 1)) > 4.0e18:
        from dmscope._pykernels import cdf_l1_counts as slow
        return slow(cp, cq)
    for i in range(n):
        run_p += pv[i]
        run_q += qv[i]
        d = run_p * tq - run_q * tp
        total += d if d >= 0 else -d
    return int(total)


def bin_counts(scores, double lo, double width, Py_ssize_t m):
    cdef const double[::1] s = np.ascontiguousarray(scores, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.zeros(m, dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef Py_ssize_t i
    cdef double idx
    for i in range(s.shape[0]):
        idx = floor((s[i] - lo) / width)
        if idx < 0:
            idx = 0
        elif idx > m - 1:
            idx = m - 1
        o[<Py_ssize_t>idx] += 1
    return out


cdef void _duals(unsigned char* basic, double* cost, double* u, double* v,
                 Py_ssize_t m, Py_ssize_t n, Py_ssize_t* stack,
                 unsigned char* seen_r, unsigned char* seen_c) nogil:
    cdef Py_ssize_t top = 0, node, i, j
    for i in range(m):
        seen_r[i] = 0
    for j in range(n):
        seen_c[j] = 0
    seen_r[0] = 1
    u[0] = 0.0
    stack[0] = 0
    top = 1
    # nodes < m are rows, nodes >= m are columns
    while top > 0:
        top -= 1
        node = stack[top]
        if node < m:
            i = node
            for j in range(n):
                if basic[i * n + j] and not seen_c[j]:
                    seen_c[j] = 1
                    v[j] = cost[i * n + j] - u[i]
                    stack[top] = m + j
                    top += 1
        else:
            j = node - m
            for i in range(m):
                if basic[i * n + j] and not seen_r[i]:
                    seen_r[i] = 1
                    u[i] = cost[i * n + j] - v[j]
                    stack[top] = i
                    top += 1


cdef Py_ssize_t _tree_path(unsigned char* basic, Py_ssize_t m, Py_ssize_t n,
                           Py_ssize_t i0, Py_ssize_t j0, Py_ssize_t* parent_r,
                           Py_ssize_t* parent_c, Py_ssize_t* stack,
                           Py_ssize_t* path) nogil:
    """Fills ``path`` with flat cell indices from column j0 back to row i0."""
    cdef Py_ssize_t top, node, i, j, length = 0
    for i in range(m):
        parent_r[i] = -2
    for j in range(n):
        parent_c[j] = -2
    parent_r[i0] = -1
    stack[0] = i0
    top = 1
    while top > 0:
        top -= 1
        node = stack[top]
        if node < m:
            i = node
            for j in range(n):
                if basic[i * n + j] and parent_c[j] == -2:
                    parent_c[j] = i
                    stack[top] = m + j
                    top += 1
        else:
            j = node - m
            if j == j0:
                break
            for i in range(m):
                if basic[i * n + j] and parent_r[i] == -2:
                    parent_r[i] = j
                    stack[top] = i
                    top += 1
    j = j0
    while True:
        i = parent_c[j]
        path[length] = i * n + j
        length += 1
        if i == i0:
            break
        j = parent_r[i]
        path[length] = i * n + j
        length += 1
    return length


def _least_cost_basis(supply, demand, cost):
    from dmscope._pykernels import _least_cost_basis as lcb
    return lcb(supply, demand, cost)


def transport_simplex(supply, demand, cost, Py_ssize_t max_iter=1000000):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] c_arr = np.ascontiguousarray(cost, dtype=np.float64)
    flow_arr, basic_arr = _least_cost_basis(np.asarray(supply), np.asarray(demand), c_arr)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] f_arr = np.ascontiguousarray(flow_arr)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] b_arr = np.ascontiguousarray(basic_arr, dtype=np.uint8)
    cdef Py_ssize_t m = c_arr.shape[0], n = c_arr.shape[1]
    cdef double* c = &c_arr[0, 0]
    cdef double* f = &f_arr[0, 0]
    cdef unsigned char* b = &b_arr[0, 0]
    cdef double[::1] u = np.zeros(m)
    cdef double[::1] v = np.zeros(n)
    cdef Py_ssize_t[::1] stack = np.zeros(m + n + 1, dtype=np.intp)
    cdef Py_ssize_t[::1] path = np.zeros(m + n + 1, dtype=np.intp)
    cdef Py_ssize_t[::1] parent_r = np.zeros(m, dtype=np.intp)
    cdef Py_ssize_t[::1] parent_c = np.zeros(n, dtype=np.intp)
    cdef unsigned char[::1] seen_r = np.zeros(m, dtype=np.uint8)
    cdef unsigned char[::1] seen_c = np.zeros(n, dtype=np.uint8)
    cdef Py_ssize_t it = 0, cell, enter, leave, length, t, i, j
    cdef double theta
    with nogil:
        while it < max_iter:
            _duals(b, c, &u[0], &v[0], m, n, &stack[0], &seen_r[0], &seen_c[0])
            enter = -1
            for cell in range(m * n):
                if not b[cell]:
                    i = cell // n
                    j = cell - i * n
                    if c[cell] - u[i] - v[j] < -0.5:
                        enter = cell
                        break
            if enter < 0:
                break
            i = enter // n
            j = enter - i * n
            length = _tree_path(b, m, n, i, j, &parent_r[0], &parent_c[0],
                                &stack[0], &path[0])
            theta = f[path[0]]
            t = 2
            while t < length:
                if f[path[t]] < theta:
                    theta = f[path[t]]
                t += 2
            leave = -1
            t = 0
            while t < length:
                if f[path[t]] <= theta and (leave < 0 or path[t] < leave):
                    leave = path[t]
                t += 2
            t = 0
            while t < length:
                f[path[t]] -= theta
                t += 2
            t = 1
            while t < length:
                f[path[t]] += theta
                t += 2
            f[enter] += theta
            f[leave] = 0.0
            b[leave] = 0
            b[enter] = 1
            it += 1
    return np.maximum(f_arr, 0.0), int(it)
