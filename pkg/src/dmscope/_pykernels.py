"""Pure-Python/numpy implementations of the hot kernels.

Used when the compiled ``_ckernels`` extension is unavailable. Every function
here has a twin in ``_ckernels.pyx`` with an identical signature and
bit-identical results.
"""
import numpy as np

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_MASK64 = (1 << 64) - 1
_INV_2_53 = 1.0 / 9007199254740992.0


def uniform_field(key, start, n):
    """Counter-based uniforms in [0, 1) for counters ``start .. start+n-1``.

    Counter ``i`` is mixed as ``splitmix64(key + (i + 1) * GOLDEN_GAMMA)`` and
    the top 53 bits become the mantissa.
    """
    key = np.uint64(key & _MASK64)
    start = np.uint64(start & _MASK64)
    z = np.arange(n, dtype=np.uint64)
    z += start + np.uint64(1)
    z *= np.uint64(GOLDEN_GAMMA)
    z += key
    z ^= z >> np.uint64(30)
    z *= np.uint64(_MIX1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_MIX2)
    z ^= z >> np.uint64(31)
    return (z >> np.uint64(11)).astype(np.float64) * _INV_2_53


def kendall_counts(a, b):
    """Pair counts ``(n_c, n_d, n_a, n_b, n_ab)`` by Knight's O(K log K) method.

    ``n_a``/``n_b`` include pairs tied in both components; ``n_ab`` counts
    those pairs once.
    """
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    k = len(a)
    order = sorted(range(k), key=lambda i: (a[i], b[i]))
    a_s = [a[i] for i in order]
    b_s = [b[i] for i in order]

    n_a = 0
    n_ab = 0
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

    swaps = 0
    src = b_s
    dst = [0.0] * k
    width = 1
    while width < k:
        for lo in range(0, k, 2 * width):
            mid = min(lo + width, k)
            hi = min(lo + 2 * width, k)
            i, j, t = lo, mid, lo
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
        src, dst = dst, src
        width *= 2

    n_b = 0
    i = 0
    while i < k:
        j = i
        while j + 1 < k and src[j + 1] == src[i]:
            j += 1
        run = j - i + 1
        n_b += run * (run - 1) // 2
        i = j + 1

    n_p = k * (k - 1) // 2
    n_d = swaps
    n_c = n_p - n_a - n_b + n_ab - n_d
    return n_c, n_d, n_a, n_b, n_ab


def cdf_l1(p, q):
    """Sum over bins of |CDF_p - CDF_q| for two float mass vectors."""
    acc = 0.0
    total = 0.0
    for x, y in zip(np.asarray(p, dtype=np.float64).tolist(),
                    np.asarray(q, dtype=np.float64).tolist()):
        acc += x - y
        total += abs(acc)
    return total


def cdf_l1_counts(cp, cq):
    """Exact integer ``sum_k |C_p(k) * T_q - C_q(k) * T_p|`` for count vectors."""
    cp = [int(v) for v in cp]
    cq = [int(v) for v in cq]
    tp = sum(cp)
    tq = sum(cq)
    run_p = 0
    run_q = 0
    total = 0
    for x, y in zip(cp, cq):
        run_p += x
        run_q += y
        total += abs(run_p * tq - run_q * tp)
    return total


def bin_counts(scores, lo, width, m):
    """Histogram counts with out-of-range scores clamped into the edge bins."""
    scores = np.asarray(scores, dtype=np.float64)
    idx = np.floor((scores - lo) / width)
    idx = np.clip(idx, 0, m - 1).astype(np.int64)
    return np.bincount(idx, minlength=m).astype(np.int64)


def _least_cost_basis(supply, demand, cost):
    m, n = cost.shape
    s = supply.astype(np.float64).copy()
    d = demand.astype(np.float64).copy()
    flow = np.zeros((m, n))
    basic = np.zeros((m, n), dtype=bool)
    row_open = np.ones(m, dtype=bool)
    col_open = np.ones(n, dtype=bool)
    rows_left, cols_left = m, n
    for cell in np.argsort(cost, axis=None, kind="stable").tolist():
        i, j = divmod(cell, n)
        if not (row_open[i] and col_open[j]):
            continue
        x = min(s[i], d[j])
        flow[i, j] = x
        basic[i, j] = True
        if rows_left == 1 and cols_left == 1:
            break
        if cols_left == 1 or (rows_left > 1 and s[i] <= d[j]):
            d[j] = max(d[j] - s[i], 0.0)
            s[i] = 0.0
            row_open[i] = False
            rows_left -= 1
        else:
            s[i] = max(s[i] - d[j], 0.0)
            d[j] = 0.0
            col_open[j] = False
            cols_left -= 1
    return flow, basic


def _tree_adjacency(basic):
    m, n = basic.shape
    rows = [[] for _ in range(m)]
    cols = [[] for _ in range(n)]
    for i, j in zip(*np.nonzero(basic)):
        rows[i].append(int(j))
        cols[j].append(int(i))
    return rows, cols


def _duals(rows, cols, cost):
    m, n = cost.shape
    u = np.zeros(m)
    v = np.zeros(n)
    seen_r = [False] * m
    seen_c = [False] * n
    seen_r[0] = True
    stack = [(0, 0)]  # (is_col, index)
    while stack:
        is_col, k = stack.pop()
        if is_col:
            for i in cols[k]:
                if not seen_r[i]:
                    seen_r[i] = True
                    u[i] = cost[i, k] - v[k]
                    stack.append((0, i))
        else:
            for j in rows[k]:
                if not seen_c[j]:
                    seen_c[j] = True
                    v[j] = cost[k, j] - u[k]
                    stack.append((1, j))
    return u, v


def _tree_path(rows, cols, i0, j0):
    """Basis cells on the tree path from column ``j0`` back to row ``i0``.

    Consecutive cells alternately share a column and a row, so together with
    the entering cell ``(i0, j0)`` they close the pivot cycle.
    """
    m, n = len(rows), len(cols)
    parent_r = [None] * m
    parent_c = [None] * n
    parent_r[i0] = -1
    frontier = [(0, i0)]
    while frontier:
        is_col, k = frontier.pop()
        if is_col:
            if k == j0:
                break
            for i in cols[k]:
                if parent_r[i] is None:
                    parent_r[i] = k
                    frontier.append((0, i))
        else:
            for j in rows[k]:
                if parent_c[j] is None:
                    parent_c[j] = k
                    frontier.append((1, j))
    path = []
    j = j0
    while True:
        i = parent_c[j]
        path.append((i, j))
        if i == i0:
            break
        j = parent_r[i]
        path.append((i, j))
    return path


def transport_simplex(supply, demand, cost, max_iter=1000000):
    """Balanced transportation problem by the transportation simplex.

    Starts from the least-cost basis; entering and leaving cells follow
    Bland's lowest-index rule. ``cost`` must be integer-valued so reduced
    costs are exact. Returns ``(flow, iterations)``.
    """
    cost = np.asarray(cost, dtype=np.float64)
    flow, basic = _least_cost_basis(np.asarray(supply), np.asarray(demand), cost)
    rows, cols = _tree_adjacency(basic)
    it = 0
    while it < max_iter:
        u, v = _duals(rows, cols, cost)
        reduced = cost - u[:, None] - v[None, :]
        reduced[basic] = 0.0
        candidates = np.flatnonzero(reduced < -0.5)
        if candidates.size == 0:
            break
        i0, j0 = divmod(int(candidates[0]), cost.shape[1])
        path = _tree_path(rows, cols, i0, j0)
        minus = path[0::2]
        plus = path[1::2]
        theta = min(flow[c] for c in minus)
        leave = min(c for c in minus if flow[c] <= theta)
        for c in minus:
            flow[c] -= theta
        for c in plus:
            flow[c] += theta
        flow[i0, j0] += theta
        flow[leave] = 0.0
        basic[leave] = False
        basic[i0, j0] = True
        rows[leave[0]].remove(leave[1])
        cols[leave[1]].remove(leave[0])
        rows[i0].append(j0)
        cols[j0].append(i0)
        it += 1
    return np.maximum(flow, 0.0), it
