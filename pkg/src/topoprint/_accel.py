"""Hot loops shared by the clustering and filtration code.

Kernels are compiled with numba when it is importable; otherwise the same
functions run as plain Python (slow but identical results, used for tests and
constrained environments).
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(func):
            return func
        if args and callable(args[0]):
            return args[0]
        return wrap


@njit(cache=True)
def uf_find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True)
def uf_union(parent, size, a, b):
    ra = uf_find(parent, a)
    rb = uf_find(parent, b)
    if ra == rb:
        return False
    if size[ra] < size[rb]:
        ra, rb = rb, ra
    parent[rb] = ra
    size[ra] += size[rb]
    return True


@njit(cache=True)
def uf_flatten(parent):
    """Path-compress every entry and return the root label array."""
    n = parent.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        out[i] = uf_find(parent, i)
    return out


@njit(cache=True)
def _key_search(keys, target):
    lo = 0
    hi = keys.shape[0]
    while lo < hi:
        mid = (lo + hi) // 2
        if keys[mid] < target:
            lo = mid + 1
        else:
            hi = mid
    if lo < keys.shape[0] and keys[lo] == target:
        return lo
    return -1


@njit(cache=True)
def _pair_d2(pts, a, b):
    d2 = 0.0
    for c in range(pts.shape[1]):
        diff = pts[a, c] - pts[b, c]
        d2 += diff * diff
    return d2


@njit(cache=True)
def grid_union(pts, order, starts, keys, key_stride, eps2, parent, size):
    """Union all point pairs within distance sqrt(eps2), visiting each
    unordered cell pair of the 3x3 neighborhood exactly once.

    ``pts`` may have 2 or 3 columns; binning uses the first two (xy), the
    distance uses all of them. ``order`` lists point rows grouped by cell;
    cell c owns the range starts[c]:starts[c+1]. ``keys`` are the sorted
    encoded cell coordinates (ix * key_stride + iy).
    """
    ncells = keys.shape[0]
    # forward offsets: (0,0) handled as the within-cell triangle
    offs = ((1, 0), (-1, 1), (0, 1), (1, 1))
    for c in range(ncells):
        a0 = starts[c]
        a1 = starts[c + 1]
        for u in range(a0, a1):
            pu = order[u]
            for v in range(u + 1, a1):
                pv = order[v]
                if _pair_d2(pts, pu, pv) <= eps2:
                    uf_union(parent, size, pu, pv)
        for k in range(4):
            target = keys[c] + offs[k][0] * key_stride + offs[k][1]
            t = _key_search(keys, target)
            if t < 0:
                continue
            b0 = starts[t]
            b1 = starts[t + 1]
            for u in range(a0, a1):
                pu = order[u]
                for v in range(b0, b1):
                    pv = order[v]
                    if _pair_d2(pts, pu, pv) <= eps2:
                        uf_union(parent, size, pu, pv)


@njit(cache=True)
def _in_sorted(arr, lo, hi, value):
    end = hi
    while lo < hi:
        mid = (lo + hi) // 2
        if arr[mid] < value:
            lo = mid + 1
        else:
            hi = mid
    return lo < end and arr[lo] == value


@njit(cache=True)
def forward_triangles(indptr, indices, limit, out_a, out_b, out_c):
    """Enumerate triangles u<v<w of the forward adjacency (indices holds each
    vertex's neighbors with larger id, sorted ascending).

    Writes up to out_a.shape[0] triangles and returns the total count; stops
    counting past ``limit`` so a budget overrun aborts early.
    """
    n = indptr.shape[0] - 1
    cap = out_a.shape[0]
    count = 0
    for u in range(n):
        s = indptr[u]
        e = indptr[u + 1]
        for i in range(s, e):
            v = indices[i]
            vs = indptr[v]
            ve = indptr[v + 1]
            for j in range(i + 1, e):
                w = indices[j]
                if _in_sorted(indices, vs, ve, w):
                    if count < cap:
                        out_a[count] = u
                        out_b[count] = v
                        out_c[count] = w
                    count += 1
                    if count > limit:
                        return count
    return count


@njit(cache=True)
def reduce_columns(col_rows, row_count):
    """Left-to-right Z/2 column reduction of a boundary matrix.

    ``col_rows`` lists each column's boundary row indices, sorted ascending
    (one row per column; shape (n_cols, k)). Columns are processed in order;
    a column that stays non-zero is stored keyed by its low row and pairs
    that row with this column.

    Returns (pair_row, pair_col, stored_start, stored_len, stored_col, pool):
    the persistence pairs plus the final reduced non-zero columns (pool slices
    keyed by low row; stored_col maps a low row back to its column).
    """
    n_cols = col_rows.shape[0]
    width = col_rows.shape[1]
    stored_start = np.full(row_count, -1, dtype=np.int64)
    stored_len = np.zeros(row_count, dtype=np.int64)
    stored_col = np.full(row_count, -1, dtype=np.int64)
    pool = np.empty(max(16, 4 * n_cols), dtype=np.int64)
    pool_len = 0
    pair_row = np.empty(n_cols, dtype=np.int64)
    pair_col = np.empty(n_cols, dtype=np.int64)
    n_pairs = 0
    buf = np.empty(max(16, width), dtype=np.int64)
    tmp = np.empty(max(16, width), dtype=np.int64)

    for col in range(n_cols):
        blen = 0
        for k in range(width):
            r = col_rows[col, k]
            if r >= 0:
                buf[blen] = r
                blen += 1
        while blen > 0:
            low = buf[blen - 1]
            s = stored_start[low]
            if s < 0:
                break
            slen = stored_len[low]
            need = blen + slen
            if tmp.shape[0] < need:
                tmp = np.empty(2 * need, dtype=np.int64)
            # XOR-merge: symmetric difference of two sorted lists
            a = 0
            b = 0
            out = 0
            while a < blen and b < slen:
                ra = buf[a]
                rb = pool[s + b]
                if ra < rb:
                    tmp[out] = ra
                    out += 1
                    a += 1
                elif rb < ra:
                    tmp[out] = rb
                    out += 1
                    b += 1
                else:
                    a += 1
                    b += 1
            while a < blen:
                tmp[out] = buf[a]
                out += 1
                a += 1
            while b < slen:
                tmp[out] = pool[s + b]
                out += 1
                b += 1
            if buf.shape[0] < tmp.shape[0]:
                buf = np.empty(tmp.shape[0], dtype=np.int64)
            swap = buf
            buf = tmp
            tmp = swap
            blen = out
        if blen > 0:
            low = buf[blen - 1]
            if pool_len + blen > pool.shape[0]:
                grown = np.empty(2 * (pool_len + blen), dtype=np.int64)
                grown[:pool_len] = pool[:pool_len]
                pool = grown
            pool[pool_len:pool_len + blen] = buf[:blen]
            stored_start[low] = pool_len
            stored_len[low] = blen
            stored_col[low] = col
            pool_len += blen
            pair_row[n_pairs] = low
            pair_col[n_pairs] = col
            n_pairs += 1
    return (pair_row[:n_pairs], pair_col[:n_pairs],
            stored_start, stored_len, stored_col, pool[:pool_len])


@njit(cache=True)
def h0_pairs_union_find(edges, n_vertices):
    """H0 persistence pairing over vertices born at scale 0.

    Processing edges in filtration order, a merging edge kills the younger
    component representative (the larger of the two component-minimum vertex
    ids), exactly as the standard column reduction would pair it. Returns
    (dead_vertex, edge_row) pairs and a flag per edge marking cycle (positive)
    edges.
    """
    parent = np.arange(n_vertices, dtype=np.int64)
    size = np.ones(n_vertices, dtype=np.int64)
    rep = np.arange(n_vertices, dtype=np.int64)  # min vertex id per root
    m = edges.shape[0]
    pair_vertex = np.empty(m, dtype=np.int64)
    pair_edge = np.empty(m, dtype=np.int64)
    positive = np.zeros(m, dtype=np.bool_)
    n_pairs = 0
    for e in range(m):
        ra = uf_find(parent, edges[e, 0])
        rb = uf_find(parent, edges[e, 1])
        if ra == rb:
            positive[e] = True
            continue
        ka = rep[ra]
        kb = rep[rb]
        if size[ra] < size[rb]:
            ra, rb = rb, ra
        parent[rb] = ra
        size[ra] += size[rb]
        if ka < kb:
            rep[ra] = ka
            pair_vertex[n_pairs] = kb
        else:
            rep[ra] = kb
            pair_vertex[n_pairs] = ka
        pair_edge[n_pairs] = e
        n_pairs += 1
    return pair_vertex[:n_pairs], pair_edge[:n_pairs], positive


@njit(cache=True)
def grid_edges(pts, order, starts, keys, key_stride, eps2, out_i, out_j, out_d):
    """Collect every unordered point pair within sqrt(eps2) plus its squared
    distance (metric over all columns of ``pts``, binning over the first two).

    Returns the number of pairs found; ``out_*`` must be sized for the worst
    case by the caller (a counting pass uses out arrays of length 0).
    """
    ncells = keys.shape[0]
    offs = ((1, 0), (-1, 1), (0, 1), (1, 1))
    cap = out_i.shape[0]
    count = 0
    for c in range(ncells):
        a0 = starts[c]
        a1 = starts[c + 1]
        for u in range(a0, a1):
            pu = order[u]
            for v in range(u + 1, a1):
                pv = order[v]
                d2 = _pair_d2(pts, pu, pv)
                if d2 <= eps2:
                    if count < cap:
                        out_i[count] = pu
                        out_j[count] = pv
                        out_d[count] = d2
                    count += 1
        for k in range(4):
            target = keys[c] + offs[k][0] * key_stride + offs[k][1]
            t = _key_search(keys, target)
            if t < 0:
                continue
            b0 = starts[t]
            b1 = starts[t + 1]
            for u in range(a0, a1):
                pu = order[u]
                for v in range(b0, b1):
                    pv = order[v]
                    d2 = _pair_d2(pts, pu, pv)
                    if d2 <= eps2:
                        if count < cap:
                            out_i[count] = pu
                            out_j[count] = pv
                            out_d[count] = d2
                        count += 1
    return count
