# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot kernels; see ``_pykernels`` for the contracts."""

import numpy as np
cimport numpy as cnp
from cython.parallel cimport parallel, prange
from libc.math cimport sqrt, floor, fabs, INFINITY
from libc.stdlib cimport malloc, realloc, free
from libc.string cimport memcpy

cnp.import_array()

BACKEND = "cython"

cdef inline long long cell_key(long long cx, long long cy) noexcept nogil:
    # offset 2**30, stride 2**31; matches _pykernels._key
    return (cx + 1073741824LL) * 2147483648LL + (cy + 1073741824LL)


cdef inline Py_ssize_t find_cell(const long long[::1] keys, long long key) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = keys.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if keys[mid] < key:
            lo = mid + 1
        else:
            hi = mid
    if lo < keys.shape[0] and keys[lo] == key:
        return lo
    return -1


# ---------------------------------------------------------------- enumeration

cdef struct Walk:
    double* buf
    Py_ssize_t n
    Py_ssize_t cap
    double T
    long long stride
    long long counter
    long long checked
    long long violations
    double max_rk
    double max_rm
    double max_rt
    int oom


cdef void check_quad(const double* q, Walk* w) noexcept nogil:
    cdef double sk = 0, sk2 = 0, smr = 0, smi = 0, sm2r = 0, sm2i = 0, sabs = 0
    cdef double k, mr, mi, rk, rr, ri, rm, d, want, zr[4], zi[4], rad[4]
    cdef int a, b
    for a in range(4):
        k = q[3 * a]
        mr = q[3 * a + 1]
        mi = q[3 * a + 2]
        sk += k
        sk2 += k * k
        smr += mr
        smi += mi
        sm2r += mr * mr - mi * mi
        sm2i += 2.0 * mr * mi
        sabs += mr * mr + mi * mi
        zr[a] = mr / k
        zi[a] = mi / k
        rad[a] = 1.0 / fabs(k)
    rk = fabs(sk * sk - 2.0 * sk2) / (sk2 if sk2 > 1.0 else 1.0)
    rr = fabs(smr * smr - smi * smi - 2.0 * sm2r)
    ri = fabs(2.0 * smr * smi - 2.0 * sm2i)
    rm = (rr if rr > ri else ri) / (sabs if sabs > 1.0 else 1.0)
    if rk > w.max_rk:
        w.max_rk = rk
    if rm > w.max_rm:
        w.max_rm = rm
    for a in range(4):
        for b in range(a + 1, 4):
            d = sqrt((zr[a] - zr[b]) * (zr[a] - zr[b]) + (zi[a] - zi[b]) * (zi[a] - zi[b]))
            if q[3 * a] < 0 or q[3 * b] < 0:
                want = fabs(rad[a] - rad[b])
            else:
                want = rad[a] + rad[b]
            d = fabs(d - want)
            if d > w.max_rt:
                w.max_rt = d
    w.checked += 1


cdef void visit(const double* q, int last, int depth, Walk* w) noexcept nogil:
    cdef double child[12]
    cdef double k, mr, mi, old
    cdef int i, j
    cdef double* grown
    for i in range(4):
        if i == last:
            continue
        k = 0
        mr = 0
        mi = 0
        for j in range(4):
            if j != i:
                k += q[3 * j]
                mr += q[3 * j + 1]
                mi += q[3 * j + 2]
        old = q[3 * i]
        k = 2.0 * k - old
        if k >= w.T:
            continue
        if depth == 0:
            if k < old * (1.0 - 1e-12):
                w.violations += 1
        elif k <= old:
            w.violations += 1
        mr = 2.0 * mr - q[3 * i + 1]
        mi = 2.0 * mi - q[3 * i + 2]
        memcpy(child, q, 12 * sizeof(double))
        child[3 * i] = k
        child[3 * i + 1] = mr
        child[3 * i + 2] = mi
        if w.n == w.cap:
            grown = <double*>realloc(w.buf, 2 * w.cap * 3 * sizeof(double))
            if grown == NULL:
                w.oom = 1
                return
            w.buf = grown
            w.cap *= 2
        w.buf[3 * w.n] = k
        w.buf[3 * w.n + 1] = mr
        w.buf[3 * w.n + 2] = mi
        w.n += 1
        if w.stride > 0:
            if w.counter % w.stride == 0:
                check_quad(child, w)
            w.counter += 1
        visit(child, i, depth + 1, w)
        if w.oom:
            return


def expand_tree(root, double T, long long check_stride=0):
    cdef double[:, ::1] r = np.ascontiguousarray(root, dtype=np.float64).reshape(4, 3)
    cdef double q[12]
    cdef Walk w
    cdef int a
    for a in range(4):
        q[3 * a] = r[a, 0]
        q[3 * a + 1] = r[a, 1]
        q[3 * a + 2] = r[a, 2]
    w.cap = 1024
    w.n = 0
    w.buf = <double*>malloc(w.cap * 3 * sizeof(double))
    if w.buf == NULL:
        raise MemoryError()
    w.T = T
    w.stride = check_stride
    w.counter = 0
    w.checked = 0
    w.violations = 0
    w.max_rk = 0
    w.max_rm = 0
    w.max_rt = 0
    w.oom = 0
    try:
        with nogil:
            visit(q, -1, 0, &w)
        if w.oom:
            raise MemoryError("circle buffer growth failed")
        out = np.empty((w.n, 3), dtype=np.float64)
        if w.n:
            memcpy(cnp.PyArray_DATA(out), w.buf, w.n * 3 * sizeof(double))
    finally:
        free(w.buf)
    diag = np.array([w.max_rk, w.max_rm, w.max_rt, w.checked, w.violations], dtype=np.float64)
    return out, diag


# ---------------------------------------------------------------- neighbour grid

cdef Py_ssize_t scan_cell_pairs(Py_ssize_t c, const double[::1] xs, const double[::1] ys,
                                const long long[::1] cx, const long long[::1] cy,
                                const long long[::1] keys, const long long[::1] starts,
                                double radius, int rings, Py_ssize_t* nbr, double* out) noexcept nogil:
    """Pairs (a, b), a in cell c, b > a in the surrounding block; order a, stencil, b."""
    cdef Py_ssize_t cnt = 0, a, b, s, lo
    cdef Py_ssize_t first = starts[c]
    cdef int dx, dy, m = 0
    cdef double d, ex, ey
    for dx in range(-rings, rings + 1):
        for dy in range(-rings, rings + 1):
            nbr[m] = find_cell(keys, cell_key(cx[first] + dx, cy[first] + dy))
            m = m + 1
    for a in range(first, starts[c + 1]):
        for s in range(m):
            if nbr[s] < 0:
                continue
            lo = starts[nbr[s]]
            if lo <= a:
                lo = a + 1
            for b in range(lo, starts[nbr[s] + 1]):
                ex = xs[a] - xs[b]
                ey = ys[a] - ys[b]
                d = sqrt(ex * ex + ey * ey)
                if d < radius:
                    if out != NULL:
                        out[cnt] = d
                    cnt = cnt + 1
    return cnt


def pair_distances(const double[::1] xs, const double[::1] ys,
                   const long long[::1] cx, const long long[::1] cy,
                   const long long[::1] keys, const long long[::1] starts,
                   double radius, int rings, int nthreads=1):
    cdef Py_ssize_t n = xs.shape[0], ncell = keys.shape[0], c
    cdef Py_ssize_t width = (2 * rings + 1) * (2 * rings + 1)
    cdef Py_ssize_t* nbr
    if n < 2 or ncell == 0:
        return np.empty(0)
    counts_arr = np.zeros(ncell + 1, dtype=np.int64)
    cdef long long[::1] counts = counts_arr
    out_arr = np.empty(0)
    cdef double* out = NULL
    cdef int phase
    for phase in range(2):
        if phase == 1:
            np.cumsum(counts_arr, out=counts_arr)
            out_arr = np.empty(counts_arr[ncell], dtype=np.float64)
            out = <double*>cnp.PyArray_DATA(out_arr)
        with nogil, parallel(num_threads=nthreads):
            nbr = <Py_ssize_t*>malloc(width * sizeof(Py_ssize_t))
            for c in prange(ncell, schedule="dynamic", chunksize=64):
                if phase == 0:
                    counts[c + 1] = scan_cell_pairs(c, xs, ys, cx, cy, keys, starts, radius, rings, nbr, NULL)
                else:
                    scan_cell_pairs(c, xs, ys, cx, cy, keys, starts, radius, rings, nbr, out + counts[c])
            free(nbr)
    return out_arr


cdef inline void scan_cell(long long kx, long long ky, double px, double py, long long pid,
                           const double[::1] xs, const double[::1] ys, const long long[::1] ids,
                           const long long[::1] keys, const long long[::1] starts,
                           double* best) noexcept nogil:
    cdef Py_ssize_t c = find_cell(keys, cell_key(kx, ky)), b
    cdef double d, ex, ey
    if c < 0:
        return
    for b in range(starts[c], starts[c + 1]):
        if ids[b] == pid:
            continue
        ex = px - xs[b]
        ey = py - ys[b]
        d = sqrt(ex * ex + ey * ey)
        if d < best[0]:
            best[0] = d


def nearest(const double[::1] qx, const double[::1] qy, const long long[::1] qid,
            const double[::1] xs, const double[::1] ys, const long long[::1] ids,
            const long long[::1] keys, const long long[::1] starts,
            bounds, double cell, long long max_ring, double[::1] best, double slack,
            int nthreads=1):
    cdef Py_ssize_t nq = qx.shape[0], i
    cdef long long cxmin = bounds[0], cxmax = bounds[1], cymin = bounds[2], cymax = bounds[3]
    cdef long long qcx, qcy, rho, t, ext
    cdef double b
    resolved_arr = np.zeros(nq, dtype=np.uint8)
    cdef unsigned char[::1] resolved = resolved_arr
    for i in prange(nq, nogil=True, num_threads=nthreads, schedule="dynamic", chunksize=64):
        qcx = <long long>floor(qx[i] / cell)
        qcy = <long long>floor(qy[i] / cell)
        ext = qcx - cxmin
        if cxmax - qcx > ext:
            ext = cxmax - qcx
        if qcy - cymin > ext:
            ext = qcy - cymin
        if cymax - qcy > ext:
            ext = cymax - qcy
        b = best[i]
        rho = 0
        while max_ring < 0 or rho <= max_ring:
            if rho == 0:
                scan_cell(qcx, qcy, qx[i], qy[i], qid[i], xs, ys, ids, keys, starts, &b)
            else:
                t = -rho
                while t <= rho:
                    scan_cell(qcx + t, qcy - rho, qx[i], qy[i], qid[i], xs, ys, ids, keys, starts, &b)
                    scan_cell(qcx + t, qcy + rho, qx[i], qy[i], qid[i], xs, ys, ids, keys, starts, &b)
                    t = t + 1
                t = -rho + 1
                while t < rho:
                    scan_cell(qcx - rho, qcy + t, qx[i], qy[i], qid[i], xs, ys, ids, keys, starts, &b)
                    scan_cell(qcx + rho, qcy + t, qx[i], qy[i], qid[i], xs, ys, ids, keys, starts, &b)
                    t = t + 1
            if b <= (rho - slack) * cell or rho >= ext:
                resolved[i] = 1
                break
            rho = rho + 1
        best[i] = b
    return resolved_arr.astype(bool)


# ---------------------------------------------------------------- energy

def energy_rows(const double[::1] xs, const double[::1] ys, int nthreads=1):
    """Neumaier-compensated row sums of 1/d over j > i."""
    cdef Py_ssize_t n = xs.shape[0], i, j
    cdef double s, c, t, v, ex, ey, d
    rows_arr = np.zeros(n, dtype=np.float64)
    dup_arr = np.full(n, -1, dtype=np.int64)
    cdef double[::1] rows = rows_arr
    cdef long long[::1] dup = dup_arr
    for i in prange(n, nogil=True, num_threads=nthreads, schedule="dynamic", chunksize=16):
        s = 0.0
        c = 0.0
        for j in range(i + 1, n):
            ex = xs[i] - xs[j]
            ey = ys[i] - ys[j]
            d = sqrt(ex * ex + ey * ey)
            if d == 0.0:
                if dup[i] < 0:
                    dup[i] = j
                continue
            v = 1.0 / d
            t = s + v
            if fabs(s) >= fabs(v):
                c = c + ((s - t) + v)
            else:
                c = c + ((v - t) + s)
            s = t
        rows[i] = s + c
    hits = np.flatnonzero(dup_arr >= 0)
    if len(hits):
        return rows_arr, int(hits[0]), int(dup_arr[hits[0]])
    return rows_arr, -1, -1
