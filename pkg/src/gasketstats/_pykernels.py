"""Pure numpy implementations of the hot kernels.

Same signatures and results as the compiled ``_ckernels`` module.  Used when
the extension is not built, or when ``GASKETSTATS_BACKEND=python``.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

BACKEND = "python"

_SLOT_OTHERS = np.array([[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]])


def _quad_residuals(q):
    """Worst relative Descartes residuals and tangency residual over a batch.

    ``q`` has shape (n, 4, 3) holding (k, Re m, Im m) per slot.
    """
    k = q[:, :, 0]
    m = q[:, :, 1] + 1j * q[:, :, 2]
    sk2 = (k * k).sum(axis=1)
    rk = np.abs(k.sum(axis=1) ** 2 - 2.0 * sk2) / np.maximum(1.0, sk2)
    rmc = m.sum(axis=1) ** 2 - 2.0 * (m * m).sum(axis=1)
    sm2 = (np.abs(m) ** 2).sum(axis=1)
    rm = np.maximum(np.abs(rmc.real), np.abs(rmc.imag)) / np.maximum(1.0, sm2)
    z = m / k
    r = 1.0 / np.abs(k)
    rt = np.zeros(len(q))
    for a in range(4):
        for b in range(a + 1, 4):
            d = np.abs(z[:, a] - z[:, b])
            want = np.where((k[:, a] < 0) | (k[:, b] < 0), np.abs(r[:, a] - r[:, b]), r[:, a] + r[:, b])
            rt = np.maximum(rt, np.abs(d - want))
    return rk, rm, rt


def expand_tree(root, T, check_stride=0):
    """All circles reached from ``root`` by reduced swap words with k < T.

    Returns ``(circles, diag)``: circles is (n, 3) of (k, Re m, Im m) for
    the swapped-in circles only; diag is
    ``[max curvature residual, max center residual, max tangency residual,
    quadruples checked, growth violations]``.  Traversal here is
    level-by-level; the circle multiset equals the depth-first one.
    """
    root = np.asarray(root, dtype=np.float64).reshape(1, 4, 3)
    quads = root
    last = np.array([-1])
    depth = 0
    out = []
    diag = np.zeros(5)
    counter = 0
    while len(quads):
        child_q, child_last = [], []
        for i in range(4):
            keep = last != i
            q = quads[keep]
            if not len(q):
                continue
            others = q[:, _SLOT_OTHERS[i], :]
            new = 2.0 * others.sum(axis=1) - q[:, i, :]
            ok = new[:, 0] < T
            q, new, old_k = q[ok], new[ok], q[ok, i, 0]
            if not len(q):
                continue
            if depth == 0:
                bad = new[:, 0] < old_k * (1.0 - 1e-12)
            else:
                bad = new[:, 0] <= old_k
            diag[4] += bad.sum()
            q = q.copy()
            q[:, i, :] = new
            child_q.append(q)
            child_last.append(np.full(len(q), i))
            out.append(new)
        if not child_q:
            break
        quads = np.concatenate(child_q)
        last = np.concatenate(child_last)
        if check_stride:
            idx = np.arange(counter, counter + len(quads))
            sel = quads[idx % check_stride == 0]
            counter += len(quads)
            if len(sel):
                rk, rm, rt = _quad_residuals(sel)
                diag[0] = max(diag[0], rk.max())
                diag[1] = max(diag[1], rm.max())
                diag[2] = max(diag[2], rt.max())
                diag[3] += len(sel)
        depth += 1
    circles = np.concatenate(out) if out else np.empty((0, 3))
    return circles, diag


def _cell_ranges(keys, starts, want):
    pos = np.searchsorted(keys, want)
    pos_c = np.minimum(pos, len(keys) - 1)
    hit = (pos < len(keys)) & (keys[pos_c] == want)
    lo = np.where(hit, starts[pos_c], 0)
    hi = np.where(hit, starts[pos_c + 1], 0)
    return lo, hi


def _expand(owner, lo, hi):
    """Flatten ranges [lo, hi) into (owner, member) index pairs."""
    counts = hi - lo
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    rep = np.repeat(np.arange(len(owner)), counts)
    offs = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    return owner[rep], lo[rep] + offs


def _key(cx, cy):
    return (cx + (1 << 30)) * (1 << 31) + (cy + (1 << 30))


def pair_distances(xs, ys, cx, cy, keys, starts, radius, rings, nthreads=1):
    """Distances ``< radius`` over unordered pairs, points sorted by cell."""
    n = len(xs)
    if n < 2 or not len(keys):
        return np.empty(0)
    chunks = []
    a_all = np.arange(n)
    block = max(1, (1 << 20) // max(1, (2 * rings + 1) ** 2 * 4))
    for a0 in range(0, n, block):
        a = a_all[a0:a0 + block]
        per_a = []
        for dx in range(-rings, rings + 1):
            for dy in range(-rings, rings + 1):
                lo, hi = _cell_ranges(keys, starts, _key(cx[a] + dx, cy[a] + dy))
                lo = np.maximum(lo, a + 1)
                hi = np.maximum(hi, lo)
                p, b = _expand(a, lo, hi)
                d = np.sqrt((xs[p] - xs[b]) ** 2 + (ys[p] - ys[b]) ** 2)
                keep = d < radius
                per_a.append((p[keep], d[keep]))
        if per_a:
            p = np.concatenate([x[0] for x in per_a])
            d = np.concatenate([x[1] for x in per_a])
            # match the compiled kernel's order: by owning point, stencil order, member
            chunks.append(d[np.argsort(p, kind="stable")])
    return np.concatenate(chunks) if chunks else np.empty(0)


def _ring_offsets(rho):
    if rho == 0:
        return [(0, 0)]
    offs = []
    for dx in range(-rho, rho + 1):
        offs.append((dx, -rho))
        offs.append((dx, rho))
    for dy in range(-rho + 1, rho):
        offs.append((-rho, dy))
        offs.append((rho, dy))
    return offs


def nearest(qx, qy, qid, xs, ys, ids, keys, starts, bounds, cell, max_ring, best, slack, nthreads=1):
    """Ring-expanding nearest search; updates ``best`` in place.

    Returns a boolean array marking queries whose minimum is certified.
    ``bounds`` = (cxmin, cxmax, cymin, cymax) of occupied cells.
    """
    nq = len(qx)
    resolved = np.zeros(nq, dtype=bool)
    if nq == 0:
        return resolved
    qcx = np.floor(qx / cell).astype(np.int64)
    qcy = np.floor(qy / cell).astype(np.int64)
    cxmin, cxmax, cymin, cymax = bounds
    extent = np.maximum.reduce([qcx - cxmin, cxmax - qcx, qcy - cymin, cymax - qcy])
    active = np.arange(nq)
    rho = 0
    while len(active) and (max_ring < 0 or rho <= max_ring):
        for dx, dy in _ring_offsets(rho):
            lo, hi = _cell_ranges(keys, starts, _key(qcx[active] + dx, qcy[active] + dy))
            q, b = _expand(active, lo, hi)
            if not len(q):
                continue
            d = np.sqrt((qx[q] - xs[b]) ** 2 + (qy[q] - ys[b]) ** 2)
            d[ids[b] == qid[q]] = np.inf
            np.minimum.at(best, q, d)
        done = (best[active] <= (rho - slack) * cell) | (rho >= extent[active])
        resolved[active[done]] = True
        active = active[~done]
        rho += 1
    return resolved


def energy_rows(xs, ys, nthreads=1):
    """Per-row sums of 1/d over j > i, plus the first coincident pair."""
    n = len(xs)
    rows = np.zeros(n)
    block = max(1, (1 << 21) // max(1, n))
    starts = list(range(0, n, block))

    def work(i0):
        i1 = min(n, i0 + block)
        dx = xs[i0:i1, None] - xs[None, i0:]
        dy = ys[i0:i1, None] - ys[None, i0:]
        d = np.sqrt(dx * dx + dy * dy)
        upper = np.arange(i0, n)[None, :] > np.arange(i0, i1)[:, None]
        dup = np.argwhere(upper & (d == 0.0))
        with np.errstate(divide="ignore"):
            inv = np.where(upper, 1.0 / d, 0.0)
        rows[i0:i1] = inv.sum(axis=1)
        if len(dup):
            return (int(dup[0, 0]) + i0, int(dup[0, 1]) + i0)
        return None

    if nthreads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(nthreads) as ex:
            dups = list(ex.map(work, starts))
    else:
        dups = [work(s) for s in starts]
    dups = [d for d in dups if d is not None]
    di, dj = dups[0] if dups else (-1, -1)
    return rows, di, dj
