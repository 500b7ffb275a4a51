"""Compiled kernels for the orbit-enumeration core.

The separated-set builder for linear (toral / circle) systems runs on
lattice candidate grids.  Bowen separation between two lattice points
depends only on their integer coordinate difference, so the builder first
scans the difference box once for "bad offsets" (differences with
d_n <= delta) and then performs the greedy admission pass with O(1)
lookups per (candidate, bad offset) pair.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def scan_bad_offsets(gen, amat, counts, n, delta, delta_half, max_bad):
    """Enumerate lattice coordinate differences with d_n <= delta.

    gen: (d, m) lattice generator; amat: (d, d) integer map matrix (float);
    counts: (m,) per-axis candidate extents.  Returns (offsets, half_flags,
    n_bad); n_bad = -1 signals overflow of max_bad.
    """
    d = gen.shape[0]
    m = gen.shape[1]
    total = 1
    for j in range(m):
        total *= 2 * counts[j] - 1
    offsets = np.zeros((max_bad, m), dtype=np.int32)
    half = np.zeros(max_bad, dtype=np.uint8)
    n_bad = 0
    dk = np.zeros(m, dtype=np.int64)
    w = np.zeros(d, dtype=np.float64)
    wn = np.zeros(d, dtype=np.float64)
    d2 = delta * delta
    h2 = delta_half * delta_half
    for idx in range(total):
        rem = idx
        zero = True
        for j in range(m):
            span = 2 * counts[j] - 1
            q = rem % span
            rem //= span
            dk[j] = q - (counts[j] - 1)
            if dk[j] != 0:
                zero = False
        if zero:
            continue
        for i in range(d):
            acc = 0.0
            for j in range(m):
                acc += gen[i, j] * dk[j]
            w[i] = acc - np.floor(acc)
        bad = True
        within_half = True
        for _step in range(n):
            s = 0.0
            for i in range(d):
                f = w[i]
                g = 1.0 - f
                mm = f if f < g else g
                s += mm * mm
            if s > d2:
                bad = False
                break
            if s > h2:
                within_half = False
            # advance the difference by the integer matrix, reduce mod 1
            for i in range(d):
                acc = 0.0
                for jj in range(d):
                    acc += amat[i, jj] * w[jj]
                wn[i] = acc - np.floor(acc)
            for i in range(d):
                w[i] = wn[i]
        if bad:
            if n_bad >= max_bad:
                return offsets, half, -1
            for j in range(m):
                offsets[n_bad, j] = dk[j]
            half[n_bad] = 1 if within_half else 0
            n_bad += 1
    return offsets, half, n_bad


@njit(cache=True, nogil=True)
def greedy_mark(order, kcoords, counts, offsets):
    """Greedy admission by scatter marking.

    Each admitted candidate immediately marks every position within a bad
    offset of itself as covered, so rejection is an O(1) flag lookup.  Cost
    is O(N + admitted * B) instead of O(N * B).  The offset table must be
    symmetric (closed under negation), which the difference-box scan
    guarantees.  Returns (admitted, covered, covers_extra).
    """
    N = kcoords.shape[0]
    m = kcoords.shape[1]
    B = offsets.shape[0]
    total = 1
    for j in range(m):
        total *= counts[j]
    strides = np.zeros(m, dtype=np.int64)
    acc = 1
    for j in range(m - 1, -1, -1):
        strides[j] = acc
        acc *= counts[j]
    covered_by = np.full(total, -1, dtype=np.int64)
    admitted = np.zeros(N, dtype=np.uint8)
    covered = np.zeros(N, dtype=np.uint8)
    covers_extra = np.zeros(N, dtype=np.uint8)
    for oi in range(order.shape[0]):
        ci = order[oi]
        flat = 0
        for j in range(m):
            flat += kcoords[ci, j] * strides[j]
        marker = covered_by[flat]
        if marker >= 0:
            covered[ci] = 1
            covers_extra[marker] = 1
            continue
        admitted[ci] = 1
        for b in range(B):
            nb = 0
            ok = True
            for j in range(m):
                kk = kcoords[ci, j] + offsets[b, j]
                if kk < 0 or kk >= counts[j]:
                    ok = False
                    break
                nb += kk * strides[j]
            if ok and covered_by[nb] < 0:
                covered_by[nb] = ci
    return admitted, covered, covers_extra


@njit(cache=True, nogil=True)
def greedy_direct(orbits, delta, order, metric_kind):
    """Greedy admission with explicit pairwise Bowen distance checks.

    orbits: (N, n, d) orbit coordinates; metric_kind 0 = torus Euclidean,
    1 = line (absolute difference).  Quadratic; intended for small N.
    """
    N, n, d = orbits.shape
    admitted_idx = np.zeros(N, dtype=np.int64)
    n_adm = 0
    admitted = np.zeros(N, dtype=np.uint8)
    covered = np.zeros(N, dtype=np.uint8)
    covers_extra = np.zeros(N, dtype=np.uint8)
    d2 = delta * delta
    for oi in range(N):
        ci = order[oi]
        reject_by = -1
        for aj in range(n_adm):
            cj = admitted_idx[aj]
            within = True
            for i in range(n):
                s = 0.0
                for q in range(d):
                    w = orbits[ci, i, q] - orbits[cj, i, q]
                    if metric_kind == 0:
                        f = w - np.floor(w)
                        g = 1.0 - f
                        mm = f if f < g else g
                        s += mm * mm
                    else:
                        s += w * w
                if s > d2:
                    within = False
                    break
            if within:
                reject_by = cj
                break
        if reject_by >= 0:
            covered[ci] = 1
            covers_extra[reject_by] = 1
        else:
            admitted[ci] = 1
            admitted_idx[n_adm] = ci
            n_adm += 1
    return admitted, covered, covers_extra
