"""Compiled inner loops for exhaustive template scans.

A template's forms are ``base + sum_l v_l * M_l + r * M_res`` where the
``v_l`` range over an odometer and ``r`` is the last free coefficient. At a
point where ``M_res`` does not vanish, exactly one value of ``r`` makes the
point a zero, so every visited point settles at most one candidate ``r``.
All q candidates are settled after ~q log q point visits instead of q scans.
Values of ``r`` never settled by a non-singular zero are survivors.

All field arithmetic goes through dense add/mul tables.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def accumulate(coefs, M, D, ADD, MUL):
    """Value and gradient of ``sum_s coefs[s] * slot_s`` at every point."""
    P, S = M.shape
    m = D.shape[2]
    val = np.zeros(P, dtype=np.int64)
    grad = np.zeros((P, m), dtype=np.int64)
    for s in range(S):
        c = coefs[s]
        if c == 0:
            continue
        for p in range(P):
            val[p] = ADD[val[p], MUL[c, M[p, s]]]
            for i in range(m):
                grad[p, i] = ADD[grad[p, i], MUL[c, D[p, s, i]]]
    return val, grad


@njit(cache=True)
def _gradient_nonzero(p, vals, r, base_grad, Dloop, Dres, ADD, MUL):
    m = base_grad.shape[1]
    L = vals.shape[0]
    for i in range(m):
        g = base_grad[p, i]
        for l in range(L):
            g = ADD[g, MUL[vals[l], Dloop[p, l, i]]]
        g = ADD[g, MUL[r, Dres[p, i]]]
        if g != 0:
            return True
    return False


@njit(cache=True)
def scan_unit(base_val, base_grad, Mloop, Dloop, dom, domsize, Mres, neg_inv_res, Dres, res_allowed, ADD, MUL):
    """Scan every odometer state; return survivor rows (loop values..., r)."""
    P = base_val.shape[0]
    L = Mloop.shape[1]
    q = res_allowed.shape[0]
    m = base_grad.shape[1]
    n_allowed = 0
    for r in range(q):
        if res_allowed[r]:
            n_allowed += 1
    out = np.empty((16, L + 1), dtype=np.int64)
    n_out = 0
    idx = np.zeros(L, dtype=np.int64)
    vals = np.empty(L, dtype=np.int64)
    settled = np.empty(q, dtype=np.bool_)
    res_grad_zero = np.empty(P, dtype=np.bool_)
    for p in range(P):
        z = True
        for i in range(m):
            if Dres[p, i] != 0:
                z = False
        res_grad_zero[p] = z
    for l in range(L):
        if domsize[l] == 0:
            return out[:0]
    while True:
        for l in range(L):
            vals[l] = dom[l, idx[l]]
        for r in range(q):
            settled[r] = not res_allowed[r]
        remaining = n_allowed
        for p in range(P):
            v = base_val[p]
            for l in range(L):
                v = ADD[v, MUL[vals[l], Mloop[p, l]]]
            if Mres[p] != 0:
                r = MUL[v, neg_inv_res[p]]
                if settled[r]:
                    continue
                if _gradient_nonzero(p, vals, r, base_grad, Dloop, Dres, ADD, MUL):
                    settled[r] = True
                    remaining -= 1
            else:
                if v != 0:
                    continue
                if res_grad_zero[p]:
                    if _gradient_nonzero(p, vals, 0, base_grad, Dloop, Dres, ADD, MUL):
                        for r in range(q):
                            settled[r] = True
                        remaining = 0
                else:
                    for r in range(q):
                        if not settled[r] and _gradient_nonzero(p, vals, r, base_grad, Dloop, Dres, ADD, MUL):
                            settled[r] = True
                            remaining -= 1
            if remaining == 0:
                break
        if remaining > 0:
            for r in range(q):
                if not settled[r]:
                    if n_out == out.shape[0]:
                        bigger = np.empty((2 * n_out, L + 1), dtype=np.int64)
                        bigger[:n_out] = out
                        out = bigger
                    for l in range(L):
                        out[n_out, l] = vals[l]
                    out[n_out, L] = r
                    n_out += 1
        # advance the odometer, last slot fastest
        l = L - 1
        while l >= 0:
            idx[l] += 1
            if idx[l] < domsize[l]:
                break
            idx[l] = 0
            l -= 1
        if l < 0:
            break
    return out[:n_out]


@njit(cache=True)
def census_rows(coefs, M, D, ADD, MUL, cap):
    """Zero census of many forms sharing one monomial layout.

    Returns (total, nonsingular, zero_index) where zero_index[r, :cap] lists
    the point indices of the zeros of row r (truncated at cap).
    """
    R, S = coefs.shape
    P = M.shape[0]
    m = D.shape[2]
    total = np.zeros(R, dtype=np.int64)
    nonsing = np.zeros(R, dtype=np.int64)
    zidx = np.full((R, cap), -1, dtype=np.int64)
    for row in range(R):
        for p in range(P):
            v = 0
            for s in range(S):
                v = ADD[v, MUL[coefs[row, s], M[p, s]]]
            if v != 0:
                continue
            if total[row] < cap:
                zidx[row, total[row]] = p
            total[row] += 1
            for i in range(m):
                g = 0
                for s in range(S):
                    g = ADD[g, MUL[coefs[row, s], D[p, s, i]]]
                if g != 0:
                    nonsing[row] += 1
                    break
    return total, nonsing, zidx


@njit(cache=True)
def _covered(tau, E, Y3, Y4, slice_start, d3, d4, NEG, ADD, MUL, mark, stamp):
    """True if some slice x2 = t of interior points hits every value of
    d1 + t*d2 with a non-singular zero, for this (d3, d4)."""
    q = NEG.shape[0]
    nd3 = NEG[d3]
    nd4 = NEG[d4]
    for t in range(slice_start.shape[0] - 1):
        stamp += 1
        cnt = 0
        for x in range(slice_start[t], slice_start[t + 1]):
            if E[x] == d4:
                continue  # possibly singular, skip
            s = ADD[tau[x], ADD[MUL[nd3, Y3[x]], MUL[nd4, Y4[x]]]]
            if mark[s] != stamp:
                mark[s] = stamp
                cnt += 1
                if cnt == q:
                    return True, stamp
    return False, stamp


@njit(cache=True)
def _slice_prime(tau, E, Y4, t, p, nd4, d4, V, pending, n_pending, ROT, ADD, MUL):
    """Settle pending d3 values using the interior slice x2 = t + 1.

    Prime fields only; interior points are ordered (1, t, u, w)
    lexicographically. For each u the values tau - d4*w form a bitmask;
    translating it by -d3*u is a rotation, so the slice covers d3 iff the
    union of the rotated masks is full. Masks are built on demand.
    """
    full = (1 << p) - 1
    b = p - 1
    base = t * b * b
    built = 0
    for d3 in range(p):
        if not pending[d3]:
            continue
        acc = 0
        for u in range(b):
            if u == built:
                m = 0
                for w in range(b):
                    x = base + u * b + w
                    if E[x] != d4:  # otherwise possibly singular
                        m |= 1 << ADD[tau[x], MUL[nd4, Y4[x]]]
                V[u] = m
                built += 1
            m = V[u]
            a = ROT[d3, u]
            acc |= ((m << a) | (m >> (p - a))) & full
            if acc == full:
                break
        if acc == full:
            pending[d3] = False
            n_pending -= 1
    return n_pending


@njit(cache=True)
def _sum_slices(dst, a, b, lo, hi, ADD):
    for x in range(lo, hi):
        dst[x] = ADD[a[x], b[x]]


@njit(cache=True)
def join_sweep(
    off, T, E, keypart, grp_start, grp_rows, pair_checks,
    rows_all, colmap, n_active,
    Y3, Y4, slice_start,
    M, D, Mloop, Dloop, Mres, neg_inv_res, Dres,
    NEG, ADD, MUL, prime, shard, nshard, limit, max_cand,
):
    """Join the four survivor arrays and sweep the d-slots of every candidate.

    Returns (survivor rows [r0, r1, r2, r3, d1, d2, d3, d4], candidates in the
    join, candidates swept by this shard, exact fallbacks run). With
    ``max_cand >= 0`` only join positions below it are visited.
    """
    q = NEG.shape[0]
    Pi = T.shape[1]
    out = np.empty((16, 8), dtype=np.int64)
    n_out = 0
    cand = 0
    swept = 0
    fallbacks = 0
    mark = np.zeros(q, dtype=np.int64)
    stamp = 0
    tau01 = np.empty(Pi, dtype=np.int64)
    e01 = np.empty(Pi, dtype=np.int64)
    tau012 = np.empty(Pi, dtype=np.int64)
    e012 = np.empty(Pi, dtype=np.int64)
    tau = np.empty(Pi, dtype=np.int64)
    e = np.empty(Pi, dtype=np.int64)
    rows = np.empty(4, dtype=np.int64)
    coefs = np.zeros(n_active, dtype=np.int64)
    dom = np.zeros((3, q), dtype=np.int64)
    for v in range(q):
        dom[2, v] = v
    domsize = np.array([1, 1, q], dtype=np.int64)
    res_allowed = np.ones(q, dtype=np.bool_)
    V = np.zeros(q, dtype=np.int64)
    pending = np.ones(q, dtype=np.bool_)
    n_slices = slice_start.shape[0] - 1
    # rotation amounts -d3*u for u = 1 .. q-1 (prime fields only)
    ROT = np.zeros((q, q), dtype=np.int64)
    if prime:
        for d3 in range(q):
            for u in range(q - 1):
                ROT[d3, u] = NEG[MUL[d3, u + 1]]
    R0 = off[1] - off[0]
    for r0 in range(R0):
        g0 = off[0] + r0
        c1 = keypart[g0, 1]
        for i1 in range(grp_start[1, c1], grp_start[1, c1 + 1]):
            r1 = grp_rows[i1]
            g1 = off[1] + r1
            v01 = 0
            c2 = keypart[g0, 2] + keypart[g1, 2]
            for i2 in range(grp_start[2, c2], grp_start[2, c2 + 1]):
                r2 = grp_rows[i2]
                g2 = off[2] + r2
                c3 = keypart[g0, 3] + keypart[g1, 3] + keypart[g2, 3]
                lo = grp_start[3, c3]
                hi = grp_start[3, c3 + 1]
                mine = False
                for k in range(hi - lo):
                    if (cand + k) % nshard == shard:
                        mine = True
                        break
                if max_cand >= 0 and cand >= max_cand:
                    return out[:n_out], cand, swept, fallbacks
                if not mine:
                    cand += hi - lo
                    continue
                v012 = 0
                for i3 in range(lo, hi):
                    r3 = grp_rows[i3]
                    idx = cand
                    if max_cand >= 0 and idx >= max_cand:
                        return out[:n_out], cand, swept, fallbacks
                    cand += 1
                    if idx % nshard != shard:
                        continue
                    swept += 1
                    g3 = off[3] + r3
                    rows[0] = g0
                    rows[1] = g1
                    rows[2] = g2
                    rows[3] = g3
                    # shared pair coefficients, checked on the raw rows
                    for c in range(pair_checks.shape[0]):
                        a = rows_all[rows[pair_checks[c, 0]], pair_checks[c, 1]]
                        b = rows_all[rows[pair_checks[c, 2]], pair_checks[c, 3]]
                        if a != b:
                            raise RuntimeError("join emitted an incompatible quadruple")
                    v = 0
                    have_base = False
                    for d4 in range(q):
                        if prime:
                            for d3 in range(q):
                                pending[d3] = True
                            n_pending = q
                            for t in range(n_slices):
                                if v <= t:
                                    # interior sums of the four rows, one slice at a time
                                    lo = slice_start[t]
                                    hi = slice_start[t + 1]
                                    if v01 <= t:
                                        _sum_slices(tau01, T[g0], T[g1], lo, hi, ADD)
                                        _sum_slices(e01, E[g0], E[g1], lo, hi, ADD)
                                        v01 += 1
                                    if v012 <= t:
                                        _sum_slices(tau012, tau01, T[g2], lo, hi, ADD)
                                        _sum_slices(e012, e01, E[g2], lo, hi, ADD)
                                        v012 += 1
                                    _sum_slices(tau, tau012, T[g3], lo, hi, ADD)
                                    _sum_slices(e, e012, E[g3], lo, hi, ADD)
                                    v += 1
                                n_pending = _slice_prime(tau, e, Y4, t, q, NEG[d4], d4, V, pending, n_pending, ROT, ADD, MUL)
                                if n_pending == 0:
                                    break
                            if n_pending == 0:
                                continue
                        else:
                            if v == 0:
                                _sum_slices(tau01, T[g0], T[g1], 0, Pi, ADD)
                                _sum_slices(e01, E[g0], E[g1], 0, Pi, ADD)
                                _sum_slices(tau012, tau01, T[g2], 0, Pi, ADD)
                                _sum_slices(e012, e01, E[g2], 0, Pi, ADD)
                                _sum_slices(tau, tau012, T[g3], 0, Pi, ADD)
                                _sum_slices(e, e012, E[g3], 0, Pi, ADD)
                                v = n_slices
                            for d3 in range(q):
                                ok, stamp = _covered(tau, e, Y3, Y4, slice_start, d3, d4, NEG, ADD, MUL, mark, stamp)
                                pending[d3] = not ok
                        for d3 in range(q):
                            if not pending[d3]:
                                continue
                            fallbacks += 1
                            if not have_base:
                                coefs[:] = 0
                                for k in range(4):
                                    for s in range(colmap.shape[1]):
                                        col = colmap[k, s]
                                        if col >= 0:
                                            coefs[col] = rows_all[rows[k], s]
                                bval, bgrad = accumulate(coefs, M, D, ADD, MUL)
                                have_base = True
                            dom[0, 0] = d4
                            dom[1, 0] = d3
                            found = scan_unit(
                                bval, bgrad, Mloop, Dloop, dom, domsize,
                                Mres, neg_inv_res, Dres, res_allowed, ADD, MUL,
                            )
                            for j in range(found.shape[0]):
                                if n_out == out.shape[0]:
                                    bigger = np.empty((2 * n_out, 8), dtype=np.int64)
                                    bigger[:n_out] = out
                                    out = bigger
                                out[n_out, 0] = r0
                                out[n_out, 1] = r1
                                out[n_out, 2] = r2
                                out[n_out, 3] = r3
                                # scan rows are (d4, d3, d2, d1)
                                out[n_out, 4] = found[j, 3]
                                out[n_out, 5] = found[j, 2]
                                out[n_out, 6] = found[j, 1]
                                out[n_out, 7] = found[j, 0]
                                n_out += 1
                            if limit >= 0 and n_out >= limit:
                                return out[:n_out], cand, swept, fallbacks
    return out[:n_out], cand, swept, fallbacks
