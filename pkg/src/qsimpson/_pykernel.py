"""Pure-Python scenario kernel; reference for the compiled ``_ckernel``.

Both implementations perform the same scalar floating-point operations in
the same order (complex numbers split into re/im parts), so they return
bit-identical results. Keep them in sync.

Parameter layout for dimension ``n`` and ranks ``(rg, re, rr)``: three
measurement blocks of ``2 r (n - r)`` angles each, then ``2 (n - 1)`` angles
for the state. A block is a product of complex plane rotations mixing each
of the first ``r`` basis directions with each of the last ``n - r``; pairs
are (rotation angle, phase).
"""

from math import cos, inf, sin, sqrt

import numpy as np

BACKEND = "python"
# Scenarios whose conditioning events fall below this are infeasible.
FEASIBILITY_TOL = 1e-9
MAX_DIM = 16


def _check(n, ranks, x=None):
    if not 1 <= n <= MAX_DIM:
        raise ValueError(f"dimension must be in [1, {MAX_DIM}], got {n}")
    if len(ranks) != 3 or any(not 0 <= r <= n for r in ranks):
        raise ValueError(f"need three ranks in [0, {n}], got {ranks!r}")
    if x is not None and len(x) != n_params(n, ranks):
        raise ValueError("parameter vector has the wrong length")


def n_params(n, ranks):
    return sum(2 * r * (n - r) for r in ranks) + 2 * (n - 1)


def _frame(n, r, th, k):
    """First ``r`` columns of the rotation product, as (re, im) column lists."""
    ure = [[1.0 if row == col else 0.0 for row in range(n)] for col in range(n)]
    uim = [[0.0] * n for _ in range(n)]
    for i in range(r):
        for j in range(r, n):
            a = th[k]
            ph = th[k + 1]
            k += 2
            c = cos(a)
            s = sin(a)
            sr = s * cos(ph)
            si = s * sin(ph)
            xre, xim, yre, yim = ure[i], uim[i], ure[j], uim[j]
            for row in range(n):
                xr = xre[row]
                xi = xim[row]
                yr = yre[row]
                yi = yim[row]
                xre[row] = c * xr + (sr * yr - si * yi)
                xim[row] = c * xi + (sr * yi + si * yr)
                yre[row] = c * yr - (sr * xr + si * xi)
                yim[row] = c * yi - (sr * xi - si * xr)
    return ure[:r], uim[:r], k


def _project(qre, qim, vre, vim, n):
    """Q Q^dagger v for an orthonormal frame Q given by columns."""
    ore = [0.0] * n
    oim = [0.0] * n
    for cre, cim in zip(qre, qim):
        # coefficient <q|v>
        ar = 0.0
        ai = 0.0
        for row in range(n):
            ar = ar + (cre[row] * vre[row] + cim[row] * vim[row])
            ai = ai + (cre[row] * vim[row] - cim[row] * vre[row])
        for row in range(n):
            ore[row] = ore[row] + (cre[row] * ar - cim[row] * ai)
            oim[row] = oim[row] + (cre[row] * ai + cim[row] * ar)
    return ore, oim


def _sq(vre, vim, n):
    acc = 0.0
    for row in range(n):
        acc = acc + (vre[row] * vre[row] + vim[row] * vim[row])
    return acc


def _split(qre, qim, vre, vim, n):
    """(P v, v - P v)."""
    pre, pim = _project(qre, qim, vre, vim, n)
    return (pre, pim), ([vre[i] - pre[i] for i in range(n)], [vim[i] - pim[i] for i in range(n)])


def _decode_lists(x, n, ranks):
    k = 0
    frames = []
    for r in ranks:
        qre, qim, k = _frame(n, r, x, k)
        frames.append((qre, qim))
    sre, sim, k = _frame(n, 1, x, k)
    return frames, (sre[0], sim[0])


def _lengths(x, n, ranks):
    """[||phi||^2, 8 vertex values in (g, e, r) order, 4 edge values in (e, r) order]."""
    (g, e, r), (pre, pim) = _decode_lists(x, n, ranks)
    out = [_sq(pre, pim, n)]
    vert = []
    edge = []
    for vre, vim in _split(g[0], g[1], pre, pim, n):
        for wre, wim in _split(e[0], e[1], vre, vim, n):
            for zre, zim in _split(r[0], r[1], wre, wim, n):
                vert.append(_sq(zre, zim, n))
    for wre, wim in _split(e[0], e[1], pre, pim, n):
        for zre, zim in _split(r[0], r[1], wre, wim, n):
            edge.append(_sq(zre, zim, n))
    return out + vert + edge


def _s_from_lengths(L):
    """S, or None when a conditioning probability is below FEASIBILITY_TOL."""
    tot = L[0]
    dens = (
        L[1] + L[2],    # F,T
        L[3] + L[4],    # F,U
        L[5] + L[6],    # M,T
        L[7] + L[8],    # M,U
        L[9] + L[10],   # T
        L[11] + L[12],  # U
    )
    for d in dens:
        if d / tot < FEASIBILITY_TOL:
            return None
    rf_t = L[1] / dens[0]
    rf_c = L[3] / dens[1]
    rm_t = L[5] / dens[2]
    rm_c = L[7] / dens[3]
    r_t = L[9] / dens[4]
    r_c = L[11] / dens[5]
    return (rf_t + rm_t - r_t) - (rf_c + rm_c - r_c)


def decode(x, n, ranks):
    """Frames (n x r complex arrays) for the three measurements and the unit state."""
    _check(n, ranks, x)
    frames, (sre, sim) = _decode_lists([float(v) for v in x], n, ranks)
    qs = [_to_complex(qre, qim, (len(qre), n)).T for qre, qim in frames]
    return qs, _to_complex(sre, sim, (n,))


def _to_complex(re, im, shape):
    out = np.empty(shape, dtype=np.complex128)
    out.real = np.reshape(re, shape)
    out.imag = np.reshape(im, shape)
    return out


def lengths(x, n, ranks):
    _check(n, ranks, x)
    return np.array(_lengths([float(v) for v in x], n, ranks))


def objective(x, n, ranks):
    """S for the decoded scenario, NaN if infeasible."""
    _check(n, ranks, x)
    s = _s_from_lengths(_lengths([float(v) for v in x], n, ranks))
    return float("nan") if s is None else s


def search(x0, n, ranks, max_iters, step=0.5, xtol=1e-10, ftol=1e-14, callback=None):
    """Nelder-Mead maximization of |S| from ``x0``.

    Uses dimension-adaptive coefficients. Infeasible points score -inf.
    Returns ``(x_best, s_best, evaluations, iterations, max_abs_s_seen)``;
    ``s_best`` is the signed S at the best vertex (NaN if none was feasible).
    """
    _check(n, ranks, x0)
    N = len(x0)
    alpha = 1.0
    gamma = 1.0 + 2.0 / N
    rho = 0.75 - 1.0 / (2.0 * N)
    sigma = 1.0 - 1.0 / N
    state = {"evals": 0, "max_abs": 0.0}

    def f(x):
        state["evals"] += 1
        s = _s_from_lengths(_lengths(x, n, ranks))
        if callback is not None:
            callback(x, s)
        if s is None:
            return inf, 0.0
        a = abs(s)
        if a > state["max_abs"]:
            state["max_abs"] = a
        return -a, s

    pts = [[float(v) for v in x0]]
    for i in range(N):
        p = list(pts[0])
        p[i] = p[i] + step
        pts.append(p)
    vals = []
    sval = []
    for p in pts:
        fv, sv = f(p)
        vals.append(fv)
        sval.append(sv)
    order = _argsort(vals)

    it = 0
    while it < max_iters:
        b = order[0]
        w = order[N]
        if vals[w] - vals[b] <= ftol:
            spread = 0.0
            for v in order[1:]:
                for kk in range(N):
                    d = abs(pts[v][kk] - pts[b][kk])
                    if d > spread:
                        spread = d
            if spread <= xtol:
                break
        it += 1
        xw = pts[w]
        c = [0.0] * N
        for v in order[:N]:
            pv = pts[v]
            for kk in range(N):
                c[kk] = c[kk] + pv[kk]
        for kk in range(N):
            c[kk] = c[kk] / N
        xr = [c[kk] + alpha * (c[kk] - xw[kk]) for kk in range(N)]
        fr, sr = f(xr)
        if fr < vals[b]:
            xe = [c[kk] + gamma * (xr[kk] - c[kk]) for kk in range(N)]
            fe, se = f(xe)
            if fe < fr:
                _replace(pts, vals, sval, order, w, xe, fe, se)
            else:
                _replace(pts, vals, sval, order, w, xr, fr, sr)
        elif fr < vals[order[N - 1]]:
            _replace(pts, vals, sval, order, w, xr, fr, sr)
        else:
            if fr < vals[w]:
                xc = [c[kk] + rho * (xr[kk] - c[kk]) for kk in range(N)]
                fc, sc = f(xc)
                accept = fc <= fr
            else:
                xc = [c[kk] + rho * (xw[kk] - c[kk]) for kk in range(N)]
                fc, sc = f(xc)
                accept = fc < vals[w]
            if accept:
                _replace(pts, vals, sval, order, w, xc, fc, sc)
            else:
                xb = pts[b]
                for v in order[1:]:
                    pv = pts[v]
                    for kk in range(N):
                        pv[kk] = xb[kk] + sigma * (pv[kk] - xb[kk])
                    fv, sv = f(pv)
                    vals[v] = fv
                    sval[v] = sv
                order[:] = _argsort(vals)

    b = order[0]
    s_best = float("nan") if vals[b] == inf else sval[b]
    return np.array(pts[b]), s_best, state["evals"], it, state["max_abs"]


def _argsort(vals):
    """Stable insertion sort of indices by value."""
    order = []
    for i, v in enumerate(vals):
        pos = len(order)
        while pos > 0 and vals[order[pos - 1]] > v:
            pos -= 1
        order.insert(pos, i)
    return order


def _replace(pts, vals, sval, order, w, x, fx, sx):
    """Overwrite vertex ``w`` (the worst) and reinsert it in sorted position."""
    pts[w] = x
    vals[w] = fx
    sval[w] = sx
    order.pop()
    pos = len(order)
    while pos > 0 and vals[order[pos - 1]] > fx:
        pos -= 1
    order.insert(pos, w)
