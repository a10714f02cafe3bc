# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled scenario kernel.

Mirrors ``_pykernel`` operation for operation (same scalar arithmetic in
the same order) so both backends return bit-identical results. The module
must be compiled without -ffast-math and with FP contraction disabled.
"""

from libc.math cimport cos, sin, fabs, INFINITY
from libc.stdlib cimport malloc, free

import numpy as np

BACKEND = "compiled"
FEASIBILITY_TOL = 1e-9

cdef enum:
    MAXN = 16
cdef double FEAS = 1e-9


cdef struct Work:
    int n
    # frames, column-major with stride MAXN: q[m][col * MAXN + row]
    double qre[3][MAXN * MAXN]
    double qim[3][MAXN * MAXN]
    double sre[MAXN]
    double sim[MAXN]
    double ure[MAXN * MAXN]
    double uim[MAXN * MAXN]


def _check(int n, ranks):
    if not 1 <= n <= MAXN:
        raise ValueError(f"dimension must be in [1, {MAXN}], got {n}")
    if len(ranks) != 3 or any(not 0 <= r <= n for r in ranks):
        raise ValueError(f"need three ranks in [0, {n}], got {ranks!r}")


def n_params(int n, ranks):
    return sum(2 * r * (n - r) for r in ranks) + 2 * (n - 1)


cdef int _frame(Work* w, int r, const double* th, int k, double* qre, double* qim) noexcept nogil:
    cdef int n = w.n
    cdef int i, j, row, col
    cdef double a, ph, c, s, sr, si, xr, xi, yr, yi
    cdef double* ure = w.ure
    cdef double* uim = w.uim
    for col in range(n):
        for row in range(n):
            ure[col * MAXN + row] = 1.0 if row == col else 0.0
            uim[col * MAXN + row] = 0.0
    for i in range(r):
        for j in range(r, n):
            a = th[k]
            ph = th[k + 1]
            k += 2
            c = cos(a)
            s = sin(a)
            sr = s * cos(ph)
            si = s * sin(ph)
            for row in range(n):
                xr = ure[i * MAXN + row]
                xi = uim[i * MAXN + row]
                yr = ure[j * MAXN + row]
                yi = uim[j * MAXN + row]
                ure[i * MAXN + row] = c * xr + (sr * yr - si * yi)
                uim[i * MAXN + row] = c * xi + (sr * yi + si * yr)
                ure[j * MAXN + row] = c * yr - (sr * xr + si * xi)
                uim[j * MAXN + row] = c * yi - (sr * xi - si * xr)
    for col in range(r):
        for row in range(n):
            qre[col * MAXN + row] = ure[col * MAXN + row]
            qim[col * MAXN + row] = uim[col * MAXN + row]
    return k


cdef void _decode(Work* w, const double* x, int* ranks) noexcept nogil:
    cdef int k = 0
    cdef int m
    cdef double fre[MAXN * MAXN]
    cdef double fim[MAXN * MAXN]
    cdef int row
    for m in range(3):
        k = _frame(w, ranks[m], x, k, w.qre[m], w.qim[m])
    k = _frame(w, 1, x, k, fre, fim)
    for row in range(w.n):
        w.sre[row] = fre[row]
        w.sim[row] = fim[row]


cdef void _split(const double* qre, const double* qim, int r, int n,
                 const double* vre, const double* vim,
                 double* pre, double* pim, double* cre, double* cim) noexcept nogil:
    """pre/pim = Q Q^dagger v, cre/cim = v - Q Q^dagger v."""
    cdef int col, row
    cdef double ar, ai
    for row in range(n):
        pre[row] = 0.0
        pim[row] = 0.0
    for col in range(r):
        ar = 0.0
        ai = 0.0
        for row in range(n):
            ar = ar + (qre[col * MAXN + row] * vre[row] + qim[col * MAXN + row] * vim[row])
            ai = ai + (qre[col * MAXN + row] * vim[row] - qim[col * MAXN + row] * vre[row])
        for row in range(n):
            pre[row] = pre[row] + (qre[col * MAXN + row] * ar - qim[col * MAXN + row] * ai)
            pim[row] = pim[row] + (qre[col * MAXN + row] * ai + qim[col * MAXN + row] * ar)
    for row in range(n):
        cre[row] = vre[row] - pre[row]
        cim[row] = vim[row] - pim[row]


cdef double _sq(const double* vre, const double* vim, int n) noexcept nogil:
    cdef double acc = 0.0
    cdef int row
    for row in range(n):
        acc = acc + (vre[row] * vre[row] + vim[row] * vim[row])
    return acc


cdef void _lengths(Work* w, const double* x, int* ranks, double* out) noexcept nogil:
    cdef int n = w.n
    cdef double gre[2][MAXN]
    cdef double gim[2][MAXN]
    cdef double ere[2][MAXN]
    cdef double eim[2][MAXN]
    cdef double zre[2][MAXN]
    cdef double zim[2][MAXN]
    cdef int g, e, r, idx
    _decode(w, x, ranks)
    out[0] = _sq(w.sre, w.sim, n)
    idx = 1
    _split(w.qre[0], w.qim[0], ranks[0], n, w.sre, w.sim, gre[0], gim[0], gre[1], gim[1])
    for g in range(2):
        _split(w.qre[1], w.qim[1], ranks[1], n, gre[g], gim[g], ere[0], eim[0], ere[1], eim[1])
        for e in range(2):
            _split(w.qre[2], w.qim[2], ranks[2], n, ere[e], eim[e], zre[0], zim[0], zre[1], zim[1])
            for r in range(2):
                out[idx] = _sq(zre[r], zim[r], n)
                idx += 1
    _split(w.qre[1], w.qim[1], ranks[1], n, w.sre, w.sim, ere[0], eim[0], ere[1], eim[1])
    for e in range(2):
        _split(w.qre[2], w.qim[2], ranks[2], n, ere[e], eim[e], zre[0], zim[0], zre[1], zim[1])
        for r in range(2):
            out[idx] = _sq(zre[r], zim[r], n)
            idx += 1


cdef bint _s_from_lengths(const double* L, double* s_out) noexcept nogil:
    cdef double tot = L[0]
    cdef double dens[6]
    cdef int i
    dens[0] = L[1] + L[2]
    dens[1] = L[3] + L[4]
    dens[2] = L[5] + L[6]
    dens[3] = L[7] + L[8]
    dens[4] = L[9] + L[10]
    dens[5] = L[11] + L[12]
    for i in range(6):
        if dens[i] / tot < FEAS:
            return False
    cdef double rf_t = L[1] / dens[0]
    cdef double rf_c = L[3] / dens[1]
    cdef double rm_t = L[5] / dens[2]
    cdef double rm_c = L[7] / dens[3]
    cdef double r_t = L[9] / dens[4]
    cdef double r_c = L[11] / dens[5]
    s_out[0] = (rf_t + rm_t - r_t) - (rf_c + rm_c - r_c)
    return True


cdef struct Eval:
    Work* w
    int* ranks
    long evals
    double max_abs


cdef double _f(Eval* ev, const double* x, double* s_out) noexcept nogil:
    cdef double L[13]
    cdef double s, a
    ev.evals += 1
    _lengths(ev.w, x, ev.ranks, L)
    if not _s_from_lengths(L, &s):
        s_out[0] = 0.0
        return INFINITY
    a = fabs(s)
    if a > ev.max_abs:
        ev.max_abs = a
    s_out[0] = s
    return -a


cdef void _argsort(const double* vals, int m, int* order) noexcept nogil:
    cdef int i, pos, cnt = 0
    cdef double v
    for i in range(m):
        v = vals[i]
        pos = cnt
        while pos > 0 and vals[order[pos - 1]] > v:
            order[pos] = order[pos - 1]
            pos -= 1
        order[pos] = i
        cnt += 1


cdef void _replace(double* pts, double* vals, double* sval, int* order, int N,
                   int w, const double* x, double fx, double sx) noexcept nogil:
    cdef int kk, pos
    for kk in range(N):
        pts[w * N + kk] = x[kk]
    vals[w] = fx
    sval[w] = sx
    # drop the last entry (w) and reinsert
    pos = N
    while pos > 0 and vals[order[pos - 1]] > fx:
        order[pos] = order[pos - 1]
        pos -= 1
    order[pos] = w


cdef int _search(Eval* ev, double* pts, int N, long max_iters, double step,
                 double xtol, double ftol, double* vals, double* sval, int* order,
                 double* c, double* xr, double* xe, double* xc, long* iters) noexcept nogil:
    cdef double alpha = 1.0
    cdef double gamma = 1.0 + 2.0 / N
    cdef double rho = 0.75 - 1.0 / (2.0 * N)
    cdef double sigma = 1.0 - 1.0 / N
    cdef int i, kk, v, b, wv, oi
    cdef long it = 0
    cdef double fr, sr, fe, se, fc, sc, spread, d
    cdef bint accept
    for i in range(1, N + 1):
        for kk in range(N):
            pts[i * N + kk] = pts[kk]
        pts[i * N + (i - 1)] = pts[i * N + (i - 1)] + step
    for i in range(N + 1):
        vals[i] = _f(ev, &pts[i * N], &sval[i])
    _argsort(vals, N + 1, order)

    while it < max_iters:
        b = order[0]
        wv = order[N]
        if vals[wv] - vals[b] <= ftol:
            spread = 0.0
            for oi in range(1, N + 1):
                v = order[oi]
                for kk in range(N):
                    d = fabs(pts[v * N + kk] - pts[b * N + kk])
                    if d > spread:
                        spread = d
            if spread <= xtol:
                break
        it += 1
        for kk in range(N):
            c[kk] = 0.0
        for oi in range(N):
            v = order[oi]
            for kk in range(N):
                c[kk] = c[kk] + pts[v * N + kk]
        for kk in range(N):
            c[kk] = c[kk] / N
        for kk in range(N):
            xr[kk] = c[kk] + alpha * (c[kk] - pts[wv * N + kk])
        fr = _f(ev, xr, &sr)
        if fr < vals[b]:
            for kk in range(N):
                xe[kk] = c[kk] + gamma * (xr[kk] - c[kk])
            fe = _f(ev, xe, &se)
            if fe < fr:
                _replace(pts, vals, sval, order, N, wv, xe, fe, se)
            else:
                _replace(pts, vals, sval, order, N, wv, xr, fr, sr)
        elif fr < vals[order[N - 1]]:
            _replace(pts, vals, sval, order, N, wv, xr, fr, sr)
        else:
            if fr < vals[wv]:
                for kk in range(N):
                    xc[kk] = c[kk] + rho * (xr[kk] - c[kk])
                fc = _f(ev, xc, &sc)
                accept = fc <= fr
            else:
                for kk in range(N):
                    xc[kk] = c[kk] + rho * (pts[wv * N + kk] - c[kk])
                fc = _f(ev, xc, &sc)
                accept = fc < vals[wv]
            if accept:
                _replace(pts, vals, sval, order, N, wv, xc, fc, sc)
            else:
                for oi in range(1, N + 1):
                    v = order[oi]
                    for kk in range(N):
                        pts[v * N + kk] = pts[b * N + kk] + sigma * (pts[v * N + kk] - pts[b * N + kk])
                    vals[v] = _f(ev, &pts[v * N], &sval[v])
                _argsort(vals, N + 1, order)
    iters[0] = it
    return order[0]


cdef void _as_ranks(ranks, int* out) except *:
    for m in range(3):
        out[m] = ranks[m]


def decode(x, int n, ranks):
    """Frames (n x r complex arrays) for the three measurements and the unit state."""
    _check(n, ranks)
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    if xv.shape[0] != n_params(n, ranks):
        raise ValueError("parameter vector has the wrong length")
    cdef Work w
    cdef int rk[3]
    _as_ranks(ranks, rk)
    w.n = n
    _decode(&w, &xv[0], rk)
    frames = []
    for m in range(3):
        q = np.empty((n, rk[m]), dtype=np.complex128)
        for col in range(rk[m]):
            for row in range(n):
                q[row, col] = complex(w.qre[m][col * MAXN + row], w.qim[m][col * MAXN + row])
        frames.append(q)
    psi = np.array([complex(w.sre[row], w.sim[row]) for row in range(n)])
    return frames, psi


def lengths(x, int n, ranks):
    """[||phi||^2, 8 vertex values in (g, e, r) order, 4 edge values in (e, r) order]."""
    _check(n, ranks)
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    if xv.shape[0] != n_params(n, ranks):
        raise ValueError("parameter vector has the wrong length")
    cdef Work w
    cdef int rk[3]
    out = np.empty(13)
    cdef double[::1] ov = out
    _as_ranks(ranks, rk)
    w.n = n
    _lengths(&w, &xv[0], rk, &ov[0])
    return out


def objective(x, int n, ranks):
    """S for the decoded scenario, NaN if infeasible."""
    cdef double s
    L = lengths(x, n, ranks)
    cdef double[::1] lv = L
    if not _s_from_lengths(&lv[0], &s):
        return float("nan")
    return s


def search(x0, int n, ranks, long max_iters, double step=0.5, double xtol=1e-10,
           double ftol=1e-14, callback=None):
    """Nelder-Mead maximization of |S| from ``x0``; see ``_pykernel.search``."""
    if callback is not None:
        raise ValueError("per-evaluation callbacks need the pure-Python backend")
    _check(n, ranks)
    cdef double[::1] xv = np.ascontiguousarray(x0, dtype=np.float64)
    cdef int N = xv.shape[0]
    if N != n_params(n, ranks) or N < 1:
        raise ValueError("parameter vector has the wrong length")
    cdef Work w
    cdef Eval ev
    cdef int rk[3]
    cdef long iters = 0
    cdef int best
    _as_ranks(ranks, rk)
    w.n = n
    ev.w = &w
    ev.ranks = rk
    ev.evals = 0
    ev.max_abs = 0.0
    cdef double* pts = <double*> malloc((N + 1) * N * sizeof(double))
    cdef double* vals = <double*> malloc((N + 1) * sizeof(double))
    cdef double* sval = <double*> malloc((N + 1) * sizeof(double))
    cdef int* order = <int*> malloc((N + 1) * sizeof(int))
    cdef double* buf = <double*> malloc(4 * N * sizeof(double))
    if not (pts and vals and sval and order and buf):
        free(pts); free(vals); free(sval); free(order); free(buf)
        raise MemoryError()
    try:
        for i in range(N):
            pts[i] = xv[i]
        with nogil:
            best = _search(&ev, pts, N, max_iters, step, xtol, ftol, vals, sval, order,
                           buf, buf + N, buf + 2 * N, buf + 3 * N, &iters)
        x_best = np.array([pts[best * N + i] for i in range(N)])
        s_best = float("nan") if vals[best] == INFINITY else sval[best]
        return x_best, s_best, int(ev.evals), int(iters), float(ev.max_abs)
    finally:
        free(pts); free(vals); free(sval); free(order); free(buf)
