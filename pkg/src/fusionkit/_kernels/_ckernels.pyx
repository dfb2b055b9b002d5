# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: the cubic-family residual sweep and the N N^T search."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef inline double complex cconj(double complex z) nogil:
    return z.real - 1j * z.imag


def e10_residuals(A, eps, eta, add, neg, double inv_d, long g_lo, long g_hi):
    """Residuals for g in [g_lo, g_hi), shape (g_hi-g_lo, n, n, n, n) over (g, p, q, x, y)."""
    cdef double complex[:, :, ::1] Av = np.ascontiguousarray(A, dtype=np.complex128)
    cdef cnp.int64_t[:, ::1] ev = np.ascontiguousarray(eps, dtype=np.int64)
    cdef double complex[::1] etv = np.ascontiguousarray(eta, dtype=np.complex128)
    cdef cnp.int64_t[:, ::1] ad = np.ascontiguousarray(add, dtype=np.int64)
    cdef cnp.int64_t[::1] ng = np.ascontiguousarray(neg, dtype=np.int64)
    cdef long n = ad.shape[0]
    out_arr = np.empty((g_hi - g_lo, n, n, n, n), dtype=np.float64)
    cdef double[:, :, :, :, ::1] out = out_arr
    cdef long g, p, q, x, y, l, gmp, gmq, gmpx, px, qx, xy, gmqxy, qy, mx, my
    cdef double complex lhs, rhs, ph, eta_g, eta_gp, eta_gq
    cdef long sign
    with nogil:
        for g in range(g_lo, g_hi):
            eta_g = etv[g]
            for p in range(n):
                gmp = ad[g, ng[p]]
                eta_gp = etv[ad[g, p]]
                for q in range(n):
                    gmq = ad[g, ng[q]]
                    eta_gq = etv[ad[g, q]]
                    for x in range(n):
                        gmpx = ad[gmp, x]
                        mx = ng[x]
                        px = ad[p, x]
                        qx = ad[q, x]
                        for y in range(n):
                            xy = ad[x, y]
                            gmqxy = ad[gmq, xy]
                            my = ng[y]
                            lhs = 0
                            for l in range(n):
                                lhs = lhs + Av[g, xy, l] * Av[gmpx, mx, ad[l, p]] * Av[gmqxy, my, ad[l, q]]
                            qy = ad[q, y]
                            rhs = Av[g, px, ad[qx, y]] * Av[gmp, qy, ad[px, y]]
                            ph = (eta_g * etv[ad[g, qx]] * etv[ad[ad[g, p], qy]]
                                  * cconj(eta_gp * etv[ad[g, xy]] * etv[ad[g, ad[qx, y]]]))
                            sign = ev[p, gmpx] * ev[px, ad[gmp, qy]] * ev[q, gmqxy] * ev[qy, ad[gmq, x]]
                            rhs = rhs * ph * sign
                            if x == 0 and y == 0:
                                rhs = rhs - eta_g * eta_gp * eta_gq * inv_d
                            lhs = lhs - rhs
                            out[g - g_lo, p, q, x, y] = sqrt(lhs.real * lhs.real + lhs.imag * lhs.imag)
    return out_arr


# ---------------------------------------------------------------------------
# N N^T search

cdef struct Search:
    int n
    int max_cols
    long *R        # n*n residual
    int *cols      # max_cols * n chosen columns
    int ncols
    int *v         # scratch column per depth: (max_cols + 1) * n


cdef inline long isqrt_l(long a) nogil:
    cdef long r
    if a <= 0:
        return 0
    r = <long>sqrt(<double>a)
    while r * r > a:
        r -= 1
    while (r + 1) * (r + 1) <= a:
        r += 1
    return r


cdef bint residual_ok(Search *s, int *v) nogil:
    cdef int n = s.n
    cdef int i, j
    cdef long rij, rii
    for i in range(n):
        if v[i] == 0:
            continue
        rii = s.R[i * n + i]
        for j in range(n):
            rij = s.R[i * n + j]
            if rij != 0 and rij * rij > rii * s.R[j * n + j]:
                return False
    return True


cdef class _Collector:
    cdef list results

    def __init__(self):
        self.results = []


cdef void record(Search *s, _Collector out):
    cdef int c, i
    cols = []
    for c in range(s.ncols):
        cols.append(tuple([s.cols[c * s.n + i] for i in range(s.n)]))
    out.results.append(tuple(cols))


cdef void descend(Search *s, _Collector out, int *prev):
    cdef int n = s.n
    cdef int i, p = -1
    cdef bint tight
    for i in range(n):
        if s.R[i * n + i] > 0:
            p = i
            break
    if p < 0:
        for i in range(n * n):
            if s.R[i] != 0:
                return
        record(s, out)
        return
    if s.ncols >= s.max_cols:
        return
    tight = prev != NULL
    if tight:
        for i in range(p):
            if prev[i] != 0:
                tight = False
                break
    cdef int *v = s.v + s.ncols * n
    for i in range(n):
        v[i] = 0
    choose(s, out, v, p, p, tight, prev)


cdef void choose(Search *s, _Collector out, int *v, int i, int p, bint tight, int *prev):
    cdef int n = s.n
    cdef int j, a, b, val, lo
    cdef long hi, c
    cdef int *slot
    if i == n:
        for a in range(p, n):
            if v[a]:
                for b in range(p, n):
                    if v[b]:
                        s.R[a * n + b] -= v[a] * v[b]
        if residual_ok(s, v):
            slot = s.cols + s.ncols * n
            for a in range(n):
                slot[a] = v[a]
            s.ncols += 1
            descend(s, out, slot)
            s.ncols -= 1
        for a in range(p, n):
            if v[a]:
                for b in range(p, n):
                    if v[b]:
                        s.R[a * n + b] += v[a] * v[b]
        return
    hi = isqrt_l(s.R[i * n + i])
    for j in range(p, i):
        if v[j]:
            c = s.R[j * n + i] // v[j]
            if c < hi:
                hi = c
    if tight and prev[i] < hi:
        hi = prev[i]
    lo = 1 if i == p else 0
    val = <int>hi
    while val >= lo:
        v[i] = val
        choose(s, out, v, i + 1, p, tight and val == prev[i], prev)
        val -= 1
    v[i] = 0


def nnt_search(M, long max_cols):
    """All column multisets of nonneg integer N with N N^T = M (canonical, non-increasing lex)."""
    cdef cnp.int64_t[:, ::1] Mv = np.ascontiguousarray(M, dtype=np.int64)
    cdef int n = Mv.shape[0]
    cdef Search s
    cdef int i, j
    cdef long trace = 0
    for i in range(n):
        trace += Mv[i, i]
    if max_cols > trace:
        max_cols = trace
    if max_cols < 0:
        max_cols = 0
    s.n = n
    s.max_cols = <int>max_cols
    s.ncols = 0
    s.R = <long *>malloc(n * n * sizeof(long))
    s.cols = <int *>malloc((max_cols + 1) * n * sizeof(int) + sizeof(int))
    s.v = <int *>malloc((max_cols + 2) * n * sizeof(int) + sizeof(int))
    if s.R == NULL or s.cols == NULL or s.v == NULL:
        free(s.R); free(s.cols); free(s.v)
        raise MemoryError()
    out = _Collector()
    try:
        for i in range(n):
            for j in range(n):
                s.R[i * n + j] = Mv[i, j]
        descend(&s, out, NULL)
    finally:
        free(s.R)
        free(s.cols)
        free(s.v)
    return out.results
