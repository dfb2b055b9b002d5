"""Pure-Python kernels.  Same contracts as the compiled module.

``e10_residuals_generic`` only uses +, *, conjugate() and abs() on its
scalars, so it also serves the extended-precision path with mpmath numbers.
"""
from __future__ import annotations

import math
import sys

import numpy as np


def e10_residuals_generic(A, eps, eta, add, neg, inv_d, g_lo, g_hi):
    """Residuals of the cubic family for g in [g_lo, g_hi).

    Returned flat, ordered by (g, p, q, x, y) with y fastest.
    A[g][h][k], eps[h][g] in {+1, -1}, eta[g], add[i][j], neg[i] are nested lists.
    """
    n = len(add)
    out = []
    rng = range(n)
    for g in range(g_lo, g_hi):
        Ag = A[g]
        eta_g = eta[g]
        for p in rng:
            gmp = add[g][neg[p]]
            eta_gp = eta[add[g][p]]
            for q in rng:
                gmq = add[g][neg[q]]
                eta_gq = eta[add[g][q]]
                for x in rng:
                    gmpx = add[gmp][x]
                    A1 = A[gmpx][neg[x]]
                    px = add[p][x]
                    qx = add[q][x]
                    for y in rng:
                        xy = add[x][y]
                        gmqxy = add[gmq][xy]
                        A0 = Ag[xy]
                        A2 = A[gmqxy][neg[y]]
                        lhs = 0
                        for l in rng:
                            lhs = lhs + A0[l] * A1[add[l][p]] * A2[add[l][q]]
                        qy = add[q][y]
                        rhs = Ag[px][add[qx][y]] * A[gmp][qy][add[px][y]]
                        ph = (eta_g * eta[add[g][qx]] * eta[add[add[g][p]][qy]]
                              * (eta_gp * eta[add[g][xy]] * eta[add[g][add[qx][y]]]).conjugate())
                        sign = (eps[p][gmpx] * eps[px][add[gmp][qy]]
                                * eps[q][gmqxy] * eps[qy][add[gmq][x]])
                        rhs = rhs * ph * sign
                        if x == 0 and y == 0:
                            rhs = rhs - eta_g * eta_gp * eta_gq * inv_d
                        out.append(abs(lhs - rhs))
    return out


def e10_residuals(A, eps, eta, add, neg, inv_d, g_lo, g_hi):
    """Double-precision entry point with the compiled kernel's signature."""
    res = e10_residuals_generic(
        np.asarray(A, dtype=complex).tolist(),
        np.asarray(eps).tolist(),
        np.asarray(eta, dtype=complex).tolist(),
        np.asarray(add).tolist(),
        np.asarray(neg).tolist(),
        float(inv_d), int(g_lo), int(g_hi),
    )
    n = len(add)
    return np.array(res, dtype=float).reshape(g_hi - g_lo, n, n, n, n)


def nnt_search(M, max_cols):
    """All multisets of nonzero columns v (nonneg integer) with sum v v^T = M.

    Columns come out in non-increasing lexicographic order, so each multiset
    appears once.  Returns a list of tuples of column tuples.
    """
    R = [[int(x) for x in row] for row in np.asarray(M).tolist()]
    n = len(R)
    results = []
    cols = []
    isqrt = math.isqrt

    def residual_ok(support):
        # Cauchy-Schwarz on the residual Gram matrix, only rows we touched
        for i in support:
            Ri = R[i]
            rii = Ri[i]
            for j in range(n):
                rij = Ri[j]
                if rij and rij * rij > rii * R[j][j]:
                    return False
        return True

    def descend(prev):
        p = -1
        for i in range(n):
            if R[i][i] > 0:
                p = i
                break
        if p < 0:
            for row in R:
                if any(row):
                    return
            results.append(tuple(cols))
            return
        if len(cols) >= max_cols:
            return
        tight0 = prev is not None
        if tight0:
            for i in range(p):
                if prev[i] != 0:
                    tight0 = False
                    break
        choose([0] * n, p, p, tight0, prev)

    def choose(v, i, p, tight, prev):
        if i == n:
            support = [j for j in range(p, n) if v[j]]
            for a in support:
                va = v[a]
                Ra = R[a]
                for b in support:
                    Ra[b] -= va * v[b]
            if residual_ok(support):
                cols.append(tuple(v))
                descend(tuple(v))
                cols.pop()
            for a in support:
                va = v[a]
                Ra = R[a]
                for b in support:
                    Ra[b] += va * v[b]
            return
        hi = isqrt(R[i][i])
        for j in range(p, i):
            if v[j]:
                c = R[j][i] // v[j]
                if c < hi:
                    hi = c
        if tight and prev[i] < hi:
            hi = prev[i]
        lo = 1 if i == p else 0
        for val in range(hi, lo - 1, -1):
            v[i] = val
            choose(v, i + 1, p, tight and val == prev[i], prev)
        v[i] = 0

    limit = sys.getrecursionlimit()
    need = (int(sum(R[i][i] for i in range(n))) + 2) * (n + 3) + 200
    if need > limit:
        sys.setrecursionlimit(need)
    try:
        descend(None)
    finally:
        sys.setrecursionlimit(limit)
    return results
