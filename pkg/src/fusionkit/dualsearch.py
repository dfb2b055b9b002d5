"""Dual fusion graphs from a fusion module.

For a basis element kappa of a module over a ring with basis xi, the Gram
matrix M_ij = sum_xi (kappa xi, kappa)(mu_i xi, mu_j) must factor as N N^T
with N_ij = (mu_i, eta_j kappa) for the basis eta of the dual ring.  Every
nonnegative integer factorization is a candidate fusion graph for kappa.
"""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .fusionmodule import FusionModule, module_dims
from .fusionring import RingStructureError, data_path, resolve_label
from .numeric import QuadInt, qi_sqrt


class MatrixError(ValueError):
    pass


def gram_matrix(module: FusionModule, kappa) -> np.ndarray:
    k = module.index(kappa)
    weights = module.act[:, k, k]
    return np.einsum("x,xab->ab", weights, module.act)


def _check_input(M) -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise MatrixError("matrix must be square")
    if not np.all(M == np.round(M)):
        raise MatrixError("matrix must have integer entries")
    M = M.astype(np.int64)
    if not np.array_equal(M, M.T):
        raise MatrixError("matrix must be symmetric")
    if (M < 0).any():
        raise MatrixError("matrix must be nonnegative")
    return M


def _first_columns(M: np.ndarray) -> list[tuple[int, ...]]:
    """Candidates for the lexicographically largest column, used to split work."""
    n = M.shape[0]
    p = next((i for i in range(n) if M[i, i] > 0), None)
    if p is None:
        return []
    out = []
    v = [0] * n

    def rec(i):
        if i == n:
            out.append(tuple(v))
            return
        hi = int(np.sqrt(M[i, i]) + 1e-9)
        for j in range(p, i):
            if v[j]:
                hi = min(hi, int(M[j, i]) // v[j])
        lo = 1 if i == p else 0
        for val in range(hi, lo - 1, -1):
            v[i] = val
            rec(i + 1)
        v[i] = 0

    rec(p)
    return out


def _search_below(args):
    """Factorizations whose first column is exactly ``first``."""
    M, first, max_cols, backend_name = args
    kern = _kernels.backend(backend_name)
    v = np.array(first, dtype=np.int64)
    R = M - np.outer(v, v)
    if (R < 0).any():
        return []
    # remaining columns must be <= first in lex order; search R and filter
    out = []
    for cols in kern.nnt_search(R, max_cols - 1):
        if not cols or cols[0] <= tuple(first):
            out.append((tuple(first),) + cols)
    return out


def nnt_factorizations(M, max_cols: int | None = None, jobs: int = 1,
                       backend: str | None = None) -> list[np.ndarray]:
    """All N >= 0 (integer, no zero columns) with N N^T = M, one per column multiset.

    Columns of each N are in non-increasing lexicographic order and the list
    is in decreasing lexicographic order of the column sequences.
    """
    M = _check_input(M)
    trace = int(np.trace(M))
    if max_cols is None:
        max_cols = trace
    max_cols = min(int(max_cols), trace)
    n = M.shape[0]
    if trace == 0:
        # no columns at all, so only the zero matrix factors
        return [] if M.any() else [np.zeros((n, 0), dtype=np.int64)]
    name = backend or _kernels.BACKEND
    if jobs and jobs > 1:
        firsts = _first_columns(M)
        tasks = [(M, f, max_cols, name) for f in firsts]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_search_below, tasks))
        raw = [c for part in parts for c in part]
    else:
        raw = _kernels.backend(name).nnt_search(M, max_cols)
    raw = sorted(set(raw), reverse=True)
    return [np.array(cols, dtype=np.int64).T.reshape(n, len(cols)) for cols in raw]


def canonical_columns(N) -> np.ndarray:
    """Sort columns into non-increasing lexicographic order."""
    N = np.asarray(N)
    cols = sorted((tuple(int(x) for x in c) for c in N.T), reverse=True)
    if not cols:
        return np.zeros((N.shape[0], 0), dtype=np.int64)
    return np.array(cols, dtype=np.int64).T


# ---------------------------------------------------------------------------
# dimension filter


@dataclass
class Candidate:
    N: np.ndarray
    dims: np.ndarray
    exact: tuple[QuadInt, ...] | None

    def has_unit(self, tol: float = 1e-8) -> bool:
        if self.exact is not None:
            return any(x == 1 for x in self.exact)
        return bool(np.any(np.abs(self.dims - 1.0) < tol))


@dataclass
class DualDimensionClass:
    dims: tuple[float, ...]
    exact: tuple[QuadInt, ...] | None
    witnesses: dict[str, list[int]] = field(default_factory=dict)

    def describe(self) -> str:
        if self.exact is not None:
            return "{" + ", ".join(str(x) for x in self.exact) + "}"
        return "{" + ", ".join(f"{x:.10g}" for x in self.dims) + "}"


@dataclass
class DualFilterResult:
    module: str
    candidates: dict[str, list[Candidate]]
    survivors: dict[str, list[int]]
    classes: list[DualDimensionClass]


def _candidate_dims(N: np.ndarray, k: int, dims, ends) -> Candidate:
    weights = dims.values
    fl = (N.T @ weights) / weights[k]
    exact = None
    end_k = ends[k]
    if isinstance(end_k, QuadInt):
        # d(mu_i)/d(kappa) = sqrt(end_i end_k) / end_k when that root is in the ring
        roots = [qi_sqrt(e * end_k) for e in ends]
        if all(r is not None for r in roots):
            vals = []
            for col in N.T:
                tot = QuadInt(0, 0)
                for c, r in zip(col, roots):
                    if c:
                        tot = tot + int(c) * r
                q = tot.exact_div(end_k)
                if q is None:
                    vals = None
                    break
                vals.append(q)
            if vals is not None:
                exact = tuple(vals)
    return Candidate(N, fl, exact)


def _same_multiset(a: Candidate, b: Candidate, tol: float) -> bool:
    if a.N.shape[1] != b.N.shape[1]:
        return False
    if a.exact is not None and b.exact is not None:
        return sorted(a.exact) == sorted(b.exact)
    x, y = np.sort(a.dims), np.sort(b.dims)
    return bool(np.all(np.abs(x - y) <= tol * np.maximum(1.0, np.abs(x))))


def dual_dims_filter(module: FusionModule, kappas=None, tol: float = 1e-8,
                     jobs: int = 1, factorizations: dict | None = None) -> DualFilterResult:
    """Dual dimension vectors that (a) contain a unit and (b) are realised by every kappa."""
    dims = module_dims(module)
    ends = dims.end_dims
    idx = list(range(module.size)) if kappas is None else [module.index(k) for k in kappas]
    cands: dict[str, list[Candidate]] = {}
    survivors: dict[str, list[int]] = {}
    for k in idx:
        label = module.labels[k]
        if factorizations is not None and label in factorizations:
            Ns = factorizations[label]
        else:
            Ns = nnt_factorizations(gram_matrix(module, k), jobs=jobs)
        cs = [_candidate_dims(N, k, dims, ends) for N in Ns]
        cands[label] = cs
        survivors[label] = [i for i, c in enumerate(cs) if c.has_unit(tol)]

    classes: list[DualDimensionClass] = []
    if not idx:
        return DualFilterResult(module.name, cands, survivors, classes)
    base = module.labels[idx[0]]
    for i in survivors[base]:
        c = cands[base][i]
        if any(_same_multiset(c, cands[base][w[base][0]], tol)
               for w in [cl.witnesses for cl in classes]):
            continue
        witnesses = {}
        for k in idx:
            label = module.labels[k]
            hits = [j for j in survivors[label] if _same_multiset(c, cands[label][j], tol)]
            if not hits:
                witnesses = None
                break
            witnesses[label] = hits
        if witnesses is None:
            continue
        exact = tuple(sorted(c.exact)) if c.exact is not None else None
        classes.append(DualDimensionClass(tuple(float(x) for x in np.sort(c.dims)), exact, witnesses))
    # reduce survivor lists to the candidates that take part in a consistent class
    final = {module.labels[k]: sorted({j for cl in classes for j in cl.witnesses[module.labels[k]]})
             for k in idx}
    return DualFilterResult(module.name, cands, final, classes)


# ---------------------------------------------------------------------------
# graph pairs


@dataclass
class BigraphPair:
    """Two bipartite graphs sharing the odd vertices, each with an involution on its even vertices."""

    odd: tuple[str, ...]
    upper: tuple[str, ...]
    lower: tuple[str, ...]
    upper_adj: np.ndarray  # upper even x odd
    lower_adj: np.ndarray  # lower even x odd
    upper_dual: tuple[int, ...]
    lower_dual: tuple[int, ...]
    name: str = ""

    def __post_init__(self):
        self.upper_adj = np.asarray(self.upper_adj, dtype=np.int64)
        self.lower_adj = np.asarray(self.lower_adj, dtype=np.int64)
        for adj, even, dual, side in ((self.upper_adj, self.upper, self.upper_dual, "upper"),
                                      (self.lower_adj, self.lower, self.lower_dual, "lower")):
            if adj.shape != (len(even), len(self.odd)):
                raise RingStructureError(f"{side} adjacency has shape {adj.shape}")
            if sorted(dual) != list(range(len(even))):
                raise RingStructureError(f"{side} duality is not a permutation")
            if any(dual[dual[i]] != i for i in range(len(even))):
                raise RingStructureError(f"{side} duality is not an involution")


@dataclass
class PairMismatch:
    i: str
    j: str
    upper: int
    lower: int


def path_counts(adj: np.ndarray, dual) -> np.ndarray:
    """P[i, j] = number of paths odd_i -> v -> dual(v) -> odd_j."""
    perm = np.zeros((len(dual), len(dual)), dtype=np.int64)
    perm[np.arange(len(dual)), list(dual)] = 1
    return adj.T @ perm @ adj


def check_graph_pair_duality(pair: BigraphPair) -> list[PairMismatch]:
    up = path_counts(pair.upper_adj, pair.upper_dual)
    lo = path_counts(pair.lower_adj, pair.lower_dual)
    out = []
    for i, j in zip(*np.nonzero(up != lo)):
        out.append(PairMismatch(pair.odd[i], pair.odd[j], int(up[i, j]), int(lo[i, j])))
    return out


def pair_from_json(data: dict) -> BigraphPair:
    odd = data["odd"]

    def side(key):
        s = data[key]
        even = s["vertices"]
        adj = np.zeros((len(even), len(odd)), dtype=np.int64)
        for a, b in s["edges"]:
            adj[resolve_label(even, a), resolve_label(odd, b)] += 1
        dual = list(range(len(even)))
        for a, b in s.get("dual_pairs", []):
            ia, ib = resolve_label(even, a), resolve_label(even, b)
            dual[ia], dual[ib] = ib, ia
        return even, adj, dual

    ue, ua, ud = side("upper")
    le, la, ld = side("lower")
    return BigraphPair(tuple(odd), tuple(ue), tuple(le), ua, la, tuple(ud), tuple(ld),
                       name=data.get("name", ""))


def load_pair(path) -> BigraphPair:
    with open(path, encoding="utf-8") as fh:
        return pair_from_json(json.load(fh))


def builtin_pair(name: str = "theta1_42") -> BigraphPair:
    return load_pair(data_path("graphs", f"{name}.json"))
