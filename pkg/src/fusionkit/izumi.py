"""Generalized Haagerup structure equations for an abelian group G.

A solution is a triple (A, eps, eta): complex numbers A_g(h, k), signs
eps_h(g) and cube roots of unity eta_g.  This module builds the closed-form
solution for G = Z4 x Z2 from its closed-form matrices and evaluates every
equation family instance by instance.
"""
from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import _kernels
from .fusionring import data_path
from .groups import FiniteAbelianGroup, parse_element
from .numeric import D, DOUBLE, Precision, evaluate, resolve_precision

FAMILIES = ("e1", "e2", "e3", "e4", "e5", "e6", "e8", "e9", "e10", "e14")
OPTIONAL_FAMILIES = ("eq14", "eq15")
ALL_FAMILIES = FAMILIES + OPTIONAL_FAMILIES

# free variables of each family, one tuple per displayed form
FORMS = {
    "e1": (("h", "k", "g"), ("h",)),
    "e2": (("g", "h"), ("g",)),
    "e3": (("g",),),
    "e4": (("g", "g'", "k"),),
    "e5": (("g", "h", "p", "q"),),
    "e6": (("g", "h", "k"),),
    "e8": (("g", "h", "k"), ("g", "h", "k")),
    "e9": (("g", "h", "k"), ("g", "h", "k")),
    "e10": (("g", "p", "q", "x", "y"),),
    "e14": (("g", "h"),),
    "eq14": (("g", "h", "k"),),
    "eq15": (("g", "h", "k", "l"),),
}


class SolutionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# solution data


@dataclass
class GHSolution:
    """A[g][h][k] = A_g(h, k); eps[h, g] = eps_h(g); eta[g] = omega ** eta_exp[g]."""

    group: FiniteAbelianGroup
    eps: np.ndarray
    eta_exp: tuple[int, ...]
    A: list
    precision: Precision = DOUBLE
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.group.order
        self.eps = np.asarray(self.eps, dtype=np.int64)
        if self.eps.shape != (n, n) or not np.all(np.abs(self.eps) == 1):
            raise SolutionError("eps must be an n x n table of +-1")
        self.eta_exp = tuple(int(e) % 3 for e in self.eta_exp)
        if len(self.eta_exp) != n:
            raise SolutionError("eta needs one entry per group element")
        if len(self.A) != n or any(len(r) != n or any(len(c) != n for c in r) for r in self.A):
            raise SolutionError("A must be an n x n x n table")
        to_c = complex if self.precision.is_double else self.precision.mp.mpc
        self.A = [[[to_c(z) for z in row] for row in mat] for mat in self.A]

    @property
    def n(self) -> int:
        return self.group.order

    @property
    def d(self):
        return self.precision.real(D)

    @property
    def eta(self) -> list:
        prec = self.precision
        w = [prec.complex(1), prec.expi(2 * prec.pi / 3), prec.expi(4 * prec.pi / 3)]
        return [w[e] for e in self.eta_exp]

    def A_array(self) -> np.ndarray:
        return np.array([[[complex(z) for z in row] for row in mat] for mat in self.A])

    def copy(self) -> GHSolution:
        A = [[list(row) for row in mat] for mat in self.A]
        return GHSolution(self.group, self.eps.copy(), self.eta_exp, A, self.precision, dict(self.meta))


# ---------------------------------------------------------------------------
# eps and A extension


def extend_epsilon(group: FiniteAbelianGroup, generators: dict[int, list[int]]) -> np.ndarray:
    """eps_h for all h from generator rows via eps_{k+s}(g) = eps_k(g) eps_s(g + 2k).

    Every edge k -> k+s is walked, so a generator set whose chains disagree
    raises an error naming the clash.
    """
    n = group.order
    eps = np.zeros((n, n), dtype=np.int64)
    eps[0] = 1
    known = {0}
    queue = [0]
    gens = list(generators.items())
    for s, row in gens:
        if len(row) != n or any(v not in (1, -1) for v in row):
            raise SolutionError(f"generator row for {group.labels[s]} must be {n} signs")
    while queue:
        k = queue.pop(0)
        for s, row in gens:
            t = group.add(k, s)
            vals = [int(eps[k, g]) * int(row[group.add(g, group.double(k))]) for g in range(n)]
            if t in known:
                for g in range(n):
                    if eps[t, g] != vals[g]:
                        raise SolutionError(
                            f"eps chain is inconsistent: k={group.labels[k]}, s={group.labels[s]}, "
                            f"g={group.labels[g]}")
                continue
            eps[t] = vals
            known.add(t)
            queue.append(t)
    if len(known) != n:
        raise SolutionError("eps generators do not generate the group")
    for h, k, g in product(range(n), repeat=3):
        if eps[group.add(h, k), g] != eps[h, g] * eps[k, group.add(g, group.double(h))]:
            raise SolutionError(
                f"eps fails the cocycle law at h={group.labels[h]}, k={group.labels[k]}, g={group.labels[g]}")
    return eps


def _e5_sign(group, eps, g, h, p, q) -> int:
    gp = group.add(g, p)
    return int(eps[h, g] * eps[h, gp] * eps[h, group.add(g, q)] * eps[h, group.add(gp, q)])


def extend_A_by_e5(group: FiniteAbelianGroup, partial: dict[int, list], eps: np.ndarray) -> list:
    """Fill A_{g+2h} = (sign) A_g from one representative per coset of 2G.

    Every h that reaches the same target must give the same table.
    """
    n = group.order
    out: list = [None] * n
    source: list = [None] * n
    for r, mat in partial.items():
        for h in range(n):
            t = group.add(r, group.double(h))
            new = [[_e5_sign(group, eps, r, h, p, q) * mat[p][q] for q in range(n)] for p in range(n)]
            if out[t] is None:
                out[t] = new
                source[t] = (r, h)
                continue
            r0, h0 = source[t]
            if r0 != r:
                raise SolutionError(
                    f"representatives {group.labels[r0]} and {group.labels[r]} lie in the same coset")
            for p, q in product(range(n), repeat=2):
                a, b = out[t][p][q], new[p][q]
                if a != b and abs(a - b) > 4 * 2.0 ** -52 * max(abs(a), abs(b)):
                    raise SolutionError(
                        f"extension is ill-defined at g={group.labels[t]}: h={group.labels[h0]} "
                        f"and h'={group.labels[h]} disagree at ({group.labels[p]},{group.labels[q]})")
    missing = [group.labels[g] for g in range(n) if out[g] is None]
    if missing:
        raise SolutionError(f"representatives do not cover G/2G; missing {missing}")
    return out


# ---------------------------------------------------------------------------
# closed-form construction


def load_recipe(path=None) -> dict:
    path = path or data_path("solutions", "ah_recipe.json")
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def solution_constants(recipe: dict, prec: Precision, branch_f: str, branch_g: str) -> dict:
    d = prec.real(D)
    names = {"d": d, "i": prec.complex(0, 1), "branch_f": branch_f, "branch_g": branch_g}
    consts = {}
    for key, expr in recipe["constants"].items():
        consts[key] = evaluate(expr, prec, names)
    consts["d"] = d
    return consts


def build_ah_solution(precision=DOUBLE, ordering=None, branch_f: str | None = None,
                      branch_g: str | None = None, index_convention: str | None = None,
                      recipe: dict | None = None, sign_flips=()) -> GHSolution:
    """The closed-form solution under a chosen matrix ordering, root branches and index convention.

    ``sign_flips`` is a list of (representative label, row, col) entries of
    the sign matrices to negate before extending; it exists for mutation tests.
    """
    prec = resolve_precision(precision)
    recipe = recipe or load_recipe()
    group = FiniteAbelianGroup(tuple(recipe["group"]))
    n = group.order
    ordering = list(ordering or recipe["matrix_ordering"])
    pos = [0] * n  # group index -> matrix row
    try:
        elems = [parse_element(group, e) if isinstance(e, str) else group.index(e) for e in ordering]
    except (KeyError, ValueError):
        raise SolutionError(f"bad ordering {ordering}") from None
    if sorted(elems) != list(range(n)):
        raise SolutionError(f"ordering is not a permutation of the group: {ordering}")
    for i, g in enumerate(elems):
        pos[g] = i
    branch_f = branch_f or recipe["branches"]["f"]
    branch_g = branch_g or recipe["branches"]["g"]
    index_convention = index_convention or recipe["index_convention"]
    if index_convention not in ("row=h", "row=k"):
        raise SolutionError(f"unknown index convention {index_convention!r}")

    names = solution_constants(recipe, prec, branch_f, branch_g)
    pref = evaluate(recipe["prefactor"], prec, names)
    base = [[evaluate(e, prec, names) * pref for e in row] for row in recipe["base"]]
    signs = {k: [list(r) for r in v] for k, v in recipe["signs"].items()}
    for label, i, j in sign_flips:
        signs[label][i][j] = -signs[label][i][j]

    def entry(mat, h, k):
        i, j = pos[h], pos[k]
        return mat[i][j] if index_convention == "row=h" else mat[j][i]

    partial = {0: [[entry(base, h, k) for k in range(n)] for h in range(n)]}
    for label, S in signs.items():
        r = parse_element(group, label)
        partial[r] = [[entry(S, h, k) * entry(base, h, k) for k in range(n)] for h in range(n)]

    gens = {}
    for label, spec in recipe["eps_generators"].items():
        minus = {parse_element(group, x) for x in spec["minus_at"]}
        gens[parse_element(group, label)] = [-1 if g in minus else 1 for g in range(n)]
    eps = extend_epsilon(group, gens)
    A = extend_A_by_e5(group, partial, eps)
    meta = {
        "matrix_ordering": [group.labels[g] for g in elems],
        "branches": {"f": branch_f, "g": branch_g},
        "index_convention": index_convention,
        "source": "construction",
    }
    if sign_flips:
        meta["sign_flips"] = [list(f) for f in sign_flips]
    return GHSolution(group, eps, recipe["eta_exponents"], A, prec, meta)


def perturb(sol: GHSolution, g: int, h: int, k: int, delta) -> GHSolution:
    """Copy of sol with the single entry A_g(h, k) shifted by delta."""
    out = sol.copy()
    out.A[g][h][k] = out.A[g][h][k] + delta
    out.meta["perturbed"] = [sol.group.labels[x] for x in (g, h, k)] + [str(delta)]
    return out


# ---------------------------------------------------------------------------
# equation families


def _ctx(sol: GHSolution):
    G = sol.group
    add = G.add_table.tolist()
    neg = G.neg_table.tolist()
    return G, sol.n, add, neg, sol.eps.tolist(), sol.eta, sol.A, sol.d


def _fam_e1(sol):
    _, n, add, _, eps, _, _, _ = _ctx(sol)
    out = []
    for h, k, g in product(range(n), repeat=3):
        out.append(((0, h, k, g), abs(eps[add[h][k]][g] - eps[h][g] * eps[k][add[g][add[h][h]]])))
    for h in range(n):
        out.append(((1, h), abs(eps[h][0] - 1)))
    return out


def _fam_e2(sol):
    _, n, add, _, _, eta, _, _ = _ctx(sol)
    out = []
    for g, h in product(range(n), repeat=2):
        out.append(((0, g, h), abs(eta[add[g][add[h][h]]] - eta[g])))
    for g in range(n):
        out.append(((1, g), abs(eta[g] ** 3 - 1)))
    return out


def _fam_e3(sol):
    _, n, _, _, _, eta, A, d = _ctx(sol)
    out = []
    for g in range(n):
        s = 0
        for h in range(n):
            s = s + A[g][h][0]
        out.append(((0, g), abs(s + eta[g].conjugate() / d)))
    return out


def _fam_e4(sol):
    _, n, add, neg, _, eta, A, d = _ctx(sol)
    out = []
    for g, g2, k in product(range(n), repeat=3):
        s = 0
        for h in range(n):
            s = s + A[g][add[h][neg[g]]][k] * A[g2][add[h][neg[g2]]][k].conjugate()
        rhs = (1 if g == g2 else 0)
        if k == 0:
            rhs = rhs - eta[g].conjugate() * eta[g2] / d
        out.append(((0, g, g2, k), abs(s - rhs)))
    return out


def _fam_e5(sol):
    G, n, add, _, eps, _, A, _ = _ctx(sol)
    out = []
    for g, h, p, q in product(range(n), repeat=4):
        gp = add[g][p]
        s = eps[h][g] * eps[h][gp] * eps[h][add[g][q]] * eps[h][add[gp][q]]
        out.append(((0, g, h, p, q), abs(A[add[g][add[h][h]]][p][q] - s * A[g][p][q])))
    return out


def _fam_e6(sol):
    _, n, _, _, _, _, A, _ = _ctx(sol)
    return [((0, g, h, k), abs(A[g][h][k] - A[g][k][h].conjugate()))
            for g, h, k in product(range(n), repeat=3)]


def _fam_e8(sol):
    _, n, add, neg, eps, eta, A, _ = _ctx(sol)
    out = []
    for form in (0, 1):
        for g, h, k in product(range(n), repeat=3):
            gh, gk = add[g][h], add[g][k]
            ghk = add[gh][k]
            if form == 0:
                m = neg[k]
                other = A[g][m][add[h][m]] * eta[g]
            else:
                m = neg[h]
                other = A[g][add[k][m]][m] * eta[g].conjugate()
            sign = eps[m][gh] * eps[m][gk] * eps[m][ghk]
            out.append(((form, g, h, k), abs(A[g][h][k] - other * sign)))
    return out


def _fam_e9(sol):
    _, n, add, _, eps, eta, A, _ = _ctx(sol)
    out = []
    for form in (0, 1):
        for g, h, k in product(range(n), repeat=3):
            gh, gk = add[g][h], add[g][k]
            ghk = add[gh][k]
            if form == 0:
                ph = eta[g] * eta[gk] * (eta[gh] * eta[ghk]).conjugate()
                other = A[gh][h][k] * ph * eps[h][g] * eps[h][gk]
            else:
                ph = (eta[g] * eta[gh]).conjugate() * eta[gk] * eta[ghk]
                other = A[gk][h][k] * ph * eps[k][g] * eps[k][gh]
            out.append(((form, g, h, k), abs(A[g][h][k] - other)))
    return out


def _fam_e14(sol):
    _, n, _, _, _, _, A, d = _ctx(sol)
    return [((0, g, h), abs(A[g][h][0] - ((1 if h == 0 else 0) - 1 / (d - 1))))
            for g, h in product(range(n), repeat=2)]


def _fam_eq14(sol):
    _, n, _, _, _, _, A, d = _ctx(sol)
    out = []
    for g, h, k in product(range(n), repeat=3):
        dh, dk, dhk = (h == 0), (k == 0), (h == k)
        rhs = (1 if dh and dk else 0) - (int(dh) + int(dk) + int(dhk)) / (d - 1) + d / (d - 1) ** 2
        z = A[g][h][k]
        out.append(((0, g, h, k), abs(z * z.conjugate() - rhs)))
    return out


def _fam_eq15(sol):
    _, n, add, neg, eps, _, A, d = _ctx(sol)
    out = []
    for g, h, k, l in product(range(n), repeat=4):
        ml = neg[l]
        gml = add[g][ml]
        lhs = (A[g][ml][h] * A[g][l][k] * eps[l][gml] * eps[l][add[gml][h]]
               - A[g][add[h][l]][k] * A[g][add[k][ml]][h] * eps[l][add[gml][k]] * eps[l][add[add[gml][h]][k]])
        rhs = 0
        if add[add[h][neg[k]]][l] == 0:
            rhs = rhs + eps[l][add[g][h]] / (d - 1)
        if l == 0:
            rhs = rhs - 1 / (d - 1)
        out.append(((0, g, h, k, l), abs(lhs - rhs)))
    return out


def _e10_payload(sol: GHSolution):
    """Picklable form of the inputs for the cubic family."""
    G = sol.group
    if sol.precision.is_double:
        A = sol.A_array()
        eta = np.array([complex(z) for z in sol.eta])
    else:
        A = [[[z._mpc_ for z in row] for row in mat] for mat in sol.A]
        eta = [z._mpc_ for z in sol.eta]
    return (sol.precision.bits, A, sol.eps, eta, G.add_table, G.neg_table)


def _e10_chunk(args):
    (bits, A, eps, eta, add, neg), backend, lo, hi = args
    prec = Precision(bits)
    if prec.is_double:
        kern = _kernels.backend(backend)
        inv_d = 1.0 / prec.real(D)
        return np.asarray(kern.e10_residuals(A, eps, eta, add, neg, inv_d, lo, hi)).ravel().tolist()
    mk = prec.mp.make_mpc
    A = [[[mk(z) for z in row] for row in mat] for mat in A]
    eta = [mk(z) for z in eta]
    inv_d = 1 / prec.real(D)
    res = _kernels.e10_residuals_generic(A, np.asarray(eps).tolist(), eta, np.asarray(add).tolist(),
                                         np.asarray(neg).tolist(), inv_d, lo, hi)
    return [float(r) for r in res]


def _fam_e10(sol, jobs=1, backend=None):
    n = sol.n
    payload = _e10_payload(sol)
    backend = backend or _kernels.BACKEND
    jobs = max(1, min(int(jobs or 1), n))
    step = -(-n // jobs)
    tasks = [(payload, backend, lo, min(n, lo + step)) for lo in range(0, n, step)]
    if len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=len(tasks)) as pool:
            parts = list(pool.map(_e10_chunk, tasks))
    else:
        parts = [_e10_chunk(tasks[0])]
    flat = [r for part in parts for r in part]
    keys = product(range(n), repeat=5)
    return [((0,) + key, r) for key, r in zip(keys, flat)]


_FAMILY_FUNCS = {
    "e1": _fam_e1, "e2": _fam_e2, "e3": _fam_e3, "e4": _fam_e4, "e5": _fam_e5,
    "e6": _fam_e6, "e8": _fam_e8, "e9": _fam_e9, "e14": _fam_e14,
    "eq14": _fam_eq14, "eq15": _fam_eq15,
}


def instance_count(family: str, n: int) -> int:
    return {
        "e1": n ** 3 + n, "e2": n ** 2 + n, "e3": n, "e4": n ** 3, "e5": n ** 4, "e6": n ** 3,
        "e8": 2 * n ** 3, "e9": 2 * n ** 3, "e10": n ** 5, "e14": n ** 2,
        "eq14": n ** 3, "eq15": n ** 4,
    }[family]


# ---------------------------------------------------------------------------
# reports


@dataclass
class FamilyResult:
    name: str
    count: int
    max_residual: float
    argmax: tuple[int, ...] | None
    passed: bool

    def locus(self, group: FiniteAbelianGroup) -> dict | None:
        if self.argmax is None:
            return None
        form, *idx = self.argmax
        names = FORMS[self.name][form]
        out = {"form": form}
        out.update({v: group.labels[i] for v, i in zip(names, idx)})
        return out


@dataclass
class GHReport:
    families: list[FamilyResult]
    tol: float
    precision: str
    enumeration: tuple[str, ...]
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return all(f.passed for f in self.families)

    @property
    def total(self) -> int:
        return sum(f.count for f in self.families)

    @property
    def max_residual(self) -> float:
        return max((f.max_residual for f in self.families), default=0.0)

    def family(self, name: str) -> FamilyResult:
        for f in self.families:
            if f.name == name:
                return f
        raise KeyError(name)


def resolve_families(equations) -> list[str]:
    if equations is None or equations == "all":
        return list(FAMILIES)
    if isinstance(equations, str):
        equations = [e.strip() for e in equations.split(",") if e.strip()]
    out = []
    for e in equations:
        if e == "all":
            out.extend(f for f in FAMILIES if f not in out)
        elif e == "every":
            out.extend(f for f in ALL_FAMILIES if f not in out)
        elif e in ALL_FAMILIES:
            if e not in out:
                out.append(e)
        else:
            raise ValueError(f"unknown equation family {e!r}; known: {', '.join(ALL_FAMILIES)}")
    return sorted(out, key=ALL_FAMILIES.index)


def _summarize(name: str, rows, tol: float) -> FamilyResult:
    best, arg = -1.0, None
    for key, r in rows:
        r = float(r)
        if r > best or (r == best and key < arg):
            best, arg = r, key
    if arg is None:
        return FamilyResult(name, 0, 0.0, None, True)
    return FamilyResult(name, len(rows), best, arg, best < tol)


def check_solution(sol: GHSolution, equations="all", tol: float = 1e-9, jobs: int = 1,
                   backend: str | None = None) -> GHReport:
    """Evaluate the chosen families instance by instance.

    The argmax of each family is the lexicographically least instance among
    those attaining the maximum, so reports do not depend on ``jobs``.
    """
    t0 = time.perf_counter()
    fams = []
    for name in resolve_families(equations):
        if name == "e10":
            rows = _fam_e10(sol, jobs=jobs, backend=backend)
        else:
            rows = _FAMILY_FUNCS[name](sol)
        assert len(rows) == instance_count(name, sol.n)
        fams.append(_summarize(name, rows, tol))
    return GHReport(fams, tol, sol.precision.label, sol.group.labels, time.perf_counter() - t0)


@dataclass
class QSystemRow:
    g: str
    residual: float
    passed: bool


def check_qsystem_all_g(sol: GHSolution, tol: float = 1e-9) -> list[QSystemRow]:
    """Per g: A_g(h, 0) = delta_{h,0} - 1/(d-1) for every h."""
    rows = _fam_e14(sol)
    out = []
    for g in range(sol.n):
        r = max(float(res) for key, res in rows if key[1] == g)
        out.append(QSystemRow(sol.group.labels[g], r, r < tol))
    return out


# ---------------------------------------------------------------------------
# solution files

FORMAT = "fusionkit-gh-solution/1"


def _num_str(x, prec: Precision) -> str:
    if prec.is_double:
        return format(float(x), ".17g")
    return prec.mp.nstr(x, int(prec.bits * math.log10(2)) + 3, strip_zeros=False)


def solution_to_json(sol: GHSolution) -> dict:
    G, prec = sol.group, sol.precision
    A = {}
    for g in range(sol.n):
        A[G.labels[g]] = [[[_num_str(z.real, prec), _num_str(z.imag, prec)] for z in row]
                          for row in sol.A[g]]
    construction = {k: sol.meta[k] for k in ("matrix_ordering", "branches", "index_convention")
                    if k in sol.meta}
    return {
        "format": FORMAT,
        "_note": "Tables generated from ah_recipe.json; regenerate with fusionkit.izumi.save_solution.",
        "group": list(G.orders),
        "enumeration": list(G.labels),
        "precision_bits": prec.bits,
        "d": _num_str(sol.d, prec),
        "eps": sol.eps.tolist(),
        "eta_exponents": list(sol.eta_exp),
        "construction": construction or None,
        "A": A,
    }


def _dump_compact(data: dict) -> str:
    """JSON with one table row per line, so diffs stay readable."""
    lines = ["{"]
    items = list(data.items())
    for i, (key, val) in enumerate(items):
        tail = "," if i < len(items) - 1 else ""
        if key == "eps":
            rows = ",\n  ".join(json.dumps(r) for r in val)
            lines.append(f' "{key}": [\n  {rows}\n ]{tail}')
        elif key == "A":
            mats = []
            for lab, mat in val.items():
                rows = ",\n   ".join(json.dumps(r) for r in mat)
                mats.append(f'  "{lab}": [\n   {rows}\n  ]')
            lines.append(f' "{key}": {{\n' + ",\n".join(mats) + f"\n }}{tail}")
        else:
            lines.append(f" {json.dumps(key)}: {json.dumps(val, ensure_ascii=False)}{tail}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_solution(sol: GHSolution, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_dump_compact(solution_to_json(sol)))


def solution_from_json(data: dict, precision=DOUBLE) -> GHSolution:
    """Read tables.  Asking for more bits than the file stores rebuilds from the construction."""
    prec = resolve_precision(precision)
    if data.get("format") != FORMAT:
        raise SolutionError(f"not a solution file (format {data.get('format')!r})")
    try:
        G = FiniteAbelianGroup(tuple(data["group"]))
        if list(data["enumeration"]) != list(G.labels):
            raise SolutionError("group enumeration in file does not match the canonical one")
        stored_bits = int(data.get("precision_bits", 53))
        eps = data["eps"]
        eta = data["eta_exponents"]
        A = [[[prec.from_parts(re, im) for re, im in row] for row in data["A"][lab]] for lab in G.labels]
    except KeyError as e:
        raise SolutionError(f"solution file missing field {e}") from None
    meta = dict(data.get("construction") or {})
    meta["source"] = "tables"
    sol = GHSolution(G, eps, eta, A, prec, meta)
    cons = data.get("construction")
    if prec.bits > stored_bits and cons:
        rebuilt = build_ah_solution(prec, ordering=cons.get("matrix_ordering"),
                                    branch_f=cons.get("branches", {}).get("f"),
                                    branch_g=cons.get("branches", {}).get("g"),
                                    index_convention=cons.get("index_convention"))
        # the tables must agree with the construction to their own precision
        worst = max(abs(a - b) for ma, mb in zip(sol.A, rebuilt.A)
                    for ra, rb in zip(ma, mb) for a, b in zip(ra, rb))
        if worst > 2.0 ** (-stored_bits + 4) or not np.array_equal(rebuilt.eps, sol.eps) \
                or rebuilt.eta_exp != sol.eta_exp:
            raise SolutionError(f"stored tables disagree with their construction (max deviation {float(worst):.3e})")
        rebuilt.meta["source"] = "construction"
        rebuilt.meta["table_deviation"] = float(worst)
        return rebuilt
    return sol


def load_solution(path=None, precision=DOUBLE) -> GHSolution:
    path = path or builtin_solution_path()
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as e:
        raise SolutionError(f"{path}: invalid JSON: {e}") from None
    return solution_from_json(data, precision)


def builtin_solution_path():
    return data_path("solutions", "ah_z4xz2.json")
