"""Modular data (S, T, dimensions) and the standard consistency checks.

Indices in reports are 1-based, matching the usual S_{ij} labelling.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .fusionring import FusionRing, data_path, validate_ring
from .numeric import D, DOUBLE, QuadInt, evaluate, qi_to_float


class ModularDataError(ValueError):
    pass


@dataclass
class ModularData:
    S: np.ndarray
    T: np.ndarray
    dims: np.ndarray
    Lambda: float
    exact_dims: tuple[QuadInt, ...] | None = None
    exact_Lambda: QuadInt | None = None
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.S = np.asarray(self.S, dtype=complex)
        self.T = np.asarray(self.T, dtype=complex).ravel()
        self.dims = np.asarray(self.dims, dtype=float).ravel()
        r = self.rank
        if self.S.shape != (r, r) or self.T.shape != (r,):
            raise ModularDataError(f"rank mismatch: S {self.S.shape}, T {self.T.shape}, dims {self.dims.shape}")
        if self.exact_dims is not None and len(self.exact_dims) != r:
            raise ModularDataError("exact dims have the wrong length")
        bad = np.nonzero(np.abs(np.abs(self.T) - 1) > 4 * np.finfo(float).eps)[0]
        if len(bad):
            raise ModularDataError(f"T entry {int(bad[0]) + 1} is not a phase")

    @property
    def rank(self) -> int:
        return len(self.dims)


def trivial_modular_data() -> ModularData:
    return ModularData([[1.0]], [1.0], [1.0], 1.0, (QuadInt(2, 0),), QuadInt(2, 0), name="trivial")


# ---------------------------------------------------------------------------
# file format


def _expand_T(spec: list, names: dict) -> list:
    out = []
    for item in spec:
        if isinstance(item, str):
            out.append(complex(evaluate(item, DOUBLE, names)))
            continue
        lo, hi = item["range"]
        off = item.get("offset", 0)
        var = item.get("index", "l")
        if lo != len(out) + 1:
            raise ModularDataError(f"T range starts at {lo}, expected {len(out) + 1}")
        for i in range(lo, hi + 1):
            out.append(complex(evaluate(item["formula"], DOUBLE, dict(names, **{var: i - off}))))
    return out


def _expand_S(spec: dict, rank: int, names: dict) -> np.ndarray:
    S = np.full((rank, rank), np.nan, dtype=complex)

    def put(i, j, v):
        if not np.isnan(S[i, j]) and S[i, j] != v:
            raise ModularDataError(f"S[{i + 1}][{j + 1}] is assigned twice with different values")
        S[i, j] = v

    for blk in spec["blocks"]:
        r0, r1 = blk["rows"]
        c0, c1 = blk["cols"]
        off = blk.get("offset", 0)
        pref = evaluate(blk.get("prefactor", "1"), DOUBLE, names)
        for i in range(r0, r1 + 1):
            for j in range(c0, c1 + 1):
                env = dict(names, k=i - off, l=j - off)
                if "entries" in blk:
                    expr = blk["entries"][i - r0][j - c0]
                else:
                    expr = blk["formula"]
                v = complex(pref * evaluate(expr, DOUBLE, env))
                put(i - 1, j - 1, v)
                if blk.get("symmetric"):
                    put(j - 1, i - 1, v)
    missing = np.argwhere(np.isnan(S.real))
    if len(missing):
        i, j = missing[0]
        raise ModularDataError(f"S[{i + 1}][{j + 1}] is not covered by any block")
    return S


def modular_from_json(data: dict) -> ModularData:
    try:
        rank = int(data["rank"])
        exact_dims = tuple(QuadInt.parse(x) for x in data["dims"])
        exact_Lambda = QuadInt.parse(data["Lambda"])
        names = {"d": qi_to_float(D), "Lambda": qi_to_float(exact_Lambda)}
        T = _expand_T(data["T"], names)
        S = _expand_S(data["S"], rank, names)
    except KeyError as e:
        raise ModularDataError(f"modular data missing field {e}") from None
    dims = [qi_to_float(x) for x in exact_dims]
    if len(dims) != rank or len(T) != rank:
        raise ModularDataError(f"declared rank {rank} but got {len(dims)} dims and {len(T)} T entries")
    return ModularData(S, T, dims, qi_to_float(exact_Lambda), exact_dims, exact_Lambda,
                       name=data.get("name", ""), meta={"_note": data.get("_note", "")})


def load_modular(path) -> ModularData:
    try:
        with open(path, encoding="utf-8") as fh:
            return modular_from_json(json.load(fh))
    except json.JSONDecodeError as e:
        raise ModularDataError(f"{path}: invalid JSON: {e}") from None


def build_ah_double() -> ModularData:
    return load_modular(data_path("modular", "ah_double.json"))


# ---------------------------------------------------------------------------
# checks


@dataclass
class ModularCheck:
    name: str
    passed: bool
    deviation: float
    locus: tuple[int, ...] | None = None
    detail: str = ""


@dataclass
class ModularReport:
    checks: list[ModularCheck]
    charge_conjugation: tuple[int, ...] | None
    central_charge: float | None
    verlinde: np.ndarray | None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> ModularCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _argmax(M) -> tuple[float, tuple[int, ...]]:
    M = np.abs(np.asarray(M))
    idx = np.unravel_index(int(np.argmax(M)), M.shape)
    return float(M[idx]), tuple(int(i) + 1 for i in idx)


def _fmt_complex(z: complex) -> str:
    re = z.real if abs(z.real) > 1e-12 else 0.0
    im = z.imag if abs(z.imag) > 1e-12 else 0.0
    return f"{re:.12f}{im:+.12f}i"


def verlinde_coefficients(md: ModularData) -> np.ndarray:
    """N[i, j, k] = sum_m S_im S_jm conj(S_km) / S_1m."""
    S = md.S
    return np.einsum("im,jm,km->ijk", S, S, S.conj() / S[0][None, :])


def verify_modular(md: ModularData, tol: float = 1e-9, verlinde_tol: float = 1e-6) -> ModularReport:
    S, T, r = md.S, md.T, md.rank
    checks = []

    dev, loc = _argmax(S - S.T)
    checks.append(ModularCheck("symmetry", dev < tol, dev, loc))

    dev, loc = _argmax(S @ S.conj().T - np.eye(r))
    checks.append(ModularCheck("unitarity", dev < tol, dev, loc))

    S2 = S @ S
    perm = tuple(int(j) for j in np.argmax(np.abs(S2), axis=1))
    P = np.zeros((r, r))
    P[np.arange(r), perm] = 1
    dev, loc = _argmax(S2 - P)
    is_perm = sorted(perm) == list(range(r))
    checks.append(ModularCheck("charge_conjugation", is_perm and dev < tol, dev, loc,
                               "S^2 = C with C[i] = " + ",".join(str(p + 1) for p in perm)))
    C = perm if is_perm and dev < tol else None

    Nv = verlinde_coefficients(md)
    Nr = np.rint(Nv.real)
    dev_int, loc = _argmax(Nv - Nr)
    neg = bool((Nr < 0).any())
    detail = "negative coefficient" if neg else ""
    ring_ok = False
    if dev_int < verlinde_tol and not neg and C is not None:
        ring = FusionRing(tuple(str(i + 1) for i in range(r)), 0, C, Nr.astype(np.int64),
                          name=f"verlinde({md.name})")
        viol = validate_ring(ring)
        ring_ok = not viol
        if viol:
            detail = f"rounded Verlinde tensor is not a fusion ring: {viol[0].kind} at {viol[0].where}"
    elif C is None:
        detail = "no duality available from S^2"
    checks.append(ModularCheck("verlinde", dev_int < verlinde_tol and not neg and ring_ok, dev_int, loc, detail))

    ratio = (S[0] / S[0, 0]).real
    rel = np.abs(ratio - md.dims) / np.abs(md.dims)
    dev, loc = _argmax(rel)
    dev = max(dev, float(np.max(np.abs((S[0] / S[0, 0]).imag))))
    checks.append(ModularCheck("dimensions", dev < tol, dev, loc))

    ST = S @ np.diag(T)
    X = ST @ ST @ ST
    z = complex(np.vdot(S2, X) / np.vdot(S2, S2))
    dev, loc = _argmax(X - z * S2)
    dev_z = abs(abs(z) - 1)
    checks.append(ModularCheck("st_relation", dev < tol and dev_z < tol, max(dev, dev_z), loc,
                               f"(ST)^3 = z S^2 with z = {_fmt_complex(z)}"))
    central = float((np.angle(z) * 8 / (2 * np.pi)) % 8)
    if abs(central - 8) < 1e-9:
        central = 0.0

    total = float(np.sum(md.dims ** 2))
    dev = abs(total - md.Lambda ** 2) / md.Lambda ** 2
    checks.append(ModularCheck("global_dimension", dev < tol, dev, None,
                               f"sum dims^2 = {total:.12g}, Lambda^2 = {md.Lambda ** 2:.12g}"))
    return ModularReport(checks, tuple(p + 1 for p in C) if C is not None else None, central,
                         Nr.astype(np.int64) if dev_int < verlinde_tol else None)


@dataclass
class ExactDimReport:
    sum_squares: QuadInt
    Lambda_squared: QuadInt
    residual: QuadInt

    @property
    def passed(self) -> bool:
        return self.residual == QuadInt(0, 0)


def global_dim_check_exact(md: ModularData | None = None) -> ExactDimReport:
    """sum_i dims_i^2 against Lambda^2 in exact arithmetic."""
    md = md or build_ah_double()
    if md.exact_dims is None or md.exact_Lambda is None:
        raise ModularDataError("exact dimensions are not available")
    total = QuadInt(0, 0)
    for x in md.exact_dims:
        total = total + x * x
    L2 = md.exact_Lambda * md.exact_Lambda
    return ExactDimReport(total, L2, total - L2)
