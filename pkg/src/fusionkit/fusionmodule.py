"""Fusion modules: integer actions of a fusion ring on a finite basis."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fusionring import (
    FusionRing,
    RingStructureError,
    Violation,
    builtin_ring,
    data_path,
    perron_vector,
    resolve_label,
)
from .numeric import QuadInt, qi_sqrt

ROW = "row"  # act[i] @ act[j] == sum_p N[i, j, p] act[p]
COLUMN = "column"  # act[j] @ act[i] == sum_p N[i, j, p] act[p]


class ModuleStructureError(RingStructureError):
    pass


@dataclass
class FusionModule:
    """act[i, k, j] = multiplicity of R_j in R_k X_i."""

    ring: FusionRing
    labels: tuple[str, ...]
    act: np.ndarray
    name: str = ""
    order: str = ROW
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.labels = tuple(self.labels)
        self.act = np.asarray(self.act)
        n = len(self.labels)
        if self.act.shape != (self.ring.rank, n, n):
            raise ModuleStructureError(
                f"action has shape {self.act.shape}, expected {(self.ring.rank, n, n)}")
        if not np.all(self.act == np.round(self.act)):
            raise ModuleStructureError("action has non-integer entries")
        self.act = self.act.astype(np.int64)
        if (self.act < 0).any():
            raise ModuleStructureError("action has negative entries")
        if len(set(self.labels)) != n:
            raise ModuleStructureError("duplicate module labels")
        self.act.setflags(write=False)

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        return resolve_label(self.labels, label)


def _compat_defect(ring: FusionRing, act: np.ndarray, order: str) -> np.ndarray:
    """defect[i, j, a, b] of the composition law in the given order."""
    if order == ROW:
        lhs = np.einsum("iab,jbc->ijac", act, act)
    else:
        lhs = np.einsum("jab,ibc->ijac", act, act)
    rhs = np.einsum("ijp,pac->ijac", ring.N, act)
    return lhs - rhs


def detect_order(ring: FusionRing, act: np.ndarray) -> str | None:
    for order in (ROW, COLUMN):
        if not _compat_defect(ring, act, order).any():
            return order
    return None


def validate_module(module: FusionModule, max_report: int = 200) -> list[Violation]:
    ring, act = module.ring, module.act
    out: list[Violation] = []

    def add(kind, where, detail=""):
        if len(out) < max_report:
            out.append(Violation(kind, tuple(int(x) for x in where), detail))

    eye = np.eye(module.size, dtype=np.int64)
    for a, b in zip(*np.nonzero(act[ring.unit] != eye)):
        add("unit", (a, b), f"unit acts with entry {act[ring.unit, a, b]} at ({a},{b})")
    defect = _compat_defect(ring, act, module.order)
    for i, j, a, b in zip(*np.nonzero(defect)):
        add("compatibility", (i, j, a, b),
            f"({ring.labels[i]}*{ring.labels[j]}) at ({module.labels[a]},{module.labels[b]}) off by {defect[i, j, a, b]}")
    for i in range(ring.rank):
        bad = act[ring.dual[i]] != act[i].T
        for a, b in zip(*np.nonzero(bad)):
            add("duality", (i, a, b), f"act[dual {ring.labels[i]}] != act[{ring.labels[i]}]^T at ({a},{b})")
    return out


def internal_end(module: FusionModule, k) -> np.ndarray:
    """Coefficients of the internal endomorphism algebra of R_k: (R_k X_i, R_k)."""
    k = module.index(k)
    return module.act[:, k, k].copy()


def internal_end_dim(module: FusionModule, k) -> QuadInt | float:
    coeffs = internal_end(module, k)
    if module.ring.exact_dims is not None:
        total = QuadInt(0, 0)
        for c, d in zip(coeffs, module.ring.exact_dims):
            total = total + int(c) * d
        return total
    return float(coeffs @ module.ring.float_dims())


@dataclass
class ModuleDims:
    values: np.ndarray
    exact: tuple[QuadInt | None, ...]
    end_dims: tuple
    max_defect: float

    def exact_or_float(self, k: int):
        return self.exact[k] if self.exact[k] is not None else float(self.values[k])


def module_dims(module: FusionModule, tol: float = 1e-8) -> ModuleDims:
    """Perron weights scaled so that d(R_k)^2 = d(End R_k); both characterisations must agree."""
    total = module.act.sum(axis=0).astype(float)
    if module.order == COLUMN:
        total = total.T
    _, v = perron_vector(total)
    ends = tuple(internal_end_dim(module, k) for k in range(module.size))
    end_f = np.array([float(e) for e in ends])
    scale = np.sqrt(end_f[0]) / v[0]
    vals = v * scale
    defect = float(np.max(np.abs(vals * vals - end_f) / end_f))
    if defect > tol:
        raise ModuleStructureError(
            f"Perron weights and internal-end dimensions disagree (relative defect {defect:.3e})")
    exact = tuple(qi_sqrt(e) if isinstance(e, QuadInt) else None for e in ends)
    return ModuleDims(vals, exact, ends, defect)


def regular_module(ring: FusionRing) -> FusionModule:
    """The ring acting on itself by right multiplication: act[i, k, j] = N[k, i, j]."""
    act = ring.N.transpose(1, 0, 2)
    return FusionModule(ring, ring.labels, act, name=f"regular({ring.name})")


# ---------------------------------------------------------------------------
# files


def module_from_json(data: dict, ring: FusionRing | None = None) -> FusionModule:
    try:
        ring_name = data["ring"]
        labels = data["labels"]
        table = data["act"]
    except KeyError as e:
        raise ModuleStructureError(f"module file missing field {e}") from None
    if ring is None:
        ring = builtin_ring(ring_name) if isinstance(ring_name, str) else None
    if isinstance(table, dict):
        missing = [lab for lab in ring.labels if lab not in table]
        if missing:
            raise ModuleStructureError(f"action missing for {missing}")
        act = np.array([table[lab] for lab in ring.labels])
    else:
        act = np.array(table)
    if (act < 0).any():
        raise ModuleStructureError("action has negative entries")
    order = detect_order(ring, act) if act.ndim == 3 and act.shape[0] == ring.rank else None
    mod = FusionModule(ring, labels, act, name=data.get("name", ""), order=order or ROW,
                       meta={k: v for k, v in data.items() if k.startswith("_") or k == "case"})
    mod.meta["order_verified"] = order is not None
    return mod


def load_module(path, ring: FusionRing | None = None) -> FusionModule:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as e:
        raise ModuleStructureError(f"{path}: invalid JSON: {e}") from None
    return module_from_json(data, ring)


def builtin_module_names() -> list[str]:
    return sorted(p.stem for p in data_path("modules").glob("*.json"))


def builtin_module(name: str) -> FusionModule:
    p = data_path("modules", f"{name}.json")
    if not p.exists():
        raise ModuleStructureError(f"unknown module {name!r}; known: {builtin_module_names()}")
    return load_module(p)


def resolve_module(spec: str) -> FusionModule:
    """A builtin module name or a path to a module file."""
    p = Path(spec)
    if p.suffix == ".json" and p.exists():
        return load_module(p)
    return builtin_module(spec)
