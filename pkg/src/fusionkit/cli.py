"""fusionkit command line.

Exit codes: 0 all checks pass, 1 some check failed, 2 bad input or data.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .dualsearch import (
    MatrixError,
    builtin_pair,
    check_graph_pair_duality,
    dual_dims_filter,
    gram_matrix,
    load_pair,
    nnt_factorizations,
)
from .fusionmodule import (
    builtin_module_names,
    internal_end,
    internal_end_dim,
    module_dims,
    resolve_module,
    validate_module,
)
from .fusionring import (
    BUILTIN_NAMES,
    RingStructureError,
    builtin_ring,
    check_exact_dims,
    deequivariantize_gh,
    find_isomorphism,
    fp_dimensions,
    load_ring,
    ring_to_json,
    validate_ring,
)
from .groups import parse_element, parse_group
from .izumi import SolutionError, check_qsystem_all_g, check_solution, load_solution
from .modulardata import ModularDataError, build_ah_double, global_dim_check_exact, load_modular, verify_modular
from .numeric import resolve_precision

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


@dataclass
class Check:
    name: str
    passed: bool
    max_residual: float | None = None
    locus: object = None
    detail: str = ""
    count: int | None = None

    def as_dict(self) -> dict:
        out = {"name": self.name, "passed": bool(self.passed)}
        if self.count is not None:
            out["count"] = int(self.count)
        out["max_residual"] = None if self.max_residual is None else float(self.max_residual)
        out["locus"] = self.locus
        out["detail"] = self.detail
        return out


@dataclass
class Report:
    command: str
    config: dict
    checks: list[Check] = field(default_factory=list)
    results: dict = field(default_factory=dict)
    execution: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)  # extra human-readable lines

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, *args, **kw) -> Check:
        c = Check(*args, **kw)
        self.checks.append(c)
        return c

    def as_dict(self, timing: bool = True) -> dict:
        out = {
            "command": self.command,
            "toolkit_version": __version__,
            "config": self.config,
            "passed": self.passed,
            "checks": [c.as_dict() for c in self.checks],
            "results": self.results,
        }
        if timing:
            out["execution"] = self.execution
        return out

    def render(self) -> str:
        lines = [f"fusionkit {self.command}"]
        width = max((len(c.name) for c in self.checks), default=4)
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            res = "" if c.max_residual is None else f"  max {c.max_residual:.3e}"
            cnt = "" if c.count is None else f"  n={c.count}"
            loc = "" if c.passed or c.locus is None else f"  at {json.dumps(c.locus, ensure_ascii=False)}"
            det = f"  {c.detail}" if c.detail else ""
            lines.append(f"  {status}  {c.name:<{width}}{cnt}{res}{loc}{det}")
        lines += self.notes
        n_pass = sum(c.passed for c in self.checks)
        lines.append(f"{n_pass}/{len(self.checks)} checks passed")
        return "\n".join(lines)


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def dump_report(report: Report, path: str | None, timing: bool = True) -> str:
    text = json.dumps(report.as_dict(timing), indent=2, ensure_ascii=False, default=_json_default) + "\n"
    if path and path != "-":
        Path(path).write_text(text, encoding="utf-8")
    return text


# ---------------------------------------------------------------------------
# commands


def cmd_verify_rings(args) -> Report:
    names = [args.ring] if args.ring else list(BUILTIN_NAMES)
    rep = Report("verify-rings", {"rings": names if not args.file else [args.file], "tol": args.tol})
    rings = []
    if args.file:
        rings.append(load_ring(args.file))
    else:
        rings.extend(builtin_ring(n) for n in names)
    for ring in rings:
        label = ring.name or "ring"
        viol = validate_ring(ring)
        first = viol[0] if viol else None
        rep.add(f"{label} axioms", not viol, locus=list(first.where) if first else None,
                detail=f"{len(viol)} violations, first {first.kind}: {first.detail}" if first else "")
        entry = {"rank": ring.rank, "labels": list(ring.labels), "violations": len(viol)}
        if not viol:
            fp = fp_dimensions(ring)
            entry["fp_dims"] = [float(x) for x in fp]
            if ring.exact_dims is not None:
                closed = np.array([float(x) for x in ring.exact_dims])
                rel = np.abs(fp - closed) / closed
                k = int(np.argmax(rel))
                rep.add(f"{label} dimensions", float(rel[k]) < args.tol, float(rel[k]),
                        locus=ring.labels[k], detail="Perron vector vs closed forms")
                bad = check_exact_dims(ring, ring.exact_dims)
                rep.add(f"{label} exact dimensions", not bad, 0.0 if not bad else None,
                        locus=[ring.labels[i] for i in bad[0]] if bad else None, count=ring.rank ** 2)
                entry["closed_forms"] = [str(x) for x in ring.exact_dims]
        rep.results[label] = entry
    return rep


def cmd_verify_modules(args) -> Report:
    names = [args.module] if args.module else builtin_module_names()
    rep = Report("verify-modules", {"modules": names})
    for name in names:
        mod = resolve_module(name)
        label = mod.name or name
        viol = validate_module(mod)
        first = viol[0] if viol else None
        rep.add(f"{label} axioms", not viol, locus=list(first.where) if first else None,
                detail=f"{len(viol)} violations, first {first.kind}: {first.detail}" if first else "")
        entry = {"ring": mod.ring.name, "basis": list(mod.labels), "order": mod.order}
        if not viol:
            try:
                dims = module_dims(mod)
            except RingStructureError as e:
                rep.add(f"{label} dimensions", False, detail=str(e))
            else:
                rep.add(f"{label} dimensions", True, dims.max_defect,
                        detail="Perron weights squared vs internal-end dimensions")
                entry["elements"] = [
                    {"label": mod.labels[k],
                     "internal_end": mod.ring.format(internal_end(mod, k)),
                     "end_dim": str(internal_end_dim(mod, k)),
                     "dim": str(dims.exact[k]) if dims.exact[k] is not None else float(dims.values[k])}
                    for k in range(mod.size)]
                rep.notes.append(f"  {label} over {mod.ring.name}")
                for e in entry["elements"]:
                    rep.notes.append(f"    {e['label']}: End = {e['internal_end']}  (dim {e['end_dim']})")
        rep.results[label] = entry
    return rep


def _parse_matrix(text: str) -> np.ndarray:
    p = Path(text)
    raw = p.read_text(encoding="utf-8") if p.exists() else text
    try:
        return np.array(json.loads(raw))
    except json.JSONDecodeError as e:
        raise InputError(f"cannot read matrix {text!r}: {e}") from None


def _matrix_rows(N, indent: str = "    ") -> list[str]:
    return [indent + " ".join(f"{int(x):2d}" for x in row) for row in np.asarray(N)]


def cmd_dual_graph(args) -> Report:
    rep = Report("dual-graph", {"module": args.module, "kappa": args.kappa, "gram": args.gram,
                                "max_cols": args.max_cols})
    rep.execution["jobs"] = args.jobs
    if args.gram:
        M = _parse_matrix(args.gram)
        Ns = nnt_factorizations(M, max_cols=args.max_cols, jobs=args.jobs)
        rep.results["gram"] = M.tolist()
        rep.results["factorizations"] = [N.tolist() for N in Ns]
        rep.add("factorization exists", bool(Ns), count=len(Ns),
                detail="" if Ns else "no nonnegative integer factorization")
        for i, N in enumerate(Ns):
            rep.notes += [f"  factorization {i + 1}:"] + _matrix_rows(N)
        return rep
    if not args.module:
        raise InputError("either --module or --gram is required")
    mod = resolve_module(args.module)
    kappas = [args.kappa] if args.kappa else list(mod.labels)
    facts = {}
    for kap in kappas:
        k = mod.index(kap)
        label = mod.labels[k]
        M = gram_matrix(mod, k)
        Ns = nnt_factorizations(M, max_cols=args.max_cols, jobs=args.jobs)
        facts[label] = Ns
        rep.results.setdefault("gram", {})[label] = M.tolist()
        rep.results.setdefault("factorizations", {})[label] = [N.tolist() for N in Ns]
        rep.add(f"{label} factorization exists", bool(Ns), count=len(Ns),
                detail="" if Ns else "no nonnegative integer factorization")
        rep.notes += [f"  Gram matrix of {label}:"] + _matrix_rows(M)
        if args.kappa:
            for i, N in enumerate(Ns):
                rep.notes += [f"  factorization {i + 1}:"] + _matrix_rows(N)
    filt = dual_dims_filter(mod, kappas=kappas, factorizations=facts, jobs=args.jobs)
    classes = [c.describe() for c in filt.classes]
    rep.results["dual_dimension_classes"] = classes
    rep.results["survivors"] = filt.survivors
    rep.add("dual dimension filter", bool(classes), count=len(classes),
            detail="; ".join(classes) if classes else "no candidate survives")
    return rep


def cmd_graph_pair(args) -> Report:
    pair = load_pair(args.pair) if args.pair and Path(args.pair).exists() else builtin_pair(args.pair or "theta1_42")
    rep = Report("graph-pair", {"pair": pair.name or args.pair, "swap": args.swap})
    if args.swap:
        a, b = (pair.upper.index(x) if x in pair.upper else None for x in args.swap)
        if a is None or b is None:
            raise InputError(f"--swap needs two upper vertices from {list(pair.upper)}")
        dual = list(pair.upper_dual)
        # re-pair a and b with each other, their old partners with each other
        pa, pb = dual[a], dual[b]
        dual[pa], dual[pb] = pa, pb
        dual[a], dual[b] = b, a
        if pa not in (a, b) and pb not in (a, b):
            dual[pa], dual[pb] = pb, pa
        pair.upper_dual = tuple(dual)
    bad = check_graph_pair_duality(pair)
    rep.add("path counts agree", not bad, count=len(pair.odd) ** 2,
            locus=[[m.i, m.j] for m in bad] or None,
            detail="; ".join(f"({m.i},{m.j}): upper {m.upper} lower {m.lower}" for m in bad))
    return rep


def cmd_verify_gh(args) -> Report:
    prec = resolve_precision(args.precision)
    tol = args.tol if args.tol is not None else (1e-9 if prec.is_double else 1e-25)
    sol = load_solution(args.solution, prec)
    t0 = time.perf_counter()
    res = check_solution(sol, args.equations, tol=tol, jobs=args.jobs, backend=args.backend)
    rep = Report("verify-gh", {
        "solution": args.solution or "builtin:ah_z4xz2",
        "equations": args.equations,
        "tol": tol,
        "precision": prec.label,
        "enumeration": list(res.enumeration),
        "construction": {k: sol.meta[k] for k in ("matrix_ordering", "branches", "index_convention")
                         if k in sol.meta},
        "source": sol.meta.get("source"),
    })
    for fam in res.families:
        rep.add(fam.name, fam.passed, fam.max_residual, locus=fam.locus(sol.group), count=fam.count)
    rep.results["total_instances"] = res.total
    rep.results["max_residual"] = res.max_residual
    if any(f.name == "e14" for f in res.families):
        rows = check_qsystem_all_g(sol, tol)
        rep.results["qsystem"] = [{"g": r.g, "residual": r.residual, "passed": r.passed} for r in rows]
        rep.notes.append("  Q-system condition per g: " + " ".join(
            f"{r.g}:{'ok' if r.passed else 'FAIL'}" for r in rows))
    rep.notes.append(f"  {res.total} instances, max residual {res.max_residual:.3e}, precision {prec.label}")
    rep.execution.update({"jobs": args.jobs, "backend": args.backend or _kernels.BACKEND,
                          "check_seconds": time.perf_counter() - t0})
    return rep


def cmd_deequivariantize(args) -> Report:
    group = parse_group(args.group)
    z = parse_element(group, args.z)
    rep = Report("deequivariantize", {"group": group.name, "m": args.m, "z": group.labels[z],
                                      "compare": args.compare})
    res = deequivariantize_gh(group, args.m, z)
    ring = res.ring
    ring.name = f"deequivariantize({group.name},{args.m},{group.labels[z]})"
    viol = validate_ring(ring)
    rep.add("axioms", not viol, locus=list(viol[0].where) if viol else None,
            detail=f"{len(viol)} violations, first {viol[0].kind}" if viol else "")
    rep.results["ring"] = ring_to_json(ring)
    rep.results["quotient"] = list(res.quotient.labels)
    if args.compare:
        other = builtin_ring(args.compare) if args.compare.upper() in BUILTIN_NAMES else load_ring(args.compare)
        phi = find_isomorphism(ring, other)
        rep.add(f"isomorphic to {other.name or args.compare}", phi is not None,
                detail="no relabeling found" if phi is None else ", ".join(f"{ring.labels[i]}->{other.labels[j]}"
                                                          for i, j in enumerate(phi)))
        rep.results["relabeling"] = None if phi is None else {ring.labels[i]: other.labels[j]
                                                              for i, j in enumerate(phi)}
    if args.output:
        Path(args.output).write_text(json.dumps(ring_to_json(ring), indent=1, ensure_ascii=False) + "\n",
                                     encoding="utf-8")
    return rep


def cmd_verify_modular(args) -> Report:
    md = load_modular(args.data) if args.data else build_ah_double()
    rep = Report("verify-modular", {"data": args.data or "builtin:ah_double", "tol": args.tol,
                                    "verlinde_tol": args.verlinde_tol})
    res = verify_modular(md, tol=args.tol, verlinde_tol=args.verlinde_tol)
    for c in res.checks:
        rep.add(c.name, c.passed, c.deviation, locus=list(c.locus) if c.locus else None, detail=c.detail)
    if md.exact_dims is not None and md.exact_Lambda is not None:
        ex = global_dim_check_exact(md)
        rep.add("exact global dimension", ex.passed, 0.0 if ex.passed else None,
                detail=f"sum dims^2 = {ex.sum_squares}, Lambda^2 = {ex.Lambda_squared}")
    rep.results["rank"] = md.rank
    rep.results["charge_conjugation"] = list(res.charge_conjugation) if res.charge_conjugation else None
    rep.results["central_charge_mod_8"] = res.central_charge
    return rep


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fusionkit", description="Fusion ring, module and Haagerup-equation checks.")
    p.add_argument("--version", action="version", version=f"fusionkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--report", help="write a JSON report to this path ('-' for stdout)")
        sp.add_argument("--no-timing", action="store_true", help="omit execution details so reports are reproducible")
        sp.add_argument("--quiet", action="store_true", help="suppress the human-readable table")

    sp = sub.add_parser("verify-rings", help="check the fusion ring axioms and dimensions")
    sp.add_argument("--ring", choices=BUILTIN_NAMES)
    sp.add_argument("--file", help="ring JSON file instead of the builtin rings")
    sp.add_argument("--tol", type=float, default=1e-10)
    common(sp)
    sp.set_defaults(func=cmd_verify_rings)

    sp = sub.add_parser("verify-modules", help="check the fusion module axioms and print internal ends")
    sp.add_argument("--module", help="builtin module name or module JSON file")
    common(sp)
    sp.set_defaults(func=cmd_verify_modules)

    sp = sub.add_parser("dual-graph", help="enumerate dual fusion graphs from a module")
    sp.add_argument("--module")
    sp.add_argument("--kappa", help="basis element (default: all)")
    sp.add_argument("--gram", help="factor this JSON matrix (or file) directly")
    sp.add_argument("--max-cols", type=int, default=None)
    sp.add_argument("--jobs", type=int, default=1)
    common(sp)
    sp.set_defaults(func=cmd_dual_graph)

    sp = sub.add_parser("graph-pair", help="compare path counts of a pair of bipartite graphs")
    sp.add_argument("--pair", default="theta1_42", help="builtin pair name or JSON file")
    sp.add_argument("--swap", nargs=2, metavar="VERTEX", help="pair two upper vertices with each other")
    common(sp)
    sp.set_defaults(func=cmd_graph_pair)

    sp = sub.add_parser("verify-gh", help="evaluate the generalized Haagerup equations on a solution")
    sp.add_argument("--solution", help="solution JSON file (default: shipped Z4xZ2 solution)")
    sp.add_argument("--equations", default="all",
                    help="comma list of families (e1..e10, e14, eq14, eq15), 'all' or 'every'")
    sp.add_argument("--tol", type=float, default=None, help="default 1e-9 (double) or 1e-25 (extended)")
    sp.add_argument("--precision", default="double", help="double, extended or a bit count")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--backend", choices=("compiled", "python"), default=None)
    common(sp)
    sp.set_defaults(func=cmd_verify_gh)

    sp = sub.add_parser("deequivariantize", help="quotient a generalized Haagerup ring by an order-2 invertible")
    sp.add_argument("--group", required=True, help="cyclic orders, e.g. 4,2")
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--z", required=True, help="element of order 2, e.g. 0,1")
    sp.add_argument("--compare", help="builtin ring name or ring file to test for isomorphism")
    sp.add_argument("--output", help="write the resulting ring JSON here")
    common(sp)
    sp.set_defaults(func=cmd_deequivariantize)

    sp = sub.add_parser("verify-modular", help="check S, T and dimensions of modular data")
    sp.add_argument("--data", help="modular data JSON file (default: shipped AH double)")
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--verlinde-tol", type=float, default=1e-6)
    common(sp)
    sp.set_defaults(func=cmd_verify_modular)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        rep = args.func(args)
    except (InputError, RingStructureError, SolutionError, ModularDataError, MatrixError,
            FileNotFoundError, json.JSONDecodeError, ValueError, KeyError) as e:
        print(f"fusionkit {args.command}: error: {e}", file=sys.stderr)
        return EXIT_INPUT
    rep.execution["wall_seconds"] = time.perf_counter() - t0
    if not args.quiet:
        print(rep.render())
    if args.report:
        text = dump_report(rep, args.report, timing=not args.no_timing)
        if args.report == "-":
            sys.stdout.write(text)
    return EXIT_OK if rep.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
