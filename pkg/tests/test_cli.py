from __future__ import annotations

import json
import os
import shutil
import subprocess
import sys

import jsonschema
import pytest

from fusionkit.cli import EXIT_FAIL, EXIT_INPUT, EXIT_OK, main
from fusionkit.fusionring import builtin_ring, data_path, ring_to_json

with open(data_path("schema", "report.schema.json"), encoding="utf-8") as fh:
    SCHEMA = json.load(fh)


def run(capsys, *argv):
    code = main(list(argv) + ["--report", "-", "--no-timing", "--quiet"])
    out = capsys.readouterr().out
    report = json.loads(out) if out.strip() else None
    if report is not None:
        jsonschema.validate(report, SCHEMA)
    return code, report


@pytest.mark.parametrize("argv", [
    ["verify-rings"],
    ["verify-modules"],
    ["dual-graph", "--module", "L4_AH2", "--kappa", "θ1_42"],
    ["graph-pair"],
    ["verify-gh"],
    ["deequivariantize", "--group", "4,2", "--z", "0,1", "--compare", "AH4"],
    ["verify-modular"],
])
def test_commands_pass(capsys, argv):
    code, rep = run(capsys, *argv)
    assert code == EXIT_OK
    assert rep["passed"] and rep["command"] == argv[0]
    assert "execution" not in rep


def test_verify_gh_report(capsys):
    _, rep = run(capsys, "verify-gh")
    assert rep["results"]["total_instances"] == 40600
    assert rep["results"]["max_residual"] < 1e-9
    assert rep["config"]["enumeration"][:2] == ["(0,0)", "(1,0)"]
    assert all(q["passed"] for q in rep["results"]["qsystem"])


def test_dual_graph_report(capsys):
    _, rep = run(capsys, "dual-graph", "--module", "L4_AH2", "--kappa", "θ1_42")
    assert len(rep["results"]["factorizations"]["θ1_42"]) == 1
    assert rep["results"]["dual_dimension_classes"] == ["{1, 1, 1, 1, d, d, d, d}"]
    code, rep = run(capsys, "dual-graph", "--gram", "[[1,2],[2,1]]")
    assert code == EXIT_FAIL and rep["checks"][0]["detail"]


def test_swap_fails_with_locus(capsys):
    code, rep = run(capsys, "graph-pair", "--swap", "α1ρ", "α3ρ")
    assert code == EXIT_FAIL
    bad = [c for c in rep["checks"] if not c["passed"]]
    assert bad and all(c["locus"] for c in bad)
    assert any({"θ2_42", "θ3_42"} <= set(map(str, _flatten(c["locus"]))) for c in bad)


def _flatten(x):
    if isinstance(x, dict):
        for v in x.values():
            yield from _flatten(v)
    elif isinstance(x, (list, tuple)):
        for v in x:
            yield from _flatten(v)
    else:
        yield x


def test_failing_gh_names_family_and_locus(capsys, tmp_path):
    from fusionkit.izumi import build_ah_solution, perturb, save_solution
    p = tmp_path / "bad.json"
    save_solution(perturb(build_ah_solution(), 0, 0, 0, 1e-3), p)
    code, rep = run(capsys, "verify-gh", "--solution", str(p))
    assert code == EXIT_FAIL
    e14 = next(c for c in rep["checks"] if c["name"] == "e14")
    assert not e14["passed"] and e14["locus"] == {"form": 0, "g": "(0,0)", "h": "(0,0)"}


def test_corrupted_ring_file(capsys, tmp_path):
    ring = ring_to_json(builtin_ring("AH1"))
    ring["N"][2][3][4] += 1
    p = tmp_path / "r.json"
    p.write_text(json.dumps(ring, ensure_ascii=False), encoding="utf-8")
    code, rep = run(capsys, "verify-rings", "--file", str(p))
    assert code == EXIT_FAIL
    assert any(not c["passed"] and c["locus"] for c in rep["checks"])
    # a products table whose duals cannot be inferred is an input error
    with open(data_path("rings", "AH1.json"), encoding="utf-8") as fh:
        raw = json.load(fh)
    key = next(iter(raw["products"]))
    raw["products"][key] += "+1"
    p.write_text(json.dumps(raw, ensure_ascii=False), encoding="utf-8")
    assert main(["verify-rings", "--file", str(p), "--quiet"]) == EXIT_INPUT


@pytest.mark.parametrize("argv", [
    ["verify-gh", "--solution", "/nonexistent.json"],
    ["verify-gh", "--equations", "e7"],
    ["verify-gh", "--precision", "quad"],
    ["dual-graph", "--gram", "[[1,2],[3,1]]"],
    ["dual-graph"],
    ["deequivariantize", "--group", "4,2", "--z", "1,0"],
    ["verify-modules", "--module", "nope"],
    ["graph-pair", "--swap", "x", "y"],
])
def test_input_errors(capsys, argv):
    assert main(argv) == EXIT_INPUT
    assert "error" in capsys.readouterr().err


def test_reports_are_byte_identical(tmp_path):
    paths = []
    for extra in (["--jobs", "1"], ["--jobs", "4"], ["--backend", "python"]):
        p = tmp_path / f"r{len(paths)}.json"
        assert main(["verify-gh", *extra, "--no-timing", "--quiet", "--report", str(p)]) == EXIT_OK
        paths.append(p)
    texts = {p.read_bytes() for p in paths}
    assert len(texts) == 1
    p = tmp_path / "timed.json"
    main(["verify-gh", "--quiet", "--report", str(p)])
    assert "execution" in json.loads(p.read_text(encoding="utf-8"))


def test_data_directory_override(tmp_path):
    root = tmp_path / "data"
    shutil.copytree(data_path(), root)
    with open(root / "rings" / "AH2.json", encoding="utf-8") as fh:
        ring = json.load(fh)
    ring["dims"] = ["1"] * len(ring["dims"])
    (root / "rings" / "AH2.json").write_text(json.dumps(ring, ensure_ascii=False), encoding="utf-8")
    env = dict(os.environ, FUSIONKIT_DATA=str(root))
    out = subprocess.run([sys.executable, "-m", "fusionkit.cli", "verify-rings", "--ring", "AH2"],
                         capture_output=True, text=True, env=env)
    assert out.returncode in (EXIT_FAIL, EXIT_INPUT)


def test_human_output(capsys):
    assert main(["verify-modular"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "PASS  unitarity" in out and out.strip().endswith("checks passed")
