from __future__ import annotations

import itertools
import json
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fusionkit.groups import FiniteAbelianGroup
from fusionkit.izumi import (
    ALL_FAMILIES,
    FAMILIES,
    GHSolution,
    SolutionError,
    build_ah_solution,
    builtin_solution_path,
    check_qsystem_all_g,
    check_solution,
    extend_A_by_e5,
    extend_epsilon,
    instance_count,
    load_recipe,
    load_solution,
    perturb,
    resolve_families,
    save_solution,
    solution_from_json,
)
from fusionkit.numeric import D, DOUBLE, EXTENDED, qi_to_float

from oracles import gh_residuals, instance_counts

d = qi_to_float(D)
G = FiniteAbelianGroup((4, 2))
SIGN_LABELS = ("(1,0)", "(0,1)", "(1,1)")


@pytest.fixture(scope="module")
def sol():
    return build_ah_solution()


@pytest.fixture(scope="module")
def report(sol):
    return check_solution(sol)


def _ix(a, b):
    return G.index((a, b))


# ---------------------------------------------------------------------------
# eps and A construction


def test_eps_examples(sol):
    for a, b in itertools.product(range(4), range(2)):
        assert sol.eps[_ix(2, 0), _ix(a, b)] == (-1) ** b
        assert sol.eps[_ix(0, 1), _ix(a, b)] == 1
        assert sol.eps[0, _ix(a, b)] == 1


def test_eps_is_bicharacter_on_even_part(sol):
    # on {g : 2g = 0} the chain law reduces to eps_{h+k} = eps_h eps_k
    two_torsion = [g for g in range(G.order) if G.double(g) == 0]
    assert [G.labels[g] for g in two_torsion] == ["(0,0)", "(2,0)", "(0,1)", "(2,1)"]
    for h, k in itertools.product(two_torsion, repeat=2):
        for g in range(G.order):
            assert sol.eps[G.add(h, k), g] == sol.eps[h, g] * sol.eps[k, g]


def test_trivial_generators_give_trivial_eps():
    eps = extend_epsilon(G, {_ix(1, 0): [1] * 8, _ix(0, 1): [1] * 8})
    assert (eps == 1).all()


def test_inconsistent_generators_are_rejected():
    with pytest.raises(SolutionError, match="inconsistent|cocycle"):
        extend_epsilon(G, {_ix(1, 0): [1] * 8, _ix(0, 1): [-1] + [1] * 7})
    with pytest.raises(SolutionError):
        extend_epsilon(G, {_ix(1, 0): [1] * 7})
    with pytest.raises(SolutionError, match="generate"):
        extend_epsilon(G, {_ix(2, 0): [1] * 8})


def test_extend_A_zero_and_signs(sol):
    eps = sol.eps
    zero = [[0.0] * 8 for _ in range(8)]
    reps = {0: zero, _ix(1, 0): zero, _ix(0, 1): zero, _ix(1, 1): zero}
    assert all(v == 0 for mat in extend_A_by_e5(G, reps, eps) for row in mat for v in row)
    ones = [[1.0] * 8 for _ in range(8)]
    out = extend_A_by_e5(G, {0: ones, _ix(1, 0): ones, _ix(0, 1): ones, _ix(1, 1): ones}, eps)
    # A_{2h} is A_0 times the e5 sign
    h = _ix(1, 0)
    for p, q in itertools.product(range(8), repeat=2):
        s = eps[h, 0] * eps[h, p] * eps[h, q] * eps[h, G.add(p, q)]
        assert out[_ix(2, 0)][p][q] == s
    with pytest.raises(SolutionError, match="missing"):
        extend_A_by_e5(G, {0: ones}, eps)


def test_closed_form_entries(sol):
    assert sol.A[0][0][0] == pytest.approx((d - 2) / (d - 1), abs=1e-15)
    for h in range(1, 8):
        assert sol.A[0][h][0] == pytest.approx(-1 / (d - 1), abs=1e-15)
    assert sol.meta["source"] == "construction"


def test_e3_on_zero_solution_is_exactly_one_over_d():
    zero = [[[0j] * 8 for _ in range(8)] for _ in range(8)]
    s = GHSolution(G, np.ones((8, 8), dtype=int), [0] * 8, zero)
    assert check_solution(s, "e3").family("e3").max_residual == 1 / d


def test_solution_validation():
    with pytest.raises(SolutionError):
        GHSolution(G, np.zeros((8, 8)), [0] * 8, [[[0] * 8] * 8] * 8)
    with pytest.raises(SolutionError):
        GHSolution(G, np.ones((8, 8)), [0] * 7, [[[0] * 8] * 8] * 8)
    with pytest.raises(SolutionError):
        GHSolution(G, np.ones((8, 8)), [0] * 8, [[[0] * 8] * 8] * 7)


# ---------------------------------------------------------------------------
# verification


def test_shipped_solution_passes(report):
    assert report.passed
    assert report.total == 40600
    assert report.max_residual < 1e-13
    assert [f.name for f in report.families] == list(FAMILIES)
    assert report.enumeration == G.labels


def test_instance_counts_match_oracle():
    assert {f: instance_count(f, 8) for f in FAMILIES} == instance_counts(8)
    assert sum(instance_count(f, 8) for f in ALL_FAMILIES) == 45208
    assert instance_counts(8)["e10"] == 32768


def test_optional_families_pass(sol):
    rep = check_solution(sol, "every")
    assert rep.passed and rep.total == 45208


def test_oracle_agrees_on_true_solution(sol, report):
    ref = gh_residuals(sol.A_array(), sol.eps, [complex(z) for z in sol.eta], d, (4, 2))
    for name, r in ref.items():
        assert r < 1e-13
        assert report.family(name).max_residual == pytest.approx(r, abs=1e-14)


def test_oracle_agrees_on_mutant(sol):
    bad = perturb(sol, 3, 2, 5, 1e-2)
    rep = check_solution(bad)
    ref = gh_residuals(bad.A_array(), bad.eps, [complex(z) for z in bad.eta], d, (4, 2))
    for name, r in ref.items():
        assert rep.family(name).max_residual == pytest.approx(r, rel=1e-9, abs=1e-14)


def test_parallel_is_deterministic(sol, report):
    rep = check_solution(sol, jobs=3)
    for a, b in zip(report.families, rep.families):
        assert (a.max_residual, a.argmax, a.count) == (b.max_residual, b.argmax, b.count)


@pytest.mark.parametrize("backend", ["python", "compiled"])
def test_backends_agree_on_e10(sol, backend):
    from fusionkit import _kernels
    if backend == "compiled" and not _kernels.compiled_available():
        pytest.skip("compiled kernels not built")
    bad = perturb(sol, 1, 0, 0, 1e-3)
    a = check_solution(bad, "e10", backend=backend).family("e10")
    b = check_solution(bad, "e10", backend="python").family("e10")
    assert a.argmax == b.argmax
    assert a.max_residual == pytest.approx(b.max_residual, rel=1e-12)


@given(st.floats(1e-16, 1e-2), st.floats(1e-16, 1e-2))
@settings(max_examples=20, deadline=None)
def test_pass_is_monotone_in_tol(t1, t2):
    lo, hi = sorted((t1, t2))
    s = _cached_mutant()
    if check_solution(s, "e3,e14", tol=lo).passed:
        assert check_solution(s, "e3,e14", tol=hi).passed


_MUTANT = []


def _cached_mutant():
    if not _MUTANT:
        _MUTANT.append(perturb(build_ah_solution(), 0, 0, 0, 1e-6))
    return _MUTANT[0]


def test_family_selection():
    assert resolve_families("all") == list(FAMILIES)
    assert resolve_families("e10,e3,e3") == ["e3", "e10"]
    assert resolve_families(["every"]) == list(ALL_FAMILIES)
    with pytest.raises(ValueError):
        resolve_families("e7")


def test_locus_names_free_variables(sol):
    rep = check_solution(perturb(sol, 0, 0, 0, 1e-3), "e14")
    f = rep.family("e14")
    assert not f.passed
    assert f.locus(G) == {"form": 0, "g": "(0,0)", "h": "(0,0)"}


# ---------------------------------------------------------------------------
# mutations


ALL_SIGN_FLIPS = [(lab, i, j) for lab in SIGN_LABELS for i in range(8) for j in range(8)]


def test_random_mutations_are_detected(sol):
    rng = random.Random(20240611)
    for _ in range(30):
        flip = rng.choice(ALL_SIGN_FLIPS)
        rep = check_solution(build_ah_solution(sign_flips=[flip]))
        assert rep.max_residual > 1e-4, flip
    for _ in range(30):
        g, h, k = (rng.randrange(8) for _ in range(3))
        delta = rng.choice([1e-3, -1e-3, 1e-3j, -1e-3j])
        rep = check_solution(perturb(sol, g, h, k, delta))
        assert rep.max_residual > 1e-4, (g, h, k, delta)


def test_every_sign_flip_is_detected_by_cheap_families():
    worst = min(check_solution(build_ah_solution(sign_flips=[f]), "e4,e6,e8,e9").max_residual
                for f in ALL_SIGN_FLIPS)
    assert worst > 1e-4


def test_every_entry_perturbation_is_detected(sol):
    worst = np.inf
    for g, h, k in itertools.product(range(8), repeat=3):
        for delta in (1e-3, 1e-3j):
            r = check_solution(perturb(sol, g, h, k, delta), "e3,e4,e6,e14").max_residual
            worst = min(worst, r)
    assert worst > 1e-4


# ---------------------------------------------------------------------------
# ambiguities in the construction


def test_branch_choices():
    res = {}
    for bf, bg in itertools.product(("principal", "negated"), repeat=2):
        res[bf, bg] = check_solution(build_ah_solution(branch_f=bf, branch_g=bg), "e4,e10").passed
    assert res == {("principal", "principal"): True, ("negated", "negated"): True,
                   ("principal", "negated"): False, ("negated", "principal"): False}


def test_both_index_conventions_pass():
    assert check_solution(build_ah_solution(index_convention="row=k")).passed
    with pytest.raises(SolutionError):
        build_ah_solution(index_convention="diag")


def test_some_other_orderings_fail():
    default = load_recipe()["matrix_ordering"]
    rng = random.Random(5)
    for _ in range(10):
        rest = default[1:]
        rng.shuffle(rest)
        order = [default[0]] + rest
        if order == default:
            continue
        assert not check_solution(build_ah_solution(ordering=order), "e4,e6,e8,e9,e14").passed
    with pytest.raises(SolutionError):
        build_ah_solution(ordering=default[:-1] + default[:1])


# ---------------------------------------------------------------------------
# files and precision


def test_builtin_tables_match_construction(sol):
    stored = load_solution()
    assert stored.meta["source"] == "tables"
    assert np.array_equal(stored.eps, sol.eps)
    assert np.max(np.abs(stored.A_array() - sol.A_array())) < 1e-15
    assert check_solution(stored).passed


def test_round_trip(tmp_path, sol):
    p = tmp_path / "s.json"
    save_solution(sol, p)
    back = load_solution(p)
    assert np.array_equal(back.A_array(), sol.A_array())
    assert back.eta_exp == sol.eta_exp
    data = json.loads(p.read_text(encoding="utf-8"))
    data["format"] = "other"
    with pytest.raises(SolutionError):
        solution_from_json(data)


def test_extended_precision_from_file():
    s = load_solution(builtin_solution_path(), precision=EXTENDED)
    assert s.meta["source"] == "construction"
    rep = check_solution(s, "e3,e4,e6,e8,e9,e14", tol=1e-25)
    assert rep.passed and rep.max_residual < 1e-30


def test_qsystem_per_g(sol):
    rows = check_qsystem_all_g(sol)
    assert len(rows) == 8 and all(r.passed for r in rows)
    rows = check_qsystem_all_g(perturb(sol, 0, 0, 0, 1e-3))
    assert [r.g for r in rows if not r.passed] == ["(0,0)"]
