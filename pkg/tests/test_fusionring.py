from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fusionkit.fusionring import (
    BUILTIN_NAMES,
    FusionRing,
    RingStructureError,
    builtin_ring,
    check_exact_dims,
    data_path,
    deequivariantize_gh,
    find_isomorphism,
    fp_dimensions,
    global_dimension,
    gh_ring,
    load_ring,
    mult,
    ring_from_json,
    ring_to_json,
    save_ring,
    validate_ring,
)
from fusionkit.groups import FiniteAbelianGroup, QuotientGroup, parse_element, parse_group
from fusionkit.numeric import D, QuadInt

d = float(D)

CLOSED_FORMS = {
    "AH1": [1, (d + 1) / 2, (d - 1) / 2, (3 * d - 1) / 2, d, (d + 3) / 2],
    "AH2": [1, 1] + [(d - 1) / 2] * 4 + [d, d, d + 1],
    "AH3": [1, 1] + [(d + 1) / 2] * 4 + [d, d, d - 1],
    "AH4": [1] * 4 + [d] * 4,
    "AH5": [1] * 4 + [d] * 4,
    "AH6": [1] * 4 + [d] * 4,
}


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_builtin_rings_satisfy_axioms(name):
    ring = builtin_ring(name)
    assert validate_ring(ring) == []


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_fp_dimensions_match_closed_forms(name):
    ring = builtin_ring(name)
    np.testing.assert_allclose(fp_dimensions(ring), CLOSED_FORMS[name], rtol=0, atol=1e-10)
    assert check_exact_dims(ring, ring.exact_dims) == []


def test_global_dimensions_agree():
    # all six rings share the global dimension 4(1 + d^2)
    g = {n: global_dimension(builtin_ring(n)) for n in BUILTIN_NAMES}
    assert set(g.values()) == {4 * (1 + D * D)}


def test_ah2_rules():
    r = builtin_ring("AH2")
    a, rho = r.basis("α"), r.basis("ρ")
    assert r.format(mult(r, a, a)) == "1"
    assert r.format(mult(r, mult(r, rho, a), rho)) == r.format(r.element("αρα+η"))
    assert r.dual[r.index("αρ")] == r.index("ρα")


def _ah3_with_original_mu_square():
    with open(data_path("rings", "AH3.json"), encoding="utf-8") as fh:
        data = json.load(fh)
    corr = data["_corrections"][0]
    data["products"][corr["entry"]] = corr["original"]
    return ring_from_json(data)


def test_original_mu_square_breaks_the_axioms():
    bad = _ah3_with_original_mu_square()
    viol = validate_ring(bad)
    assert viol, "the uncorrected table should fail"
    assert check_exact_dims(bad, builtin_ring("AH3").exact_dims)


def test_corrupted_entry_is_located(tmp_path):
    ring = builtin_ring("AH1")
    data = ring_to_json(ring)
    data["N"][2][3][4] += 1
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(data), encoding="utf-8")
    viol = validate_ring(load_ring(p))
    assert viol
    assert any(2 in v.where or 3 in v.where or 4 in v.where for v in viol)


def test_round_trip(tmp_path):
    ring = builtin_ring("AH2")
    p = tmp_path / "ah2.json"
    save_ring(ring, p)
    back = load_ring(p)
    assert np.array_equal(back.N, ring.N)
    assert back.labels == ring.labels and back.dual == ring.dual
    assert back.exact_dims == ring.exact_dims


def test_structural_errors():
    with pytest.raises(RingStructureError):
        FusionRing(("1", "x"), 0, (0, 1), np.zeros((2, 2, 3)))
    with pytest.raises(RingStructureError):
        FusionRing(("1", "x"), 0, (0, 0), np.zeros((2, 2, 2)))
    with pytest.raises(RingStructureError):
        FusionRing(("1", "x"), 0, (0, 1), -np.ones((2, 2, 2)))
    with pytest.raises(RingStructureError):
        builtin_ring("AH9")


# ---------------------------------------------------------------------------
# generalized Haagerup rings and quotients


group_orders = st.lists(st.integers(1, 4), min_size=1, max_size=2).filter(lambda o: np.prod(o) <= 8)


@given(group_orders, st.integers(0, 3))
def test_gh_rings_are_fusion_rings(orders, m):
    G = FiniteAbelianGroup(tuple(orders))
    ring = gh_ring(G, m)
    assert validate_ring(ring) == []
    n = G.order
    # every g rho is self-dual and d(rho)^2 = 1 + m n d(rho)
    assert all(ring.dual[n + g] == n + g for g in range(n))
    dims = fp_dimensions(ring)
    x = dims[n]
    assert x * x == pytest.approx(1 + m * n * x)


def test_gh_exact_dims_when_in_the_field():
    ring = gh_ring(FiniteAbelianGroup((4, 2)), 1)
    assert ring.exact_dims[-1] == D
    assert gh_ring(FiniteAbelianGroup((3,)), 1).exact_dims is None


def test_deequivariantization_gives_ah4():
    G = parse_group("4,2")
    res = deequivariantize_gh(G, 1, parse_element(G, "0,1"))
    assert validate_ring(res.ring) == []
    phi = find_isomorphism(res.ring, builtin_ring("AH4"))
    assert phi is not None
    ah4 = builtin_ring("AH4")
    assert np.array_equal(res.ring.N, ah4.N[np.ix_(phi, phi, phi)])


def test_toy_quotient():
    G = FiniteAbelianGroup((2,))
    res = deequivariantize_gh(G, 1, 1)
    ring = res.ring
    assert ring.rank == 2
    rho = ring.basis(1)
    assert list(mult(ring, rho, rho)) == [1, 2]


def test_klein_quotient_against_direct_construction():
    G = FiniteAbelianGroup((2, 2))
    res = deequivariantize_gh(G, 1, G.index((1, 1)))
    # quotient oracle: the cosets of <(1,1)> form a group of order 2
    assert res.quotient.order == 2
    assert find_isomorphism(res.ring, gh_ring(FiniteAbelianGroup((2,)), 2)) is not None


def test_quotient_requires_order_two():
    G = FiniteAbelianGroup((4,))
    with pytest.raises(RingStructureError):
        deequivariantize_gh(G, 1, 1)
    with pytest.raises(RingStructureError):
        deequivariantize_gh(G, 1, 0)


def test_non_isomorphic_rings():
    assert find_isomorphism(builtin_ring("AH4"), builtin_ring("AH5")) is None
    assert find_isomorphism(builtin_ring("AH1"), builtin_ring("AH2")) is None
    phi = find_isomorphism(builtin_ring("AH4"), builtin_ring("AH6"))
    assert phi is not None


def test_groups():
    G = FiniteAbelianGroup((4, 2))
    assert G.labels[:3] == ("(0,0)", "(1,0)", "(2,0)")
    assert G.add(G.index((3, 1)), G.index((1, 1))) == 0
    assert G.neg(G.index((1, 0))) == G.index((3, 0))
    Q = QuotientGroup(G, (G.index((0, 1)),))
    assert Q.order == 4
    assert Q.project(G.index((1, 1))) == Q.project(G.index((1, 0)))
    assert parse_group("Z4xZ2").orders == (4, 2)
