from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fusionkit.fusionmodule import (
    COLUMN,
    ROW,
    FusionModule,
    ModuleStructureError,
    builtin_module,
    builtin_module_names,
    internal_end,
    internal_end_dim,
    load_module,
    module_dims,
    regular_module,
    validate_module,
)
from fusionkit.fusionring import BUILTIN_NAMES, builtin_ring, data_path, gh_ring
from fusionkit.groups import FiniteAbelianGroup
from fusionkit.numeric import QuadInt, qi_to_float


def test_twelve_builtin_modules():
    names = builtin_module_names()
    assert len(names) == 12
    assert {builtin_module(n).ring.name for n in names} == {"AH1", "AH2", "AH3"}


@pytest.mark.parametrize("name", builtin_module_names())
def test_builtin_module_axioms(name):
    mod = builtin_module(name)
    assert mod.meta["order_verified"]
    assert validate_module(mod) == []
    dims = module_dims(mod)
    assert dims.max_defect < 1e-10
    # every internal end contains the unit once
    for k in range(mod.size):
        assert internal_end(mod, k)[mod.ring.unit] == 1


def test_m4_ah3_internal_ends():
    mod = builtin_module("M4_AH3")
    ring = mod.ring
    small = ring.element("1+β+μ+βμ")
    big = ring.element("1+β+4ξ+4βξ+4ξβ+4βξβ+7μ+7βμ+6ν")
    assert np.array_equal(internal_end(mod, 0), small)
    assert np.array_equal(internal_end(mod, 1), small)
    assert np.array_equal(internal_end(mod, 2), big)
    assert [internal_end_dim(mod, k) for k in range(3)] == [
        QuadInt.parse("2d+2"), QuadInt.parse("2d+2"), QuadInt.parse("28d+4")]


def test_module_dims_are_square_roots_of_end_dims():
    mod = builtin_module("M4_AH3")
    dims = module_dims(mod)
    for k in range(mod.size):
        e = dims.end_dims[k]
        assert dims.values[k] ** 2 == pytest.approx(qi_to_float(e), rel=1e-12)


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_regular_module(name):
    ring = builtin_ring(name)
    mod = regular_module(ring)
    assert validate_module(mod) == []
    np.testing.assert_allclose(module_dims(mod).values, ring.float_dims(), rtol=1e-10)


@given(st.sampled_from([(2,), (3,), (2, 2), (4,)]), st.integers(0, 2))
def test_regular_module_of_gh_rings(orders, m):
    mod = regular_module(gh_ring(FiniteAbelianGroup(orders), m))
    assert validate_module(mod) == []


def test_internal_end_of_regular_module_is_unit():
    ring = builtin_ring("AH1")
    mod = regular_module(ring)
    for k in range(ring.rank):
        e = internal_end(mod, k)
        # (X_k X_i, X_k) = (X_i, dual(X_k) X_k)
        assert np.array_equal(e, ring.N[ring.dual[k], k])


def _mutated(name, i, k, j, delta):
    with open(data_path("modules", f"{name}.json"), encoding="utf-8") as fh:
        data = json.load(fh)
    mod = load_module(data_path("modules", f"{name}.json"))
    act = mod.act.copy()
    act[i, k, j] += delta
    return FusionModule(mod.ring, mod.labels, act, name="mutant", order=mod.order)


@given(st.data())
def test_mutated_module_fails_with_locus(data):
    name = data.draw(st.sampled_from(builtin_module_names()))
    mod = builtin_module(name)
    i = data.draw(st.integers(0, mod.ring.rank - 1))
    k = data.draw(st.integers(0, mod.size - 1))
    j = data.draw(st.integers(0, mod.size - 1))
    delta = 1 if mod.act[i, k, j] == 0 else data.draw(st.sampled_from([-1, 1]))
    viol = validate_module(_mutated(name, i, k, j, delta))
    assert viol
    assert all(v.where for v in viol)


def test_column_order_is_detected():
    mod = builtin_module("M4_AH3")
    assert mod.order in (ROW, COLUMN)
    flipped = FusionModule(mod.ring, mod.labels, mod.act.transpose(0, 2, 1),
                           order=COLUMN if mod.order == ROW else ROW)
    assert validate_module(flipped) == []


def test_structure_errors(tmp_path):
    ring = builtin_ring("AH1")
    with pytest.raises(ModuleStructureError):
        FusionModule(ring, ("a",), np.zeros((2, 1, 1)))
    with pytest.raises(ModuleStructureError):
        FusionModule(ring, ("a",), -np.ones((ring.rank, 1, 1)))
    with pytest.raises(ModuleStructureError):
        builtin_module("nope")
    p = tmp_path / "m.json"
    p.write_text("{", encoding="utf-8")
    with pytest.raises(ModuleStructureError):
        load_module(p)
