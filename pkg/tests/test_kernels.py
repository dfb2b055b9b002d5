from __future__ import annotations

import importlib.util
import os
import subprocess
import sys

import numpy as np
import pytest

from fusionkit import _kernels
from fusionkit.izumi import build_ah_solution
from fusionkit.numeric import D, qi_to_float


def _active_backend(env_value):
    env = dict(os.environ)
    env.pop("FUSIONKIT_PURE_PYTHON", None)
    if env_value is not None:
        env["FUSIONKIT_PURE_PYTHON"] = env_value
    out = subprocess.run([sys.executable, "-c", "from fusionkit import _kernels; print(_kernels.BACKEND)"],
                         capture_output=True, text=True, env=env, check=True)
    return out.stdout.strip()


def test_fallback_can_be_forced():
    assert _active_backend("1") == "python"


def test_default_prefers_compiled():
    built = importlib.util.find_spec("fusionkit._kernels._ckernels") is not None
    expected = "compiled" if built else "python"
    assert _active_backend(None) == expected


def test_backend_lookup():
    assert _kernels.backend("python").__name__.endswith("_pykernels")
    with pytest.raises(ValueError):
        _kernels.backend("gpu")


@pytest.mark.skipif(not _kernels.compiled_available(), reason="compiled kernels not built")
def test_e10_kernels_agree():
    sol = build_ah_solution()
    G = sol.group
    A = sol.A_array()
    A[2, 3, 4] += 1e-3
    args = (A, sol.eps, np.array([complex(z) for z in sol.eta]), G.add_table, G.neg_table,
            1.0 / qi_to_float(D), 0, sol.n)
    a = np.asarray(_kernels.backend("compiled").e10_residuals(*args))
    b = np.asarray(_kernels.backend("python").e10_residuals(*args))
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15)


@pytest.mark.skipif(not _kernels.compiled_available(), reason="compiled kernels not built")
def test_nnt_kernels_agree():
    rng = np.random.default_rng(3)
    for _ in range(40):
        N = rng.integers(0, 3, size=(4, rng.integers(1, 5)))
        M = (N @ N.T).astype(np.int64)
        t = int(np.trace(M))
        a = sorted(_kernels.backend("compiled").nnt_search(M, t))
        b = sorted(_kernels.backend("python").nnt_search(M, t))
        assert a == b
