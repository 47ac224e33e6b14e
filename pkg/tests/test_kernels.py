import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from abdirac import _kernels_py, kernels

try:
    from abdirac import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

needs_compiled = pytest.mark.skipif(_compiled is None, reason="compiled kernels not built")


def _tridiag(d, e):
    return np.diag(d) + np.diag(e, 1) + np.diag(e, -1)


@settings(max_examples=50)
@given(st.integers(2, 40), st.integers(0, 2 ** 32 - 1))
def test_sturm_count_matches_eigvalsh(n, seed):
    rng = np.random.default_rng(seed)
    d = rng.normal(size=n)
    e = rng.normal(size=n - 1)
    expected = int(np.sum(np.linalg.eigvalsh(_tridiag(d, e)) < 0))
    assert _kernels_py.sturm_count(d, e) == expected
    assert kernels.sturm_count(d, e) == expected


def test_sturm_count_definite():
    d = np.full(10, 2.0)
    e = np.full(9, -1.0)
    assert kernels.sturm_count(d, e) == 0
    assert kernels.sturm_count(-d, -e) == 10


@needs_compiled
@settings(max_examples=50)
@given(st.integers(2, 60), st.integers(0, 2 ** 32 - 1))
def test_sturm_count_backends_agree(n, seed):
    rng = np.random.default_rng(seed)
    d = rng.normal(size=n)
    e = rng.normal(size=n - 1)
    assert _compiled.sturm_count(d, e) == _kernels_py.sturm_count(d, e)


def _rk4_args(k=5):
    lam = np.linspace(-0.5, 0.9, k)
    return (np.log(1e-5), 0.01, 900, np.ones(k), np.full(k, 0.3), lam, 0.3, 0.1, 0)


@needs_compiled
def test_rk4_final_backends_agree():
    args = _rk4_args()
    u1, v1 = _compiled.rk4_final(*args)
    u2, v2 = _kernels_py.rk4_final(*args)
    np.testing.assert_allclose(u1, u2, rtol=1e-12)
    np.testing.assert_allclose(v1, v2, rtol=1e-12)


@needs_compiled
def test_rk4_path_backends_agree():
    args = (np.log(1e-5), 0.01, 900, 1.0, 0.3, 0.6, 0.3, 0.1, 1)
    u1, v1 = _compiled.rk4_path(*args)
    u2, v2 = _kernels_py.rk4_path(*args)
    assert u1.shape == (901,)
    np.testing.assert_allclose(u1, u2, rtol=1e-12)
    np.testing.assert_allclose(v1, v2, rtol=1e-12)


def test_rk4_path_ends_at_final():
    t0, h, n, u0, v0, lam, nu, a, ell = _rk4_args(1)
    uf, vf = kernels.rk4_final(t0, h, n, u0, v0, lam, nu, a, ell)
    up, vp = kernels.rk4_path(t0, h, n, float(u0[0]), float(v0[0]), float(lam[0]), nu, a, ell)
    assert up[-1] == pytest.approx(uf[0], rel=1e-13)
    assert vp[-1] == pytest.approx(vf[0], rel=1e-13)


def test_rk4_fourth_order():
    # error against a fine reference drops ~16x per halving of the step
    t0, nu, a, lam = np.log(1e-3), 0.3, 0.1, np.array([0.5])
    span = np.log(5.0) - t0

    def run(n):
        return kernels.rk4_final(t0, span / n, n, np.ones(1), np.full(1, 0.2), lam, nu, a, 0)[0][0]

    ref = run(40000)
    errs = [abs(run(n) - ref) for n in (100, 200, 400)]
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.15)
    assert errs[1] / errs[2] == pytest.approx(16, rel=0.15)


def test_pure_python_switch():
    code = "from abdirac import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, ABDIRAC_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True).stdout.strip()
    assert out == "python"
    if _compiled is not None:
        assert kernels.BACKEND == "cython"


def test_eigenvalue_independent_of_backend():
    code = ("from abdirac.eigen import eigensolve_shooting, lowest_gap_eigenvalue_form;"
            "from abdirac.model import CouplingParams;"
            "p = CouplingParams(0.2, 0.1);"
            "print(repr(eigensolve_shooting(p, 1).lam), repr(lowest_gap_eigenvalue_form(p, 0).lam))")
    outs = []
    for flag in ("0", "1"):
        env = dict(os.environ, ABDIRAC_PURE_PYTHON=flag)
        outs.append([float(x) for x in subprocess.run([sys.executable, "-c", code], env=env,
                                                      capture_output=True, text=True,
                                                      check=True).stdout.split()])
    assert outs[0] == pytest.approx(outs[1], abs=1e-12)
