import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from abdirac.errors import BadSpec, DegenerateError, DomainError, NonIntegrable
from abdirac.grid import RadialProfile, default_grid, make_power_exp
from abdirac.hardy import (
    near_optimizer_sequence,
    pauli_constant,
    pauli_from_wirtinger,
    pauli_near_optimizer,
    probe_profile,
    probe_set,
    rayleigh_wirtinger_mode,
    special_case_checks,
    special_case_report_json,
    wirtinger_constant,
)

_GRID = default_grid(0.4)


@pytest.mark.parametrize("beta, value, ell", [(0.0, 0.0, 0), (0.5, 1 / 16, 0), (1.2, 0.01, 1),
                                               (-0.7, 0.0225, -1), (2.5, 1 / 16, 2)])
def test_wirtinger_examples(beta, value, ell):
    for variant in ("zbar", "z"):
        C = wirtinger_constant(beta, variant)
        assert C.value == pytest.approx(value, abs=1e-15)
        assert C.attaining_mode == ell
        assert C.sharp


def test_wirtinger_bad_variant():
    with pytest.raises(BadSpec):
        wirtinger_constant(0.3, "w")


def test_nonfinite_input():
    with pytest.raises(DomainError):
        pauli_constant(float("nan"), 0.0)


@pytest.mark.parametrize("a, zeta, value, branch", [(0.0, 0.0, 0.0, "-"), (0.25, 0.0, 0.0625, "-"),
                                                     (0.3, 0.5, 0.0025, "-"), (0.3, -0.5, 0.0025, "+")])
def test_pauli_examples(a, zeta, value, branch):
    C = pauli_constant(a, zeta)
    assert C.value == pytest.approx(value, abs=1e-15)
    assert C.branch == branch


dyadic = st.integers(-2 ** 24, 2 ** 24).map(lambda k: k / 2 ** 20)
fractions = st.fractions(min_value=-20, max_value=20, max_denominator=10 ** 6)
reals = st.floats(min_value=-20, max_value=20)


@settings(max_examples=100)
@given(dyadic, dyadic)
def test_pauli_periodic_dyadic(a, zeta):
    # a + 1 is exactly representable for these inputs
    assert pauli_constant(a + 1, zeta).value == pauli_constant(a, zeta).value


@settings(max_examples=100)
@given(fractions, fractions)
def test_pauli_periodic_fraction(a, zeta):
    assert pauli_constant(a + 1, zeta).value == pauli_constant(a, zeta).value


@settings(max_examples=100)
@given(reals, reals)
def test_pauli_reflection(a, zeta):
    assert pauli_constant(-a, zeta).value == pauli_constant(a, zeta).value


@settings(max_examples=100)
@given(reals, reals)
def test_pauli_from_wirtinger(a, zeta):
    assert pauli_from_wirtinger(a, zeta) == pauli_constant(a, zeta).value


@given(reals)
def test_wirtinger_variants_agree(beta):
    assert wirtinger_constant(beta, "zbar") == wirtinger_constant(beta, "z")
    assert wirtinger_constant(beta).value <= 1 / 16


# -- Rayleigh quotients ------------------------------------------------------

@given(st.floats(min_value=-1.5, max_value=1.5), st.integers(-2, 2),
       st.sampled_from(["zbar", "z"]), st.floats(min_value=0.05, max_value=1.5),
       st.floats(min_value=0.4, max_value=2.0), st.floats(min_value=0.0, max_value=2.0))
def test_rayleigh_above_constant(beta, ell, variant, dA, B, g1):
    A = (beta if variant == "zbar" else -beta) + dA
    p = probe_profile(_GRID, A, B, g1, 0.1, ell)
    q = rayleigh_wirtinger_mode(p, beta, ell, variant)
    assert q >= (beta - ell) ** 2 - 1e-8
    assert q >= 4 * wirtinger_constant(beta).value - 1e-8


@pytest.mark.parametrize("beta", [0.3, 0.5, 1.2, 2.4])
def test_rayleigh_power_exp_example(beta):
    # rho^beta e^{-rho} is integrable against these weights only in the z variant with beta > 0
    ell = round(beta)
    p = make_power_exp(beta, 1.0, _GRID)
    assert rayleigh_wirtinger_mode(p, beta, ell, "z") >= (beta - ell) ** 2


def test_rayleigh_zbar_power_exp_not_integrable():
    with pytest.raises(NonIntegrable):
        rayleigh_wirtinger_mode(make_power_exp(1.2, 1.0, _GRID), 1.2, 1, "zbar")


def test_rayleigh_zero_profile():
    z = RadialProfile(_GRID, np.zeros(_GRID.size), None, 1.0, np.zeros(_GRID.size))
    with pytest.raises(DegenerateError):
        rayleigh_wirtinger_mode(z, 0.3, 0)


@pytest.mark.parametrize("beta, ell, variant", [(0.3, 0, "zbar"), (1.2, 1, "zbar"), (0.3, 1, "zbar"),
                                                 (-0.45, 0, "z"), (0.7, 1, "z")])
def test_near_optimizer_sharpness(beta, ell, variant):
    seq = near_optimizer_sequence(beta, ell, variant)
    C = (beta - ell) ** 2
    assert seq.constant == pytest.approx(C)
    assert all(x > y for x, y in zip(seq.quotients, seq.quotients[1:]))
    # a cutoff supported on a log-length T costs at least (pi/T)^2 over the constant
    T = 1.5 * math.log(seq.widths[-1])
    assert seq.quotients[-1] >= C + (math.pi / T) ** 2
    # the excess scales exactly like 1/(log W)^2, so the extrapolation is sharp
    assert abs(seq.extrapolated - C) <= 0.02 * C
    assert seq.relative_gap < 1e-8
    assert seq.as_dict()["relative_gap"] == seq.relative_gap


def test_near_optimizer_excess_scaling():
    seq = near_optimizer_sequence(0.3, 0, "zbar", widths=(1e2, 1e3, 1e4, 1e6))
    excess = [(q - seq.constant) * math.log(W) ** 2 for W, q in zip(seq.widths, seq.quotients)]
    assert max(excess) == pytest.approx(min(excess), rel=1e-8)


def test_near_optimizer_needs_two_widths():
    with pytest.raises(BadSpec):
        near_optimizer_sequence(0.3, 0, widths=(1e3,))


@pytest.mark.parametrize("a, zeta", [(0.3, 0.5), (0.25, 0.0), (0.1, 0.4), (0.45, 0.2)])
def test_pauli_near_optimizer(a, zeta):
    seq = pauli_near_optimizer(a, zeta)
    C = pauli_constant(a, zeta).value
    assert seq.constant == pytest.approx(C, abs=1e-15)
    assert seq.quotients[-1] >= C
    assert abs(seq.extrapolated - C) <= 0.02 * C
    assert seq.relative_gap < 1e-8


def test_probe_set_deterministic():
    a = probe_set(0.0, 3, seed=5)
    b = probe_set(0.0, 3, seed=5)
    assert len(a) == 15
    assert all(x[0] == y[0] and np.array_equal(x[1].values, y[1].values) for x, y in zip(a, b))
    assert {ell for ell, _ in a} == {-2, -1, 0, 1, 2}


def test_probe_profile_derivative():
    p = probe_profile(_GRID, 0.4, 0.8, 1.0, 0.3)
    fd = _GRID.d_drho(p.values)
    m = (_GRID.nodes > 1e-4) & (_GRID.nodes < 40)
    assert np.max(np.abs(fd[m] - p.derivative[m])) <= 1e-7 * np.max(np.abs(p.derivative[m]))


# -- special cases -------------------------------------------------------------

@pytest.mark.parametrize("nu", [0.1, 0.3, 0.45])
def test_special_cases(nu):
    reports = special_case_checks(nu)
    names = [r.case for r in reports]
    assert names == ["inhomogeneous-nu-half", "inhomogeneous-critical", "homogeneous-scaled"]
    for r in reports:
        assert r.n_trials >= 50
        assert r.passed
        assert r.min_slack > 0
        assert abs(r.sharpness_extrapolation) < 1e-8
    data = json.loads(special_case_report_json(reports))
    assert set(data[0]) == {"case", "n_trials", "min_slack", "sharpness_extrapolation"}


@pytest.mark.parametrize("nu", [0.0, 0.5, 0.7])
def test_special_cases_domain(nu):
    with pytest.raises(DomainError):
        special_case_checks(nu)
