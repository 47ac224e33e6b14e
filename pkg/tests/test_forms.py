import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from abdirac.errors import NonIntegrable
from abdirac.forms import (
    JForm,
    JPositronForm,
    eval_J,
    eval_J_mode,
    eval_J_positron_mode,
    eval_pauli_form,
    eval_Q_mode,
    eval_reduced_form,
)
from abdirac.grid import RadialProfile, default_grid, make_eta_star, make_phi_star, make_power_exp
from abdirac.model import CouplingParams, ground_state_energy, lemma_square_mu
from abdirac.variational import make_lemma_profile

# quadrature oracles (mpmath, 18 digits)
J_ETA_03_0_MU0_L0 = 3.97432587564728336
J_ETA_03_0_MU0_L1 = 19.8224009960724232
JPOS_HALF_02_01 = 1.63597783166158971     # rho^0.5 e^-rho, nu=0.2, a=0.1, lam=-0.5, ell=1
PAULI_02_01 = 0.365753551573036115        # rho^-0.1 e^-0.5rho, a=0.1, ell=0

EQUALITY_PAIRS = [(0.3, 0.0), (0.2, 0.1), (0.45, 0.04), (0.1, 0.3), (0.3, 0.2)]


def _grid_for(params):
    return default_grid(params.nu / params.c)


@pytest.mark.parametrize("nu, a", EQUALITY_PAIRS)
def test_J_vanishes_at_ground_energy(nu, a):
    p = CouplingParams(nu, a)
    lam = ground_state_energy(p)
    form = JForm(make_eta_star(p, _grid_for(p)), p)
    assert abs(form(lam).total) <= 1e-10 * form.mass_scale(lam)


@pytest.mark.parametrize("nu, a", EQUALITY_PAIRS)
def test_Q_vanishes_at_phi_star(nu, a):
    p = CouplingParams(nu, a)
    lam = ground_state_energy(p)
    g = _grid_for(p)
    scale = JForm(make_eta_star(p, g), p).mass_scale(lam)
    assert abs(eval_Q_mode(make_phi_star(p, g), p, lam).total) <= 1e-10 * scale


def test_J_oracles():
    p = CouplingParams(0.3, 0.0)
    eta = make_eta_star(p, _grid_for(p))
    assert eval_J_mode(eta, p, 0.0, 0).total == pytest.approx(J_ETA_03_0_MU0_L0, rel=1e-10)
    assert eval_J_mode(eta, p, 0.0, 1).total == pytest.approx(J_ETA_03_0_MU0_L1, rel=1e-10)


def test_positron_oracle():
    p = CouplingParams(0.2, 0.1)
    prof = make_power_exp(0.5, 1.0, default_grid(1.0))
    assert eval_J_positron_mode(prof, p, -0.5, 1).total == pytest.approx(JPOS_HALF_02_01, rel=1e-10)


def test_pauli_oracle():
    p = CouplingParams(0.2, 0.1)
    phi = make_power_exp(-0.1, 0.5, default_grid(0.5))
    assert eval_pauli_form(phi, p, 0) == pytest.approx(PAULI_02_01, rel=1e-10)


def test_breakdown_consistency():
    p = CouplingParams(0.2, 0.1)
    b = eval_J_mode(make_power_exp(0.3, 0.7, default_grid(0.7)), p, 0.2, 1)
    assert b.kinetic >= 0
    assert b.total == pytest.approx(b.kinetic + b.mass_minus_coulomb, rel=1e-12)
    assert b.mode == 1
    assert '"mode": 1' in b.to_json()


def test_zero_profile():
    p = CouplingParams(0.2, 0.1)
    g = default_grid(1.0, N=200)
    z = RadialProfile(g, np.zeros(g.size), None, 1.0, np.zeros(g.size))
    assert eval_J_mode(z, p, 0.3).total == 0.0
    assert eval_J_positron_mode(z, p, 0.3).total == 0.0
    assert eval_reduced_form(z, p, 0.3) == 0.0


def test_single_mode_sum():
    p = CouplingParams(0.3, 0.1)
    prof = make_power_exp(0.2, 1.0, default_grid(1.0))
    assert eval_J({0: prof}, p, 0.4) == eval_J_mode(prof, p, 0.4).total


def test_modes_orthogonal():
    p = CouplingParams(0.3, 0.1)
    g = default_grid(0.5)
    p1 = make_power_exp(1.2, 0.9, g)
    vals = {}
    for base in (make_power_exp(0.1, 1.0, g), make_power_exp(0.4, 0.6, g)):
        js = [eval_J({0: base, 1: p1.scaled(t)}, p, 0.3) for t in (0.0, 1.0, 2.0)]
        # quadratic in t with vanishing linear part
        assert js[2] - js[0] == pytest.approx(4 * (js[1] - js[0]), rel=1e-12)
        vals[id(base)] = js[1] - js[0]
    a, b = vals.values()
    assert a == pytest.approx(b, rel=1e-12)


@pytest.mark.parametrize("ell", [1, 2, -1, -2])
def test_higher_modes_dominate(ell):
    p = CouplingParams(0.2, 0.1)
    prof = make_power_exp(0.6, 1.0, default_grid(1.0))
    assert eval_J_mode(prof, p, 0.5, ell).total >= eval_J_mode(prof, p, 0.5, 0).total


def test_Q_is_J_of_transform():
    p = CouplingParams(0.2, 0.1)
    eta = make_power_exp(0.3, 0.8, default_grid(0.8))
    phi = eta.times_power(-p.a)
    assert eval_Q_mode(phi, p, 0.4, 0) == eval_J_mode(phi.times_power(p.a), p, 0.4, 0)
    assert eval_Q_mode(phi, p, 0.4, 0).total == pytest.approx(eval_J_mode(eta, p, 0.4).total, rel=1e-13)


def test_Q_near_minus_one_finite():
    p = CouplingParams(0.2, 0.1)
    phi = make_power_exp(0.1, 1.0, default_grid(1.0))
    b = eval_Q_mode(phi, p, -1 + 1e-6)
    assert math.isfinite(b.total) and b.total > 0


@pytest.mark.parametrize("nu, a", [(0.3, 0.0), (0.2, 0.1), (0.45, 0.04), (0.1, 0.3)])
def test_reduced_form_equality(nu, a):
    p = CouplingParams(nu, a)
    phi = make_lemma_profile(p, default_grid(lemma_square_mu(p)))
    assert abs(eval_reduced_form(phi, p, ground_state_energy(p))) <= 1e-10


@pytest.mark.parametrize("lam", [-0.4, 0.3, 0.7])
def test_reduced_form_scaling(lam):
    p = CouplingParams(0.2, 0.1)
    A, B = 0.15, 0.8
    g = default_grid(B * min(1.0, 1.0 + lam))
    phi = make_power_exp(A, B, g)
    # eta(rho) = phi((1 + lam) rho)
    eta = make_power_exp(A, B * (1 + lam), g, amplitude=(1 + lam) ** A)
    J = eval_J_mode(eta, p, lam).total
    expected = (1 + lam) ** (1 - 2 * p.a) * J / (2 * math.pi)
    assert eval_reduced_form(phi, p, lam) == pytest.approx(expected, rel=1e-10)


def test_nonintegrable_profile():
    p = CouplingParams(0.2, 0.1)
    with pytest.raises(NonIntegrable):
        eval_J_mode(make_power_exp(-0.6, 1.0, default_grid(1.0)), p, 0.3)


def test_mu_below_minus_one_rejected():
    p = CouplingParams(0.2, 0.1)
    with pytest.raises(ValueError):
        eval_J_mode(make_power_exp(0.3, 1.0, default_grid(1.0)), p, -1.5)


# -- monotonicity properties -------------------------------------------------

_GRID = default_grid(0.2)
probe_exps = st.floats(min_value=0.0, max_value=2.0)
probe_rates = st.floats(min_value=0.3, max_value=3.0)
lams = st.lists(st.floats(min_value=-0.95, max_value=0.95), min_size=2, max_size=6)


@given(probe_exps, probe_rates, st.integers(-2, 2), lams,
       st.sampled_from([(0.3, 0.1), (0.2, 0.0), (0.45, 0.04)]))
def test_J_nonincreasing(A, B, ell, mus, pair):
    p = CouplingParams(*pair)
    form = JForm(make_power_exp(A, B, _GRID), p, ell)
    vals = [form(m).total for m in sorted(mus)]
    scale = max(abs(v) for v in vals)
    assert all(x >= y - 1e-10 * scale for x, y in zip(vals, vals[1:]))


@given(probe_exps, probe_rates, st.integers(-2, 2), lams,
       st.sampled_from([(0.3, 0.1), (0.2, 0.0), (0.45, 0.04)]))
def test_J_positron_nondecreasing(A, B, ell, lam_list, pair):
    p = CouplingParams(*pair)
    form = JPositronForm(make_power_exp(A, B, _GRID), p, ell)
    vals = [form(x).total for x in sorted(lam_list)]
    scale = max(abs(v) for v in vals)
    assert all(x <= y + 1e-10 * scale for x, y in zip(vals, vals[1:]))
