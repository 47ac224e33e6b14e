import json
import math

import numpy as np
import pytest

from abdirac.eigen import (
    FORM,
    SHOOTING,
    assemble_mode_pencil,
    eigen_grid,
    eigensolve_shooting,
    eliminate_lower,
    lowest_gap_eigenvalue_form,
    ode_residual_check,
    shoot_radial_system,
)
from abdirac.errors import BadGrid, NoCrossing, NoModeEigenvalue
from abdirac.grid import default_grid, make_eta_star, make_phi_star, make_power_exp
from abdirac.model import (
    CouplingParams,
    eta_star_profile,
    ground_state_energy,
    lemma_square_mu,
    mode_energy,
)


@pytest.mark.parametrize("nu, a", [(0.3, 0.0), (0.2, 0.1), (0.45, 0.0333)])
@pytest.mark.parametrize("ell", [0, 1])
def test_both_methods_match_closed_form(nu, a, ell):
    p = CouplingParams(nu, a)
    exact = mode_energy(p, ell).lambda_ell
    f = lowest_gap_eigenvalue_form(p, ell)
    s = eigensolve_shooting(p, ell)
    assert f.method == FORM and s.method == SHOOTING
    assert f.lam == pytest.approx(exact, abs=1e-6)
    assert s.lam == pytest.approx(exact, abs=1e-6)
    assert len(f.estimates) == 2 and len(s.estimates) == 2


def test_form_extrapolation_helps():
    p = CouplingParams(0.45, 0.0)
    exact = ground_state_energy(p)
    r = lowest_gap_eigenvalue_form(p)
    assert abs(r.lam - exact) < abs(r.estimates[0] - exact)


def test_negative_mode():
    with pytest.raises(NoModeEigenvalue):
        lowest_gap_eigenvalue_form(CouplingParams(0.3, 0.1), -1)
    with pytest.raises(NoModeEigenvalue):
        eigensolve_shooting(CouplingParams(0.3, 0.1), -1)


def test_supercritical_mode_zero_has_no_crossing():
    p = CouplingParams(0.3, 0.35)
    with pytest.raises(NoCrossing):
        lowest_gap_eigenvalue_form(p, 0)
    # mode 1 stays subcritical: c_1 = 1.15 > nu
    r = eigensolve_shooting(p, 1)
    assert r.lam == pytest.approx(mode_energy(p, 1).lambda_ell, abs=1e-8)


def test_pencil_structure():
    p = CouplingParams(0.2, 0.1)
    g = eigen_grid(40.0, 400)
    pen = assemble_mode_pencil(p, 0, 0.5, g)
    d, e = pen.total
    assert d.size == g.size - 1 and e.size == d.size - 1
    assert pen.boundary["dirichlet"] == "rho_max"
    with pytest.raises(ValueError):
        assemble_mode_pencil(p, 0, 1.0, g)


def test_pencil_quad_converges_to_zero_at_optimum():
    p = CouplingParams(0.3, 0.0)
    lam = ground_state_energy(p)
    vals = []
    for N in (1000, 2000, 4000):
        g = eigen_grid(60.0, N)
        eta = make_eta_star(p, g)
        pen = assemble_mode_pencil(p, 0, lam, g)
        mass = pen.quad(eta.values) + 2 * math.pi * p.nu * float(
            np.dot(pen.coulomb[0], eta.values[:-1] ** 2))
        vals.append(abs(pen.quad(eta.values)) / mass)
    # second order in the mesh width
    assert vals[0] / vals[1] > 3.0 and vals[1] / vals[2] > 3.0
    assert vals[2] < 1e-5


def test_pencil_quad_sign():
    p = CouplingParams(0.3, 0.0)
    g = eigen_grid(60.0, 2000)
    eta = make_eta_star(p, g)
    assert assemble_mode_pencil(p, 0, 0.5, g).quad(eta.values) > 0
    assert assemble_mode_pencil(p, 0, 0.95, g).quad(eta.values) < 0


def test_shooting_defect_sign_change():
    p = CouplingParams(0.2, 0.1)
    lam = ground_state_energy(p)
    g = eigen_grid(80.0, 16)
    at = shoot_radial_system(p, 0, lam, g, n_steps=2000)
    lo = shoot_radial_system(p, 0, lam - 1e-3, g, n_steps=2000)
    hi = shoot_radial_system(p, 0, lam + 1e-3, g, n_steps=2000)
    assert abs(at) < 1e-12
    assert lo * hi < 0
    with pytest.raises(BadGrid):
        shoot_radial_system(p, 0, lam, g, match_point=100.0)
    with pytest.raises(ValueError):
        shoot_radial_system(p, 0, 1.0, g)


def test_shooting_profile_matches_closed_form():
    p = CouplingParams(0.2, 0.1)
    r = eigensolve_shooting(p, 0)
    u = r.upper_profile
    A, B = eta_star_profile(p)
    x = u.grid.nodes
    ref = x ** (A - p.a) * np.exp(-B * x)
    k = np.dot(u.values, ref) / np.dot(ref, ref)
    assert np.max(np.abs(u.values - k * ref)) <= 1e-8 * np.max(np.abs(k * ref))
    # lower = mu * upper for the ground state
    assert np.allclose(r.lower_profile.values, lemma_square_mu(p) * u.values,
                       atol=1e-8 * np.max(np.abs(u.values)))


def test_eliminate_lower_closed_form():
    p = CouplingParams(0.3, 0.1)
    g = default_grid(p.nu / p.c)
    phi = make_phi_star(p, g)
    v = eliminate_lower(phi, p, 0, ground_state_energy(p))
    assert v.mode == 1
    assert np.allclose(v.values, lemma_square_mu(p) * phi.values, rtol=1e-12)


def test_ode_residual_discriminates():
    p = CouplingParams(0.3, 0.1)
    lam = ground_state_energy(p)
    g = default_grid(p.nu / p.c, N=4000)
    eta = make_eta_star(p, g)
    good = ode_residual_check(eta, p, 0, lam)
    bad = ode_residual_check(eta, p, 0, lam - 0.01)
    assert good < 1e-8
    assert bad > 100 * good
    wrong = ode_residual_check(make_power_exp(0.0, 1.0, g), p, 0, lam)
    assert wrong > 1e-3


def test_form_eigenvector_residual():
    p = CouplingParams(0.3, 0.1)
    r = lowest_gap_eigenvalue_form(p)
    assert r.residual < 1e-8
    # eigenvector close to the closed-form upper component
    u = r.upper_profile
    x = u.grid.nodes
    A, B = eta_star_profile(p)
    ref = x ** (A - p.a) * np.exp(-B * x)
    w = u.grid.weights * x          # L^2(rho drho)
    k = np.dot(w * u.values, ref) / np.dot(w * ref, ref)
    err = math.sqrt(np.dot(w, (u.values - k * ref) ** 2) / np.dot(w, (k * ref) ** 2))
    assert err < 1e-4


def test_decay_rate_of_shooting_profile():
    # log-derivative at rho_max/2 approaches -kappa up to the power correction
    p = CouplingParams(0.2, 0.1)
    lam = ground_state_energy(p)
    r = eigensolve_shooting(p, 0, grid=eigen_grid(200.0, 16))
    u = r.upper_profile
    x = u.grid.nodes
    i = np.searchsorted(x, u.grid.rho_max / 2)
    logd = (np.log(abs(u.values[i + 1])) - np.log(abs(u.values[i - 1]))) / (x[i + 1] - x[i - 1])
    kappa = math.sqrt(1 - lam * lam)
    power = eta_star_profile(p)[0] - p.a
    assert logd == pytest.approx(-kappa + power / x[i], abs=1e-6)


def test_result_serialization():
    r = eigensolve_shooting(CouplingParams(0.3, 0.0), 0)
    d = json.loads(r.to_json())
    assert d["method"] == SHOOTING and d["ell"] == 0
    assert d["lambda"] == r.lam
    lines = r.profiles_csv().strip().split("\n")
    assert lines[0] == "rho,upper,lower"
    assert len(lines) == r.upper_profile.grid.size + 1
