"""Per-mode evaluation of the weighted quadratic forms.

Every form handled here has the shape

    pref * int [ |rho p' - ell p|^2 / (kappa rho + nu) + (m1 rho - m0) |p|^2 ] rho^w drho

and differs only in the coefficients:

==============  =======  ====  ==========  =================  ====  =====
form            pref     ell   kappa       m1                 m0    w
==============  =======  ====  ==========  =================  ====  =====
J (electron)    2 pi     ell   1 + mu      1 - mu             nu    -2a
J+ (positron)   2 pi     -ell  1 - lam     1 + lam            nu    +2a
reduced         1        0     1           (1-lam)/(1+lam)    nu    -2a
Pauli q         pi/2     ell   1 (nu=0)    0                  0     -2a
==============  =======  ====  ==========  =================  ====  =====

Near the origin the integrand is completed from the declared power law of
the profile.  When the kinetic and Coulomb parts are separately
non-integrable but cancel at leading order (weight exponent exactly -1), the
form is the closure from compactly supported functions and picks up the flux
``(A - ell) |C|^2 / nu`` from the origin.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Mapping

import numpy as np

from .errors import NonIntegrable
from .grid import RadialProfile, jacobi_power_integral
from .model import CouplingParams

TWO_PI = 2.0 * math.pi
_MARGINAL_TOL = 1e-9


@dataclass(frozen=True)
class FormBreakdown:
    mode: int
    kinetic: float
    mass_minus_coulomb: float
    total: float

    def as_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps({k: (float(v) if k != "mode" else int(v))
                           for k, v in self.as_dict().items()})


class ModeForm:
    """Precomputed integrand data of one profile in one angular mode.

    Evaluating at different coefficient sets (e.g. along a bisection in
    ``mu``) reuses the sampled derivative and the origin model.
    """

    def __init__(self, p: RadialProfile, ell: int, weight_power: float, prefactor: float):
        g = p.grid
        r = g.nodes
        vals = np.asarray(p.values)
        dp = np.asarray(p.d_drho())
        D = r * dp - ell * vals
        rw = r ** weight_power
        self.p = p
        self.ell = ell
        self.w = weight_power
        self.pref = prefactor
        self.r = r
        self.fK = np.abs(D) ** 2 * rw
        self.fP = np.abs(vals) ** 2 * rw
        self.wq = g.weights
        self.P0 = float(np.dot(self.wq, self.fP))
        self.P1 = float(np.dot(self.wq, r * self.fP))
        self.rho_min = g.rho_min
        self.tail_fac = 0.0
        if p.decay_rate is not None and p.decay_rate > 0:
            rate = 2.0 * p.decay_rate
            self.tail_fac = math.exp(-rate * (g.rho_max - r[-1])) / rate
        self.A = p.origin_exponent
        if self.A is not None:
            A = self.A
            gs = vals[:2] / r[:2] ** A
            self.g1 = (gs[1] - gs[0]) / (r[1] - r[0])
            self.g0 = gs[0] - self.g1 * r[0]
            self.alpha = 2.0 * A + weight_power

    # -- origin model p = rho^A (g0 + g1 rho) -------------------------------
    def _kin_num(self, rho):
        A, ell = self.A, self.ell
        return np.abs((A - ell) * self.g0 + (A + 1 - ell) * self.g1 * rho) ** 2

    def _mass_num(self, rho):
        return np.abs(self.g0 + self.g1 * rho) ** 2

    def _origin(self, kappa, nu, m1, m0) -> tuple[float, float]:
        """Completion over (0, rho_min) split as (kinetic, mass-minus-coulomb)."""
        if self.A is None:
            return 0.0, 0.0
        if self.g0 == 0 and self.g1 == 0:
            return 0.0, 0.0
        al, R = self.alpha, self.rho_min
        kin_lead = abs((self.A - self.ell) * self.g0) ** 2

        mass = 0.0
        if m0 != 0.0 or m1 != 0.0:
            if al > -1.0:
                mass = jacobi_power_integral(al, lambda x: (m1 * x - m0) * self._mass_num(x), R)
            elif m0 == 0.0 and al > -2.0:
                mass = m1 * jacobi_power_integral(al + 1.0, self._mass_num, R)
            else:
                mass = None

        if nu == 0.0:
            # kinetic ~ rho^(alpha-1): integrable only if alpha > 0 or the lead term vanishes
            if al > 0.0:
                kin = jacobi_power_integral(al - 1.0, lambda x: self._kin_num(x) / kappa, R)
            elif kin_lead <= 1e-24 * (abs(self.g0) ** 2 + 1e-300) and al > -2.0:
                c = abs((self.A + 1 - self.ell) * self.g1) ** 2 / kappa
                kin = jacobi_power_integral(al + 1.0, lambda x: c + 0.0 * x, R)
            else:
                raise NonIntegrable(f"kinetic integrand ~ rho^{al - 1:.6g} at the origin")
            if mass is None:
                raise NonIntegrable(f"mass integrand ~ rho^{al:.6g} at the origin")
            return kin, mass

        if al > -1.0:
            kin = jacobi_power_integral(al, lambda x: self._kin_num(x) / (kappa * x + nu), R)
            return kin, mass

        # both parts ~ rho^alpha with alpha <= -1: require leading cancellation
        def h(x):
            return self._kin_num(x) / (kappa * x + nu) + (m1 * x - m0) * self._mass_num(x)

        h0 = kin_lead / nu - m0 * abs(self.g0) ** 2
        scale = kin_lead / nu + m0 * abs(self.g0) ** 2
        if abs(h0) > 1e-8 * scale or al <= -2.0:
            raise NonIntegrable(
                f"integrand ~ rho^{al:.6g} at the origin without leading cancellation")
        if al < -1.0 - _MARGINAL_TOL:
            raise NonIntegrable(f"origin flux diverges for weight exponent {al:.6g}")
        combined = jacobi_power_integral(al + 1.0, lambda x: (h(x) - h0) / x, R)
        flux = (self.A - self.ell) * abs(self.g0) ** 2 / nu
        return 0.0, combined + flux

    def evaluate(self, kappa: float, nu: float, m1: float, m0: float) -> FormBreakdown:
        r = self.r
        den = kappa * r + nu
        kin = float(np.dot(self.wq, self.fK / den))
        mass = m1 * self.P1 - m0 * self.P0
        if self.tail_fac:
            kin += self.fK[-1] / den[-1] * self.tail_fac
            mass += (m1 * r[-1] - m0) * self.fP[-1] * self.tail_fac
        ok, om = self._origin(kappa, nu, m1, m0)
        kin = self.pref * (kin + ok)
        mass = self.pref * (mass + om)
        return FormBreakdown(self.ell, kin, mass, kin + mass)


class JForm:
    """Electron form ``mu -> J_ell(p, mu)`` for repeated evaluation."""

    def __init__(self, p: RadialProfile, params: CouplingParams, ell: int = 0):
        self.params = params
        self.ell = ell
        self.core = ModeForm(p, ell, -2.0 * params.a, TWO_PI)

    def __call__(self, mu: float) -> FormBreakdown:
        if not mu >= -1.0:
            raise ValueError(f"mu must be at least -1, got {mu!r}")
        return self.core.evaluate(1.0 + mu, self.params.nu, 1.0 - mu, self.params.nu)

    def mass_scale(self, mu: float) -> float:
        return abs(TWO_PI * (1.0 - mu) * self.core.P1)


class JPositronForm:
    """Positron form ``lam -> J+_ell(p, lam)``; the conjugate derivative flips ``ell``."""

    def __init__(self, p: RadialProfile, params: CouplingParams, ell: int = 0):
        self.params = params
        self.ell = ell
        self.core = ModeForm(p, -ell, 2.0 * params.a, TWO_PI)

    def __call__(self, lam: float) -> FormBreakdown:
        if not lam < 1.0:
            raise ValueError(f"lambda must be below 1, got {lam!r}")
        b = self.core.evaluate(1.0 - lam, self.params.nu, 1.0 + lam, self.params.nu)
        return FormBreakdown(self.ell, b.kinetic, b.mass_minus_coulomb, b.total)

    def mass_scale(self, lam: float) -> float:
        return abs(TWO_PI * (1.0 + lam) * self.core.P1)


def eval_J_mode(p: RadialProfile, params: CouplingParams, mu: float, ell: int = 0) -> FormBreakdown:
    """Electron form ``J`` restricted to angular mode ``ell`` (2 pi included)."""
    return JForm(p, params, ell)(mu)


def eval_J(modal: Mapping[int, RadialProfile], params: CouplingParams, mu: float) -> float:
    """Sum of :func:`eval_J_mode` over a finite modal decomposition."""
    return float(sum(eval_J_mode(p, params, mu, ell).total for ell, p in sorted(modal.items())))


def eval_Q_mode(upper: RadialProfile, params: CouplingParams, lam: float, ell: int = 0) -> FormBreakdown:
    """Magnetic form on ``phi`` via ``eta = rho**a * phi``."""
    return eval_J_mode(upper.times_power(params.a), params, lam, ell)


def eval_J_positron_mode(p: RadialProfile, params: CouplingParams, lam: float,
                         ell: int = 0) -> FormBreakdown:
    """Positron form ``J+`` in mode ``ell`` (kinetic numerator ``|rho p' + ell p|^2``)."""
    return JPositronForm(p, params, ell)(lam)


def eval_reduced_form(phi: RadialProfile, params: CouplingParams, lam: float) -> float:
    """Mode-0 reduced form (no angular prefactor).

    ``int |phi'|^2 rho^(2-2a)/(nu+rho) + (1-lam)/(1+lam) int |phi|^2 rho^(1-2a)
    - nu int |phi|^2 rho^(-2a)``.
    """
    if not -1.0 < lam:
        raise ValueError("lambda must exceed -1")
    core = ModeForm(phi, 0, -2.0 * params.a, 1.0)
    return core.evaluate(1.0, params.nu, (1.0 - lam) / (1.0 + lam), params.nu).total


def eval_pauli_form(upper: RadialProfile, params: CouplingParams, ell: int = 0) -> float:
    """``q(phi, phi) = int |d_zbar(|x|^a phi)|^2 |x|^(-2a) dx`` in mode ``ell``."""
    eta = upper.times_power(params.a)
    core = ModeForm(eta, ell, -2.0 * params.a, 0.5 * math.pi)
    return core.evaluate(1.0, 0.0, 0.0, 0.0).total
