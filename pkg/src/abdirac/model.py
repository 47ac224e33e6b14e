"""Closed-form quantities of the magnetic Dirac-Coulomb problem.

Conventions
-----------
``nu`` is the Coulomb coupling, ``a`` the Aharonov-Bohm flux.  The half-gap
functions are ``c(s) = 1/2 - s`` and ``c_ell(a) = 1/2 + ell - a``.  The
ground-state energy in the gap (-1, 1) is

    lambda(nu, a) = sqrt(c(a)^2 - nu^2) / c(a),

valid for ``a <= c(nu)`` (equivalently ``nu <= c(a)``).  Every function here
is a pure function of its value arguments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import (
    DegenerateError,
    DomainError,
    NoModeEigenvalue,
    SupercriticalError,
)

CRITICAL_RTOL = 1e-12


class Regime(str, Enum):
    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    SUPERCRITICAL = "supercritical"


def half_gap(s: float) -> float:
    """Return ``c(s) = 1/2 - s``."""
    return 0.5 - s


def mode_half_gap(a: float, ell: int) -> float:
    """Return ``c_ell(a) = 1/2 + ell - a``."""
    return 0.5 + ell - a


def critical_field(nu: float) -> float:
    """Critical magnetic field ``a(nu) = c(nu)`` for ``nu`` in (0, 1/2]."""
    if not (0.0 < nu <= 0.5):
        raise DomainError(f"nu must lie in (0, 1/2], got {nu!r}")
    return half_gap(nu)


def _is_close(x: float, y: float, rtol: float) -> bool:
    if x == y:
        return True
    return abs(x - y) <= rtol * max(abs(x), abs(y))


@dataclass(frozen=True)
class CouplingParams:
    """Coupling ``nu`` and flux ``a`` with regime classification.

    ``a`` may be negative (flux reversed); the closed forms stay valid for
    ``a > -1/2``.  Criticality ``a == c(nu)`` is detected with relative
    tolerance ``rtol``.
    """

    nu: float
    a: float
    rtol: float = CRITICAL_RTOL

    def __post_init__(self):
        if not (0.0 < self.nu <= 0.5):
            raise DomainError(f"nu must lie in (0, 1/2], got {self.nu!r}")
        if not (-0.5 < self.a < 0.5):
            raise DomainError(f"flux a must lie in (-1/2, 1/2), got {self.a!r}")

    @classmethod
    def critical(cls, nu: float, rtol: float = CRITICAL_RTOL) -> "CouplingParams":
        return cls(nu, critical_field(nu), rtol)

    @property
    def c(self) -> float:
        """Half gap ``c(a)``."""
        return half_gap(self.a)

    @property
    def regime(self) -> Regime:
        ac = critical_field(self.nu)
        if _is_close(self.a, ac, self.rtol):
            return Regime.CRITICAL
        return Regime.SUBCRITICAL if self.a < ac else Regime.SUPERCRITICAL

    @property
    def root_gap(self) -> float:
        """``sqrt(c(a)^2 - nu^2)``, clamped to 0 at criticality."""
        reg = self.regime
        if reg is Regime.SUPERCRITICAL:
            raise SupercriticalError(
                f"a={self.a!r} exceeds the critical field {critical_field(self.nu)!r} "
                f"for nu={self.nu!r}; no ground state in the gap"
            )
        if reg is Regime.CRITICAL:
            return 0.0
        c = self.c
        return math.sqrt((c - self.nu) * (c + self.nu))


@dataclass(frozen=True)
class GroundStateProfile:
    """Radial data of the ground-state spinor.

    The upper component is ``rho**power_exponent * exp(-decay_rate * rho)``
    in mode 0; the lower one is ``i e^{i theta} * lower_upper_ratio`` times
    the same radial function (angular mode shifted by ``lower_mode_shift``).
    """

    lam: float
    power_exponent: float
    decay_rate: float
    lower_upper_ratio: float
    lower_mode_shift: int = 1


@dataclass(frozen=True)
class ModeEnergy:
    """Generating profile ``rho**A_ell * exp(-B_ell rho)`` of mode ``ell`` and its energy."""

    ell: int
    c_ell: float
    lambda_ell: float
    A_ell: float
    B_ell: float
    kappa: float = 1.0


def ground_state_energy(params: CouplingParams) -> float:
    """``lambda(nu, a) = sqrt(c(a)^2 - nu^2)/c(a)``; zero at the critical field."""
    return params.root_gap / params.c


def lemma_square_mu(params: CouplingParams) -> float:
    """Smaller positive root ``(c - sqrt(c^2 - nu^2))/nu`` of ``nu m^2 - (1-2a) m + nu``.

    Computed as ``nu/(c + sqrt(c^2 - nu^2))`` to avoid cancellation.
    """
    s = params.root_gap
    return params.nu / (params.c + s)


def quadratic_roots_mu(params: CouplingParams) -> tuple[float, float]:
    """Both roots of ``nu m^2 - (1 - 2a) m + nu = 0``, in increasing order.

    The roots are ``(c -+ sqrt(c^2 - nu^2))/nu``; both are positive and their
    product is one.
    """
    s = params.root_gap
    if s == 0.0:
        raise DegenerateError("double root at the critical field")
    lo = params.nu / (params.c + s)
    hi = (params.c + s) / params.nu
    return lo, hi


def eta_star_profile(params: CouplingParams) -> tuple[float, float]:
    """Exponent and decay of the optimal weighted-form profile ``|x|^A e^{-B|x|}``."""
    s = params.root_gap
    c = params.c
    # s - c computed as -nu^2/(c + s) to keep relative accuracy near a = 0
    return -params.nu * params.nu / (c + s), params.nu / c


def ground_state_spinor(params: CouplingParams) -> GroundStateProfile:
    s = params.root_gap
    lam = s / params.c
    # sqrt((1 - lam)/(1 + lam)) equals the square-completion root mu
    ratio = lemma_square_mu(params)
    return GroundStateProfile(
        lam=lam,
        power_exponent=s - 0.5,
        decay_rate=params.nu / params.c,
        lower_upper_ratio=ratio,
    )


def mode_energy(params: CouplingParams, ell: int) -> ModeEnergy:
    """Energy and generating profile of Fourier mode ``ell >= 0``."""
    if int(ell) != ell:
        raise DomainError("ell must be an integer")
    ell = int(ell)
    if ell < 0:
        raise NoModeEigenvalue(
            f"negative mode ell={ell} is not selected by integrability", "negative-mode"
        )
    c_ell = mode_half_gap(params.a, ell)
    nu = params.nu
    if ell == 0:
        s = params.root_gap
    else:
        if _is_close(nu, abs(c_ell), params.rtol):
            s = 0.0
        elif nu > abs(c_ell):
            raise NoModeEigenvalue(
                f"nu={nu!r} >= |c_{ell}(a)|={abs(c_ell)!r}", "coupling-too-large"
            )
        else:
            s = math.sqrt((abs(c_ell) - nu) * (abs(c_ell) + nu))
    sign = 1.0 if c_ell > 0 else -1.0
    return ModeEnergy(
        ell=ell,
        c_ell=c_ell,
        lambda_ell=s / abs(c_ell),
        A_ell=params.a - 0.5 + sign * s,
        B_ell=nu / c_ell,
        kappa=1.0 if ell == 0 else 0.0,
    )


def frobenius_exponent(nu: float, a: float, ell: int) -> float:
    """Leading power of the regular solution in mode ``ell`` (weighted variable).

    Roots of the indicial equation are ``a - 1/2 -+ sqrt(c_ell^2 - nu^2)``; the
    regular branch takes the plus sign whatever the sign of ``c_ell``.
    """
    c_ell = mode_half_gap(a, ell)
    disc = c_ell * c_ell - nu * nu
    if disc < 0.0:
        raise NoModeEigenvalue(
            f"complex Frobenius exponents for nu={nu!r}, c_ell={c_ell!r}",
            "coupling-too-large",
        )
    return a - 0.5 + math.sqrt(disc)


def energy_slope_exact(nu: float, a: float) -> float:
    """``d lambda / d a = -nu^2 / (c(a)^2 sqrt(c(a)^2 - nu^2))`` (subcritical)."""
    params = CouplingParams(nu, a)
    s = params.root_gap
    if s == 0.0:
        return -math.inf
    return -nu * nu / (params.c * params.c * s)


def energy_slope_fd(nu: float, h: float, step: float | None = None) -> float:
    """Centered finite-difference slope of ``a -> lambda(nu, a)`` at ``a(nu) - h``.

    The default step ``h/2`` keeps both stencil points subcritical.
    """
    if not h > 0.0:
        raise DomainError("h must be positive")
    step = 0.5 * h if step is None else step
    if not 0.0 < step <= h:
        raise DomainError("step must lie in (0, h]")
    a0 = critical_field(nu) - h
    hi = ground_state_energy(CouplingParams(nu, a0 + step))
    lo = ground_state_energy(CouplingParams(nu, a0 - step))
    return (hi - lo) / (2.0 * step)
