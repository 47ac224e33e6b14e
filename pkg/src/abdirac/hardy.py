"""Sharp constants of the homogeneous Hardy inequalities and numerical checks.

Per Fourier mode ``ell`` the two Wirtinger inequalities reduce to

    zbar:  int rho^(1-2b) |p' - ell p/rho|^2  >=  (b - ell)^2 int rho^(-1-2b) |p|^2
    z:     int rho^(1+2b) |p' + ell p/rho|^2  >=  (b - ell)^2 int rho^(2b-1)  |p|^2

and the full-plane constant is a quarter of the minimum over ``ell`` (the
Wirtinger derivatives carry a factor 1/2).  The per-mode infimum is reached
only along sequences ``rho**(+-b)`` times widening log-scale plateaus.

Constants are computed with exact rational arithmetic on the binary value
of the inputs, so periodicity and reflection hold exactly.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import BadSpec, DegenerateError, DomainError, NonIntegrable
from .forms import JForm, ModeForm, TWO_PI
from .grid import (
    GridSpec,
    LOG_UNIFORM,
    RadialGrid,
    RadialProfile,
    build_grid,
    cutoff_support,
    integrate_weighted,
    make_eta_star,
    make_near_optimizer,
)
from .model import CouplingParams

VARIANTS = ("zbar", "z")
SLACK_TOL = 1e-8


@dataclass(frozen=True)
class HardyConstant:
    """Optimal constant with the mode (and sign branch) realising the minimum.

    ``sharp`` means the value is an infimum that is approached by trial
    sequences but generically not attained.
    """

    value: float
    attaining_mode: int
    sharp: bool = True
    branch: Optional[str] = None

    def as_dict(self) -> dict:
        return asdict(self)


def _nearest_int(x: Fraction) -> tuple[int, Fraction]:
    """Nearest integer to ``x`` (the smaller one on ties) and the distance."""
    lo = math.floor(x)
    d_lo, d_hi = x - lo, lo + 1 - x
    if d_hi < d_lo:
        return lo + 1, d_hi
    return lo, d_lo


def _exact(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    xf = float(x)
    if not math.isfinite(xf):
        raise DomainError(f"expected a finite real, got {x!r}")
    return Fraction(xf)


def _wirtinger_exact(beta) -> tuple[int, Fraction]:
    ell, d = _nearest_int(_exact(beta))
    return ell, d * d / 4


def wirtinger_constant(beta, variant: str = "zbar") -> HardyConstant:
    """``(1/4) min_ell (beta - ell)^2``; the same for both variants."""
    if variant not in VARIANTS:
        raise BadSpec(f"variant must be one of {VARIANTS}, got {variant!r}")
    ell, value = _wirtinger_exact(beta)
    return HardyConstant(float(value), ell)


def pauli_constant(a, zeta) -> HardyConstant:
    """``min over +-, ell of (a +- zeta/2 - ell)^2``.

    Accepts floats, ints or :class:`fractions.Fraction`.  Ties between
    branches go to ``-``, ties between modes to the smaller ``ell``.
    """
    a, zeta = _exact(a), _exact(zeta)
    best = None
    for branch, x in (("-", a - zeta / 2), ("+", a + zeta / 2)):
        ell, d = _nearest_int(x)
        if best is None or d < best[2]:
            best = (branch, ell, d)
    branch, ell, d = best
    return HardyConstant(float(d * d), ell, True, branch)


def pauli_from_wirtinger(a, zeta) -> float:
    """Pauli constant rebuilt from the Wirtinger constants at ``beta = a -+ zeta/2``."""
    a, zeta = _exact(a), _exact(zeta)
    # exact arithmetic: rescaling a rounded quarter by 4 loses bits for subnormals
    return float(4 * min(_wirtinger_exact(a - zeta / 2)[1], _wirtinger_exact(a + zeta / 2)[1]))


def _wirtinger_parts(p: RadialProfile, beta: float, ell: int, variant: str):
    if variant == "zbar":
        core = ModeForm(p, ell, -2.0 * beta, 1.0)
        den_power = -2.0 * beta - 1.0
    elif variant == "z":
        core = ModeForm(p, -ell, 2.0 * beta, 1.0)
        den_power = 2.0 * beta - 1.0
    else:
        raise BadSpec(f"variant must be one of {VARIANTS}, got {variant!r}")
    # with nu = 0 the rational factor is 1/rho, which turns rho^w into rho^(w-1)
    num = core.evaluate(1.0, 0.0, 0.0, 0.0).total
    den = integrate_weighted(p, den_power)
    return num, den


def rayleigh_wirtinger_mode(p: RadialProfile, beta: float, ell: int,
                            variant: str = "zbar") -> float:
    """Per-mode Rayleigh quotient; never below ``(beta - ell)**2``.

    Raises
    ------
    NonIntegrable
        If a weighted integral diverges at the origin.
    DegenerateError
        If the denominator vanishes (e.g. ``p == 0``).
    """
    num, den = _wirtinger_parts(p, beta, ell, variant)
    if not den > 0.0:
        raise DegenerateError("zero denominator in the Rayleigh quotient")
    return num / den


# ---------------------------------------------------------------------------
# near-optimizing sequences


def cutoff_grid(r_in: float, r_out: float, ramp: float = 0.25,
                per_unit: int = 48) -> RadialGrid:
    """Log-uniform grid on the cutoff support with nodes at the ramp joins."""
    lo, hi = cutoff_support(r_in, r_out, ramp)
    L = math.log(r_out / r_in)
    w = ramp * L
    # equal steps on ramps and plateau put both joins on nodes when L/w is an integer
    n_ramp = max(8, math.ceil(per_unit * w))
    n_flat = max(1, round(n_ramp * L / w))
    N = 2 * n_ramp + n_flat + 1
    return build_grid(GridSpec(LOG_UNIFORM, lo, hi, N))


@dataclass(frozen=True)
class NearOptimizerSequence:
    """Quotients along widening plateaus and their extrapolation.

    With a fixed cutoff shape the excess over the constant is exactly
    ``C / (log W)**2``, so two widths determine the limit.
    """

    beta: float
    ell: int
    variant: str
    widths: tuple
    quotients: tuple
    extrapolated: float
    constant: float

    @property
    def relative_gap(self) -> float:
        if self.constant == 0.0:
            return abs(self.extrapolated)
        return abs(self.extrapolated - self.constant) / self.constant

    def as_dict(self) -> dict:
        d = asdict(self)
        d["relative_gap"] = self.relative_gap
        return d


def near_optimizer_sequence(beta: float, ell: int, variant: str = "zbar",
                            widths: Sequence[float] = (1e2, 1e3, 1e4),
                            ramp: float = 0.25, per_unit: int = 48) -> NearOptimizerSequence:
    """Evaluate the per-mode quotient on plateaus ``[W^-1/2, W^1/2]``."""
    if len(widths) < 2:
        raise BadSpec("need at least two widths to extrapolate")
    qs = []
    for W in widths:
        r_in, r_out = W ** -0.5, W ** 0.5
        g = cutoff_grid(r_in, r_out, ramp, per_unit)
        p = make_near_optimizer(beta, ell, (r_in, r_out, ramp), g, variant)
        qs.append(rayleigh_wirtinger_mode(p, beta, ell, variant))
    L1, L2 = math.log(widths[-2]) ** 2, math.log(widths[-1]) ** 2
    ext = (L2 * qs[-1] - L1 * qs[-2]) / (L2 - L1)
    return NearOptimizerSequence(float(beta), int(ell), variant, tuple(float(w) for w in widths),
                                 tuple(qs), float(ext), float((beta - ell) ** 2))


def pauli_near_optimizer(a: float, zeta: float, **kw) -> NearOptimizerSequence:
    """Near-optimizer of the Pauli inequality on its attaining branch and mode."""
    C = pauli_constant(a, zeta)
    beta = a - zeta / 2 if C.branch == "-" else a + zeta / 2
    return near_optimizer_sequence(beta, C.attaining_mode, "zbar", **kw)


# ---------------------------------------------------------------------------
# named special cases


def _probe_grid() -> RadialGrid:
    return build_grid(GridSpec(LOG_UNIFORM, 1e-6, 80.0, 2000))


def probe_profile(grid: RadialGrid, A: float, B: float, g1: float = 0.0, g2: float = 0.0,
                  mode: Optional[int] = None) -> RadialProfile:
    """``rho**A exp(-B rho) (1 + g1 rho + g2 rho^2)`` with exact derivative."""
    r = grid.nodes
    base = r ** A * np.exp(-B * r)
    poly = 1.0 + g1 * r + g2 * r * r
    v = base * poly
    d = base * ((A / r - B) * poly + g1 + 2.0 * g2 * r)
    return RadialProfile(grid, v, A, B, d, mode)


def probe_set(lower_exponent: float, n_per_mode: int = 11, modes=range(-2, 3),
              seed: int = 0, grid: Optional[RadialGrid] = None):
    """Deterministic random smooth profiles, ``(ell, profile)`` pairs.

    Origin exponents exceed ``lower_exponent`` so that every weighted
    integral converges.
    """
    grid = grid or _probe_grid()
    rng = np.random.default_rng(seed)
    out = []
    for ell in modes:
        for _ in range(n_per_mode):
            A = lower_exponent + rng.uniform(0.05, 1.5)
            B = rng.uniform(0.4, 2.0)
            g1, g2 = rng.uniform(0.0, 2.0), rng.uniform(0.0, 0.5)
            out.append((ell, probe_profile(grid, A, B, g1, g2, ell)))
    return out


def _inhomogeneous_slack(p: RadialProfile, params: CouplingParams, ell: int) -> float:
    """Relative slack of ``J(p, nu, a, 0) >= 0`` against its Coulomb term.

    When the Coulomb term diverges (equality profiles at criticality) the
    mass term is the reference instead.
    """
    form = JForm(p, params, ell)
    lhs = form(0.0).total
    try:
        ref = TWO_PI * params.nu * integrate_weighted(p, -2.0 * params.a)
    except NonIntegrable:
        ref = form.mass_scale(0.0)
    return lhs / ref


def _homogeneous_slack(p: RadialProfile, nu: float, ell: int) -> float:
    """Relative slack of the scaled homogeneous case (mode ``ell``)."""
    num, den = _wirtinger_parts(p, -nu, ell, "zbar")
    return num / (nu * nu * den) - 1.0


@dataclass
class SpecialCaseReport:
    case: str
    n_trials: int
    min_slack: float
    sharpness_extrapolation: float
    tol: float = SLACK_TOL
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.min_slack >= -self.tol

    def as_dict(self) -> dict:
        return {"case": self.case, "n_trials": self.n_trials,
                "min_slack": self.min_slack,
                "sharpness_extrapolation": self.sharpness_extrapolation}

    def to_json(self) -> str:
        return json.dumps(self.as_dict())


def special_case_checks(nu: float, n_per_mode: int = 11, seed: int = 0,
                        tol: float = SLACK_TOL) -> list[SpecialCaseReport]:
    """Evaluate the three named special cases on a random probe set.

    * ``inhomogeneous-nu-half``: ``nu = 1/2``, ``a = 0``;
    * ``inhomogeneous-critical``: ``a = c(nu)``;
    * ``homogeneous-scaled``: the scale-invariant limit of the previous one.

    Slacks are relative to the right-hand side.  ``sharpness_extrapolation``
    is the slack at the equality profile (first two cases) or the relative
    gap of the extrapolated near-optimizer sequence (last case).
    """
    if not 0.0 < nu < 0.5:
        raise DomainError(f"nu must lie in (0, 1/2), got {nu!r}")
    grid = _probe_grid()
    reports = []

    for name, params in (("inhomogeneous-nu-half", CouplingParams(0.5, 0.0)),
                         ("inhomogeneous-critical", CouplingParams.critical(nu))):
        probes = probe_set(params.a - 0.5, n_per_mode, seed=seed, grid=grid)
        slacks = [_inhomogeneous_slack(p, params, ell) for ell, p in probes]
        eq = _inhomogeneous_slack(make_eta_star(params, grid), params, 0)
        reports.append(SpecialCaseReport(name, len(probes), float(min(slacks)), float(eq), tol,
                                         {"nu": params.nu, "a": params.a}))

    probes = probe_set(-nu, n_per_mode, seed=seed + 1, grid=grid)
    slacks = [_homogeneous_slack(p, nu, ell) for ell, p in probes]
    seq = near_optimizer_sequence(-nu, 0, "zbar")
    reports.append(SpecialCaseReport("homogeneous-scaled", len(probes), float(min(slacks)),
                                     seq.relative_gap, tol, {"nu": nu, "a": 0.5 - nu}))
    return reports


def special_case_report_json(reports: Sequence[SpecialCaseReport]) -> str:
    return json.dumps([r.as_dict() for r in reports])
