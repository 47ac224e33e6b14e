"""Root map lambda_star, its minimization over trial families, and the
supercritical breakdown witness.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize

from .errors import BadSpec, MaxIterations, SupercriticalError
from .forms import JForm, JPositronForm
from .grid import (
    GridSpec,
    RadialGrid,
    RadialProfile,
    build_grid,
    complete_integral,
    make_power_exp,
    make_supercritical_witness,
)
from .model import CouplingParams, Regime, half_gap, lemma_square_mu

MU_MAX = 1e3
DELTA = 1e-6
J_RTOL = 1e-10
WIDTH_TOL = 1e-12

OK = "ok"
NO_ROOT = "no-root"        # J > 0 up to mu_max: the +inf convention
BELOW_GAP = "below-gap"    # J(-1 + delta) <= 0: root escapes below -1


@dataclass(frozen=True)
class LambdaStarResult:
    value: float
    bracket: tuple[float, float]
    evaluations: int
    flag: str = OK

    @property
    def finite(self) -> bool:
        return self.flag == OK


def _bisect(form, lo: float, hi: float, sign: float, mass_scale) -> tuple[float, float, float, int]:
    """Bisection for a root of ``sign * form(x)`` which is positive at lo, negative at hi."""
    n = 0
    mid = 0.5 * (lo + hi)
    while hi - lo > WIDTH_TOL * max(1.0, abs(mid)):
        mid = 0.5 * (lo + hi)
        val = sign * form(mid).total
        n += 1
        if abs(val) <= J_RTOL * mass_scale(mid):
            return mid, lo, hi, n
        if val > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), lo, hi, n


def lambda_star(p: RadialProfile, params: CouplingParams, ell: int = 0,
                mu_max: float = MU_MAX, delta: float = DELTA) -> LambdaStarResult:
    """Unique root of the nonincreasing map ``mu -> J(p, mu)`` on ``(-1, mu_max)``."""
    form = JForm(p, params, ell)
    lo, hi = -1.0 + delta, mu_max
    j_lo = form(lo).total
    if j_lo <= 0.0:
        return LambdaStarResult(-1.0, (lo, lo), 1, BELOW_GAP)
    j_hi = form(hi).total
    if j_hi > 0.0:
        return LambdaStarResult(math.inf, (hi, hi), 2, NO_ROOT)
    val, a, b, n = _bisect(form, lo, hi, 1.0, form.mass_scale)
    return LambdaStarResult(val, (a, b), n + 2, OK)


def lambda_star_positron(p: RadialProfile, params: CouplingParams, ell: int = 0,
                         lam_min: float = -MU_MAX, delta: float = DELTA) -> LambdaStarResult:
    """Unique root of the nondecreasing map ``lam -> J+(p, lam)`` on ``(lam_min, 1)``.

    The flags mirror :func:`lambda_star`: ``BELOW_GAP`` means the root sits
    above the gap (``J+(1 - delta) <= 0``), ``NO_ROOT`` that ``J+`` stays
    positive down to ``lam_min``.
    """
    form = JPositronForm(p, params, ell)
    lo, hi = lam_min, 1.0 - delta
    j_hi = form(hi).total
    if j_hi <= 0.0:
        return LambdaStarResult(1.0, (hi, hi), 1, BELOW_GAP)
    j_lo = form(lo).total
    if j_lo > 0.0:
        return LambdaStarResult(-math.inf, (lo, lo), 2, NO_ROOT)
    # J+ < 0 at lo and > 0 at hi: bisect on -J+
    val, a, b, n = _bisect(form, lo, hi, -1.0, form.mass_scale)
    return LambdaStarResult(val, (a, b), n + 2, OK)


# ---------------------------------------------------------------------------
# trial families

POWER_EXP = "PowerExp"
TRUNCATED_POWER = "TruncatedPower"
CUSTOM = "Custom"


@dataclass(frozen=True)
class TrialFamilySpec:
    """Parametrized trial profiles.

    ``PowerExp``: ``rho**A exp(-B rho)`` with parameters ``(A, B)``.
    ``TruncatedPower``: ``rho**A (1 - rho/R)**2`` on ``rho < R`` with ``(A, R)``.
    ``Custom``: ``builder(x, grid) -> RadialProfile``.

    ``bounds`` holds one ``(lo, hi)`` pair per parameter (``None`` for an open
    side); ``fixed`` pins parameters by name, shrinking the search space.
    """

    kind: str = POWER_EXP
    bounds: tuple = ((None, None), (0.0, None))
    mode: int = 0
    x0: Optional[tuple] = None
    fixed: dict = field(default_factory=dict)
    builder: Optional[Callable] = None
    names: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in (POWER_EXP, TRUNCATED_POWER, CUSTOM):
            raise BadSpec(f"unknown family kind {self.kind!r}")
        if self.kind == CUSTOM and self.builder is None:
            raise BadSpec("Custom family needs a builder")
        for lo, hi in self.bounds:
            if lo is not None and hi is not None and not lo < hi:
                raise BadSpec(f"empty bound ({lo}, {hi})")
        if self.kind == POWER_EXP:
            lo_b = self.bounds[1][0]
            if lo_b is None or lo_b < 0.0:
                raise BadSpec("PowerExp requires B > 0")

    @property
    def param_names(self) -> tuple:
        if self.names is not None:
            return tuple(self.names)
        return {POWER_EXP: ("A", "B"), TRUNCATED_POWER: ("A", "R")}.get(
            self.kind, tuple(f"x{i}" for i in range(len(self.bounds))))

    def free_names(self) -> tuple:
        return tuple(n for n in self.param_names if n not in self.fixed)

    def full(self, free: np.ndarray) -> dict:
        it = iter(free)
        return {n: (self.fixed[n] if n in self.fixed else float(next(it)))
                for n in self.param_names}

    def feasible(self, values: dict) -> bool:
        for n, (lo, hi) in zip(self.param_names, self.bounds):
            v = values[n]
            if lo is not None and not v > lo:
                return False
            if hi is not None and not v < hi:
                return False
        return True

    def build(self, values: dict, grid: RadialGrid) -> RadialProfile:
        if self.kind == POWER_EXP:
            return make_power_exp(values["A"], values["B"], grid, mode=self.mode)
        if self.kind == TRUNCATED_POWER:
            A, R = values["A"], values["R"]
            r = grid.nodes
            inside = r < R
            v = np.zeros_like(r)
            d = np.zeros_like(r)
            ri = r[inside]
            v[inside] = ri ** A * (1 - ri / R) ** 2
            d[inside] = v[inside] * A / ri - 2 * ri ** A * (1 - ri / R) / R
            return RadialProfile(grid, v, A, None, d, self.mode)
        return self.builder(np.array([values[n] for n in self.param_names]), grid)


def power_exp_family(params: CouplingParams, mode: int = 0, **kw) -> TrialFamilySpec:
    """PowerExp family with the integrability bound ``A > -c(a)``."""
    return TrialFamilySpec(POWER_EXP, ((-params.c, None), (0.0, None)), mode, **kw)


def family_grid(N: int = 2000, rho_max: float = 200.0) -> RadialGrid:
    return build_grid(GridSpec("log-uniform", 1e-6, rho_max, N))


@dataclass
class MinimizationResult:
    best_lambda: float
    best_params: dict
    trace: list
    evaluations: int
    converged: bool = True

    def to_json(self) -> str:
        return json.dumps({"best_lambda": self.best_lambda, "best_params": self.best_params,
                           "evaluations": self.evaluations, "trace": self.trace})


def minimize_lambda_star(params: CouplingParams, family: Optional[TrialFamilySpec] = None,
                         tol: float = 1e-10, grid: Optional[RadialGrid] = None,
                         max_evals: int = 200, channel: str = "electron") -> MinimizationResult:
    """Simplex search for the extremal root map over a trial family.

    ``channel="electron"`` minimizes ``lambda_star``.  ``channel="positron"``
    maximizes the positron root (``J+`` is increasing, so its root is
    approached from above).  One evaluation is one root-map solve; the budget
    ``max_evals`` is shared by the first search and the restart.
    """
    if params.regime is Regime.SUPERCRITICAL:
        raise SupercriticalError(f"a={params.a!r} exceeds the critical field")
    if family is None:
        family = power_exp_family(params)
    if channel not in ("electron", "positron"):
        raise BadSpec(f"unknown channel {channel!r}")
    if grid is None:
        grid = family_grid()
    sign = 1.0 if channel == "electron" else -1.0
    root = lambda_star if channel == "electron" else lambda_star_positron
    penalty = 10.0 * MU_MAX
    trace: list = []
    cache: dict = {}

    def objective(x):
        key = tuple(float(v) for v in x)
        if key in cache:
            return cache[key]
        vals = family.full(x)
        if not family.feasible(vals):
            out = penalty
        else:
            res = root(family.build(vals, grid), params, family.mode)
            trace.append({**vals, "lambda_star": res.value, "flag": res.flag})
            if res.flag == OK:
                out = sign * res.value
            elif res.flag == NO_ROOT:
                out = penalty
            else:
                out = -penalty
        cache[key] = out
        return out

    free = family.free_names()
    if family.x0 is not None:
        x0 = np.array([v for n, v in zip(family.param_names, family.x0) if n in free], float)
    else:
        defaults = {"A": 0.0, "B": 1.0, "R": 10.0}
        x0 = np.array([defaults.get(n, 0.5) for n in free], float)
    step = np.where(np.abs(x0) > 0.5, 0.25 * np.abs(x0), 0.25)

    def run(start, budget, scale):
        simplex = [start] + [start + scale[i] * np.eye(len(start))[i] for i in range(len(start))]
        return minimize(objective, start, method="Nelder-Mead",
                        options={"initial_simplex": np.array(simplex), "maxfev": budget,
                                 "xatol": 1e-7, "fatol": tol, "adaptive": False})

    first_budget = int(0.75 * max_evals)
    before = len(trace)
    r1 = run(x0, first_budget, step)
    used = len(trace) - before
    # restart once from a perturbed optimum with a small simplex
    r2 = run(r1.x, max(max_evals - used, len(free) + 2), np.full(len(free), 1e-3))
    best = r1 if r1.fun <= r2.fun else r2
    n_eval = len(trace)
    best_vals = family.full(best.x)
    best_lambda = sign * best.fun
    result = MinimizationResult(best_lambda, best_vals, trace, n_eval,
                                converged=bool(r2.success or r1.success))
    if not result.converged:
        raise MaxIterations(f"simplex search did not converge in {n_eval} evaluations",
                            best=result)
    return result


# ---------------------------------------------------------------------------
# supercritical witness


@dataclass
class SupercriticalScan:
    nu: float
    a: float
    rows: list                       # (epsilon, J(eta_eps, -1)) sorted by decreasing epsilon
    eps_star: Optional[float]        # largest scanned eps below which every J < 0
    slope: float                     # dJ / d|log eps| fitted on the smallest half
    predicted_slope: float           # 2 pi (c(a)^2/nu - nu)

    def to_json(self) -> str:
        return json.dumps({"nu": self.nu, "a": self.a, "eps_star": self.eps_star,
                           "slope": self.slope, "predicted_slope": self.predicted_slope,
                           "rows": [list(r) for r in self.rows]})


def witness_grid(eps_min: float, rho_max: float = 60.0, h: float = 0.02) -> RadialGrid:
    rho_min = eps_min / 100.0
    N = max(16, int(math.ceil(math.log(rho_max / rho_min) / h)) + 1)
    return build_grid(GridSpec("log-uniform", rho_min, rho_max, N))


def supercritical_scan(nu: float, a: float, eps_list, grid: Optional[RadialGrid] = None,
                       mu: float = -1.0) -> SupercriticalScan:
    """Evaluate ``J(eta_eps, nu, a, mu)`` along ``eps_list`` (default ``mu = -1``).

    Also usable as a control below the critical field.
    """
    params = CouplingParams(nu, a)
    eps = sorted((float(e) for e in eps_list), reverse=True)
    if grid is None:
        grid = witness_grid(eps[-1])
    rows = []
    for e in eps:
        w = make_supercritical_witness(params, e, grid)
        rows.append((e, float(JForm(w, params, 0)(mu).total)))
    eps_star = None
    for e, j in reversed(rows):
        if j < 0:
            eps_star = e
        else:
            break
    tail = rows[len(rows) // 2:] if len(rows) >= 4 else rows
    if len(tail) >= 2:
        x = np.array([abs(math.log(e)) for e, _ in tail])
        y = np.array([j for _, j in tail])
        slope = float(np.polyfit(x, y, 1)[0])
    else:
        slope = float("nan")
    c = half_gap(a)
    return SupercriticalScan(nu, a, rows, eps_star, slope, 2 * math.pi * (c * c / nu - nu))


# ---------------------------------------------------------------------------
# completed square identity


@dataclass(frozen=True)
class CompletedSquare:
    lhs: float
    rhs: float
    defect: float


def completed_square_check(phi: RadialProfile, params: CouplingParams, mu: float) -> CompletedSquare:
    """Check ``int |rho phi' + mu (nu + rho) phi|^2 rho^-2a / (nu + rho)`` against
    its expansion after one integration by parts."""
    g = phi.grid
    r = g.nodes
    nu, a = params.nu, params.a
    v = np.asarray(phi.values)
    dv = np.asarray(phi.d_drho())
    A = phi.origin_exponent
    rate = None if phi.decay_rate is None else 2.0 * phi.decay_rate
    k = None if A is None else 2.0 * A - 2.0 * a
    w = r ** (-2.0 * a)
    abs2 = np.abs(v) ** 2

    def quad(f, power):
        return complete_integral(g, f, power, rate).value

    lhs = quad(np.abs(r * dv + mu * (nu + r) * v) ** 2 * w / (nu + r), k)
    i_kin = quad(np.abs(dv) ** 2 * r ** 2 * w / (nu + r), k)
    i_1 = quad(abs2 * r * w, None if k is None else k + 1.0)
    i_0 = quad(abs2 * w, k)
    terms = (i_kin, mu * mu * i_1, (nu * mu * mu - (1.0 - 2.0 * a) * mu) * i_0)
    rhs = float(sum(terms))
    scale = max(abs(lhs), sum(abs(t) for t in terms))
    defect = 0.0 if scale == 0.0 else float(abs(lhs - rhs) / scale)
    return CompletedSquare(float(lhs), rhs, defect)


def make_lemma_profile(params: CouplingParams, grid: RadialGrid) -> RadialProfile:
    """Reduced-form optimizer ``rho**(-mu nu) exp(-mu rho)`` with ``mu`` the square root constant."""
    m = lemma_square_mu(params)
    return make_power_exp(-m * params.nu, m, grid, mode=0)
