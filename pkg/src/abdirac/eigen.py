"""Gap eigenvalues of the radial Dirac-Coulomb problem in one angular mode.

Two independent methods:

form bisection
    P1 finite elements in ``t = log rho`` for the weighted form in the
    variable ``p = rho**a * u``.  ``lambda -> Q_h(lambda)`` is decreasing, so
    the eigenvalue is where the inertia of the tridiagonal ``Q_h`` changes.
shooting
    RK4 integration of the first-order system for the upper radial function
    ``u`` (mode ``ell``) and lower radial function ``v`` (mode ``ell + 1``)::

        rho u' = (ell - a) u - ((1 + lam) rho + nu) v
        rho v' = -(ell + 1 - a) v - ((1 - lam) rho - nu) u

    The signs are fixed by the ground state ``u = rho**(s-1/2) e^{-B rho}``,
    ``v = mu u`` which solves it exactly.  Outward data come from a two-term
    Frobenius series, inward data from the decay ``exp(-sqrt(1-lam^2) rho)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import brentq

from . import kernels
from .errors import BadGrid, NoCrossing, NoModeEigenvalue, StiffIntegration
from .grid import GridSpec, RadialGrid, RadialProfile, build_grid
from .model import CouplingParams, frobenius_exponent, mode_half_gap

TWO_PI = 2.0 * math.pi
FORM = "FormBisection"
SHOOTING = "Shooting"

EIGEN_RHO_MIN = 1e-6
FORM_N = 4000
SHOOT_N = 2000
DECAY_LENGTHS = 25.0
LAM_EDGE = 1e-9

_GAUSS3_X = np.array([0.5 - math.sqrt(15) / 10, 0.5, 0.5 + math.sqrt(15) / 10])
_GAUSS3_W = np.array([5 / 18, 8 / 18, 5 / 18])


def _check_mode(params: CouplingParams, ell: int) -> None:
    if ell < 0:
        raise NoModeEigenvalue(f"negative mode ell={ell} not implemented", "negative-mode")
    c_ell = mode_half_gap(params.a, ell)
    if params.nu >= abs(c_ell) and not math.isclose(params.nu, abs(c_ell), rel_tol=params.rtol):
        raise NoCrossing(f"nu={params.nu!r} >= c_{ell}(a)={c_ell!r}: no gap eigenvalue")


# ---------------------------------------------------------------------------
# form discretization


@dataclass(frozen=True, eq=False)
class ModePencil:
    """Tridiagonal pieces of ``Q_h(lambda) = 2 pi [K + (1-lam) M_rho - nu M_1] + robin``.

    Each piece is a ``(diag, offdiag)`` pair over the unknowns; the last grid
    node carries a Dirichlet condition, the first a Robin closure which
    accounts for the regular solution on ``(0, rho_0)``.
    """

    ell: int
    lam: float
    kinetic: tuple
    mass: tuple
    coulomb: tuple
    robin: float
    nu: float
    boundary: dict = field(default_factory=dict)

    @property
    def total(self) -> tuple[np.ndarray, np.ndarray]:
        c_m = 1.0 - self.lam
        d = TWO_PI * (self.kinetic[0] + c_m * self.mass[0] - self.nu * self.coulomb[0])
        e = TWO_PI * (self.kinetic[1] + c_m * self.mass[1] - self.nu * self.coulomb[1])
        d = d.copy()
        d[0] += self.robin
        return d, e

    def quad(self, v: np.ndarray) -> float:
        """``v^T Q_h v`` for a vector of nodal values (Dirichlet node dropped if present)."""
        d, e = self.total
        v = np.asarray(v, dtype=float)[: d.size]
        return float(np.dot(d, v * v) + 2.0 * np.dot(e, v[:-1] * v[1:]))


class _Assembler:
    """Element data independent of ``lambda``."""

    def __init__(self, params: CouplingParams, ell: int, grid: RadialGrid):
        t = np.asarray(grid.t, dtype=float)
        if t.size < 16 or np.any(np.diff(t) <= 0):
            raise BadGrid("need at least 16 strictly increasing nodes")
        self.params, self.ell, self.grid = params, ell, grid
        h = np.diff(t)
        tq = t[:-1, None] + h[:, None] * _GAUSS3_X[None, :]
        self.rho_q = np.exp(tq)
        self.W = _GAUSS3_W[None, :] * h[:, None] * self.rho_q ** (1.0 - 2.0 * params.a)
        N0 = 1.0 - _GAUSS3_X
        N1 = _GAUSS3_X
        B0 = -1.0 / h[:, None] - ell * N0[None, :]
        B1 = 1.0 / h[:, None] - ell * N1[None, :]
        self.B00, self.B01, self.B11 = B0 * B0, B0 * B1, B1 * B1
        NN = np.stack([N0 * N0, N0 * N1, N1 * N1])
        self.mass = self._tri((self.W * self.rho_q)[None] * NN[:, None, :])
        self.coul = self._tri(self.W[None] * NN[:, None, :])
        self.r0 = grid.nodes[0]
        self.A_ell = frobenius_exponent(params.nu, params.a, ell)

    def _tri(self, local) -> tuple[np.ndarray, np.ndarray]:
        """Assemble element blocks (00, 01, 11 summed over q) into (diag, off) minus the last node."""
        l00, l01, l11 = (x.sum(axis=-1) for x in local)
        n = l00.size + 1
        d = np.zeros(n)
        d[:-1] += l00
        d[1:] += l11
        return d[:-1], l01[:-1].copy()

    def pencil(self, lam: float) -> ModePencil:
        nu = self.params.nu
        wk = self.W / ((1.0 + lam) * self.rho_q + nu)
        kin = self._tri(np.stack([wk * self.B00, wk * self.B01, wk * self.B11]))
        r0, a = self.r0, self.params.a
        robin = TWO_PI * (self.A_ell - self.ell) / ((1.0 + lam) * r0 + nu) * r0 ** (1.0 - 2.0 * a)
        return ModePencil(self.ell, lam, kin, self.mass, self.coul, robin, nu,
                          {"dirichlet": "rho_max", "robin_exponent": self.A_ell, "rho_0": r0})

    def negative_count(self, lam: float) -> int:
        d, e = self.pencil(lam).total
        return int(kernels.sturm_count(np.ascontiguousarray(d), np.ascontiguousarray(e)))


def assemble_mode_pencil(params: CouplingParams, ell: int, lam: float,
                         grid: RadialGrid) -> ModePencil:
    """Discrete per-mode form ``Q_h(lambda)`` on the partition ``grid.t``."""
    if not -1.0 < lam < 1.0:
        raise ValueError(f"lambda must lie in (-1, 1), got {lam!r}")
    return _Assembler(params, ell, grid).pencil(lam)


@dataclass
class EigenResult:
    lam: float
    upper_profile: RadialProfile
    lower_profile: RadialProfile
    residual: float
    method: str
    ell: int = 0
    estimates: tuple = ()

    def as_dict(self) -> dict:
        return {"lambda": self.lam, "ell": self.ell, "method": self.method,
                "residual": self.residual, "estimates": list(self.estimates)}

    def to_json(self) -> str:
        return json.dumps(self.as_dict())

    def profiles_csv(self) -> str:
        """CSV with columns ``rho, upper, lower``."""
        lines = ["rho,upper,lower"]
        for r, u, v in zip(self.upper_profile.grid.nodes, self.upper_profile.values,
                           self.lower_profile.values):
            lines.append(f"{float(r)!r},{float(np.real(u))!r},{float(np.real(v))!r}")
        return "\n".join(lines) + "\n"


def eliminate_lower(upper: RadialProfile, params: CouplingParams, ell: int,
                    lam: float) -> RadialProfile:
    """Lower radial function from the upper one: ``v = -(rho u' - (ell-a) u)/((1+lam) rho + nu)``."""
    r = upper.grid.nodes
    u = np.asarray(upper.values)
    du = upper.d_drho()
    v = -(r * du - (ell - params.a) * u) / ((1.0 + lam) * r + params.nu)
    return RadialProfile(upper.grid, v, upper.origin_exponent, upper.decay_rate, None, ell + 1)


def _bisect_count(asm: _Assembler, lo: float, hi: float, tol: float = 1e-14) -> float:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if asm.negative_count(mid) == 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _form_eigenvalue(params, ell, grid) -> tuple[float, _Assembler]:
    asm = _Assembler(params, ell, grid)
    lo, hi = -1.0 + LAM_EDGE, 1.0 - LAM_EDGE
    if asm.negative_count(lo) > 0:
        raise NoCrossing("Q_h already indefinite at the lower gap edge")
    if asm.negative_count(hi) == 0:
        raise NoCrossing(f"min eigenvalue of Q_h stays positive on the gap in mode {ell}")
    return _bisect_count(asm, lo, hi), asm


def _eigenvector(asm: _Assembler, lam: float) -> tuple[np.ndarray, float]:
    d, e = asm.pencil(lam).total
    scale = float(np.max(np.abs(d)))
    sigma = -1e-10 * scale
    ab = np.zeros((3, d.size))
    ab[0, 1:] = e
    ab[1] = d - sigma
    ab[2, :-1] = e
    x = np.ones(d.size)
    for _ in range(4):
        x = solve_banded((1, 1), ab, x)
        x /= np.linalg.norm(x)
    Qx = d * x
    Qx[:-1] += e * x[1:]
    Qx[1:] += e * x[:-1]
    rq = float(np.dot(x, Qx))
    return x, abs(rq) / scale


def auto_rho_max(lam: float, nu: float, ell: int) -> float:
    kappa = math.sqrt(max(1.0 - lam * lam, 1e-12))
    return max(40.0, DECAY_LENGTHS / kappa)


def eigen_grid(rho_max: float, N: int = FORM_N, rho_min: float = EIGEN_RHO_MIN) -> RadialGrid:
    return build_grid(GridSpec("log-uniform", rho_min, rho_max, N))


def lowest_gap_eigenvalue_form(params: CouplingParams, ell: int = 0,
                               grid: Optional[RadialGrid] = None,
                               extrapolate: bool = True) -> EigenResult:
    """Lowest gap eigenvalue of mode ``ell`` by inertia bisection of ``Q_h(lambda)``.

    Without a grid, a coarse pass fixes ``rho_max`` to 25 decay lengths.  With
    ``extrapolate`` the value is Richardson-extrapolated from the grid and its
    refinement (second-order scheme).
    """
    _check_mode(params, ell)
    if grid is None:
        lam0, _ = _form_eigenvalue(params, ell, eigen_grid(60.0, 1000))
        grid = eigen_grid(auto_rho_max(lam0, params.nu, ell))
    lam_c, asm = _form_eigenvalue(params, ell, grid)
    estimates = (lam_c,)
    lam = lam_c
    if extrapolate:
        fine = grid.refined()
        lam_f, asm_f = _form_eigenvalue(params, ell, fine)
        lam = (4.0 * lam_f - lam_c) / 3.0
        estimates = (lam_c, lam_f)
        asm, grid = asm_f, fine
    x, resid = _eigenvector(asm, estimates[-1])
    p = np.append(x, 0.0)
    if p[np.argmax(np.abs(p))] < 0:
        p = -p
    upper = RadialProfile(grid, grid.nodes ** (-params.a) * p, None, None, None, ell)
    lower = eliminate_lower(upper, params, ell, estimates[-1])
    return EigenResult(lam, upper, lower, resid, FORM, ell, estimates)


# ---------------------------------------------------------------------------
# shooting


@dataclass(frozen=True)
class _ShootSetup:
    h: float
    n_out: int
    n_in: int
    rho_start: float
    rho_max: float


def _shoot_setup(grid: RadialGrid, match_point: float, n_steps: int,
                 refine: int = 1) -> _ShootSetup:
    """Uniform steps in ``t``; ``refine`` divides the step keeping both end radii."""
    t_m = math.log(match_point)
    t_s = math.log(10.0 * grid.rho_min)
    t_max = math.log(grid.rho_max)
    if not t_s < t_m < t_max:
        raise BadGrid("match point must lie inside (10 rho_min, rho_max)")
    h = min((t_max - t_s) / n_steps, 1.0 / grid.rho_max)
    n_out = int(math.ceil((t_m - t_s) / h))
    n_in = int(math.ceil((t_max - t_m) / h))
    return _ShootSetup(h / refine, n_out * refine, n_in * refine,
                       math.exp(t_m - n_out * h), math.exp(t_m + n_in * h))


def _frobenius_start(params, ell, lam, rho):
    """Two-term Frobenius data ``(u, v)`` of the regular solution at ``rho``."""
    nu, a = params.nu, params.a
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    c_ell = mode_half_gap(a, ell)
    s = math.sqrt(max(c_ell * c_ell - nu * nu, 0.0))
    k = s - 0.5
    U0 = np.array([1.0, (c_ell - s) / nu])
    M0 = np.array([[ell - a, -nu], [nu, -(ell + 1 - a)]])
    L = (k + 1.0) * np.eye(2) - M0
    # M1 U0 = (-(1+lam) U0[1], -(1-lam) U0[0])
    rhs = np.stack([-(1.0 + lam) * U0[1], -(1.0 - lam) * U0[0]])
    U1 = np.linalg.solve(L, rhs)
    pw = rho ** k
    return pw * (U0[0] + rho * U1[0]), pw * (U0[1] + rho * U1[1])


def _shoot(params, ell, lam, setup: _ShootSetup, t_m: float):
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if np.any(setup.h * setup.rho_max * (1.0 + np.abs(lam)) > 2.5):
        raise StiffIntegration("RK4 step exceeds the stability bound near rho_max")
    nu, a = params.nu, params.a
    u0, v0 = _frobenius_start(params, ell, lam, setup.rho_start)
    t_s = t_m - setup.n_out * setup.h
    uo, vo = kernels.rk4_final(t_s, setup.h, setup.n_out, np.ascontiguousarray(u0),
                               np.ascontiguousarray(v0), np.ascontiguousarray(lam), nu, a, ell)
    t_max = t_m + setup.n_in * setup.h
    ui = np.ones_like(lam)
    vi = np.sqrt((1.0 - lam) / (1.0 + lam))
    ui_, vi_ = kernels.rk4_final(t_max, -setup.h, setup.n_in, ui, np.ascontiguousarray(vi),
                                 np.ascontiguousarray(lam), nu, a, ell)
    return (uo, vo), (ui_, vi_)


def _defect(params, ell, lam, setup, t_m):
    (uo, vo), (ui, vi) = _shoot(params, ell, lam, setup, t_m)
    return (uo * vi - vo * ui) / (np.hypot(uo, vo) * np.hypot(ui, vi))


def shoot_radial_system(params: CouplingParams, ell: int, lam: float, grid: RadialGrid,
                        match_point: float = 1.0, n_steps: Optional[int] = None) -> float:
    """Normalized Wronskian mismatch at ``match_point`` of the outward and inward solutions."""
    if not -1.0 < lam < 1.0:
        raise ValueError(f"lambda must lie in (-1, 1), got {lam!r}")
    setup = _shoot_setup(grid, match_point, n_steps or grid.size)
    return float(_defect(params, ell, lam, setup, math.log(match_point))[0])


def _first_root(params, ell, setup, t_m, n_scan: int = 321):
    z = np.linspace(-8.0, 8.0, n_scan)
    lams = np.tanh(z)
    w = _defect(params, ell, lams, setup, t_m)
    sgn = np.sign(w)
    idx = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]
    if idx.size == 0:
        raise NoCrossing(f"matching defect has no sign change in the gap (mode {ell})")
    i = idx[0]
    return lams[i], lams[i + 1]


def _refine(params, ell, bracket, setup, t_m):
    f = lambda x: float(_defect(params, ell, x, setup, t_m)[0])
    lo, hi = bracket
    # the bracket comes from a coarser setup; widen until the sign change is enclosed
    for _ in range(40):
        if f(lo) * f(hi) < 0:
            break
        width = hi - lo
        lo, hi = max(lo - width, -1 + LAM_EDGE), min(hi + width, 1 - LAM_EDGE)
    return brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def eigensolve_shooting(params: CouplingParams, ell: int = 0, grid: Optional[RadialGrid] = None,
                        match_point: float = 1.0, n_steps: int = SHOOT_N,
                        extrapolate: bool = True) -> EigenResult:
    """Lowest gap eigenvalue of mode ``ell`` as the first zero of the matching defect.

    RK4 is fourth order, so the two-grid extrapolation is ``(16 x_f - x_c)/15``.
    """
    _check_mode(params, ell)
    t_m = math.log(match_point)
    if grid is None:
        scan = _shoot_setup(eigen_grid(400.0, 16), match_point, 800)
        bracket = _first_root(params, ell, scan, t_m)
        lam0 = _refine(params, ell, bracket, scan, t_m)
        grid = eigen_grid(auto_rho_max(lam0, params.nu, ell), 16)
    else:
        scan = _shoot_setup(grid, match_point, max(grid.size // 2, 200))
        bracket = _first_root(params, ell, scan, t_m)
    coarse = _shoot_setup(grid, match_point, n_steps)
    lam_c = _refine(params, ell, bracket, coarse, t_m)
    estimates = (lam_c,)
    lam, setup = lam_c, coarse
    if extrapolate:
        fine = _shoot_setup(grid, match_point, n_steps, refine=2)
        lam_f = _refine(params, ell, (lam_c - 1e-6, lam_c + 1e-6), fine, t_m)
        lam = (16.0 * lam_f - lam_c) / 15.0
        estimates = (lam_c, lam_f)
        setup = fine
    upper, lower, resid = _shooting_profiles(params, ell, estimates[-1], setup, t_m)
    return EigenResult(lam, upper, lower, resid, SHOOTING, ell, estimates)


def _shooting_profiles(params, ell, lam, setup: _ShootSetup, t_m):
    nu, a = params.nu, params.a
    u0, v0 = _frobenius_start(params, ell, lam, setup.rho_start)
    t_s = t_m - setup.n_out * setup.h
    uo, vo = kernels.rk4_path(t_s, setup.h, setup.n_out, float(u0[0]), float(v0[0]), lam, nu, a, ell)
    t_max = t_m + setup.n_in * setup.h
    vi0 = math.sqrt((1.0 - lam) / (1.0 + lam))
    ui, vi = kernels.rk4_path(t_max, -setup.h, setup.n_in, 1.0, vi0, lam, nu, a, ell)
    ui, vi = ui[::-1], vi[::-1]
    # scale the inward branch to the outward one at the match point
    k = (uo[-1] * ui[0] + vo[-1] * vi[0]) / (ui[0] ** 2 + vi[0] ** 2)
    resid = abs(uo[-1] * vi[0] - vo[-1] * ui[0]) / (math.hypot(uo[-1], vo[-1]) * math.hypot(ui[0], vi[0]))
    u = np.concatenate([uo, k * ui[1:]])
    v = np.concatenate([vo, k * vi[1:]])
    n = u.size
    g = build_grid(GridSpec("log-uniform", setup.rho_start, setup.rho_max, n))
    if u[np.argmax(np.abs(u))] < 0:
        u, v = -u, -v
    kappa = math.sqrt(1.0 - lam * lam)
    s = frobenius_exponent(nu, a, ell) - a
    upper = RadialProfile(g, u, s, kappa, None, ell)
    lower = RadialProfile(g, v, s, kappa, None, ell + 1)
    return upper, lower, resid


# ---------------------------------------------------------------------------
# residual of the second-order equation


def ode_residual_check(p: RadialProfile, params: CouplingParams, ell: int, lam: float,
                       rho_cut: Optional[float] = None) -> float:
    """Weighted residual of the eliminated second-order equation for ``p = rho**a u``.

    With ``F = (rho p' - ell p)/((1+lam) rho + nu)`` the equation reads
    ``-F' - (ell + 1 - 2a) F / rho + (1 - lam - nu/rho) p = 0``.  Returns
    ``||rho R|| / (||rho p|| + ||p||)`` in ``L^2(rho^(-2a) drho)`` over
    ``rho >= rho_cut`` (default ``10 rho_min``).
    """
    g = p.grid
    r = g.nodes
    a, nu = params.a, params.nu
    vals = np.asarray(p.values)
    F = (r * p.d_drho() - ell * vals) / ((1.0 + lam) * r + nu)
    dF = g.d_drho(F)
    R = -dF - (ell + 1 - 2 * a) * F / r + (1.0 - lam - nu / r) * vals
    cut = 10.0 * g.rho_min if rho_cut is None else rho_cut
    m = r >= cut
    w = g.weights * r ** (-2.0 * a)
    num = math.sqrt(float(np.sum((w * np.abs(r * R) ** 2)[m])))
    den = math.sqrt(float(np.sum((w * np.abs(r * vals) ** 2)[m]))) + \
        math.sqrt(float(np.sum((w * np.abs(vals) ** 2)[m])))
    if den == 0.0:
        raise ValueError("zero profile")
    return num / den
