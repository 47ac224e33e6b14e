"""Radial grids, singular-weight quadrature and sampled profiles.

Nodes are generated in the mapped variable ``t = log(rho)``.  Two maps are
available:

``log-uniform``
    equally spaced ``t`` including both truncation radii, trapezoid rule with
    order-8 Gregory end corrections (exact for polynomials of degree < 8 in t).
``mapped-gauss``
    composite 8-point Gauss-Legendre panels in ``t`` (exact for degree < 16
    on each panel); nodes lie strictly inside the truncation interval.

Profiles store samples, not closures.  Integrals over ``(0, rho_min)`` and
``(rho_max, inf)`` are completed from the declared asymptotics of a profile.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Optional

import numpy as np
from scipy.special import bernoulli, roots_jacobi, roots_legendre

from .errors import BadSpec, GridTooCoarse, NonIntegrable
from .model import CouplingParams, eta_star_profile

LOG_UNIFORM = "log-uniform"
MAPPED_GAUSS = "mapped-gauss"
MAP_KINDS = (LOG_UNIFORM, MAPPED_GAUSS)

GREGORY_ORDER = 8
GAUSS_PANEL = 8
DEFAULT_RHO_MIN = 1e-6
DEFAULT_N = 2000


@dataclass(frozen=True)
class GridSpec:
    map_kind: str = LOG_UNIFORM
    rho_min: float = DEFAULT_RHO_MIN
    rho_max: float = 50.0
    N: int = DEFAULT_N

    def as_dict(self) -> dict:
        return {"map_kind": self.map_kind, "rho_min": self.rho_min,
                "rho_max": self.rho_max, "N": self.N}


@lru_cache(maxsize=None)
def gregory_corrections(order: int = GREGORY_ORDER) -> tuple[float, ...]:
    """End corrections ``d_j`` added to the unit trapezoid weights.

    They satisfy ``sum_j d_j j**m = L(x**m)`` for ``m < order`` where ``L`` is
    the left-end Euler-Maclaurin functional (``-1/2`` at ``m = 0``,
    ``B_{m+1}/(m+1)`` for odd ``m``, zero otherwise).  Solved exactly in
    rational arithmetic.
    """
    B = bernoulli(order + 1)
    rhs = []
    for m in range(order):
        if m == 0:
            rhs.append(Fraction(-1, 2))
        elif m % 2 == 1:
            rhs.append(Fraction(B[m + 1]).limit_denominator(10**8) / (m + 1))
        else:
            rhs.append(Fraction(0))
    # Gauss-Jordan on the (exact) Vandermonde system
    A = [[Fraction(j) ** m if (j or m) else Fraction(1) for j in range(order)] + [rhs[m]]
         for m in range(order)]
    n = order
    for col in range(n):
        piv = next(r for r in range(col, n) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        inv = 1 / A[col][col]
        A[col] = [x * inv for x in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return tuple(float(A[j][n]) for j in range(n))


def _stencil_weights(t: np.ndarray, width: int = 5) -> tuple[np.ndarray, np.ndarray]:
    """First-derivative finite-difference weights on ``width``-point stencils.

    Returns ``(index, weight)`` arrays of shape ``(N, width)``; the stencil is
    centred where possible and one-sided at the ends.
    """
    n = t.size
    half = width // 2
    start = np.clip(np.arange(n) - half, 0, n - width)
    idx = start[:, None] + np.arange(width)[None, :]
    dt = t[idx] - t[:, None]
    scale = np.max(np.abs(dt), axis=1, keepdims=True)
    x = dt / scale
    # Vandermonde rows x^m; weights solve V^T w = e_1 (derivative functional)
    V = x[:, None, :] ** np.arange(width)[None, :, None]
    rhs = np.zeros((n, width))
    rhs[:, 1] = 1.0
    w = np.linalg.solve(V, rhs[..., None])[..., 0] / scale
    return idx, w


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Quadrature grid on ``[rho_min, rho_max]``.

    ``weights`` already include the Jacobian ``drho/dt = rho``, so that
    ``sum(weights * f(nodes))`` approximates the ``drho`` integral of ``f``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    map_kind: str
    rho_min: float
    rho_max: float
    t: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def spec(self) -> GridSpec:
        return GridSpec(self.map_kind, self.rho_min, self.rho_max, self.size)

    @cached_property
    def _diff_stencil(self):
        return _stencil_weights(self.t)

    def integrate(self, f: np.ndarray) -> float | complex:
        """Plain quadrature ``sum w_i f_i`` (no endpoint completion)."""
        return np.dot(self.weights, f)

    def d_dt(self, f: np.ndarray) -> np.ndarray:
        idx, w = self._diff_stencil
        return np.sum(w * f[idx], axis=1)

    def d_drho(self, f: np.ndarray) -> np.ndarray:
        return self.d_dt(f) / self.nodes

    def refined(self) -> "RadialGrid":
        """Grid of the same kind with the mesh width halved."""
        n = self.size
        n2 = 2 * n - 1 if self.map_kind == LOG_UNIFORM else 2 * n
        return build_grid(GridSpec(self.map_kind, self.rho_min, self.rho_max, n2))


def build_grid(spec: GridSpec | dict | None = None, **kw) -> RadialGrid:
    """Build a grid from a :class:`GridSpec` (or a mapping with its fields)."""
    if spec is None:
        spec = GridSpec(**kw)
    elif isinstance(spec, dict):
        spec = GridSpec(**{**spec, **kw})
    kind, r0, r1, n = spec.map_kind, float(spec.rho_min), float(spec.rho_max), spec.N
    if kind not in MAP_KINDS:
        raise BadSpec(f"unknown map_kind {kind!r}; expected one of {MAP_KINDS}")
    if not (0.0 < r0 < r1) or not math.isfinite(r1):
        raise BadSpec(f"need 0 < rho_min < rho_max, got {r0!r}, {r1!r}")
    if int(n) != n or n < 16:
        raise BadSpec(f"need integer N >= 16, got {n!r}")
    n = int(n)
    t0, t1 = math.log(r0), math.log(r1)
    if kind == LOG_UNIFORM:
        t = np.linspace(t0, t1, n)
        h = (t1 - t0) / (n - 1)
        g = np.ones(n)
        d = np.asarray(gregory_corrections())
        g[: d.size] += d
        g[n - d.size:] += d[::-1]
        nodes = np.exp(t)
        nodes[0], nodes[-1] = r0, r1
        weights = h * g * nodes
    else:
        if n % GAUSS_PANEL:
            raise BadSpec(f"mapped-gauss needs N divisible by {GAUSS_PANEL}, got {n}")
        x, w = roots_legendre(GAUSS_PANEL)
        edges = np.linspace(t0, t1, n // GAUSS_PANEL + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        t = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        nodes = np.exp(t)
        weights = (half[:, None] * w[None, :]).ravel() * nodes
    for arr in (t, nodes, weights):
        arr.setflags(write=False)
    return RadialGrid(nodes, weights, kind, r0, r1, t)


def default_grid(decay_rate: Optional[float] = None, N: int = DEFAULT_N,
                 rho_min: float = DEFAULT_RHO_MIN, map_kind: str = LOG_UNIFORM) -> RadialGrid:
    """Default grid: ``rho_max = max(50, 20/decay_rate)``."""
    rho_max = 50.0
    if decay_rate is not None and decay_rate > 0:
        rho_max = max(50.0, 20.0 / decay_rate)
    return build_grid(GridSpec(map_kind, rho_min, rho_max, N))


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Samples of a radial function on a grid.

    ``origin_exponent`` declares ``p ~ C rho**A`` as ``rho -> 0`` and
    ``decay_rate`` declares ``p ~ rho**m exp(-B rho)`` at infinity; both are
    used to complete integrals beyond the truncation radii.  ``derivative``
    optionally carries exact ``dp/drho`` samples for closed-form profiles.
    """

    grid: RadialGrid
    values: np.ndarray
    origin_exponent: Optional[float] = None
    decay_rate: Optional[float] = None
    derivative: Optional[np.ndarray] = field(default=None, repr=False)
    mode: Optional[int] = None

    def __post_init__(self):
        vals = np.asarray(self.values)
        if not np.iscomplexobj(vals):
            vals = vals.astype(float)
        if vals.shape != (self.grid.size,):
            raise BadSpec(f"profile has {vals.shape} samples for a grid of {self.grid.size}")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.derivative is not None:
            der = np.array(self.derivative)
            if der.shape != vals.shape:
                raise BadSpec("derivative samples do not match the grid")
            der.setflags(write=False)
            object.__setattr__(self, "derivative", der)
        if self.origin_exponent is not None:
            bad = self.origin_defect()
            if bad > 0.1:
                raise BadSpec(f"declared origin exponent disagrees with samples ({bad:.3g})")

    def origin_defect(self) -> float:
        """Max relative mismatch of ``C rho**A`` against nodes 1, 2 (fitted at node 0)."""
        if self.origin_exponent is None:
            return 0.0
        r = self.grid.nodes[:3]
        v = np.abs(self.values[:3])
        if v[0] == 0.0:
            return 0.0 if np.all(v == 0.0) else 1.0
        model = v[0] * (r / r[0]) ** self.origin_exponent
        return float(np.max(np.abs(v[1:] - model[1:]) / model[1:]))

    def scaled(self, factor) -> "RadialProfile":
        der = None if self.derivative is None else self.derivative * factor
        return RadialProfile(self.grid, self.values * factor, self.origin_exponent,
                             self.decay_rate, der, self.mode)

    def times_power(self, power: float) -> "RadialProfile":
        """Return ``rho**power * p`` with shifted declared exponent."""
        r = self.grid.nodes
        fac = r ** power
        der = None
        if self.derivative is not None:
            der = fac * (self.derivative + power * self.values / r)
        A = None if self.origin_exponent is None else self.origin_exponent + power
        return RadialProfile(self.grid, self.values * fac, A, self.decay_rate, der, self.mode)

    def d_drho(self) -> np.ndarray:
        """Derivative samples: exact when carried, finite differences otherwise."""
        if self.derivative is not None:
            return self.derivative
        return self.grid.d_drho(self.values)

    def to_csv(self, fh=None) -> str:
        """CSV with columns ``rho, re, im``; returns the text and writes ``fh`` if given."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rho", "re", "im"])
        vals = np.asarray(self.values, dtype=complex)
        for r, v in zip(self.grid.nodes, vals):
            w.writerow([repr(float(r)), repr(float(v.real)), repr(float(v.imag))])
        text = buf.getvalue()
        if fh is not None:
            if isinstance(fh, str):
                with open(fh, "w", newline="") as f:
                    f.write(text)
            else:
                fh.write(text)
        return text


def differentiate(p: RadialProfile) -> RadialProfile:
    """Derivative of a sampled profile by 4th-order differences in ``t = log rho``."""
    dp = p.grid.d_drho(np.asarray(p.values))
    A = None
    if p.origin_exponent is not None and p.origin_exponent != 0.0:
        A = p.origin_exponent - 1.0
    return RadialProfile(p.grid, dp, A, p.decay_rate, None, p.mode)


# ---------------------------------------------------------------------------
# singular-endpoint quadrature


def jacobi_power_integral(alpha: float, h, rho0: float, n: int = 12) -> float:
    """``int_0^rho0 rho**alpha h(rho) drho`` for smooth ``h`` and ``alpha > -1``."""
    if alpha <= -1.0:
        raise NonIntegrable(f"rho^{alpha} is not integrable at the origin")
    x, w = roots_jacobi(n, 0.0, alpha)
    u = 0.5 * (1.0 + x)
    return float(rho0 ** (alpha + 1) * 2.0 ** (-alpha - 1) * np.dot(w, h(rho0 * u)))


@dataclass(frozen=True)
class QuadResult:
    value: float
    bulk: float
    origin: float
    tail: float
    truncation_bound: float


def _origin_completion(f0: float, f1: float, r0: float, r1: float, k: float,
                       upper: float) -> float:
    """Integral over (0, upper) of ``rho**k g(rho)``, ``g`` linear through two nodes."""
    if k <= -1.0:
        if f0 == 0.0 and f1 == 0.0:
            return 0.0
        raise NonIntegrable(f"integrand ~ rho^{k} at the origin is not integrable")
    g0, g1 = f0 / r0 ** k, f1 / r1 ** k
    slope = (g1 - g0) / (r1 - r0)
    c0 = g0 - slope * r0
    return c0 * upper ** (k + 1) / (k + 1) + slope * upper ** (k + 2) / (k + 2)


def complete_integral(grid: RadialGrid, f: np.ndarray, origin_power: Optional[float],
                      tail_rate: Optional[float]) -> QuadResult:
    """Quadrature of samples ``f`` with endpoint completions.

    ``origin_power`` declares ``f ~ rho**k`` at 0 and ``tail_rate`` declares
    ``f ~ exp(-tail_rate * rho)`` at infinity; undeclared ends are dropped and
    accounted for in ``truncation_bound``.
    """
    f = np.asarray(f, dtype=float)
    bulk = float(grid.integrate(f))
    r = grid.nodes
    bound = 0.0
    if origin_power is not None:
        origin = _origin_completion(f[0], f[1], r[0], r[1], origin_power, grid.rho_min)
    else:
        origin = 0.0
        bound += abs(f[0]) * r[0]
    if tail_rate is not None and tail_rate > 0:
        tail = f[-1] * math.exp(-tail_rate * (grid.rho_max - r[-1])) / tail_rate
    else:
        tail = 0.0
        bound += abs(f[-1]) * r[-1]
    return QuadResult(bulk + origin + tail, bulk, origin, tail, bound)


def integrate_weighted(p: RadialProfile, power: float, rational_weight=None,
                       full: bool = False):
    """``int |p|^2 rho**power / (alpha rho + beta) drho`` with endpoint completion.

    ``rational_weight`` is ``(alpha, beta)`` or a mapping with those keys.
    """
    r = p.grid.nodes
    f = np.abs(np.asarray(p.values)) ** 2 * r ** power
    k = None
    if p.origin_exponent is not None:
        k = 2.0 * p.origin_exponent + power
    if rational_weight is not None:
        if isinstance(rational_weight, dict):
            alpha, beta = rational_weight["alpha"], rational_weight["beta"]
        else:
            alpha, beta = rational_weight
        den = alpha * r + beta
        if np.any(den <= 0):
            raise NonIntegrable("rational weight has a nonpositive denominator on the grid")
        f = f / den
        if k is not None and beta == 0.0:
            k -= 1.0
    rate = None if p.decay_rate is None else 2.0 * p.decay_rate
    res = complete_integral(p.grid, f, k, rate)
    return res if full else res.value


# ---------------------------------------------------------------------------
# named profiles


def make_power_exp(A: float, B: float, grid: RadialGrid, amplitude: float = 1.0,
                   mode: Optional[int] = None) -> RadialProfile:
    """``amplitude * rho**A * exp(-B rho)`` with exact derivative."""
    r = grid.nodes
    v = amplitude * r ** A * np.exp(-B * r)
    return RadialProfile(grid, v, A, B if B > 0 else None, (A / r - B) * v, mode)


def make_eta_star(params: CouplingParams, grid: RadialGrid) -> RadialProfile:
    """Optimal weighted-form profile ``rho**A exp(-B rho)``."""
    A, B = eta_star_profile(params)
    return make_power_exp(A, B, grid, mode=0)


def make_phi_star(params: CouplingParams, grid: RadialGrid) -> RadialProfile:
    """Upper ground-state component ``rho**(A - a) exp(-B rho)``."""
    A, B = eta_star_profile(params)
    return make_power_exp(A - params.a, B, grid, mode=0)


def truncation_function(rho: np.ndarray, epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    """Values and derivative of the cutoff ``theta_eps`` (sine ramps at both ends)."""
    rho = np.asarray(rho, dtype=float)
    th = np.zeros_like(rho)
    dth = np.zeros_like(rho)
    inner = (rho > epsilon / 2) & (rho <= epsilon)
    arg = 2 * np.pi / epsilon * rho[inner] - 1.5 * np.pi
    th[inner] = 0.5 * (1 + np.sin(arg))
    dth[inner] = 0.5 * np.cos(arg) * 2 * np.pi / epsilon
    flat = (rho > epsilon) & (rho < 1 / epsilon)
    th[flat] = 1.0
    outer = (rho >= 1 / epsilon) & (rho <= 1 / epsilon + np.pi)
    arg = rho[outer] + 0.5 * np.pi - 1 / epsilon
    th[outer] = 0.5 * (1 + np.sin(arg))
    dth[outer] = 0.5 * np.cos(arg)
    return th, dth


def _check_resolves(grid: RadialGrid, lo: float, hi: float, what: str, min_nodes: int = 8):
    r = grid.nodes
    n_in = np.count_nonzero((r >= lo) & (r <= hi))
    if n_in < min_nodes:
        raise GridTooCoarse(f"{n_in} nodes in the {what} [{lo:.3g}, {hi:.3g}]; need {min_nodes}")


def make_truncation(p: RadialProfile, epsilon: float) -> RadialProfile:
    """``theta_eps * p``: zero near the origin and beyond ``1/eps + pi``."""
    if not (0.0 < epsilon <= 1.0):
        raise BadSpec(f"epsilon must lie in (0, 1], got {epsilon!r}")
    g = p.grid
    if g.rho_min > epsilon / 2:
        raise GridTooCoarse(f"rho_min={g.rho_min!r} does not reach eps/2")
    _check_resolves(g, epsilon / 2, epsilon, "inner ramp")
    if g.rho_max < 1 / epsilon + np.pi:
        # outer ramp beyond the grid: the profile is truncated by the grid itself
        if p.decay_rate is None:
            raise GridTooCoarse("grid does not reach 1/eps + pi and the profile has no decay")
    else:
        _check_resolves(g, 1 / epsilon, 1 / epsilon + np.pi, "outer ramp")
    th, dth = truncation_function(g.nodes, epsilon)
    vals = np.asarray(p.values) * th
    der = th * p.d_drho() + dth * np.asarray(p.values)
    decay = p.decay_rate if g.rho_max < 1 / epsilon + np.pi else None
    return RadialProfile(g, vals, None, decay, der, p.mode)


def make_supercritical_witness(params: CouplingParams, epsilon: float,
                               grid: RadialGrid) -> RadialProfile:
    """``rho**(a-1/2) exp(-rho)`` for ``rho >= eps``, linear ramp from 0 inside.

    The interior slope ``eps**(a-3/2) exp(-eps)`` respects the gradient bound
    ``eps**(a-3/2)``.
    """
    if not (0.0 < epsilon <= 1.0):
        raise BadSpec(f"epsilon must lie in (0, 1], got {epsilon!r}")
    if grid.rho_min > epsilon / 2:
        raise GridTooCoarse(f"rho_min={grid.rho_min!r} does not resolve eps={epsilon!r}")
    _check_resolves(grid, epsilon / 2, epsilon, "interior ramp")
    r = grid.nodes
    A = params.a - 0.5
    outer = r >= epsilon
    v = np.empty_like(r)
    d = np.empty_like(r)
    v[outer] = r[outer] ** A * np.exp(-r[outer])
    d[outer] = (A / r[outer] - 1.0) * v[outer]
    slope = epsilon ** (A - 1.0) * math.exp(-epsilon)
    v[~outer] = slope * r[~outer]
    d[~outer] = slope
    return RadialProfile(grid, v, 1.0, 1.0, d, 0)


def log_cutoff(rho: np.ndarray, r_in: float, r_out: float, ramp: float = 0.25):
    """Smooth plateau in ``log rho`` on ``[r_in, r_out]``.

    The ramps occupy a fraction ``ramp`` of the plateau length on each side,
    so the cutoff is a fixed shape rescaled in ``log rho``.  Returns values
    and ``d/drho``.
    """
    t = np.log(np.asarray(rho, dtype=float))
    a, b = math.log(r_in), math.log(r_out)
    w = ramp * (b - a)
    chi = np.zeros_like(t)
    dchi = np.zeros_like(t)
    up = (t > a - w) & (t < a)
    tau = (t[up] - (a - w)) / w
    chi[up] = 0.5 * (1 - np.cos(np.pi * tau))
    dchi[up] = 0.5 * np.pi / w * np.sin(np.pi * tau)
    chi[(t >= a) & (t <= b)] = 1.0
    dn = (t > b) & (t < b + w)
    tau = (t[dn] - b) / w
    chi[dn] = 0.5 * (1 + np.cos(np.pi * tau))
    dchi[dn] = -0.5 * np.pi / w * np.sin(np.pi * tau)
    return chi, dchi / np.exp(t)


def cutoff_support(r_in: float, r_out: float, ramp: float = 0.25) -> tuple[float, float]:
    w = ramp * math.log(r_out / r_in)
    return r_in * math.exp(-w), r_out * math.exp(w)


def make_near_optimizer(beta: float, ell: int, cutoffs, grid: RadialGrid,
                        variant: str = "zbar") -> RadialProfile:
    """``rho**beta`` (``zbar``) or ``rho**-beta`` (``z``) times a log-scale cutoff.

    ``cutoffs`` is ``(r_in, r_out)`` or ``(r_in, r_out, ramp)``.  The power is
    the same for every mode ``ell``, which is recorded on the profile.
    """
    if variant not in ("zbar", "z"):
        raise BadSpec(f"variant must be 'zbar' or 'z', got {variant!r}")
    r_in, r_out, *rest = cutoffs
    ramp = rest[0] if rest else 0.25
    if not (0 < r_in < r_out):
        raise BadSpec("cutoffs must satisfy 0 < r_in < r_out")
    lo, hi = cutoff_support(r_in, r_out, ramp)
    if grid.rho_min > lo or grid.rho_max < hi:
        raise GridTooCoarse(f"grid [{grid.rho_min:.3g}, {grid.rho_max:.3g}] misses the "
                            f"cutoff support [{lo:.3g}, {hi:.3g}]")
    _check_resolves(grid, lo, r_in, "lower ramp")
    _check_resolves(grid, r_out, hi, "upper ramp")
    k = beta if variant == "zbar" else -beta
    r = grid.nodes
    chi, dchi = log_cutoff(r, r_in, r_out, ramp)
    v = r ** k * chi
    d = r ** k * (dchi + k * chi / r)
    return RadialProfile(grid, v, None, None, d, int(ell))
