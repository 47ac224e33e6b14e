"""Non-relativistic limit of the ground state.

With the speed of light ``c`` restored, the ground energy is

    lambda_c = c^2 sqrt(1 - x),   x = nu^2 / (c(a)^2 c^2),

and ``lambda_c - c^2`` tends to ``-nu^2 / (2 c(a)^2)``.  The limiting upper
component ``rho^-a exp(-nu rho / c(a))`` solves the Pauli equation

    (1/2) D D* phi - (nu/rho) phi = -nu^2 / (2 c(a)^2) phi

away from the origin, where ``D D* = -laplacian_a`` (the point field sits at 0).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError
from .forms import eval_pauli_form
from .grid import (
    GridSpec,
    LOG_UNIFORM,
    RadialGrid,
    RadialProfile,
    build_grid,
    integrate_weighted,
    make_power_exp,
)
from .io import SweepTable, fit_loglog_slope
from .model import CouplingParams, half_gap

RESIDUAL_CUT = 10.0      # residual region starts at RESIDUAL_CUT * rho_min


@dataclass(frozen=True)
class ScaledEnergy:
    """Ground energy at speed of light ``c`` and its shift from ``c^2``."""

    c: float
    lambda_c: float
    shifted: float
    limit: float
    nu: float
    a: float

    @property
    def lower_upper_ratio(self) -> float:
        """``sqrt((c^2 - lambda_c)/(c^2 + lambda_c))``, cancellation-free."""
        c2 = self.c * self.c
        return math.sqrt(-self.shifted / (c2 + self.lambda_c))

    @property
    def upper_exponent(self) -> float:
        """Power of ``rho`` in the upper component; tends to ``-a``."""
        ca = half_gap(self.a)
        nc = self.nu / self.c
        return math.sqrt((ca - nc) * (ca + nc)) - 0.5


def binding_limit(params: CouplingParams) -> float:
    """``-nu^2 / (2 c(a)^2)``."""
    ca = params.c
    return -params.nu * params.nu / (2.0 * ca * ca)


def scaled_energy(params: CouplingParams, c: float) -> ScaledEnergy:
    """Energy of the operator with speed of light ``c``.

    Raises
    ------
    DomainError
        If ``c < nu / c(a)`` (no ground state in the gap).
    """
    ca = params.c
    if not c > 0.0 or params.nu > ca * c:
        raise DomainError(f"speed of light c={c!r} must be at least nu/c(a)={params.nu / ca!r}")
    r = params.nu / (ca * c)
    root = math.sqrt((1.0 - r) * (1.0 + r))
    # c^2 (sqrt(1 - x) - 1) = -c^2 x / (sqrt(1 - x) + 1) with c^2 x = (nu / c(a))^2
    shifted = -(params.nu / ca) ** 2 / (root + 1.0)
    return ScaledEnergy(float(c), c * c * root, shifted, binding_limit(params),
                        params.nu, params.a)


def convergence_sweep(params: CouplingParams, c_list: Sequence[float]) -> SweepTable:
    """Table ``(c, lambda_c, shifted, error, ratio)`` with fitted slopes in provenance.

    ``error = |shifted - limit|`` decays like ``c^-2`` and the lower/upper
    ratio like ``c^-1``.
    """
    rows = []
    for c in c_list:
        e = scaled_energy(params, float(c))
        rows.append((e.c, e.lambda_c, e.shifted, abs(e.shifted - e.limit), e.lower_upper_ratio))
    table = SweepTable(("c", "lambda_c", "shifted", "error", "ratio"), rows,
                       {"command": "nonrel", "parameters": {"nu": params.nu, "a": params.a},
                        "limit": binding_limit(params)})
    if len(rows) >= 2:
        cs = [r[0] for r in rows]
        table.provenance["error_slope"] = fit_loglog_slope(cs, [r[3] for r in rows])
        table.provenance["ratio_slope"] = fit_loglog_slope(cs, [r[4] for r in rows])
    return table


def limiting_grid(params: CouplingParams, N: int = 4000, rho_min: float = 1e-6) -> RadialGrid:
    B = params.nu / params.c
    return build_grid(GridSpec(LOG_UNIFORM, rho_min, max(50.0, 40.0 / B), N))


def limiting_profile(params: CouplingParams, grid: Optional[RadialGrid] = None,
                     decay_scale: float = 1.0) -> RadialProfile:
    """``rho^-a exp(-s nu rho / c(a))`` in mode 0 (``s = decay_scale``)."""
    grid = grid or limiting_grid(params)
    return make_power_exp(-params.a, decay_scale * params.nu / params.c, grid, mode=0)


def pauli_residual(params: CouplingParams, phi: Optional[RadialProfile] = None,
                   grid: Optional[RadialGrid] = None) -> float:
    """Relative residual of the limiting Pauli equation (mode 0).

    Derivatives are taken by finite differences of the samples.  At each node
    the residual is divided by the largest of the individual terms, and the
    result is averaged in ``L^2(|phi|^2 rho drho)`` over ``rho >= 10 rho_min``.
    """
    if phi is None:
        phi = limiting_profile(params, grid)
    g = phi.grid
    r = g.nodes
    v = np.asarray(phi.values, dtype=float)
    d1 = g.d_drho(v)
    d2 = g.d_drho(d1)
    E = binding_limit(params)
    a, nu = params.a, params.nu
    terms = np.vstack([-0.5 * d2, -0.5 * d1 / r, 0.5 * a * a * v / r ** 2,
                       -nu * v / r, -E * v])
    res = terms.sum(axis=0)
    scale = np.max(np.abs(terms), axis=0)
    keep = (r >= RESIDUAL_CUT * g.rho_min) & (scale > 0)
    # drop the stencil-boundary nodes at the far end
    keep[-3:] = False
    w = (v * v * r)[keep] * g.weights[keep]
    rel = (res[keep] / scale[keep]) ** 2
    return float(math.sqrt(np.dot(w, rel) / np.sum(w)))


def rayleigh_energy(params: CouplingParams, phi: Optional[RadialProfile] = None) -> float:
    """``(2 q(phi) - nu int |phi|^2/|x|) / int |phi|^2`` in mode 0."""
    if phi is None:
        phi = limiting_profile(params)
    q = eval_pauli_form(phi, params, 0)
    norm = 2.0 * math.pi * integrate_weighted(phi, 1.0)
    coul = 2.0 * math.pi * params.nu * integrate_weighted(phi, 0.0)
    return (2.0 * q - coul) / norm
