"""Pure-Python implementations of the compiled kernels."""
from __future__ import annotations

import math

import numpy as np

_TINY = 1e-300


def sturm_count(d: np.ndarray, e: np.ndarray) -> int:
    """Number of negative eigenvalues of the symmetric tridiagonal ``(d, e)``.

    LDL^T pivots counted by sign (Sylvester's law of inertia).
    """
    d = np.asarray(d, dtype=float)
    e2 = np.asarray(e, dtype=float) ** 2
    q = d[0] if d[0] != 0.0 else -_TINY
    count = int(q < 0.0)
    for i in range(1, d.size):
        q = d[i] - e2[i - 1] / q
        if q == 0.0:
            q = -_TINY
        count += q < 0.0
    return int(count)


def _rhs(t, u, v, lam, nu, pu, pv):
    r = np.exp(t)
    return pu * u - ((1.0 + lam) * r + nu) * v, -pv * v - ((1.0 - lam) * r - nu) * u


def rk4_final(t0, h, nsteps, u0, v0, lam, nu, a, ell):
    """Batched RK4 for the radial system in ``t = log rho`` (vectorized over energies)."""
    u = np.array(u0, dtype=float)
    v = np.array(v0, dtype=float)
    lam = np.asarray(lam, dtype=float)
    pu, pv = ell - a, ell + 1.0 - a
    for k in range(int(nsteps)):
        t = t0 + k * h
        k1u, k1v = _rhs(t, u, v, lam, nu, pu, pv)
        k2u, k2v = _rhs(t + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v, lam, nu, pu, pv)
        k3u, k3v = _rhs(t + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v, lam, nu, pu, pv)
        k4u, k4v = _rhs(t + h, u + h * k3u, v + h * k3v, lam, nu, pu, pv)
        u = u + h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u)
        v = v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        s = np.abs(u) + np.abs(v)
        big = s > 1e100
        if big.any():
            u[big] /= s[big]
            v[big] /= s[big]
    return u, v


def rk4_path(t0, h, nsteps, u0, v0, lam, nu, a, ell):
    """Single-energy RK4 trajectory with plain floats."""
    pu, pv = ell - a, ell + 1.0 - a
    us = np.empty(int(nsteps) + 1)
    vs = np.empty(int(nsteps) + 1)
    u, v = float(u0), float(v0)
    us[0], vs[0] = u, v
    exp = math.exp
    for k in range(int(nsteps)):
        t = t0 + k * h
        r1, r2, r4 = exp(t), exp(t + 0.5 * h), exp(t + h)
        k1u = pu * u - ((1 + lam) * r1 + nu) * v
        k1v = -pv * v - ((1 - lam) * r1 - nu) * u
        uu, vv = u + 0.5 * h * k1u, v + 0.5 * h * k1v
        k2u = pu * uu - ((1 + lam) * r2 + nu) * vv
        k2v = -pv * vv - ((1 - lam) * r2 - nu) * uu
        uu, vv = u + 0.5 * h * k2u, v + 0.5 * h * k2v
        k3u = pu * uu - ((1 + lam) * r2 + nu) * vv
        k3v = -pv * vv - ((1 - lam) * r2 - nu) * uu
        uu, vv = u + h * k3u, v + h * k3v
        k4u = pu * uu - ((1 + lam) * r4 + nu) * vv
        k4v = -pv * vv - ((1 - lam) * r4 - nu) * uu
        u += h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u)
        v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        us[k + 1], vs[k + 1] = u, v
    return us, vs
