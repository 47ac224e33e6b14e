# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: tridiagonal inertia count and batched RK4 shooting."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs, sqrt

cnp.import_array()

DEF TINY = 1e-300


def sturm_count(double[::1] d, double[::1] e):
    """Number of negative eigenvalues of the symmetric tridiagonal (d, e)."""
    cdef Py_ssize_t n = d.shape[0], i
    cdef double q = d[0]
    cdef long count = 0
    if q == 0.0:
        q = -TINY
    if q < 0.0:
        count += 1
    for i in range(1, n):
        q = d[i] - e[i - 1] * e[i - 1] / q
        if q == 0.0:
            q = -TINY
        if q < 0.0:
            count += 1
    return count


cdef inline void _rhs(double t, double u, double v, double lam, double nu,
                      double pu, double pv, double *du, double *dv) nogil:
    cdef double r = exp(t)
    du[0] = pu * u - ((1.0 + lam) * r + nu) * v
    dv[0] = -pv * v - ((1.0 - lam) * r - nu) * u


def rk4_final(double t0, double h, long nsteps, double[::1] u0, double[::1] v0,
              double[::1] lam, double nu, double a, long ell):
    """Integrate the radial system in t = log(rho) for a batch of energies.

    Returns the final (u, v) arrays; states are rescaled on the fly, which
    leaves the ratio u/v unchanged.
    """
    cdef Py_ssize_t nb = lam.shape[0], b
    cdef long k
    cdef double pu = ell - a, pv = ell + 1.0 - a
    cdef double u, v, t, l, k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v, s
    out_u = np.empty(nb)
    out_v = np.empty(nb)
    cdef double[::1] ou = out_u, ov = out_v
    with nogil:
        for b in range(nb):
            u = u0[b]
            v = v0[b]
            l = lam[b]
            t = t0
            for k in range(nsteps):
                _rhs(t, u, v, l, nu, pu, pv, &k1u, &k1v)
                _rhs(t + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v, l, nu, pu, pv, &k2u, &k2v)
                _rhs(t + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v, l, nu, pu, pv, &k3u, &k3v)
                _rhs(t + h, u + h * k3u, v + h * k3v, l, nu, pu, pv, &k4u, &k4v)
                u = u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
                v = v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
                t = t0 + (k + 1) * h
                s = fabs(u) + fabs(v)
                if s > 1e100:
                    u = u / s
                    v = v / s
            ou[b] = u
            ov[b] = v
    return out_u, out_v


def rk4_path(double t0, double h, long nsteps, double u0, double v0,
             double lam, double nu, double a, long ell):
    """Single-energy trajectory; returns arrays of shape (nsteps + 1,)."""
    cdef double pu = ell - a, pv = ell + 1.0 - a
    cdef double u = u0, v = v0, t, k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v
    cdef long k
    us = np.empty(nsteps + 1)
    vs = np.empty(nsteps + 1)
    cdef double[::1] U = us, V = vs
    U[0] = u
    V[0] = v
    with nogil:
        for k in range(nsteps):
            t = t0 + k * h
            _rhs(t, u, v, lam, nu, pu, pv, &k1u, &k1v)
            _rhs(t + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v, lam, nu, pu, pv, &k2u, &k2v)
            _rhs(t + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v, lam, nu, pu, pv, &k3u, &k3v)
            _rhs(t + h, u + h * k3u, v + h * k3v, lam, nu, pu, pv, &k4u, &k4v)
            u = u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
            v = v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
            U[k + 1] = u
            V[k + 1] = v
    return us, vs
