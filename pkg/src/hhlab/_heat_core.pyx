# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled radial heat convolution; same contract as hhlab._heat_py.heat_sum.

For d = 1 and d = 3 the kernel is rewritten so each pair costs one exponential:
near the origin (r within the window width) the Gaussian factors as
exp(-(r^2 + rho^2)/4t) * exp(r rho/2t), with the rho part precomputed per point.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, expm1, log, M_PI, pow, lgamma
from scipy.special.cython_special cimport ive

cnp.import_array()


cdef inline double sinh2(double y) noexcept nogil:
    # 2 sinh(y) without cancellation for small y
    cdef double m = expm1(y)
    return m * (m + 2.0) / (m + 1.0)


def heat_sum(const double[::1] targets, double t, int d, const double[::1] pts,
             const double[::1] wf, double width):
    cdef Py_ssize_t nt = targets.shape[0], npt = pts.shape[0]
    out_arr = np.empty(nt)
    cdef double[::1] out = out_arr
    near_arr = np.empty(npt)
    far_arr = np.empty(npt)
    cdef double[::1] near = near_arr
    cdef double[::1] far = far_arr
    cdef double nu = 0.5 * d - 1.0
    cdef double small_lim = exp(-nu * log(2.0) - lgamma(nu + 1.0))
    cdef double c1 = pow(4.0 * M_PI * t, -0.5)
    cdef double cd = pow(2.0 * t, -0.5 * d)
    cdef double q = 0.25 / t
    cdef Py_ssize_t k, j, lo = 0, hi = 0
    cdef double r, rho, acc, g, x, z, bes
    with nogil:
        for j in range(npt):
            rho = pts[j]
            if d == 3:
                far[j] = wf[j] * rho
            elif d == 1:
                far[j] = wf[j]
            else:
                far[j] = wf[j] * pow(rho, d - 1)
            near[j] = far[j] * exp(-q * rho * rho)
        for k in range(nt):
            r = targets[k]
            # targets are increasing, so both window ends only move right
            while lo < npt and pts[lo] < r - width:
                lo += 1
            if hi < lo:
                hi = lo
            while hi < npt and pts[hi] <= r + width:
                hi += 1
            acc = 0.0
            if d == 3 and r <= width:
                for j in range(lo, hi):
                    acc += near[j] * sinh2(2.0 * q * r * pts[j])
                out[k] = c1 / r * exp(-q * r * r) * acc
            elif d == 3:
                for j in range(lo, hi):
                    rho = pts[j]
                    x = r * rho / t
                    g = exp(-q * (r - rho) * (r - rho))
                    if x < 40.0:
                        g = g * -expm1(-x)
                    acc += far[j] * g
                out[k] = c1 / r * acc
            elif d == 1 and r <= width:
                for j in range(lo, hi):
                    g = exp(2.0 * q * r * pts[j])
                    acc += near[j] * (g + 1.0 / g)
                out[k] = c1 * exp(-q * r * r) * acc
            elif d == 1:
                for j in range(lo, hi):
                    rho = pts[j]
                    x = r * rho / t
                    g = exp(-q * (r - rho) * (r - rho))
                    if x < 40.0:
                        g = g * (1.0 + exp(-x))
                    acc += far[j] * g
                out[k] = c1 * acc
            else:
                for j in range(lo, hi):
                    rho = pts[j]
                    z = r * rho / (2.0 * t)
                    if z < 1e-12:
                        bes = small_lim
                    else:
                        bes = pow(z, -nu) * ive(nu, z)
                    acc += far[j] * bes * exp(-q * (r - rho) * (r - rho))
                out[k] = cd * acc
    return out_arr
