# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled path kernel: scalar event-driven simulation per path.

Walks each path jump-by-jump between grid times (exact jump epochs from
exponential inter-arrivals), with Gaussian increments over the intervening
stretches.  Occupation accumulates one indicator per grid cell, evaluated at
a uniformly jittered time inside the cell (conditionally unbiased for the
cell's occupation), matching the NumPy backend's convention.  Jump sizes
come from nonnegative-weight mixed-Erlang mixtures (categorical pick +
gamma); signed mixtures stay on the NumPy backend.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport INFINITY, sqrt
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (
    random_standard_exponential,
    random_standard_gamma,
    random_standard_normal,
    random_standard_uniform,
)

cnp.import_array()


cdef inline double _draw_jump(bitgen_t *state, double[::1] cum, double[::1] shape,
                              double[::1] rate) noexcept nogil:
    cdef double u = random_standard_uniform(state)
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t n = cum.shape[0]
    while i < n - 1 and u > cum[i]:
        i += 1
    return random_standard_gamma(state, shape[i]) / rate[i]


def simulate_paths(bit_generator, double x0, double b, double mu, double sigma,
                   double lam_up, cum_up, shape_up, rate_up,
                   double lam_dn, cum_dn, shape_dn, rate_dn,
                   horizons, double dt):
    """Simulate one block; returns ``(occupation, x_end)`` arrays."""
    cdef double[::1] hz = np.ascontiguousarray(horizons, dtype=np.float64)
    cdef Py_ssize_t n = hz.shape[0]
    occ_arr = np.zeros(n, dtype=np.float64)
    end_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] occ = occ_arr
    cdef double[::1] xend = end_arr
    cdef double[::1] cu = np.ascontiguousarray(cum_up, dtype=np.float64)
    cdef double[::1] su = np.ascontiguousarray(shape_up, dtype=np.float64)
    cdef double[::1] ru = np.ascontiguousarray(rate_up, dtype=np.float64)
    cdef double[::1] cd = np.ascontiguousarray(cum_dn, dtype=np.float64)
    cdef double[::1] sd = np.ascontiguousarray(shape_dn, dtype=np.float64)
    cdef double[::1] rd = np.ascontiguousarray(rate_dn, dtype=np.float64)

    cdef bitgen_t *state = <bitgen_t *>PyCapsule_GetPointer(
        bit_generator.capsule, "BitGenerator")

    cdef Py_ssize_t i
    cdef double horizon, x, a, t, t_next, t_mid, span, next_up, next_dn
    cdef double t_cur, t_jump, gap, target
    cdef int leg
    cdef bint is_up
    with bit_generator.lock, nogil:
        for i in range(n):
            horizon = hz[i]
            x = x0
            a = 0.0
            t = 0.0
            next_up = INFINITY
            next_dn = INFINITY
            if lam_up > 0.0:
                next_up = random_standard_exponential(state) / lam_up
            if lam_dn > 0.0:
                next_dn = random_standard_exponential(state) / lam_dn
            while t < horizon:
                t_next = t + dt
                if t_next > horizon:
                    t_next = horizon
                span = t_next - t
                t_mid = t + random_standard_uniform(state) * span
                t_cur = t
                for leg in range(2):
                    target = t_mid if leg == 0 else t_next
                    while True:
                        t_jump = next_up if next_up < next_dn else next_dn
                        if t_jump >= target:
                            break
                        is_up = next_up < next_dn
                        gap = t_jump - t_cur
                        x += mu * gap + sigma * sqrt(gap) * random_standard_normal(state)
                        if is_up:
                            x += _draw_jump(state, cu, su, ru)
                            next_up = t_jump + random_standard_exponential(state) / lam_up
                        else:
                            x -= _draw_jump(state, cd, sd, rd)
                            next_dn = t_jump + random_standard_exponential(state) / lam_dn
                        t_cur = t_jump
                    gap = target - t_cur
                    x += mu * gap + sigma * sqrt(gap) * random_standard_normal(state)
                    t_cur = target
                    if leg == 0:
                        a += span * (x <= b)
                t = t_next
            occ[i] = a
            xend[i] = x
    return occ_arr, end_arr
