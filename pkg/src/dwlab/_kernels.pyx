# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: split-step nonlinear phase rotation and the
fixed-step RK4 loop for the reduced two-mode system."""
import numpy as np

cimport cython
from libc.math cimport cos, sin, sqrt


cdef inline double _abs2_pow(double re, double im, int sigma) nogil:
    cdef double r2 = re * re + im * im
    cdef double out = r2
    cdef int j
    for j in range(sigma - 1):
        out *= r2
    return out


def nonlinear_phase(double complex[::1] psi, double[::1] v, double coef,
                    double eps, int sigma):
    """In place: psi[i] *= exp(-1j*coef*(v[i] + eps*|psi[i]|**(2*sigma)))."""
    cdef Py_ssize_t n = psi.shape[0]
    cdef Py_ssize_t i
    cdef double re, im, phase, c, s
    for i in range(n):
        re = psi[i].real
        im = psi[i].imag
        phase = -coef * (v[i] + eps * _abs2_pow(re, im, sigma))
        c = cos(phase)
        s = sin(phase)
        psi[i].real = re * c - im * s
        psi[i].imag = re * s + im * c


cdef inline void _rhs(double complex cr, double complex cl,
                      double om, double Om, double eps_c, int sigma,
                      double complex *dr, double complex *dl) nogil:
    cdef double complex j = 1j
    dr[0] = -j * (-om * cl + Om * cr + eps_c * _abs2_pow(cr.real, cr.imag, sigma) * cr)
    dl[0] = -j * (-om * cr + Om * cl + eps_c * _abs2_pow(cl.real, cl.imag, sigma) * cl)


def twomode_rk4(double complex cr, double complex cl,
                double om, double Om, double eps_c, int sigma,
                double dt, long nsteps, long stride,
                double complex[:, ::1] out):
    """Classical RK4 on the two-mode system; records (c_R, c_L) every
    `stride` steps into `out` and tracks the dense minimum of the population
    imbalance z = |c_R|^2 - |c_L|^2 over every step.

    Returns (c_R, c_L, min_z).
    """
    cdef double complex k1r, k1l, k2r, k2l, k3r, k3l, k4r, k4l
    cdef double complex yr, yl
    cdef double min_z, z
    cdef long i, j = 0
    cdef double h6 = dt / 6.0, h2 = dt / 2.0
    min_z = cr.real * cr.real + cr.imag * cr.imag \
        - cl.real * cl.real - cl.imag * cl.imag
    with nogil:
        for i in range(nsteps):
            _rhs(cr, cl, om, Om, eps_c, sigma, &k1r, &k1l)
            yr = cr + h2 * k1r
            yl = cl + h2 * k1l
            _rhs(yr, yl, om, Om, eps_c, sigma, &k2r, &k2l)
            yr = cr + h2 * k2r
            yl = cl + h2 * k2l
            _rhs(yr, yl, om, Om, eps_c, sigma, &k3r, &k3l)
            yr = cr + dt * k3r
            yl = cl + dt * k3l
            _rhs(yr, yl, om, Om, eps_c, sigma, &k4r, &k4l)
            cr = cr + h6 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
            cl = cl + h6 * (k1l + 2.0 * k2l + 2.0 * k3l + k4l)
            z = cr.real * cr.real + cr.imag * cr.imag \
                - cl.real * cl.real - cl.imag * cl.imag
            if z < min_z:
                min_z = z
            if (i + 1) % stride == 0:
                out[j, 0] = cr
                out[j, 1] = cl
                j += 1
    return cr, cl, min_z
