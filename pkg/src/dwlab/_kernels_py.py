"""Pure-numpy fallback for the compiled kernels (same signatures)."""
import numpy as np


def nonlinear_phase(psi, v, coef, eps, sigma):
    """In place: psi *= exp(-1j*coef*(v + eps*|psi|**(2*sigma)))."""
    w = v if eps == 0.0 else v + eps * np.abs(psi) ** (2 * sigma)
    psi *= np.exp(-1j * coef * w)


def _rhs(cr, cl, om, Om, eps_c, sigma):
    dr = -1j * (-om * cl + Om * cr + eps_c * abs(cr) ** (2 * sigma) * cr)
    dl = -1j * (-om * cr + Om * cl + eps_c * abs(cl) ** (2 * sigma) * cl)
    return dr, dl


def twomode_rk4(cr, cl, om, Om, eps_c, sigma, dt, nsteps, stride, out):
    """RK4 loop matching the compiled kernel; returns (c_R, c_L, min_z)."""
    h2, h6 = dt / 2.0, dt / 6.0
    min_z = abs(cr) ** 2 - abs(cl) ** 2
    j = 0
    for i in range(nsteps):
        k1r, k1l = _rhs(cr, cl, om, Om, eps_c, sigma)
        k2r, k2l = _rhs(cr + h2 * k1r, cl + h2 * k1l, om, Om, eps_c, sigma)
        k3r, k3l = _rhs(cr + h2 * k2r, cl + h2 * k2l, om, Om, eps_c, sigma)
        k4r, k4l = _rhs(cr + dt * k3r, cl + dt * k3l, om, Om, eps_c, sigma)
        cr = cr + h6 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
        cl = cl + h6 * (k1l + 2.0 * k2l + 2.0 * k3l + k4l)
        z = abs(cr) ** 2 - abs(cl) ** 2
        if z < min_z:
            min_z = z
        if (i + 1) % stride == 0:
            out[j, 0] = cr
            out[j, 1] = cl
            j += 1
    return cr, cl, min_z
