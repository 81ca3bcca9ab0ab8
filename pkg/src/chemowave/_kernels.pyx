# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: exponential prefix sweeps, Thomas solves, IMEX stages.

Semantics must match chemowave._kernels_py exactly; the backend module picks
one of the two at import time.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

__backend_name__ = "compiled"


def exp_filter_forward(double[::1] x, double q):
    """y[0] = x[0]; y[i] = q*y[i-1] + x[i]."""
    cdef Py_ssize_t n = x.shape[0]
    out = np.empty(n)
    cdef double[::1] y = out
    cdef Py_ssize_t i
    if n == 0:
        return out
    y[0] = x[0]
    for i in range(1, n):
        y[i] = q * y[i - 1] + x[i]
    return out


def exp_filter_backward(double[::1] x, double q):
    """y[n-1] = x[n-1]; y[i] = q*y[i+1] + x[i]."""
    cdef Py_ssize_t n = x.shape[0]
    out = np.empty(n)
    cdef double[::1] y = out
    cdef Py_ssize_t i
    if n == 0:
        return out
    y[n - 1] = x[n - 1]
    for i in range(n - 2, -1, -1):
        y[i] = q * y[i + 1] + x[i]
    return out


def tridiag_factor(double[::1] dl, double[::1] d, double[::1] du):
    """LU factors (no pivoting) of a tridiagonal matrix, as an opaque tuple.

    Valid for the diagonally dominant systems produced by the implicit
    diffusion steps and the screened-Poisson solve.
    """
    cdef Py_ssize_t n = d.shape[0]
    low_arr = np.empty(n - 1)
    diag_arr = np.empty(n)
    cdef double[::1] low = low_arr
    cdef double[::1] diag = diag_arr
    cdef Py_ssize_t i
    diag[0] = d[0]
    for i in range(1, n):
        low[i - 1] = dl[i - 1] / diag[i - 1]
        diag[i] = d[i] - low[i - 1] * du[i - 1]
    return low_arr, diag_arr, np.asarray(du).copy()


def tridiag_solve_factored(factored, double[::1] b):
    cdef double[::1] low = factored[0]
    cdef double[::1] diag = factored[1]
    cdef double[::1] du = factored[2]
    cdef Py_ssize_t n = diag.shape[0]
    out = np.empty(n)
    cdef double[::1] x = out
    cdef Py_ssize_t i
    x[0] = b[0]
    for i in range(1, n):
        x[i] = b[i] - low[i - 1] * x[i - 1]
    x[n - 1] = x[n - 1] / diag[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = (x[i] - du[i] * x[i + 1]) / diag[i]
    return out


def tridiag_solve(double[::1] dl, double[::1] d, double[::1] du, double[::1] b):
    return tridiag_solve_factored(tridiag_factor(dl, d, du), b)



def frame_rhs(double[::1] U, double[::1] drift, double[::1] lin, double gamma,
              double h, double dt):
    """Explicit stage of the comoving-frame stepper.

    out[i] = U[i] + dt*( drift[i]*(U[i+1]-U[i-1])/(2h)
                         + (lin[i] - gamma*U[i])*U[i] )  for interior i;
    endpoint entries are copied from U (boundary rows overwrite them).
    """
    cdef Py_ssize_t n = U.shape[0]
    out = np.empty(n)
    cdef double[::1] y = out
    cdef double inv2h = 1.0 / (2.0 * h)
    cdef Py_ssize_t i
    cdef double ux
    y[0] = U[0]
    y[n - 1] = U[n - 1]
    for i in range(1, n - 1):
        ux = (U[i + 1] - U[i - 1]) * inv2h
        y[i] = U[i] + dt * (drift[i] * ux + (lin[i] - gamma * U[i]) * U[i])
    return out


def lab_rhs(double[::1] u, double[::1] v, double[::1] vx, double chi,
            double a, double b, double h, double dt):
    """Explicit stage of the lab-frame stepper (advection + logistic source).

    out[i] = u[i] + dt*( -chi*u_x[i]*vx[i] + u[i]*(a - chi*v[i] - (b-chi)*u[i]) )
    with centered u_x on interior nodes; endpoints copied from u.
    """
    cdef Py_ssize_t n = u.shape[0]
    out = np.empty(n)
    cdef double[::1] y = out
    cdef double inv2h = 1.0 / (2.0 * h)
    cdef double bc = b - chi
    cdef Py_ssize_t i
    cdef double ux
    y[0] = u[0]
    y[n - 1] = u[n - 1]
    for i in range(1, n - 1):
        ux = (u[i + 1] - u[i - 1]) * inv2h
        y[i] = u[i] + dt * (-chi * ux * vx[i] + u[i] * (a - chi * v[i] - bc * u[i]))
    return out
