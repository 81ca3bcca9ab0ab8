"""Pure NumPy/SciPy kernels; drop-in replacement for the compiled extension.

The exponential sweeps map onto a first-order IIR filter and the tridiagonal
solves onto LAPACK's gttrf/gttrs, so the fallback stays O(n) per call.
"""

import numpy as np
from scipy.linalg import lapack
from scipy.signal import lfilter

__backend_name__ = "python"


def exp_filter_forward(x, q):
    """y[0] = x[0]; y[i] = q*y[i-1] + x[i]."""
    return lfilter([1.0], [1.0, -q], x)


def exp_filter_backward(x, q):
    """y[n-1] = x[n-1]; y[i] = q*y[i+1] + x[i]."""
    return lfilter([1.0], [1.0, -q], x[::-1])[::-1]


def tridiag_factor(dl, d, du):
    """LU factorization of a tridiagonal matrix for repeated solves."""
    dl_f, d_f, du_f, du2, ipiv, info = lapack.dgttrf(dl, d, du)
    if info != 0:
        raise np.linalg.LinAlgError(f"tridiagonal factorization failed (info={info})")
    return dl_f, d_f, du_f, du2, ipiv


def tridiag_solve_factored(factored, b):
    dl_f, d_f, du_f, du2, ipiv = factored
    x, info = lapack.dgttrs(dl_f, d_f, du_f, du2, ipiv, b)
    if info != 0:
        raise np.linalg.LinAlgError(f"tridiagonal solve failed (info={info})")
    return x


def tridiag_solve(dl, d, du, b):
    return tridiag_solve_factored(tridiag_factor(dl, d, du), b)


def frame_rhs(U, drift, lin, gamma, h, dt):
    """Explicit stage of the comoving-frame stepper (see compiled twin)."""
    out = U.copy()
    ux = (U[2:] - U[:-2]) / (2.0 * h)
    inner = U[1:-1]
    out[1:-1] = inner + dt * (drift[1:-1] * ux + (lin[1:-1] - gamma * inner) * inner)
    return out


def lab_rhs(u, v, vx, chi, a, b, h, dt):
    """Explicit stage of the lab-frame stepper (see compiled twin)."""
    out = u.copy()
    ux = (u[2:] - u[:-2]) / (2.0 * h)
    inner = u[1:-1]
    out[1:-1] = inner + dt * (
        -chi * ux * vx[1:-1] + inner * (a - chi * v[1:-1] - (b - chi) * inner)
    )
    return out
