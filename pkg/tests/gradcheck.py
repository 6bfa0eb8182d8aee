"""Finite-difference gradient checking shared by the layer and model tests."""

import numpy as np

FD_STEP = 1e-4
REL_TOL = 1e-4


def fd_gradient(f, x, h=FD_STEP):
    """Central-difference gradient of scalar f at array x."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = grad.reshape(-1)
    base = x.copy().reshape(-1)
    for i in range(base.size):
        orig = base[i]
        base[i] = orig + h
        hi = f(base.reshape(x.shape))
        base[i] = orig - h
        lo = f(base.reshape(x.shape))
        base[i] = orig
        flat[i] = (hi - lo) / (2.0 * h)
    return grad


def relative_error(analytic, numeric):
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = max(np.max(np.abs(analytic)), np.max(np.abs(numeric)), 1e-12)
    return float(np.max(np.abs(analytic - numeric)) / scale)


def assert_close_grad(analytic, numeric, tol=REL_TOL):
    err = relative_error(analytic, numeric)
    assert err <= tol, f"gradient mismatch: relative error {err:.3e} > {tol:.0e}"
