"""Characteristic function of the log forward via an affine ODE system.

For x(t) = ln(F(t, T) / F(0, T)) the conditional characteristic function
E[exp(i theta x(t_e)) | x(t) = x, v(t) = v] has the exponential-affine form
exp(i theta x + A(tau) + B(tau) v) with tau = t_e - t and A(0) = B(0) = 0.
The coefficients solve

    dA/dtau = beta B
    dB/dtau = -(theta^2 + i theta) sigma_F^2(t_e - tau, T) / 2 - beta B
              + alpha^2 B^2 / 2
              + i theta B alpha sigma (rho1 exp(-beta1 (T - t_e + tau))
                                       + R rho2 exp(-beta2 (T - t_e + tau)))

integrated here with a fixed-step classical Runge-Kutta scheme, vectorized
over theta so a whole quadrature grid is advanced in one pass.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, NonConvergence, NumericalError
from .model import ModelParams, variance_rate

__all__ = ["ab_ode_rhs", "integrate_ab", "charfn_value", "default_ab_steps"]

# Diverging Riccati iterates trip this bound long before overflow.
_B_OVERFLOW = 1e12

_STEPS_PER_YEAR = 200
_MIN_STEPS = 50


def default_ab_steps(t_e: float) -> int:
    """Default Runge-Kutta step count for an expiry of t_e years."""
    return max(_MIN_STEPS, int(math.ceil(_STEPS_PER_YEAR * t_e)))


def ab_ode_rhs(tau, a_val, b_val, theta, t_e: float, T: float, p: ModelParams):
    """Right-hand side (dA/dtau, dB/dtau) of the affine ODE system.

    ``theta``, ``a_val`` and ``b_val`` may be arrays of matching shape;
    ``tau`` is a scalar in [0, t_e].
    """
    # Accumulated tau can land a few ulp past t_e at the final step.
    rate = variance_rate(min(max(t_e - tau, 0.0), T), T, p)
    cross = p.alpha * p.sigma * (
        p.rho1 * math.exp(-p.beta1 * (T - t_e + tau))
        + p.R * p.rho2 * math.exp(-p.beta2 * (T - t_e + tau))
    )
    db = (
        -0.5 * (theta**2 + 1j * theta) * rate
        - p.beta * b_val
        + 0.5 * p.alpha**2 * b_val * b_val
        + 1j * theta * b_val * cross
    )
    da = p.beta * b_val
    return da, db


def integrate_ab(theta, t_e: float, T: float, p: ModelParams, n_steps: int | None = None):
    """Integrate the (A, B) system from tau = 0 to tau = t_e.

    Parameters
    ----------
    theta : float or ndarray
        Transform variable(s); the integration is vectorized across them.
    t_e, T : float
        Option expiry and settlement of the forward, 0 <= t_e <= T.
    n_steps : int, optional
        Fixed Runge-Kutta step count; defaults to ``default_ab_steps(t_e)``.

    Returns
    -------
    (A, B) : complex scalars or ndarrays shaped like ``theta``.

    Raises
    ------
    NonConvergence
        If |B| exceeds an overflow guard during integration, which signals a
        divergent iteration rather than a meaningful value.
    """
    if not 0.0 <= t_e <= T:
        raise DomainError("integrate_ab requires 0 <= t_e <= T")
    theta_arr = np.asarray(theta, dtype=float)
    scalar = theta_arr.ndim == 0
    theta_arr = np.atleast_1d(theta_arr)
    a_val = np.zeros(theta_arr.shape, dtype=complex)
    b_val = np.zeros(theta_arr.shape, dtype=complex)
    if t_e == 0.0:
        return (a_val[0], b_val[0]) if scalar else (a_val, b_val)

    if n_steps is None:
        n_steps = default_ab_steps(t_e)
    if n_steps < 1:
        raise DomainError("n_steps must be >= 1")
    h = t_e / n_steps
    tau = 0.0
    for _ in range(n_steps):
        da1, db1 = ab_ode_rhs(tau, a_val, b_val, theta_arr, t_e, T, p)
        da2, db2 = ab_ode_rhs(
            tau + 0.5 * h, a_val + 0.5 * h * da1, b_val + 0.5 * h * db1, theta_arr, t_e, T, p
        )
        da3, db3 = ab_ode_rhs(
            tau + 0.5 * h, a_val + 0.5 * h * da2, b_val + 0.5 * h * db2, theta_arr, t_e, T, p
        )
        da4, db4 = ab_ode_rhs(
            tau + h, a_val + h * da3, b_val + h * db3, theta_arr, t_e, T, p
        )
        a_val = a_val + (h / 6.0) * (da1 + 2.0 * da2 + 2.0 * da3 + da4)
        b_val = b_val + (h / 6.0) * (db1 + 2.0 * db2 + 2.0 * db3 + db4)
        tau += h
        if not np.all(np.isfinite(b_val.view(float))) or np.max(np.abs(b_val)) > _B_OVERFLOW:
            raise NonConvergence(
                f"B diverged at tau = {tau:.6g} (theta up to {theta_arr.max():.6g}, "
                f"{n_steps} steps)"
            )
    return (a_val[0], b_val[0]) if scalar else (a_val, b_val)


def charfn_value(theta, x, v, t_e: float, T: float, p: ModelParams, n_steps: int | None = None):
    """Conditional characteristic function exp(i theta x + A + B v).

    ``v`` must be >= 0.  For real ``theta`` this is the characteristic
    function of a genuine distribution, so its modulus cannot exceed 1;
    a material violation indicates a broken integration and raises.
    """
    if v < 0.0:
        raise DomainError("variance state v must be >= 0")
    a_val, b_val = integrate_ab(theta, t_e, T, p, n_steps=n_steps)
    exponent = 1j * np.multiply(theta, x) + a_val + b_val * v
    real_theta = np.all(np.isreal(theta))
    if real_theta and np.any(np.real(exponent) > 1e-8):
        raise NumericalError(
            "characteristic function modulus exceeded 1; integration is unreliable"
        )
    return np.exp(exponent)
