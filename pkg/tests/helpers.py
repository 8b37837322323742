"""Shared oracle utilities for the test suite.

The integrators here are deliberately independent of the package's quadrature
and marching code: RK4 time stepping for ODE-equivalent reference solutions,
and a plain O(n^2) product-trapezoid sum for convolution cross-checks.
"""

import numpy as np


def rk4(f, y0, t1, n):
    """Classical fourth-order Runge-Kutta on [0, t1] with n uniform steps.

    Returns the (n+1, len(y0)) array of states including the initial one.
    """
    y = np.array(y0, dtype=float)
    h = t1 / n
    t = 0.0
    out = [y.copy()]
    for _ in range(n):
        k1 = f(t, y)
        k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = f(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
        out.append(y.copy())
    return np.array(out)


def free_memory_reference(xi, eta, mu, b, amplitude, rate, horizon, n):
    """RK4 solution of psi'' = (b - mu^2) psi + q, q' = amplitude psi - rate q.

    The auxiliary variable q carries the convolution with the exponential
    kernel amplitude * exp(-rate t), so this integrates the memory oscillator
    as a stiff-free first-order system.  Initial data: psi(0) = xi,
    psi'(0) = mu * eta, q(0) = 0.  Returns psi samples.
    """

    def rhs(t, y):
        return np.array(
            [y[1], (b - mu * mu) * y[0] + y[2], amplitude * y[0] - rate * y[2]]
        )

    states = rk4(rhs, [xi, mu * eta, 0.0], horizon, n)
    return states[:, 0]


def forced_memory_reference(mu, b, amplitude, rate, g, horizon, n):
    """Same augmented system driven by a forcing g(t), started from rest.

    Returns (psi, psi') samples on the RK4 grid.
    """

    def rhs(t, y):
        return np.array(
            [y[1], (b - mu * mu) * y[0] + y[2] + g(t), amplitude * y[0] - rate * y[2]]
        )

    states = rk4(rhs, [0.0, 0.0, 0.0], horizon, n)
    return states[:, 0], states[:, 1]


def direct_trapezoid_convolution(kernel, signal, dt):
    """O(n^2) reference for the causal product-trapezoid convolution."""
    n = kernel.shape[-1]
    out = np.zeros(n)
    for j in range(1, n):
        vals = kernel[j::-1] * signal[: j + 1]
        out[j] = dt * (np.sum(vals) - 0.5 * (vals[0] + vals[-1]))
    return out
