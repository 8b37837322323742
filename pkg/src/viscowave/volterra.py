"""Second-kind Volterra integral equations on uniform grids.

Equations of the form

    y(t) = g(t) + int_0^t k(t, s) y(s) ds

are solved two independent ways: implicit time marching with the product
trapezoid rule (second order), and Picard iteration on the same quadrature.
The two routes cross-validate each other; on contraction problems they agree
to the fixed-point tolerance.

Kernels come in two flavours.  A difference kernel k(t, s) = kappa(t - s) is
passed as an array of samples kappa(t_j) on the grid; a general kernel is
passed as a callable k(t, s_array) vectorised in its second argument.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .grids import TimeGrid
from .quadrature import trapezoid_convolve

KernelSpec = Union[np.ndarray, Callable[[float, np.ndarray], np.ndarray]]

# |1 - (dt/2) k(t_j, t_j)| below this is treated as a singular diagonal factor.
_SINGULAR_TOL = 1e-12


class StepSizeError(RuntimeError):
    """Marching diagonal factor 1 - (dt/2) k(t_j, t_j) is numerically singular."""


@dataclass
class VolterraProblem:
    """Forcing g sampled on the grid plus the kernel (samples or callable)."""

    forcing: np.ndarray
    kernel: KernelSpec

    def kernel_is_difference(self) -> bool:
        return not callable(self.kernel)


@dataclass
class PicardResult:
    solution: np.ndarray
    contraction_estimate: float
    iterations: int


def _check_forcing(problem: VolterraProblem, grid: TimeGrid) -> np.ndarray:
    g = np.asarray(problem.forcing, dtype=float)
    if g.shape[-1] != grid.n_nodes:
        raise ValueError(
            f"forcing has {g.shape[-1]} samples but the grid has {grid.n_nodes} nodes"
        )
    if not np.all(np.isfinite(g)):
        raise ValueError("forcing contains non-finite samples")
    return g


def march_difference_kernel(kernel: np.ndarray, forcing: np.ndarray, dt: float) -> np.ndarray:
    """Trapezoid marching for difference kernels, batched over leading axes.

    kernel and forcing broadcast against each other; time is the last axis.
    Each step solves the scalar implicit equation

        y_j (1 - dt/2 k_0) = g_j + dt (1/2 k_j y_0 + sum_{0<i<j} k_{j-i} y_i).
    """
    k = np.asarray(kernel, dtype=float)
    f = np.asarray(forcing, dtype=float)
    shape = np.broadcast_shapes(k.shape, f.shape)
    n = shape[-1]
    kb = np.broadcast_to(k, shape)
    fb = np.broadcast_to(f, shape)
    denom = 1.0 - 0.5 * dt * kb[..., 0]
    if np.any(np.abs(denom) < _SINGULAR_TOL):
        raise StepSizeError(
            "singular diagonal factor 1 - dt/2*k(0) at node 1; reduce the step size"
        )
    y = np.empty(shape)
    y[..., 0] = fb[..., 0]
    for j in range(1, n):
        acc = 0.5 * kb[..., j] * y[..., 0]
        if j > 1:
            acc = acc + np.einsum("...i,...i->...", kb[..., j - 1 : 0 : -1], y[..., 1:j])
        y[..., j] = (fb[..., j] + dt * acc) / denom
    return y


def _march_general_kernel(
    kfun: Callable[[float, np.ndarray], np.ndarray],
    forcing: np.ndarray,
    grid: TimeGrid,
) -> np.ndarray:
    t = grid.times
    dt = grid.dt
    y = np.empty_like(forcing)
    y[..., 0] = forcing[..., 0]
    for j in range(1, grid.n_nodes):
        row = np.asarray(kfun(t[j], t[: j + 1]), dtype=float)
        denom = 1.0 - 0.5 * dt * row[j]
        if abs(denom) < _SINGULAR_TOL:
            raise StepSizeError(
                f"singular diagonal factor 1 - dt/2*k(t_j, t_j) at node {j}; "
                "reduce the step size"
            )
        acc = 0.5 * row[0] * y[..., 0]
        if j > 1:
            acc = acc + y[..., 1:j] @ row[1:j]
        y[..., j] = (forcing[..., j] + dt * acc) / denom
    return y


def solve_marching(problem: VolterraProblem, grid: TimeGrid) -> np.ndarray:
    """March the discretized equation forward; O(dt^2) accurate."""
    g = _check_forcing(problem, grid)
    if problem.kernel_is_difference():
        k = np.asarray(problem.kernel, dtype=float)
        if k.shape[-1] != grid.n_nodes:
            raise ValueError(
                f"difference kernel has {k.shape[-1]} samples, expected {grid.n_nodes}"
            )
        return march_difference_kernel(k, g, grid.dt)
    return _march_general_kernel(problem.kernel, g, grid)


def _integral_operator(problem: VolterraProblem, grid: TimeGrid):
    """Return y -> int_0^t k(t,s) y(s) ds under the product trapezoid rule."""
    dt = grid.dt
    if problem.kernel_is_difference():
        k = np.asarray(problem.kernel, dtype=float)
        if k.shape[-1] != grid.n_nodes:
            raise ValueError(
                f"difference kernel has {k.shape[-1]} samples, expected {grid.n_nodes}"
            )
        return lambda y: trapezoid_convolve(k, y, dt)

    t = grid.times
    kfun = problem.kernel

    def apply(y: np.ndarray) -> np.ndarray:
        out = np.zeros_like(y)
        for j in range(1, grid.n_nodes):
            row = np.asarray(kfun(t[j], t[: j + 1]), dtype=float)
            acc = 0.5 * (row[0] * y[..., 0] + row[j] * y[..., j])
            if j > 1:
                acc = acc + y[..., 1:j] @ row[1:j]
            out[..., j] = dt * acc
        return out

    return apply


def solve_picard(problem: VolterraProblem, grid: TimeGrid, n_iter: int = 20) -> PicardResult:
    """Fixed-point iteration y^(m) = g + K y^(m-1) starting from y^(0) = g.

    Converges geometrically when the quadrature operator is a contraction;
    contraction_estimate is the sup-norm distance of the last two iterates.
    """
    if n_iter < 1:
        raise ValueError(f"n_iter must be >= 1, got {n_iter}")
    g = _check_forcing(problem, grid)
    apply = _integral_operator(problem, grid)
    y_prev = g
    y = g + apply(g)
    for _ in range(n_iter - 1):
        y_prev, y = y, g + apply(y)
    gap = float(np.max(np.abs(y - y_prev)))
    return PicardResult(solution=y, contraction_estimate=gap, iterations=n_iter)
