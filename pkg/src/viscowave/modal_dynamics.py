"""Modal dynamics of the viscoelastic wave system under boundary traction.

Expanding the displacement in the mixed eigenbasis turns

    w'' = Delta w + b w + int_0^t K(t-s) w(s) ds,    dn w = f on the control faces,

into decoupled scalar problems per mode.  The traction enters through the
modal forcing g_n(t) = int_{Gamma_1} (phi_n|_{Gamma_1}) f(., t), and each mode
obeys a second-kind Volterra equation with the difference kernel

    G_n(tau) / mu_n,    G_n = b sin(mu_n tau) + (K * sin(mu_n .))(tau),

driven by the memoryless wave response.  The homogeneous (adjoint) modes use
the same kernel driven by xi_n cos(mu_n t) + eta_n sin(mu_n t), which encodes
initial data psi(0) = xi, psi'(0) with modal coefficients mu_n eta_n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import TimeGrid
from .memory_kernel import MemoryKernel
from .quadrature import trapezoid_convolve, trapezoid_weights
from .spectral_basis import SpectralBasis
from .volterra import march_difference_kernel

DEFAULT_SEED = 1870


@dataclass(frozen=True)
class StatePair:
    """Modal coefficient pair (xi, eta) over the frequencies mu.

    Depending on context the pair holds plain L2 x L2 data (adjoint initial
    data) or a terminal state in the weighted sense: xi_n = mu_n w_n(T),
    eta_n = w_n'(T).
    """

    xi: np.ndarray
    eta: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        eta = np.asarray(self.eta, dtype=float)
        mu = np.asarray(self.mu, dtype=float)
        if not (xi.shape == eta.shape == mu.shape) or xi.ndim != 1:
            raise ValueError("xi, eta, mu must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(xi)) and np.all(np.isfinite(eta))):
            raise ValueError("state coefficients must be finite")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "mu", mu)

    @property
    def n_modes(self) -> int:
        return self.xi.size


def sobolev_norm(v: StatePair, s: float = 0.0) -> float:
    """Spectral Sobolev norm sqrt(sum mu_n^(2s) (xi_n^2 + eta_n^2))."""
    w = v.mu ** (2.0 * s)
    return float(np.sqrt(np.sum(w * (v.xi**2 + v.eta**2))))


@dataclass(frozen=True)
class ModalTrajectory:
    """Per-mode displacement and velocity samples, time on the last axis."""

    values: np.ndarray
    velocities: np.ndarray
    mu: np.ndarray
    grid: TimeGrid

    def write_csv(self, path) -> None:
        header = "t," + ",".join(f"mode_{i + 1}" for i in range(self.values.shape[0]))
        table = np.column_stack([self.grid.times, self.values.T])
        np.savetxt(path, table, delimiter=",", header=header, comments="", fmt="%.17g")


@dataclass(frozen=True)
class BoundaryControl:
    """Traction samples f(node, t) on the control-face quadrature nodes."""

    values: np.ndarray
    grid: TimeGrid

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError("control values must be a (n_nodes, n_times) array")
        if v.shape[1] != self.grid.n_nodes:
            raise ValueError(
                f"control has {v.shape[1]} time samples but the grid has {self.grid.n_nodes}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("control values must be finite")
        object.__setattr__(self, "values", v)

    def write_csv(self, path) -> None:
        header = "t," + ",".join(f"node_{q}" for q in range(self.values.shape[0]))
        table = np.column_stack([self.grid.times, self.values.T])
        np.savetxt(path, table, delimiter=",", header=header, comments="", fmt="%.17g")


def zero_control(basis: SpectralBasis, grid: TimeGrid) -> BoundaryControl:
    return BoundaryControl(values=np.zeros((basis.n_quad, grid.n_nodes)), grid=grid)


def tone_control(
    basis: SpectralBasis,
    grid: TimeGrid,
    amplitudes: np.ndarray,
    omegas: np.ndarray,
    phases: np.ndarray,
) -> BoundaryControl:
    """Smooth multi-tone traction sum_k A[q,k] cos(omega_k t + phi[q,k])."""
    amplitudes = np.atleast_2d(np.asarray(amplitudes, dtype=float))
    phases = np.atleast_2d(np.asarray(phases, dtype=float))
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    if amplitudes.shape != (basis.n_quad, omegas.size) or phases.shape != amplitudes.shape:
        raise ValueError("amplitudes/phases must have shape (n_quad, n_tones)")
    t = grid.times
    values = np.einsum(
        "qk,qkt->qt", amplitudes, np.cos(omegas[None, :, None] * t[None, None, :] + phases[..., None])
    )
    return BoundaryControl(values=values, grid=grid)


def control_l2_norm(basis: SpectralBasis, control: BoundaryControl) -> float:
    """Discrete L2(0,T; L2(Gamma_1)) norm of a boundary control."""
    wt = trapezoid_weights(control.grid.n_nodes, control.grid.dt)
    sq = np.sum(basis.quad_weights[:, None] * control.values**2 * wt[None, :])
    return float(np.sqrt(sq))


def memory_oscillator_kernels(
    mus: np.ndarray, kernel: MemoryKernel, grid: TimeGrid
) -> np.ndarray:
    """Per-mode difference kernels G_n/mu_n with G_n = b sin(mu_n t) + K*sin(mu_n .)."""
    mus = np.atleast_1d(np.asarray(mus, dtype=float))
    t = grid.times
    sines = np.sin(mus[:, None] * t[None, :])
    g = kernel.b * sines
    k_samples = np.asarray(kernel.kernel.values(t), dtype=float)
    if np.any(k_samples != 0.0):
        g = g + trapezoid_convolve(k_samples[None, :], sines, grid.dt)
    return g / mus[:, None]


def wave_modal_response(mu: float, forcing: np.ndarray, grid: TimeGrid):
    """Memoryless modal response to a forcing g: Duhamel sine/cosine integrals.

        u(t)  = (1/mu) int_0^t sin(mu (t-s)) g(s) ds
        u'(t) =        int_0^t cos(mu (t-s)) g(s) ds

    Returns (u, u') sampled on the grid; both are O(dt^2) product-trapezoid
    convolutions.
    """
    g = np.asarray(forcing, dtype=float)
    if g.shape[-1] != grid.n_nodes:
        raise ValueError(f"forcing has {g.shape[-1]} samples, grid has {grid.n_nodes}")
    if mu <= 0.0:
        raise ValueError(f"mu must be positive, got {mu}")
    u, up = _wave_response_batch(np.array([mu]), g[None, :], grid)
    return u[0], up[0]


def _wave_response_batch(mus: np.ndarray, g: np.ndarray, grid: TimeGrid):
    t = grid.times
    phase = mus[:, None] * t[None, :]
    u = trapezoid_convolve(np.sin(phase), g, grid.dt) / mus[:, None]
    up = trapezoid_convolve(np.cos(phase), g, grid.dt)
    return u, up


def free_memory_modal(
    xi: float, eta: float, mu: float, kernel: MemoryKernel, grid: TimeGrid
) -> np.ndarray:
    """Homogeneous memory mode with data psi(0) = xi, psi'(0) = mu * eta.

    Solves psi = xi cos(mu t) + eta sin(mu t) + (G/mu) * psi by trapezoid
    marching, the convolution form of the modal memory equation.
    """
    if mu <= 0.0:
        raise ValueError(f"mu must be positive, got {mu}")
    psi = _free_memory_batch(
        np.array([float(xi)]), np.array([float(eta)]), np.array([mu]), kernel, grid
    )
    return psi[0]


def _free_memory_batch(
    xis: np.ndarray, etas: np.ndarray, mus: np.ndarray, kernel: MemoryKernel, grid: TimeGrid
) -> np.ndarray:
    t = grid.times
    phase = mus[:, None] * t[None, :]
    forcing = xis[:, None] * np.cos(phase) + etas[:, None] * np.sin(phase)
    psi = np.zeros_like(forcing)
    # Zero data forces the zero solution exactly; only march the active modes.
    active = (xis != 0.0) | (etas != 0.0)
    if np.any(active):
        kernels = memory_oscillator_kernels(mus[active], kernel, grid)
        psi[active] = march_difference_kernel(kernels, forcing[active], grid.dt)
    return psi


def controlled_memory_modal(forcing: np.ndarray, mu: float, kernel: MemoryKernel, grid: TimeGrid):
    """Forced memory mode from rest: returns (w, w') sampled on the grid.

    w solves w = u + (G/mu) * w with u the memoryless Duhamel response; the
    velocity solves the same Volterra equation driven by u' (the differentiated
    displacement equation), so both components are second-order consistent.
    """
    g = np.asarray(forcing, dtype=float)
    if g.shape[-1] != grid.n_nodes:
        raise ValueError(f"forcing has {g.shape[-1]} samples, grid has {grid.n_nodes}")
    if mu <= 0.0:
        raise ValueError(f"mu must be positive, got {mu}")
    w, wp = _controlled_batch(np.array([mu]), g[None, :], kernel, grid)
    return w[0], wp[0]


def _controlled_batch(mus: np.ndarray, g: np.ndarray, kernel: MemoryKernel, grid: TimeGrid):
    u, up = _wave_response_batch(mus, g, grid)
    kernels = memory_oscillator_kernels(mus, kernel, grid)
    stacked = march_difference_kernel(kernels[:, None, :], np.stack([u, up], axis=1), grid.dt)
    return stacked[:, 0, :], stacked[:, 1, :]


@dataclass(frozen=True)
class SimulationResult:
    trajectory: ModalTrajectory
    terminal: StatePair


def forward_simulate(
    basis: SpectralBasis, kernel: MemoryKernel, control: BoundaryControl, grid: TimeGrid
) -> SimulationResult:
    """Drive the system from rest with a boundary traction.

    The terminal StatePair stores (mu_n w_n(T), w_n'(T)), the weighted state
    the synthesis layer targets.
    """
    if control.grid != grid:
        raise ValueError("control was sampled on a different grid")
    if control.values.shape[0] != basis.n_quad:
        raise ValueError(
            f"control has {control.values.shape[0]} boundary nodes, basis has {basis.n_quad}"
        )
    g_modal = (basis.traces * basis.quad_weights[None, :]) @ control.values
    w, wp = _controlled_batch(basis.mu, g_modal, kernel, grid)
    trajectory = ModalTrajectory(values=w, velocities=wp, mu=basis.mu, grid=grid)
    terminal = StatePair(xi=basis.mu * w[:, -1], eta=wp[:, -1], mu=basis.mu)
    return SimulationResult(trajectory=trajectory, terminal=terminal)


def adjoint_trace(
    basis: SpectralBasis, kernel: MemoryKernel, v: StatePair, grid: TimeGrid
) -> BoundaryControl:
    """Control-face trace of the time-reversed homogeneous solution.

    For data (xi, eta) on the leading len(v) modes the returned samples are
    sum_n (phi_n|_{Gamma_1})(x_q) psi_n(T - t_j); the time reversal is exact on
    the uniform grid.  These traces span the synthesis ansatz space.
    """
    m = v.n_modes
    if m > basis.n_modes:
        raise ValueError(f"state pair has {m} modes but the basis stores {basis.n_modes}")
    psi = _free_memory_batch(v.xi, v.eta, basis.mu[:m], kernel, grid)
    values = basis.traces[:m].T @ psi[:, ::-1]
    return BoundaryControl(values=values, grid=grid)


@dataclass(frozen=True)
class GronwallReport:
    m_observed: float
    per_mode_max: np.ndarray
    trials: int
    seed: int


def gronwall_bound_check(
    basis: SpectralBasis,
    kernel: MemoryKernel,
    grid: TimeGrid,
    trials: int = 8,
    seed: int = DEFAULT_SEED,
) -> GronwallReport:
    """Sample max_t |psi_n(t)| over random per-mode unit data (xi_n, eta_n).

    The observed bound should be uniform in the mode index: high modes feel the
    memory only through G_n/mu_n, so adding modes must not inflate it.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(seed)
    per_mode = np.zeros(basis.n_modes)
    for _ in range(trials):
        theta = rng.uniform(0.0, 2.0 * np.pi, size=basis.n_modes)
        psi = _free_memory_batch(np.cos(theta), np.sin(theta), basis.mu, kernel, grid)
        per_mode = np.maximum(per_mode, np.max(np.abs(psi), axis=1))
    return GronwallReport(
        m_observed=float(per_mode.max()), per_mode_max=per_mode, trials=trials, seed=seed
    )
