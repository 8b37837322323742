"""Minimum-norm boundary control synthesis via the truncated moment problem.

The pairing identity behind the construction: for a control f and homogeneous
data (xi, eta),

    int_0^T int_{Gamma_1} trace(xi, eta)(x, T-reversed) f  =  <A w(T), eta> + <w'(T), xi>,

where the left side uses the time-reversed adjoint trace and the right side
the weighted terminal state of the controlled solution.  Spanning (xi, eta)
over the 2M canonical modal pairs turns steering into a finite Gram system:
the minimum-norm control in the trace span has coefficients solving
(Gram + reg I) c = rhs with rhs read off the target through the identity.

Note the slot swap: a trace built from (e_m, 0) pins the velocity component
w_m'(T), and one built from (0, e_m) pins mu_m w_m(T).
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .grids import TimeGrid
from .memory_kernel import MemoryKernel
from .modal_dynamics import (
    BoundaryControl,
    StatePair,
    _free_memory_batch,
    adjoint_trace,
    control_l2_norm,
    forward_simulate,
    memory_oscillator_kernels,
    _wave_response_batch,
)
from .quadrature import trapezoid_weights
from .spectral_basis import SpectralBasis, control_time_lower_bound
from .volterra import march_difference_kernel

DEFAULT_SEED = 1870


class IllPosedSystemError(RuntimeError):
    """Gram system is numerically singular and no regularization was requested."""


@dataclass
class GramSystem:
    """Assembled 2M x 2M Gram matrix of adjoint traces plus its spectrum data.

    Row/column order: the M traces from data (e_m, 0) first, then the M traces
    from (0, e_m).  psi_table keeps the homogeneous modal solutions backing the
    matrix so the synthesized control can be assembled without re-solving; rhs
    is filled in by solve_min_norm_control.
    """

    matrix: np.ndarray
    min_eigenvalue: float
    max_eigenvalue: float
    condition_number: float
    regularization: float
    psi_table: np.ndarray
    rhs: np.ndarray | None = field(default=None)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2


def _free_batch_threaded(xis, etas, mus, kernel, grid, threads):
    if threads <= 1 or mus.size < 2 * threads:
        return _free_memory_batch(xis, etas, mus, kernel, grid)
    chunks = [c for c in np.array_split(np.arange(mus.size), threads) if c.size]
    out = np.zeros((mus.size, grid.n_nodes))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [
            (c, pool.submit(_free_memory_batch, xis[c], etas[c], mus[c], kernel, grid))
            for c in chunks
        ]
        for c, fut in futures:
            out[c] = fut.result()
    return out


def assemble_gram(
    basis: SpectralBasis,
    kernel: MemoryKernel,
    grid: TimeGrid,
    n_modes: int,
    regularization: float = 0.0,
    threads: int = 1,
) -> GramSystem:
    """Gram matrix of the 2M canonical adjoint traces in L2(0,T; L2(Gamma_1)).

    Entries factor into (boundary trace Gram) x (time correlation of the
    homogeneous modal solutions); both integrals use the stored quadrature.
    The matrix is stored unregularized; regularization only enters the solve.
    Warns when the horizon sits below the sharp control-time bound.
    """
    if not 1 <= n_modes <= basis.n_modes:
        raise ValueError(f"n_modes must lie in [1, {basis.n_modes}], got {n_modes}")
    if regularization < 0.0:
        raise ValueError(f"regularization must be >= 0, got {regularization}")
    t_min = control_time_lower_bound(basis.geometry)
    if grid.horizon < t_min:
        warnings.warn(
            f"horizon {grid.horizon} is below the sharp control-time bound {t_min}; "
            "the Gram system degenerates",
            stacklevel=2,
        )
    m = n_modes
    mus = basis.mu[:m]
    ones, zeros = np.ones(m), np.zeros(m)
    psi_cos = _free_batch_threaded(ones, zeros, mus, kernel, grid, threads)
    psi_sin = _free_batch_threaded(zeros, ones, mus, kernel, grid, threads)
    psi = np.vstack([psi_cos, psi_sin])

    wt = trapezoid_weights(grid.n_nodes, grid.dt)
    time_gram = (psi * wt[None, :]) @ psi.T
    tr = basis.traces[:m]
    boundary_gram = (tr * basis.quad_weights[None, :]) @ tr.T
    gram = np.tile(boundary_gram, (2, 2)) * time_gram
    gram = np.triu(gram) + np.triu(gram, 1).T

    eigs = np.linalg.eigvalsh(gram)
    min_eig, max_eig = float(eigs[0]), float(eigs[-1])
    cond = max_eig / min_eig if min_eig > 0.0 else float("inf")
    return GramSystem(
        matrix=gram,
        min_eigenvalue=min_eig,
        max_eigenvalue=max_eig,
        condition_number=cond,
        regularization=float(regularization),
        psi_table=psi,
    )


@dataclass(frozen=True)
class SynthesisResult:
    control: BoundaryControl
    coefficients: np.ndarray
    residual: float
    rhs: np.ndarray


def solve_min_norm_control(
    gram: GramSystem,
    basis: SpectralBasis,
    kernel: MemoryKernel,
    grid: TimeGrid,
    target: StatePair,
) -> SynthesisResult:
    """Steer (w, w')(T) to the target pair (xi, eta) with the min-norm control.

    The right-hand side reads the target through the pairing identity:
    rhs = (eta_m ; mu_m xi_m) in the (e_m, 0) / (0, e_m) trace order.  The
    synthesized control is the coefficient combination of the time-reversed
    traces, the unique minimizer of the control norm among exact solutions of
    the truncated moment problem.
    """
    m = gram.n_modes
    if target.n_modes < m:
        raise ValueError(f"target has {target.n_modes} modes, Gram system needs {m}")
    mus = basis.mu[:m]
    rhs = np.concatenate([target.eta[:m], mus * target.xi[:m]])
    gram.rhs = rhs

    scale = max(gram.max_eigenvalue, np.finfo(float).tiny)
    if gram.regularization == 0.0 and gram.min_eigenvalue < 1e-12 * scale:
        raise IllPosedSystemError(
            f"Gram minimum eigenvalue {gram.min_eigenvalue:.3e} is below 1e-12 of its "
            f"norm {scale:.3e}; pass a regularization (e.g. 1e-10 * trace = "
            f"{1e-10 * float(np.trace(gram.matrix)):.3e}) or enlarge the horizon"
        )
    system = gram.matrix + gram.regularization * np.eye(2 * m)
    coeffs = np.linalg.solve(system, rhs)
    residual = float(np.linalg.norm(gram.matrix @ coeffs - rhs))

    traces = np.vstack([basis.traces[:m], basis.traces[:m]])
    values = traces.T @ (coeffs[:, None] * gram.psi_table[:, ::-1])
    control = BoundaryControl(values=values, grid=grid)
    return SynthesisResult(control=control, coefficients=coeffs, residual=residual, rhs=rhs)


def terminal_error(terminal: StatePair, target: StatePair) -> float:
    """Relative gap between an achieved weighted terminal state and a plain target.

    terminal stores (mu w(T), w'(T)); target stores the desired (w(T), w'(T)).
    Compared over the target's modes in the L2 x L2 metric.
    """
    m = target.n_modes
    if terminal.n_modes < m:
        raise ValueError("terminal state has fewer modes than the target")
    want = np.concatenate([target.mu * target.xi, target.eta])
    got = np.concatenate([terminal.xi[:m], terminal.eta[:m]])
    denom = np.linalg.norm(want)
    gap = np.linalg.norm(got - want)
    return float(gap / denom) if denom > 0.0 else float(gap)


@dataclass(frozen=True)
class DualityReport:
    lhs: float
    rhs: float
    rel_gap: float


def duality_check(
    basis: SpectralBasis,
    kernel: MemoryKernel,
    grid: TimeGrid,
    control: BoundaryControl,
    v: StatePair,
) -> DualityReport:
    """Evaluate both sides of the pairing identity on independent code paths.

    lhs integrates the time-reversed adjoint trace against the control; rhs
    pairs the forward-simulated weighted terminal state with the swapped slots
    of v.  Agreement is O(dt^2) for smooth data.
    """
    tr = adjoint_trace(basis, kernel, v, grid)
    wt = trapezoid_weights(grid.n_nodes, grid.dt)
    lhs = float(np.sum(basis.quad_weights[:, None] * tr.values * control.values * wt[None, :]))
    sim = forward_simulate(basis, kernel, control, grid)
    m = v.n_modes
    rhs = float(sim.terminal.xi[:m] @ v.eta + sim.terminal.eta[:m] @ v.xi)
    gap = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-30)
    return DualityReport(lhs=lhs, rhs=rhs, rel_gap=gap)


@dataclass(frozen=True)
class GramSpectrumRow:
    n_modes: int
    min_eigenvalue: float
    condition_number: float


def riesz_fisher_diagnostic(
    basis: SpectralBasis,
    kernel: MemoryKernel,
    grid: TimeGrid,
    mode_counts,
    threads: int = 1,
) -> list:
    """Gram spectrum growth across truncation levels.

    A positive, slowly shrinking minimum eigenvalue is the discrete coercivity
    (Riesz-Fisher) signal; the condition number tracks the absent upper frame
    bound.  Modal decoupling makes each smaller Gram a principal submatrix of
    the largest one, so only one assembly is needed.
    """
    counts = [int(m) for m in mode_counts]
    if not counts or any(b <= a for a, b in zip(counts, counts[1:])):
        raise ValueError("mode_counts must be a non-empty strictly increasing list")
    if counts[-1] > basis.n_modes:
        raise ValueError(f"mode_counts exceed the {basis.n_modes} stored modes")
    top = assemble_gram(basis, kernel, grid, counts[-1], threads=threads)
    m_top = counts[-1]
    rows = []
    for m in counts:
        idx = np.concatenate([np.arange(m), m_top + np.arange(m)])
        eigs = np.linalg.eigvalsh(top.matrix[np.ix_(idx, idx)])
        min_eig, max_eig = float(eigs[0]), float(eigs[-1])
        cond = max_eig / min_eig if min_eig > 0.0 else float("inf")
        rows.append(GramSpectrumRow(n_modes=m, min_eigenvalue=min_eig, condition_number=cond))
    return rows


@dataclass(frozen=True)
class NormGrowthRow:
    n_modes: int
    max_ratio: float
    max_weighted_ratio: float


@dataclass(frozen=True)
class NormGrowthReport:
    rows: list
    alpha: float
    trials: int
    seed: int


def norm_growth_probe(
    basis: SpectralBasis,
    kernel: MemoryKernel,
    grid: TimeGrid,
    mode_counts,
    trials: int = 5,
    seed: int = DEFAULT_SEED,
    alpha: float = 0.55,
) -> NormGrowthReport:
    """Terminal-norm growth of rough controls across truncation levels.

    White-noise nodal controls probe the unboundedness of the control-to-state
    map: the unweighted terminal/control norm ratio keeps growing with the
    mode count, while weighting both terminal slots by mu^(alpha-1) (the
    (H^alpha, H^(alpha-1)) regularity scale of the flow) keeps it bounded.
    """
    counts = [int(m) for m in mode_counts]
    if not counts or any(b <= a for a, b in zip(counts, counts[1:])):
        raise ValueError("mode_counts must be a non-empty strictly increasing list")
    if counts[-1] > basis.n_modes:
        raise ValueError(f"mode_counts exceed the {basis.n_modes} stored modes")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(seed)
    best = {m: 0.0 for m in counts}
    best_weighted = {m: 0.0 for m in counts}
    for _ in range(trials):
        f = BoundaryControl(
            values=rng.standard_normal((basis.n_quad, grid.n_nodes)), grid=grid
        )
        denom = control_l2_norm(basis, f)
        term = forward_simulate(basis, kernel, f, grid).terminal
        sq = term.xi**2 + term.eta**2
        wsq = basis.mu ** (2.0 * (alpha - 1.0)) * sq
        for m in counts:
            best[m] = max(best[m], float(np.sqrt(sq[:m].sum())) / denom)
            best_weighted[m] = max(best_weighted[m], float(np.sqrt(wsq[:m].sum())) / denom)
    rows = [
        NormGrowthRow(n_modes=m, max_ratio=best[m], max_weighted_ratio=best_weighted[m])
        for m in counts
    ]
    return NormGrowthReport(rows=rows, alpha=alpha, trials=trials, seed=seed)


@dataclass(frozen=True)
class PerturbationReport:
    singular_values: np.ndarray
    n_modes: int


def perturbation_compactness_probe(
    basis: SpectralBasis, kernel: MemoryKernel, grid: TimeGrid, n_modes: int
) -> PerturbationReport:
    """Singular values of the discrete memory perturbation of the control map.

    Columns of the probed matrix are the weighted terminal differences
    (controlled-with-memory minus memoryless) of unit-norm nodal impulse
    controls; fast singular-value decay is the compactness signature that
    lets the memoryless controllability survive the perturbation.
    """
    if not 1 <= n_modes <= basis.n_modes:
        raise ValueError(f"n_modes must lie in [1, {basis.n_modes}], got {n_modes}")
    m = n_modes
    mus = basis.mu[:m]
    n = grid.n_nodes
    dt = grid.dt
    t = grid.times

    # Memoryless responses to time one-hot forcings, from the trapezoid
    # convolution acting on a unit impulse at node p (half weight at p = 0;
    # the diagonal of the cosine response picks up the right-end half weight).
    shift = t[None, :] - t[:, None]
    causal = shift >= 0.0
    a = np.ones(n)
    a[0] = 0.5
    u = np.zeros((m, n, n))
    up = np.zeros((m, n, n))
    for i in range(m):
        u[i] = np.where(causal, np.sin(mus[i] * shift), 0.0) * (dt / mus[i]) * a[:, None]
        up[i] = np.where(shift > 0.0, np.cos(mus[i] * shift), 0.0) * dt * a[:, None]
        np.fill_diagonal(up[i], 0.5 * dt)
        up[i, 0, 0] = 0.0

    kernels = memory_oscillator_kernels(mus, kernel, grid)
    w = march_difference_kernel(kernels[:, None, :], u, dt)
    wp = march_difference_kernel(kernels[:, None, :], up, dt)
    d_xi = mus[:, None] * (w[..., -1] - u[..., -1])
    d_eta = wp[..., -1] - up[..., -1]

    # Tensor with the trace/boundary-weight factor and rescale columns so each
    # corresponds to a unit-L2 control; singular values then track the
    # underlying operator, not the grid.
    tw = basis.traces[:m] * basis.quad_weights[None, :]
    blocks = [np.einsum("mq,mp->mqp", tw, d).reshape(m, -1) for d in (d_xi, d_eta)]
    matrix = np.vstack(blocks)
    wt = trapezoid_weights(n, dt)
    col_norm = np.sqrt(np.outer(basis.quad_weights, wt)).reshape(-1)
    matrix = matrix / col_norm[None, :]
    sigma = np.linalg.svd(matrix, compute_uv=False)
    return PerturbationReport(singular_values=sigma, n_modes=m)


def random_smooth_target(
    basis: SpectralBasis, rng: np.random.Generator, decay: float = 2.0, norm: float = 1.0
) -> StatePair:
    """Random reachable target (w, w')(T) with mu^(-decay) coefficient falloff,
    scaled so the weighted pair (mu xi, eta) has the requested norm."""
    xi = rng.standard_normal(basis.n_modes) * basis.mu ** (-decay)
    eta = rng.standard_normal(basis.n_modes) * basis.mu ** (-decay)
    scale = np.sqrt(np.sum((basis.mu * xi) ** 2 + eta**2))
    if scale == 0.0:
        raise ValueError("degenerate random target")
    factor = norm / scale
    return StatePair(xi=factor * xi, eta=factor * eta, mu=basis.mu.copy())


def _wave_terminal(basis: SpectralBasis, control: BoundaryControl, grid: TimeGrid) -> StatePair:
    """Weighted terminal state of the memoryless system (internal helper)."""
    g_modal = (basis.traces * basis.quad_weights[None, :]) @ control.values
    u, upr = _wave_response_batch(basis.mu, g_modal, grid)
    return StatePair(xi=basis.mu * u[:, -1], eta=upr[:, -1], mu=basis.mu)
