"""Spectral toolkit for viscoelastic waves with persistent memory under
boundary traction control: forward simulation, adjoint traces, and
minimum-norm control synthesis through the truncated moment problem."""

from .control_synthesis import (
    DualityReport,
    GramSpectrumRow,
    GramSystem,
    IllPosedSystemError,
    NormGrowthReport,
    PerturbationReport,
    SynthesisResult,
    assemble_gram,
    duality_check,
    norm_growth_probe,
    perturbation_compactness_probe,
    random_smooth_target,
    riesz_fisher_diagnostic,
    solve_min_norm_control,
    terminal_error,
)
from .grids import TimeGrid
from .memory_kernel import (
    ConstantKernel,
    ExponentialKernel,
    Kernel,
    MemoryKernel,
    PronyKernel,
    SampledKernel,
    TransformedSystem,
    ZeroKernel,
    convolve,
    kernel_from_spec,
    maccamy_resolvent,
    transformed_system,
)
from .modal_dynamics import (
    BoundaryControl,
    GronwallReport,
    ModalTrajectory,
    SimulationResult,
    StatePair,
    adjoint_trace,
    control_l2_norm,
    controlled_memory_modal,
    forward_simulate,
    free_memory_modal,
    gronwall_bound_check,
    sobolev_norm,
    tone_control,
    wave_modal_response,
    zero_control,
)
from .spectral_basis import (
    Geometry,
    SpectralBasis,
    TraceEstimateReport,
    build_interval_basis,
    build_rectangle_basis,
    control_time_lower_bound,
    trace_estimate_check,
    weyl_growth_constant,
)
from .volterra import PicardResult, StepSizeError, VolterraProblem, solve_marching, solve_picard

__version__ = "0.1.0"

__all__ = [
    "BoundaryControl",
    "ConstantKernel",
    "DualityReport",
    "ExponentialKernel",
    "Geometry",
    "GramSpectrumRow",
    "GramSystem",
    "GronwallReport",
    "IllPosedSystemError",
    "Kernel",
    "MemoryKernel",
    "ModalTrajectory",
    "NormGrowthReport",
    "PerturbationReport",
    "PicardResult",
    "PronyKernel",
    "SampledKernel",
    "SimulationResult",
    "SpectralBasis",
    "StatePair",
    "StepSizeError",
    "SynthesisResult",
    "TimeGrid",
    "TraceEstimateReport",
    "TransformedSystem",
    "VolterraProblem",
    "ZeroKernel",
    "adjoint_trace",
    "assemble_gram",
    "build_interval_basis",
    "build_rectangle_basis",
    "control_l2_norm",
    "control_time_lower_bound",
    "controlled_memory_modal",
    "convolve",
    "duality_check",
    "forward_simulate",
    "free_memory_modal",
    "gronwall_bound_check",
    "kernel_from_spec",
    "maccamy_resolvent",
    "norm_growth_probe",
    "perturbation_compactness_probe",
    "random_smooth_target",
    "riesz_fisher_diagnostic",
    "sobolev_norm",
    "solve_marching",
    "solve_min_norm_control",
    "solve_picard",
    "terminal_error",
    "tone_control",
    "trace_estimate_check",
    "transformed_system",
    "wave_modal_response",
    "weyl_growth_constant",
    "zero_control",
]
