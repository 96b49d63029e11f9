"""Finite-temperature optical Bloch equations for a two-level system."""
from .core import (
    EXCITED,
    GROUND,
    ZERO_TEMPERATURE,
    BathParams,
    DensityMatrix,
    DriveParams,
    SystemParams,
    Trajectory,
    drive_ratio,
    eigenvalues,
    make_density,
    purity,
)
from .integrator import (
    Scheme,
    SteadyState,
    StepConfig,
    detect_steady,
    evolve,
    relaxation_rate,
    steady_state_analytic,
    step,
)
from .kernels import KernelShift, bloch_rhs, cp_shift, qf_shift, tf_shift

__version__ = "0.1.0"
