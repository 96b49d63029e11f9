"""Time stepping, trajectories and steady-state analytics."""
from __future__ import annotations

import cmath
import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import (
    BathParams,
    DensityMatrix,
    DriveParams,
    ParameterError,
    SystemParams,
    ThermoBlochError,
    Trajectory,
    drive_ratio,
)
from .kernels import (
    amplitude_B,
    bloch_rhs,
    cp_shift,
    population_rate,
    qf_shift,
    tf_shift,
)

STEP_HARD_LIMIT = 0.05
STEP_WARN_LIMIT = 1e-3
POSITIVITY_TOL = 1e-6


class PositivityViolation(ThermoBlochError, ArithmeticError):
    """An eigenvalue of the evolved state left ``[-POSITIVITY_TOL, 1 + POSITIVITY_TOL]``."""

    def __init__(self, t: float, eigs: tuple[float, float]):
        self.t = t
        self.eigs = eigs
        super().__init__(f"positivity violated at t={t!r}: eigenvalues {eigs[0]:.3e}, {eigs[1]:.3e}")


class StepSizeError(ThermoBlochError, ValueError):
    pass


class StepSizeWarning(UserWarning):
    pass


class Scheme(enum.Enum):
    PAPER_EULER = "paper_euler"
    RK4 = "rk4"


@dataclass(frozen=True)
class StepConfig:
    dt: float
    t_max: float = 0.0
    scheme: Scheme = Scheme.RK4
    record_every: int = 1

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ParameterError(f"dt={self.dt} must be positive")
        if not (math.isfinite(self.t_max) and self.t_max >= 0):
            raise ParameterError(f"t_max={self.t_max} must be >= 0")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ParameterError(f"record_every={self.record_every} must be a positive integer")

    @property
    def n_steps(self) -> int:
        return max(0, math.ceil(self.t_max / self.dt - 1e-9))


@dataclass(frozen=True)
class SteadyState:
    rho11_inf: float
    rho12_inf: complex


def total_rate(bath: BathParams, sys: SystemParams, drive: DriveParams | None = None) -> float:
    """Fastest rate in the problem: population relaxation plus the Rabi frequency ``2|C|``."""
    rate = population_rate(bath, sys)
    if drive is not None:
        rate += 2.0 * abs(drive.amplitude)
    return rate


def check_step_size(cfg: StepConfig, bath: BathParams, sys: SystemParams, drive: DriveParams | None) -> float:
    """Enforce the ``rate * dt`` guard; returns the product."""
    x = total_rate(bath, sys, drive) * cfg.dt
    if x > STEP_HARD_LIMIT:
        raise StepSizeError(f"rate*dt = {x:.3g} exceeds {STEP_HARD_LIMIT}; reduce dt")
    if x > STEP_WARN_LIMIT:
        warnings.warn(f"rate*dt = {x:.3g} above {STEP_WARN_LIMIT}", StepSizeWarning, stacklevel=3)
    return x


def _eigs(r11: float, r22: float, r12: complex) -> tuple[float, float]:
    half = 0.5 * (r11 + r22)
    root = math.sqrt(0.25 * (r11 - r22) ** 2 + r12.real**2 + r12.imag**2)
    return half + root, half - root


def _check_positivity(r11, r22, r12, t):
    hi, lo = _eigs(r11, r22, r12)
    if not (lo >= -POSITIVITY_TOL and hi <= 1.0 + POSITIVITY_TOL):
        raise PositivityViolation(t, (hi, lo))


def _rk4(rho, bath, sys, drive, t, dt):
    k1 = bloch_rhs(rho, bath, sys, drive, t)
    k2 = bloch_rhs(k1.scaled(0.5 * dt).apply(rho), bath, sys, drive, t + 0.5 * dt)
    k3 = bloch_rhs(k2.scaled(0.5 * dt).apply(rho), bath, sys, drive, t + 0.5 * dt)
    k4 = bloch_rhs(k3.scaled(dt).apply(rho), bath, sys, drive, t + dt)
    incr = (k1 + k2.scaled(2.0) + k3.scaled(2.0) + k4).scaled(dt / 6.0)
    return incr.apply(rho)


def step(
    rho: DensityMatrix,
    cfg: StepConfig,
    sys: SystemParams,
    bath: BathParams,
    drive: DriveParams | None,
    t: float,
    check: bool = True,
) -> DensityMatrix:
    """Advance ``rho`` from ``t`` to ``t + cfg.dt``.

    PAPER_EULER adds the drive, quantum-fluctuation and thermal-fluctuation
    shifts of the step; RK4 takes one classical Runge-Kutta step of the Bloch
    equations.  Pass ``check=False`` to skip the step-size guard (the
    positivity check always runs).
    """
    if check:
        check_step_size(cfg, bath, sys, drive)
    dt = cfg.dt
    if cfg.scheme is Scheme.PAPER_EULER:
        shift = qf_shift(rho, bath, dt) + tf_shift(rho, bath, sys, dt)
        if drive is not None:
            shift = cp_shift(rho, amplitude_B(dt, t, drive, sys)) + shift
        new = shift.apply(rho)
    else:
        new = _rk4(rho, bath, sys, drive, t, dt)
    _check_positivity(new.rho11, new.rho22, new.rho12, t + dt)
    return new


def _make_stepper(cfg, sys, bath, drive):
    """Scalar fast path equivalent to :func:`step` used by :func:`evolve`."""
    g = bath.gamma
    nb = bath.bose(sys.delta_e)
    dt = cfg.dt
    amp = 0j if drive is None else drive.amplitude
    delta = 0.0 if drive is None else drive.detuning(sys)
    driven = amp != 0

    if cfg.scheme is Scheme.PAPER_EULER:
        gq = g * dt
        gt = g * nb * dt

        def advance(t, r11, r22, r12):
            d11 = -gq * r11 - gt * (r11 - r22)
            d12 = -0.5 * gq * r12 - gt * r12
            if driven:
                b = 1j * amp * cmath.exp(-1j * delta * t) * dt
                b2 = b.real * b.real + b.imag * b.imag
                d11 += -b2 * r11 + b2 * r22 - 2.0 * (b.conjugate() * r12).imag
                d12 += 1j * b * (r11 - r22) - b2 * r12 + b * b * r12.conjugate()
            return r11 + d11, r22 - d11, r12 + d12

        return advance

    up = g * (1.0 + nb)
    down = g * nb
    kappa = 0.5 * g * (1.0 + 2.0 * nb)
    half = 0.5 * dt
    sixth = dt / 6.0

    def rhs(t, r11, r22, r12):
        d11 = -up * r11 + down * r22
        d12 = -kappa * r12
        if driven:
            cph = amp * cmath.exp(-1j * delta * t) if delta else amp
            d11 += 2.0 * (cph.conjugate() * r12).real
            d12 -= cph * (r11 - r22)
        return d11, d12

    def advance(t, r11, r22, r12):
        a11, a12 = rhs(t, r11, r22, r12)
        b11, b12 = rhs(t + half, r11 + half * a11, r22 - half * a11, r12 + half * a12)
        c11, c12 = rhs(t + half, r11 + half * b11, r22 - half * b11, r12 + half * b12)
        e11, e12 = rhs(t + dt, r11 + dt * c11, r22 - dt * c11, r12 + dt * c12)
        d11 = sixth * (a11 + 2.0 * b11 + 2.0 * c11 + e11)
        d12 = sixth * (a12 + 2.0 * b12 + 2.0 * c12 + e12)
        return r11 + d11, r22 - d11, r12 + d12

    return advance


def evolve(
    rho0: DensityMatrix,
    cfg: StepConfig,
    sys: SystemParams,
    bath: BathParams,
    drive: DriveParams | None = None,
) -> Trajectory:
    """Iterate :func:`step` from ``t = 0`` to ``cfg.t_max``.

    Samples every ``cfg.record_every`` steps; the initial and final states are
    always recorded.  Raises :class:`PositivityViolation` carrying the time
    stamp of the first offending step.
    """
    check_step_size(cfg, bath, sys, drive)
    advance = _make_stepper(cfg, sys, bath, drive)
    n = cfg.n_steps
    stride = int(cfg.record_every)
    dt = cfg.dt
    n_rec = n // stride + 1 + (1 if n % stride else 0)
    times = np.empty(n_rec)
    c11 = np.empty(n_rec)
    c22 = np.empty(n_rec)
    c12 = np.empty(n_rec, dtype=complex)

    r11, r22, r12 = rho0.rho11, rho0.rho22, complex(rho0.rho12)
    times[0], c11[0], c22[0], c12[0] = 0.0, r11, r22, r12
    j = 1
    tol_hi = 1.0 + POSITIVITY_TOL
    for k in range(n):
        t = k * dt
        r11, r22, r12 = advance(t, r11, r22, r12)
        # cheap bound before the full eigenvalue test
        if not (-POSITIVITY_TOL <= r11 <= tol_hi and -POSITIVITY_TOL <= r22 <= tol_hi) or (
            r12.real * r12.real + r12.imag * r12.imag > r11 * r22
        ):
            _check_positivity(r11, r22, r12, (k + 1) * dt)
        if (k + 1) % stride == 0 or k + 1 == n:
            times[j], c11[j], c22[j], c12[j] = (k + 1) * dt, r11, r22, r12
            j += 1
    return Trajectory(
        times=times[:j],
        rho11=c11[:j],
        rho22=c22[:j],
        rho12=c12[:j],
        meta={"scheme": cfg.scheme.value, "dt": dt},
    )


def relaxation_rate(bath: BathParams, sys: SystemParams) -> float:
    """Population relaxation rate ``Gamma coth(beta delta_e / 2)``; ``Gamma`` at zero temperature."""
    return population_rate(bath, sys)


def fermi_dirac(bath: BathParams, sys: SystemParams) -> float:
    """Thermal excited-state population ``1 / (exp(beta delta_e) + 1)``."""
    if bath.zero_temperature:
        return 0.0
    return 1.0 / (math.exp(bath.beta * sys.delta_e) + 1.0)


def thermal_relaxation(t, rho11_0: float, bath: BathParams, sys: SystemParams):
    """Exact undriven population ``N_F + (rho11_0 - N_F) exp(-R t)``."""
    nf = fermi_dirac(bath, sys)
    return nf + (rho11_0 - nf) * np.exp(-relaxation_rate(bath, sys) * np.asarray(t))


def rho11_steady_formula(gamma_ratio: float, exp_beta_de: float) -> float:
    """Closed-form long-time excitation under resonant drive.

    ``[g (x-1)^2 + 2(x+1)] / (2 [g (x-1)^2 + (x+1)^2])`` with ``g`` the drive
    ratio of :func:`thermobloch.core.drive_ratio` and ``x = exp(beta delta_e)``.
    ``x = inf`` (zero temperature) and ``g = inf`` are handled as limits.
    """
    if math.isinf(gamma_ratio):
        return 0.5
    # rewrite in u = 1/x so the zero-temperature limit is u = 0
    u = 0.0 if math.isinf(exp_beta_de) else 1.0 / exp_beta_de
    num = gamma_ratio * (1.0 - u) ** 2 + 2.0 * u * (1.0 + u)
    den = 2.0 * (gamma_ratio * (1.0 - u) ** 2 + (1.0 + u) ** 2)
    return num / den


def steady_state_analytic(bath: BathParams, sys: SystemParams, drive: DriveParams | None) -> SteadyState:
    """Long-time state under a resonant drive plus both fluctuations."""
    amp = 0j if drive is None else drive.amplitude
    if drive is not None and abs(drive.detuning(sys)) > 1e-12 * sys.delta_e:
        raise ParameterError("steady-state formula holds only for a resonant drive (omega == delta_e)")
    if bath.gamma == 0:
        raise ParameterError("no steady state without fluctuations (gamma = 0)")
    rho11 = rho11_steady_formula(drive_ratio(bath, drive), bath.exp_beta(sys.delta_e))
    kappa = 0.5 * population_rate(bath, sys)
    rho12 = -amp * (2.0 * rho11 - 1.0) / kappa
    return SteadyState(rho11, complex(rho12))


def detect_steady(traj: Trajectory, window: float, tol: float) -> float | None:
    """Earliest sample time after which the state stays within ``tol`` of that sample.

    The max-norm is taken over ``rho11``, ``Re rho12`` and ``Im rho12``; at least
    ``window`` of trajectory must follow the returned time.
    """
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    cols = np.stack([traj.rho11, traj.rho12.real, traj.rho12.imag])
    suf_max = np.maximum.accumulate(cols[:, ::-1], axis=1)[:, ::-1]
    suf_min = np.minimum.accumulate(cols[:, ::-1], axis=1)[:, ::-1]
    spread = np.maximum(suf_max - cols, cols - suf_min).max(axis=0)
    ok = (spread < tol) & (traj.times[-1] - traj.times >= window - 1e-12)
    idx = np.flatnonzero(ok)
    if idx.size == 0:
        return None
    return float(traj.times[idx[0]])
