"""Per-step density-matrix shifts for fluctuation and drive perturbations.

All kernels return a :class:`KernelShift` and never modify the state they are
given.  The incoherent kernels (:func:`qf_shift`, :func:`tf_shift`) are the
frequency-integrated results, so they only need the mode density at the gap.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    BathParams,
    DegenerateGapError,
    DensityMatrix,
    DriveParams,
    ParameterError,
    SystemParams,
)

_RESONANCE_REL = 1e-12
_SINC_SERIES = 1e-8


@dataclass(frozen=True)
class KernelShift:
    d11: float
    d12: complex
    d22: float

    @property
    def d21(self) -> complex:
        return self.d12.conjugate()

    @property
    def trace(self) -> float:
        return self.d11 + self.d22

    def __add__(self, other: "KernelShift") -> "KernelShift":
        return KernelShift(self.d11 + other.d11, self.d12 + other.d12, self.d22 + other.d22)

    def scaled(self, factor: float) -> "KernelShift":
        return KernelShift(self.d11 * factor, self.d12 * factor, self.d22 * factor)

    def apply(self, rho: DensityMatrix) -> DensityMatrix:
        return DensityMatrix(rho.rho11 + self.d11, rho.rho22 + self.d22, rho.rho12 + self.d12)

    def to_array(self) -> np.ndarray:
        return np.array([[self.d11, self.d12], [self.d21, self.d22]], dtype=complex)


ZERO_SHIFT = KernelShift(0.0, 0j, 0.0)


@dataclass(frozen=True)
class ModeParams:
    """One bath mode of frequency ``omega`` over the step ``[t, t + dt)``."""

    omega: float
    epsilon: float
    dt: float
    t: float = 0.0

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise ParameterError(f"epsilon={self.epsilon} must be >= 0")
        if not self.dt >= 0:
            raise ParameterError(f"dt={self.dt} must be >= 0")


def amplitude_A(mode: ModeParams, sys: SystemParams, c: complex) -> complex:
    """Regularized first-order transition amplitude of a single bath mode.

    ``A = -c [exp(-i nu (t+dt)) - exp(-i nu t)] / (nu + i eps)`` with
    ``nu = omega - delta_e``.  The bracket is evaluated as
    ``-2i sin(nu dt/2) exp(-i nu (t + dt/2))`` so small ``nu`` keeps full precision.
    """
    nu = mode.omega - sys.delta_e
    dt, t, eps = mode.dt, mode.t, mode.epsilon
    if abs(nu) < _RESONANCE_REL * sys.delta_e and eps < _RESONANCE_REL:
        # removable 0/0 at resonance
        return 1j * c * dt * cmath.exp(-1j * nu * t)
    bracket = -2j * math.sin(0.5 * nu * dt) * cmath.exp(-1j * nu * (t + 0.5 * dt))
    return -c * bracket / (nu + 1j * eps)


def amplitude_B(dt: float, t: float, drive: DriveParams, sys: SystemParams) -> complex:
    """Coherent-drive amplitude ``i C exp(-i (omega - delta_e) t) dt``."""
    return 1j * drive.amplitude * cmath.exp(-1j * drive.detuning(sys) * t) * dt


def transfer_matrix(a: complex) -> np.ndarray:
    """Closed form of ``expm(-1j * [[0, a], [conj(a), 0]])``."""
    a = complex(a)
    r = abs(a)
    if r < _SINC_SERIES:
        sinc = 1.0 - r * r / 6.0
    else:
        sinc = math.sin(r) / r
    cos = math.cos(r)
    return np.array(
        [[cos, -1j * a * sinc], [-1j * a.conjugate() * sinc, cos]],
        dtype=complex,
    )


def monochromatic_shift(rho: DensityMatrix, a: complex) -> KernelShift:
    """Second-order expansion of ``T rho T^dagger - rho`` for amplitude ``a``."""
    a = complex(a)
    a2 = a.real * a.real + a.imag * a.imag
    r11, r22, r12 = rho.rho11, rho.rho22, rho.rho12
    r21 = r12.conjugate()
    # i a* r12 - i a r21 is 2 Re(i a* r12), real by construction
    d11 = -a2 * r11 + a2 * r22 - 2.0 * (a.conjugate() * r12).imag
    d12 = 1j * a * (r11 - r22) - a2 * r12 + a * a * r21
    return KernelShift(d11, d12, -d11)


def cp_shift(rho: DensityMatrix, b: complex) -> KernelShift:
    """Shift from a coherent drive; same algebra as the monochromatic shift with ``a -> B``."""
    return monochromatic_shift(rho, b)


def qf_shift(rho: DensityMatrix, bath: BathParams, dt: float) -> KernelShift:
    """Spontaneous-emission shift over ``dt``: populations at rate Gamma, coherence at Gamma/2."""
    g = bath.gamma * dt
    d11 = -g * rho.rho11
    return KernelShift(d11, -0.5 * g * rho.rho12, -d11)


def tf_shift(rho: DensityMatrix, bath: BathParams, sys: SystemParams, dt: float) -> KernelShift:
    """Thermal-fluctuation shift; Bose factor evaluated at the gap."""
    if bath.zero_temperature:
        return ZERO_SHIFT
    if sys.delta_e == 0:
        raise DegenerateGapError("thermal shift needs a nonzero gap")
    g = bath.gamma * bath.bose(sys.delta_e) * dt
    d11 = -g * (rho.rho11 - rho.rho22)
    return KernelShift(d11, -g * rho.rho12, -d11)


def bloch_rhs(
    rho: DensityMatrix,
    bath: BathParams,
    sys: SystemParams,
    drive: DriveParams | None,
    t: float,
) -> KernelShift:
    """Time derivative of the density matrix (finite-temperature optical Bloch equations)."""
    if sys.delta_e == 0 and not bath.zero_temperature:
        raise DegenerateGapError("Bloch equations need a nonzero gap at finite temperature")
    g = bath.gamma
    nb = bath.bose(sys.delta_e)
    r11, r22, r12 = rho.rho11, rho.rho22, rho.rho12
    d11 = -g * (1.0 + nb) * r11 + g * nb * r22
    d12 = -0.5 * g * (1.0 + 2.0 * nb) * r12
    if drive is not None and drive.amplitude != 0:
        cph = drive.amplitude * cmath.exp(-1j * drive.detuning(sys) * t)
        # C* e^{i delta t} r12 + C e^{-i delta t} r21 = 2 Re(conj(cph) r12)
        d11 += 2.0 * (cph.conjugate() * r12).real
        d12 -= cph * (r11 - r22)
    return KernelShift(d11, d12, -d11)


def population_rate(bath: BathParams, sys: SystemParams) -> float:
    """Population relaxation rate ``Gamma (1 + 2 N_B)``."""
    return bath.gamma * (1.0 + 2.0 * bath.bose(sys.delta_e))


def coherence_rate(bath: BathParams, sys: SystemParams) -> float:
    """Coherence decay rate ``(Gamma/2)(1 + 2 N_B)``."""
    return 0.5 * population_rate(bath, sys)
