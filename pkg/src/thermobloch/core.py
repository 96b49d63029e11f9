"""Two-level density matrices and the parameter records shared by every module.

Level |1> is the excited state and |2> the ground state; the gap is
``delta_e = e1 - e2 > 0``.  Only ``rho12`` is stored for the coherence,
``rho21`` is always its complex conjugate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TRACE_TOL = 1e-12
EIG_TOL = 1e-9

# Distinguished inverse temperature for a zero-temperature bath.
ZERO_TEMPERATURE = math.inf


class ThermoBlochError(Exception):
    """Base class for errors raised by this package."""


class InvalidStateError(ThermoBlochError, ValueError):
    pass


class DegenerateGapError(ThermoBlochError, ValueError):
    """Raised when a thermal occupation is requested for a zero gap."""


class ParameterError(ThermoBlochError, ValueError):
    pass


def _finite(*values: complex) -> bool:
    return all(math.isfinite(v.real) and math.isfinite(v.imag) for v in map(complex, values))


@dataclass(frozen=True)
class DensityMatrix:
    rho11: float
    rho22: float
    rho12: complex

    @property
    def rho21(self) -> complex:
        return self.rho12.conjugate()

    @property
    def trace(self) -> float:
        return self.rho11 + self.rho22

    def to_array(self) -> np.ndarray:
        return np.array([[self.rho11, self.rho12], [self.rho21, self.rho22]], dtype=complex)

    def conj(self) -> "DensityMatrix":
        """Elementwise complex conjugate (equal to the transpose for a Hermitian matrix)."""
        return DensityMatrix(self.rho11, self.rho22, self.rho12.conjugate())


def make_density(rho11: float, rho12: complex = 0.0) -> DensityMatrix:
    """Build a trace-one density matrix, rejecting non-physical inputs.

    ``rho22`` is set to ``1 - rho11``; ``|rho12|^2 <= rho11 * rho22`` must hold
    within ``TRACE_TOL``.
    """
    rho11 = float(rho11)
    rho12 = complex(rho12)
    if not _finite(rho11, rho12):
        raise InvalidStateError(f"non-finite density matrix entries: rho11={rho11}, rho12={rho12}")
    if not 0.0 <= rho11 <= 1.0:
        raise InvalidStateError(f"rho11={rho11} outside [0, 1]")
    rho22 = 1.0 - rho11
    if abs(rho12) ** 2 > rho11 * rho22 + TRACE_TOL:
        raise InvalidStateError(
            f"|rho12|^2={abs(rho12) ** 2:.3e} exceeds rho11*rho22={rho11 * rho22:.3e}"
        )
    return DensityMatrix(rho11, rho22, rho12)


EXCITED = DensityMatrix(1.0, 0.0, 0j)
GROUND = DensityMatrix(0.0, 1.0, 0j)


def purity(rho: DensityMatrix) -> float:
    """Tr rho^2."""
    return rho.rho11**2 + rho.rho22**2 + 2.0 * abs(rho.rho12) ** 2


def eigenvalues(rho: DensityMatrix) -> tuple[float, float]:
    """Both eigenvalues in descending order, from the 2x2 closed form."""
    half_tr = 0.5 * (rho.rho11 + rho.rho22)
    # (tr/2)^2 - det written as a sum of squares to avoid cancellation
    disc = 0.25 * (rho.rho11 - rho.rho22) ** 2 + abs(rho.rho12) ** 2
    root = math.sqrt(disc)
    return half_tr + root, half_tr - root


def is_physical(rho: DensityMatrix, tol: float = EIG_TOL) -> bool:
    hi, lo = eigenvalues(rho)
    return lo >= -tol and hi <= 1.0 + tol


@dataclass(frozen=True)
class SystemParams:
    e1: float
    e2: float

    def __post_init__(self):
        if not _finite(self.e1, self.e2):
            raise ParameterError("level energies must be finite")
        if not self.delta_e > 0:
            raise ParameterError(f"gap e1 - e2 = {self.delta_e} must be positive (|1> is excited)")

    @property
    def delta_e(self) -> float:
        return self.e1 - self.e2

    @classmethod
    def from_gap(cls, delta_e: float) -> "SystemParams":
        return cls(e1=float(delta_e), e2=0.0)


@dataclass(frozen=True)
class BathParams:
    """Fluctuation bath: coupling |c|^2, mode density n(delta_e), inverse temperature.

    ``beta = ZERO_TEMPERATURE`` (``math.inf``) is the zero-temperature bath;
    its Bose occupation is exactly zero.
    """

    c_abs2: float
    mode_density: float
    beta: float = ZERO_TEMPERATURE

    def __post_init__(self):
        if not (math.isfinite(self.c_abs2) and self.c_abs2 >= 0):
            raise ParameterError(f"c_abs2={self.c_abs2} must be finite and >= 0")
        if not (math.isfinite(self.mode_density) and self.mode_density >= 0):
            raise ParameterError(f"mode_density={self.mode_density} must be finite and >= 0")
        if math.isnan(self.beta) or not self.beta > 0:
            raise ParameterError(f"beta={self.beta} must be positive (inf for zero temperature)")

    @property
    def gamma(self) -> float:
        """Deexcitation rate 2*pi*|c|^2*n."""
        return 2.0 * math.pi * self.c_abs2 * self.mode_density

    @property
    def zero_temperature(self) -> bool:
        return math.isinf(self.beta)

    def bose(self, energy: float) -> float:
        """Bose-Einstein occupation 1/(exp(beta*energy) - 1)."""
        if self.zero_temperature:
            return 0.0
        if energy == 0:
            raise DegenerateGapError("Bose occupation diverges at zero energy")
        return 1.0 / math.expm1(self.beta * energy)

    def exp_beta(self, energy: float) -> float:
        if self.zero_temperature:
            return math.inf
        return math.exp(self.beta * energy)

    @classmethod
    def from_rate(cls, gamma: float, exp_beta_de: float = math.inf, delta_e: float = 1.0) -> "BathParams":
        """Bath with deexcitation rate ``gamma`` and ``exp(beta*delta_e) = exp_beta_de``.

        Uses unit mode density, so ``c_abs2 = gamma / (2*pi)``.
        """
        if not exp_beta_de > 1:
            raise ParameterError(f"exp(beta*delta_e)={exp_beta_de} must exceed 1")
        beta = ZERO_TEMPERATURE if math.isinf(exp_beta_de) else math.log(exp_beta_de) / delta_e
        return cls(c_abs2=gamma / (2.0 * math.pi), mode_density=1.0, beta=beta)


@dataclass(frozen=True)
class DriveParams:
    """Coherent drive of complex amplitude C at angular frequency omega."""

    amplitude: complex
    omega: float

    def __post_init__(self):
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        if not _finite(self.amplitude, self.omega):
            raise ParameterError("drive amplitude and frequency must be finite")

    def detuning(self, sys: SystemParams) -> float:
        return self.omega - sys.delta_e

    @classmethod
    def resonant(cls, amplitude: complex, sys: SystemParams) -> "DriveParams":
        return cls(amplitude=amplitude, omega=sys.delta_e)


def drive_ratio(bath: BathParams, drive: DriveParams | None) -> float:
    """Drive-to-fluctuation strength ratio ``8|C|^2 / Gamma^2``.

    This is the normalization under which the closed-form steady state
    (see :func:`thermobloch.integrator.rho11_steady_formula`) solves the
    Bloch equations; it equals ``2|C|^2 / (pi^2 |c|^4 n^2)``.
    """
    amp2 = 0.0 if drive is None else abs(drive.amplitude) ** 2
    g = bath.gamma
    if g == 0:
        return math.inf if amp2 > 0 else 0.0
    return 8.0 * amp2 / g**2


def amplitude_for_ratio(gamma_ratio: float, gamma: float) -> float:
    """Real drive amplitude |C| giving ``drive_ratio == gamma_ratio``."""
    if gamma_ratio < 0:
        raise ParameterError(f"gamma_ratio={gamma_ratio} must be >= 0")
    return gamma * math.sqrt(gamma_ratio / 8.0)


@dataclass
class Trajectory:
    """Recorded samples of an evolution, stored column-wise."""

    times: np.ndarray
    rho11: np.ndarray
    rho22: np.ndarray
    rho12: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.rho11 = np.asarray(self.rho11, dtype=float)
        self.rho22 = np.asarray(self.rho22, dtype=float)
        self.rho12 = np.asarray(self.rho12, dtype=complex)
        n = len(self.times)
        if not (len(self.rho11) == len(self.rho22) == len(self.rho12) == n):
            raise ValueError("trajectory columns must have equal length")
        if n > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("trajectory times must be strictly increasing")

    @classmethod
    def from_states(cls, times, states) -> "Trajectory":
        states = list(states)
        return cls(
            times=np.asarray(times, dtype=float),
            rho11=[s.rho11 for s in states],
            rho22=[s.rho22 for s in states],
            rho12=[s.rho12 for s in states],
        )

    def __len__(self) -> int:
        return len(self.times)

    def __getitem__(self, i: int) -> DensityMatrix:
        return DensityMatrix(float(self.rho11[i]), float(self.rho22[i]), complex(self.rho12[i]))

    @property
    def states(self) -> list[DensityMatrix]:
        return [self[i] for i in range(len(self))]

    @property
    def final(self) -> DensityMatrix:
        return self[-1]

    @property
    def trace(self) -> np.ndarray:
        return self.rho11 + self.rho22

    @property
    def purity(self) -> np.ndarray:
        return self.rho11**2 + self.rho22**2 + 2.0 * np.abs(self.rho12) ** 2

    @property
    def coherence(self) -> np.ndarray:
        return np.abs(self.rho12)
