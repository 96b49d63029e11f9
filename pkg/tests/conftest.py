import cmath
import math

import numpy as np
import pytest
from hypothesis import strategies as st

from thermobloch.core import BathParams, DriveParams, SystemParams, make_density

unit = st.floats(0.0, 1.0, allow_nan=False)
phase = st.floats(0.0, 2 * math.pi, allow_nan=False)


@st.composite
def densities(draw, pure=None):
    rho11 = draw(unit)
    frac = 1.0 if pure else draw(unit)
    r = frac * math.sqrt(rho11 * (1.0 - rho11))
    return make_density(rho11, r * cmath.exp(1j * draw(phase)))


@st.composite
def amplitudes(draw, max_abs=1.0):
    return draw(st.floats(0.0, max_abs)) * cmath.exp(1j * draw(phase))


@st.composite
def baths(draw, zero_temperature=None):
    gamma = draw(st.floats(0.0, 5.0))
    if zero_temperature is None:
        zero_temperature = draw(st.booleans())
    x = math.inf if zero_temperature else draw(st.floats(1.05, 50.0))
    return BathParams.from_rate(gamma, x)


@st.composite
def drives(draw, max_abs=3.0):
    return DriveParams(draw(amplitudes(max_abs=max_abs)), draw(st.floats(0.0, 2.0)))


@pytest.fixture
def sys1():
    return SystemParams.from_gap(1.0)


def lindblad_rhs(rho: np.ndarray, bath, sysp, drive, t) -> np.ndarray:
    """Reference generator written as commutator plus dissipators on full 2x2 matrices."""
    lower = np.array([[0, 0], [1, 0]], dtype=complex)  # |2><1|
    raise_ = lower.conj().T
    g = bath.gamma
    nb = bath.bose(sysp.delta_e)

    def dissipator(L):
        LdL = L.conj().T @ L
        return L @ rho @ L.conj().T - 0.5 * (LdL @ rho + rho @ LdL)

    out = g * (1 + nb) * dissipator(lower) + g * nb * dissipator(raise_)
    if drive is not None:
        cph = drive.amplitude * np.exp(-1j * drive.detuning(sysp) * t)
        h = np.array([[0, 1j * cph], [np.conj(1j * cph), 0]])
        out += -1j * (h @ rho - rho @ h)
    return out


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for the acceptance summary; returns the flag unchanged."""

    def record(label: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
