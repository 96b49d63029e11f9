import math

import numpy as np
import pytest
from hypothesis import given, settings

from thermobloch.core import EXCITED, GROUND, BathParams, DriveParams, SystemParams, make_density
from thermobloch.integrator import StepConfig, evolve
from thermobloch.kernels import monochromatic_shift
from thermobloch.oracles import (
    Integrand,
    QuadratureSpec,
    WindowTooSmallError,
    WWParams,
    frequency_quadrature_check,
    expansion_shift,
    kernel_integral_numeric,
    lattice_pairs,
    qf_expansion_check,
    qf_single_mode,
    rabi_analytic,
    richardson_epsilon,
    ww_decay,
)

from conftest import amplitudes, densities

SYS = SystemParams.from_gap(1.0)


def test_ww_examples():
    assert ww_decay(WWParams(0.3), 0.0) == 1.0
    assert ww_decay(WWParams(0.5 / math.pi), 1.0) == pytest.approx(0.367879, abs=1e-6)
    with pytest.raises(ValueError):
        ww_decay(WWParams(0.1), -1.0)


def test_ww_matches_fluctuation_only_evolution():
    g_abs2 = 0.2
    gamma = 2 * math.pi * g_abs2
    bath = BathParams.from_rate(gamma)
    traj = evolve(EXCITED, StepConfig(1e-3 / gamma, t_max=5 / gamma), SYS, bath)
    ref = ww_decay(WWParams(g_abs2), traj.times)
    assert np.max(np.abs(traj.rho11 / ref - 1)) <= 1e-4


def test_rabi_analytic_examples():
    assert rabi_analytic(0.7, 0.0) == 0.0
    assert rabi_analytic(2.0, math.pi / 4) == pytest.approx(1.0)


def test_rabi_analytic_matches_evolution():
    c = 0.8
    traj = evolve(GROUND, StepConfig(5e-4 / c, t_max=5 * math.pi / c), SYS, BathParams(0, 0), DriveParams.resonant(c, SYS))
    assert np.max(np.abs(traj.rho11 - rabi_analytic(c, traj.times))) <= 1e-3


# quadrature


@pytest.mark.parametrize("which", list(Integrand))
def test_kernel_integral_zero_coupling(which):
    assert kernel_integral_numeric(QuadratureSpec(1e-3), SYS, 0.0, 0.1, 0.0, which) == 0


def test_kernel_integral_A_vanishes():
    dt = 0.1
    val = kernel_integral_numeric(QuadratureSpec(1e-3), SYS, 1.0, dt, 0.1, Integrand.A)
    assert abs(val) <= 1e-3 * 2 * math.pi * dt


def test_window_too_small():
    with pytest.raises(WindowTooSmallError):
        QuadratureSpec(1e-3, half_width=10.0).window(0.1)


def test_abs_a2_extrapolates_to_rate():
    rep = frequency_quadrature_check(SYS, c=0.7, n=1.3, dt=0.1, t=0.0)
    assert rep.analytic == pytest.approx(2 * math.pi * 0.49 * 1.3 * 0.1)
    assert rep.rel_error < 1e-2
    # finite-epsilon values sit below the limit and approach it
    raws = [rep.raw[e] for e in sorted(rep.raw)]
    assert raws[0] > raws[1] > raws[2]


def test_quadrature_with_tabulated_density():
    flat = kernel_integral_numeric(QuadratureSpec(2e-3, density=2.0), SYS, 1.0, 0.1, 0.0, "AbsA2")
    func = kernel_integral_numeric(
        QuadratureSpec(2e-3, density=lambda w: np.full_like(w, 2.0)), SYS, 1.0, 0.1, 0.0, "AbsA2"
    )
    assert func == flat


def test_richardson_exact_on_lines():
    vals = {e: 3.0 - 5.0 * e + 1j * (2 + e) for e in (0.1, 0.2, 0.4)}
    assert richardson_epsilon(vals) == pytest.approx(3.0 + 2j, abs=1e-13)


# expansion


def test_expansion_ground_state_is_zero():
    s = qf_expansion_check(GROUND, 0.1 + 0.05j)
    assert s.d11 == pytest.approx(0, abs=1e-16)
    assert s.d12 == pytest.approx(0, abs=1e-16)
    assert s.d22 == pytest.approx(0, abs=1e-16)


def test_expansion_excited_example():
    s = qf_expansion_check(EXCITED, 0.1)
    assert s.d11 == pytest.approx(-0.01, abs=1e-15)
    assert s.d22 == pytest.approx(0.01, abs=1e-15)


@settings(max_examples=200)
@given(densities(), amplitudes(0.1))
def test_expansion_matches_single_mode_form(rho, a):
    s = qf_expansion_check(rho, a)
    ref = qf_single_mode(rho, a)
    assert s.d11 == pytest.approx(ref.d11, abs=1e-12)
    assert s.d12 == pytest.approx(ref.d12, abs=1e-12)
    assert s.d22 == pytest.approx(ref.d22, abs=1e-12)


@given(densities(), amplitudes(0.1))
def test_raw_expansion_keeps_first_order_pair(rho, a):
    res = expansion_shift(rho, a)
    ac = np.conj(a)
    a2 = abs(a) ** 2
    assert res.raw.d11 == pytest.approx(-a2 * rho.rho11, abs=1e-12)
    assert res.raw.d22 == pytest.approx((a2 * rho.rho11 - 1j * ac * rho.rho12 + 1j * a * rho.rho21).real, abs=1e-12)
    assert res.raw_d21 == pytest.approx(np.conj(res.raw.d12), abs=1e-12)


@given(densities(), amplitudes(0.3))
def test_expansion_without_removal_is_full_second_order(rho, a):
    full = expansion_shift(rho, a, remove_absorption=False).raw
    ref = monochromatic_shift(rho, a)
    np.testing.assert_allclose(full.to_array(), ref.to_array(), atol=1e-12)


def test_integrated_coefficient_reproduces_rate():
    # integrating |a|^2 over modes gives Gamma*dt, so the oracle's coefficient
    # scaled by that integral is the fluctuation kernel of the integrator
    dt = 0.1
    rep = frequency_quadrature_check(SYS, c=1.0, n=1.0, dt=dt, t=0.0)
    rho = make_density(0.6, 0.2 - 0.3j)
    per_unit = qf_expansion_check(rho, 1.0)
    from thermobloch.kernels import qf_shift

    qf = qf_shift(rho, BathParams(1.0, 1.0), dt)
    assert per_unit.d11 * rep.extrapolated == pytest.approx(qf.d11, rel=1e-2)
    assert per_unit.d12 * rep.extrapolated == pytest.approx(qf.d12, rel=1e-2)


def test_lattice_pairs_are_valid_and_deterministic():
    a = list(lattice_pairs(50))
    b = list(lattice_pairs(50))
    assert a == b
    assert all(abs(x) <= 0.1 for _, x in a)
