"""Acceptance criteria, each run at its stated tolerance.

Every test records one PASS/FAIL line; the lines are repeated in the
``acceptance criteria`` section of the pytest terminal summary.
"""
import math
import time
import warnings

import numpy as np
import pytest

from thermobloch.core import (
    EIG_TOL,
    EXCITED,
    GROUND,
    BathParams,
    DriveParams,
    SystemParams,
    amplitude_for_ratio,
    eigenvalues,
    make_density,
)
from thermobloch.integrator import (
    STEP_HARD_LIMIT,
    Scheme,
    StepSizeWarning,
    StepConfig,
    evolve,
    relaxation_rate,
    rho11_steady_formula,
    steady_state_analytic,
    step,
    thermal_relaxation,
    total_rate,
)
from thermobloch.kernels import (
    amplitude_B,
    cp_shift,
    qf_shift,
    tf_shift,
    transfer_matrix,
)
from thermobloch.oracles import (
    WWParams,
    frequency_quadrature_check,
    qf_expansion_check,
    qf_single_mode,
    rabi_analytic,
    ww_decay,
)
from thermobloch.cli import simulate_steady

SYS = SystemParams.from_gap(1.0)
GAMMA_GRID = (0.0, 1.0, 10.0, 100.0)
EXP_BETA_GRID = (9.0, 4.0, 1.5)


# the stated step 1e-3/Gamma sits above the warning threshold once N_B > 0
@pytest.mark.filterwarnings("ignore::thermobloch.integrator.StepSizeWarning")
def test_c1_fig2_fixed_points(verdict):
    targets = {math.inf: 0.0, 9.0: 0.1, 4.0: 0.2, 7 / 3: 0.3, 1.5: 0.4}
    worst_err, worst_time = 0.0, 0.0
    for x, want in targets.items():
        bath = BathParams.from_rate(1.0, x)
        r = relaxation_rate(bath, SYS)
        start = time.perf_counter()
        traj = evolve(EXCITED, StepConfig(1e-3 / bath.gamma, t_max=20 / r, record_every=100), SYS, bath)
        worst_time = max(worst_time, time.perf_counter() - start)
        worst_err = max(worst_err, abs(traj.final.rho11 - want))
    ok = worst_err <= 1e-3 and worst_time < 1.0
    verdict("C1 deexcitation fixed points", ok, f"max |rho11 - target| = {worst_err:.2e} (tol 1e-3), slowest curve {worst_time:.3f} s")
    assert ok


def test_c2_weisskopf_wigner(verdict):
    gamma = 1.0
    bath = BathParams.from_rate(gamma)
    traj = evolve(EXCITED, StepConfig(1e-3 / gamma, t_max=5 / gamma), SYS, bath)
    ref = ww_decay(WWParams(gamma / (2 * math.pi)), traj.times)
    err = float(np.max(np.abs(traj.rho11 / ref - 1)))
    ok = err <= 1e-4
    verdict("C2 Weisskopf-Wigner decay", ok, f"max rel error = {err:.2e} over Gamma t in [0, 5] (tol 1e-4)")
    assert ok


def test_c3_decoherence_half_rate(verdict):
    gamma = 1.0
    bath = BathParams.from_rate(gamma)
    rho0 = make_density(0.5, 0.5)
    traj = evolve(rho0, StepConfig(1e-3 / gamma, t_max=10 / gamma), SYS, bath)
    slope = np.polyfit(traj.times, np.log(np.abs(traj.rho12)), 1)[0]
    rel = abs(-slope / (gamma / 2) - 1)
    ok = rel <= 1e-3
    verdict("C3 decoherence at half rate", ok, f"fitted rate {-slope:.8f} vs Gamma/2 = {gamma / 2}, rel err {rel:.2e} (tol 1e-3)")
    assert ok


def test_c4_steady_state_grid(verdict):
    worst = 0.0
    for g in GAMMA_GRID:
        for x in EXP_BETA_GRID:
            sim = simulate_steady(g, x)
            worst = max(worst, abs(sim - rho11_steady_formula(g, x)))
    ok = worst <= 1e-3
    verdict("C4 steady state vs closed form (12 grid points)", ok, f"max abs error = {worst:.2e} (tol 1e-3)")
    assert ok


def test_c4_strong_drive_near_half(verdict):
    values = {x: simulate_steady(100.0, x) for x in EXP_BETA_GRID}
    dev = {x: abs(v - 0.5) for x, v in values.items()}
    ok = max(dev.values()) <= 0.01
    detail = ", ".join(f"E={x:g}: {values[x]:.4f}" for x in EXP_BETA_GRID)
    verdict("C4 gamma = 100 gives rho11 within 0.01 of 1/2", ok, f"{detail}; max |rho11 - 1/2| = {max(dev.values()):.4f} (tol 0.01)")
    assert ok


def test_c5_quadrature(verdict):
    rep = frequency_quadrature_check(SYS)
    ok = rep.rel_error <= 1e-2 and rep.worst_vanishing_ratio <= 1e-3
    verdict(
        "C5 frequency quadrature",
        ok,
        f"|A|^2 rel error {rep.rel_error:.2e} (tol 1e-2), worst vanishing ratio {rep.worst_vanishing_ratio:.2e} (tol 1e-3)",
    )
    assert ok


def test_c6_expansion(verdict):
    rng = np.random.default_rng(20240601)
    worst = 0.0
    for _ in range(1000):
        rho11 = rng.random()
        r = rng.random() * math.sqrt(rho11 * (1 - rho11))
        rho = make_density(rho11, r * np.exp(2j * math.pi * rng.random()))
        a = 0.1 * rng.random() * np.exp(2j * math.pi * rng.random())
        got, want = qf_expansion_check(rho, a), qf_single_mode(rho, a)
        worst = max(worst, abs(got.d11 - want.d11), abs(got.d12 - want.d12))
    ok = worst <= 1e-12
    verdict("C6 term-by-term expansion", ok, f"max abs deviation on d11, d12 = {worst:.2e} over 1000 pairs (tol 1e-12)")
    assert ok


def _random_case(rng, scheme, rate_dt_max):
    rho11 = rng.random()
    # half the states are pure, where positivity is tightest
    frac = 1.0 if rng.random() < 0.5 else rng.random()
    r = frac * math.sqrt(rho11 * (1 - rho11))
    rho = make_density(rho11, r * np.exp(2j * math.pi * rng.random()))
    x = math.inf if rng.random() < 0.2 else 1.0 + 10 ** rng.uniform(-1.5, 1.5)
    bath = BathParams.from_rate(rng.uniform(0, 5), x)
    drive = DriveParams(rng.uniform(0, 3) * np.exp(2j * math.pi * rng.random()), rng.uniform(0.5, 1.5))
    rate = total_rate(bath, SYS, drive)
    dt = rng.uniform(0, rate_dt_max) / rate
    return rho, bath, drive, StepConfig(dt, scheme=scheme), rng.uniform(0, 50)


@pytest.mark.slow
def test_c7_random_step_invariants(verdict):
    """RK4 steps with ``rate * dt`` drawn up to the hard guard."""
    rng = np.random.default_rng(7)
    n = 100_000
    tr_dev = kern_tr = unit = 0.0
    eig_low, eig_high = math.inf, -math.inf
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", StepSizeWarning)
        for _ in range(n):
            rho, bath, drive, cfg, t = _random_case(rng, Scheme.RK4, STEP_HARD_LIMIT)
            new = step(rho, cfg, SYS, bath, drive, t)
            tr_dev = max(tr_dev, abs(new.trace - 1))
            hi, lo = eigenvalues(new)
            eig_low, eig_high = min(eig_low, lo), max(eig_high, hi - 1)
            b = amplitude_B(cfg.dt, t, drive, SYS)
            for s in (qf_shift(rho, bath, cfg.dt), tf_shift(rho, bath, SYS, cfg.dt), cp_shift(rho, b)):
                kern_tr = max(kern_tr, abs(s.d11 + s.d22))
            tm = transfer_matrix(b * rng.uniform(1, 300))
            unit = max(unit, float(np.max(np.abs(tm @ tm.conj().T - np.eye(2)))))
    ok = tr_dev <= 1e-13 and eig_low >= -EIG_TOL and eig_high <= EIG_TOL and kern_tr <= 1e-14 and unit <= 1e-14
    verdict(
        "C7 random-step invariants (1e5 steps)",
        ok,
        f"trace dev {tr_dev:.1e}, min eig {eig_low:.1e}, max eig {1 + eig_high:.12f}, "
        f"kernel trace {kern_tr:.1e}, unitarity {unit:.1e}",
    )
    assert ok


def _convergence(scheme):
    bath = BathParams.from_rate(1.0, 4.0)
    r = relaxation_rate(bath, SYS)
    t_end = 2.0 / r
    errors = []
    for k in range(4):
        dt = 0.05 / r / 2**k
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", StepSizeWarning)
            traj = evolve(EXCITED, StepConfig(dt, t_max=t_end, scheme=scheme), SYS, bath)
        errors.append(abs(traj.final.rho11 - thermal_relaxation(traj.times[-1], 1.0, bath, SYS)))
    return [math.log2(errors[i] / errors[i + 1]) for i in range(3)]


def test_c8_convergence_orders(verdict):
    eu = _convergence(Scheme.PAPER_EULER)
    rk = _convergence(Scheme.RK4)
    ok = all(abs(p - 1) <= 0.1 for p in eu) and all(abs(p - 4) <= 0.3 for p in rk)
    fmt = lambda ps: ", ".join(f"{p:.3f}" for p in ps)
    verdict("C8 convergence orders", ok, f"summed-shift orders [{fmt(eu)}] (1 +- 0.1), RK4 orders [{fmt(rk)}] (4 +- 0.3)")
    assert ok


def test_c9_rabi_reference(verdict):
    c = 1.0
    free = BathParams(0.0, 0.0)
    drive = DriveParams.resonant(c, SYS)
    traj = evolve(GROUND, StepConfig(5e-4 / c, t_max=5 * math.pi / c), SYS, free, drive)
    undamped = float(np.max(np.abs(traj.rho11 - rabi_analytic(c, traj.times))))

    # damped: strong drive relative to the fluctuations, so it stays underdamped
    bath = BathParams.from_rate(1.0, 9.0)
    drive = DriveParams.resonant(amplitude_for_ratio(100.0, 1.0), SYS)
    r = relaxation_rate(bath, SYS)
    traj = evolve(GROUND, StepConfig(1e-3 / total_rate(bath, SYS, drive), t_max=40 / r), SYS, bath, drive)
    ss = steady_state_analytic(bath, SYS, drive).rho11_inf
    dev = np.abs(traj.rho11 - ss)
    inner = dev[1:-1]
    peaks = inner[(inner > dev[:-2]) & (inner >= dev[2:])]
    peaks = peaks[peaks > 1e-9]
    monotone = len(peaks) >= 3 and bool(np.all(np.diff(peaks) < 0))
    mean = float(np.mean(traj.rho11[traj.times >= traj.times[-1] - 5 / r]))
    ok = undamped <= 1e-3 and monotone and abs(mean - ss) <= 1e-3
    verdict(
        "C9 Rabi reference",
        ok,
        f"undamped max error {undamped:.2e} (tol 1e-3); damped envelope monotone over {len(peaks)} extrema: {monotone}; "
        f"trailing mean {mean:.6f} vs analytic {ss:.6f} (tol 1e-3)",
    )
    assert ok
