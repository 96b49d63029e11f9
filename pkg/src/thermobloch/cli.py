"""Command-line front end.

Scenarios are configured with a ``key = value`` file and/or ``--key value``
flags (flags win).  Units are dimensionless: the fluctuation strength is given
as the deexcitation rate ``gamma_rate`` and the temperature as
``exp_beta_deltaE`` (``inf`` for zero temperature).  Level ``|1>`` is the
excited state and ``delta_e = e1 - e2 > 0``.

Exit status: 0 success, 1 validation error, 2 numerical-invariant violation.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import (
    EXCITED,
    GROUND,
    BathParams,
    DriveParams,
    ParameterError,
    SystemParams,
    ThermoBlochError,
    Trajectory,
    amplitude_for_ratio,
    drive_ratio,
)
from .integrator import (
    PositivityViolation,
    Scheme,
    StepConfig,
    StepSizeError,
    detect_steady,
    evolve,
    fermi_dirac,
    relaxation_rate,
    rho11_steady_formula,
    steady_state_analytic,
    total_rate,
)
from . import oracles

SCENARIOS = ("deexcite", "rabi", "steady", "oracle")
CSV_HEADER = ["t", "rho11", "rho12_re", "rho12_im", "rho22", "trace", "purity"]
STEADY_HEADER = ["gamma_ratio", "exp_beta_deltaE", "simulated_rho11", "analytic_rho11", "abs_error"]
DEFAULT_GAMMA_GRID = (0.0, 1.0, 10.0, 100.0)
DEFAULT_EXP_BETA_GRID = (9.0, 4.0, 1.5)
DRIVE_KEYS = ("gamma_ratio", "drive_amplitude_re", "drive_amplitude_im", "drive_omega")

KEYS = {
    "scenario": str,
    "gamma_rate": float,
    "exp_beta_deltaE": float,
    "gamma_ratio": float,
    "drive_amplitude_re": float,
    "drive_amplitude_im": float,
    "drive_omega": float,
    "delta_e": float,
    "dt": float,
    "t_max": float,
    "record_every": int,
    "scheme": str,
    "output": str,
    # raw physical parameters, reduced to gamma_rate / exp_beta_deltaE
    "e1": float,
    "e2": float,
    "c_abs2": float,
    "mode_density": float,
    "beta": float,
    # steady scenario grid and steady-state detection
    "gamma_ratio_grid": str,
    "exp_beta_deltaE_grid": str,
    "steady_tol": float,
}


class ConfigError(ThermoBlochError, ValueError):
    kind = "config"

    def __init__(self, key: str, message: str, line: int | None = None):
        self.key = key
        self.line = line
        where = "command line" if line is None else f"line {line}"
        super().__init__(f"{self.kind} error for key '{key}' ({where}): {message}")


class UnknownKeyError(ConfigError):
    kind = "unknown-key"


class MissingKeyError(ConfigError):
    kind = "missing-required-key"


class OutOfRangeError(ConfigError):
    kind = "out-of-range"


@dataclass
class ScenarioConfig:
    scenario: str
    sys: SystemParams
    bath: BathParams
    drive: DriveParams | None
    step: StepConfig | None
    output: Path
    gamma_ratio_grid: tuple[float, ...] = DEFAULT_GAMMA_GRID
    exp_beta_grid: tuple[float, ...] = DEFAULT_EXP_BETA_GRID
    steady_tol: float = 1e-4
    dt: float | None = None
    t_max: float | None = None
    scheme: Scheme = Scheme.RK4
    record_every: int = 10
    seedless_determinism: bool = field(default=True, init=False)


def _parse_float(key: str, raw: str, line: int | None) -> float:
    try:
        return float(raw)  # accepts 'inf'
    except ValueError:
        raise OutOfRangeError(key, f"'{raw}' is not a number", line) from None


def _read_pairs(text: str) -> dict[str, tuple[str, int | None]]:
    pairs = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line, "expected 'key = value'", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise UnknownKeyError(key, "not a recognised key", lineno)
        pairs[key] = (value, lineno)
    return pairs


def parse_config(text: str = "", overrides: dict[str, str] | None = None) -> ScenarioConfig:
    """Parse and validate a scenario configuration.

    ``overrides`` (typically from command-line flags) replace file values.
    Raises :class:`ConfigError` subclasses naming the key and line.
    """
    pairs = _read_pairs(text)
    for key, value in (overrides or {}).items():
        if key not in KEYS:
            raise UnknownKeyError(key, "not a recognised key")
        if value is not None:
            pairs[key] = (str(value), None)

    def has(key):
        return key in pairs

    def get(key, default=None):
        if key not in pairs:
            return default
        raw, line = pairs[key]
        kind = KEYS[key]
        if kind is float:
            return _parse_float(key, raw, line)
        if kind is int:
            try:
                return int(raw)
            except ValueError:
                raise OutOfRangeError(key, f"'{raw}' is not an integer", line) from None
        return raw

    def line_of(key):
        return pairs[key][1] if key in pairs else None

    def require(cond, key, msg):
        if not cond:
            raise OutOfRangeError(key, msg, line_of(key))

    if not has("scenario"):
        raise MissingKeyError("scenario", f"one of {', '.join(SCENARIOS)} is required")
    scenario = get("scenario")
    require(scenario in SCENARIOS, "scenario", f"'{scenario}' is not one of {', '.join(SCENARIOS)}")

    # system
    if has("e1") or has("e2"):
        for key in ("e1", "e2"):
            if not has(key):
                raise MissingKeyError(key, "e1 and e2 must be given together")
        e1, e2 = get("e1"), get("e2")
        require(math.isfinite(e1) and math.isfinite(e2) and e1 > e2, "e1", "need finite e1 > e2")
        sysp = SystemParams(e1, e2)
    else:
        de = get("delta_e", 1.0)
        require(math.isfinite(de) and de > 0, "delta_e", "must be positive and finite")
        sysp = SystemParams.from_gap(de)
    delta_e = sysp.delta_e

    # bath
    needs_bath = scenario in ("deexcite", "rabi")
    if has("c_abs2") or has("mode_density"):
        for key in ("c_abs2", "mode_density"):
            if not has(key):
                raise MissingKeyError(key, "c_abs2 and mode_density must be given together")
        require(get("c_abs2") >= 0 and math.isfinite(get("c_abs2")), "c_abs2", "must be >= 0")
        require(get("mode_density") >= 0 and math.isfinite(get("mode_density")), "mode_density", "must be >= 0")
        gamma_rate = 2.0 * math.pi * get("c_abs2") * get("mode_density")
    elif has("gamma_rate"):
        gamma_rate = get("gamma_rate")
        require(math.isfinite(gamma_rate) and gamma_rate >= 0, "gamma_rate", "must be finite and >= 0")
    elif needs_bath:
        raise MissingKeyError("gamma_rate", f"required by scenario '{scenario}'")
    else:
        gamma_rate = 1.0

    if has("beta"):
        beta = get("beta")
        require(beta > 0, "beta", "must be positive (inf for zero temperature)")
        exp_beta = math.inf if math.isinf(beta) else math.exp(beta * delta_e)
    elif has("exp_beta_deltaE"):
        exp_beta = get("exp_beta_deltaE")
        require(
            exp_beta > 1,
            "exp_beta_deltaE",
            f"{exp_beta} gives a negative Bose occupation; need > 1 (or inf)",
        )
    elif needs_bath:
        raise MissingKeyError("exp_beta_deltaE", f"required by scenario '{scenario}'")
    else:
        exp_beta = math.inf
    bath = BathParams.from_rate(gamma_rate, exp_beta, delta_e)

    # drive
    drive = None
    if scenario == "deexcite":
        for key in DRIVE_KEYS:
            if has(key):
                raise OutOfRangeError(key, "the deexcite scenario has no coherent drive", line_of(key))
    elif scenario == "rabi":
        omega = get("drive_omega", delta_e)
        require(math.isfinite(omega), "drive_omega", "must be finite")
        if has("gamma_ratio"):
            g = get("gamma_ratio")
            require(g >= 0 and math.isfinite(g), "gamma_ratio", "must be finite and >= 0")
            require(gamma_rate > 0, "gamma_ratio", "needs gamma_rate > 0; give drive_amplitude_re instead")
            amp = complex(amplitude_for_ratio(g, gamma_rate))
        elif has("drive_amplitude_re"):
            amp = complex(get("drive_amplitude_re"), get("drive_amplitude_im", 0.0))
            require(math.isfinite(amp.real) and math.isfinite(amp.imag), "drive_amplitude_re", "must be finite")
        else:
            raise MissingKeyError("gamma_ratio", "the rabi scenario needs gamma_ratio or drive_amplitude_re")
        drive = DriveParams(amp, omega)

    def grid(key, default):
        if not has(key):
            return default
        raw, line = pairs[key]
        vals = tuple(_parse_float(key, tok.strip(), line) for tok in raw.split(",") if tok.strip())
        require(len(vals) > 0, key, "empty grid")
        return vals

    gamma_grid = grid("gamma_ratio_grid", DEFAULT_GAMMA_GRID)
    exp_grid = grid("exp_beta_deltaE_grid", DEFAULT_EXP_BETA_GRID)
    require(all(g >= 0 for g in gamma_grid), "gamma_ratio_grid", "entries must be >= 0")
    require(all(x > 1 for x in exp_grid), "exp_beta_deltaE_grid", "entries must exceed 1")

    dt = get("dt")
    if dt is not None:
        require(math.isfinite(dt) and dt > 0, "dt", "must be positive")
    t_max = get("t_max")
    if t_max is not None:
        require(math.isfinite(t_max) and t_max > 0, "t_max", "must be positive")
    record_every = get("record_every", 10)
    require(record_every >= 1, "record_every", "must be a positive integer")
    scheme_raw = get("scheme", "rk4")
    require(scheme_raw in ("rk4", "paper_euler"), "scheme", "must be 'rk4' or 'paper_euler'")
    steady_tol = get("steady_tol", 1e-4)
    require(steady_tol > 0, "steady_tol", "must be positive")

    cfg = ScenarioConfig(
        scenario=scenario,
        sys=sysp,
        bath=bath,
        drive=drive,
        step=None,
        output=Path(get("output", f"{scenario}.csv")),
        gamma_ratio_grid=gamma_grid,
        exp_beta_grid=exp_grid,
        steady_tol=steady_tol,
        dt=dt,
        t_max=t_max,
        scheme=Scheme(scheme_raw),
        record_every=record_every,
    )
    if scenario in ("deexcite", "rabi"):
        cfg.step = _default_step(cfg, bath, drive)
    return cfg


def _default_step(cfg: ScenarioConfig, bath: BathParams, drive: DriveParams | None) -> StepConfig:
    rate = total_rate(bath, cfg.sys, drive)
    if rate == 0 and cfg.dt is None:
        raise MissingKeyError("dt", "cannot pick a default step with all rates zero")
    dt = cfg.dt if cfg.dt is not None else 1e-3 / rate
    t_max = cfg.t_max
    if t_max is None:
        relax = relaxation_rate(bath, cfg.sys)
        if relax > 0:
            # 20 population (deexcite) or coherence (rabi) relaxation times
            t_max = 20.0 / relax if drive is None else 40.0 / relax
        else:
            t_max = 5.0 * math.pi / abs(drive.amplitude)
    return StepConfig(dt=dt, t_max=t_max, scheme=cfg.scheme, record_every=cfg.record_every)


# --------------------------------------------------------------------------
# output


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(traj: Trajectory, path) -> None:
    """Write a trajectory with 17 significant digits and LF line endings."""
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            tr, pu = traj.trace, traj.purity
            for i in range(len(traj)):
                z = traj.rho12[i]
                w.writerow(
                    [_fmt(v) for v in (traj.times[i], traj.rho11[i], z.real, z.imag, traj.rho22[i], tr[i], pu[i])]
                )
    except OSError as exc:
        raise OSError(f"cannot write trajectory to {path}: {exc}") from exc


def read_csv(path) -> Trajectory:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if rows[0] != CSV_HEADER:
        raise ValueError(f"unexpected header {rows[0]}")
    data = np.array([[float(x) for x in r] for r in rows[1:]]).reshape(-1, len(CSV_HEADER))
    return Trajectory(
        times=data[:, 0],
        rho11=data[:, 1],
        rho22=data[:, 4],
        rho12=data[:, 2] + 1j * data[:, 3],
    )


# --------------------------------------------------------------------------
# scenarios


@dataclass
class Report:
    values: dict
    exit_code: int = 0

    def render(self) -> str:
        lines = []
        for k, v in self.values.items():
            if isinstance(v, float):
                v = _fmt(v)
            elif v is None:
                v = "none"
            lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"


def _trailing_mean(traj: Trajectory, window: float) -> float:
    mask = traj.times >= traj.times[-1] - window
    return float(np.mean(traj.rho11[mask]))


def _row_violations(traj: Trajectory) -> int:
    bad = (np.abs(traj.trace - 1.0) > 1e-12) | (traj.purity < 0.5 - 1e-12) | (traj.purity > 1.0 + 1e-9)
    return int(np.count_nonzero(bad))


def _run_deexcite(cfg: ScenarioConfig) -> Report:
    traj = evolve(EXCITED, cfg.step, cfg.sys, cfg.bath)
    write_csv(traj, cfg.output)
    analytic = fermi_dirac(cfg.bath, cfg.sys)
    final = float(traj.rho11[-1])
    relax = relaxation_rate(cfg.bath, cfg.sys)
    window = 5.0 / relax if relax > 0 else traj.times[-1]
    return Report(
        {
            "scenario": "deexcite",
            "output": str(cfg.output),
            "final_rho11": final,
            "analytic_rho11": analytic,
            "abs_error": abs(final - analytic),
            "steady_time": detect_steady(traj, window, cfg.steady_tol),
            "invalid_rows": _row_violations(traj),
        }
    )


def _run_rabi(cfg: ScenarioConfig) -> Report:
    traj = evolve(GROUND, cfg.step, cfg.sys, cfg.bath, cfg.drive)
    write_csv(traj, cfg.output)
    final = float(traj.rho11[-1])
    relax = relaxation_rate(cfg.bath, cfg.sys)
    values = {"scenario": "rabi", "output": str(cfg.output), "final_rho11": final}
    if relax > 0:
        window = 5.0 / relax
        mean = _trailing_mean(traj, window)
        analytic = steady_state_analytic(cfg.bath, cfg.sys, cfg.drive).rho11_inf
        values.update(
            gamma_ratio=drive_ratio(cfg.bath, cfg.drive),
            mean_rho11=mean,
            analytic_rho11=analytic,
            abs_error=abs(mean - analytic),
            steady_time=detect_steady(traj, window, cfg.steady_tol),
        )
    else:
        analytic = oracles.rabi_analytic(abs(cfg.drive.amplitude), traj.times[-1])
        values.update(analytic_rho11=analytic, abs_error=abs(final - analytic), steady_time=None)
    values["invalid_rows"] = _row_violations(traj)
    return Report(values)


def simulate_steady(
    gamma_ratio: float,
    exp_beta_de: float,
    gamma_rate: float = 1.0,
    delta_e: float = 1.0,
    scheme: Scheme = Scheme.RK4,
    dt: float | None = None,
    t_max: float | None = None,
) -> float:
    """Long-time excitation for one grid point, starting in the ground state."""
    sysp = SystemParams.from_gap(delta_e)
    bath = BathParams.from_rate(gamma_rate, exp_beta_de, delta_e)
    drive = DriveParams.resonant(amplitude_for_ratio(gamma_ratio, gamma_rate), sysp)
    rate = total_rate(bath, sysp, drive)
    step = StepConfig(
        dt=dt if dt is not None else 1e-3 / rate,
        t_max=t_max if t_max is not None else 40.0 / relaxation_rate(bath, sysp),
        scheme=scheme,
        record_every=10**9,
    )
    return float(evolve(GROUND, step, sysp, bath, drive).rho11[-1])


def _run_steady(cfg: ScenarioConfig) -> Report:
    rows = []
    gamma = cfg.bath.gamma
    for g in cfg.gamma_ratio_grid:
        for x in cfg.exp_beta_grid:
            sim = simulate_steady(g, x, gamma, cfg.sys.delta_e, cfg.scheme, cfg.dt, cfg.t_max)
            ana = rho11_steady_formula(g, x)
            rows.append((g, x, sim, ana, abs(sim - ana)))
    try:
        with cfg.output.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(STEADY_HEADER)
            for r in rows:
                w.writerow([_fmt(v) for v in r])
    except OSError as exc:
        raise OSError(f"cannot write steady table to {cfg.output}: {exc}") from exc
    worst = max(rows, key=lambda r: r[4])
    return Report(
        {
            "scenario": "steady",
            "output": str(cfg.output),
            "grid_points": len(rows),
            "final_rho11": worst[2],
            "analytic_rho11": worst[3],
            "abs_error": worst[4],
            "steady_time": None,
        }
    )


def run_oracle_checks() -> list[tuple[str, float, float]]:
    """All oracle checks as ``(name, measured error, threshold)``."""
    checks = []
    sysp = SystemParams.from_gap(1.0)

    gamma = 1.0
    bath = BathParams.from_rate(gamma)
    traj = evolve(EXCITED, StepConfig(dt=1e-3 / gamma, t_max=5.0 / gamma), sysp, bath)
    ref = oracles.ww_decay(oracles.WWParams(g_abs2=gamma / (2 * math.pi)), traj.times)
    checks.append(("weisskopf_wigner", float(np.max(np.abs(traj.rho11 / ref - 1.0))), 1e-4))

    q = oracles.frequency_quadrature_check(sysp)
    checks.append(("quadrature_abs_a2", q.rel_error, 1e-2))
    checks.append(("quadrature_vanishing", q.worst_vanishing_ratio, 1e-3))

    worst = 0.0
    for rho, a in oracles.lattice_pairs(1000):
        got = oracles.qf_expansion_check(rho, a)
        want = oracles.qf_single_mode(rho, a)
        worst = max(worst, abs(got.d11 - want.d11), abs(got.d12 - want.d12))
    checks.append(("expansion_term_by_term", worst, 1e-12))

    c_abs = 1.0
    drive = DriveParams.resonant(c_abs, sysp)
    free = BathParams(0.0, 0.0)
    traj = evolve(GROUND, StepConfig(dt=5e-4 / c_abs, t_max=5 * math.pi / c_abs), sysp, free, drive)
    err = float(np.max(np.abs(traj.rho11 - oracles.rabi_analytic(c_abs, traj.times))))
    checks.append(("rabi_reference", err, 1e-3))
    return checks


def _run_oracle(cfg: ScenarioConfig) -> Report:
    values = {"scenario": "oracle"}
    ok = True
    for name, err, thr in run_oracle_checks():
        passed = err <= thr
        ok &= passed
        values[f"{name}.error"] = err
        values[f"{name}.threshold"] = thr
        values[f"{name}.status"] = "pass" if passed else "fail"
    values["status"] = "pass" if ok else "fail"
    return Report(values, exit_code=0 if ok else 2)


def run_scenario(cfg: ScenarioConfig) -> Report:
    runner = {
        "deexcite": _run_deexcite,
        "rabi": _run_rabi,
        "steady": _run_steady,
        "oracle": _run_oracle,
    }[cfg.scenario]
    report = runner(cfg)
    if report.values.get("invalid_rows"):
        report.exit_code = 2
    return report


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="thermobloch",
        description="Finite-temperature optical Bloch simulations of a two-level system.",
    )
    p.add_argument("--config", type=Path, help="key = value configuration file, read before flags")
    for key in KEYS:
        p.add_argument(f"--{key}", dest=key, default=None, metavar="VALUE")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k != "config" and v is not None}
    try:
        text = args.config.read_text() if args.config else ""
        cfg = parse_config(text, overrides)
        report = run_scenario(cfg)
    except (ConfigError, ParameterError, StepSizeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (PositivityViolation, ThermoBlochError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(report.render())
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
