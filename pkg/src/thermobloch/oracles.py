"""Independent checks of the production kernels.

* closed-form Weisskopf-Wigner decay of a zero-dimensional emitter;
* brute-force frequency quadrature of the single-mode amplitudes at finite
  regulator ``epsilon``, extrapolated to ``epsilon -> 0``;
* a symbolic second-order expansion of ``T rho T^dagger`` in the mode
  amplitude, with spontaneous-absorption products removed.
"""
from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import DensityMatrix, ParameterError, SystemParams, ThermoBlochError
from .kernels import KernelShift


class WindowTooSmallError(ThermoBlochError, ValueError):
    pass


# --------------------------------------------------------------------------
# Weisskopf-Wigner


@dataclass(frozen=True)
class WWParams:
    g_abs2: float
    omega: float = 1.0

    def __post_init__(self):
        if not self.g_abs2 >= 0:
            raise ParameterError(f"g_abs2={self.g_abs2} must be >= 0")

    @property
    def rate(self) -> float:
        return 2.0 * math.pi * self.g_abs2


def ww_decay(params: WWParams, t):
    """Excited-state probability ``exp(-2 pi |g|^2 t)`` (Markovian, principal part dropped)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    out = np.exp(-params.rate * t)
    return float(out) if out.ndim == 0 else out


def rabi_analytic(c_abs: float, t):
    """Resonant, fluctuation-free excitation from the ground state: ``sin^2(|C| t)``."""
    out = np.sin(c_abs * np.asarray(t, dtype=float)) ** 2
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# frequency quadrature


class Integrand(enum.Enum):
    A = "A"
    ASTAR = "Astar"
    A2 = "A2"
    ASTAR2 = "Astar2"
    ABS_A2 = "AbsA2"


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite-midpoint rule on a window centred at the gap.

    ``half_width`` defaults to ``100 * max(epsilon, 10 * 2pi/dt)``.  The
    outer mesh has ``nodes_per_lobe`` nodes per ``2pi/T`` where ``T`` is the
    longest phase time in the integrand; ``|nu| < core_width * epsilon`` gets
    ``core_nodes`` evenly spaced nodes so the regulator scale is resolved.
    """

    epsilon: float
    half_width: float | None = None
    nodes_per_lobe: int = 128
    core_width: float = 64.0
    core_nodes: int = 2048
    density: float | Callable[[np.ndarray], np.ndarray] = 1.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ParameterError(f"epsilon={self.epsilon} must be > 0")
        if self.nodes_per_lobe < 64:
            raise ParameterError("need at least 64 nodes per sinc lobe")

    def window(self, dt: float) -> float:
        min_w = 100.0 * max(self.epsilon, 10.0 * 2.0 * math.pi / dt)
        w = min_w if self.half_width is None else self.half_width
        if w < min_w * (1 - 1e-12):
            raise WindowTooSmallError(f"half-width {w} below required {min_w}")
        return w

    def density_at(self, omega: np.ndarray) -> np.ndarray:
        if callable(self.density):
            return np.asarray(self.density(omega), dtype=float)
        return np.full_like(omega, float(self.density))


def _midpoints(a: float, b: float, h_max: float) -> tuple[np.ndarray, np.ndarray]:
    n = max(1, math.ceil((b - a) / h_max))
    h = (b - a) / n
    return a + h * (np.arange(n) + 0.5), np.full(n, h)


def quadrature_nodes(spec: QuadratureSpec, dt: float, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Detuning nodes ``nu = omega - delta_e`` and midpoint weights."""
    w = spec.window(dt)
    t_phase = max(dt, abs(t) + dt)
    h_outer = 2.0 * math.pi / (spec.nodes_per_lobe * t_phase)
    core = min(spec.core_width * spec.epsilon, w)
    h_core = 2.0 * core / spec.core_nodes
    if h_core >= h_outer:
        return _midpoints(-w, w, h_outer)
    pieces = [_midpoints(-w, -core, h_outer), _midpoints(-core, core, h_core), _midpoints(core, w, h_outer)]
    return np.concatenate([p[0] for p in pieces]), np.concatenate([p[1] for p in pieces])


def _amplitude_grid(nu: np.ndarray, c: complex, dt: float, t: float, eps: float) -> np.ndarray:
    bracket = -2j * np.sin(0.5 * nu * dt) * np.exp(-1j * nu * (t + 0.5 * dt))
    return -c * bracket / (nu + 1j * eps)


def kernel_integral_numeric(
    spec: QuadratureSpec,
    sys: SystemParams,
    c: complex,
    dt: float,
    t: float,
    which: Integrand | str,
) -> complex:
    """Midpoint quadrature of ``int d omega n(omega) f(A(omega))`` at finite epsilon."""
    which = Integrand(which)
    if dt <= 0:
        raise ParameterError("dt must be positive")
    nu, wts = quadrature_nodes(spec, dt, t)
    w = spec.window(dt)
    # boundary test on the absolutely integrable |A|^2 envelope; the 1/nu tail of A
    # itself is only conditionally convergent and cancels between the two ends
    c_abs = abs(c)
    if c_abs > 0:
        peak = c_abs**2 * dt**2
        edge = 4.0 * c_abs**2 / (w**2 + spec.epsilon**2)
        if edge > 1e-6 * peak:
            raise WindowTooSmallError(f"|A|^2 at the window edge is {edge / peak:.2e} of its peak")
    amp = _amplitude_grid(nu, complex(c), dt, t, spec.epsilon)
    f = {
        Integrand.A: amp,
        Integrand.ASTAR: amp.conj(),
        Integrand.A2: amp * amp,
        Integrand.ASTAR2: (amp * amp).conj(),
        Integrand.ABS_A2: (amp.real**2 + amp.imag**2).astype(complex),
    }[which]
    dens = spec.density_at(nu + sys.delta_e)
    return complex(np.sum(wts * dens * f))


def richardson_epsilon(values: dict[float, complex]) -> complex:
    """Intercept of a least-squares line through ``(epsilon, value)`` pairs."""
    eps = np.array(sorted(values))
    vals = np.array([values[e] for e in eps])
    design = np.vstack([np.ones_like(eps), eps]).T
    coef_re = np.linalg.lstsq(design, vals.real, rcond=None)[0]
    coef_im = np.linalg.lstsq(design, vals.imag, rcond=None)[0]
    return complex(coef_re[0], coef_im[0])


@dataclass
class QuadratureReport:
    analytic: float
    extrapolated: float
    raw: dict[float, float]
    vanishing: dict[str, float]
    vanishing_extrapolated: dict[str, float]

    @property
    def rel_error(self) -> float:
        return abs(self.extrapolated - self.analytic) / self.analytic

    @property
    def worst_vanishing_ratio(self) -> float:
        return max(self.vanishing.values()) / abs(self.extrapolated)


def frequency_quadrature_check(
    sys: SystemParams,
    c: complex = 1.0,
    n: float = 1.0,
    dt: float = 0.1,
    t: float = 0.1,
    epsilons=(4e-3, 2e-3, 1e-3),
) -> QuadratureReport:
    """Run all five integrals; epsilons are in units of the gap."""
    eps_abs = [e * sys.delta_e for e in epsilons]
    raw = {}
    for e in eps_abs:
        spec = QuadratureSpec(epsilon=e, density=n)
        raw[e] = kernel_integral_numeric(spec, sys, c, dt, t, Integrand.ABS_A2).real
    extrap = richardson_epsilon(raw).real
    vanishing, vanishing_extrap = {}, {}
    for w in (Integrand.A, Integrand.ASTAR, Integrand.A2, Integrand.ASTAR2):
        vals = {e: kernel_integral_numeric(QuadratureSpec(epsilon=e, density=n), sys, c, dt, t, w) for e in eps_abs}
        vanishing[w.value] = abs(vals[min(eps_abs)])
        vanishing_extrap[w.value] = abs(richardson_epsilon(vals))
    return QuadratureReport(
        analytic=2.0 * math.pi * abs(c) ** 2 * n * dt,
        extrapolated=extrap,
        raw=raw,
        vanishing=vanishing,
        vanishing_extrapolated=vanishing_extrap,
    )


# --------------------------------------------------------------------------
# term-by-term expansion
#
# A polynomial in (A, A*) is a dict {(p, q): coeff} for coeff * A^p * A*^q.
# Amplitude terms also carry which initial amplitude (1 or 2) they came from
# so spontaneous-absorption products can be identified.

_Poly = dict


def _pmul(x: _Poly, y: _Poly, order: int = 2) -> _Poly:
    out: _Poly = defaultdict(complex)
    for (p1, q1), c1 in x.items():
        for (p2, q2), c2 in y.items():
            if p1 + p2 + q1 + q2 <= order:
                out[(p1 + p2, q1 + q2)] += c1 * c2
    return dict(out)


def _pconj(x: _Poly) -> _Poly:
    return {(q, p): c.conjugate() for (p, q), c in x.items()}


def _padd(*xs: _Poly) -> _Poly:
    out: _Poly = defaultdict(complex)
    for x in xs:
        for k, c in x.items():
            out[k] += c
    return dict(out)


# second-order transfer-matrix elements, T = 1 - i M - M^2/2
_T11 = {(0, 0): 1.0 + 0j, (1, 1): -0.5 + 0j}
_T12 = {(1, 0): -1j}
_T21 = {(0, 1): -1j}
_T22 = {(0, 0): 1.0 + 0j, (1, 1): -0.5 + 0j}


def _evolved_amplitudes(a1: complex, a2: complex, remove_absorption: bool) -> tuple[_Poly, _Poly]:
    """New amplitudes as polynomials in (A, A*).

    With ``remove_absorption`` every term that multiplies ``a2`` by a power of
    ``A`` (excitation out of the ground amplitude) is dropped.
    """

    def times(poly: _Poly, amp: complex, from_ground: bool) -> _Poly:
        out = {}
        for (p, q), c in poly.items():
            if remove_absorption and from_ground and p > 0:
                continue
            out[(p, q)] = c * amp
        return out

    new1 = _padd(times(_T11, a1, False), times(_T12, a2, True))
    new2 = _padd(times(_T21, a1, False), times(_T22, a2, True))
    return new1, new2


def _evaluate(poly: _Poly, a: complex, keep: Callable[[int, int], bool] = lambda p, q: True) -> complex:
    ac = a.conjugate()
    return sum((c * a**p * ac**q for (p, q), c in poly.items() if keep(p, q)), 0j)


@dataclass(frozen=True)
class ExpansionResult:
    raw: KernelShift
    raw_d21: complex
    integrated: KernelShift
    integrated_d21: complex


def expansion_shift(rho: DensityMatrix, a: complex, remove_absorption: bool = True) -> ExpansionResult:
    """Second-order shift of ``T rho T^dagger - rho`` from a pure-state decomposition.

    ``raw`` keeps every surviving term.  ``integrated`` keeps only the terms
    that survive frequency integration (order 0 and ``|A|^2``).
    """
    a = complex(a)
    w, v = np.linalg.eigh(rho.to_array())
    polys = {(i, j): {} for i in (1, 2) for j in (1, 2)}
    for p, vec in zip(w, v.T):
        if abs(p) < 1e-300:
            continue
        n1, n2 = _evolved_amplitudes(complex(vec[0]), complex(vec[1]), remove_absorption)
        new = {1: n1, 2: n2}
        for i in (1, 2):
            for j in (1, 2):
                term = {k: p * c for k, c in _pmul(new[i], _pconj(new[j])).items()}
                polys[(i, j)] = _padd(polys[(i, j)], term)
    old = {(1, 1): rho.rho11, (1, 2): rho.rho12, (2, 1): rho.rho21, (2, 2): rho.rho22}

    def shifts(keep):
        return {ij: _evaluate(polys[ij], a, keep) - old[ij] for ij in polys}

    raw = shifts(lambda p, q: True)
    integ = shifts(lambda p, q: p == q)
    return ExpansionResult(
        raw=KernelShift(raw[(1, 1)].real, raw[(1, 2)], raw[(2, 2)].real),
        raw_d21=raw[(2, 1)],
        integrated=KernelShift(integ[(1, 1)].real, integ[(1, 2)], integ[(2, 2)].real),
        integrated_d21=integ[(2, 1)],
    )


def qf_expansion_check(rho: DensityMatrix, a: complex) -> KernelShift:
    """Frequency-integrated quantum-fluctuation shift from the term-by-term expansion."""
    return expansion_shift(rho, a, remove_absorption=True).integrated


def qf_single_mode(rho: DensityMatrix, a: complex) -> KernelShift:
    """Closed form of the single-mode fluctuation shift: ``-|a|^2 rho11``, ``-|a|^2 rho12 / 2``."""
    a2 = abs(a) ** 2
    return KernelShift(-a2 * rho.rho11, -0.5 * a2 * rho.rho12, a2 * rho.rho11)


def lattice_pairs(n: int, a_max: float = 0.1):
    """Deterministic, well-spread valid ``(rho, a)`` pairs (Kronecker sequence)."""
    from .core import make_density

    # fractional parts of square roots of primes are equidistributed jointly
    alphas = np.sqrt([2.0, 3.0, 5.0, 7.0, 11.0]) % 1.0
    for k in range(1, n + 1):
        u = (k * alphas) % 1.0
        rho11 = u[0]
        r = u[1] * math.sqrt(rho11 * (1.0 - rho11))
        rho = make_density(rho11, r * np.exp(2j * math.pi * u[2]))
        a = a_max * u[3] * np.exp(2j * math.pi * u[4])
        yield rho, complex(a)
