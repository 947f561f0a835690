"""Temporal modes of the traveling field, amplification gain and overlaps.

The pulse entangles the mechanics with exactly one effective mode of the
output light whose profile follows the coupling response M13(s); detecting
any other profile is equivalent to detecting that mode behind a
beamsplitter (see :mod:`levsqueeze.covariance`).  In the wide-cavity
(adiabatic) regime the profiles reduce to growing/decaying exponentials at
the rate G = g^2/kappa.
"""

import dataclasses
import math
import warnings

import numpy as np
from scipy.optimize import brentq

from .core import SystemParams
from .expsum import ExpSum
from .propagator import Propagator, m13_closed_form, rate_lambda, default_grid_size

__all__ = [
    "TemporalMode",
    "GainReport",
    "amplification_gain",
    "optimal_output_mode",
    "optimal_input_mode",
    "adiabatic_output_mode",
    "adiabatic_input_mode",
    "mode_overlap",
    "pulse_duration_for_gain",
]

MODE_KINDS = ("optimal_out", "optimal_in", "adiabatic_out", "adiabatic_in", "custom")


@dataclasses.dataclass(frozen=True)
class TemporalMode:
    """Normalized temporal profile f(s) on a uniform grid over [0, tau].

    Values are rescaled on construction so that the trapezoid rule gives
    integral f^2 ds = 1 exactly; the filtered quadratures X = int f X_out ds,
    Y = int f Y_out ds then satisfy [X, Y] = 2i under the same rule.  When
    the profile is known in closed form, ``analytic`` carries the
    continuum-normalized version as an :class:`ExpSum`.
    """

    grid: np.ndarray
    values: np.ndarray
    kind: str = "custom"
    analytic: ExpSum | None = None

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("mode grid must be 1-D with at least two samples")
        if values.shape != grid.shape:
            raise ValueError(
                f"profile shape {values.shape} does not match grid shape {grid.shape}"
            )
        if self.kind not in MODE_KINDS:
            raise ValueError(f"unknown mode kind {self.kind!r}; expected one of {MODE_KINDS}")
        norm_sq = np.trapezoid(values * values, grid)
        if not norm_sq > 0.0 or not np.isfinite(norm_sq):
            raise ValueError("mode profile has no usable norm (zero or non-finite)")
        values = values / math.sqrt(norm_sq)
        grid = grid.copy()
        grid.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @property
    def tau(self) -> float:
        return float(self.grid[-1])

    def norm_squared(self) -> float:
        """Trapezoid-rule norm; 1 by construction, re-evaluated for checks."""
        return float(np.trapezoid(self.values**2, self.grid))

    def resampled(self, grid: np.ndarray) -> "TemporalMode":
        """Profile linearly interpolated (or re-evaluated) on another grid."""
        grid = np.asarray(grid, dtype=float)
        if self.analytic is not None:
            values = self.analytic(grid)
        else:
            values = np.interp(grid, self.grid, self.values)
        return TemporalMode(grid=grid, values=values, kind=self.kind, analytic=self.analytic)

    def to_csv(self, path) -> None:
        """Two-column CSV (time, value) for plotting."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# levsqueeze temporal mode profile v1\n")
            fh.write(f"# kind = {self.kind}\n")
            fh.write("time,value\n")
            for t, v in zip(self.grid, self.values):
                fh.write(f"{t!r},{v!r}\n")


@dataclasses.dataclass(frozen=True)
class GainReport:
    """Amplification gain of the pulse together with its adiabatic estimate."""

    gain: float
    rate_g: float
    adiabatic_gain: float


def _gain_value(params: SystemParams) -> float:
    """Exact gain 1 + 2*kappa*integral M31(s)^2 ds over the pulse.

    M31^2 is a three-term exponential sum, integrated in closed form.
    """
    p = params.in_kappa_units()
    if p.g == 0.0:
        return 1.0
    lam = rate_lambda(p)
    decay = p.kappa + p.gamma / 2
    if lam == 0.0:
        # only reachable with g = 0, handled above; kept for completeness
        return 1.0
    pref = (p.g / lam) ** 2
    integral = (
        _exp_integral(lam - decay, p.tau)
        - 2.0 * _exp_integral(-decay, p.tau)
        + _exp_integral(-lam - decay, p.tau)
    )
    return 1.0 + 2.0 * p.kappa * pref * integral


def _exp_integral(rate: float, upper: float) -> float:
    if rate == 0.0:
        return upper
    return math.expm1(rate * upper) / rate


def amplification_gain(params: SystemParams) -> GainReport:
    """Gain report for a pulse: exact gain, G = g^2/kappa, and exp(2*G*tau)."""
    p = params.in_kappa_units()
    rate_g = p.g**2 / p.kappa
    return GainReport(
        gain=_gain_value(p),
        rate_g=rate_g,
        adiabatic_gain=math.exp(2.0 * rate_g * p.tau),
    )


def _m13_expsum(params: SystemParams) -> ExpSum:
    lam = rate_lambda(params)
    decay = params.kappa + params.gamma / 2
    c = params.g / lam
    return ExpSum([c, -c], [0, 0], [0.5 * (lam - decay), -0.5 * (lam + decay)])


def optimal_output_mode(prop: Propagator) -> TemporalMode:
    """Output-light profile carrying the full mechanics correlations.

    Proportional to M13(s) with continuum normalization
    sqrt(2*kappa/(gain - 1)).  Requires g > 0; with no coupling the output
    holds no mechanical signal and no mode is defined.
    """
    p = prop.params
    if p.g == 0.0:
        raise ValueError("optimal mode undefined for g = 0: output carries no mechanical signal")
    gain = _gain_value(p)
    scale = math.sqrt(2.0 * p.kappa / (gain - 1.0))
    grid = prop.time_grid()
    values = scale * m13_closed_form(p, grid)
    analytic = scale * _m13_expsum(p)
    return TemporalMode(grid=grid, values=values, kind="optimal_out", analytic=analytic)


def optimal_input_mode(prop: Propagator) -> TemporalMode:
    """Input-light profile optimally coupled into the mechanics.

    Equals the optimal output profile reversed in time, f_in(s) = f_out(tau - s),
    because the coupling response is symmetric (M31 = M13).
    """
    out = optimal_output_mode(prop)
    return TemporalMode(
        grid=out.grid,
        values=out.values[::-1],
        kind="optimal_in",
        analytic=out.analytic.reflected(out.tau),
    )


def _adiabatic_mode(params: SystemParams, sign: int, kind: str, grid=None) -> TemporalMode:
    p = params.in_kappa_units()
    if p.g == 0.0:
        raise ValueError("adiabatic mode undefined for g = 0")
    rate_g = p.g**2 / p.kappa
    if sign > 0:
        scale = math.sqrt(2.0 * rate_g / math.expm1(2.0 * rate_g * p.tau))
    else:
        scale = math.sqrt(2.0 * rate_g / -math.expm1(-2.0 * rate_g * p.tau))
    if grid is None:
        grid = np.linspace(0.0, p.tau, default_grid_size(p.tau))
    values = scale * np.exp(sign * rate_g * np.asarray(grid, dtype=float))
    analytic = ExpSum.exponential(scale, sign * rate_g)
    return TemporalMode(grid=grid, values=values, kind=kind, analytic=analytic)


def adiabatic_output_mode(params: SystemParams, grid=None) -> TemporalMode:
    """Wide-cavity approximation of the output mode, proportional to exp(G*s)."""
    return _adiabatic_mode(params, +1, "adiabatic_out", grid)


def adiabatic_input_mode(params: SystemParams, grid=None) -> TemporalMode:
    """Wide-cavity approximation of the input mode, proportional to exp(-G*s)."""
    return _adiabatic_mode(params, -1, "adiabatic_in", grid)


def mode_overlap(f: TemporalMode, h: TemporalMode) -> float:
    """Signed overlap integral of two normalized profiles on a shared grid.

    Profiles on different grids are resampled onto the finer one by linear
    interpolation (with a warning) and renormalized there, so the result
    respects |overlap| <= 1 up to rounding.
    """
    if f.grid.shape == h.grid.shape and np.array_equal(f.grid, h.grid):
        return float(np.trapezoid(f.values * h.values, f.grid))
    warnings.warn(
        "mode grids differ; resampling the coarser profile by linear interpolation",
        stacklevel=2,
    )
    fine, coarse = (f, h) if f.grid.size >= h.grid.size else (h, f)
    resampled = coarse.resampled(fine.grid)
    return float(np.trapezoid(fine.values * resampled.values, fine.grid))


def pulse_duration_for_gain(
    params: SystemParams, target_gain: float, tau_max: float | None = None
) -> float:
    """Pulse duration (units of 1/kappa) at which the gain reaches a target.

    The gain grows monotonically with the pulse duration from 1, so the
    equation has a unique root; it is bracketed by doubling and solved with
    Brent's method.
    """
    if target_gain <= 1.0:
        raise ValueError(f"target gain must exceed 1, got {target_gain}")
    p = params.in_kappa_units()
    if p.g == 0.0:
        raise ValueError("gain stays at 1 for g = 0; no pulse duration reaches the target")

    def objective(tau: float) -> float:
        return _gain_value(p.replace(tau=tau)) - target_gain

    hi = p.tau
    limit = tau_max if tau_max is not None else 1e9
    while objective(hi) < 0.0:
        hi *= 2.0
        if hi > limit:
            raise ValueError(
                f"gain does not reach {target_gain} below tau = {limit} "
                "(coupling too weak or unstable branch decaying)"
            )
    lo = hi / 2.0
    while objective(lo) > 0.0:
        lo /= 2.0
        if lo < 1e-12:
            return lo
    return float(brentq(objective, lo, hi, xtol=1e-12, rtol=1e-14))
