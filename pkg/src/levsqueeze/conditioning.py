"""Homodyne conditioning of the mechanics on the filtered optical mode.

Measuring the quadrature X_theta = X cos(theta) + Y sin(theta) of the
filtered mode projects the mechanics onto a Gaussian state whose
covariance matrix follows from a rank-one Schur-complement update: in the
optical basis rotated by theta,

    v_m' = v_m - (1 / v_out(theta)_11) * v_c(theta)^T P v_c(theta),
    P = diag(1, 0).

The equivalent route through the measurement covariance of an infinitely
squeezed detector state, where the block inverse degenerates into a
pseudoinverse, is provided for cross-checking; both are exact and agree to
rounding.
"""

import dataclasses
import math

import numpy as np

from .core import JointCM

__all__ = [
    "ConditionalResult",
    "condition_homodyne",
    "condition_homodyne_pseudoinverse",
    "squeezing_db",
    "phase_scan",
]

#: Smallest measured-quadrature variance treated as a valid measurement.
DEGENERATE_VARIANCE = 1e-12


@dataclasses.dataclass(frozen=True)
class ConditionalResult:
    """Conditional mechanical state after the homodyne measurement.

    ``sigma_cond`` is the smaller eigenvalue of the conditional covariance
    matrix in vacuum units (vacuum = 1) and ``s_cond_db`` the squeezing
    below vacuum it represents, clamped at zero.  ``principal_angle`` is
    the phase-space orientation of the squeezed eigenvector.
    """

    v_cond: np.ndarray
    sigma_cond: float
    s_cond_db: float
    theta: float
    principal_angle: float

    def __post_init__(self):
        v = np.asarray(self.v_cond, dtype=float)
        v = 0.5 * (v + v.T)
        v.flags.writeable = False
        object.__setattr__(self, "v_cond", v)


def _rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]])


def _eig2_symmetric(matrix: np.ndarray) -> tuple[float, float, float]:
    """Eigenvalues (ascending) and the angle of the low eigenvector of a
    symmetric 2x2 matrix, in closed form."""
    a, b, c = matrix[0, 0], matrix[0, 1], matrix[1, 1]
    mean = 0.5 * (a + c)
    half_gap = math.hypot(0.5 * (a - c), b)
    low, high = mean - half_gap, mean + half_gap
    if half_gap == 0.0:
        angle = 0.0
    elif b == 0.0:
        angle = 0.0 if a <= c else 0.5 * math.pi
    else:
        angle = math.atan2(low - a, b)
    # fold into [-pi/2, pi/2)
    angle = (angle + 0.5 * math.pi) % math.pi - 0.5 * math.pi
    return low, high, angle


def condition_homodyne(cm: JointCM, theta: float = 0.0) -> ConditionalResult:
    """Conditional mechanical covariance after measuring X_theta of the mode.

    Raises ``ValueError`` when the measured quadrature variance is at or
    below the degeneracy threshold, which would make the update singular.
    """
    rot = _rotation(theta)
    v_out = rot @ cm.v_out @ rot.T
    v_c = rot @ cm.v_c
    measured_var = float(v_out[0, 0])
    if measured_var <= DEGENERATE_VARIANCE:
        raise ValueError(
            f"degenerate homodyne measurement: variance of X_theta is {measured_var:.3e} "
            f"<= {DEGENERATE_VARIANCE:g} at theta = {theta}"
        )
    correlation = v_c.T @ np.array([1.0, 0.0])
    v_cond = cm.v_m - np.outer(correlation, correlation) / measured_var
    v_cond = 0.5 * (v_cond + v_cond.T)
    sigma_cond, _, angle = _eig2_symmetric(v_cond)
    return ConditionalResult(
        v_cond=v_cond,
        sigma_cond=sigma_cond,
        s_cond_db=squeezing_db(sigma_cond),
        theta=theta,
        principal_angle=angle,
    )


def condition_homodyne_pseudoinverse(cm: JointCM, theta: float = 0.0) -> np.ndarray:
    """Conditional covariance via the measurement-state pseudoinverse route.

    The detector projects the mode on an infinitely squeezed state; the
    limit of (v_out + D_theta)^(-1) is the rank-one pseudoinverse
    w w^T / (w^T v_out w) along the measured direction w = (cos, sin).
    Returns the conditional 2x2 mechanical covariance.
    """
    w = np.array([math.cos(theta), math.sin(theta)])
    measured_var = float(w @ cm.v_out @ w)
    if measured_var <= DEGENERATE_VARIANCE:
        raise ValueError(
            f"degenerate homodyne measurement: variance of X_theta is {measured_var:.3e}"
        )
    pseudo = np.outer(w, w) / measured_var
    v_cond = cm.v_m - cm.v_c.T @ pseudo @ cm.v_c
    return 0.5 * (v_cond + v_cond.T)


def squeezing_db(sigma_cond: float) -> float:
    """Squeezing below vacuum in dB: max(0, -20 log10(sigma_cond)).

    ``sigma_cond`` is a variance in vacuum units; values at or above 1 give
    0 dB.  The factor 20 reports the conventional decibel measure used for
    this quantity throughout the package.
    """
    if not sigma_cond > 0:
        raise ValueError(f"conditional variance must be positive, got {sigma_cond}")
    return max(0.0, -20.0 * math.log10(sigma_cond))


def phase_scan(cm: JointCM, thetas) -> list[ConditionalResult]:
    """Condition on a sequence of quadrature angles.

    For covariance matrices produced by the two-mode-squeezing dynamics the
    eigenvalue pair of the conditional state is the same for every angle;
    only the principal axes rotate.
    """
    return [condition_homodyne(cm, float(theta)) for theta in thetas]
