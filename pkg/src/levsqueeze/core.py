"""Shared conventions, parameter containers and Gaussian-state primitives.

Conventions used throughout the package:

* Quadratures are X = a + a^dag and Y = (a - a^dag)/i, so [X, Y] = 2i and
  the vacuum variance equals 1.
* Quadrature vectors are ordered (X_c, Y_c, X_m, Y_m) for the intracavity
  dynamics and (X_out, Y_out, X_m, Y_m) for the filtered joint state.
* All rates are amplitude rates; any consistent unit works because every
  observable depends only on the dimensionless combinations
  (g/kappa, gamma/kappa, kappa*tau, n0, n_th, eta, theta).
"""

import dataclasses
import json

import numpy as np

__all__ = [
    "SystemParams",
    "NoiseSpec",
    "JointCM",
    "PhysicalityReport",
    "symplectic_form",
    "symplectic_eigenvalues",
    "physicality_check",
]

#: Symplectic form of a single mode in the (X, Y) ordering with [X, Y] = 2i.
OMEGA_1 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form for ``n_modes`` modes."""
    out = np.zeros((2 * n_modes, 2 * n_modes))
    for k in range(n_modes):
        out[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = OMEGA_1
    return out


@dataclasses.dataclass(frozen=True)
class SystemParams:
    """Physical rates and occupations defining one pulsed protocol run.

    Attributes
    ----------
    kappa : float
        Optical amplitude decay rate (kappa = 1 makes everything
        dimensionless).
    gamma : float
        Mechanical viscous damping rate, same units as ``kappa``.
    g : float
        Linearized optomechanical coupling rate, same units as ``kappa``.
    tau : float
        Pulse duration, in inverse-rate units.
    n0 : float
        Initial occupation of the mechanical mode.
    n_th : float
        Occupation of the mechanical bath.
    eta : float
        Detection-chain transmittance, 0 <= eta <= 1.
    theta : float
        Homodyne quadrature angle in radians.
    """

    kappa: float
    gamma: float
    g: float
    tau: float
    n0: float = 0.0
    n_th: float = 0.0
    eta: float = 1.0
    theta: float = 0.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")
        if self.g < 0:
            raise ValueError(f"g must be nonnegative, got {self.g}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.n0 < 0 or self.n_th < 0:
            raise ValueError(
                f"occupations must be nonnegative, got n0={self.n0}, n_th={self.n_th}"
            )
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")

    def in_kappa_units(self) -> "SystemParams":
        """Equivalent parameter set with all rates expressed in units of kappa.

        Rates divide by kappa and the pulse duration multiplies by it, which
        leaves every dimensionless output of the pipeline unchanged.
        """
        if self.kappa == 1.0:
            return self
        return dataclasses.replace(
            self,
            kappa=1.0,
            gamma=self.gamma / self.kappa,
            g=self.g / self.kappa,
            tau=self.tau * self.kappa,
        )

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)


@dataclasses.dataclass(frozen=True)
class NoiseSpec:
    """Initial-state covariance and input-noise covariance density.

    ``sigma0`` covers (X_c, Y_c, X_m, Y_m) at t = 0: optical vacuum plus a
    thermal mechanical state of occupation n0.  ``sigma_in`` is the white
    input-noise density: optical vacuum plus a thermal Langevin force of
    occupation n_th.
    """

    sigma0: np.ndarray
    sigma_in: np.ndarray

    @classmethod
    def from_params(cls, params: SystemParams) -> "NoiseSpec":
        sigma0 = np.diag([1.0, 1.0, 2 * params.n0 + 1, 2 * params.n0 + 1])
        sigma_in = np.diag([1.0, 1.0, 2 * params.n_th + 1, 2 * params.n_th + 1])
        return cls(sigma0=sigma0, sigma_in=sigma_in)


def _frozen_symmetric(block: np.ndarray, name: str) -> np.ndarray:
    block = np.asarray(block, dtype=float)
    if block.shape != (2, 2):
        raise ValueError(f"{name} must be 2x2, got shape {block.shape}")
    block = 0.5 * (block + block.T)
    block.flags.writeable = False
    return block


@dataclasses.dataclass(frozen=True)
class JointCM:
    """4x4 covariance matrix of (filtered output mode, mechanics) in blocks.

    ``v_out`` and ``v_m`` are the 2x2 self-covariances of the filtered
    optical mode and the mechanical mode; ``v_c`` holds the cross
    covariances with optical row index and mechanical column index.  The
    diagonal blocks are symmetrized on construction to bound floating-point
    drift before any eigen-solve.
    """

    v_out: np.ndarray
    v_c: np.ndarray
    v_m: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v_out", _frozen_symmetric(self.v_out, "v_out"))
        object.__setattr__(self, "v_m", _frozen_symmetric(self.v_m, "v_m"))
        v_c = np.asarray(self.v_c, dtype=float)
        if v_c.shape != (2, 2):
            raise ValueError(f"v_c must be 2x2, got shape {v_c.shape}")
        v_c = v_c.copy()
        v_c.flags.writeable = False
        object.__setattr__(self, "v_c", v_c)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "JointCM":
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape != (4, 4):
            raise ValueError(f"expected a 4x4 matrix, got shape {matrix.shape}")
        return cls(v_out=matrix[:2, :2], v_c=matrix[:2, 2:], v_m=matrix[2:, 2:])

    def matrix(self) -> np.ndarray:
        """Assembled symmetric 4x4 covariance matrix."""
        out = np.block([[self.v_out, self.v_c], [self.v_c.T, self.v_m]])
        return 0.5 * (out + out.T)

    def symplectic_eigenvalues(self) -> np.ndarray:
        return symplectic_eigenvalues(self.matrix())

    def to_dict(self) -> dict:
        return {
            "v_out": self.v_out.tolist(),
            "v_c": self.v_c.tolist(),
            "v_m": self.v_m.tolist(),
            "symplectic_eigenvalues": self.symplectic_eigenvalues().tolist(),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def symplectic_eigenvalues(matrix: np.ndarray) -> np.ndarray:
    """Symplectic spectrum of a covariance matrix, one value per mode.

    The eigenvalues of i*Omega*V come in pairs +-nu; the moduli are
    returned in ascending order.  Physical states have every nu >= 1 in
    the vacuum-variance-1 normalization.
    """
    matrix = np.asarray(matrix, dtype=float)
    n = matrix.shape[0]
    if matrix.shape != (n, n) or n % 2:
        raise ValueError(f"covariance matrix must be square of even size, got {matrix.shape}")
    omega = symplectic_form(n // 2)
    ev = np.linalg.eigvals(1j * omega @ matrix)
    return np.sort(np.abs(ev))[::2]


@dataclasses.dataclass(frozen=True)
class PhysicalityReport:
    """Outcome of a physicality check on a covariance matrix."""

    ok: bool
    min_symplectic_eigenvalue: float
    tolerance: float

    def __bool__(self) -> bool:
        return self.ok


def physicality_check(cm, tol: float = 1e-9, sym_tol: float = 1e-12) -> PhysicalityReport:
    """Check the uncertainty relation V + i*Omega >= 0 for a covariance matrix.

    Accepts a :class:`JointCM` or a raw square matrix.  A matrix that is
    asymmetric beyond ``sym_tol`` (relative to its largest entry) is
    rejected outright because the symplectic spectrum of such input is
    meaningless.

    Returns
    -------
    PhysicalityReport
        Truthy iff the smallest symplectic eigenvalue is >= 1 - tol.
    """
    matrix = cm.matrix() if isinstance(cm, JointCM) else np.asarray(cm, dtype=float)
    scale = max(1.0, float(np.max(np.abs(matrix))))
    asymmetry = float(np.max(np.abs(matrix - matrix.T)))
    if asymmetry > sym_tol * scale:
        raise ValueError(
            f"covariance matrix is not symmetric: max |V - V^T| = {asymmetry:.3e} "
            f"(allowed {sym_tol * scale:.3e})"
        )
    nu_min = float(symplectic_eigenvalues(matrix)[0])
    return PhysicalityReport(ok=nu_min >= 1.0 - tol, min_symplectic_eigenvalue=nu_min, tolerance=tol)
