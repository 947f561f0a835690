"""Drift matrix of the blue-detuned dynamics and the propagator family exp(A s).

The linearized two-mode-squeezing interaction with cavity decay kappa and
mechanical damping gamma evolves the quadrature vector
u = (X_c, Y_c, X_m, Y_m) through du/dt = A u + noise with the symmetric
drift matrix

    A = [[-kappa,   0,      g,        0      ],
         [  0,    -kappa,   0,       -g      ],
         [  g,      0,    -gamma/2,   0      ],
         [  0,     -g,      0,      -gamma/2 ]].

Because A is symmetric, a single real eigendecomposition A = Q D Q^T gives
M(s) = exp(A s) = Q exp(D s) Q^T cheaply for any number of times s.  The
X and Y sectors decouple, M(s) is symmetric, and M13 = M31 = -M42 carries
the light-mechanics coupling response.
"""

import math

import numpy as np

from .core import SystemParams

__all__ = [
    "drift_matrix",
    "rate_lambda",
    "m13_closed_form",
    "default_grid_size",
    "Propagator",
]


def drift_matrix(params: SystemParams) -> np.ndarray:
    """Symmetric 4x4 drift matrix of the two-mode-squeezing dynamics."""
    kappa, gamma, g = params.kappa, params.gamma, params.g
    return np.array(
        [
            [-kappa, 0.0, g, 0.0],
            [0.0, -kappa, 0.0, -g],
            [g, 0.0, -gamma / 2, 0.0],
            [0.0, -g, 0.0, -gamma / 2],
        ]
    )


def rate_lambda(params: SystemParams) -> float:
    """Splitting rate lambda = sqrt((kappa - gamma/2)^2 + 4 g^2).

    The eigenvalues of the drift matrix are -(kappa + gamma/2)/2 +- lambda/2,
    each twice; the branch -(kappa + gamma/2)/2 + lambda/2 turns positive
    (amplification instability) once g exceeds sqrt(kappa * gamma / 2).
    """
    return math.hypot(params.kappa - params.gamma / 2, 2 * params.g)


def m13_closed_form(params: SystemParams, t) -> np.ndarray:
    """Closed form of the propagator entry M13(t) = M31(t).

    M13(t) = (g / lambda) * [exp(-(t/2)(kappa + gamma/2 - lambda))
                             - exp(-(t/2)(kappa + gamma/2 + lambda))]

    evaluated through 2*sinh(lambda*t/2)/lambda, which stays finite in the
    degenerate limit lambda -> 0 where the bracket reduces to g*t times the
    decaying envelope.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("the protocol runs forward only: t must be >= 0")
    lam = rate_lambda(params)
    envelope = np.exp(-0.5 * t * (params.kappa + params.gamma / 2))
    x = 0.5 * lam * t
    # sinh(x)/x with the x -> 0 limit taken explicitly
    small = np.abs(x) < 1e-6
    sinhc = np.where(small, 1.0 + x * x / 6.0, np.sinh(np.where(small, 1.0, x)) / np.where(small, 1.0, x))
    return params.g * t * envelope * sinhc


def default_grid_size(kappa_tau: float) -> int:
    """Default number of uniform time samples for a pulse of duration kappa*tau.

    Profiles vary on the 1/kappa and 1/lambda scales, so the density grows
    with the pulse length: max(2048, ceil(64 * kappa * tau)).
    """
    return max(2048, math.ceil(64 * kappa_tau))


class Propagator:
    """Samples M(s) = exp(A s) for the two-mode-squeezing drift matrix.

    Parameters are re-expressed in units of kappa on construction, so all
    times handled by this object (``sample`` arguments, ``time_grid``) are
    in units of 1/kappa of the original parameter set.  The instance is
    immutable after construction and safe to share between workers.
    """

    def __init__(self, params: SystemParams, n_grid: int | None = None):
        self.params = params.in_kappa_units()
        self.a = drift_matrix(self.params)
        self.a.flags.writeable = False
        self.rate_lambda = rate_lambda(self.params)
        eigvals, eigvecs = np.linalg.eigh(self.a)
        self._mu = eigvals
        self._q = eigvecs
        if n_grid is None:
            n_grid = default_grid_size(self.params.tau)
        if n_grid < 2:
            raise ValueError(f"n_grid must be at least 2, got {n_grid}")
        self.n_grid = int(n_grid)
        self._grid = np.linspace(0.0, self.params.tau, self.n_grid)
        self._grid.flags.writeable = False
        self._grid_samples = None

    @property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of the drift matrix, ascending."""
        return self._mu.copy()

    @property
    def eigenvectors(self) -> np.ndarray:
        """Orthogonal eigenvector matrix Q with A = Q diag(mu) Q^T."""
        return self._q.copy()

    def sample(self, s) -> np.ndarray:
        """M(s) for scalar or array s >= 0; shape (..., 4, 4)."""
        s = np.asarray(s, dtype=float)
        if np.any(s < 0):
            raise ValueError("the protocol runs forward only: s must be >= 0")
        weights = np.exp(np.multiply.outer(s, self._mu))
        return np.einsum("ip,...p,jp->...ij", self._q, weights, self._q)

    __call__ = sample

    def time_grid(self) -> np.ndarray:
        """Uniform sample times covering [0, tau] (units of 1/kappa)."""
        return self._grid

    def sample_grid(self) -> np.ndarray:
        """M evaluated on ``time_grid``, cached; shape (n_grid, 4, 4)."""
        if self._grid_samples is None:
            samples = self.sample(self._grid)
            samples.flags.writeable = False
            self._grid_samples = samples
        return self._grid_samples
