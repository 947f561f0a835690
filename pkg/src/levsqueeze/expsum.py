"""Exact calculus for finite sums of c * s^n * exp(r*s) on a finite interval.

Every integrand appearing in the covariance assembly for the
two-mode-squeezing drift is such a sum: propagator entries are sums of
exponentials, mode profiles are sums of exponentials, and products or
partial integrals of these stay inside the class (polynomial factors enter
only through degenerate rate combinations).  Keeping the representation
closed under multiplication and integration yields machine-precision
covariance blocks without any quadrature grid.
"""

import math

import numpy as np

__all__ = ["ExpSum", "poly_exp_integral"]

# |rate * T| below this uses the Taylor series of the integral; above it the
# upward recursion in the polynomial degree is well conditioned.
_SERIES_CUTOFF = 1.0
# |z * T| below this treats a rate combination as degenerate and expands the
# inner exponential to second order (relative error < 1e-18).
_DEGENERATE_CUTOFF = 1e-6
_SERIES_TERMS = 26


def poly_exp_integral(power, rate, upper: float) -> np.ndarray:
    """Integral of s^n * exp(r*s) over [0, upper], vectorized over terms.

    Uses the everywhere-convergent series upper^(n+1) * sum_k (r*upper)^k /
    (k! (n+k+1)) for small |r*upper| and the upward recursion
    I_n = (upper^n e^(r*upper) - n I_(n-1)) / r otherwise.
    """
    power = np.atleast_1d(np.asarray(power, dtype=int))
    rate = np.atleast_1d(np.asarray(rate, dtype=float))
    if upper < 0:
        raise ValueError(f"integration bound must be nonnegative, got {upper}")
    out = np.empty(rate.shape, dtype=float)
    x = rate * upper
    series = np.abs(x) < _SERIES_CUTOFF

    if np.any(series):
        n_s = power[series]
        x_s = x[series]
        acc = np.zeros_like(x_s)
        term = np.ones_like(x_s)
        for k in range(_SERIES_TERMS):
            acc += term / (n_s + k + 1)
            term = term * x_s / (k + 1)
        out[series] = acc * upper ** (n_s + 1)

    rec = ~series
    if np.any(rec):
        n_r = power[rec]
        r_r = rate[rec]
        exp_ru = np.exp(r_r * upper)
        val = np.expm1(r_r * upper) / r_r  # I_0
        res = np.where(n_r == 0, val, 0.0)
        for k in range(1, int(n_r.max(initial=0)) + 1):
            val = (upper**k * exp_ru - k * val) / r_r
            res = np.where(n_r == k, val, res)
        out[rec] = res
    return out


class ExpSum:
    """Finite sum of terms coef * s^power * exp(rate * s)."""

    __slots__ = ("coef", "power", "rate")

    def __init__(self, coef, power, rate, compress: bool = True):
        self.coef = np.atleast_1d(np.asarray(coef, dtype=float))
        self.power = np.atleast_1d(np.asarray(power, dtype=int))
        self.rate = np.atleast_1d(np.asarray(rate, dtype=float))
        if not (self.coef.shape == self.power.shape == self.rate.shape):
            raise ValueError("coef, power and rate must have matching shapes")
        if compress:
            self._compress()

    @classmethod
    def zero(cls) -> "ExpSum":
        return cls([], [], [], compress=False)

    @classmethod
    def exponential(cls, coef: float, rate: float) -> "ExpSum":
        return cls([coef], [0], [rate], compress=False)

    @classmethod
    def constant(cls, coef: float) -> "ExpSum":
        return cls([coef], [0], [0.0], compress=False)

    def _compress(self):
        if self.coef.size == 0:
            return
        merged: dict[tuple[int, float], float] = {}
        for c, n, r in zip(self.coef, self.power, self.rate):
            key = (int(n), float(r))
            merged[key] = merged.get(key, 0.0) + c
        items = [(c, n, r) for (n, r), c in merged.items() if c != 0.0]
        if not items:
            self.coef = np.empty(0)
            self.power = np.empty(0, dtype=int)
            self.rate = np.empty(0)
            return
        self.coef = np.array([c for c, _, _ in items])
        self.power = np.array([n for _, n, _ in items], dtype=int)
        self.rate = np.array([r for _, _, r in items])

    @property
    def n_terms(self) -> int:
        return self.coef.size

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        values = np.zeros(s.shape)
        for c, n, r in zip(self.coef, self.power, self.rate):
            values += c * s**n * np.exp(r * s)
        return values

    def __add__(self, other: "ExpSum") -> "ExpSum":
        return ExpSum(
            np.concatenate([self.coef, other.coef]),
            np.concatenate([self.power, other.power]),
            np.concatenate([self.rate, other.rate]),
        )

    def __neg__(self) -> "ExpSum":
        return ExpSum(-self.coef, self.power, self.rate, compress=False)

    def __sub__(self, other: "ExpSum") -> "ExpSum":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, ExpSum):
            if self.n_terms == 0 or other.n_terms == 0:
                return ExpSum.zero()
            coef = np.multiply.outer(self.coef, other.coef).ravel()
            power = np.add.outer(self.power, other.power).ravel()
            rate = np.add.outer(self.rate, other.rate).ravel()
            return ExpSum(coef, power, rate)
        return ExpSum(self.coef * float(other), self.power, self.rate, compress=False)

    __rmul__ = __mul__

    def integral(self, upper: float) -> float:
        """Definite integral over [0, upper]."""
        if self.n_terms == 0:
            return 0.0
        return float(np.sum(self.coef * poly_exp_integral(self.power, self.rate, upper)))

    def reflected(self, upper: float) -> "ExpSum":
        """The function s -> f(upper - s) as an ExpSum on [0, upper]."""
        coefs, powers, rates = [], [], []
        for c, n, r in zip(self.coef, self.power, self.rate):
            base = c * math.exp(r * upper)
            for j in range(n + 1):
                coefs.append(base * math.comb(n, j) * upper ** (n - j) * (-1.0) ** j)
                powers.append(j)
                rates.append(-r)
        return ExpSum(coefs, powers, rates)

    def tail_exp_integral(self, mu: float, upper: float) -> "ExpSum":
        """The function s -> integral_s^upper f(s') exp(mu*(s'-s)) ds'.

        For a term c s'^n e^(nu s') the inner rate is z = nu + mu.  The
        generic antiderivative splits into a pure exp(-mu*s) piece and a
        polynomial times exp(nu*s); when |z|*upper is tiny the exponential
        inside the integral is expanded to second order instead, which
        avoids the 1/z blow-up of the generic form.
        """
        coefs: list[float] = []
        powers: list[int] = []
        rates: list[float] = []
        for c, n, nu in zip(self.coef, self.power, self.rate):
            n = int(n)
            z = nu + mu
            if abs(z) * max(upper, 1.0) < _DEGENERATE_CUTOFF:
                # integral_s^upper s'^n e^(z s') ds' ~ sum_k z^k/k! (upper^(n+k+1) - s^(n+k+1))/(n+k+1)
                zk = 1.0
                for k in range(3):
                    denom = math.factorial(k) * (n + k + 1)
                    coefs.append(c * zk * upper ** (n + k + 1) / denom)
                    powers.append(0)
                    rates.append(-mu)
                    coefs.append(-c * zk / denom)
                    powers.append(n + k + 1)
                    rates.append(-mu)
                    zk *= z
            else:
                j_upper = float(
                    poly_exp_integral(np.array([n]), np.array([z]), upper)[0]
                )
                # A_n(s, z) = sum_k (-1)^k n!/(n-k)! s^(n-k) / z^(k+1) is the
                # antiderivative factor: integral s'^n e^(z s') = A_n(s) e^(z s) - A_n(0)
                a0 = (-1.0) ** n * math.factorial(n) / z ** (n + 1)
                coefs.append(c * (j_upper + a0))
                powers.append(0)
                rates.append(-mu)
                for k in range(n + 1):
                    a_k = (-1.0) ** k * math.factorial(n) / math.factorial(n - k) / z ** (k + 1)
                    coefs.append(-c * a_k)
                    powers.append(n - k)
                    rates.append(nu)
        return ExpSum(coefs, powers, rates)

    def __repr__(self) -> str:
        parts = [f"{c:g}*s^{n}*e^({r:g}s)" for c, n, r in zip(self.coef, self.power, self.rate)]
        return "ExpSum(" + " + ".join(parts or ["0"]) + ")"
