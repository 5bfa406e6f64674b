"""Special functions and exact combinatorics.

Everything here is pure. Quantities that overflow a double (ball volumes in
high dimension, Hamming-ball ratios, factorials) are carried either as exact
Python integers or as :class:`LogValue`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import DomainError

EULER_GAMMA = 0.57721566490153286060651209008240243
_LOG_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class LogValue:
    """A real number stored as ``sign * exp(log_magnitude)``.

    ``sign`` is one of ``-1, 0, 1``; for zero the magnitude is ``-inf``.
    """

    log_magnitude: float
    sign: int = 1

    def __post_init__(self) -> None:
        if self.sign not in (-1, 0, 1):
            raise DomainError(f"sign must be -1, 0 or 1, got {self.sign!r}")
        if self.sign == 0 and self.log_magnitude != -math.inf:
            object.__setattr__(self, "log_magnitude", -math.inf)
        if self.sign != 0 and self.log_magnitude == -math.inf:
            object.__setattr__(self, "sign", 0)

    @classmethod
    def from_float(cls, x: float) -> LogValue:
        if x == 0:
            return cls(-math.inf, 0)
        return cls(math.log(abs(x)), 1 if x > 0 else -1)

    @classmethod
    def from_int(cls, x: int) -> LogValue:
        """Exact integers of any size (math.log accepts big ints)."""
        if x == 0:
            return cls(-math.inf, 0)
        return cls(math.log(abs(x)), 1 if x > 0 else -1)

    @property
    def saturates(self) -> bool:
        """True when the value cannot be represented as a finite double."""
        return self.sign != 0 and self.log_magnitude > _LOG_MAX

    def to_float(self) -> float:
        """Convert to a double, clamping to +-max float on overflow."""
        if self.sign == 0:
            return 0.0
        if self.saturates:
            return self.sign * float(np.finfo(float).max)
        return self.sign * math.exp(self.log_magnitude)

    def __float__(self) -> float:
        return self.to_float()

    def __neg__(self) -> LogValue:
        return LogValue(self.log_magnitude, -self.sign)

    def __mul__(self, other: LogValue | float) -> LogValue:
        other = _as_logvalue(other)
        return LogValue(self.log_magnitude + other.log_magnitude, self.sign * other.sign)

    __rmul__ = __mul__

    def __truediv__(self, other: LogValue | float) -> LogValue:
        other = _as_logvalue(other)
        if other.sign == 0:
            raise ZeroDivisionError("division of LogValue by zero")
        return LogValue(self.log_magnitude - other.log_magnitude, self.sign * other.sign)

    def __pow__(self, exponent: float) -> LogValue:
        if self.sign < 0:
            raise DomainError("real power of a negative LogValue")
        if self.sign == 0:
            if exponent <= 0:
                raise DomainError("non-positive power of zero")
            return self
        return LogValue(self.log_magnitude * exponent, 1)

    def __add__(self, other: LogValue | float) -> LogValue:
        other = _as_logvalue(other)
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        big, small = (self, other) if self.log_magnitude >= other.log_magnitude else (other, self)
        d = small.log_magnitude - big.log_magnitude
        if big.sign == small.sign:
            return LogValue(big.log_magnitude + math.log1p(math.exp(d)), big.sign)
        if d == 0:
            return LogValue(-math.inf, 0)
        return LogValue(big.log_magnitude + math.log1p(-math.exp(d)), big.sign)

    __radd__ = __add__

    def __sub__(self, other: LogValue | float) -> LogValue:
        return self + (-_as_logvalue(other))


def _as_logvalue(x: LogValue | float) -> LogValue:
    return x if isinstance(x, LogValue) else LogValue.from_float(float(x))


def log_gamma(z: float) -> float:
    """Natural log of the Gamma function for ``z > 0``."""
    if not z > 0:
        raise DomainError(f"log_gamma requires z > 0, got {z!r}")
    return math.lgamma(z)


def ball_volume(n: int, p: float = 2.0) -> LogValue:
    """Volume of the unit l_p ball in ``R^n``.

    Uses ``2^n Gamma(1+1/p)^n / Gamma(1+n/p)``, which for ``p = 2`` is
    ``pi^(n/2) / Gamma(1+n/2)``. ``p = inf`` gives the cube ``[-1, 1]^n``.
    """
    if n < 1 or int(n) != n:
        raise DomainError(f"dimension must be a positive integer, got {n!r}")
    if not p > 0:
        raise DomainError(f"p must be positive, got {p!r}")
    n = int(n)
    if p == 2:
        return LogValue(0.5 * n * math.log(math.pi) - math.lgamma(1 + 0.5 * n))
    if math.isinf(p):
        return LogValue(n * math.log(2.0))
    return LogValue(n * (math.log(2.0) + math.lgamma(1 + 1 / p)) - math.lgamma(1 + n / p))


def log_r_eff(n: int) -> float:
    return -ball_volume(n).log_magnitude / n


def r_eff(n: int) -> float:
    """Radius of the Euclidean ball of unit volume in ``R^n``."""
    return math.exp(log_r_eff(n))


def sinc(t):
    """Normalized sinc, ``sin(pi t) / (pi t)`` with ``sinc(0) = 1``."""
    return np.sinc(t) if np.ndim(t) else float(np.sinc(float(t)))


def _check_chi2(dof: int, x) -> np.ndarray:
    if dof < 1:
        raise DomainError(f"degrees of freedom must be >= 1, got {dof!r}")
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("chi-squared argument must be non-negative")
    return arr


def chi2_cdf(dof: int, x):
    """CDF of the chi-squared distribution (regularized lower gamma)."""
    arr = _check_chi2(dof, x)
    out = special.gammainc(0.5 * dof, 0.5 * arr)
    return float(out) if out.ndim == 0 else out


def chi2_sf(dof: int, x):
    """Survival function ``1 - chi2_cdf``, computed without cancellation."""
    arr = _check_chi2(dof, x)
    out = special.gammaincc(0.5 * dof, 0.5 * arr)
    return float(out) if out.ndim == 0 else out


def chi2_logpdf(dof: int, x):
    arr = _check_chi2(dof, x)
    k = 0.5 * dof
    with np.errstate(divide="ignore"):
        out = (k - 1) * np.log(arr) - 0.5 * arr - k * math.log(2.0) - math.lgamma(k)
    if dof == 2:
        out = np.where(arr == 0, -math.log(2.0), out)
    return float(out) if out.ndim == 0 else out


def chi2_quantile(dof: int, q: float, upper: bool = False) -> float:
    """Lower quantile, or upper quantile when ``upper`` (``sf(x) = q``)."""
    fn = special.gammainccinv if upper else special.gammaincinv
    return 2.0 * float(fn(0.5 * dof, q))


@lru_cache(maxsize=256)
def hamming_ball_table(n: int) -> tuple[int, ...]:
    """Exact ``(V_{n,0}, ..., V_{n,n})`` where ``V_{n,r} = sum_{j<=r} C(n, j)``."""
    if n < 0:
        raise DomainError(f"n must be non-negative, got {n!r}")
    out = []
    acc = 0
    c = 1
    for j in range(n + 1):
        acc += c
        out.append(acc)
        c = c * (n - j) // (j + 1)
    return tuple(out)


@lru_cache(maxsize=256)
def log_hamming_ball_table(n: int) -> tuple[float, ...]:
    return tuple(math.log(v) for v in hamming_ball_table(n))


def hamming_ball(n: int, r: int) -> int:
    """Number of words of weight at most ``r`` in ``F_2^n`` (exact)."""
    if not 0 <= r <= n:
        raise DomainError(f"radius must satisfy 0 <= r <= n, got r={r}, n={n}")
    return hamming_ball_table(n)[r]


def gaussian_binomial(n: int, k: int, q: int = 2) -> int:
    """Number of ``k``-dimensional subspaces of ``F_q^n``."""
    if not 0 <= k <= n:
        raise DomainError(f"need 0 <= k <= n, got n={n}, k={k}")
    num = 1
    den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (k - i) - 1
    return num // den


def h2(p: float) -> float:
    """Binary entropy in bits."""
    if not 0 <= p <= 1:
        raise DomainError(f"h2 requires p in [0, 1], got {p!r}")
    if p == 0 or p == 1:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def h2_inv(y: float, tol: float = 1e-14, max_iter: int = 200) -> float:
    """Inverse of :func:`h2` restricted to ``[0, 1/2]``, by bisection."""
    if not 0 <= y <= 1:
        raise DomainError(f"h2_inv requires y in [0, 1], got {y!r}")
    if y == 0:
        return 0.0
    if y == 1:
        return 0.5
    lo, hi = 0.0, 0.5
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if h2(mid) < y:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


def harmonic(m: int) -> float:
    """``H_m = sum_{i=1}^m 1/i`` with exactly rounded summation."""
    if m < 1:
        raise DomainError(f"harmonic number requires m >= 1, got {m!r}")
    return math.fsum(1.0 / i for i in range(1, m + 1))


def schlafli_rogers(n: int) -> LogValue:
    """Rogers-Daniels approximation of the Schlafli function ``f_n(n)``.

    ``sqrt(n+1) / (sqrt(2) e n!) * (2e / (pi n))^(n/2) * (1 + 31/(12n))``;
    the ``O(n^-2)`` remainder is dropped, so small ``n`` values are rough.
    """
    if n < 2:
        raise DomainError(f"schlafli_rogers requires n >= 2, got {n!r}")
    log_val = (
        0.5 * math.log(n + 1)
        - 0.5 * math.log(2.0)
        - 1.0
        - math.lgamma(n + 1)
        + 0.5 * n * math.log(2 * math.e / (math.pi * n))
        + math.log1p(31.0 / (12.0 * n))
    )
    return LogValue(log_val)


def log1pexp(t: float) -> float:
    """``log(1 + e^t)`` without overflow."""
    if t > 0:
        return t + math.log1p(math.exp(-t))
    return math.log1p(math.exp(t))


def expit(t: float) -> float:
    """``1 / (1 + e^-t)`` without overflow."""
    if t >= 0:
        return 1.0 / (1.0 + math.exp(-t))
    e = math.exp(t)
    return e / (1.0 + e)
