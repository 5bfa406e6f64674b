"""Closed-form bounds for binary linear codes of blocklength n and dimension k.

Every bound is built from the ratios ``x_r = 2^{k-n} V_{n,r}`` which span
roughly ``2^{-n}`` to ``2^{k}``. Two evaluation paths exist:

* the default float path works with ``ln x_r`` and never forms ``x_r``;
* the ``*_exact`` functions use :class:`fractions.Fraction` and are meant
  for cross-checks at small ``n``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from . import specfun
from .errors import DomainError, ValidityError

LN2 = math.log(2.0)
P_FIGURE = (0.07, 0.1)


def _check_nk(n: int, k: int) -> None:
    if int(n) != n or int(k) != k or n < 1 or not 0 <= k <= n:
        raise DomainError(f"need integers 0 <= k <= n with n >= 1, got n={n!r}, k={k!r}")


def _check_p(p) -> None:
    if not 0 < p < 0.5:
        raise DomainError(f"crossover probability must lie in (0, 1/2), got {p!r}")


def r_eff_code(n: int, k: int) -> int:
    """Smallest ``r`` with ``2^{n-k} <= V_{n,r}``."""
    _check_nk(n, k)
    target = 1 << (n - k)
    for r, v in enumerate(specfun.hamming_ball_table(n)):
        if v >= target:
            return r
    raise AssertionError("unreachable: V_{n,n} = 2^n")


def x_exact(n: int, k: int, r: int) -> Fraction:
    return Fraction(specfun.hamming_ball(n, r), 1 << (n - k))


def log_x_table(n: int, k: int) -> list[float]:
    """``ln x_r`` for ``r = 0..n``."""
    _check_nk(n, k)
    off = (k - n) * LN2
    return [off + lv for lv in specfun.log_hamming_ball_table(n)]


def q_quasi_ball_exact(n: int, k: int, r: int) -> Fraction:
    """CDF of the weight of a uniform point of the quasi-ball, ``min(x_r, 1)``."""
    _check_nk(n, k)
    if not 0 <= r <= n:
        raise DomainError(f"need 0 <= r <= n, got r={r}")
    return min(x_exact(n, k, r), Fraction(1))


def q_quasi_ball(n: int, k: int, r: int) -> float:
    return float(q_quasi_ball_exact(n, k, r))


def d_star_exact(n: int, k: int) -> Fraction:
    """Distortion of the quasi-ball: a lower bound on the distortion of any code."""
    _check_nk(n, k)
    re = r_eff_code(n, k)
    return sum((1 - x_exact(n, k, r) for r in range(re)), Fraction(0)) / n


def d_star(n: int, k: int) -> float:
    _check_nk(n, k)
    re = r_eff_code(n, k)
    lx = log_x_table(n, k)
    return math.fsum(-math.expm1(lx[r]) for r in range(re)) / n


def dc_upper_exact(n: int, k: int) -> Fraction:
    """Upper bound on the average distortion of a uniformly random code."""
    _check_nk(n, k)
    return sum((1 / (1 + x_exact(n, k, r)) for r in range(n)), Fraction(0)) / n


def dc_upper(n: int, k: int) -> float:
    lx = log_x_table(n, k)
    return math.fsum(specfun.expit(-lx[r]) for r in range(n)) / n


def delta_gap_exact(n: int, k: int) -> Fraction:
    """Upper bound on ``n (E[D_C] - D*)``."""
    _check_nk(n, k)
    re = r_eff_code(n, k)
    total = Fraction(0)
    for r in range(n):
        x = x_exact(n, k, r)
        total += x * x / (1 + x) if r < re else 1 / (1 + x)
    return total


def delta_gap(n: int, k: int) -> float:
    re = r_eff_code(n, k)
    lx = log_x_table(n, k)
    terms = [
        math.exp(2 * lx[r] - specfun.log1pexp(lx[r])) if r < re else specfun.expit(-lx[r])
        for r in range(n)
    ]
    return math.fsum(terms)


def delta_gap_proof_bound(n: int, alpha: float) -> float:
    """Explicit constant ``2(1-kappa)/(1-2kappa) + 1`` from the constant-gap argument.

    ``kappa = (m+1)/n`` with ``m = ceil((n/2)(h2^{-1}(1-alpha) + 1/2))``; the
    argument needs ``kappa < 1/2``.
    """
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    m = math.ceil(n / 2 * (specfun.h2_inv(1 - alpha) + 0.5))
    kappa = (m + 1) / n
    if not kappa < 0.5:
        raise ValidityError(f"proof bound needs (m+1)/n < 1/2; got {kappa:.4f} at n={n}")
    return 2 * (1 - kappa) / (1 - 2 * kappa) + 1


def _log_pmf(n: int, p: float) -> list[float]:
    """``ln C(n,w) + w ln p + (n-w) ln(1-p)`` for ``w = 0..n``."""
    lp, lq = math.log(p), math.log1p(-p)
    lg = math.lgamma(n + 1)
    return [lg - math.lgamma(w + 1) - math.lgamma(n - w + 1) + w * lp + (n - w) * lq for w in range(n + 1)]


def _log_phi(n: int, p: float, w: int) -> float:
    return w * math.log(p) + (n - w) * math.log1p(-p)


def pe_sp_bsc(n: int, k: int, p: float) -> float:
    """Error probability of the quasi-ball: a lower bound for every code.

    Computed as the mass outside the quasi-ball, a sum of positive terms.
    """
    _check_nk(n, k)
    _check_p(p)
    re = r_eff_code(n, k)
    lpmf = _log_pmf(n, p)
    terms = [math.exp(lpmf[w]) for w in range(re + 1, n + 1)]
    spill = specfun.hamming_ball(n, re) - (1 << (n - k))
    if spill:
        terms.append(math.exp(math.log(spill) + _log_phi(n, p, re)))
    return min(1.0, math.fsum(sorted(terms)))


def quasi_ball_mass_exact(n: int, k: int, p: Fraction) -> Fraction:
    """``mu_p`` of the quasi-ball, exactly."""
    _check_nk(n, k)
    _check_p(p)
    p = Fraction(p)
    q = 1 - p
    re = r_eff_code(n, k)
    below = specfun.hamming_ball(n, re - 1) if re > 0 else 0
    total = sum((math.comb(n, r) * p**r * q ** (n - r) for r in range(re)), Fraction(0))
    return total + ((1 << (n - k)) - below) * p**re * q ** (n - re)


def pe_sp_bsc_exact(n: int, k: int, p: Fraction) -> Fraction:
    return 1 - quasi_ball_mass_exact(n, k, p)


def pe_new_bsc_excess(n: int, k: int, p: float) -> float:
    """The additive term ``(1-2p)/(1-p) E[(V_{n,W}/C(n,W)) min(x_W, 1/x_W)/(1+x_W)]``."""
    _check_nk(n, k)
    _check_p(p)
    lx = log_x_table(n, k)
    lv = specfun.log_hamming_ball_table(n)
    terms = [
        math.exp(_log_phi(n, p, w) + lv[w] - abs(lx[w]) - specfun.log1pexp(lx[w]))
        for w in range(n + 1)
    ]
    return (1 - 2 * p) / (1 - p) * math.fsum(sorted(terms))


def pe_new_bsc(n: int, k: int, p: float, clamp: bool = True) -> float:
    """Upper bound on the average error probability of a random linear code."""
    v = pe_sp_bsc(n, k, p) + pe_new_bsc_excess(n, k, p)
    return min(1.0, v) if clamp else v


def pe_new_bsc_excess_exact(n: int, k: int, p: Fraction) -> Fraction:
    _check_nk(n, k)
    _check_p(p)
    p = Fraction(p)
    q = 1 - p
    total = Fraction(0)
    for w in range(n + 1):
        x = x_exact(n, k, w)
        total += p**w * q ** (n - w) * specfun.hamming_ball(n, w) * min(x, 1 / x) / (1 + x)
    return (1 - 2 * p) / q * total


def pe_new_bsc_exact(n: int, k: int, p: Fraction) -> Fraction:
    return pe_sp_bsc_exact(n, k, p) + pe_new_bsc_excess_exact(n, k, p)


def rcu(n: int, k: int, p: float) -> float:
    """Random-coding union bound ``E[min(1, x_W)]``, ``W ~ Binomial(n, p)``."""
    _check_nk(n, k)
    _check_p(p)
    lx = log_x_table(n, k)
    lpmf = _log_pmf(n, p)
    return min(1.0, math.fsum(sorted(math.exp(lpmf[w] + min(lx[w], 0.0)) for w in range(n + 1))))


def rcu_exact(n: int, k: int, p: Fraction) -> Fraction:
    _check_nk(n, k)
    _check_p(p)
    p = Fraction(p)
    return sum(
        (math.comb(n, w) * p**w * (1 - p) ** (n - w) * min(Fraction(1), x_exact(n, k, w)) for w in range(n + 1)),
        Fraction(0),
    )


def bsc_measure_from_cdf(n: int, size: int, q_cdf: Sequence[Fraction], p: Fraction) -> Fraction:
    """``mu_p(K)`` from the weight CDF ``Q_K(0..n)`` of a set of ``size`` words.

    ``|K| (p/(1-p) p^n + (1-2p)/(1-p) E[Q_K(|Z|)/C(n,|Z|)])`` with
    ``|Z| ~ Binomial(n, p)``.
    """
    if len(q_cdf) != n + 1:
        raise DomainError(f"need n+1 = {n + 1} CDF values, got {len(q_cdf)}")
    p = Fraction(p)
    q = 1 - p
    expect = sum((p**w * q ** (n - w) * Fraction(q_cdf[w]) for w in range(n + 1)), Fraction(0))
    return size * (p / q * p**n + (1 - 2 * p) / q * expect)


def d_rate(R: float) -> float:
    """Binary Hamming rate-distortion inverse ``D(R) = h2^{-1}(1 - R)``."""
    if not 0 <= R <= 1:
        raise DomainError(f"rate must lie in [0, 1], got {R!r}")
    return specfun.h2_inv(1 - R)


def d_n_bracket(n: int, R: float) -> tuple[float, float]:
    """``(d_star, dc_upper)`` at ``k = nR``, bracketing the optimal distortion."""
    k = n * R
    if abs(k - round(k)) > 1e-9:
        raise DomainError(f"n*R must be an integer, got n={n}, R={R}")
    k = int(round(k))
    return d_star(n, k), dc_upper(n, k)
