"""Closed-form and quadrature bounds for unit-covolume lattices.

Radii are in the same units as ``r_eff(n)``, the radius of the unit-volume
ball. Most CDF bounds depend on ``r`` only through ``x = (r / r_eff)^n``,
which is handled as ``log x`` so that large ``n`` never overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from . import specfun
from .errors import DomainError, NumericError, ValidityError
from .results import CdfCurve

DEFAULT_RTOL = 1e-9
# Fraction of chi-squared mass left outside each end of the quadrature range.
_TAIL_MASS = 1e-13
SIGMA2_FIGURE = (0.95 / (2 * math.pi * math.e), 0.98 / (2 * math.pi * math.e))


@dataclass(frozen=True)
class EtaConst:
    """``eta = (n/8) ln(4/3)`` and the derived covering-bound thresholds."""

    n: int
    eta: float

    @classmethod
    def for_dim(cls, n: int) -> EtaConst:
        _check_dim(n)
        return cls(n, n / 8.0 * math.log(4.0 / 3.0))

    @property
    def far_threshold(self) -> float:
        """``4 n^2 eta``: beyond this ``x`` the covering bound equals 1."""
        return 4.0 * self.n**2 * self.eta


@dataclass(frozen=True)
class AwgnParams:
    n: int
    sigma2: float

    def __post_init__(self) -> None:
        _check_dim(self.n)
        if not (self.sigma2 > 0 and math.isfinite(self.sigma2)):
            raise DomainError(f"sigma2 must be positive and finite, got {self.sigma2!r}")


def _check_dim(n: int) -> None:
    if int(n) != n or n < 1:
        raise DomainError(f"dimension must be a positive integer, got {n!r}")


def _scalar_or_array(out: np.ndarray, like) -> float | np.ndarray:
    return float(out) if np.ndim(like) == 0 else out


def log_x(n: int, r) -> float | np.ndarray:
    """``n * ln(r / r_eff(n))``; ``-inf`` at ``r = 0``."""
    _check_dim(n)
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("radius must be non-negative")
    with np.errstate(divide="ignore"):
        out = n * (np.log(arr) - specfun.log_r_eff(n))
    return _scalar_or_array(out, r)


def radius_for_x(n: int, x: float) -> float:
    """Inverse of :func:`log_x`: the radius at which ``(r/r_eff)^n = x``."""
    if x < 0:
        raise DomainError("x must be non-negative")
    return 0.0 if x == 0 else specfun.r_eff(n) * math.exp(math.log(x) / n)


def _clip(v: np.ndarray, clamp: bool) -> np.ndarray:
    return np.clip(v, 0.0, 1.0) if clamp else v


def g_ball(n: int, r):
    """CDF of the norm of a uniform point in the unit-volume ball."""
    lx = np.asarray(log_x(n, r))
    out = np.exp(np.minimum(lx, 0.0))
    return _scalar_or_array(out, r)


def g_jensen(n: int, r):
    """Lower bound ``x / (1 + x)`` on the average Voronoi spherical CDF."""
    lx = np.asarray(log_x(n, r))
    out = np.exp(-np.logaddexp(0.0, -lx))
    return _scalar_or_array(out, r)


def g_covering(n: int, r, clamp: bool = True):
    """Three-piece lower bound for lattices conditioned on a good covering.

    Stated for ``n >= 13`` only.
    """
    if n < 13:
        raise ValidityError(f"covering bound is asserted only for n >= 13, got n={n}")
    c = EtaConst.for_dim(n)
    lx = np.asarray(log_x(n, r))
    x = np.exp(np.minimum(lx, 700.0))
    e_half = math.exp(-c.eta / 2)
    near = -np.expm1(-x) - 23.0 * e_half
    middle = 1.0 - 24.0 * e_half
    out = np.where(
        lx < math.log(c.eta / 2),
        near,
        np.where(lx < math.log(c.far_threshold), middle, 1.0),
    )
    return _scalar_or_array(_clip(out, clamp), r)


def g_rogers_lower(n: int, r, clamp: bool = True):
    """``1 - e^{-x} - 7 e^{-eta}``, valid while ``x <= eta``."""
    c = EtaConst.for_dim(n)
    lx = np.asarray(log_x(n, r))
    if np.any(lx > math.log(c.eta)):
        raise ValidityError(f"Rogers-type bound requires (r/r_eff)^n <= eta = {c.eta:.6g}")
    out = -np.expm1(-np.exp(lx)) - 7.0 * math.exp(-c.eta)
    return _scalar_or_array(_clip(out, clamp), r)


def _log_vol_pow(n: int, p: float = 2.0) -> float:
    """``ln V_{p,n}^{p/n}``."""
    return specfun.ball_volume(n, p).log_magnitude * p / n


def nsm_ball(n: int) -> float:
    """``G*_n``, the NSM of the unit-volume ball: a lower bound for every lattice."""
    _check_dim(n)
    return 1.0 / ((n + 2) * math.exp(_log_vol_pow(n)))


def npm_ball(n: int, p: float) -> float:
    """``G*_{n,p} = 1 / ((n+p) V_{p,n}^{p/n})``."""
    _check_dim(n)
    if not p > 0:
        raise DomainError(f"p must be positive, got {p!r}")
    return 1.0 / ((n + p) * math.exp(_log_vol_pow(n, p)))


def npm_upper(n: int, p: float) -> float:
    """Upper bound on the average normalized p-th moment of a random lattice.

    The defining integral diverges unless ``n > p``.
    """
    _check_dim(n)
    if not p > 0:
        raise DomainError(f"p must be positive, got {p!r}")
    if not n > p:
        raise ValidityError(f"p-th moment bound diverges unless n > p (n={n}, p={p})")
    return 1.0 / (n * math.exp(_log_vol_pow(n, p)) * specfun.sinc(p / n))


def nsm_upper(n: int) -> float:
    """Upper bound on the average NSM of a random lattice (divergent for n <= 2)."""
    _check_dim(n)
    if n <= 2:
        raise ValidityError(f"NSM bound integral is divergent for n <= 2, got n={n}")
    return npm_upper(n, 2)


def nsm_ratio_bound(n: int) -> float:
    """``nsm_upper(n) / nsm_ball(n) = ((n+2)/n) / sinc(2/n)`` in closed form."""
    if n <= 2:
        raise ValidityError(f"NSM bound integral is divergent for n <= 2, got n={n}")
    return (n + 2) / n / specfun.sinc(2.0 / n)


def nsm_tail(n: int, kappa: float) -> float:
    """Markov bound on ``Pr(G_L > (1 + kappa) G*_n)``, for ``n >= 8``."""
    if n < 8:
        raise ValidityError(f"NSM tail bound requires n >= 8, got n={n}")
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa!r}")
    return min(1.0, 4.0 / (kappa * n))


def npm_tail(n: int, p: float, kappa: float) -> float:
    """p-th moment analogue of :func:`nsm_tail`, for ``n >= 4p``."""
    if not p > 0:
        raise DomainError(f"p must be positive, got {p!r}")
    if n < 4 * p:
        raise ValidityError(f"p-th moment tail bound requires n >= 4p (n={n}, p={p})")
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa!r}")
    return min(1.0, 2.0 * p / (kappa * n))


def nsm_zador(n: int) -> float:
    """Zador's random-quantizer NSM ``Gamma(1+2/n) / (n V_n^{2/n})``."""
    _check_dim(n)
    return math.exp(math.lgamma(1 + 2.0 / n) - math.log(n) - _log_vol_pow(n))


def nsm_zador_lattice(n: int) -> float:
    """Zador-type bound attained by random lattices, for ``n >= 13``."""
    if n < 13:
        raise ValidityError(f"Zador-attaining lattice bound requires n >= 13, got n={n}")
    eta = EtaConst.for_dim(n).eta
    return (math.gamma(1 + 2.0 / n) + 60.0 * n * math.exp(-eta / 2)) / (n * math.exp(_log_vol_pow(n)))


def log_nsm_cs_lower(n: int) -> float:
    """Natural log of the Conway-Sloane conjectured NSM lower bound."""
    if int(n) != n or n < 2:
        raise DomainError(f"Conway-Sloane bound requires n >= 2, got {n!r}")
    lead = n + 3 - 2 * specfun.harmonic(n + 2)
    if lead <= 0:
        raise NumericError("non-positive leading factor in Conway-Sloane bound", n=n, lead=lead)
    return (
        math.log(lead)
        - math.log(4 * n * (n + 1))
        + math.log(n + 1) / n
        + 4.0 * math.lgamma(n + 1) / n
        + 2.0 * specfun.schlafli_rogers(n).log_magnitude / n
    )


def nsm_cs_lower(n: int) -> float:
    return math.exp(log_nsm_cs_lower(n))


def zador_cs_expansions(n: int) -> tuple[float, float]:
    """Large-``n`` expansions of ``ln nsm_zador`` and ``ln nsm_cs_lower``."""
    if n < 8:
        raise ValidityError(f"expansions are stated for n >= 8, got n={n}")
    e1 = -math.log(2 * math.pi) - 1 + (math.log(math.pi * n) - 2 * specfun.EULER_GAMMA) / n
    return e1, e1 - 2 * math.log(n) ** 2 / n**2


def _log_x_sq(p: AwgnParams, w: np.ndarray) -> np.ndarray:
    """``ln X`` for ``X = (sigma^2 w / r_eff^2)^{n/2}``."""
    with np.errstate(divide="ignore"):
        return 0.5 * p.n * (math.log(p.sigma2) + np.log(w) - 2 * specfun.log_r_eff(p.n))


def _quad(f: Callable[[float], float], a: float, b: float, rtol: float, what: str, **diag) -> float:
    if not b > a:
        return 0.0
    val, err, info = _quad_raw(f, a, b, rtol)
    if info != 0:
        raise NumericError(f"quadrature did not converge for {what}", a=a, b=b, err=err, **diag)
    return val


def _quad_raw(f, a, b, rtol):
    out = integrate.quad(f, a, b, epsabs=1e-16, epsrel=rtol, limit=500, full_output=1)
    val, err = out[0], out[1]
    info = 0 if len(out) == 3 else out[3]
    # Only flag failures that matter at the requested tolerance.
    if info != 0 and err <= max(1e-15, rtol * abs(val)):
        info = 0
    return val, err, info


def _mass_range(dof: int) -> tuple[float, float]:
    return (
        specfun.chi2_quantile(dof, _TAIL_MASS),
        specfun.chi2_quantile(dof, _TAIL_MASS, upper=True),
    )


def _integrate_chi2(dof: int, log_h: Callable[[float], float], breaks: Sequence[float], rtol: float, what: str, **diag) -> float:
    """``E[h(W)]`` for ``W ~ chi2_dof`` given ``log h``, split at ``breaks``."""
    lo, hi = _mass_range(dof)
    pts = sorted({lo, hi, *(b for b in breaks if lo < b < hi)})

    def f(w: float) -> float:
        lh = log_h(w)
        if lh == -math.inf:
            return 0.0
        return math.exp(lh + specfun.chi2_logpdf(dof, w))

    return math.fsum(_quad(f, a, b, rtol, what, dof=dof, **diag) for a, b in zip(pts[:-1], pts[1:]))


def pe_sphere_packing(params: AwgnParams) -> float:
    """Error probability of the unit-volume ball: a lower bound for every lattice."""
    return specfun.chi2_sf(params.n, math.exp(2 * specfun.log_r_eff(params.n)) / params.sigma2)


def pe_new_awgn_excess(params: AwgnParams, rtol: float = DEFAULT_RTOL) -> float:
    """The additive term ``E[min(X_W, 1/X_W) / (1 + X_W)]``, ``W ~ chi2_{n+2}``."""
    p = params
    w_star = math.exp(2 * specfun.log_r_eff(p.n)) / p.sigma2

    def log_h(w: float) -> float:
        lx = float(_log_x_sq(p, np.float64(w)))
        return -abs(lx) - specfun.log1pexp(lx)

    return _integrate_chi2(p.n + 2, log_h, [w_star], rtol, "pe_new_awgn", n=p.n, sigma2=p.sigma2)


def pe_new_awgn(params: AwgnParams, rtol: float = DEFAULT_RTOL, clamp: bool = True) -> float:
    """Upper bound on the average Gaussian error probability of a random lattice."""
    v = pe_sphere_packing(params) + pe_new_awgn_excess(params, rtol)
    return min(1.0, v) if clamp else v


def pe_mlb_awgn_excess(params: AwgnParams, rtol: float = DEFAULT_RTOL) -> float:
    """``E[X 1{X <= 1}]`` with ``X = (sigma^2 Z / r_eff^2)^{n/2}``, ``Z ~ chi2_n``."""
    p = params
    w_star = math.exp(2 * specfun.log_r_eff(p.n)) / p.sigma2

    def log_h(w: float) -> float:
        lx = float(_log_x_sq(p, np.float64(w)))
        return lx if lx <= 0 else -math.inf

    return _integrate_chi2(p.n, log_h, [w_star], rtol, "pe_mlb_awgn", n=p.n, sigma2=p.sigma2)


def pe_mlb_awgn(params: AwgnParams, rtol: float = DEFAULT_RTOL, clamp: bool = True) -> float:
    """The Poltyrev / Ingber-Zamir-Feder benchmark upper bound."""
    v = pe_sphere_packing(params) + pe_mlb_awgn_excess(params, rtol)
    return min(1.0, v) if clamp else v


def pe_mlb_awgn_closed(params: AwgnParams) -> float:
    """Closed form of :func:`pe_mlb_awgn` through a chi-squared CDF with 2n dof.

    ``E[X 1{Z <= z*}] = (sigma^2 / r_eff^2)^{n/2} 2^{n/2} Gamma(n) / Gamma(n/2) P(chi2_{2n} <= z*)``.
    """
    n, s2 = params.n, params.sigma2
    z_star = math.exp(2 * specfun.log_r_eff(n)) / s2
    log_c = 0.5 * n * (math.log(s2) - 2 * specfun.log_r_eff(n) + math.log(2.0)) + math.lgamma(n) - math.lgamma(n / 2)
    cdf = specfun.chi2_cdf(2 * n, z_star)
    excess = math.exp(log_c + math.log(cdf)) if cdf > 0 else 0.0
    return min(1.0, pe_sphere_packing(params) + excess)


def gaussian_measure_from_cdf(
    n: int,
    sigma2: float,
    log_g: Callable[[float], float],
    r_eff_k: float,
    breakpoints: Sequence[float] = (),
    rtol: float = DEFAULT_RTOL,
) -> float:
    """Gaussian measure of a set ``K`` from its spherical CDF.

    Evaluates ``E[g_K(sqrt(sigma2 W)) / (sigma2 W / r_eff(K)^2)^{n/2}]`` with
    ``W ~ chi2_{n+2}``. ``log_g(r)`` returns ``ln g_K(r)`` and
    ``breakpoints`` are radii where ``g_K`` has kinks.
    """
    AwgnParams(n, sigma2)
    breaks = [b * b / sigma2 for b in breakpoints]
    log_rk2 = 2 * math.log(r_eff_k)

    def log_h(w: float) -> float:
        lg = log_g(math.sqrt(sigma2 * w))
        if lg == -math.inf:
            return lg
        return lg - 0.5 * n * (math.log(sigma2 * w) - log_rk2)

    return _integrate_chi2(n + 2, log_h, breaks, rtol, "gaussian_measure_from_cdf", n=n, sigma2=sigma2)


def ball_log_cdf(n: int, rho: float) -> Callable[[float], float]:
    """``ln g`` for the ball of radius ``rho`` in ``R^n``."""

    def log_g(r: float) -> float:
        if r <= 0:
            return -math.inf
        return min(0.0, n * (math.log(r) - math.log(rho)))

    return log_g


def nsm_from_cdf(n: int, radii, values) -> float:
    """NSM from a sampled spherical CDF: ``(1/n) int_0^inf (1 - g(sqrt t)) dt``.

    ``radii`` must extend to the covering radius (where ``g`` reaches 1);
    the integral is evaluated by the trapezoid rule in ``t = r^2``.
    """
    r = np.asarray(radii, dtype=float)
    g = np.asarray(values, dtype=float)
    if r[0] != 0:
        r = np.concatenate([[0.0], r])
        g = np.concatenate([[0.0], g])
    return float(np.trapezoid(1.0 - g, r * r)) / n


def jensen_curve(n: int, radii):
    return CdfCurve(radii, g_jensen(n, np.asarray(radii, dtype=float)), "g_jensen", n)


def ball_curve(n: int, radii):
    return CdfCurve(radii, g_ball(n, np.asarray(radii, dtype=float)), "g_ball", n)
