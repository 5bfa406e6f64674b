"""Nearest-point decoders and Monte Carlo for concrete lattices.

Supported families are ``Z^n``, ``D_n`` (integer vectors with even sum),
``E_8 = D_8 u (D_8 + 1/2)`` and direct sums of these. Every lattice is
rescaled to unit covolume. Decoders work in the natural integer coordinates
and the scale is applied to inputs and outputs.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import specfun
from .errors import DomainError
from .parallel import Moments, merge_all, run_blocks
from .results import CdfCurve

TIE_TOL = 1e-12

_RAW_COVOLUME = {"Z": 1.0, "D": 2.0, "E": 1.0}


@dataclass(frozen=True)
class Part:
    """One irreducible summand: family letter and dimension."""

    family: str
    dim: int

    def __post_init__(self) -> None:
        if self.family not in _RAW_COVOLUME:
            raise DomainError(f"unsupported lattice family {self.family!r}")
        if self.dim < 1:
            raise DomainError("lattice dimension must be >= 1")
        if self.family == "D" and self.dim < 2:
            raise DomainError("D_n requires n >= 2")
        if self.family == "E" and self.dim != 8:
            raise DomainError("only E8 is supported among exceptional lattices")

    @property
    def name(self) -> str:
        return f"{self.family}{self.dim}"

    @property
    def raw_covolume(self) -> float:
        return _RAW_COVOLUME[self.family]

    @property
    def raw_radii(self) -> tuple[float, float]:
        n = self.dim
        if self.family == "Z":
            return 0.5, math.sqrt(n) / 2
        if self.family == "D":
            return math.sqrt(2) / 2, max(1.0, math.sqrt(n) / 2)
        return 1 / math.sqrt(2), 1.0

    @property
    def cube_side(self) -> float:
        """Side of a cube that tiles space modulo this lattice."""
        return 1.0 if self.family == "Z" else 2.0


@dataclass(frozen=True)
class LatticeSpec:
    """A direct sum of supported lattices, rescaled to unit covolume."""

    parts: tuple[Part, ...]
    label: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if not self.parts:
            raise DomainError("a lattice needs at least one part")
        if not self.label:
            object.__setattr__(self, "label", "+".join(p.name for p in self.parts))

    @classmethod
    def Zn(cls, n: int) -> LatticeSpec:
        return cls((Part("Z", n),))

    @classmethod
    def Dn(cls, n: int) -> LatticeSpec:
        return cls((Part("D", n),))

    @classmethod
    def E8(cls) -> LatticeSpec:
        return cls((Part("E", 8),))

    @classmethod
    def direct_sum(cls, *specs: LatticeSpec) -> LatticeSpec:
        return cls(tuple(p for s in specs for p in s.parts))

    @classmethod
    def parse(cls, text: str) -> LatticeSpec:
        """Parse names such as ``Z40``, ``D4``, ``E8x5`` or ``D4+E8``."""
        parts: list[Part] = []
        for token in text.replace(" ", "").split("+"):
            m = re.fullmatch(r"([ZDE])(\d+)(?:[x*](\d+))?", token, flags=re.IGNORECASE)
            if not m:
                raise DomainError(f"cannot parse lattice {token!r}; expected e.g. Z4, D4, E8, E8x5")
            part = Part(m.group(1).upper(), int(m.group(2)))
            parts.extend([part] * int(m.group(3) or 1))
        return cls(tuple(parts), label=text.strip())

    @property
    def dim(self) -> int:
        return sum(p.dim for p in self.parts)

    @property
    def scale(self) -> float:
        log_cov = sum(math.log(p.raw_covolume) for p in self.parts)
        return math.exp(-log_cov / self.dim)

    def slices(self) -> list[tuple[Part, slice]]:
        out = []
        start = 0
        for p in self.parts:
            out.append((p, slice(start, start + p.dim)))
            start += p.dim
        return out


def round_half_down(x: np.ndarray) -> np.ndarray:
    """Nearest integer, ties toward the smaller one."""
    return np.ceil(x - 0.5)


def decode_zn(x: np.ndarray) -> np.ndarray:
    return round_half_down(x)


def decode_dn(x: np.ndarray) -> np.ndarray:
    """Nearest point of ``D_n`` (rows of ``x``), ties lexicographically smallest.

    Round every coordinate; when the sum is odd, re-round the coordinate
    with the largest rounding error in the other direction.
    """
    f = round_half_down(x)
    odd = (np.sum(f, axis=1) % 2) != 0
    if not np.any(odd):
        return f
    xo, fo = x[odd], f[odd]
    diff = xo - fo
    err = np.abs(diff)
    down = diff <= 0
    tied = err >= err.max(axis=1, keepdims=True) - TIE_TOL
    n = x.shape[1]
    idx = np.arange(n)
    # Among tied candidates a downward flip is lexicographically smaller than
    # any upward one; the earliest downward, else the latest upward, wins.
    down_key = np.where(tied & down, idx, n)
    first_down = down_key.min(axis=1)
    up_key = np.where(tied & ~down, idx, -1)
    last_up = up_key.max(axis=1)
    has_down = first_down < n
    j = np.where(has_down, first_down, last_up)
    rows = np.arange(xo.shape[0])
    fo[rows, j] += np.where(has_down, -1.0, 1.0)
    f[odd] = fo
    return f


def _lex_less(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise ``a < b`` in lexicographic order."""
    neq = a != b
    any_neq = neq.any(axis=1)
    first = np.argmax(neq, axis=1)
    rows = np.arange(a.shape[0])
    return any_neq & (a[rows, first] < b[rows, first])


def decode_e8(x: np.ndarray) -> np.ndarray:
    """Nearest point of ``E_8``: the better of the ``D_8`` and ``D_8 + 1/2`` answers."""
    y0 = decode_dn(x)
    y1 = decode_dn(x - 0.5) + 0.5
    d0 = np.sum((x - y0) ** 2, axis=1)
    d1 = np.sum((x - y1) ** 2, axis=1)
    pick1 = (d1 < d0 - TIE_TOL) | ((np.abs(d1 - d0) <= TIE_TOL) & _lex_less(y1, y0))
    return np.where(pick1[:, None], y1, y0)


_DECODERS = {"Z": decode_zn, "D": decode_dn, "E": decode_e8}


def _decode_raw(spec: LatticeSpec, x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    for part, sl in spec.slices():
        out[:, sl] = _DECODERS[part.family](x[:, sl])
    return out


def nearest_point(spec: LatticeSpec, x) -> np.ndarray:
    """Closest point of the unit-covolume lattice to ``x`` (a vector or rows)."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    arr2 = np.atleast_2d(arr)
    if arr2.ndim != 2 or arr2.shape[1] != spec.dim:
        raise DomainError(f"expected vectors of dimension {spec.dim}, got shape {arr.shape}")
    s = spec.scale
    y = _decode_raw(spec, arr2 / s) * s + 0.0
    return y[0] if single else y


def known_radii(spec: LatticeSpec) -> tuple[float, float]:
    """Packing and covering radii after unit-covolume scaling."""
    s = spec.scale
    pack = min(p.raw_radii[0] for p in spec.parts)
    cov = math.sqrt(sum(p.raw_radii[1] ** 2 for p in spec.parts))
    return s * pack, s * cov


def _cube_sides(spec: LatticeSpec) -> np.ndarray:
    return np.concatenate([np.full(p.dim, p.cube_side) for p in spec.parts])


def sample_voronoi(spec: LatticeSpec, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Uniform point(s) on the Voronoi cell, as ``x - Q(x)`` for uniform ``x`` mod the lattice."""
    m = 1 if size is None else size
    raw = rng.random((m, spec.dim)) * _cube_sides(spec)
    e = (raw - _decode_raw(spec, raw)) * spec.scale
    return e[0] if size is None else e


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    samples: int
    seed: int
    workers: int = field(default=1, compare=False)


@dataclass(frozen=True)
class _VoronoiBlock:
    counts: np.ndarray
    sq: Moments
    max_norm: float


def _voronoi_block(spec: LatticeSpec, radii: np.ndarray):
    def fn(rng: np.random.Generator, size: int) -> _VoronoiBlock:
        e = sample_voronoi(spec, rng, size)
        sq = np.einsum("ij,ij->i", e, e)
        norms = np.sqrt(sq)
        counts = np.searchsorted(np.sort(norms), radii, side="right")
        return _VoronoiBlock(counts, Moments.of(sq / spec.dim), float(norms.max()))

    return fn


@dataclass(frozen=True)
class VoronoiSummary:
    """Merged Voronoi-sample statistics: CDF counts, NSM moments, largest norm."""

    radii: np.ndarray
    counts: np.ndarray
    sq: Moments
    max_norm: float
    samples: int


def simulate_voronoi(spec: LatticeSpec, radii, samples: int, seed: int, workers: int = 1) -> VoronoiSummary:
    r = np.asarray(radii, dtype=float)
    if r.ndim != 1 or np.any(np.diff(r) < 0) or np.any(r < 0):
        raise DomainError("radii must be a non-negative ascending 1-d grid")
    blocks = run_blocks(_voronoi_block(spec, r), samples, seed, workers)
    counts = np.sum([b.counts for b in blocks], axis=0).astype(np.int64)
    return VoronoiSummary(r, counts, merge_all([b.sq for b in blocks]), max(b.max_norm for b in blocks), samples)


def estimate_cdf(spec: LatticeSpec, radii, samples: int, seed: int, workers: int = 1) -> CdfCurve:
    """Empirical Voronoi spherical CDF on ``radii`` with binomial standard errors."""
    s = simulate_voronoi(spec, radii, samples, seed, workers)
    g = s.counts / samples
    se = np.sqrt(g * (1 - g) / samples)
    return CdfCurve(
        s.radii,
        g,
        f"mc:{spec.label}",
        spec.dim,
        se=se,
        params={"samples": samples, "seed": seed},
    )


def estimate_nsm(spec: LatticeSpec, samples: int, seed: int, workers: int = 1) -> McEstimate:
    """Monte Carlo NSM, the mean of ``||e||^2 / n`` over uniform cell points."""
    s = simulate_voronoi(spec, [], samples, seed, workers)
    return McEstimate(s.sq.mean, s.sq.std_error, samples, seed, workers)


def estimate_pe(spec: LatticeSpec, sigma2: float, samples: int, seed: int, workers: int = 1) -> McEstimate:
    """Probability that ``sigma Z`` decodes to a nonzero lattice point."""
    if not sigma2 > 0:
        raise DomainError(f"sigma2 must be positive, got {sigma2!r}")
    sigma = math.sqrt(sigma2)

    def fn(rng: np.random.Generator, size: int) -> int:
        z = rng.standard_normal((size, spec.dim)) * sigma
        y = nearest_point(spec, z)
        return int(np.count_nonzero(np.any(y != 0, axis=1)))

    errors = sum(run_blocks(fn, samples, seed, workers))
    pe = errors / samples
    return McEstimate(pe, math.sqrt(pe * (1 - pe) / samples), samples, seed, workers)


def pe_cube(n: int, sigma2: float) -> float:
    """Exact error probability of ``Z^n`` under white Gaussian noise."""
    q = stats.norm.sf(0.5 / math.sqrt(sigma2))
    return -math.expm1(n * math.log1p(-2 * q))


def ball_cdf_small_r(n: int, r) -> np.ndarray:
    """``V_n r^n``: every lattice CDF below its packing radius."""
    return np.exp(specfun.ball_volume(n).log_magnitude + n * np.log(np.asarray(r, dtype=float)))


E8_NSM = 929.0 / 12960.0
