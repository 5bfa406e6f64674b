"""Exact brute force for small binary linear codes.

Words of ``F_2^n`` are Python/NumPy integers with coordinate 0 in the most
significant bit, so numeric order equals lexicographic order of the bit
strings. A code is stored by its reduced-row-echelon generator rows.
"""

from __future__ import annotations

import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import specfun
from .errors import CapacityError, DomainError, ValidityError

MAX_CELL_N = 30
MAX_SYNDROME_BITS = 26
MAX_SUBSPACES = 10**7
_CHUNK = 1 << 20
_BATCH_CODES = 1 << 13


class RankError(ValidityError):
    """Generator rows are linearly dependent."""


def _bit(n: int, j: int) -> int:
    """Integer mask of coordinate ``j``."""
    return 1 << (n - 1 - j)


def word_to_str(word: int, n: int) -> str:
    return format(word, f"0{n}b")


def str_to_word(text: str) -> int:
    text = text.strip()
    if not text or set(text) - {"0", "1"}:
        raise DomainError(f"not a 0/1 string: {text!r}")
    return int(text, 2)


def popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a)


@dataclass(frozen=True)
class BinaryLinearCode:
    """A ``k``-dimensional subspace of ``F_2^n`` in reduced row echelon form."""

    n: int
    k: int
    rows: tuple[int, ...]
    canonical: bool = True

    @property
    def pivots(self) -> tuple[int, ...]:
        return tuple(self.n - r.bit_length() for r in self.rows)

    @property
    def free_columns(self) -> tuple[int, ...]:
        piv = set(self.pivots)
        return tuple(j for j in range(self.n) if j not in piv)

    def codewords(self) -> np.ndarray:
        words = np.zeros(1, dtype=np.int64)
        for r in self.rows:
            words = np.concatenate([words, words ^ r])
        return np.sort(words)

    def row_strings(self) -> list[str]:
        return [word_to_str(r, self.n) for r in self.rows]


def canonicalize(rows: Iterable[int | str], n: int | None = None) -> BinaryLinearCode:
    """Reduced row echelon form over ``F_2``; raises :class:`RankError` on dependence."""
    raw = list(rows)
    if n is None:
        if not raw or not all(isinstance(r, str) for r in raw):
            raise DomainError("n is required unless rows are given as 0/1 strings")
        n = len(raw[0].strip())
    words = []
    for r in raw:
        if isinstance(r, str):
            if len(r.strip()) != n:
                raise DomainError(f"row {r!r} does not have length {n}")
            r = str_to_word(r)
        if not 0 <= r < (1 << n):
            raise DomainError(f"row {r!r} does not fit in {n} bits")
        words.append(int(r))
    reduced: list[int] = []
    for w in words:
        for r in reduced:
            # ``w ^ r < w`` exactly when w has r's pivot bit set.
            if w ^ r < w:
                w ^= r
        if w == 0:
            raise RankError(f"generator rows are linearly dependent (rank < {len(words)})")
        # Clear the new pivot from existing rows, then keep rows sorted by pivot.
        top = 1 << (w.bit_length() - 1)
        reduced = [r ^ w if r & top else r for r in reduced]
        reduced.append(w)
        reduced.sort(reverse=True)
    return BinaryLinearCode(n, len(reduced), tuple(reduced))


def _basis_labels(code: BinaryLinearCode) -> list[int]:
    """Coset label of ``e_j`` for every coordinate ``j``.

    The label of ``x`` is ``x`` reduced by the generator rows (which clears
    every pivot) and read off on the free columns.
    """
    n = code.n
    free = code.free_columns
    m = len(free)
    pos = {j: m - 1 - i for i, j in enumerate(free)}

    def compress(word: int) -> int:
        out = 0
        for j in free:
            if word & _bit(n, j):
                out |= 1 << pos[j]
        return out

    labels = [0] * n
    piv = code.pivots
    for j in free:
        labels[j] = 1 << pos[j]
    for i, p in enumerate(piv):
        labels[p] = compress(code.rows[i])
    return labels


def _label_table(n: int, basis: Sequence[int]) -> np.ndarray:
    """Labels of all ``2^n`` words from the labels of the unit vectors."""
    table = np.zeros(1, dtype=np.int64)
    for j in range(n - 1, -1, -1):
        table = np.concatenate([table, table ^ basis[j]])
    return table


class _Labeler:
    """Vectorised coset labelling through two half-word lookup tables."""

    def __init__(self, code: BinaryLinearCode):
        n = code.n
        basis = _basis_labels(code)
        self.lo_bits = n // 2
        self.lo = _label_table(self.lo_bits, basis[n - self.lo_bits:])
        self.hi = _label_table(n - self.lo_bits, basis[: n - self.lo_bits])

    def __call__(self, words: np.ndarray) -> np.ndarray:
        mask = (1 << self.lo_bits) - 1
        return self.lo[words & mask] ^ self.hi[words >> self.lo_bits]


@dataclass(frozen=True)
class VoronoiCell:
    """Coset leaders (indexed by coset label) and their weight histogram."""

    n: int
    k: int
    leaders: np.ndarray
    weight_histogram: tuple[int, ...]

    def sorted_leaders(self) -> list[int]:
        return sorted(int(x) for x in self.leaders)


def _check_capacity(code: BinaryLinearCode) -> None:
    if code.n > MAX_CELL_N:
        raise CapacityError(f"Voronoi cell needs 2^n work; n={code.n} exceeds cap {MAX_CELL_N}")


def voronoi_cell(code: BinaryLinearCode, method: str = "auto") -> VoronoiCell:
    """Minimum-weight coset leaders, ties broken toward the smallest word.

    ``method`` is ``"syndrome"`` (one slot per coset, needs
    ``n - k <= 26``), ``"sweep"`` (tests every word against its ``2^k``
    coset mates) or ``"auto"``.
    """
    _check_capacity(code)
    if method == "auto":
        method = "syndrome" if code.n - code.k <= MAX_SYNDROME_BITS else "sweep"
    if method == "syndrome":
        if code.n - code.k > MAX_SYNDROME_BITS:
            raise CapacityError(f"syndrome table of 2^{code.n - code.k} entries exceeds cap 2^{MAX_SYNDROME_BITS}")
        leaders = _leaders_syndrome(code)
    elif method == "sweep":
        leaders = _leaders_sweep(code)
    else:
        raise DomainError(f"unknown method {method!r}")
    hist = np.bincount(popcount(leaders), minlength=code.n + 1)
    return VoronoiCell(code.n, code.k, leaders, tuple(int(h) for h in hist))


def _leaders_syndrome(code: BinaryLinearCode) -> np.ndarray:
    n = code.n
    labeler = _Labeler(code)
    best = np.full(1 << (n - code.k), np.iinfo(np.int64).max, dtype=np.int64)
    for start in range(0, 1 << n, _CHUNK):
        words = np.arange(start, min(start + _CHUNK, 1 << n), dtype=np.int64)
        keys = (popcount(words).astype(np.int64) << n) | words
        labs = labeler(words)
        order = np.argsort(keys, kind="stable")
        ulab, first = np.unique(labs[order], return_index=True)
        cand = keys[order][first]
        best[ulab] = np.minimum(best[ulab], cand)
    return best & ((1 << n) - 1)


def _leaders_sweep(code: BinaryLinearCode) -> np.ndarray:
    n = code.n
    cw = code.codewords()[1:]
    labeler = _Labeler(code)
    leaders = np.empty(1 << (n - code.k), dtype=np.int64)
    for start in range(0, 1 << n, _CHUNK):
        words = np.arange(start, min(start + _CHUNK, 1 << n), dtype=np.int64)
        keys = (popcount(words).astype(np.int64) << n) | words
        is_leader = np.ones(words.shape, dtype=bool)
        for c in cw:
            mates = words ^ c
            is_leader &= keys < ((popcount(mates).astype(np.int64) << n) | mates)
        lw = words[is_leader]
        leaders[labeler(lw)] = lw
    return leaders


@dataclass(frozen=True)
class ExactCodeStats:
    """Exact Voronoi statistics of one code, derived from its leader weights."""

    n: int
    k: int
    weight_histogram: tuple[int, ...]

    @property
    def cosets(self) -> int:
        return 1 << (self.n - self.k)

    @property
    def q_cdf(self) -> tuple[Fraction, ...]:
        acc = 0
        out = []
        for h in self.weight_histogram:
            acc += h
            out.append(Fraction(acc, self.cosets))
        return tuple(out)

    @property
    def distortion(self) -> Fraction:
        return Fraction(sum(w * h for w, h in enumerate(self.weight_histogram)), self.cosets * self.n)

    def pe(self, p):
        """``1 - sum_u p^|u| (1-p)^(n-|u|)``; exact for Fraction ``p``."""
        q = 1 - p
        return 1 - sum(h * p**w * q ** (self.n - w) for w, h in enumerate(self.weight_histogram))

    def pe_coefficients(self) -> tuple[int, ...]:
        """``P(correct) = sum_w c_w p^w (1-p)^(n-w)``; returns ``c_w``."""
        return self.weight_histogram

    @property
    def r_pack(self) -> int:
        r = -1
        for w, h in enumerate(self.weight_histogram):
            if h != math.comb(self.n, w):
                break
            r = w
        return r

    @property
    def r_cov(self) -> int:
        return max(w for w, h in enumerate(self.weight_histogram) if h)


def exact_stats(code: BinaryLinearCode) -> ExactCodeStats:
    cell = voronoi_cell(code)
    return ExactCodeStats(code.n, code.k, cell.weight_histogram)


def min_distance(code: BinaryLinearCode) -> int:
    """Minimum nonzero codeword weight by enumeration (``n + 1`` for the zero code)."""
    if code.k == 0:
        return code.n + 1
    return int(popcount(code.codewords()[1:]).min())


def gaussian_count(n: int, k: int) -> int:
    return specfun.gaussian_binomial(n, k)


def _check_enumeration(n: int, k: int) -> int:
    if not 0 <= k <= n:
        raise DomainError(f"need 0 <= k <= n, got n={n}, k={k}")
    count = gaussian_count(n, k)
    if count > MAX_SUBSPACES:
        raise CapacityError(f"Gr({n},{k}) has {count} subspaces, above the cap of {MAX_SUBSPACES}")
    if n > MAX_CELL_N:
        raise CapacityError(f"n={n} exceeds cap {MAX_CELL_N}")
    return count


def _free_slots(n: int, pivots: Sequence[int]) -> list[list[int]]:
    piv = set(pivots)
    return [[j for j in range(p + 1, n) if j not in piv] for p in pivots]


def _pattern_rows(n: int, pivots: Sequence[int], start: int, stop: int) -> np.ndarray:
    """RREF rows for free-bit assignments ``start..stop-1`` of one pivot pattern."""
    slots = _free_slots(n, pivots)
    a = np.arange(start, stop, dtype=np.int64)
    rows = np.zeros((stop - start, len(pivots)), dtype=np.int64)
    shift = 0
    for i, (p, sl) in enumerate(zip(pivots, slots)):
        rows[:, i] = _bit(n, p)
        for j in sl:
            rows[:, i] |= ((a >> shift) & 1) * _bit(n, j)
            shift += 1
    return rows


def _pivot_patterns(n: int, k: int) -> list[tuple[int, ...]]:
    return list(combinations(range(n), k))


def enumerate_grassmannian(n: int, k: int) -> Iterator[BinaryLinearCode]:
    """Every ``k``-dimensional subspace of ``F_2^n`` exactly once."""
    _check_enumeration(n, k)
    for piv in _pivot_patterns(n, k):
        total = 1 << sum(len(s) for s in _free_slots(n, piv))
        for start in range(0, total, _BATCH_CODES):
            rows = _pattern_rows(n, piv, start, min(total, start + _BATCH_CODES))
            for r in rows:
                yield BinaryLinearCode(n, k, tuple(int(v) for v in r))


def _batch_histograms(n: int, k: int, pivots: Sequence[int], rows: np.ndarray) -> np.ndarray:
    """Leader-weight histograms for a batch of codes sharing a pivot pattern."""
    b = rows.shape[0]
    free = [j for j in range(n) if j not in set(pivots)]
    m = len(free)
    pos = {j: m - 1 - i for i, j in enumerate(free)}
    basis = np.zeros((b, n), dtype=np.int64)
    for j in free:
        basis[:, j] = 1 << pos[j]
    for i, p in enumerate(pivots):
        lab = np.zeros(b, dtype=np.int64)
        for j in free:
            lab |= ((rows[:, i] >> (n - 1 - j)) & 1) << pos[j]
        basis[:, p] = lab
    table = np.zeros((b, 1), dtype=np.int64)
    for j in range(n - 1, -1, -1):
        table = np.concatenate([table, table ^ basis[:, j : j + 1]], axis=1)
    words = np.arange(1 << n, dtype=np.int64)
    weights = popcount(words).astype(np.int64)
    best = np.full((b, 1 << m), n + 1, dtype=np.int64)
    ridx = np.arange(b)[:, None]
    for w in range(n + 1):
        cols = np.nonzero(weights == w)[0]
        labs = table[:, cols]
        cur = best[ridx, labs]
        best[ridx, labs] = np.minimum(cur, w)
    offs = (np.arange(b) * (n + 2))[:, None]
    hist = np.bincount((best + offs).ravel(), minlength=b * (n + 2)).reshape(b, n + 2)
    return hist[:, : n + 1]


def iter_histogram_batches(n: int, k: int) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield ``(rows, histograms)`` batches covering all of ``Gr(n, k)``.

    ``rows`` has shape ``(B, k)``; ``histograms`` has shape ``(B, n + 1)``.
    """
    _check_enumeration(n, k)
    for piv in _pivot_patterns(n, k):
        total = 1 << sum(len(s) for s in _free_slots(n, piv))
        for start in range(0, total, _BATCH_CODES):
            rows = _pattern_rows(n, piv, start, min(total, start + _BATCH_CODES))
            yield rows, _batch_histograms(n, k, piv, rows)


@dataclass(frozen=True)
class EnsembleHistogram:
    """Sum of leader-weight histograms over every code of ``Gr(n, k)``."""

    n: int
    k: int
    count: int
    total: tuple[int, ...]

    def mean_q(self, r: int) -> Fraction:
        return Fraction(sum(self.total[: r + 1]), self.count << (self.n - self.k))

    def mean_distortion(self) -> Fraction:
        return Fraction(sum(w * h for w, h in enumerate(self.total)), self.count * self.n << (self.n - self.k))

    def mean_pe(self, p):
        q = 1 - p
        correct = sum(h * p**w * q ** (self.n - w) for w, h in enumerate(self.total))
        return 1 - correct / self.count


def grassmannian_histogram(n: int, k: int, workers: int = 1) -> EnsembleHistogram:
    """Exact ensemble histogram; integer sums make it independent of ``workers``."""
    count = _check_enumeration(n, k)
    patterns = _pivot_patterns(n, k)

    def one(piv: tuple[int, ...]) -> tuple[int, np.ndarray]:
        total = 1 << sum(len(s) for s in _free_slots(n, piv))
        acc = np.zeros(n + 1, dtype=np.int64)
        for start in range(0, total, _BATCH_CODES):
            rows = _pattern_rows(n, piv, start, min(total, start + _BATCH_CODES))
            acc += _batch_histograms(n, k, piv, rows).sum(axis=0)
        return total, acc

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one, patterns))
    else:
        parts = [one(p) for p in patterns]
    seen = sum(c for c, _ in parts)
    if seen != count:
        raise AssertionError(f"enumerated {seen} codes, expected {count}")
    total = np.sum([h for _, h in parts], axis=0)
    return EnsembleHistogram(n, k, count, tuple(int(v) for v in total))


def grassmannian_expectation(n: int, k: int, stat: str, r: int | None = None, p=None, workers: int = 1):
    """Exact average of ``q_cdf`` (at ``r``), ``distortion`` or ``pe`` (at ``p``)."""
    ens = grassmannian_histogram(n, k, workers)
    if stat == "q_cdf":
        if r is None or not 0 <= r <= n:
            raise DomainError("q_cdf needs 0 <= r <= n")
        return ens.mean_q(r)
    if stat == "distortion":
        return ens.mean_distortion()
    if stat == "pe":
        if p is None:
            raise DomainError("pe needs p")
        return ens.mean_pe(Fraction(p))
    raise DomainError(f"unknown statistic {stat!r}")


def sample_code(n: int, k: int, rng: np.random.Generator) -> BinaryLinearCode:
    """Uniform random subspace: uniform generator bits, rejected until full rank."""
    if not 0 <= k <= n:
        raise DomainError(f"need 0 <= k <= n, got n={n}, k={k}")
    while True:
        rows = [int(v) for v in rng.integers(0, 1 << n, size=k, dtype=np.int64)] if k else []
        try:
            return canonicalize(rows, n)
        except RankError:
            continue


def format_code(code: BinaryLinearCode, comment: str | None = None) -> str:
    """Plain-text generator matrix: optional ``#`` comments, then one 0/1 row per line."""
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.append(f"# n={code.n} k={code.k}")
    lines.extend(code.row_strings())
    return "\n".join(lines) + "\n"


def parse_code(text: str) -> BinaryLinearCode:
    """Inverse of :func:`format_code`. ``# n=...`` is required when ``k = 0``."""
    n = None
    rows = []
    for line in io.StringIO(text):
        body = line.split("#", 1)
        if len(body) == 2 and body[1].strip().startswith("n="):
            n = int(body[1].split()[0][2:])
        row = body[0].strip()
        if row:
            rows.append(row)
    if n is None:
        if not rows:
            raise DomainError("empty code file needs an '# n=..' header")
        n = len(rows[0])
    return canonicalize(rows, n)


def read_code(path: str | os.PathLike) -> BinaryLinearCode:
    with open(path, encoding="utf-8") as fh:
        return parse_code(fh.read())


def write_code(code: BinaryLinearCode, path: str | os.PathLike, comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_code(code, comment))
