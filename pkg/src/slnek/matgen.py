"""Exact enumeration of Frobenius-norm balls in SL_n(Z) for n = 2, 3.

A ball is addressed by an integer squared bound ``B``: it holds every
``g`` in SL_n(Z) with ``sum(g_kl ** 2) <= B`` (so ``T = sqrt(B)``).

Two routes are provided:

* :func:`iter_ball` / :func:`enumerate_ball` deliver every matrix, in
  lexicographic order of the flattened entry tuple when run as one
  partition. Pure Python; meant for small balls and for callers that
  need the matrices themselves.
* :func:`ball_statistics` only keeps per-position histograms of entry
  values, which is all the downstream statistics need. For n = 2 it runs
  a compiled kernel and handles B = 10**8 in well under a minute.
"""
from __future__ import annotations

import math
from collections import Counter
from collections.abc import Callable, Iterator, Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import zeta

from .errors import CountOverflowError, UnsupportedDimensionError

SUPPORTED_DIMENSIONS = (2, 3)
INT64_MAX = 2**63 - 1
# The n = 2 kernel forms a^2 * (B - a^2 - b^2) in int64.
MAX_KERNEL_BOUND = 3 * 10**9

Matrix = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class UnimodularMatrix:
    """An integer matrix of determinant exactly 1."""

    entries: Matrix

    def __post_init__(self):
        n = len(self.entries)
        if any(len(row) != n for row in self.entries):
            raise ValueError("matrix must be square")
        if determinant(self.entries) != 1:
            raise ValueError("determinant is not 1")

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def squared_norm(self) -> int:
        return sum(v * v for row in self.entries for v in row)

    def flat(self) -> tuple[int, ...]:
        return tuple(v for row in self.entries for v in row)


@dataclass(frozen=True)
class NormBall:
    n: int
    bound: int

    def __post_init__(self):
        _check_args(self.n, self.bound)

    @property
    def is_empty(self) -> bool:
        # min of sum g_kl^2 over SL_n(Z) is n (signed permutation matrices)
        return self.bound < self.n


@dataclass(frozen=True)
class BallCount:
    n: int
    bound: int
    count: int
    c_n: float

    @property
    def ratio(self) -> float:
        """count / T^(n^2 - n), which tends to c_n."""
        if self.bound == 0:
            return math.nan
        return self.count / self.bound ** ((self.n * self.n - self.n) / 2)


@dataclass
class EntryHistogram:
    """Multiset of integer entry values as sorted ``values`` with ``counts``."""

    values: np.ndarray
    counts: np.ndarray

    @classmethod
    def from_dense(cls, dense: np.ndarray, radius: int) -> EntryHistogram:
        nz = np.flatnonzero(dense)
        return cls(nz.astype(np.int64) - radius, dense[nz].astype(np.int64))

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, int]) -> EntryHistogram:
        keys = sorted(k for k, v in mapping.items() if v)
        return cls(
            np.array(keys, dtype=np.int64),
            np.array([mapping[k] for k in keys], dtype=np.int64),
        )

    @classmethod
    def from_iterable(cls, values) -> EntryHistogram:
        return cls.from_mapping(Counter(int(v) for v in values))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def as_dict(self) -> dict[int, int]:
        return {int(v): int(c) for v, c in zip(self.values, self.counts)}

    def merge(self, other: EntryHistogram) -> EntryHistogram:
        merged = Counter(self.as_dict())
        merged.update(other.as_dict())
        return EntryHistogram.from_mapping(merged)

    def __eq__(self, other):
        if not isinstance(other, EntryHistogram):
            return NotImplemented
        return np.array_equal(self.values, other.values) and np.array_equal(
            self.counts, other.counts
        )


@dataclass
class BallStats:
    """Ball size plus the histogram of every entry position (1-based keys)."""

    n: int
    bound: int
    count: int
    histograms: dict[tuple[int, int], EntryHistogram] = field(repr=False)

    def entry_histogram(self, i: int, j: int) -> EntryHistogram:
        _check_position(self.n, i, j)
        return self.histograms[(i, j)]


def determinant(m) -> int:
    """Exact determinant of a 2x2 or 3x3 integer matrix (cofactor expansion)."""
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    if n == 3:
        return (
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        )
    raise UnsupportedDimensionError(f"unsupported dimension n={n}")


def asymptotic_constant(n: int) -> float:
    """c_n with #V_T ~ c_n T^(n^2-n).

    c_n = pi^(n^2/2) / (Gamma(n/2) Gamma((n^2-n+2)/2) zeta(2)...zeta(n)).
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    log_c = (n * n / 2) * math.log(math.pi)
    log_c -= math.lgamma(n / 2) + math.lgamma((n * n - n + 2) / 2)
    log_c -= sum(math.log(zeta(k)) for k in range(2, n + 1))
    return math.exp(log_c)


def _check_args(n: int, bound: int) -> None:
    if n not in SUPPORTED_DIMENSIONS:
        raise UnsupportedDimensionError(
            f"unsupported dimension n={n}; only n in {SUPPORTED_DIMENSIONS}"
        )
    if bound < 0:
        raise ValueError("squared-norm bound must be non-negative")
    expected = asymptotic_constant(n) * bound ** ((n * n - n) / 2)
    # 2x headroom covers the lower-order terms at small bounds
    if 2 * expected > INT64_MAX:
        raise CountOverflowError(
            f"ball count for n={n}, B={bound} would exceed a 64-bit count"
        )


def _check_position(n: int, i: int, j: int) -> None:
    if not (1 <= i <= n and 1 <= j <= n):
        raise IndexError(f"position ({i},{j}) out of range for n={n}")


# ---------------------------------------------------------------------------
# Partition keys and per-partition generators
# ---------------------------------------------------------------------------

def _vectors(length: int, budget: int) -> Iterator[tuple[int, ...]]:
    """Integer vectors of given length with squared norm <= budget, lex order."""
    if length == 0:
        yield ()
        return
    r = math.isqrt(budget)
    for x in range(-r, r + 1):
        for rest in _vectors(length - 1, budget - x * x):
            yield (x,) + rest


def partition_keys(n: int, bound: int) -> list:
    """Ordered partition keys: first entry a (n=2) or first row (n=3)."""
    _check_args(n, bound)
    if n == 2:
        r = math.isqrt(bound)
        return list(range(-r, r + 1))
    return list(_vectors(3, bound))


def _sl2_with_first(a: int, bound: int) -> Iterator[tuple[int, int, int, int]]:
    if a == 0:
        rem = bound - 2
        if rem < 0:
            return
        dm = math.isqrt(rem)
        for b, c in ((-1, 1), (1, -1)):
            for d in range(-dm, dm + 1):
                yield (0, b, c, d)
        return
    m = abs(a)
    rem_a = bound - a * a
    if rem_a < 0:
        return
    bm = math.isqrt(rem_a)
    for b in range(-bm, bm + 1):
        rem_b = rem_a - b * b
        if math.gcd(b, m) != 1:
            continue
        # a | 1 + bc  <=>  c = -b^(-1) mod |a|
        r = (-pow(b, -1, m)) % m if m > 1 else 0
        cm = math.isqrt(rem_b)
        c = -cm + ((r + cm) % m)
        while c <= cm:
            d = (1 + b * c) // a
            if c * c + d * d <= rem_b:
                yield (a, b, c, d)
            c += m


def _sl3_with_first(row1: tuple[int, int, int], bound: int) -> Iterator[tuple[int, ...]]:
    rem1 = bound - sum(v * v for v in row1)
    if rem1 < 0:
        return
    x1, y1, z1 = row1
    for row2 in _vectors(3, rem1):
        x2, y2, z2 = row2
        # third row r3 must satisfy r3 . (row1 x row2) = 1
        v0 = y1 * z2 - z1 * y2
        v1 = z1 * x2 - x1 * z2
        v2 = x1 * y2 - y1 * x2
        if v0 == 0 and v1 == 0 and v2 == 0:
            continue
        if math.gcd(math.gcd(v0, v1), v2) != 1:
            continue
        rem2 = rem1 - (x2 * x2 + y2 * y2 + z2 * z2)
        r = math.isqrt(rem2)
        for x3 in range(-r, r + 1):
            rx = rem2 - x3 * x3
            ry = math.isqrt(rx)
            for y3 in range(-ry, ry + 1):
                rz = rx - y3 * y3
                partial = v0 * x3 + v1 * y3
                if v2 == 0:
                    if partial != 1:
                        continue
                    zm = math.isqrt(rz)
                    for z3 in range(-zm, zm + 1):
                        yield row1 + row2 + (x3, y3, z3)
                else:
                    z3, rest = divmod(1 - partial, v2)
                    if rest == 0 and z3 * z3 <= rz:
                        yield row1 + row2 + (x3, y3, z3)


def _iter_partition(n: int, bound: int, keys) -> Iterator[tuple[int, ...]]:
    gen = _sl2_with_first if n == 2 else _sl3_with_first
    for key in keys:
        yield from gen(key, bound)


def _split(keys: list, partitions: int) -> list[list]:
    if partitions < 1:
        raise ValueError("partitions must be >= 1")
    return [keys[p::partitions] for p in range(partitions)]


def _as_matrix(n: int, flat: tuple[int, ...]) -> Matrix:
    return tuple(flat[r * n:(r + 1) * n] for r in range(n))


# ---------------------------------------------------------------------------
# Public enumeration API
# ---------------------------------------------------------------------------

def iter_ball(n: int, bound: int) -> Iterator[Matrix]:
    """Yield every matrix of the ball in lexicographic order of its entries."""
    keys = partition_keys(n, bound)
    for flat in _iter_partition(n, bound, keys):
        yield _as_matrix(n, flat)


def enumerate_ball(
    n: int,
    bound: int,
    consumer: Callable[[Matrix], object],
    partitions: int = 1,
) -> int:
    """Deliver each ball element to ``consumer`` exactly once; return the count.

    With ``partitions > 1`` the work is split by partition key and run on a
    thread pool, so ``consumer`` must tolerate concurrent calls.
    """
    keys = partition_keys(n, bound)

    def run(part):
        k = 0
        for flat in _iter_partition(n, bound, part):
            consumer(_as_matrix(n, flat))
            k += 1
        return k

    if partitions == 1:
        return run(keys)
    with ThreadPoolExecutor(max_workers=partitions) as pool:
        return sum(pool.map(run, _split(keys, partitions)))


def entry_stream(n: int, bound: int, i: int, j: int) -> Iterator[int]:
    """Yield entry (i, j) (1-based) of every ball element, in ball order."""
    _check_position(n, i, j)
    for g in iter_ball(n, bound):
        yield g[i - 1][j - 1]


def _stats_sl2(bound: int, partitions: int) -> BallStats:
    from ._kernels import sl2_ball_histograms

    if bound > MAX_KERNEL_BOUND:
        raise CountOverflowError(f"B={bound} exceeds the kernel limit {MAX_KERNEL_BOUND}")
    radius = math.isqrt(bound)
    keys = np.array(partition_keys(2, bound), dtype=np.int64)
    parts = _split(list(keys), partitions)

    def run(part):
        return sl2_ball_histograms(bound, np.array(part, dtype=np.int64), radius)

    if partitions == 1:
        results = [run(parts[0])]
    else:
        with ThreadPoolExecutor(max_workers=partitions) as pool:
            results = list(pool.map(run, parts))
    total = 0
    dense = np.zeros((4, 2 * radius + 1), dtype=np.int64)
    for t, h in results:
        total += int(t)
        dense += h
    hists = {
        (k // 2 + 1, k % 2 + 1): EntryHistogram.from_dense(dense[k], radius)
        for k in range(4)
    }
    return BallStats(2, bound, total, hists)


def _stats_sl3(bound: int, partitions: int) -> BallStats:
    keys = partition_keys(3, bound)

    def run(part):
        counters = [Counter() for _ in range(9)]
        k = 0
        for flat in _iter_partition(3, bound, part):
            for pos, v in enumerate(flat):
                counters[pos][v] += 1
            k += 1
        return k, counters

    if partitions == 1:
        results = [run(keys)]
    else:
        with ThreadPoolExecutor(max_workers=partitions) as pool:
            results = list(pool.map(run, _split(keys, partitions)))
    total = sum(r[0] for r in results)
    merged = [Counter() for _ in range(9)]
    for _, counters in results:
        for acc, c in zip(merged, counters):
            acc.update(c)
    hists = {
        (pos // 3 + 1, pos % 3 + 1): EntryHistogram.from_mapping(merged[pos])
        for pos in range(9)
    }
    return BallStats(3, bound, total, hists)


def ball_statistics(n: int, bound: int, partitions: int = 1) -> BallStats:
    """Count the ball and histogram the values of every entry position."""
    _check_args(n, bound)
    if n == 2:
        return _stats_sl2(bound, partitions)
    return _stats_sl3(bound, partitions)


def count_ball(n: int, bound: int, partitions: int = 1) -> int:
    """Exact cardinality of {g in SL_n(Z) : ||g||^2 <= bound}."""
    return ball_statistics(n, bound, partitions).count


def ball_count(n: int, bound: int, partitions: int = 1) -> BallCount:
    return BallCount(n, bound, count_ball(n, bound, partitions), asymptotic_constant(n))
