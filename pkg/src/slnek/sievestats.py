"""Congruence counts A_q, the product sets D_k(P), and truncated moment sums.

Every statistic here is a function of the histogram of entry values, so a
ball is enumerated once and the histogram feeds everything downstream.
Streams of plain integers are accepted as well and histogrammed first.
"""
from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .arith import FactorSieve, PrimeSet, SieveMoments, gaussian_moment, sieve_moments
from .errors import DegenerateMomentsError, NotSquarefreeError, SieveLimitError
from .localcount import expected_share
from .matgen import EntryHistogram, ball_statistics

D_K_CAP = 2**63 - 1


@dataclass(frozen=True)
class CongruenceReport:
    q: int
    observed: int
    expected: float
    residual: float
    x: int
    expected_exact: Fraction

    @property
    def residual_exact(self) -> Fraction:
        return self.observed - self.expected_exact


@dataclass(frozen=True)
class MomentReport:
    k: int
    raw_sum: float
    normalized: float
    reference: float

    @property
    def deviation(self) -> float:
        return self.normalized - self.reference


@dataclass(frozen=True)
class ProductSet:
    """Ascending members of D_k(P) up to a cap, with a tally of those above it."""

    values: list[int]
    overflow: int


@dataclass(frozen=True)
class ResidualRow:
    bound: int
    q: int
    residual: float
    x: int


def as_histogram(entries) -> EntryHistogram:
    if isinstance(entries, EntryHistogram):
        return entries
    if isinstance(entries, dict):
        return EntryHistogram.from_mapping(entries)
    return EntryHistogram.from_iterable(entries)


def congruence_counts(
    entries: EntryHistogram | Iterable[int],
    q_list: Sequence[int],
    n: int,
) -> list[CongruenceReport]:
    """A_q = #{a : q | a} against (h(q)/q) x, for each squarefree q.

    Zero is divisible by every q and counts toward every A_q.
    """
    hist = as_histogram(entries)
    x = hist.total
    reports = []
    for q in q_list:
        share = expected_share(n, q)
        observed = int(hist.counts[hist.values % q == 0].sum())
        expected = share * x
        reports.append(
            CongruenceReport(q, observed, float(expected), float(observed - expected), x, expected)
        )
    return reports


def squarefree_moduli(q_max: int) -> list[int]:
    if q_max < 1:
        return []
    sieve = FactorSieve(max(q_max, 2))
    return [q for q in range(1, q_max + 1) if sieve.is_squarefree(q)]


def squarefree_products(prime_set: PrimeSet, k: int, cap: int = D_K_CAP) -> ProductSet:
    """Products of at most k distinct primes of P, including the empty product 1."""
    if k < 0:
        raise ValueError("k must be non-negative")
    primes = sorted(prime_set.primes)
    found: list[int] = []

    def walk(start: int, depth: int, value: int):
        found.append(value)
        if depth == k:
            return
        for idx in range(start, len(primes)):
            nxt = value * primes[idx]
            if nxt > cap:
                break  # primes ascend, so later ones overflow too
            walk(idx + 1, depth + 1, nxt)

    if cap >= 1:
        walk(0, 0, 1)
    possible = sum(math.comb(len(primes), j) for j in range(k + 1))
    return ProductSet(sorted(found), possible - len(found))


def omega_histogram(
    entries: EntryHistogram | Iterable[int],
    sieve: FactorSieve,
    prime_set: PrimeSet | None = None,
) -> dict[int, int]:
    """Exact histogram {omega value: count}; omega_P when ``prime_set`` is given."""
    hist = as_histogram(entries)
    if hist.values.size == 0:
        return {}
    top = int(np.abs(hist.values).max())
    if top > sieve.limit:
        raise SieveLimitError(f"entry {top} exceeds sieve limit {sieve.limit}")
    table = sieve.omega_table(None if prime_set is None else prime_set.z)
    w = table[np.abs(hist.values)]
    out = np.bincount(w, weights=hist.counts.astype(np.float64))
    # counts stay far below 2^53, so the float round trip is exact
    return {v: int(c) for v, c in enumerate(np.rint(out).astype(np.int64)) if c}


def moment_from_histogram(whist: dict[int, int], k: int, mu: float) -> float:
    return math.fsum(c * (v - mu) ** k for v, c in whist.items())


def moment_sum(
    entries: EntryHistogram | Iterable[int],
    prime_set: PrimeSet,
    k: int,
    mu: float,
    sieve: FactorSieve,
) -> float:
    """Sum over the entries of (omega_P(a) - mu)^k."""
    return moment_from_histogram(omega_histogram(entries, sieve, prime_set), k, mu)


def moment_reports(
    whist: dict[int, int], moments: SieveMoments, k_max: int
) -> list[MomentReport]:
    if moments.sigma2 <= 0:
        raise DegenerateMomentsError("sigma_P is zero; the prime set is degenerate")
    x = sum(whist.values())
    sigma = moments.sigma
    out = []
    for k in range(1, k_max + 1):
        raw = moment_from_histogram(whist, k, moments.mu)
        ref = gaussian_moment(k) if k % 2 == 0 else 0.0
        out.append(MomentReport(k, raw, raw / (x * sigma**k), ref))
    return out


def normalized_moments(
    entries: EntryHistogram | Iterable[int],
    prime_set: PrimeSet,
    n: int,
    k_max: int,
    sieve: FactorSieve,
) -> list[MomentReport]:
    """raw_sum / (x sigma_P^k) for k = 1..k_max, against C_k (even) or 0 (odd)."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    moments = sieve_moments(prime_set, n)
    return moment_reports(omega_histogram(entries, sieve, prime_set), moments, k_max)


def residual_profile(
    n: int,
    position: tuple[int, int],
    q_list: Sequence[int],
    bounds: Sequence[int],
    partitions: int = 1,
) -> tuple[list[ResidualRow], dict[int, float]]:
    """|r_q| across ball sizes, plus the fitted slope of log(|r_q|/x) on log x.

    The slope is descriptive only; no decay rate is asserted.
    """
    for q in q_list:
        if not FactorSieve(max(q, 2)).is_squarefree(q):
            raise NotSquarefreeError(f"{q} is not squarefree")
    rows = []
    for bound in sorted(bounds):
        stats = ball_statistics(n, bound, partitions)
        for rep in congruence_counts(stats.entry_histogram(*position), q_list, n):
            rows.append(ResidualRow(bound, rep.q, abs(rep.residual), rep.x))
    slopes = {}
    for q in q_list:
        pts = [(math.log(r.x), math.log(r.residual / r.x)) for r in rows
               if r.q == q and r.x > 0 and r.residual > 0]
        if len(pts) >= 2:
            xs, ys = zip(*pts)
            slopes[q] = float(np.polyfit(xs, ys, 1)[0])
        else:
            slopes[q] = math.nan
    return rows, slopes

