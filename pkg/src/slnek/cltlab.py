"""Standardized omega statistics of ball entries and their distance to N(0, 1).

Two standardizations of w = omega(g_ij) are compared with the Gaussian:

* full:      (w - loglog T) / sqrt(loglog T)
* truncated: (w_P - mu_P) / sigma_P, with w_P counting primes <= z = T^eps(T)

They are linked by ``full = scale * (truncated(w) + shift)`` with
``scale = sigma_P / sqrt(loglog T)`` and ``shift = (mu_P - loglog T) / sigma_P``.
"""
from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .arith import (
    DEFAULT_PSI,
    FactorSieve,
    PrimeSet,
    SieveMoments,
    epsilon,
    loglog,
    sieve_moments,
)
from .errors import DegenerateMomentsError
from .matgen import ball_statistics
from .sievestats import omega_histogram

RECENTERING_TOL = 1e-12


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Step-function distribution of standardized values (ties pre-aggregated)."""

    values: tuple[float, ...]
    counts: tuple[int, ...]

    @classmethod
    def from_mapping(cls, hist: Mapping[float, int]) -> EmpiricalDistribution:
        keys = sorted(k for k, c in hist.items() if c)
        return cls(tuple(float(k) for k in keys), tuple(int(hist[k]) for k in keys))

    @property
    def total(self) -> int:
        return sum(self.counts)

    def cdf(self, v: float) -> float:
        """Right-continuous empirical CDF."""
        if not self.counts:
            raise ValueError("empty distribution")
        below = sum(c for x, c in zip(self.values, self.counts) if x <= v)
        return below / self.total


@dataclass(frozen=True)
class KsReport:
    bound: int
    position: tuple[int, int]
    kind: str
    ks: float
    sample_size: int


@dataclass
class EksPoint:
    """Everything computed for one ball size along the grid."""

    bound: int
    t: float
    loglog_t: float
    eps: float
    z: float
    moments: SieveMoments
    omega_full: dict[int, int]
    omega_truncated: dict[int, int]
    dist_full: EmpiricalDistribution = field(repr=False)
    dist_truncated: EmpiricalDistribution = field(repr=False)
    ks_full: KsReport
    ks_truncated: KsReport
    zero_entries: int
    scale: float
    shift: float
    recentering_error: float
    truncation_violations: int

    @property
    def gap_allowance(self) -> float:
        """(1/eps(T)) / sqrt(loglog T): worst per-sample truncation shift."""
        return (1 / self.eps) / math.sqrt(self.loglog_t)


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def standardize_full(w: float, t: float) -> float:
    ll = loglog(t)
    return (w - ll) / math.sqrt(ll)


def standardize_truncated(w: float, moments: SieveMoments) -> float:
    if moments.sigma2 <= 0:
        raise DegenerateMomentsError("sigma_P is zero")
    return (w - moments.mu) / moments.sigma


def recentering_decompose(
    t: float, moments: SieveMoments, w: float | None = None
) -> tuple[float, float]:
    """(scale, shift) with standardize_full(w, t) == scale * (standardize_truncated(w) + shift).

    The pair does not depend on w; the argument is accepted for symmetry
    with the standardizations.
    """
    if moments.sigma2 <= 0:
        raise DegenerateMomentsError("sigma_P is zero")
    ll = loglog(t)
    sigma = moments.sigma
    return sigma / math.sqrt(ll), (moments.mu - ll) / sigma


def ks_distance(emp: EmpiricalDistribution) -> float:
    """sup_v max(|F(v) - Phi(v)|, |F(v-) - Phi(v)|) over the jump points v."""
    x = emp.total
    if x == 0:
        raise ValueError("empty distribution")
    best = 0.0
    below = 0
    for v, c in zip(emp.values, emp.counts):
        phi = normal_cdf(v)
        left = below / x
        below += c
        best = max(best, abs(below / x - phi), abs(left - phi))
    return best


def standardized_distribution(
    whist: Mapping[int, int], transform
) -> EmpiricalDistribution:
    acc: dict[float, int] = {}
    for w, c in whist.items():
        v = transform(w)
        acc[v] = acc.get(v, 0) + c
    return EmpiricalDistribution.from_mapping(acc)


def truncation_violations(
    values: np.ndarray, sieve: FactorSieve, z: float
) -> int:
    """Number of distinct nonzero values c with omega(c) - omega_P(c) > log|c| / log z."""
    a = np.unique(np.abs(values))
    a = a[a > 1]
    if a.size == 0:
        return 0
    gap = sieve.omega_table()[a] - sieve.omega_table(z)[a]
    return int(np.count_nonzero(gap > np.log(a) / math.log(z)))


def eks_point(
    n: int,
    position: tuple[int, int],
    bound: int,
    psi: float = DEFAULT_PSI,
    partitions: int = 1,
    sieve: FactorSieve | None = None,
) -> EksPoint:
    t = math.sqrt(bound)
    eps = epsilon(t, psi)
    z = t**eps
    stats = ball_statistics(n, bound, partitions)
    radius = math.isqrt(bound)
    if sieve is None or sieve.limit < radius:
        sieve = FactorSieve(max(radius, 2))
    prime_set = PrimeSet.upto(z, sieve)
    moments = sieve_moments(prime_set, n)
    hist = stats.entry_histogram(*position)

    w_full = omega_histogram(hist, sieve)
    w_trunc = omega_histogram(hist, sieve, prime_set)
    ll = loglog(t)
    dist_full = standardized_distribution(w_full, lambda w: standardize_full(w, t))
    dist_trunc = standardized_distribution(w_trunc, lambda w: standardize_truncated(w, moments))

    scale, shift = recentering_decompose(t, moments)
    err = max(
        (abs(standardize_full(w, t) - scale * (standardize_truncated(w, moments) + shift))
         for w in w_full),
        default=0.0,
    )
    all_values = np.concatenate([h.values for h in stats.histograms.values()])
    zero_idx = np.flatnonzero(hist.values == 0)
    zeros = int(hist.counts[zero_idx[0]]) if zero_idx.size else 0

    return EksPoint(
        bound=bound,
        t=t,
        loglog_t=ll,
        eps=eps,
        z=z,
        moments=moments,
        omega_full=w_full,
        omega_truncated=w_trunc,
        dist_full=dist_full,
        dist_truncated=dist_trunc,
        ks_full=KsReport(bound, position, "full", ks_distance(dist_full), stats.count),
        ks_truncated=KsReport(bound, position, "truncated", ks_distance(dist_trunc), stats.count),
        zero_entries=zeros,
        scale=scale,
        shift=shift,
        recentering_error=err,
        truncation_violations=truncation_violations(all_values, sieve, z),
    )


def eks_experiment(
    n: int,
    position: tuple[int, int],
    bounds: Sequence[int],
    psi: float = DEFAULT_PSI,
    partitions: int = 1,
) -> list[EksPoint]:
    """One :class:`EksPoint` per ball size, in ascending order of the bound."""
    bounds = sorted(bounds)
    if not bounds:
        return []
    sieve = FactorSieve(max(math.isqrt(bounds[-1]), 2))
    return [eks_point(n, position, b, psi, partitions, sieve) for b in bounds]
