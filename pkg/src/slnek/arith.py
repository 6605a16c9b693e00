"""Prime-factor arithmetic: smallest-prime-factor sieve, omega and its
truncation to a prime set, the local densities h(p)/p, and the sieve-side
mean and variance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import NotPrimeError, NotSquarefreeError, SieveLimitError

DEFAULT_PSI = 0.25
# Above this prime threshold mu_P and sigma_P^2 are summed in floating point.
EXACT_MOMENTS_LIMIT = 10**4


class FactorSieve:
    """Smallest-prime-factor table for 0 <= m <= limit.

    Built once and never mutated afterwards, so one instance can be shared
    between threads.
    """

    def __init__(self, limit: int):
        if limit < 1:
            raise ValueError("sieve limit must be positive")
        self.limit = int(limit)
        spf = np.zeros(self.limit + 1, dtype=np.int64)
        for p in range(2, math.isqrt(self.limit) + 1):
            if spf[p] == 0:
                block = spf[p * p::p]
                block[block == 0] = p
        idx = np.arange(self.limit + 1, dtype=np.int64)
        unset = (spf == 0) & (idx >= 2)
        spf[unset] = idx[unset]
        self.spf = spf
        self._omega_tables: dict[float, np.ndarray] = {}

    @cached_property
    def primes(self) -> np.ndarray:
        idx = np.arange(self.limit + 1)
        return idx[(idx >= 2) & (self.spf == idx)]

    def _check(self, m: int) -> int:
        a = abs(int(m))
        if a > self.limit:
            raise SieveLimitError(f"|{m}| exceeds sieve limit {self.limit}")
        return a

    def is_prime(self, p: int) -> bool:
        p = int(p)
        if p < 2:
            return False
        self._check(p)
        return int(self.spf[p]) == p

    def factorize(self, m: int) -> dict[int, int]:
        """Prime factorization of |m| as {prime: exponent}; empty for 0 and 1."""
        a = self._check(m)
        out: dict[int, int] = {}
        while a > 1:
            p = int(self.spf[a])
            a //= p
            out[p] = out.get(p, 0) + 1
        return out

    def is_squarefree(self, q: int) -> bool:
        if q < 1:
            return False
        return all(e == 1 for e in self.factorize(q).values())

    def omega(self, m: int) -> int:
        """Distinct prime factors of |m|, with omega(0) = 0."""
        return len(self.factorize(m))

    def omega_truncated(self, m: int, prime_set: PrimeSet) -> int:
        """Distinct prime factors of |m| that are <= prime_set.z; 0 at m = 0."""
        return sum(1 for p in self.factorize(m) if p <= prime_set.z)

    def omega_table(self, z: float | None = None) -> np.ndarray:
        """Dense array t with t[m] = number of distinct primes p <= z dividing m.

        ``z=None`` counts all primes (plain omega). t[0] is 0 by convention.
        """
        key = math.inf if z is None else float(z)
        if key not in self._omega_tables:
            table = np.zeros(self.limit + 1, dtype=np.int64)
            for p in self.primes:
                if p > key:
                    break
                table[p::p] += 1
            self._omega_tables[key] = table
        return self._omega_tables[key]


@dataclass(frozen=True)
class PrimeSet:
    """All primes <= z."""

    z: float
    primes: tuple[int, ...]

    @classmethod
    def upto(cls, z: float, sieve: FactorSieve | None = None) -> PrimeSet:
        top = math.floor(z)
        if top < 2:
            return cls(float(z), ())
        if sieve is None:
            sieve = FactorSieve(top)
        elif top > sieve.limit:
            raise SieveLimitError(f"z={z} exceeds sieve limit {sieve.limit}")
        ps = sieve.primes
        return cls(float(z), tuple(int(p) for p in ps[ps <= top]))

    def __len__(self):
        return len(self.primes)

    def __contains__(self, p):
        return p in self.primes


@dataclass(frozen=True)
class SieveMoments:
    """mu_P and sigma_P^2, with exact rational values when available."""

    mu: float
    sigma2: float
    mu_exact: Fraction | None = None
    sigma2_exact: Fraction | None = None

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)


def omega(m: int, sieve: FactorSieve) -> int:
    return sieve.omega(m)


def omega_truncated(m: int, prime_set: PrimeSet, sieve: FactorSieve) -> int:
    return sieve.omega_truncated(m, prime_set)


def truncation_gap_ok(m: int, z: float, sieve: FactorSieve) -> bool:
    """Check omega(m) - omega_P(m) <= log|m| / log z for P = primes <= z.

    Holds for every |m| > 1 and z > 1: each prime factor above z
    contributes more than log z to log|m|.
    """
    if abs(m) <= 1:
        raise ValueError("need |m| > 1")
    if z <= 1:
        raise ValueError("need z > 1")
    fac = sieve.factorize(m)
    gap = sum(1 for p in fac if p > z)
    return gap <= math.log(abs(m)) / math.log(z)


def loglog(t: float) -> float:
    if t <= math.e:
        raise ValueError(f"loglog undefined or nonpositive at T={t}")
    return math.log(math.log(t))


def epsilon(t: float, psi: float = DEFAULT_PSI) -> float:
    """Truncation exponent 1/(loglog T)^psi, so that P = primes <= T^eps."""
    if not 0 < psi < 0.5:
        raise ValueError("psi must lie in (0, 1/2)")
    if t < math.exp(math.e):
        raise ValueError(f"T={t} must be at least e^e")
    return loglog(t) ** -psi


def prime_threshold(t: float, psi: float = DEFAULT_PSI) -> float:
    """z = T^eps(T)."""
    return t ** epsilon(t, psi)


def local_density(n: int, p: int, sieve: FactorSieve | None = None) -> Fraction:
    """h(p)/p = (p^(n-1) - 1) / (p^n - 1)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if not _is_prime(p, sieve):
        raise NotPrimeError(f"{p} is not prime")
    return Fraction(p ** (n - 1) - 1, p**n - 1)


def h_of(q: int, n: int, sieve: FactorSieve | None = None) -> Fraction:
    """h(q) for squarefree q; h(q)/q is the product of local densities."""
    if q < 1:
        raise ValueError("q must be a positive integer")
    if sieve is None or q > sieve.limit:
        sieve = FactorSieve(max(q, 2))
    fac = sieve.factorize(q)
    if any(e > 1 for e in fac.values()):
        raise NotSquarefreeError(f"{q} is not squarefree")
    share = Fraction(1)
    for p in fac:
        share *= Fraction(p ** (n - 1) - 1, p**n - 1)
    return q * share


def sieve_moments(prime_set: PrimeSet, n: int) -> SieveMoments:
    """mu_P = sum h(p)/p and sigma_P^2 = sum h(p)/p (1 - h(p)/p)."""
    if prime_set.z <= EXACT_MOMENTS_LIMIT:
        mu = Fraction(0)
        s2 = Fraction(0)
        for p in prime_set.primes:
            d = Fraction(p ** (n - 1) - 1, p**n - 1)
            mu += d
            s2 += d * (1 - d)
        return SieveMoments(float(mu), float(s2), mu, s2)
    ps = np.asarray(prime_set.primes, dtype=np.float64)
    d = (ps ** (n - 1) - 1) / (ps**n - 1)
    return SieveMoments(math.fsum(d), math.fsum(d * (1 - d)))


def gaussian_moment(k: int) -> float:
    """C_k = Gamma(k+1) / (2^(k/2) Gamma(k/2 + 1)); (k-1)!! for even k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k <= 170:
        return math.gamma(k + 1) / (2 ** (k / 2) * math.gamma(k / 2 + 1))
    return math.exp(math.lgamma(k + 1) - (k / 2) * math.log(2) - math.lgamma(k / 2 + 1))


def _is_prime(p: int, sieve: FactorSieve | None) -> bool:
    if p < 2:
        return False
    if sieve is not None and p <= sieve.limit:
        return sieve.is_prime(p)
    return all(p % d for d in range(2, math.isqrt(p) + 1))
