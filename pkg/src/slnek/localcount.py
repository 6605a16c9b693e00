"""Exact counts in SL_n over Z/qZ for squarefree q.

Closed forms for the group order and for the number of elements with a
prescribed entry equal to zero, plus an exhaustive-search oracle that the
closed forms are tested against.
"""
from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .arith import FactorSieve
from .errors import NotPrimeError, NotSquarefreeError, SearchSpaceTooLargeError

BRUTE_FORCE_LIMIT = 10**7


@dataclass(frozen=True)
class FiniteCount:
    n: int
    q: int
    position: tuple[int, int]
    total: int
    zero_entry: int

    @property
    def share(self) -> Fraction:
        return Fraction(self.zero_entry, self.total)


def _check_prime(p: int) -> None:
    if p < 2 or any(p % d == 0 for d in range(2, math.isqrt(p) + 1)):
        raise NotPrimeError(f"{p} is not prime")


def _squarefree_primes(q: int) -> list[int]:
    if q < 1:
        raise NotSquarefreeError(f"modulus must be positive, got {q}")
    fac = FactorSieve(max(q, 2)).factorize(q)
    if any(e > 1 for e in fac.values()):
        raise NotSquarefreeError(f"{q} is not squarefree")
    return sorted(fac)


def sl_order(n: int, p: int) -> int:
    """#SL_n(F_p) = (p^n - 1)(p^n - p)...(p^n - p^(n-1)) / (p - 1)."""
    _check_prime(p)
    num = 1
    for k in range(n):
        num *= p**n - p**k
    return num // (p - 1)


def zero_entry_count(n: int, p: int) -> int:
    """#{g in SL_n(F_p) : g_ij = 0}; the same for every position (i, j)."""
    _check_prime(p)
    num = p ** (n - 1) - 1
    for k in range(1, n):
        num *= p**n - p**k
    return num // (p - 1)


def sl_order_q(n: int, q: int) -> int:
    """#SL_n(Z/qZ), i.e. the index of the principal congruence subgroup."""
    return math.prod(sl_order(n, p) for p in _squarefree_primes(q))


def zero_entry_count_q(n: int, q: int) -> int:
    return math.prod(zero_entry_count(n, p) for p in _squarefree_primes(q))


def expected_share(n: int, q: int) -> Fraction:
    """Fraction of SL_n(Z/qZ) with a fixed entry equal to 0."""
    return Fraction(zero_entry_count_q(n, q), sl_order_q(n, q))


def finite_count(n: int, q: int, position: tuple[int, int] = (1, 1)) -> FiniteCount:
    return FiniteCount(n, q, position, sl_order_q(n, q), zero_entry_count_q(n, q))


def _det_mod(flat: np.ndarray, n: int, q: int) -> np.ndarray:
    """Row-wise determinant mod q of flattened n x n matrices."""
    m = [[flat[:, r * n + c] for c in range(n)] for r in range(n)]
    if n == 1:
        return m[0][0] % q
    if n == 2:
        return (m[0][0] * m[1][1] - m[0][1] * m[1][0]) % q
    if n == 3:
        t0 = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) % q
        t1 = (m[1][0] * m[2][2] - m[1][2] * m[2][0]) % q
        t2 = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) % q
        return (m[0][0] * t0 - m[0][1] * t1 + m[0][2] * t2) % q
    raise ValueError("brute force supports n <= 3")


def brute_force_count(
    n: int,
    q: int,
    predicate: Callable[[tuple[tuple[int, ...], ...]], bool] | None = None,
) -> int:
    """Count matrices over Z/qZ with det = 1 satisfying ``predicate``.

    Every one of the q^(n^2) matrices is examined; the search is split by
    the residue of the first entry. ``predicate`` receives the matrix as a
    tuple of row tuples with entries in [0, q).
    """
    if q < 1 or n < 1:
        raise ValueError("need n >= 1 and q >= 1")
    if q ** (n * n) > BRUTE_FORCE_LIMIT:
        raise SearchSpaceTooLargeError(
            f"q^(n^2) = {q}^{n * n} exceeds the exhaustive-search guard {BRUTE_FORCE_LIMIT}"
        )
    if q == 1:
        # Z/1Z is the zero ring: one matrix, and det = 0 = 1 there.
        return int(predicate is None or bool(predicate(((0,) * n,) * n)))
    rest = n * n - 1
    tail = np.indices((q,) * rest, dtype=np.int64).reshape(rest, -1).T
    total = 0
    for first in range(q):
        flat = np.hstack([np.full((tail.shape[0], 1), first, dtype=np.int64), tail])
        sl = flat[_det_mod(flat, n, q) == 1 % q]
        if predicate is None:
            total += sl.shape[0]
            continue
        for row in sl.tolist():
            if predicate(tuple(tuple(row[r * n:(r + 1) * n]) for r in range(n))):
                total += 1
    return total


def zero_at(i: int, j: int) -> Callable:
    """Predicate g_ij == 0 (1-based position)."""

    def pred(g):
        return g[i - 1][j - 1] == 0

    pred.__name__ = f"zero_at_{i}_{j}"
    return pred
