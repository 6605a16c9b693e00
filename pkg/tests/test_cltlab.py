import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from slnek.arith import FactorSieve, PrimeSet, SieveMoments, prime_threshold, sieve_moments
from slnek.cltlab import (
    EmpiricalDistribution,
    eks_experiment,
    ks_distance,
    normal_cdf,
    recentering_decompose,
    standardize_full,
    standardize_truncated,
)
from slnek.errors import DegenerateMomentsError
from slnek.matgen import ball_statistics

mpmath.mp.dps = 30


def gauss_integral(x):
    """Phi(x) by adaptive quadrature of the density at 30 digits."""
    dens = lambda t: mpmath.exp(-t * t / 2) / mpmath.sqrt(2 * mpmath.pi)
    return float(mpmath.quad(dens, [-mpmath.inf, 0, x]))


def ks_oracle(samples):
    """Brute-force KS: evaluate |F - Phi| at each sample and just left of it."""
    xs = sorted(samples)
    n = len(xs)
    worst = 0.0
    for v in set(xs):
        f_right = sum(1 for s in xs if s <= v) / n
        f_left = sum(1 for s in xs if s < v) / n
        phi = gauss_integral(v)
        worst = max(worst, abs(f_right - phi), abs(f_left - phi))
    return worst


def test_standardize_full_examples():
    t = 1e4
    ll = math.log(math.log(t))
    assert standardize_full(ll, t) == 0
    assert standardize_full(0, math.exp(math.exp(4))) == pytest.approx(-2, abs=1e-12)
    assert standardize_full(3, t) == pytest.approx(0.5233, abs=1e-4)
    with pytest.raises(ValueError):
        standardize_full(1, math.e)


def test_standardize_truncated_examples():
    m = sieve_moments(PrimeSet(3, (2, 3)), 2)
    assert standardize_truncated(m.mu, m) == 0
    assert standardize_truncated(0, m) == pytest.approx(-7 / math.sqrt(59), abs=1e-12)
    assert standardize_truncated(0, m) == pytest.approx(-0.9113, abs=1e-4)
    w = 2.5
    assert standardize_truncated(m.mu + 2 * (w - m.mu), m) == pytest.approx(2 * standardize_truncated(w, m))
    with pytest.raises(DegenerateMomentsError):
        standardize_truncated(0, SieveMoments(0.0, 0.0))


def test_recentering_identity():
    t = 1e4
    sieve = FactorSieve(10**4)
    m = sieve_moments(PrimeSet.upto(prime_threshold(t), sieve), 2)
    scale, shift = recentering_decompose(t, m)
    for w in range(0, 12):
        assert abs(standardize_full(w, t) - scale * (standardize_truncated(w, m) + shift)) <= 1e-12
    assert recentering_decompose(t, m, w=7) == (scale, shift)


@given(st.floats(-50, 50), st.floats(20, 1e12), st.floats(0.1, 20), st.floats(0.01, 10))
def test_recentering_identity_property(w, t, mu, sigma2):
    m = SieveMoments(mu, sigma2)
    scale, shift = recentering_decompose(t, m)
    lhs = standardize_full(w, t)
    rhs = scale * (standardize_truncated(w, m) + shift)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs), abs(w) * scale / m.sigma)


def test_normal_cdf_examples():
    assert normal_cdf(0) == 0.5
    assert normal_cdf(1.96) == pytest.approx(gauss_integral(1.96), abs=1e-12)
    assert normal_cdf(1.96) == pytest.approx(0.97500, abs=1e-5)
    for x in (0.5, 1, 2, 3):
        assert normal_cdf(-x) + normal_cdf(x) == pytest.approx(1, abs=1e-15)


def test_normal_cdf_against_quadrature():
    for x in np.linspace(-6, 6, 97):
        assert abs(normal_cdf(float(x)) - gauss_integral(float(x))) <= 1e-10


def test_normal_cdf_monotone():
    vals = [normal_cdf(float(x)) for x in np.linspace(-8, 8, 10**4)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert 0 < vals[0] and vals[-1] < 1


def test_ks_examples():
    assert ks_distance(EmpiricalDistribution((0.0,), (1,))) == 0.5
    v = standardize_full(0, 2.0**10)  # every B = 2 entry has omega = 0
    emp = EmpiricalDistribution((v,), (4,))
    assert ks_distance(emp) == pytest.approx(max(1 - normal_cdf(v), normal_cdf(v)))
    with pytest.raises(ValueError):
        ks_distance(EmpiricalDistribution((), ()))


@given(st.lists(st.integers(-12, 12), min_size=1, max_size=40))
def test_ks_against_oracle(samples):
    vals = [s / 4 for s in samples]
    acc = {}
    for v in vals:
        acc[v] = acc.get(v, 0) + 1
    ks = ks_distance(EmpiricalDistribution.from_mapping(acc))
    assert 0 <= ks <= 1
    assert ks == pytest.approx(ks_oracle(vals), abs=1e-12)


def test_empirical_cdf_steps():
    emp = EmpiricalDistribution.from_mapping({0.5: 1, -1.0: 3})
    assert emp.values == (-1.0, 0.5)
    assert emp.cdf(-2) == 0 and emp.cdf(-1.0) == 0.75 and emp.cdf(0.5) == 1


@pytest.fixture(scope="module")
def small_grid():
    return eks_experiment(2, (1, 1), [10**5, 10**4, 250**2])


def test_eks_grid(small_grid):
    assert [p.bound for p in small_grid] == [10**4, 250**2, 10**5]
    for p in small_grid:
        count = ball_statistics(2, p.bound).count
        assert p.dist_full.total == p.dist_truncated.total == count
        assert sum(p.omega_full.values()) == count == p.ks_full.sample_size
        assert 0 <= p.ks_full.ks <= 1 and 0 <= p.ks_truncated.ks <= 1
        assert p.recentering_error <= 1e-12
        assert p.truncation_violations == 0
        assert p.ks_truncated.ks <= p.ks_full.ks + p.gap_allowance
        assert p.zero_entries == ball_statistics(2, p.bound).entry_histogram(1, 1).as_dict()[0]


def test_eks_truncation_shift_per_sample(small_grid):
    """omega - omega_P never exceeds 1/eps(T) on any entry."""
    sieve = FactorSieve(math.isqrt(10**5))
    for p in small_grid:
        stats = ball_statistics(2, p.bound)
        full, trunc = sieve.omega_table(), sieve.omega_table(p.z)
        for h in stats.histograms.values():
            a = np.abs(h.values)
            assert np.all(full[a] - trunc[a] <= 1 / p.eps)


def test_eks_position_symmetry():
    (a,) = eks_experiment(2, (1, 1), [40000])
    (b,) = eks_experiment(2, (2, 2), [40000])
    assert a.omega_full == b.omega_full and a.omega_truncated == b.omega_truncated
    (c,) = eks_experiment(2, (1, 2), [40000])
    (d,) = eks_experiment(2, (2, 1), [40000])
    assert c.dist_full == d.dist_full and c.ks_full.ks == d.ks_full.ks


def test_eks_empty_and_invalid():
    assert eks_experiment(2, (1, 1), []) == []
    with pytest.raises(ValueError):
        eks_experiment(2, (1, 1), [100])

