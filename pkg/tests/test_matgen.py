import math
from collections import Counter

import numpy as np
import pytest

from slnek import matgen
from slnek.errors import CountOverflowError, UnsupportedDimensionError
from slnek.matgen import (
    NormBall,
    UnimodularMatrix,
    asymptotic_constant,
    ball_statistics,
    count_ball,
    entry_stream,
    enumerate_ball,
    iter_ball,
)

from oracles import cube_search_sl2, cube_search_sl3

# Frozen from the first pilot run (see README); the compiled kernel and the
# pure-Python generator agree on every histogram up to B = 10^5.
REGRESSION_COUNTS = {10**4: 60260, 10**6: 6000052, 4 * 10**6: 24001604}


def flat(g):
    return tuple(v for row in g for v in row)


@pytest.fixture(scope="module")
def sl3_oracle():
    return cube_search_sl3(12)


def test_empty_and_tiny_balls():
    assert list(iter_ball(2, 1)) == []
    assert count_ball(2, 0) == 0
    ball = list(iter_ball(2, 2))
    assert sorted(ball) == sorted([
        ((1, 0), (0, 1)), ((-1, 0), (0, -1)), ((0, 1), (-1, 0)), ((0, -1), (1, 0)),
    ])
    assert count_ball(2, 2) == 4


def test_sl3_signed_permutations():
    ball = list(iter_ball(3, 3))
    assert len(ball) == 24 == count_ball(3, 3)
    for g in ball:
        assert sorted(abs(v) for v in flat(g)) == [0] * 6 + [1] * 3


@pytest.mark.parametrize("bound", range(0, 51))
def test_sl2_matches_cube_search(bound):
    expected = Counter(cube_search_sl2(bound))
    assert Counter(flat(g) for g in iter_ball(2, bound)) == expected
    assert count_ball(2, bound) == sum(expected.values())


@pytest.mark.parametrize("bound", range(0, 13))
def test_sl3_matches_cube_search(bound, sl3_oracle):
    expected = Counter(f for f in sl3_oracle if sum(v * v for v in f) <= bound)
    assert Counter(flat(g) for g in iter_ball(3, bound)) == expected
    assert count_ball(3, bound) == sum(expected.values())


@pytest.mark.parametrize("n,bound", [(2, 2), (2, 37), (2, 400), (3, 3), (3, 9), (3, 14)])
def test_lexicographic_order_and_exactness(n, bound):
    flats = [flat(g) for g in iter_ball(n, bound)]
    assert flats == sorted(flats)
    assert len(set(flats)) == len(flats)
    for g in iter_ball(n, bound):
        m = UnimodularMatrix(g)
        assert m.squared_norm <= bound


@pytest.mark.parametrize("n,bound", [(2, 300), (3, 10)])
@pytest.mark.parametrize("partitions", [2, 8])
def test_partition_independence_of_delivery(n, bound, partitions):
    seen_single, seen_split = [], []
    c1 = enumerate_ball(n, bound, lambda g: seen_single.append(g))
    c2 = enumerate_ball(n, bound, lambda g: seen_split.append(g), partitions=partitions)
    assert c1 == c2 == len(seen_single)
    assert Counter(seen_single) == Counter(seen_split)


@pytest.mark.parametrize("bound", [10**4, 123457])
def test_partition_independence_of_statistics(bound):
    base = ball_statistics(2, bound, 1)
    for parts in (2, 8):
        other = ball_statistics(2, bound, parts)
        assert other.count == base.count
        assert other.histograms == base.histograms


@pytest.mark.parametrize("bound", [2, 3, 50, 997, 10**4, 10**5])
def test_kernel_agrees_with_generator(bound):
    stats = ball_statistics(2, bound)
    counters = [Counter() for _ in range(4)]
    for g in iter_ball(2, bound):
        for k, v in enumerate(flat(g)):
            counters[k][v] += 1
    assert stats.count == sum(counters[0].values())
    for k in range(4):
        assert stats.entry_histogram(k // 2 + 1, k % 2 + 1).as_dict() == dict(counters[k])


def test_sl3_statistics_match_stream():
    stats = ball_statistics(3, 11, partitions=3)
    assert stats.count == count_ball(3, 11)
    for i in range(1, 4):
        for j in range(1, 4):
            assert stats.entry_histogram(i, j).as_dict() == dict(Counter(entry_stream(3, 11, i, j)))


@pytest.mark.parametrize("bound", [2, 50, 2025, 10**4])
def test_sl2_symmetry_closure(bound):
    ball = {flat(g) for g in iter_ball(2, bound)}
    for a, b, c, d in ball:
        assert (a, c, b, d) in ball  # transpose
        assert (-a, -b, -c, -d) in ball
        assert (d, -b, -c, a) in ball  # inverse
    stats = ball_statistics(2, bound)
    assert stats.entry_histogram(1, 1) == stats.entry_histogram(2, 2)
    assert stats.entry_histogram(1, 2) == stats.entry_histogram(2, 1)


def test_entry_stream_examples():
    assert sorted(entry_stream(2, 2, 1, 1)) == [-1, 0, 0, 1]
    assert sorted(entry_stream(2, 2, 1, 2)) == [-1, 0, 0, 1]
    assert list(entry_stream(2, 0, 1, 1)) == []
    with pytest.raises(IndexError):
        list(entry_stream(2, 2, 3, 1))


def test_asymptotic_constant():
    assert asymptotic_constant(2) == pytest.approx(6.0, abs=1e-9)
    # mpmath evaluation of the same product, 30 digits
    assert asymptotic_constant(3) == pytest.approx(16.4211933314424705, rel=1e-10)
    assert all(asymptotic_constant(n) > 0 for n in range(2, 11))


@pytest.mark.parametrize("bound,count", sorted(REGRESSION_COUNTS.items()))
def test_regression_counts(bound, count):
    assert count_ball(2, bound) == count


def test_growth_at_one_million():
    assert abs(count_ball(2, 10**6) / 10**6 - 6) <= 0.6


def test_norm_ball_emptiness():
    assert NormBall(2, 1).is_empty and not NormBall(2, 2).is_empty
    assert NormBall(3, 2).is_empty and not NormBall(3, 3).is_empty


def test_errors():
    with pytest.raises(UnsupportedDimensionError):
        count_ball(4, 10)
    with pytest.raises(UnsupportedDimensionError):
        list(iter_ball(1, 10))
    with pytest.raises(ValueError):
        count_ball(2, -1)
    with pytest.raises(CountOverflowError):
        count_ball(2, 10**19)
    with pytest.raises(CountOverflowError):
        ball_statistics(2, matgen.MAX_KERNEL_BOUND + 1)
    with pytest.raises(ValueError):
        UnimodularMatrix(((2, 0), (0, 1)))


def test_ball_count_ratio():
    bc = matgen.ball_count(2, 10**4)
    assert bc.count == 60260
    assert bc.ratio == pytest.approx(6.026)
    assert bc.c_n == pytest.approx(6.0)
    assert math.isnan(matgen.ball_count(2, 0).ratio)


def test_histogram_merge():
    h1 = matgen.EntryHistogram.from_iterable([1, 1, 0])
    h2 = matgen.EntryHistogram.from_iterable([0, -3])
    merged = h1.merge(h2)
    assert merged.as_dict() == {-3: 1, 0: 2, 1: 2}
    assert merged.total == 5
    assert np.array_equal(merged.values, [-3, 0, 1])
