"""Compiled inner loops for the n = 2 ball enumeration.

The kernels release the GIL, so partitions can run on a thread pool and
their histograms are summed afterwards.
"""
import numba as nb
import numpy as np


@nb.njit(nogil=True, cache=True)
def _isqrt(v):
    r = int(np.sqrt(v))
    while r * r > v:
        r -= 1
    while (r + 1) * (r + 1) <= v:
        r += 1
    return r


@nb.njit(nogil=True, cache=True)
def _inverse_mod(b, m):
    """Inverse of b modulo m, or -1 when gcd(b, m) != 1."""
    r0, r1 = m, b % m
    s0, s1 = 0, 1
    while r1 != 0:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if r0 != 1:
        return -1
    return s0 % m


@nb.njit(nogil=True, cache=True)
def sl2_ball_histograms(bound, a_values, radius):
    """Count SL_2(Z) matrices [[a, b], [c, d]] with a^2+b^2+c^2+d^2 <= bound.

    Only first entries drawn from ``a_values`` are visited. Returns the count
    and a (4, 2*radius+1) array; row ``k`` is the histogram of flat entry
    ``k`` shifted by ``radius``.
    """
    hist = np.zeros((4, 2 * radius + 1), dtype=np.int64)
    total = 0
    for ai in range(a_values.shape[0]):
        a = a_values[ai]
        if a == 0:
            # bc = -1 forces (b, c) = (1, -1) or (-1, 1); d is free.
            rem = bound - 2
            if rem < 0:
                continue
            dm = _isqrt(rem)
            k = 2 * dm + 1
            hist[0, radius] += 2 * k
            hist[1, radius - 1] += k
            hist[1, radius + 1] += k
            hist[2, radius + 1] += k
            hist[2, radius - 1] += k
            for d in range(-dm, dm + 1):
                hist[3, d + radius] += 2
            total += 2 * k
            continue
        m = abs(a)
        rem_a = bound - a * a
        if rem_a < 0:
            continue
        bm = _isqrt(rem_a)
        a2 = a * a
        for b in range(-bm, bm + 1):
            rem_b = rem_a - b * b
            if m == 1:
                r = 0
            else:
                inv = _inverse_mod(b, m)
                if inv < 0:
                    continue
                r = (-inv) % m
            # c^2 + ((1+bc)/a)^2 <= rem_b  <=>  (a^2+b^2)c^2 + 2bc + 1 - a^2 rem_b <= 0
            s = a2 + b * b
            disc = float(b) * b - float(s) * (1.0 - float(a2) * rem_b)
            if disc < 0.0:
                continue
            sq = np.sqrt(disc)
            lo = int(np.floor((-b - sq) / s)) - 1
            hi = int(np.ceil((-b + sq) / s)) + 1
            c = lo + ((r - lo) % m)
            cnt = 0
            while c <= hi:
                d = (1 + b * c) // a
                if c * c + d * d <= rem_b:
                    hist[2, c + radius] += 1
                    hist[3, d + radius] += 1
                    cnt += 1
                c += m
            hist[0, a + radius] += cnt
            hist[1, b + radius] += cnt
            total += cnt
    return total, hist
