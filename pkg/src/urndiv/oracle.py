"""Exact-arithmetic verifier.

Probabilities are ``Fraction`` values built from integer binomials, and the
relative entropy is enclosed in an interval using fixed-point logarithms
with directed rounding.  Nothing here calls into ``urn`` or
``divergence``; the two sides are meant to check each other.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

from .numerics import RealInterval

__all__ = [
    "ExactProbability",
    "PrecisionError",
    "exact_pmfs",
    "exact_support",
    "exact_hypergeometric_law",
    "log_enclosure",
    "certified_divergence",
    "exact_factorial_moment",
    "exact_central_moment",
]

ExactProbability = Fraction


class PrecisionError(ArithmeticError):
    pass


def _parts(spec):
    return int(spec.n), int(spec.k), tuple(int(x) for x in spec.ell)


def exact_pmfs(spec, s) -> tuple[Fraction, Fraction]:
    """``(H, B)`` at draw ``s`` as exact fractions."""
    n, k, ell = _parts(spec)
    s = tuple(int(x) for x in s)
    if len(s) != len(ell) or any(x < 0 for x in s) or sum(s) != k:
        raise ValueError(f"{s} is not a composition of k={k} into {len(ell)} parts")
    h_num = 1
    for si, li in zip(s, ell):
        h_num *= math.comb(li, si)  # comb is 0 when si > li
    h = Fraction(h_num, math.comb(n, k))
    coef = math.factorial(k)
    for si in s:
        coef //= math.factorial(si)
    b_num = coef
    for si, li in zip(s, ell):
        b_num *= li**si  # 0**0 == 1
    b = Fraction(b_num, n**k)
    return h, b


def exact_support(spec) -> list[tuple[int, ...]]:
    """Brute-force hypergeometric support, sorted colexicographically."""
    n, k, ell = _parts(spec)
    ranges = [range(min(k, li) + 1) for li in ell[:-1]]
    out = []
    for head in itertools.product(*ranges):
        last = k - sum(head)
        if 0 <= last <= ell[-1]:
            out.append(head + (last,))
    out.sort(key=lambda v: v[::-1])
    return out


def exact_hypergeometric_law(spec) -> dict[tuple[int, ...], Fraction]:
    return {s: exact_pmfs(spec, s)[0] for s in exact_support(spec)}


def _floor_div(a: int, b: int) -> int:
    return a // b


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _atanh_series(z_num: int, z_den: int, bits: int) -> tuple[int, int]:
    """Bracket ``2^bits * 2 atanh(z)`` for rational ``0 <= z <= 1/3``."""
    one = 1 << bits
    z_lo = _floor_div(z_num << bits, z_den)
    z_hi = _ceil_div(z_num << bits, z_den)
    z2_lo = (z_lo * z_lo) >> bits
    z2_hi = _ceil_div(z_hi * z_hi, one)

    lo = 0
    p = z_lo
    j = 0
    while p > 0:
        lo += p // (2 * j + 1)
        p = (p * z2_lo) >> bits
        j += 1

    hi = 0
    p = z_hi
    j = 0
    while p > 1:
        hi += _ceil_div(p, 2 * j + 1)
        p = _ceil_div(p * z2_hi, one)
        j += 1
    # p <= 1 bounds z^(2j+1) scaled; geometric tail with ratio z^2 <= 1/9
    hi += 2
    return 2 * lo, 2 * hi


def log_enclosure(q: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    """Rigorous ``lo <= log(q) <= hi`` for rational ``q > 0``.

    Reduces ``q = 2^e m`` with ``m`` in ``[1, 2)`` and uses
    ``log m = 2 atanh((m - 1)/(m + 1))``.
    """
    q = Fraction(q)
    if q <= 0:
        raise ValueError("log of a nonpositive number")
    num, den = q.numerator, q.denominator
    e = num.bit_length() - den.bit_length()
    if e >= 0:
        m_num, m_den = num, den << e
    else:
        m_num, m_den = num << -e, den
    if m_num < m_den:
        e -= 1
        m_num <<= 1
    # m = m_num / m_den in [1, 2)
    logm = _atanh_series(m_num - m_den, m_num + m_den, bits)
    log2 = _atanh_series(1, 3, bits)
    if e >= 0:
        lo = e * log2[0] + logm[0]
        hi = e * log2[1] + logm[1]
    else:
        lo = e * log2[1] + logm[0]
        hi = e * log2[0] + logm[1]
    scale = 1 << bits
    return Fraction(lo, scale), Fraction(hi, scale)


def certified_divergence(spec, precision_bits: int = 128) -> RealInterval:
    """Interval guaranteed to contain ``D(n, k, ell)``.

    The width is at most ``2^(8 - precision_bits) * support_size``; the
    working precision is raised a few times before giving up.
    """
    if precision_bits < 64:
        raise ValueError("precision_bits must be at least 64")
    law = []
    for s in exact_support(spec):
        h, b = exact_pmfs(spec, s)
        law.append((h, h / b))
    target = Fraction(len(law), 1 << (precision_bits - 8))
    bits = precision_bits
    for _ in range(4):
        lo = hi = Fraction(0)
        for h, ratio in law:
            if ratio == 1:
                continue
            l_lo, l_hi = log_enclosure(ratio, bits)
            lo += h * l_lo
            hi += h * l_hi
        if hi - lo <= target:
            return RealInterval(lo, hi)
        bits += 32
    raise PrecisionError(f"could not reach width {float(target):.3g} for {spec}")


def exact_factorial_moment(spec, i: int, r: int) -> Fraction:
    """``E[(S_i)_r]`` by exact enumeration."""
    return sum(
        (p * math.perm(s[i], r) for s, p in exact_hypergeometric_law(spec).items()),
        Fraction(0),
    )


def exact_central_moment(spec, i: int, order: int) -> Fraction:
    n, k, ell = _parts(spec)
    mean = Fraction(k * ell[i], n)
    return sum(
        (p * (s[i] - mean) ** order for s, p in exact_hypergeometric_law(spec).items()),
        Fraction(0),
    )
