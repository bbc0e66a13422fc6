"""Special-function substrate.

Log-gamma, digamma and its first three derivatives, the certified
envelopes around them, the ``U``/``A``/``eps`` family and a few elementary
inequalities on ``log(1 + x)``.  Everything here is a pure function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.special import gammaln

__all__ = [
    "RealInterval",
    "log_gamma",
    "digamma_family",
    "digamma_envelope",
    "trigamma_envelope",
    "u_value",
    "u_sandwich",
    "log1p_topsoe",
    "forward_differences",
]


@dataclass(frozen=True)
class RealInterval:
    """Closed interval ``[lo, hi]``.

    Endpoints may be floats or exact ``Fraction`` values; the oracle
    returns the latter so that very narrow enclosures survive.
    """

    lo: float | Fraction
    hi: float | Fraction
    infinite: bool = False

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")
        if not self.infinite and not (
            math.isfinite(self.lo) and math.isfinite(self.hi)
        ):
            raise ValueError("infinite endpoint on an interval not flagged infinite")

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def mid(self):
        return (self.lo + self.hi) / 2

    def contains(self, x, slack: float = 0.0) -> bool:
        return self.lo - slack <= x <= self.hi + slack


def _check_positive(x, name="x"):
    if np.ndim(x) == 0:
        if not x > 0:
            raise ValueError(f"{name} must be positive, got {x}")
    elif not np.all(np.asarray(x) > 0):
        raise ValueError(f"{name} must be positive")


def log_gamma(x):
    """``log Γ(x)`` for ``x > 0``; accepts scalars or arrays."""
    _check_positive(x)
    if np.ndim(x) == 0:
        return math.lgamma(x)
    return gammaln(np.asarray(x, dtype=float))


# B_2, B_4, ..., B_16
_BERNOULLI_EVEN = [
    Fraction(1, 6),
    Fraction(-1, 30),
    Fraction(1, 42),
    Fraction(-1, 30),
    Fraction(5, 66),
    Fraction(-691, 2730),
    Fraction(7, 6),
    Fraction(-3617, 510),
]

_SHIFT_THRESHOLD = 16.0


def _asymptotic_coefficients(order: int) -> list[float]:
    # coefficient of x^-(2j+order) in the tail of the polygamma expansion
    coeffs = []
    for j, b in enumerate(_BERNOULLI_EVEN, start=1):
        if order == 0:
            coeffs.append(float(b / (2 * j)))
        else:
            coeffs.append(
                float(b * math.factorial(2 * j + order - 1) / math.factorial(2 * j))
            )
    return coeffs


_ASYMPTOTIC = {m: _asymptotic_coefficients(m) for m in range(4)}


def digamma_family(x: float, order: int = 0) -> float:
    """Polygamma function ``ψ^(order)(x)`` for ``order`` in 0..3 and ``x > 0``.

    Shifts the argument up with the recurrence
    ``ψ^(m)(x) = ψ^(m)(x + 1) + (-1)^(m+1) m! / x^(m+1)`` until it clears
    ``x >= 16``, then sums the Bernoulli asymptotic series.
    """
    if order not in (0, 1, 2, 3):
        raise ValueError(f"order must be in 0..3, got {order}")
    _check_positive(x)
    x = float(x)
    m = order
    sign = -1.0 if m % 2 == 0 else 1.0  # (-1)^(m+1)
    mfact = math.factorial(m)

    shift_terms = []
    while x < _SHIFT_THRESHOLD:
        shift_terms.append(sign * mfact / x ** (m + 1))
        x += 1.0

    inv = 1.0 / x
    inv2 = inv * inv
    coeffs = _ASYMPTOTIC[m]
    # Horner in x^-2 for the Bernoulli tail
    tail = 0.0
    for coef in reversed(coeffs):
        tail = tail * inv2 + coef
    tail *= inv2

    if m == 0:
        head = [math.log(x), -0.5 * inv, -tail]
    else:
        lead = math.factorial(m - 1) * inv**m + 0.5 * mfact * inv ** (m + 1)
        head = [sign * lead, sign * tail * inv**m]
    # shift terms are added smallest argument last to keep the sum stable
    return math.fsum(head + shift_terms[::-1])


def digamma_envelope(y: float) -> RealInterval:
    """Bounds ``log y - 1/(2y) - 1/(12y²) <= ψ(y) <= ... + 1/(120y⁴)``."""
    _check_positive(y, "y")
    lo = math.log(y) - 1.0 / (2 * y) - 1.0 / (12 * y * y)
    return RealInterval(lo, lo + 1.0 / (120 * y**4))


def trigamma_envelope(x: float) -> RealInterval:
    """Bounds on ``-ψ'(x) + 1/x``."""
    _check_positive(x)
    lo = -1.0 / (2 * x * x) - 1.0 / (6 * x**3)
    return RealInterval(lo, lo + 1.0 / (30 * x**5))


def u_value(a, b):
    """``U(a, b) = b log a + log Γ(a - b + 1) - log Γ(a + 1)`` for ``0 <= b <= a``.

    Works for non-integer ``b``.  ``a`` and ``b`` may be numpy arrays of
    equal shape, in which case an array is returned.
    """
    if np.ndim(a) == 0 and np.ndim(b) == 0:
        if b < 0 or b > a:
            raise ValueError(f"U(a, b) needs 0 <= b <= a, got a={a}, b={b}")
        if b == 0 or b == 1:
            return 0.0
        d = a - b
        if d == 0:
            if a < _STIRLING_SWITCH:
                return a * math.log(a) - math.lgamma(a + 1)
            return a - 0.5 * math.log(a) - _HALF_LOG_2PI - _stirling_rest(a)
        return (d + 0.5) * math.log1p(-b / a) + b + _stirling_rest(d) - _stirling_rest(a)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if (b < 0).any() or (b > a).any():
        raise ValueError("U(a, b) needs 0 <= b <= a")
    return _u_array(a, b)


_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)
# 1/12, -1/360, 1/1260, -1/1680, 1/1188, -691/360360
_STIRLING = [1 / 12, -1 / 360, 1 / 1260, -1 / 1680, 1 / 1188, -691 / 360360]
_STIRLING_SWITCH = 10.0


def _stirling_rest(x):
    """``log Γ(x + 1) - (x + ½) log x + x - ½ log 2π`` for ``x > 0``."""
    if np.ndim(x) == 0:
        if x < _STIRLING_SWITCH:
            return math.lgamma(x + 1) - (x + 0.5) * math.log(x) + x - _HALF_LOG_2PI
        inv2 = 1.0 / (x * x)
        acc = 0.0
        for coef in reversed(_STIRLING):
            acc = acc * inv2 + coef
        return acc / x
    x = np.asarray(x, dtype=float)
    small = x < _STIRLING_SWITCH
    with np.errstate(divide="ignore", invalid="ignore"):
        inv2 = 1.0 / (x * x)
        acc = _STIRLING[-1]
        for coef in reversed(_STIRLING[:-1]):
            acc = acc * inv2 + coef
        out = acc / x
        if small.any():
            xs = x[small]
            out[small] = gammaln(xs + 1) - (xs + 0.5) * np.log(xs) + xs - _HALF_LOG_2PI
    return out


def _u_array(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # unchecked array form of u_value; a >= 1 wherever b > 0.
    # Written as (d + 1/2) log(d/a) + b + r(d) - r(a) with d = a - b so that
    # the error scales with b rather than with log Γ(a + 1).
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = a - b
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (d + 0.5) * np.log1p(-b / a) + b + _stirling_rest(d) - _stirling_rest(a)
    exhausted = d == 0
    if exhausted.any():
        full = np.where(
            a < _STIRLING_SWITCH,
            a * np.log(a) - gammaln(a + 1),
            a - 0.5 * np.log(a) - _HALF_LOG_2PI - _stirling_rest(a),
        )
        out = np.where(exhausted, full, out)
    return np.where((b == 0) | (b == 1), 0.0, out)


def u_sandwich(a: float, b: float) -> tuple[float, float]:
    """Return ``(A, eps)`` with ``A - eps <= U(a, b) <= A``, valid for ``0 <= b <= a - 1``."""
    if b < 0 or b > a - 1:
        raise ValueError(f"sandwich requires 0 <= b <= a - 1, got a={a}, b={b}")
    d = a - b
    big_a = (d + 0.5) * math.log1p(-b / a) + b + 1.0 / (12 * d) - 1.0 / (12 * a)
    eps = (1.0 / d**3 - 1.0 / a**3) / 360
    return big_a, eps


def log1p_topsoe(x: float) -> tuple[float, float]:
    """Rational bounds ``2x/(2+x) <= log(1+x) <= x(2+x)/(2(1+x))`` for ``x >= 0``."""
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x}")
    return 2 * x / (2 + x), x * (2 + x) / (2 * (1 + x))


def forward_differences(values: Sequence[float], r: int) -> float:
    """``Δ^r f(m)`` from consecutive samples ``f(m), f(m+1), ...``."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    if len(values) < r + 1:
        raise ValueError(f"need at least {r + 1} samples, got {len(values)}")
    row = [float(v) for v in values[: r + 1]]
    for _ in range(r):
        row = [hi - lo for lo, hi in zip(row, row[1:])]
    return row[0]
