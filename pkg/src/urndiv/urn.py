"""Urn problems: support enumeration, sampling p.m.f.s and moments.

An urn holds ``n`` balls split into ``c`` colours as ``ell``; ``k`` balls
are drawn.  ``H`` is the law of the colour counts without replacement
(multivariate hypergeometric), ``B`` the law with replacement
(multinomial).  All probabilities are formed in the log domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from scipy.special import gammaln

__all__ = [
    "UrnSpec",
    "support",
    "compositions",
    "support_array",
    "compositions_array",
    "hypergeometric_pmf",
    "multinomial_pmf",
    "log_hypergeometric",
    "log_multinomial",
    "marginal_hypergeometric",
    "marginal_support",
    "factorial_moment",
    "central_moment",
]


@dataclass(frozen=True)
class UrnSpec:
    n: int
    k: int
    ell: tuple[int, ...]

    def __post_init__(self):
        ell = tuple(int(x) for x in self.ell)
        object.__setattr__(self, "ell", ell)
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if not 0 <= self.k <= self.n:
            raise ValueError(f"k must lie in [0, n], got k={self.k}, n={self.n}")
        if not ell:
            raise ValueError("need at least one colour")
        if any(x < 0 for x in ell):
            raise ValueError(f"colour counts must be nonnegative: {ell}")
        if sum(ell) != self.n:
            raise ValueError(f"sum(ell) = {sum(ell)} != n = {self.n}")

    @property
    def c(self) -> int:
        return len(self.ell)

    def reduced(self) -> tuple["UrnSpec", tuple[int, ...]]:
        """Drop empty colours; also return the indices that were kept."""
        keep = tuple(i for i, x in enumerate(self.ell) if x > 0)
        if len(keep) == self.c:
            return self, keep
        return UrnSpec(self.n, self.k, tuple(self.ell[i] for i in keep)), keep


def _bounded_colex(total: int, caps: Sequence[int]) -> Iterator[tuple[int, ...]]:
    # vectors with 0 <= v_i <= caps[i] summing to total, last coordinate slowest
    if len(caps) == 1:
        if total <= caps[0]:
            yield (total,)
        return
    last = caps[-1]
    head_caps = caps[:-1]
    room = sum(head_caps)
    for t in range(max(0, total - room), min(total, last) + 1):
        for head in _bounded_colex(total - t, head_caps):
            yield head + (t,)


def support(spec: UrnSpec) -> Iterator[tuple[int, ...]]:
    """Every draw ``s`` with ``0 <= s_i <= ell_i`` and ``sum(s) = k``, in colex order."""
    return _bounded_colex(spec.k, spec.ell)


def compositions(k: int, c: int) -> Iterator[tuple[int, ...]]:
    """All compositions of ``k`` into ``c`` nonnegative parts, in colex order."""
    return _bounded_colex(k, (k,) * c)


def _as_array(gen, c: int) -> np.ndarray:
    return np.array(list(gen), dtype=np.int64).reshape(-1, c)


def support_array(spec: UrnSpec) -> np.ndarray:
    """``support(spec)`` as an ``(m, c)`` integer array."""
    if spec.c == 2:
        lo = max(0, spec.k - spec.ell[1])
        hi = min(spec.k, spec.ell[0])
        s2 = np.arange(spec.k - hi, spec.k - lo + 1, dtype=np.int64)
        return np.column_stack([spec.k - s2, s2])
    return _as_array(support(spec), spec.c)


def compositions_array(k: int, c: int) -> np.ndarray:
    if c == 2:
        s2 = np.arange(0, k + 1, dtype=np.int64)
        return np.column_stack([k - s2, s2])
    return _as_array(compositions(k, c), c)


def _log_binom(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def log_hypergeometric(spec: UrnSpec, draws: np.ndarray) -> np.ndarray:
    """Log of ``H`` row-wise; ``-inf`` where a draw exceeds its colour count."""
    draws = np.asarray(draws, dtype=np.int64).reshape(-1, spec.c)
    ell = np.asarray(spec.ell, dtype=np.int64)
    rest = ell - draws
    ok = (rest >= 0).all(axis=1) & (draws >= 0).all(axis=1)
    if not ok.all():
        out = np.full(draws.shape[0], -np.inf)
        if ok.any():
            out[ok] = log_hypergeometric(spec, draws[ok])
        return out
    # same gammaln calls on both sides so that k = 0 and k = n cancel exactly
    const = gammaln(ell + 1.0).sum() - _log_binom(spec.n, spec.k)
    return const - gammaln(draws + 1.0).sum(axis=1) - gammaln(rest + 1.0).sum(axis=1)


def log_multinomial(spec: UrnSpec, draws: np.ndarray) -> np.ndarray:
    """Log of ``B`` row-wise, with ``0^0 = 1`` for empty colours."""
    draws = np.asarray(draws, dtype=np.int64).reshape(-1, spec.c)
    out = math.lgamma(spec.k + 1) - gammaln(draws + 1.0).sum(axis=1)
    for i, li in enumerate(spec.ell):
        if li == 0:
            out = np.where(draws[:, i] > 0, -np.inf, out)
        else:
            out = out + draws[:, i] * math.log(li / spec.n)
    return out


def _check_draw(spec: UrnSpec, s) -> tuple[int, ...]:
    s = tuple(int(x) for x in s)
    if len(s) != spec.c:
        raise ValueError(f"draw has {len(s)} colours, urn has {spec.c}")
    if any(x < 0 for x in s):
        raise ValueError(f"negative count in draw {s}")
    if sum(s) != spec.k:
        raise ValueError(f"draw {s} does not sum to k = {spec.k}")
    return s


def hypergeometric_pmf(spec: UrnSpec, s) -> float:
    s = _check_draw(spec, s)
    if any(si > li for si, li in zip(s, spec.ell)):
        return 0.0
    return float(np.exp(log_hypergeometric(spec, np.array([s]))[0]))


def multinomial_pmf(spec: UrnSpec, s) -> float:
    s = _check_draw(spec, s)
    return float(np.exp(log_multinomial(spec, np.array([s]))[0]))


def marginal_support(n: int, k: int, ell_i: int) -> np.ndarray:
    """Values taken by a single colour count ``S_i``."""
    return np.arange(max(0, k - (n - ell_i)), min(k, ell_i) + 1, dtype=np.int64)


def marginal_hypergeometric(n: int, k: int, ell_i: int, s_i: int) -> float:
    """``P(S_i = s_i)``, i.e. ``H`` on the two-colour urn ``(ell_i, n - ell_i)``."""
    if s_i < 0 or s_i > min(k, ell_i) or k - s_i > n - ell_i:
        return 0.0
    return hypergeometric_pmf(UrnSpec(n, k, (ell_i, n - ell_i)), (s_i, k - s_i))


def factorial_moment(n: int, k: int, ell_i: int, r: int) -> float:
    """``E[(S_i)_r] = (ell_i)_r (k)_r / (n)_r``."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    if r > min(k, ell_i):
        return 0.0
    return math.perm(ell_i, r) * math.perm(k, r) / math.perm(n, r)


def central_moment(n: int, k: int, ell_i: int, order: int) -> float:
    """Second or third central moment of ``S_i``."""
    if order == 2:
        if n < 2:
            raise ValueError("variance formula needs n >= 2")
        return k * (n - k) * ell_i * (n - ell_i) / (n * n * (n - 1))
    if order == 3:
        if n <= 2:
            raise ValueError("third moment formula needs n > 2")
        num = k * ell_i * (n - k) * (n - 2 * k) * (n - ell_i) * (n - 2 * ell_i)
        return num / (n**3 * (n - 1) * (n - 2))
    raise ValueError(f"order must be 2 or 3, got {order}")
