"""Relative entropy and total variation between sampling without and with replacement."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import _u_array, u_value
from .urn import (
    UrnSpec,
    compositions_array,
    log_hypergeometric,
    log_multinomial,
    marginal_support,
    support_array,
)

__all__ = [
    "DivergenceReport",
    "relative_entropy",
    "relative_entropy_via_u",
    "total_variation",
    "divergence_report",
]


def _log_ratio(spec: UrnSpec, draws: np.ndarray) -> np.ndarray:
    # log(H/B) = U(n, k) - sum_i U(ell_i, s_i); exact algebra, avoids log k! cancellation
    ell = np.asarray(spec.ell, dtype=float)
    per_colour = _u_array(ell, draws.astype(float))
    return u_value(spec.n, spec.k) - per_colour.sum(axis=1)


def relative_entropy(spec: UrnSpec) -> float:
    """``D(n, k, ell)`` in nats, summed over the hypergeometric support."""
    red, _ = spec.reduced()
    if red.c == 1 or red.k <= 1:
        return 0.0  # H and B coincide
    draws = support_array(red)
    h = np.exp(log_hypergeometric(red, draws))
    return math.fsum(h * _log_ratio(red, draws))


def relative_entropy_via_u(spec: UrnSpec) -> float:
    """``U(n, k) - sum_i E U(ell_i, S_i)`` with each ``S_i`` a marginal hypergeometric."""
    if any(x == 0 for x in spec.ell):
        raise ValueError("every colour count must be at least 1")
    n, k = spec.n, spec.k
    terms = [u_value(n, k)]
    for li in spec.ell:
        s = marginal_support(n, k, li)
        pair = np.column_stack([s, k - s])
        p = np.exp(log_hypergeometric(UrnSpec(n, k, (li, n - li)), pair))
        u = _u_array(float(li), s.astype(float))
        terms.extend(-(p * u))
    return math.fsum(terms)


def total_variation(spec: UrnSpec) -> float:
    """Half the L1 distance between ``H`` and ``B`` over all compositions of ``k``."""
    red, _ = spec.reduced()
    if red.c == 1 or red.k <= 1:
        return 0.0
    draws = compositions_array(red.k, red.c)
    h = np.exp(log_hypergeometric(red, draws))
    b = np.exp(log_multinomial(red, draws))
    return 0.5 * math.fsum(np.abs(h - b))


@dataclass(frozen=True)
class DivergenceReport:
    kl: float
    tv: float
    support_size: int
    kl_via_u: float

    @property
    def u_consistent(self) -> bool:
        return abs(self.kl - self.kl_via_u) <= 1e-9

    @property
    def pinsker_ok(self) -> bool:
        return 2 * self.tv**2 <= self.kl + 1e-12

    @property
    def bretagnolle_huber_ok(self) -> bool:
        return self.tv**2 <= -math.expm1(-self.kl) + 1e-12

    @property
    def consistent(self) -> bool:
        return (
            self.kl >= -1e-12
            and -1e-12 <= self.tv <= 1 + 1e-12
            and self.u_consistent
            and self.pinsker_ok
            and self.bretagnolle_huber_ok
        )


def divergence_report(spec: UrnSpec) -> DivergenceReport:
    red, _ = spec.reduced()
    return DivergenceReport(
        kl=relative_entropy(red),
        tv=total_variation(red),
        support_size=len(support_array(red)),
        kl_via_u=relative_entropy_via_u(red),
    )
