"""Closed-form bounds on D(n, k, ell), limit laws and proof-step diagnostics.

Each bound refuses to evaluate outside the hypotheses under which it is
known to hold (``NotApplicable``); ``bound_report`` turns that into absent
fields rather than zeros.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import bisect

from .numerics import _u_array, digamma_family, u_value
from .urn import (
    UrnSpec,
    central_moment,
    log_hypergeometric,
    marginal_support,
)

__all__ = [
    "NotApplicable",
    "stam_bounds",
    "hm_bounds",
    "thm1_upper",
    "prop12_upper",
    "exact_binary_divergence",
    "sigma_stats",
    "limit_expressions",
    "crossover_s_star",
    "BoundPair",
    "ProofDiagnostics",
    "proof_step_diagnostics",
    "BoundReport",
    "bound_report",
]


class NotApplicable(ValueError):
    """The bound's hypotheses do not cover this input."""


def stam_bounds(n: int, k: int, c: int) -> tuple[float, float]:
    """Stam's uniform upper and lower bounds."""
    if not 1 <= k <= n or c < 2:
        raise NotApplicable(f"Stam bounds need 1 <= k <= n and c >= 2 (n={n}, k={k}, c={c})")
    if n == 1:
        return 0.0, 0.0
    num = (c - 1) * k * (k - 1)
    return num / (2 * (n - 1) * (n - k + 1)), num / (4 * (n - 1) ** 2)


def hm_bounds(n: int, k: int, c: int) -> tuple[float, float]:
    """Harremoës–Matúš upper and lower bounds.

    The upper bound is ``inf`` at ``k = n``.  At ``k = 1`` the lower bound
    is returned as 0: ``D(n, 1, ell) = 0`` there, while the closed form
    would be slightly positive.
    """
    if not 1 <= k <= n or c < 2 or n < 2:
        raise NotApplicable(f"HM bounds need 1 <= k <= n, n >= 2, c >= 2 (n={n}, k={k}, c={c})")
    if k == n:
        upper = math.inf
    else:
        upper = (c - 1) * (math.log((n - 1) / (n - k)) - k / n + 1 / (n - k + 1))
    if k == 1:
        lower = 0.0
    else:
        r = (n - k + 1) / (n - 1)
        lower = (c - 1) / 2 * (r - 1 - math.log(r))
    return upper, lower


def _thm1_formula(n: int, k: int, ell) -> float:
    c = len(ell)
    sigma1, sigma2 = sigma_stats(UrnSpec(n, k, tuple(ell)))
    first = (c - 1) / 2 * (math.log(n / (n - k)) - k / (n - 1))
    second = k * (2 * n + 1) / (12 * n * (n - 1) * (n - k)) * sigma1
    third = (1 / (n - k) ** 3 - 1 / n**3) / 360 * sigma2
    return first + second + third


def thm1_upper(spec: UrnSpec) -> float:
    """The ell-dependent upper bound, valid for ``1 <= k <= n/2`` and every ``ell_i >= 1``."""
    n, k, ell = spec.n, spec.k, spec.ell
    if spec.c < 2 or not 1 <= k or 2 * k > n or min(ell) < 1:
        raise NotApplicable(f"needs c >= 2, 1 <= k <= n/2 and ell_i >= 1: {spec}")
    return _thm1_formula(n, k, ell)


def _xlogy_ratio(coef: float, num: float, den: float) -> float:
    # coef * log(num/den) with coef == 0 meaning 0 regardless of the log
    return 0.0 if coef == 0 else coef * math.log(num / den)


def _newton_brackets(ell: int) -> tuple[float, float]:
    """The two bracketed coefficients of the Newton-series bound for one colour.

    For ``ell = 1`` both are 0, for ``ell = 2`` the first is ``-2 log 2`` and
    the second is 0.
    """
    if ell < 1:
        raise ValueError("ell must be at least 1")
    if ell == 1:
        return 0.0, 0.0
    first = -_xlogy_ratio(ell * (ell - 1), ell, ell - 1)
    if ell == 2:
        return first, 0.0
    second = -ell * (ell - 1) * (ell - 2) * math.log((ell - 1) ** 2 / (ell * (ell - 2)))
    return first, second


def prop12_upper(n: int, k: int, ell: int) -> float:
    """Two-colour bound for the urn ``(ell, n - ell)`` with ``ell <= n/2``."""
    if not (1 <= ell and 2 * ell <= n and 1 <= k and 2 * k <= n):
        raise NotApplicable(f"needs 1 <= ell <= n/2 and 1 <= k <= n/2 (n={n}, k={k}, ell={ell})")
    x = k / n
    t1 = ell * ((1 - x) * math.log1p(-x) + x - k / (2 * n * (n - 1)))
    t2 = k * ell / ((n - 1) * (n - ell) * (n - k))
    b2, b3 = _newton_brackets(ell)
    t3 = k * (k - 1) / (2 * n * (n - 1)) * b2
    t4 = 0.0 if b3 == 0 else k * (k - 1) * (k - 2) / (6 * n * (n - 1) * (n - 2)) * b3
    return t1 + t2 + t3 + t4


def exact_binary_divergence(n: int, k: int) -> float:
    """Closed form of ``D(n, k, (1, n-1))``."""
    if not 0 <= k <= n or n < 2:
        raise ValueError(f"needs n >= 2 and 0 <= k <= n (n={n}, k={k})")
    first = 0.0 if k == n else (1 - k / n) * math.log1p(-k / n)
    return first - k * (1 - 1 / n) * math.log1p(-1 / n)


def sigma_stats(spec: UrnSpec) -> tuple[float, float]:
    """``(sum n/ell_i, sum n^3/ell_i^3)``."""
    if min(spec.ell) < 1:
        raise ValueError(f"every colour count must be at least 1: {spec.ell}")
    n = spec.n
    return (
        math.fsum(n / li for li in spec.ell),
        math.fsum((n / li) ** 3 for li in spec.ell),
    )


def limit_expressions(c: int, s: float) -> tuple[float, float]:
    """Large-``n`` limits of D for ``k/n -> s``: balanced urns, and ``ell = (1, n-1)``."""
    if not 0 < s < 1:
        raise ValueError(f"s must lie in (0, 1), got {s}")
    log1m = math.log1p(-s)
    balanced = (c - 1) / 2 * (-log1m - s)
    unbalanced = s + (1 - s) * log1m
    return balanced, unbalanced


def crossover_s_star() -> float:
    """Where the two-colour limits cross."""

    def gap(s):
        balanced, unbalanced = limit_expressions(2, s)
        return unbalanced - balanced

    return bisect(gap, 0.5, 0.99, xtol=1e-10)


# --- proof-step diagnostics -------------------------------------------------


@dataclass(frozen=True)
class BoundPair:
    exact: float
    bound: float

    def holds(self, slack: float = 1e-10) -> bool:
        return self.exact <= self.bound + slack


@dataclass(frozen=True)
class ProofDiagnostics:
    spec: UrnSpec
    mean_term: BoundPair
    fluctuation_term: BoundPair
    taylor: tuple[BoundPair, ...]
    newton: tuple[BoundPair, ...]
    small_ell: Optional[tuple[BoundPair, BoundPair, BoundPair]] = None

    def pairs(self) -> dict[str, BoundPair]:
        out = {"mean_term": self.mean_term, "fluctuation_term": self.fluctuation_term}
        out.update({f"taylor[{i}]": p for i, p in enumerate(self.taylor)})
        out.update({f"newton[{i}]": p for i, p in enumerate(self.newton)})
        if self.small_ell is not None:
            out.update({f"small_ell[{i}]": p for i, p in enumerate(self.small_ell)})
        return out

    def violations(self, slack: float = 1e-10) -> list[str]:
        return [name for name, p in self.pairs().items() if not p.holds(slack)]


def _expected_u(n: int, k: int, ell_i: int) -> float:
    s = marginal_support(n, k, ell_i)
    p = np.exp(log_hypergeometric(UrnSpec(n, k, (ell_i, n - ell_i)), np.column_stack([s, k - s])))
    u = _u_array(float(ell_i), s.astype(float))
    return math.fsum(p * u)


def proof_step_diagnostics(spec: UrnSpec) -> ProofDiagnostics:
    """Exact value vs. closed-form bound for each intermediate step of the main proofs."""
    n, k, ell, c = spec.n, spec.k, spec.ell, spec.c
    if c < 2 or k < 1 or 2 * k > n or min(ell) < 1:
        raise NotApplicable(f"diagnostics need c >= 2, 1 <= k <= n/2, ell_i >= 1: {spec}")
    x = k / n
    eu = [_expected_u(n, k, li) for li in ell]
    u_at_mean = [u_value(li, li * x) for li in ell]

    sigma1 = math.fsum(n / li for li in ell)
    mean_term = BoundPair(
        exact=math.fsum([u_value(n, k)] + [-u for u in u_at_mean]),
        bound=(c - 1) / 2 * math.log(n / (n - k))
        + k / (12 * n * (n - k)) * (1 - sigma1)
        + (n**3 / (n - k) ** 3 - 1) / 360 * math.fsum(1 / li**3 for li in ell),
    )
    per_colour = [u - e for u, e in zip(u_at_mean, eu)]
    fluctuation_term = BoundPair(
        exact=math.fsum(per_colour),
        bound=-k * (c - 1) / (2 * (n - 1))
        + k / (4 * (n - k) * (n - 1)) * math.fsum(n / li - 1 for li in ell),
    )

    taylor = []
    for li, exact in zip(ell, per_colour):
        arg = li * (1 - x) + 1
        bound = (
            -digamma_family(arg, 1) * central_moment(n, k, li, 2) / 2
            + digamma_family(arg, 2) * central_moment(n, k, li, 3) / 6
        )
        taylor.append(BoundPair(exact, bound))

    f2 = math.perm(k, 2) / math.perm(n, 2)
    f3 = math.perm(k, 3) / math.perm(n, 3) if n >= 3 else 0.0
    newton = []
    for li, e in zip(ell, eu):
        b2, b3 = _newton_brackets(li)
        newton.append(BoundPair(-e, f2 / 2 * b2 + f3 / 6 * b3))

    small = None
    if c == 2:
        small_l = min(ell)
        big_l = n - small_l
        e_small = eu[ell.index(small_l)]
        e_big = eu[1 - ell.index(small_l)]
        u_big_mean = u_value(big_l, big_l * x)
        b2, b3 = _newton_brackets(small_l)
        small = (
            BoundPair(
                u_value(n, k) - u_big_mean,
                small_l * ((1 - x) * math.log1p(-x) + x),
            ),
            BoundPair(-e_small, f2 / 2 * b2 + f3 / 6 * b3),
            BoundPair(
                u_big_mean - e_big,
                -k * small_l / (2 * n * (n - 1))
                + k * small_l / ((n - 1) * (n - small_l) * (n - k)),
            ),
        )
    return ProofDiagnostics(spec, mean_term, fluctuation_term, tuple(taylor), tuple(newton), small)


# --- aggregate report -------------------------------------------------------


@dataclass(frozen=True)
class BoundReport:
    spec: UrnSpec
    df_tv: float
    sigma1: float
    sigma2: float
    stam_upper: Optional[float] = None
    stam_lower: Optional[float] = None
    hm_upper: Optional[float] = None
    hm_lower: Optional[float] = None
    thm1_upper: Optional[float] = None
    prop12_upper: Optional[float] = None
    exact_binary: Optional[float] = None
    # the colour-count bound evaluated past k = n/2, for the record; never a guarantee
    thm1_outside_domain: Optional[float] = field(default=None, repr=False)

    def as_dict(self) -> dict:
        return {
            "n": self.spec.n,
            "k": self.spec.k,
            "ell": list(self.spec.ell),
            "stam_upper": self.stam_upper,
            "stam_lower": self.stam_lower,
            "hm_upper": self.hm_upper,
            "hm_lower": self.hm_lower,
            "thm1_upper": self.thm1_upper,
            "prop12_upper": self.prop12_upper,
            "exact_binary": self.exact_binary,
            "sigma1": self.sigma1,
            "sigma2": self.sigma2,
            "df_tv": self.df_tv,
            "thm1_outside_domain": self.thm1_outside_domain,
        }

    def upper_bounds(self) -> dict[str, float]:
        names = ("stam_upper", "hm_upper", "thm1_upper", "prop12_upper")
        return {k: getattr(self, k) for k in names if getattr(self, k) is not None}

    def lower_bounds(self) -> dict[str, float]:
        names = ("stam_lower", "hm_lower")
        return {k: getattr(self, k) for k in names if getattr(self, k) is not None}


def _try(fn, *args):
    try:
        return fn(*args)
    except NotApplicable:
        return None


def bound_report(spec: UrnSpec) -> BoundReport:
    n, k, c, ell = spec.n, spec.k, spec.c, spec.ell
    fields = {}
    stam = _try(stam_bounds, n, k, c)
    if stam is not None:
        fields["stam_upper"], fields["stam_lower"] = stam
    hm = _try(hm_bounds, n, k, c)
    if hm is not None:
        fields["hm_upper"], fields["hm_lower"] = hm
    fields["thm1_upper"] = _try(thm1_upper, spec)
    if fields["thm1_upper"] is None and c >= 2 and min(ell) >= 1 and 2 * k > n and k < n:
        fields["thm1_outside_domain"] = _thm1_formula(n, k, ell)
    if c == 2:
        fields["prop12_upper"] = _try(prop12_upper, n, k, min(ell))
        if min(ell) == 1 and n >= 2:
            fields["exact_binary"] = exact_binary_divergence(n, k)
    if min(ell) >= 1:
        sigma1, sigma2 = sigma_stats(spec)
    else:
        sigma1 = sigma2 = math.inf
    return BoundReport(spec=spec, df_tv=c * k / n, sigma1=sigma1, sigma2=sigma2, **fields)
