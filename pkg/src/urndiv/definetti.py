"""Finite exchangeable sequences as mixtures over urn compositions.

A law on ``A^k`` that depends only on the type of a sequence is stored as
the total mass of each type class (``TypeClassPmf``).  Relative entropy
and total variation over sequences equal those over type classes because
every sequence in a class carries the same probability on both sides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, NamedTuple, Optional, Sequence

import numpy as np

from .bounds import stam_bounds
from .divergence import relative_entropy
from .numerics import log_gamma
from .urn import UrnSpec, compositions, compositions_array, log_hypergeometric, log_multinomial

__all__ = [
    "MixingMeasure",
    "TypeClassPmf",
    "mixing_from_iid",
    "point_mass",
    "uniform_types",
    "random_mixing_measure",
    "pk_from_mixture",
    "mk_from_mixture",
    "DeFinettiChain",
    "definetti_divergence",
    "type_class_tv",
    "definetti_bounds",
    "monotonicity_experiment",
]


@dataclass(frozen=True)
class MixingMeasure:
    """Law of the composition ``ell`` (equivalently the type ``ell/n``) of ``X_1..X_n``."""

    n: int
    c: int
    weights: Mapping[tuple[int, ...], float]

    def __post_init__(self):
        if self.n < 1 or self.c < 2:
            raise ValueError(f"need n >= 1 and c >= 2, got n={self.n}, c={self.c}")
        clean = {}
        for ell, w in self.weights.items():
            ell = tuple(int(x) for x in ell)
            if len(ell) != self.c or min(ell) < 0 or sum(ell) != self.n:
                raise ValueError(f"{ell} is not a composition of {self.n} into {self.c} parts")
            if w < 0:
                raise ValueError(f"negative weight {w} on {ell}")
            if w > 0:
                clean[ell] = clean.get(ell, 0.0) + float(w)
        total = math.fsum(clean.values())
        if abs(total - 1) > 1e-12:
            raise ValueError(f"weights sum to {total!r}, not 1")
        object.__setattr__(self, "weights", dict(sorted(clean.items(), key=lambda kv: kv[0][::-1])))

    @classmethod
    def normalized(cls, n: int, c: int, weights: Mapping, tol: float = 1e-9) -> "MixingMeasure":
        """Rescale weights whose total is within ``tol`` of 1."""
        total = math.fsum(weights.values())
        if abs(total - 1) > tol:
            raise ValueError(f"weights sum to {total!r}; expected 1 within {tol}")
        return cls(n, c, {ell: w / total for ell, w in weights.items()})

    @property
    def support(self) -> list[tuple[int, ...]]:
        return list(self.weights)


@dataclass(frozen=True)
class TypeClassPmf:
    k: int
    c: int
    mass: dict[tuple[int, ...], float]

    def per_sequence(self, s) -> float:
        """Probability of any single sequence whose colour counts are ``s``."""
        s = tuple(s)
        coef = math.factorial(self.k)
        for si in s:
            coef //= math.factorial(si)
        return self.mass[s] / coef

    def total(self) -> float:
        return math.fsum(self.mass.values())


def mixing_from_iid(p: Sequence[float], n: int) -> MixingMeasure:
    """Type law of ``n`` i.i.d. draws from ``p``: multinomial weights on compositions."""
    p = [float(x) for x in p]
    if len(p) < 2 or min(p) < 0 or abs(math.fsum(p) - 1) > 1e-12:
        raise ValueError(f"not a probability vector: {p}")
    c = len(p)
    draws = compositions_array(n, c)
    logw = math.lgamma(n + 1) - np.sum(log_gamma(draws + 1.0), axis=1)
    for i, pi in enumerate(p):
        col = draws[:, i]
        if pi == 0:
            logw = np.where(col > 0, -np.inf, logw)
        else:
            logw += col * math.log(pi)
    w = np.exp(logw)
    weights = {tuple(int(x) for x in row): float(wi) for row, wi in zip(draws, w) if wi > 0}
    return MixingMeasure.normalized(n, c, weights, tol=1e-12)


def point_mass(ell: Sequence[int]) -> MixingMeasure:
    ell = tuple(int(x) for x in ell)
    return MixingMeasure(sum(ell), len(ell), {ell: 1.0})


def uniform_types(n: int, c: int) -> MixingMeasure:
    """Uniform law over all compositions of ``n`` (a Pólya-urn exchangeable sequence)."""
    comps = list(compositions(n, c))
    return MixingMeasure.normalized(n, c, {ell: 1.0 / len(comps) for ell in comps})


def random_mixing_measure(
    n: int, c: int, rng: np.random.Generator, alpha: float = 1.0, atoms: Optional[int] = None
) -> MixingMeasure:
    """Symmetric-Dirichlet weights over a random subset of compositions of ``n``."""
    comps = list(compositions(n, c))
    if atoms is not None and atoms < len(comps):
        idx = np.sort(rng.choice(len(comps), size=atoms, replace=False))
        comps = [comps[i] for i in idx]
    w = rng.dirichlet(np.full(len(comps), alpha))
    return MixingMeasure.normalized(n, c, dict(zip(comps, w.tolist())))


def _mixture(mu: MixingMeasure, k: int, log_pmf) -> TypeClassPmf:
    draws = compositions_array(k, mu.c)
    table = np.array(
        [np.exp(log_pmf(UrnSpec(mu.n, k, ell), draws)) * w for ell, w in mu.weights.items()]
    )
    mass = {
        tuple(int(x) for x in row): math.fsum(col) for row, col in zip(draws, table.T)
    }
    return TypeClassPmf(k, mu.c, mass)


def pk_from_mixture(mu: MixingMeasure, k: int) -> TypeClassPmf:
    """Law of ``(X_1..X_k)``: sampling ``k`` without replacement from a ``mu``-random urn."""
    if not 0 <= k <= mu.n:
        raise ValueError(f"k must lie in [0, n={mu.n}], got {k}")
    # a single draw has the same law with or without replacement
    return _mixture(mu, k, log_multinomial if k <= 1 else log_hypergeometric)


def mk_from_mixture(mu: MixingMeasure, k: int, allow_beyond_n: bool = False) -> TypeClassPmf:
    """Mixture of i.i.d. laws ``(ell/n)^k`` under ``mu``."""
    if k < 0 or (k > mu.n and not allow_beyond_n):
        raise ValueError(f"k must lie in [0, n={mu.n}] unless allow_beyond_n, got {k}")
    if k <= mu.n:
        return _mixture(mu, k, log_multinomial)
    # B only depends on ell/n, so rescale the urns until k fits
    scale = -(-k // mu.n)
    scaled = MixingMeasure(
        mu.n * scale, mu.c, {tuple(x * scale for x in ell): w for ell, w in mu.weights.items()}
    )
    return _mixture(scaled, k, log_multinomial)


def _kl_type_classes(p: TypeClassPmf, q: TypeClassPmf) -> float:
    terms = []
    for s, ps in p.mass.items():
        if ps > 0:
            terms.append(ps * math.log(ps / q.mass[s]))
    return math.fsum(terms)


def type_class_tv(p: TypeClassPmf, q: TypeClassPmf) -> float:
    return 0.5 * math.fsum(abs(p.mass[s] - q.mass[s]) for s in p.mass)


class DeFinettiChain(NamedTuple):
    d: float
    chain_mid: float
    chain_max: float


def definetti_divergence(mu: MixingMeasure, k: int) -> DeFinettiChain:
    """``D(P_k || M_{k,mu})`` together with the mixture and max of urn divergences above it."""
    if not 0 <= k <= mu.n:
        raise ValueError(f"k must lie in [0, n={mu.n}], got {k}")
    d = _kl_type_classes(pk_from_mixture(mu, k), mk_from_mixture(mu, k))
    per_urn = [(w, relative_entropy(UrnSpec(mu.n, k, ell))) for ell, w in mu.weights.items()]
    chain_mid = math.fsum(w * dv for w, dv in per_urn)
    chain_max = max(dv for _, dv in per_urn)
    return DeFinettiChain(d, chain_mid, chain_max)


def definetti_bounds(n: int, k: int, c: int) -> dict[str, Optional[float]]:
    """Explicit de Finetti bounds; entries are ``None`` where a bound does not apply."""
    if not 0 <= k <= n or c < 2:
        raise ValueError(f"need 0 <= k <= n and c >= 2 (n={n}, k={k}, c={c})")
    corollary = 0.0 if k == 0 else stam_bounds(n, k, c)[0]
    out = {
        "corollary": corollary,
        "pinsker_tv": math.sqrt(corollary / 2),
        "df_tv": c * k / n,
        "gk_first": None,
        "gk_b": None,
    }
    if c == 2 and k < n:
        out["gk_first"] = 5 * k * k * math.log(n) / (n - k)
    if k <= n - 2:
        out["gk_b"] = k * (k - 1) / (2 * (n - k - 1)) * math.log(c)
    return out


def monotonicity_experiment(
    family: Callable[[int], MixingMeasure], k: int, n_range: Iterable[int]
) -> list[dict]:
    """Tabulate ``D(P_k || M_{k,mu_n})`` along a family of mixing measures.

    Each row also records whether the divergence and the total variation
    did not decrease from ``k`` to ``k + 1`` at that ``n`` (when ``k < n``).
    Purely descriptive; no monotonicity in ``n`` is asserted.
    """
    rows = []
    for n in n_range:
        mu = family(n)
        if k > mu.n:
            raise ValueError(f"k={k} exceeds n={mu.n}")
        p, m = pk_from_mixture(mu, k), mk_from_mixture(mu, k)
        d, tv = _kl_type_classes(p, m), type_class_tv(p, m)
        row = {"n": n, "k": k, "d": d, "tv": tv, "d_next": None, "tv_next": None, "monotone_in_k": None}
        if k < mu.n:
            p1, m1 = pk_from_mixture(mu, k + 1), mk_from_mixture(mu, k + 1)
            row["d_next"] = _kl_type_classes(p1, m1)
            row["tv_next"] = type_class_tv(p1, m1)
            row["monotone_in_k"] = d <= row["d_next"] + 1e-12 and tv <= row["tv_next"] + 1e-12
        rows.append(row)
    return rows
