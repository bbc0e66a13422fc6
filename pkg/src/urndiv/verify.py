"""Invariant suites run by ``urndiv verify``.

Every suite returns a ``SuiteResult``; a failure message always names the
offending input so that a regression can be reproduced from the report.
Module attributes are looked up at call time (``bounds.stam_bounds`` rather
than a bare import) so the suites see whatever implementation is live.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from . import bounds, definetti, divergence, numerics, oracle, urn
from .urn import UrnSpec

LEVELS = ("fast", "full")
SEED = 20240601


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def check(self, ok: bool, message: str) -> None:
        self.checked += 1
        if not ok:
            self.failures.append(message)


# --- grids ------------------------------------------------------------------


def c2_grid(level: str = "full") -> Iterator[UrnSpec]:
    """Two-colour specs with ``k <= n/2`` and ``ell_1 <= n/2``."""
    ns = range(20, 201, 20) if level == "full" else (20, 60, 100, 200)
    for n in ns:
        ks = range(1, n // 2 + 1) if level == "full" else sorted({1, 2, 3, n // 8, n // 4, n // 2})
        for k in ks:
            for l1 in range(1, n // 2 + 1):
                yield UrnSpec(n, k, (l1, n - l1))


def _thin(lo: int, hi: int) -> list[int]:
    # small values densely, then roughly geometric
    out = {v for v in (1, 2, 3, 4, 5) if lo <= v <= hi}
    v = 5.0
    while v < hi:
        v *= 1.6
        if lo <= int(v) <= hi:
            out.add(int(v))
    out.update(x for x in (lo, hi) if lo <= hi)
    return sorted(out)


def c3_grid(level: str = "full") -> Iterator[UrnSpec]:
    """Three-colour specs, thinned; colour counts sorted ``ell_1 <= ell_2 <= ell_3``."""
    ns = range(20, 201, 30) if level == "full" else (20, 80, 200)
    for n in ns:
        ks = sorted({1, 2, 3, n // 8, n // 4, 3 * n // 8, n // 2})
        for k in ks:
            for l1 in _thin(1, n // 3):
                for l2 in _thin(l1, (n - l1) // 2):
                    yield UrnSpec(n, k, (l1, l2, n - l1 - l2))


def small_grid(max_n: int = 60, max_c: int = 4, step: int = 7) -> Iterator[UrnSpec]:
    """Mixed-colour specs for moment and normalization identities, zero counts allowed."""
    rng = np.random.default_rng(SEED)
    for n in range(2, max_n + 1, step):
        for c in range(1, max_c + 1):
            cuts = np.sort(rng.integers(0, n + 1, size=c - 1))
            ell = np.diff(np.concatenate([[0], cuts, [n]])).tolist()
            for k in sorted({0, 1, n // 3, n // 2, n}):
                yield UrnSpec(n, k, tuple(ell))


def close(got: float, want: float, tol: float = 1e-12) -> bool:
    """``|got - want| <= tol * max(1, |want|)``: absolute near zero, relative for large moments."""
    return abs(got - want) <= tol * max(1.0, abs(want))


# --- suites -----------------------------------------------------------------


def suite_sandwich(level: str) -> SuiteResult:
    res = SuiteResult("u_sandwich")
    top = 500 if level == "full" else 120
    for a in range(1, top + 1):
        for b in range(0, a):
            big_a, eps = numerics.u_sandwich(a, b)
            u = numerics.u_value(a, b)
            res.check(
                big_a - eps - 1e-12 <= u <= big_a + 1e-12,
                f"A-eps <= U <= A fails at (a={a}, b={b}): {big_a - eps} {u} {big_a}",
            )
    return res


def suite_envelopes(level: str) -> SuiteResult:
    res = SuiteResult("psi_envelopes")
    for y in np.geomspace(0.5, 1e4, 200):
        y = float(y)
        psi = numerics.digamma_family(y, 0)
        res.check(numerics.digamma_envelope(y).contains(psi, 1e-12), f"digamma envelope at y={y!r}")
        tri = -numerics.digamma_family(y, 1) + 1 / y
        res.check(numerics.trigamma_envelope(y).contains(tri, 1e-12), f"trigamma envelope at x={y!r}")
        res.check(numerics.digamma_family(y, 3) >= -1e-13, f"psi''' < 0 at x={y!r}")
    return res


def suite_topsoe(level: str) -> SuiteResult:
    res = SuiteResult("topsoe")
    rng = np.random.default_rng(SEED)
    for x in rng.uniform(0, 100, size=500):
        lo, hi = numerics.log1p_topsoe(float(x))
        res.check(lo - 1e-12 <= math.log1p(x) <= hi + 1e-12, f"log1p bracket at x={x!r}")
    return res


def suite_urn(level: str) -> SuiteResult:
    res = SuiteResult("urn_identities")
    step = 3 if level == "full" else 9
    for spec in small_grid(step=step):
        draws = urn.support_array(spec)
        h = np.exp(urn.log_hypergeometric(spec, draws))
        comps = urn.compositions_array(spec.k, spec.c)
        b = np.exp(urn.log_multinomial(spec, comps))
        res.check(abs(math.fsum(h) - 1) <= 1e-12, f"sum H != 1 for {spec}")
        res.check(abs(math.fsum(b) - 1) <= 1e-12, f"sum B != 1 for {spec}")
        for i, li in enumerate(spec.ell):
            mean = spec.k * li / spec.n
            res.check(close(math.fsum(h * draws[:, i]), mean), f"H mean, colour {i}, {spec}")
            res.check(close(math.fsum(b * comps[:, i]), mean), f"B mean, colour {i}, {spec}")
            for r in range(5):
                fall = np.array([math.perm(int(s), r) for s in draws[:, i]], dtype=float)
                want = urn.factorial_moment(spec.n, spec.k, li, r)
                res.check(
                    close(math.fsum(h * fall), want),
                    f"factorial moment r={r}, colour {i}, {spec}",
                )
            for order in (2, 3):
                if order == 3 and spec.n <= 2:
                    continue
                emp = math.fsum(h * (draws[:, i] - mean) ** order)
                res.check(
                    close(emp, urn.central_moment(spec.n, spec.k, li, order)),
                    f"central moment {order}, colour {i}, {spec}",
                )
        # complement symmetry H(n, n-k, ell; ell - s) = H(n, k, ell; s)
        comp = UrnSpec(spec.n, spec.n - spec.k, spec.ell)
        hc = np.exp(urn.log_hypergeometric(comp, np.asarray(spec.ell) - draws))
        res.check(bool(np.all(np.abs(hc - h) <= 1e-12)), f"complement symmetry, {spec}")
    return res


def suite_divergence(level: str) -> SuiteResult:
    res = SuiteResult("divergence")
    specs = list(small_grid(max_n=200 if level == "full" else 80, max_c=3, step=11))
    for spec in specs:
        rep = divergence.divergence_report(spec)
        tag = str(spec)
        res.check(rep.kl >= -1e-12, f"D < 0: {tag}")
        if spec.k <= 1:
            res.check(abs(rep.kl) <= 1e-12 and abs(rep.tv) <= 1e-12, f"k<=1 but D or TV nonzero: {tag}")
        res.check(rep.u_consistent, f"U-representation mismatch {rep.kl} vs {rep.kl_via_u}: {tag}")
        res.check(rep.pinsker_ok, f"Pinsker fails: {tag}")
        res.check(rep.bretagnolle_huber_ok, f"Bretagnolle-Huber fails: {tag}")
        res.check(rep.tv <= spec.c * spec.k / spec.n + 1e-12, f"TV > ck/n: {tag}")
        perm = UrnSpec(spec.n, spec.k, spec.ell[::-1])
        res.check(abs(divergence.relative_entropy(perm) - rep.kl) <= 1e-12, f"permutation: {tag}")
    top = 500 if level == "full" else 120
    for n in range(2, top + 1, 1 if level == "full" else 7):
        for k in sorted({0, 1, 2, n // 3, n // 2, n}):
            exact = divergence.relative_entropy(UrnSpec(n, k, (1, n - 1)))
            closed = bounds.exact_binary_divergence(n, k)
            res.check(abs(exact - closed) <= 1e-12, f"binary closed form at n={n}, k={k}")
    return res


def _bracket(res: SuiteResult, spec: UrnSpec, d: float) -> None:
    n, k, c = spec.n, spec.k, spec.c
    su, sl = bounds.stam_bounds(n, k, c)
    hu, hl = bounds.hm_bounds(n, k, c)
    res.check(sl <= d + 1e-10, f"Stam lower {sl} > D {d}: {spec}")
    res.check(d <= su + 1e-10, f"Stam upper {su} < D {d}: {spec}")
    res.check(hl <= d + 1e-10, f"HM lower {hl} > D {d}: {spec}")
    res.check(d <= hu + 1e-10, f"HM upper {hu} < D {d}: {spec}")
    t1 = bounds.thm1_upper(spec)
    res.check(d <= t1 + 1e-10, f"ell-dependent upper {t1} < D {d}: {spec}")
    if c == 2:
        p12 = bounds.prop12_upper(n, k, min(spec.ell))
        res.check(d <= p12 + 1e-10, f"two-colour upper {p12} < D {d}: {spec}")


def suite_bounds_c2(level: str) -> SuiteResult:
    res = SuiteResult("bracketing_c2")
    for spec in c2_grid(level):
        _bracket(res, spec, divergence.relative_entropy(spec))
        for name in bounds.proof_step_diagnostics(spec).violations(1e-10):
            res.check(False, f"proof step {name} out of order: {spec}")
        res.checked += 1
    return res


def suite_bounds_c3(level: str) -> SuiteResult:
    res = SuiteResult("bracketing_c3")
    for spec in c3_grid(level):
        _bracket(res, spec, divergence.relative_entropy(spec))
    return res


def suite_figure(level: str) -> SuiteResult:
    res = SuiteResult("figure1")
    n, k = 100, 30
    for ell in range(1, 51):
        spec = UrnSpec(n, k, (ell, n - ell))
        rep = bounds.bound_report(spec)
        d = divergence.relative_entropy(spec)
        for name, val in rep.upper_bounds().items():
            res.check(d <= val + 1e-10, f"{name} below D at ell={ell}")
        new = min(rep.thm1_upper, rep.prop12_upper)
        old = min(rep.stam_upper, rep.hm_upper)
        res.check(new <= old, f"new bounds {new} worse than uniform {old} at ell={ell}")
    d1 = divergence.relative_entropy(UrnSpec(n, k, (1, n - 1)))
    res.check(abs(d1 - 0.04882251) <= 1e-8, f"D(100,30,(1,99)) = {d1}")
    return res


# values recomputed independently in 40-digit arithmetic
_SPOT_VALUES = [
    ("stam upper (100,30,2)", lambda: bounds.stam_bounds(100, 30, 2)[0], 0.061886470337174565),
    ("stam lower (100,30,2)", lambda: bounds.stam_bounds(100, 30, 2)[1], 0.02219161310070401),
    ("hm upper (100,30,2)", lambda: bounds.hm_bounds(100, 30, 2)[0], 0.060709115127484524),
    ("hm lower (100,30,2)", lambda: bounds.hm_bounds(100, 30, 2)[1], 0.02480584513249584),
    ("thm1 (100,30,(50,50))", lambda: bounds.thm1_upper(UrnSpec(100, 30, (50, 50))), 0.02972283848584291),
    ("thm1 (100,30,(1,99))", lambda: bounds.thm1_upper(UrnSpec(100, 30, (1, 99))), 0.1053862807076735),
    ("prop12 (100,30,1)", lambda: bounds.prop12_upper(100, 30, 1), 0.04885611504419041),
    ("prop12 (100,30,50)", lambda: bounds.prop12_upper(100, 30, 50), 0.06508853976429652),
    ("binary (100,30)", lambda: bounds.exact_binary_divergence(100, 30), 0.04882251409188014),
    ("corollary (4,2,2)", lambda: definetti.definetti_bounds(4, 2, 2)["corollary"], 1 / 9),
    ("corollary (100,30,2)", lambda: definetti.definetti_bounds(100, 30, 2)["corollary"], 0.061886470337174565),
]


def suite_spot_values(level: str) -> SuiteResult:
    res = SuiteResult("closed_form_values")
    for name, fn, expected in _SPOT_VALUES:
        got = fn()
        res.check(abs(got - expected) <= 1e-12, f"{name}: got {got!r}, expected {expected!r}")
    s_star = bounds.crossover_s_star()
    res.check(0.8833 <= s_star <= 0.8835, f"crossover s* = {s_star}")
    bal, unb = bounds.limit_expressions(2, 0.5)
    res.check(unb > bal, "limit ordering at s=0.5")
    bal, unb = bounds.limit_expressions(2, 0.95)
    res.check(unb < bal, "limit ordering at s=0.95")
    return res


# (more unbalanced, less unbalanced) pairs with equal n and c
MAJORIZATION_PAIRS = [
    ((1, 11), (6, 6)),
    ((1, 11), (3, 9)),
    ((2, 10), (5, 7)),
    ((1, 1, 10), (2, 2, 8)),
    ((1, 1, 10), (4, 4, 4)),
    ((1, 3, 8), (3, 4, 5)),
    ((2, 2, 8), (2, 5, 5)),
    ((1, 1, 1, 9), (3, 3, 3, 3)),
    ((1, 2, 3, 6), (2, 3, 3, 4)),
    ((1, 49, 50), (20, 40, 40)),
]


def majorizes(a, b) -> bool:
    a, b = sorted(a, reverse=True), sorted(b, reverse=True)
    pa, pb = np.cumsum(a), np.cumsum(b)
    return len(a) == len(b) and pa[-1] == pb[-1] and bool(np.all(pa >= pb))


def suite_sigma(level: str) -> SuiteResult:
    res = SuiteResult("sigma_stats")
    for spec in c3_grid("fast"):
        s1, _ = bounds.sigma_stats(spec)
        res.check(s1 >= spec.c**2 - 1e-9, f"Sigma1 < c^2: {spec}")
    for a, b in MAJORIZATION_PAIRS:
        n = sum(a)
        s_a = bounds.sigma_stats(UrnSpec(n, 1, a))[0]
        s_b = bounds.sigma_stats(UrnSpec(n, 1, b))[0]
        res.check(majorizes(a, b) and s_a >= s_b, f"majorization order broken for {a} vs {b}")
    for n in (20, 100, 200):
        for c in (2, 3, 4):
            for k in range(1, n // 2 + 1, 7):
                first = (c - 1) / 2 * (math.log(n / (n - k)) - k / (n - 1))
                lim, _ = bounds.limit_expressions(c, k / n)
                res.check(
                    abs(first - lim) <= (c - 1) * k / (n * (n - 1)) + 1e-15,
                    f"leading term vs limit at n={n}, k={k}, c={c}",
                )
    return res


def suite_limit(level: str) -> SuiteResult:
    res = SuiteResult("limit_law")
    target = bounds.limit_expressions(2, 0.3)[0]
    gaps = []
    for n in (100, 1000, 10000):
        k = 3 * n // 10
        gaps.append(abs(divergence.relative_entropy(UrnSpec(n, k, (n // 2, n // 2))) - target))
    res.check(gaps[0] > gaps[1] > gaps[2], f"gaps not decreasing: {gaps}")
    res.check(gaps[2] <= 1e-3, f"gap at n=10000 is {gaps[2]}")
    return res


def random_measures(count: int, seed: int = SEED) -> Iterator[definetti.MixingMeasure]:
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(2, 21))
        c = int(rng.integers(2, 4))
        yield definetti.random_mixing_measure(n, c, rng, atoms=int(rng.integers(1, 13)))


def suite_definetti(level: str) -> SuiteResult:
    res = SuiteResult("definetti")
    chain = definetti.definetti_divergence(definetti.mixing_from_iid([0.5, 0.5], 4), 2)
    for got, want in zip(chain, (0.03226926056878580, 0.06371213879827431, 0.08494951839769874)):
        res.check(abs(got - want) <= 1e-10, f"worked example: {chain}")
    for mu in random_measures(200 if level == "full" else 40):
        ds, tvs = [], []
        for k in range(mu.n + 1):
            p, m = definetti.pk_from_mixture(mu, k), definetti.mk_from_mixture(mu, k)
            ds.append(definetti._kl_type_classes(p, m))
            tvs.append(definetti.type_class_tv(p, m))
        tag = f"n={mu.n}, c={mu.c}, atoms={mu.support}"
        res.check(all(a <= b + 1e-12 for a, b in zip(ds, ds[1:])), f"D not monotone in k: {tag}")
        res.check(all(a <= b + 1e-12 for a, b in zip(tvs, tvs[1:])), f"TV not monotone in k: {tag}")
        for k in range(1, mu.n + 1):
            d, mid, top = definetti.definetti_divergence(mu, k)
            bnd = definetti.definetti_bounds(mu.n, k, mu.c)
            res.check(d <= mid + 1e-10 and mid <= top + 1e-10, f"chain broken at k={k}: {tag}")
            res.check(d <= bnd["corollary"] + 1e-10, f"corollary broken at k={k}: {tag}")
            res.check(tvs[k] <= bnd["pinsker_tv"] + 1e-10, f"TV above Pinsker bound at k={k}: {tag}")
            res.check(tvs[k] <= bnd["df_tv"] + 1e-12, f"TV above ck/n at k={k}: {tag}")
    return res


def oracle_specs(count: int = 20, seed: int = SEED) -> list[UrnSpec]:
    """Seeded sample of specs small enough for the exact oracle."""
    rng = np.random.default_rng(seed)
    out = [UrnSpec(100, 30, (1, 99)), UrnSpec(4, 2, (2, 2))]
    while len(out) < count:
        c = int(rng.integers(2, 4))
        n = int(rng.integers(c, 121 if c == 2 else 61))
        cuts = np.sort(rng.choice(np.arange(1, n), size=c - 1, replace=False))
        ell = tuple(int(x) for x in np.diff(np.concatenate([[0], cuts, [n]])))
        out.append(UrnSpec(n, int(rng.integers(0, n + 1)), ell))
    return out


def suite_oracle(level: str) -> SuiteResult:
    res = SuiteResult("oracle")
    for spec in oracle_specs(20 if level == "full" else 4):
        iv = oracle.certified_divergence(spec, 128)
        d = divergence.relative_entropy(spec)
        res.check(iv.contains(d, 1e-12), f"float D {d!r} outside [{float(iv.lo)!r}, {float(iv.hi)!r}]: {spec}")
        law = oracle.exact_hypergeometric_law(spec)
        res.check(sum(law.values()) == 1, f"exact H does not sum to 1: {spec}")
    return res


SUITES: list[Callable[[str], SuiteResult]] = [
    suite_sandwich,
    suite_envelopes,
    suite_topsoe,
    suite_urn,
    suite_divergence,
    suite_spot_values,
    suite_figure,
    suite_sigma,
    suite_limit,
    suite_bounds_c2,
    suite_bounds_c3,
    suite_definetti,
    suite_oracle,
]


def _run_one(suite, level):
    try:
        return suite(level)
    except Exception as exc:  # a crash is a failure, not an abort
        res = SuiteResult(suite.__name__.removeprefix("suite_"))
        res.failures.append(f"{type(exc).__name__}: {exc}")
        return res


def run_suites(level: str = "fast", threads: int = 1) -> list[SuiteResult]:
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}")
    if threads <= 1:
        return [_run_one(s, level) for s in SUITES]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(lambda s: _run_one(s, level), SUITES))
