"""Command-line entry point: ``urndiv {figure,bounds,divergence,definetti,verify}``.

Exit codes: 0 success, 1 invariant violation, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from . import bounds, definetti, divergence, oracle, verify
from .urn import UrnSpec

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2

FIGURE_COLUMNS = [
    "ell",
    "exact_D",
    "stam_upper",
    "stam_lower",
    "hm_upper",
    "hm_lower",
    "thm1_upper",
    "prop12_upper",
]
DEFINETTI_COLUMNS = ["n", "k", "d", "chain_mid", "chain_max", "corollary", "gk_b", "monotone_in_k"]
PRESETS = ("iid-fair-coin", "iid:P1,P2,...", "point-mass-balanced", "uniform[:C]")


class ConfigError(ValueError):
    """Invalid command-line configuration; maps to exit code 2."""


@dataclass(frozen=True)
class SweepConfig:
    n: int
    k: int
    c: int = 2
    ell_range: tuple[int, int] = (1, 0)  # inclusive; (1, 0) means 1..n//2
    output_format: str = "csv"
    plot: Optional[str] = None

    def __post_init__(self):
        if self.c != 2:
            raise ConfigError("figure mode sweeps two-colour urns only (c = 2)")
        if self.n < 2 or not 0 <= self.k <= self.n:
            raise ConfigError(f"need n >= 2 and 0 <= k <= n, got n={self.n}, k={self.k}")
        ells = self.ells
        if not ells or ells[0] < 1 or ells[-1] >= self.n:
            raise ConfigError(f"ell range must lie within 1..{self.n - 1}")

    @property
    def ells(self) -> range:
        lo, hi = self.ell_range
        if hi < lo:
            hi = self.n // 2
        return range(lo, hi + 1)


# --- formatting -------------------------------------------------------------


def format_cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.17g}"
    if isinstance(x, (list, tuple)):
        return ";".join(format_cell(v) for v in x)
    return str(x)


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return format_cell(x)
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    return x


def render(rows: list[dict], columns: Sequence[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([_json_safe({c: r.get(c) for c in columns}) for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([format_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def write_atomic(path: str, data: str | bytes) -> None:
    """Write to a sibling temp file, then rename over ``path``."""
    directory = os.path.dirname(os.path.abspath(path))
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".urndiv-", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(text: str, out: Optional[str]) -> None:
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _ordered_map(fn: Callable, items, threads: int) -> list:
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(fn, items))


# --- figure -----------------------------------------------------------------


def figure_row(n: int, k: int, ell: int) -> dict:
    spec = UrnSpec(n, k, (ell, n - ell))
    rep = bounds.bound_report(spec)
    return {
        "ell": ell,
        "exact_D": divergence.relative_entropy(spec),
        "stam_upper": rep.stam_upper,
        "stam_lower": rep.stam_lower,
        "hm_upper": rep.hm_upper,
        "hm_lower": rep.hm_lower,
        "thm1_upper": rep.thm1_upper,
        "prop12_upper": rep.prop12_upper,
    }


def figure_rows(config: SweepConfig, threads: int = 1) -> list[dict]:
    return _ordered_map(lambda ell: figure_row(config.n, config.k, ell), config.ells, threads)


def render_svg(rows: list[dict], n: int, k: int) -> str:
    """Single-panel SVG; reproducible byte for byte."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ells = [r["ell"] for r in rows]

    def col(name):
        return [math.nan if r[name] is None else r[name] for r in rows]

    with matplotlib.rc_context({"svg.hashsalt": "urndiv", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        ax.plot(ells, col("exact_D"), "o", ms=3.5, mfc="none", color="black", label="exact D")
        ax.plot(ells, col("stam_upper"), "-", color="tab:blue", label="Stam upper")
        ax.plot(ells, col("stam_lower"), "-", color="tab:blue", alpha=0.5, label="Stam lower")
        ax.plot(ells, col("hm_upper"), "-", color="tab:green", label="HM upper")
        ax.plot(ells, col("hm_lower"), "-", color="tab:green", alpha=0.5, label="HM lower")
        ax.plot(ells, col("thm1_upper"), "--", color="tab:red", label="colour-count bound")
        ax.plot(ells, col("prop12_upper"), ":", color="tab:purple", label="two-colour bound")
        ax.set_xlabel("ell")
        ax.set_ylabel("relative entropy (nats)")
        ax.set_title(f"n = {n}, k = {k}")
        ax.legend(fontsize=7)
        fig.tight_layout()
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()


def cmd_figure(args) -> int:
    lo, hi = (1, 0)
    if args.ell_range:
        lo, hi = _parse_span(args.ell_range)
    config = SweepConfig(args.n, args.k, args.c, (lo, hi), args.format, args.svg)
    rows = figure_rows(config, args.threads)
    emit(render(rows, FIGURE_COLUMNS, config.output_format), args.out)
    if config.plot:
        write_atomic(config.plot, render_svg(rows, config.n, config.k))
    return EXIT_OK


# --- bounds / divergence ----------------------------------------------------


def _parse_ell(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.replace(";", ",").split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"colour counts must be integers, got {text!r}") from None


def _spec(args) -> UrnSpec:
    try:
        return UrnSpec(args.n, args.k, _parse_ell(args.ell))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_bounds(args) -> int:
    rep = bounds.bound_report(_spec(args)).as_dict()
    emit(render([rep], list(rep), args.format), args.out)
    return EXIT_OK


def _outward(x: Fraction, down: bool) -> float:
    f = float(x)
    if down and Fraction(f) > x:
        return math.nextafter(f, -math.inf)
    if not down and Fraction(f) < x:
        return math.nextafter(f, math.inf)
    return f


def cmd_divergence(args) -> int:
    spec = _spec(args)
    rep = divergence.divergence_report(spec)
    row = {
        "n": spec.n,
        "k": spec.k,
        "ell": list(spec.ell),
        "kl": rep.kl,
        "tv": rep.tv,
        "kl_via_u": rep.kl_via_u,
        "support_size": rep.support_size,
    }
    status = EXIT_OK if rep.consistent else EXIT_VIOLATION
    if args.certify:
        iv = oracle.certified_divergence(spec, args.precision_bits)
        row["certified_lo"] = _outward(Fraction(iv.lo), down=True)
        row["certified_hi"] = _outward(Fraction(iv.hi), down=False)
        row["certified_contains"] = iv.contains(rep.kl, 1e-12)
        if not row["certified_contains"]:
            status = EXIT_VIOLATION
    emit(render([row], list(row), args.format), args.out)
    if status:
        print(f"invariant violated for {spec}", file=sys.stderr)
    return status


# --- de Finetti -------------------------------------------------------------


def parse_model(text: str) -> definetti.MixingMeasure:
    """Header ``n c``, then one ``ell_1 ... ell_c weight`` line per atom; ``#`` starts a comment."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ConfigError("model file is empty")
    try:
        n, c = (int(x) for x in lines[0].split())
    except ValueError:
        raise ConfigError(f"model header must be 'n c', got {lines[0]!r}") from None
    weights: dict[tuple[int, ...], float] = {}
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != c + 1:
            raise ConfigError(f"expected {c} counts and a weight, got {ln!r}")
        try:
            ell = tuple(int(x) for x in parts[:c])
            w = float(parts[c])
        except ValueError:
            raise ConfigError(f"unparseable atom line {ln!r}") from None
        if not math.isfinite(w):
            raise ConfigError(f"weight must be finite, got {ln!r}")
        weights[ell] = weights.get(ell, 0.0) + w
    try:
        return definetti.MixingMeasure.normalized(n, c, weights, tol=1e-9)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def preset_family(name: str) -> Callable[[int], definetti.MixingMeasure]:
    if name == "iid-fair-coin":
        return lambda n: definetti.mixing_from_iid([0.5, 0.5], n)
    if name.startswith("iid:"):
        try:
            p = [float(x) for x in name[4:].split(",")]
            definetti.mixing_from_iid(p, 1)
        except ValueError as exc:
            raise ConfigError(f"bad preset {name!r}: {exc}") from None
        return lambda n: definetti.mixing_from_iid(p, n)
    if name == "point-mass-balanced":
        return lambda n: definetti.point_mass((n // 2, n - n // 2))
    if name == "uniform" or name.startswith("uniform:"):
        try:
            c = int(name.split(":", 1)[1]) if ":" in name else 2
        except ValueError:
            raise ConfigError(f"bad preset {name!r}") from None
        if c < 2:
            raise ConfigError("uniform preset needs c >= 2")
        return lambda n: definetti.uniform_types(n, c)
    raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")


def _parse_span(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise ConfigError(f"range must be 'lo:hi', got {text!r}") from None
    if hi < lo:
        raise ConfigError(f"empty range {text!r}")
    return lo, hi


def parse_n_range(text: str) -> list[int]:
    if ":" in text:
        parts = text.split(":")
        if len(parts) == 3:
            try:
                lo, hi, step = (int(x) for x in parts)
            except ValueError:
                raise ConfigError(f"bad n range {text!r}") from None
            if step < 1:
                raise ConfigError("n range step must be positive")
            ns = list(range(lo, hi + 1, step))
        else:
            lo, hi = _parse_span(text)
            ns = list(range(lo, hi + 1))
    else:
        try:
            ns = [int(x) for x in text.split(",")]
        except ValueError:
            raise ConfigError(f"bad n range {text!r}") from None
    if not ns or min(ns) < 2:
        raise ConfigError("every n must be at least 2")
    return ns


def definetti_rows(mu: definetti.MixingMeasure, k_max: Optional[int]) -> list[dict]:
    top = mu.n if k_max is None else min(k_max, mu.n)
    rows = []
    for k in range(1, top + 1):
        chain = definetti.definetti_divergence(mu, k)
        bnd = definetti.definetti_bounds(mu.n, k, mu.c)
        rows.append(
            {
                "n": mu.n,
                "k": k,
                "d": chain.d,
                "chain_mid": chain.chain_mid,
                "chain_max": chain.chain_max,
                "corollary": bnd["corollary"],
                "gk_b": bnd["gk_b"],
            }
        )
    # D(P_0 || M_0) = 0, so the sequence starts there
    ds = [0.0] + [r["d"] for r in rows]
    monotone = all(a <= b + 1e-12 for a, b in zip(ds, ds[1:]))
    for r in rows:
        r["monotone_in_k"] = monotone
    return rows


def chain_holds(row: dict, slack: float = 1e-10) -> bool:
    return (
        row["d"] <= row["chain_mid"] + slack
        and row["chain_mid"] <= row["chain_max"] + slack
        and row["d"] <= row["corollary"] + slack
    )


def cmd_definetti(args) -> int:
    if (args.model is None) == (args.preset is None):
        raise ConfigError("give exactly one of --model or --preset")
    if args.k_max is not None and args.k_max < 1:
        raise ConfigError("--k-max must be at least 1")
    if args.model is not None:
        if args.n_range:
            raise ConfigError("--n-range applies to presets only; a model file fixes n")
        try:
            with open(args.model, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read model file: {exc}") from None
        measures = [parse_model(text)]
    else:
        family = preset_family(args.preset)
        measures = [family(n) for n in parse_n_range(args.n_range or "4")]
    blocks = _ordered_map(lambda mu: definetti_rows(mu, args.k_max), measures, args.threads)
    rows = [r for block in blocks for r in block]
    emit(render(rows, DEFINETTI_COLUMNS, args.format), args.out)
    bad = [r for r in rows if not chain_holds(r)]
    if bad:
        print(f"chain inequality violated at n={bad[0]['n']}, k={bad[0]['k']}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


# --- verify -----------------------------------------------------------------


def render_verify(results: list[verify.SuiteResult], fmt: str) -> str:
    if fmt == "json":
        payload = [
            {"suite": r.name, "checked": r.checked, "failures": r.failures, "passed": r.passed}
            for r in results
        ]
        return json.dumps(payload, indent=2) + "\n"
    width = max(len(r.name) for r in results)
    lines = [f"{'suite':<{width}}  {'checked':>8}  {'failed':>6}  status"]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{r.name:<{width}}  {r.checked:>8}  {len(r.failures):>6}  {status}")
    for r in results:
        if r.failures:
            lines.append(f"[{r.name}] first violation: {r.failures[0]}")
    return "\n".join(lines) + "\n"


def cmd_verify(args) -> int:
    results = verify.run_suites(args.level, args.threads)
    emit(render_verify(results, args.format), args.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VIOLATION


# --- argument parsing -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", metavar="PATH", help="write here instead of stdout")
    common.add_argument("--threads", type=int, default=1, metavar="N")
    common.add_argument("--precision-bits", type=int, default=128, metavar="B")

    parser = argparse.ArgumentParser(
        prog="urndiv",
        description="Divergence between sampling with and without replacement from an urn.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("figure", parents=[common], help="exact D and bounds along ell = 1..n/2")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--k", type=int, default=30)
    p.add_argument("--c", type=int, default=2)
    p.add_argument("--ell-range", metavar="LO:HI", help="default 1:n/2")
    p.add_argument("--svg", metavar="PATH", help="also draw the sweep as SVG")
    p.set_defaults(func=cmd_figure)

    for name, func, text in (
        ("bounds", cmd_bounds, "every closed-form bound for one urn"),
        ("divergence", cmd_divergence, "exact D and TV for one urn"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--k", type=int, required=True)
        p.add_argument("--ell", required=True, metavar="L1,L2,...")
        if name == "divergence":
            p.add_argument("--certify", action="store_true", help="add a certified enclosure")
        p.set_defaults(func=func)

    p = sub.add_parser("definetti", parents=[common], help="finite de Finetti experiment")
    p.add_argument("--model", metavar="FILE")
    p.add_argument("--preset", metavar="NAME", help=" | ".join(PRESETS))
    p.add_argument("--k-max", type=int)
    p.add_argument("--n-range", metavar="LO:HI[:STEP] | N1,N2,...")
    p.set_defaults(func=cmd_definetti)

    p = sub.add_parser("verify", parents=[common], help="run the invariant suites")
    p.add_argument("--level", choices=verify.LEVELS, default="fast")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.threads < 1:
        print("urndiv: --threads must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    if args.precision_bits < 64:
        print("urndiv: --precision-bits must be at least 64", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"urndiv: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except oracle.PrecisionError as exc:
        print(f"urndiv: {exc}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
