"""Command-line interface.

Subcommands: dist, limit, tv, stein, moments, verify, sample, markov, bench.
Exact rationals are printed as "num/den"; JSON output is canonical
(sorted keys, fixed separators) so identical invocations are byte-identical.
Exit codes: 0 success / all checks pass, 1 computation or check failure,
2 usage error.  RANKDIST_TRUNC overrides the default product truncation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from fractions import Fraction

from . import ensembles as ens
from . import gfmatrix as gfm
from . import markov as mkv
from . import stein
from . import tvbounds as tvb
from .qseries import all_pass, check_product_inequalities

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


_PARITY_BASES = {
    "zerodiag": (ens.ZERODIAG_EVEN, ens.ZERODIAG_ODD),
    "skewcentro": (ens.SKEWCENTRO_EVEN, ens.SKEWCENTRO_ODD),
}

ENSEMBLE_CHOICES = sorted(set(ens.KINDS) | set(_PARITY_BASES))


def resolve_ensemble(name: str, m: int, n: int | None) -> ens.Ensemble:
    if name == ens.UNIFORM:
        return ens.uniform(m)
    if m:
        raise UsageError("--m applies only to the uniform ensemble")
    if name in _PARITY_BASES:
        if n is None:
            raise UsageError(
                f"--ensemble {name} needs -even/-odd suffix or --n to fix parity"
            )
        even, odd = _PARITY_BASES[name]
        return ens.Ensemble(even if n % 2 == 0 else odd)
    return ens.Ensemble(name)


def env_qprod_trunc() -> int | None:
    raw = os.environ.get("RANKDIST_TRUNC")
    if raw is None:
        return None
    try:
        value = int(raw)
    except ValueError as exc:
        raise UsageError(f"RANKDIST_TRUNC must be an integer, got {raw!r}") from exc
    if value < 1:
        raise UsageError("RANKDIST_TRUNC must be >= 1")
    return value


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(header: list, rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _fs(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def emit_pmf(pmf_json: dict, fmt: str, out: str | None) -> None:
    if fmt == "json":
        _write(canonical_json(pmf_json), out)
    elif fmt == "csv":
        rows = []
        for rec in pmf_json["probs"]:
            if "num" in rec:
                rows.append([rec["k"], f"{rec['num']}/{rec['den']}"])
            else:
                rows.append(
                    [
                        rec["k"],
                        f"{rec['lo']['num']}/{rec['lo']['den']}",
                        f"{rec['hi']['num']}/{rec['hi']['den']}",
                    ]
                )
        header = ["k", "prob"] if len(rows[0]) == 2 else ["k", "lo", "hi"]
        _write(_csv_text(header, rows), out)
    else:  # table
        edict = pmf_json["ensemble"]
        name = edict["kind"] + (f"(m={edict['m']})" if "m" in edict else "")
        lines = [f"{name}  q={pmf_json['q']}"]
        for rec in pmf_json["probs"]:
            if "num" in rec:
                lines.append(f"  k={rec['k']:<3} {rec['num']}/{rec['den']}")
            else:
                lines.append(
                    f"  k={rec['k']:<3} [{rec['lo']['num']}/{rec['lo']['den']}, "
                    f"{rec['hi']['num']}/{rec['hi']['den']}]"
                )
        _write("\n".join(lines) + "\n", out)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_dist(args) -> int:
    e = resolve_ensemble(args.ensemble, args.m, args.n)
    pmf = ens.finite_pmf(e, args.q, args.n)
    emit_pmf(pmf.to_jsonable(), args.format, args.out)
    return EXIT_OK


def cmd_limit(args) -> int:
    e = resolve_ensemble(args.ensemble, args.m, args.parity_hint)
    limit = ens.limit_pmf(
        e, args.q, trunc_k=args.trunc_k, qprod_trunc=args.qprod_trunc or env_qprod_trunc()
    )
    emit_pmf(limit.to_jsonable(), args.format, args.out)
    return EXIT_OK


def cmd_tv(args) -> int:
    e = resolve_ensemble(args.ensemble, args.m, args.n)
    result = tvb.verify_tv_theorem(
        e, args.q, args.n, refined=args.refined, qprod_trunc=env_qprod_trunc()
    )
    _write(canonical_json(result.to_jsonable()), args.out)
    return EXIT_OK if result.passed else EXIT_CHECK_FAILED


def cmd_stein(args) -> int:
    e = resolve_ensemble(args.ensemble, args.m, args.parity_hint)
    checks = stein.verify_solution_bounds(e, [args.q], k_max=args.kmax)
    payload = {"checks": [c.to_jsonable() for c in checks]}
    _write(canonical_json(payload), args.out)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_CHECK_FAILED


def cmd_moments(args) -> int:
    e = resolve_ensemble(args.ensemble, args.m, args.n)
    checks = stein.moment_identities(e, args.q, args.n)
    _write(canonical_json({"checks": [c.to_jsonable() for c in checks]}), args.out)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_CHECK_FAILED


def _verify_ensembles(args) -> list[ens.Ensemble]:
    if args.ensemble:
        base = resolve_ensemble(args.ensemble, 0, args.n)
        if base.kind == ens.UNIFORM:
            ms = [args.m] if args.m is not None else range(args.mmax + 1)
            return [ens.uniform(m) for m in ms]
        return [base]
    out = [ens.uniform(m) for m in range(args.mmax + 1)]
    out += [
        ens.Ensemble(k)
        for k in (
            ens.SYMMETRIC,
            ens.ZERODIAG_EVEN,
            ens.ZERODIAG_ODD,
            ens.SKEWCENTRO_EVEN,
            ens.SKEWCENTRO_ODD,
            ens.HERMITIAN,
        )
    ]
    return out


def cmd_verify(args) -> int:
    if not args.all and not args.ensemble:
        raise UsageError("verify needs --all or --ensemble")
    if args.n is not None and args.n < 1:
        raise UsageError("window checks are stated for n >= 1")
    qs = [args.q] if args.q is not None else list(range(2, args.qmax + 1))
    ns = [args.n] if args.n is not None else list(range(1, args.nmax + 1))
    targets = _verify_ensembles(args)
    if args.refined:
        if targets != [ens.Ensemble(ens.HERMITIAN)] or any(q < 3 for q in qs):
            raise UsageError("--refined applies to the Hermitian ensemble at q >= 3")

    summary: list[tuple[str, bool, str]] = []
    artifact: dict = {}

    if args.refined:
        results = [
            tvb.verify_tv_theorem(ens.Ensemble(ens.HERMITIAN), q, n, refined=True)
            for q in qs
            for n in ns
        ]
        grid = tvb.GridReport(tuple(results), ())
    else:
        grid = tvb.tv_grid(targets, qs, ns)
    ok = grid.all_pass
    summary.append(
        (
            "tv-windows",
            ok,
            f"{sum(r.passed for r in grid.results)}/{len(grid.results)} cells inside"
            + (f", {len(grid.errors)} errors" if grid.errors else ""),
        )
    )
    artifact["tv_windows"] = [r.to_jsonable() for r in grid.results]
    artifact["tv_errors"] = [list(e) for e in grid.errors]

    bound_checks = []
    for e in targets:
        bound_checks += stein.verify_solution_bounds(e, qs, k_max=args.kmax)
    ok = all(c.passed for c in bound_checks)
    summary.append(
        ("solution-bounds", ok, f"{sum(c.passed for c in bound_checks)}/{len(bound_checks)}")
    )
    artifact["solution_bounds"] = [c.to_jsonable() for c in bound_checks]

    moment_checks = []
    n_top = max(12, max(ns))
    for e in targets:
        for q in qs:
            for n in range(1, n_top + 1):
                try:
                    ens.check_parity(e, n)
                except ens.ParityError:
                    continue
                moment_checks += stein.moment_identities(e, q, n)
    ok = all(c.passed for c in moment_checks)
    summary.append(
        ("moment-identities", ok, f"{sum(c.passed for c in moment_checks)}/{len(moment_checks)}")
    )
    artifact["moment_identities"] = [c.to_jsonable() for c in moment_checks]

    product_checks = []
    for q in range(2, max(9, max(qs)) + 1):
        product_checks += check_product_inequalities(q, n_max=30)
    ok = all_pass(product_checks)
    summary.append(
        ("product-inequalities", ok, f"{sum(c.passed for c in product_checks)}/{len(product_checks)}")
    )
    artifact["product_inequalities"] = [c.to_jsonable() for c in product_checks]

    if args.all or (args.ensemble and args.ensemble == ens.UNIFORM):
        stat_checks = []
        for q in qs:
            for n in range(1, min(n_top, 12) + 1):
                for m in range(0, max(3, args.mmax) + 1):
                    stat_checks.append(
                        mkv.verify_stationarity(mkv.build_chain(q, n, m))
                    )
        ok = all(c.exact for c in stat_checks)
        summary.append(
            ("markov-stationarity", ok, f"{sum(c.exact for c in stat_checks)}/{len(stat_checks)}")
        )
        artifact["markov_stationarity"] = [c.to_jsonable() for c in stat_checks]

    all_ok = all(ok for _, ok, _ in summary)
    lines = [
        f"[{'PASS' if ok else 'FAIL'}] {name}: {note}" for name, ok, note in summary
    ]
    lines.append(f"VERIFY: {'all checks passed' if all_ok else 'FAILURES found'}")
    print("\n".join(lines))
    if args.json_out:
        _write(canonical_json(artifact), args.json_out)
    return EXIT_OK if all_ok else EXIT_CHECK_FAILED


def cmd_sample(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    e = resolve_ensemble(args.ensemble, args.m, args.n)
    if args.realize:
        pe = ens.prime_power(args.q) or (0, 0)
        if args.realize == "symplectic" and pe[0] != 2:
            raise UsageError("symplectic realization requires q a power of 2")
        if args.realize == "skew" and (pe[0] == 2 or pe[0] == 0):
            raise UsageError("skew-symmetric realization requires odd q")
        if e.kind not in (ens.ZERODIAG_EVEN, ens.ZERODIAG_ODD):
            raise UsageError("--realize applies to the zerodiag ensemble")
    try:
        field = gfm.field_for(e, args.q)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    report = gfm.empirical_pmf(
        e, field, args.n, args.trials, args.seed, workers=args.workers
    )
    payload = report.to_jsonable()
    if args.realize:
        payload["realization"] = args.realize
    _write(canonical_json(payload), args.out)
    return EXIT_OK


def cmd_markov(args) -> int:
    chain = mkv.build_chain(args.q, args.n, args.m)
    stat = mkv.verify_stationarity(chain)
    if not stat.exact:
        return EXIT_CHECK_FAILED
    sim = mkv.simulate_chain_vs_matrix(
        args.q, args.n, args.m, args.steps, args.seed, burn_in=args.burnin
    )
    _write(canonical_json(sim.to_jsonable()), args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    if not sizes:
        raise UsageError("--sizes must list at least one size")
    field = gfm.field_spec(2)
    rows = []
    for size in sizes:
        mat = gfm.random_matrix(field, size, size, gfm.rng_stream(args.seed, 0))
        t0 = time.perf_counter()
        r_bits = gfm.rank_bitsliced(mat)
        t1 = time.perf_counter()
        r_gen = gfm.rank_generic(mat)
        t2 = time.perf_counter()
        if r_bits != r_gen:
            print(f"rank mismatch at size {size}: {r_bits} vs {r_gen}", file=sys.stderr)
            return EXIT_CHECK_FAILED
        rows.append([size, r_bits, f"{t1 - t0:.6f}", f"{t2 - t1:.6f}"])
    _write(_csv_text(["size", "rank", "bitsliced_s", "generic_s"], rows), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rankdist",
        description="Rank distributions of random matrices over finite fields: "
        "exact pmfs, certified limits, distance-window verification, sampling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, need_n=False, with_format=False):
        p.add_argument("--ensemble", required=True, choices=ENSEMBLE_CHOICES)
        p.add_argument("--q", type=int, required=True)
        p.add_argument("--m", type=int, default=0, help="column surplus (uniform only)")
        if need_n:
            p.add_argument("--n", type=int, required=True)
        if with_format:
            p.add_argument("--format", choices=["json", "csv", "table"], default="json")
        p.add_argument("--out", default=None, help="write output to this path")

    p = sub.add_parser("dist", help="exact finite-size pmf")
    add_common(p, need_n=True, with_format=True)
    p.set_defaults(fn=cmd_dist)

    p = sub.add_parser("limit", help="interval-enclosed limiting pmf")
    add_common(p, with_format=True)
    p.add_argument("--trunc-k", type=int, default=24)
    p.add_argument("--qprod-trunc", type=int, default=None)
    p.add_argument(
        "--parity-hint",
        type=int,
        default=None,
        help="even/odd n selecting the variant for zerodiag and skewcentro",
    )
    p.set_defaults(fn=cmd_limit)

    p = sub.add_parser("tv", help="certified distance to the limit vs its window")
    add_common(p, need_n=True)
    p.add_argument("--refined", action="store_true")
    p.set_defaults(fn=cmd_tv)

    p = sub.add_parser("stein", help="certified solution-norm bound checks")
    add_common(p)
    p.add_argument("--kmax", type=int, default=40)
    p.add_argument("--parity-hint", type=int, default=None)
    p.set_defaults(fn=cmd_stein)

    p = sub.add_parser("moments", help="exact moment identity checks")
    add_common(p, need_n=True)
    p.set_defaults(fn=cmd_moments)

    p = sub.add_parser("verify", help="run the full verification suite")
    p.add_argument("--all", action="store_true")
    p.add_argument("--ensemble", choices=ENSEMBLE_CHOICES, default=None)
    p.add_argument("--q", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--qmax", type=int, default=5)
    p.add_argument("--nmax", type=int, default=10)
    p.add_argument("--mmax", type=int, default=2)
    p.add_argument("--kmax", type=int, default=40)
    p.add_argument("--refined", action="store_true")
    p.add_argument("--json-out", default=None)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("sample", help="Monte-Carlo histogram vs the exact pmf")
    add_common(p, need_n=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--realize", choices=["symplectic", "skew"], default=None)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("markov", help="rank-evolution chain: exact + simulated")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--steps", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--burnin", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_markov)

    p = sub.add_parser("bench", help="bitsliced vs generic GF(2) rank timing")
    p.add_argument("--sizes", default="64,256,1024")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ens.ParityError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
