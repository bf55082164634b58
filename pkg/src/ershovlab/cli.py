"""Command-line interface.

Every report-producing subcommand takes ``--csv PATH`` for the exact
delimited output and ``--plot`` to render a matplotlib figure next to it
(at ``PATH`` with a ``.png`` suffix, or an explicit ``--plot-path``).
Exit codes: 0 pass, 1 invariant violation, 2 input error.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import figures, reports
from .constructions import (
    build_ce_density,
    build_difference_pair,
    certify_fce,
    check_interval_property,
    decompose_nce,
    geometric_schedule,
    modulus,
    transfer,
    verify_decomposition,
    verify_modulus,
)
from .density import (
    DensitySeries,
    check_limsup_difference,
    default_tail_window,
    window_extrema,
)
from .errors import EXIT_INPUT, EXIT_OK, EXIT_VIOLATION, ErshovError, InputError
from .files import (
    load_sequence,
    load_set,
    load_table,
    parse_fraction,
    save_set,
    save_table,
    serialize_set,
    serialize_table,
)
from .generate import GeneratorSpec, generate
from .reals import LimsupReal, diff_representation
from .suites import run_suite
from .tables import BoundFunction, SetPrefix, classify, limit_set, mind_change_profile


def parse_bound_spec(spec: str) -> BoundFunction:
    if spec == "id":
        return BoundFunction.identity()
    if spec.startswith("const:"):
        try:
            return BoundFunction.constant(int(spec.split(":", 1)[1]))
        except ValueError:
            raise InputError(f"bad constant bound {spec!r}") from None
    if spec.startswith("table:"):
        path = Path(spec.split(":", 1)[1])
        if not path.exists():
            raise InputError(f"bound table file {path} not found")
        return BoundFunction.from_table(int(tok) for tok in path.read_text().split())
    raise InputError(f"bound spec must be id, const:N, or table:FILE, got {spec!r}")


def parse_window(spec: str | None) -> tuple[int, int] | None:
    if spec is None:
        return None
    parts = spec.split(":")
    if len(parts) != 2:
        raise InputError(f"window must be LO:HI, got {spec!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise InputError(f"window must be LO:HI integers, got {spec!r}") from None


def load_target(spec: str) -> LimsupReal:
    """A sequence file path, or an inline constant ``const:VALUE[:LEN]``."""
    if spec.startswith("const:"):
        parts = spec.split(":")
        value = parse_fraction(parts[1])
        length = int(parts[2]) if len(parts) > 2 else 16
        return LimsupReal.constant(value, length)
    return LimsupReal(load_sequence(spec))


def _figure_path(args, default_source: str | None) -> Path:
    if getattr(args, "plot_path", None):
        return Path(args.plot_path)
    if getattr(args, "csv", None):
        return figures.default_figure_path(args.csv)
    if default_source:
        return Path(default_source).with_suffix(".png")
    raise InputError("--plot needs --csv, --plot-path, or an input file to name the figure")


def cmd_gen(args) -> int:
    spec = GeneratorSpec(
        kind=args.kind,
        universe=args.universe,
        stages=args.stages,
        seed=args.seed,
        settle=args.settle,
        budget=args.budget,
        q=parse_fraction(args.q) if args.q else None,
        block_ratio=args.ratio,
    )
    obj = generate(spec)
    if isinstance(obj, SetPrefix):
        text = serialize_set(obj)
    else:
        text = serialize_table(obj)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_classify(args) -> int:
    table = load_table(args.table)
    bound = parse_bound_spec(args.f) if args.f else None
    profile = mind_change_profile(table)
    cls = classify(table, bound)
    ls = limit_set(table)
    print(cls.describe())
    print(
        f"universe {table.universe}, stages {table.stages}, "
        f"limit set size {ls.prefix.size}, uncertified elements {len(ls.uncertified)}"
    )
    if args.csv:
        reports.write_profile_csv(profile, cls, args.csv)
        print(f"wrote {args.csv}")
    if args.plot:
        print(f"wrote {figures.save_profile_figure(profile, _figure_path(args, args.table))}")
    return EXIT_OK


def cmd_density(args) -> int:
    sp = load_set(args.set)
    series = DensitySeries.of_set(sp, source=args.set)
    lo, hi = parse_window(args.window) or default_tail_window(sp.universe)
    ext = window_extrema(series, lo, hi)
    print(ext.describe())
    if args.csv:
        reports.write_density_csv(series, ext, args.csv)
        print(f"wrote {args.csv}")
    if args.plot:
        print(f"wrote {figures.save_density_figure(series, ext, _figure_path(args, args.set))}")
    return EXIT_OK


def cmd_decompose(args) -> int:
    table = load_table(args.table)
    dec = decompose_nce(table)
    issues = verify_decomposition(table, dec)
    print(f"level {dec.source_level}: {len(dec.layers)} nested monotone layers")
    for issue in issues:
        print(f"violation: {issue}")
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for j, layer in enumerate(dec.layers, start=1):
            save_table(layer, out / f"layer{j}.ershov")
        print(f"wrote {len(dec.layers)} layer tables to {out}")
    return EXIT_OK if not issues else EXIT_VIOLATION


def cmd_diffrep(args) -> int:
    table = load_table(args.table)
    res = diff_representation(table)
    print(
        f"{res.layer_count} layers; residual exactly 0 at all {len(res.rows)} prefixes: {res.exact}"
    )
    if args.csv:
        reports.write_diffrep_csv(res, args.csv)
        print(f"wrote {args.csv}")
    if args.plot:
        print(f"wrote {figures.save_diffrep_figure(res, _figure_path(args, args.table))}")
    return EXIT_OK if res.exact else EXIT_VIOLATION


def cmd_cebuild(args) -> int:
    target = load_target(args.target)
    schedule = geometric_schedule(args.universe, args.block_base)
    table = build_ce_density(target, schedule, args.universe)
    save_table(table, args.out)
    final = SetPrefix(table.universe, table.limit_bits())
    print(
        f"wrote {args.out}: monotone table, {len(schedule)} blocks, "
        f"final density {final.density(table.universe)}"
    )
    return EXIT_OK


def cmd_cepair(args) -> int:
    a = load_target(args.a)
    b = load_target(args.b)
    q = parse_fraction(args.q)
    try:
        pair = build_difference_pair(a, b, q, args.universe, schedule_base=args.block_base)
    except InputError as exc:
        if args.equal_fallback:
            # Degenerate case: equal targets admit no separator; a single
            # monotone set serves as both.
            table = build_ce_density(
                a, geometric_schedule(args.universe, args.block_base), args.universe
            )
            save_table(table, args.out_a)
            save_table(table, args.out_b)
            print(f"no admissible separator ({exc}); wrote the single-set fallback")
            return EXIT_OK
        raise
    save_table(pair.outer, args.out_a)
    save_table(pair.inner, args.out_b)
    rho_a = Fraction(int(pair.outer.limit_bits().sum()), args.universe)
    rho_b = Fraction(int(pair.inner.limit_bits().sum()), args.universe)
    print(
        f"wrote {args.out_a} (density {rho_a}) and {args.out_b} (density {rho_b}), "
        f"separator {q}, base density {pair.base_density}"
    )
    return EXIT_OK


def cmd_modulus(args) -> int:
    table = load_table(args.table)
    bound = parse_bound_spec(args.f)
    mp = modulus(table, bound, args.horizon)
    issues = verify_modulus(mp)
    print(f"m = {mp.values} (bound {bound.name}, horizon {args.horizon})")
    for issue in issues:
        print(f"violation: {issue}")
    if args.csv:
        reports.write_modulus_csv(mp, args.csv)
        print(f"wrote {args.csv}")
    if args.plot:
        print(f"wrote {figures.save_modulus_figure(mp, _figure_path(args, args.table))}")
    return EXIT_OK if not issues else EXIT_VIOLATION


def cmd_transfer(args) -> int:
    table = load_table(args.table)
    bound = parse_bound_spec(args.f)
    res = transfer(table, bound, args.horizon, parse_window(args.window))
    ok = res.tracking_ok
    for row in res.tracking:
        mark = "ok" if row.ok else "FAIL"
        print(
            f"[{mark}] level {row.level}: m={row.stage}, rho_x(A)={row.rho_a}, "
            f"rho_m(B)={row.rho_b}, error={row.error} (bound {row.bound})"
        )
    violations = check_interval_property(res)
    if violations:
        ok = False
        print(f"interval case property violated at {violations[0]}")
    print(res.b_extrema.describe())
    if args.out_b:
        save_set(res.b, args.out_b)
        print(f"wrote {args.out_b}")
    if args.csv:
        reports.write_tracking_csv(res, args.csv)
        print(f"wrote {args.csv}")
    if args.plot:
        print(f"wrote {figures.save_tracking_figure(res, _figure_path(args, args.table))}")
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_certify(args) -> int:
    table = load_table(args.table)
    bound = parse_bound_spec(args.f)
    cert = certify_fce(table, bound, args.horizon)
    agree = int(cert.limit_agrees.sum())
    print(
        f"certificate over z < {cert.horizon}: changes bounded by f everywhere: "
        f"{cert.all_bounded}; staged limit agrees at {agree}/{cert.horizon} elements"
    )
    if cert.disagreements:
        print(f"first disagreement at z={cert.disagreements[0]}")
    if cert.anchor_violations:
        print(f"anchor violated at z={cert.anchor_violations[0]}")
    if args.csv:
        reports.write_certificate_csv(cert, args.csv)
        print(f"wrote {args.csv}")
    if args.plot:
        print(f"wrote {figures.save_certificate_figure(cert, _figure_path(args, args.table))}")
    ok = cert.all_bounded and cert.monotone_ok and not cert.anchor_violations
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_checklimsup(args) -> int:
    a = load_sequence(args.a)
    b = load_sequence(args.b)
    tol = parse_fraction(args.tol) if args.tol else Fraction(0)
    rep = check_limsup_difference(a, b, parse_window(args.window), tol)
    print(
        f"window [{rep.window[0]}, {rep.window[1]}]: difference estimate {rep.difference_estimate}, "
        f"oscillation {rep.oscillation} (tolerance {rep.tolerance}), "
        f"limsup estimates {rep.limsup_a}, {rep.limsup_b}, residual {rep.residual}"
    )
    if not rep.limit_plausible:
        print("oscillation exceeds tolerance: no finite evidence that the difference converges")
    if args.csv:
        reports.write_limsup_csv(rep, args.csv)
        print(f"wrote {args.csv}")
    if args.plot:
        print(
            f"wrote {figures.save_sequences_figure((a, b), ('a', 'b'), _figure_path(args, args.a))}"
        )
    return EXIT_OK


def cmd_suite(args) -> int:
    report = run_suite(args.name, quick=args.quick)
    for line in report.lines():
        print(line)
    if args.csv:
        reports.write_suite_csv(report, args.csv)
        print(f"wrote {args.csv}")
    if args.plot:
        print(f"wrote {figures.save_suite_figure(report, _figure_path(args, None))}")
    print(f"suite {report.name}: {'PASS' if report.passed else 'FAIL'}")
    return EXIT_OK if report.passed else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ershovlab",
        description="Exact-rational experiments with limit-computable approximations and asymptotic density",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_report_flags(p):
        p.add_argument("--csv", help="write the exact CSV report here")
        p.add_argument("--plot", action="store_true", help="render a figure next to the CSV")
        p.add_argument("--plot-path", help="explicit figure path")

    p = sub.add_parser("gen", help="generate a table or set deterministically")
    p.add_argument("--kind", required=True, choices=["delta2", "nce", "ce", "oscblocks", "beatty"])
    p.add_argument("--universe", type=int, required=True)
    p.add_argument("--stages", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--settle", choices=["early", "uniform"], default="early")
    p.add_argument("--budget", type=int, help="mind-change budget (delta2/nce)")
    p.add_argument("--q", help="density p/r (beatty)")
    p.add_argument("--ratio", type=int, default=4, help="block ratio (oscblocks)")
    p.add_argument("--out", help="output path (stdout if omitted)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("classify", help="mind-change profile and hierarchy level")
    p.add_argument("table")
    p.add_argument("--f", help="bound: id, const:N, or table:FILE")
    add_report_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("density", help="partial densities and window extrema of a set")
    p.add_argument("set")
    p.add_argument("--window", help="LO:HI (default tail half)")
    add_report_flags(p)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("decompose", help="nested monotone layers of a table")
    p.add_argument("table")
    p.add_argument("--out-dir", help="write layer tables here")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("diffrep", help="difference-of-limsups form with exact audit")
    p.add_argument("table")
    add_report_flags(p)
    p.set_defaults(func=cmd_diffrep)

    p = sub.add_parser("cebuild", help="monotone table chasing a target density sequence")
    p.add_argument("--target", required=True, help="sequence file or const:VALUE[:LEN]")
    p.add_argument("--universe", type=int, required=True)
    p.add_argument("--block-base", type=int, default=64)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cebuild)

    p = sub.add_parser("cepair", help="nested monotone pair around a rational separator")
    p.add_argument("--a", required=True, help="outer target (file or const:V[:LEN])")
    p.add_argument("--b", required=True, help="inner target (file or const:V[:LEN])")
    p.add_argument("--q", required=True, help="separator p/r")
    p.add_argument("--universe", type=int, required=True)
    p.add_argument("--block-base", type=int, default=64)
    p.add_argument("--out-a", required=True)
    p.add_argument("--out-b", required=True)
    p.add_argument(
        "--equal-fallback",
        action="store_true",
        help="on equal targets, emit one built set as both outputs",
    )
    p.set_defaults(func=cmd_cepair)

    p = sub.add_parser("modulus", help="certified stability stages for a table")
    p.add_argument("table")
    p.add_argument("--f", required=True)
    p.add_argument("--horizon", type=int, required=True)
    add_report_flags(p)
    p.set_defaults(func=cmd_modulus)

    p = sub.add_parser("transfer", help="build a set tracking a table's prefix densities")
    p.add_argument("table")
    p.add_argument("--f", required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--window", help="LO:HI for the output extrema")
    p.add_argument("--out-b", help="write the built set here")
    add_report_flags(p)
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("certify", help="staged mind-change certificate for the transfer")
    p.add_argument("table")
    p.add_argument("--f", required=True)
    p.add_argument("--horizon", type=int, required=True)
    add_report_flags(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("checklimsup", help="dominated-difference limit evidence")
    p.add_argument("--a", required=True, help="sequence file")
    p.add_argument("--b", required=True, help="sequence file")
    p.add_argument("--window", help="LO:HI (default tail half)")
    p.add_argument("--tol", help="oscillation tolerance p/r (default 0)")
    add_report_flags(p)
    p.set_defaults(func=cmd_checklimsup)

    p = sub.add_parser("suite", help="run a verification suite")
    p.add_argument("name", help="suite name or 'all'")
    p.add_argument("--quick", action="store_true", help="reduced corpus sizes")
    add_report_flags(p)
    p.set_defaults(func=cmd_suite)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ErshovError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
