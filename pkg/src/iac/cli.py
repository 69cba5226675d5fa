"""Command-line entry point.

Exit codes: 0 success, 1 domain verdict (infeasible configuration or failed
verification), 2 usage or I/O error.  The default seed is read from the
``IAC_SEED`` environment variable and falls back to 1.
"""

import argparse
import dataclasses
import io
import json
import os
import sys
import tempfile

from .exceptions import ConfigError, IacError
from .experiments import (
    SweepCell,
    gap_ratio,
    gnuplot_script,
    run_upper_bound_mc,
    sweep,
    write_cdf_csv,
    write_gap_csv,
)
from .feasibility import check_feasibility, ia_baselines
from .model import load_config, sample_channels
from .solver import solve_all, transceivers_from_dict, transceivers_to_dict
from .tolerances import DEFAULT_TOLERANCES
from .verify import verify

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2
SEED_ENV = "IAC_SEED"


class _UsageError(Exception):
    pass


def _default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 1
    try:
        return int(raw)
    except ValueError:
        raise _UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, text):
    if args.out:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)


def _tolerances(args):
    overrides = {
        name: getattr(args, name)
        for name in ("rank_rel", "zero_forcing", "dependent_columns")
        if getattr(args, name, None) is not None
    }
    return dataclasses.replace(DEFAULT_TOLERANCES, **overrides)


def _json(obj):
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _cmd_feasibility(args):
    config = load_config(args.config)
    report = check_feasibility(config)
    ok = bool(report.closed_form_feasible)
    if args.format == "table":
        failing = set(report.failing())
        lines = [f"{c.name:<40} {c.lhs:>6} {c.relation:>2} {c.rhs:<6} "
                 f"{'FAIL' if c.name in failing else 'ok'}"
                 for c in report.all_checks()]
        lines.append(f"verdict: {'feasible' if ok else 'infeasible'}")
        _emit(args, "\n".join(lines) + "\n")
    else:
        _emit(args, _json({"verdict": "feasible" if ok else "infeasible", **report.to_dict()}))
    return EXIT_OK if ok else EXIT_DOMAIN


def _cmd_solve(args):
    config = load_config(args.config)
    tol = _tolerances(args)
    channels = sample_channels(config, args.seed)
    tx = solve_all(config, channels, seed=args.seed, tol=tol)
    report = verify(tx, channels, config, tx.plan, tol)
    out = {
        "verdict": "passed" if report.passed(tol) else "failed",
        "transceivers": transceivers_to_dict(tx),
        "verification": report.to_dict(),
    }
    if args.format == "table":
        _emit(args, report.table() + "\n")
    else:
        _emit(args, _json(out))
    return EXIT_OK if report.passed(tol) else EXIT_DOMAIN


def _cmd_verify(args):
    try:
        with open(args.tx, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{args.tx}: invalid JSON at line {exc.lineno}, column {exc.colno}") from exc
    data = data.get("transceivers", data)
    try:
        tx = transceivers_from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{args.tx}: malformed transceiver file ({exc})") from exc
    if tx.channel_seed is None:
        raise ConfigError(f"{args.tx}: no channel seed recorded")
    tol = _tolerances(args)
    channels = sample_channels(tx.config, tx.channel_seed)
    report = verify(tx, channels, tx.config, tx.plan, tol)
    if args.format == "table":
        _emit(args, report.table() + "\n")
    else:
        _emit(args, _json({"verdict": "passed" if report.passed(tol) else "failed",
                           **report.to_dict()}))
    return EXIT_OK if report.passed(tol) else EXIT_DOMAIN


def _mc_dict(mc):
    return {
        "K": mc.K,
        "M": mc.M,
        "runs": mc.runs,
        "accepted": mc.accepted,
        "upper_star": mc.upper_star,
        "cdf": [[v, p] for v, p in mc.cdf],
        "seed": mc.seed,
    }


def _cmd_mc_upper(args):
    mc = run_upper_bound_mc(args.K, args.M, args.runs, args.seed)
    if args.format == "csv":
        buf = io.StringIO()
        write_cdf_csv([mc], buf)
        _emit(args, buf.getvalue())
    elif args.format == "table":
        lines = [f"K={mc.K} M={mc.M} accepted {mc.accepted}/{mc.runs} upper*={mc.upper_star}"]
        lines += [f"{v:>4} {p:.4f}" for v, p in mc.cdf]
        _emit(args, "\n".join(lines) + "\n")
    else:
        _emit(args, _json(_mc_dict(mc)))
    return EXIT_OK


def _cmd_gap(args):
    mc = run_upper_bound_mc(args.K, args.M, args.runs, args.seed)
    g = gap_ratio(args.K, args.M, mc)
    row = {"K": g.K, "M": g.M, "upper_star": g.upper_star, "dof_cs": g.dof_cs,
           "gap": float(g.gap), "gap_exact": str(g.gap), "accepted": mc.accepted, "runs": mc.runs}
    if args.format == "table":
        _emit(args, f"K={g.K} M={g.M} upper*={g.upper_star} 2M={g.dof_cs} gap={float(g.gap):.4f}\n")
    elif args.format == "csv":
        buf = io.StringIO()
        write_gap_csv([SweepCell(mc, g)], buf)
        _emit(args, buf.getvalue())
    else:
        _emit(args, _json(row))
    return EXIT_OK


def _cmd_sweep(args):
    Ks = range(args.kmin, args.kmax + 1)
    cells = sweep(Ks, args.m, args.runs, args.seed, jobs=args.jobs)
    if args.out is None:
        buf = io.StringIO()
        write_gap_csv(cells, buf)
        sys.stdout.write(buf.getvalue())
        return EXIT_OK
    os.makedirs(args.out, exist_ok=True)
    for name, writer in (("cdf.csv", write_cdf_csv), ("gap.csv", write_gap_csv)):
        buf = io.StringIO()
        writer(cells, buf)
        _atomic_write(os.path.join(args.out, name), buf.getvalue())
    if args.gnuplot:
        _atomic_write(os.path.join(args.out, "plots.gp"), gnuplot_script())
    return EXIT_OK


def _cmd_baselines(args):
    equal, general = ia_baselines(args.K, args.M)
    row = {"K": args.K, "M": args.M, "closed_form": 2 * args.M,
           "ia_equal_dof": float(equal), "ia_general": float(general)}
    if args.format == "table":
        _emit(args, " ".join(f"{k}={v}" for k, v in row.items()) + "\n")
    elif args.format == "csv":
        _emit(args, ",".join(row) + "\n" + ",".join(str(v) for v in row.values()) + "\n")
    else:
        _emit(args, _json(row))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="iac", description="Closed-form IAC transceiver engine.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats=("json", "table")):
        p.add_argument("--seed", type=int, default=None,
                       help=f"RNG seed (default: ${SEED_ENV}, else 1)")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--format", choices=formats, default=formats[0])

    def tolerances(p):
        p.add_argument("--rank-rel", dest="rank_rel", type=float)
        p.add_argument("--zf-tol", dest="zero_forcing", type=float)
        p.add_argument("--dependent-tol", dest="dependent_columns", type=float)

    p = sub.add_parser("feasibility", help="evaluate the existence and necessary conditions")
    p.add_argument("--config", required=True)
    common(p)
    p.set_defaults(func=_cmd_feasibility)

    p = sub.add_parser("solve", help="plan, solve and verify transceivers")
    p.add_argument("--config", required=True)
    common(p)
    tolerances(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("verify", help="re-verify an exported transceiver file")
    p.add_argument("--tx", required=True)
    common(p)
    tolerances(p)
    p.set_defaults(func=_cmd_verify)

    for name, func, help_text in (("mc-upper", _cmd_mc_upper, "Monte Carlo DoF upper bound"),
                                  ("gap", _cmd_gap, "gap ratio of the closed form")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--K", type=int, required=True)
        p.add_argument("--M", type=int, required=True)
        p.add_argument("--runs", type=int, default=10_000)
        common(p, ("json", "csv", "table"))
        p.set_defaults(func=func)

    p = sub.add_parser("sweep", help="grid of Monte Carlo cells written as CSV")
    p.add_argument("--kmin", type=int, default=3)
    p.add_argument("--kmax", type=int, default=7)
    p.add_argument("--m", type=_int_list, default=[2, 4, 6, 8])
    p.add_argument("--runs", type=int, default=10_000)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--gnuplot", action="store_true", help="also write plots.gp")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory (default: gap CSV to stdout)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("baselines", help="closed-form DoF against IA reference points")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--M", type=int, required=True)
    common(p, ("json", "csv", "table"))
    p.set_defaults(func=_cmd_baselines)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        if args.seed is None:
            args.seed = _default_seed()
        return args.func(args)
    except (_UsageError, ConfigError, OSError) as exc:
        print(f"iac: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IacError as exc:
        print(json.dumps({"verdict": "failed", "error": type(exc).__name__, "detail": str(exc)}))
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
