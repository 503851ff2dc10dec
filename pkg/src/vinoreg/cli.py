"""
Command-line interface.

Every subcommand reads the panel from ``--countries``/``--panel`` (default:
the bundled fixture, or the directory named by ``VINOREG_FIXTURE``) and
writes its artefacts under ``--out``.  ``--config FILE`` presets options from
``key = value`` lines; command-line flags win.

Exit status is 0 on success, 1 on a data or numerical error (with a one-line
diagnostic on stderr) and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from . import __version__
from .estimator import (ConvergenceError, FitResult, HessianWarning, ModelSpec, fit,
                        hypothesis_test, split_hypothesis_tests)
from .features import DegeneratePeriodError, Measure, build_design
from .fixture import fixture_paths
from .panel import PanelFormatError, load_panel, validate_panel
from .report import StarConvention, emit_chart_data, render_table, write_chart_csv, write_chart_svg
from .simulate import canonical_params, monte_carlo, read_params, write_params

MEASURES = ("volume", "value")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# config files
# ---------------------------------------------------------------------------

def read_config(path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment; keys may use - or _."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key.lstrip("-").replace("-", "_")] = value
    return out


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _apply_config(parser: argparse.ArgumentParser, config: dict[str, str]) -> None:
    actions = {a.dest: a for a in parser._actions if a.dest not in ("help", "config")}
    defaults = {}
    for key, raw in config.items():
        if key not in actions:
            raise UsageError(f"config key {key!r} is not an option of this command")
        action = actions[key]
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            low = raw.lower()
            if low not in _TRUE | _FALSE:
                raise UsageError(f"config key {key!r} expects a boolean, got {raw!r}")
            value = low in _TRUE
            if isinstance(action, argparse._StoreFalseAction):
                value = not value
        else:
            try:
                value = action.type(raw) if action.type else raw
            except (TypeError, ValueError) as exc:
                raise UsageError(f"config key {key!r}: {exc}") from None
            if action.choices is not None and value not in action.choices:
                raise UsageError(f"config key {key!r} must be one of {', '.join(map(str, action.choices))}")
        defaults[key] = value
    parser.set_defaults(**defaults)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _data_args(p):
    countries, panel = fixture_paths()
    p.add_argument("--countries", type=Path, default=countries, help="country attribute CSV")
    p.add_argument("--panel", type=Path, default=panel, help="country-period flow CSV")


def _out_arg(p):
    p.add_argument("--out", type=Path, default=Path("."), help="directory for written files")


def _model_args(p):
    p.add_argument("--measure", choices=MEASURES + ("both",), default="volume")
    p.add_argument("--split", action="store_true", help="split the New World into LNW and ANW")
    p.add_argument("--no-restriction", dest="restriction", action="store_false",
                   help="estimate NIRW_x_OW freely")
    p.add_argument("--quad-nodes", type=int, default=12)
    p.add_argument("--upper-limit", type=float, default=None)
    p.add_argument("--dummy-mode", choices=("fractional", "binary"), default="fractional")
    p.add_argument("--seed-starts", type=int, default=5)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vinoreg", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("validate", help="check a panel and print its shape")
    _data_args(p)

    p = sub.add_parser("features", help="write the regression design matrix")
    _data_args(p)
    _out_arg(p)
    p.add_argument("--measure", choices=MEASURES, default="volume")
    p.add_argument("--split", action="store_true")
    p.add_argument("--dummy-mode", choices=("fractional", "binary"), default="fractional")

    p = sub.add_parser("fit", help="estimate the censored random-effects model")
    _data_args(p)
    _out_arg(p)
    _model_args(p)
    p.add_argument("--conventional-stars", action="store_true",
                   help="*** for 1%%, ** for 5%%, * for 10%%")
    p.add_argument("--format", choices=("text", "markdown", "csv"), default="text")

    p = sub.add_parser("test-hypothesis", help="one-sided test of NIRW_x_NW > NIRW_x_OW")
    _out_arg(p)
    p.add_argument("--fit", type=Path, default=None,
                   help="fit JSON (default: OUT/fit_volume.json)")
    p.add_argument("--entrant", default=None, help="entrant coefficient (default: the NW interaction(s))")
    p.add_argument("--incumbent", default="NIRW_x_OW")

    p = sub.add_parser("simulate", help="Monte-Carlo recovery on synthetic panels")
    p.add_argument("--out", type=Path, default=Path("."),
                   help="directory for report.csv and params.csv, or the report path itself (*.csv)")
    p.add_argument("--params", type=Path, default=None, help="name,value CSV of true parameters")
    p.add_argument("--countries", type=int, default=200, help="size of the default design")
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-jobs", type=int, default=1)
    p.add_argument("--quad-nodes", type=int, default=12)
    p.add_argument("--seed-starts", type=int, default=1)

    p = sub.add_parser("charts", help="group share series (CSV, optionally SVG)")
    _data_args(p)
    _out_arg(p)
    p.add_argument("--measure", choices=MEASURES, default="volume")
    p.add_argument("--north-africa", action="store_true",
                   help="add an OW+NA series with North Africa counted as Old World")
    p.add_argument("--svg", action="store_true", help="also write a line chart")

    for p in sub.choices.values():
        p.add_argument("--config", type=Path, default=None, help="key = value preset file")
    return parser


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _load(args):
    return load_panel(args.countries, args.panel)


def _cmd_validate(args) -> int:
    report = validate_panel(_load(args))
    print(report.summary())
    return 0 if report.ok else 1


def _cmd_features(args) -> int:
    design = build_design(_load(args), args.measure, args.split, args.dummy_mode)
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / f"design_{args.measure}{'_split' if args.split else ''}.csv"
    design.to_csv(path)
    print(f"{design.n_obs} rows x {len(design.names)} regressors -> {path}")
    return 0


def _spec(args, measure) -> ModelSpec:
    return ModelSpec(
        measure=measure, split=args.split, restriction_on=args.restriction,
        quad_nodes=args.quad_nodes, upper_limit=args.upper_limit, seed_starts=args.seed_starts,
    )


def _cmd_fit(args) -> int:
    panel = _load(args)
    measures = MEASURES if args.measure == "both" else (args.measure,)
    args.out.mkdir(parents=True, exist_ok=True)
    results = []
    for measure in measures:
        design = build_design(panel, measure, args.split, args.dummy_mode)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", HessianWarning)
            result = fit(design, _spec(args, measure))
        for w in caught:
            print(f"vinoreg: warning: {w.message}", file=sys.stderr)
        result.to_json(args.out / f"fit_{measure}.json")
        results.append(result)
    convention = StarConvention.CONVENTIONAL if args.conventional_stars else StarConvention.PAPER
    table = render_table(results, convention, args.format, headers=[f"({m})" for m in measures])
    suffix = {"text": "txt", "markdown": "md", "csv": "csv"}[args.format]
    (args.out / f"table_{args.measure}{'_split' if args.split else ''}.{suffix}").write_text(table)
    sys.stdout.write(table)
    return 0


def _cmd_test(args) -> int:
    path = args.fit or args.out / "fit_volume.json"
    result = FitResult.from_json(path)
    if args.entrant is not None:
        tests = [hypothesis_test(result, args.entrant, args.incumbent)]
    elif result.spec.split:
        tests = split_hypothesis_tests(result)
    else:
        tests = [hypothesis_test(result, incumbent=args.incumbent)]
    for t in tests:
        print(f"{t.entrant} - {t.incumbent}: delta = {t.delta:.6f}, se = {t.se:.6f}, "
              f"z = {t.z:.3f}, one-sided p = {t.p_value:.4g}")
    return 0


def _cmd_simulate(args) -> int:
    params = read_params(args.params) if args.params else canonical_params(args.countries)
    spec = ModelSpec(split=params.split, quad_nodes=args.quad_nodes, seed_starts=args.seed_starts)
    report = monte_carlo(params, args.reps, spec, seed=args.seed, n_jobs=args.n_jobs)
    # --out names either a directory or the report file itself
    if args.out.suffix.lower() == ".csv":
        report_path = args.out
        params_path = args.out.with_name(f"{args.out.stem}_params.csv")
    else:
        report_path, params_path = args.out / "report.csv", args.out / "params.csv"
    report_path.parent.mkdir(parents=True, exist_ok=True)
    report.to_csv(report_path)
    write_params(params, params_path)
    print(f"{report.n_ok}/{report.replications} replications converged")
    print(f"{'parameter':18s} {'truth':>9s} {'bias':>9s} {'mc_se':>9s} {'rmse':>9s} {'cover':>6s}")
    for row in zip(report.names, report.truth, report.bias, report.mc_se, report.rmse, report.coverage):
        print(f"{row[0]:18s} {row[1]:9.4f} {row[2]:9.4f} {row[3]:9.4f} {row[4]:9.4f} {row[5]:6.2f}")
    print(f"ordering rate ({report.entrant} > {report.incumbent}): {report.ordering_rate:.3f}")
    return 0


def _cmd_charts(args) -> int:
    series = emit_chart_data(_load(args), args.measure, args.north_africa)
    args.out.mkdir(parents=True, exist_ok=True)
    stem = f"chart_{args.measure}{'_na' if args.north_africa else ''}"
    write_chart_csv(series, args.out / f"{stem}.csv")
    if args.svg:
        picked = [s for s in series if s.label != "RW"]
        title = f"Shares of world wine trade ({args.measure})"
        write_chart_svg(picked, args.out / f"{stem}.svg", title)
    for s in series:
        print(f"{s.label:11s} " + " ".join(f"{v:.3f}" for v in s.values))
    return 0


COMMANDS = {
    "validate": _cmd_validate,
    "features": _cmd_features,
    "fit": _cmd_fit,
    "test-hypothesis": _cmd_test,
    "simulate": _cmd_simulate,
    "charts": _cmd_charts,
}


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
        if args.config is not None:
            subparser = parser._subparsers._group_actions[0].choices[args.command]
            _apply_config(subparser, read_config(args.config))
            args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"vinoreg: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return int(exc.code or 0)
    except OSError as exc:
        print(f"vinoreg: error: {exc}", file=sys.stderr)
        return 1
    try:
        return COMMANDS[args.command](args)
    except (PanelFormatError, DegeneratePeriodError, ConvergenceError, ValueError, KeyError,
            OSError, FloatingPointError) as exc:
        print(f"vinoreg: error: {exc}", file=sys.stderr)
        return 1


run_cli = main

if __name__ == "__main__":
    sys.exit(main())
