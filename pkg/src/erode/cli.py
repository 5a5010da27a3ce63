"""Command line: ingest -> query -> fit -> optimize / invert -> report."""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

from erode.errors import ErodeError
from erode.optimizer import (
    DEFAULT_RANGE,
    RandomSearchParams,
    Range,
    inverse_solve,
    minimize_analytic,
    minimize_controlled_random,
    minimize_grid,
    minimize_pure_random,
)
from erode.polyfit import MAX_DEGREE, PolynomialModel, deviation, fit, fit_many
from erode.reference import REFERENCE_NAMES, reference_degree, reference_model
from erode.report import write_report
from erode.store import (
    ExperimentStore,
    QueryFilter,
    extract_dataset,
    load_store,
    parse_csv,
    parse_csv_lenient,
    save_store,
)

STORE_ENV = "ERODE_STORE"
DEFAULT_STORE = "erode.store"
METHODS = ("analytic", "grid", "pure_random", "controlled_random")


class CommandError(Exception):
    """Reported on stderr; the command exits with status 1."""


def _err(msg: str) -> None:
    print(f"erode: {msg}", file=sys.stderr)


class Table:
    """Rows printed either as aligned text or as CSV."""

    def __init__(self, header):
        self.header = list(header)
        self.rows = []

    def add(self, *row):
        self.rows.append([str(v) for v in row])

    def emit(self, fmt: str, stream=None):
        stream = stream or sys.stdout
        if fmt == "csv":
            w = csv.writer(stream, lineterminator="\n")
            w.writerow(self.header)
            w.writerows(self.rows)
            return
        widths = [max(len(r[i]) for r in [self.header] + self.rows) for i in range(len(self.header))]
        for r in [self.header] + self.rows:
            stream.write("  ".join(c.ljust(wd) for c, wd in zip(r, widths)).rstrip() + "\n")


# ---------------------------------------------------------------- helpers


def _store_path(args) -> Path:
    return Path(args.store or os.environ.get(STORE_ENV) or DEFAULT_STORE)


def _open_store(args) -> ExperimentStore:
    path = _store_path(args)
    if not path.exists():
        raise CommandError(f"store {path} does not exist (run 'erode ingest' first)")
    return load_store(path)


def _filter(args) -> QueryFilter:
    return QueryFilter(
        po_material=args.po_material,
        to_material=args.to_material,
        machine=args.machine,
        operation=args.operation,
        regime=args.regime,
    )


def _dataset(args):
    records = _open_store(args).query(_filter(args))
    if not records:
        raise CommandError("no records match the filter")
    return extract_dataset(records)


def _degrees(text: str) -> list[int]:
    try:
        degrees = [int(d) for d in text.split(",") if d.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad degree list {text!r}") from None
    if not degrees or any(not 1 <= d <= MAX_DEGREE for d in degrees):
        raise argparse.ArgumentTypeError(f"degrees must be in 1..{MAX_DEGREE}")
    return degrees


def _range(args) -> Range:
    return Range(*args.range)


def _model(args) -> PolynomialModel:
    if args.model:
        return PolynomialModel.from_text(Path(args.model).read_text(encoding="utf-8"))
    if args.reference:
        try:
            return reference_model(reference_degree(args.reference))
        except KeyError as exc:
            raise CommandError(str(exc.args[0])) from None
    return fit(_dataset(args), args.degree).model


def _validation(args):
    if not args.validation:
        return None
    with open(args.validation, encoding="utf-8") as fh:
        records = parse_csv(fh)
    if not records:
        raise CommandError(f"validation file {args.validation} has no rows")
    return extract_dataset(records)


def _fmt_coeffs(coeffs) -> str:
    return " ".join(f"{c:.10g}" for c in coeffs)


# ---------------------------------------------------------------- commands


def cmd_ingest(args) -> int:
    try:
        text = Path(args.csv).read_text(encoding="utf-8")
    except OSError as exc:
        raise CommandError(f"cannot read {args.csv}: {exc.strerror}") from None
    records, errors = parse_csv_lenient(text)
    path = _store_path(args)
    store = load_store(path) if path.exists() else ExperimentStore()
    for rec in records:
        store.add(rec)
    save_store(store, path)
    for exc in errors:
        _err(f"rejected {args.csv}: {exc}")
    print(f"{len(records)} added, {len(errors)} rejected")
    return 1 if errors else 0


def cmd_query(args) -> int:
    records = _open_store(args).query(_filter(args))
    t = Table(["id", "po_material", "to_material", "machine", "operation", "regime",
               "voltage_v", "current_a", "power_w", "time_s"])
    for r in records:
        t.add(r.id, r.po_material, r.to_material, r.machine, r.operation, r.regime,
              f"{r.voltage_u:g}", f"{r.current_i:g}", f"{r.power_p:g}", f"{r.time_tp:g}")
    t.emit(args.format)
    return 0


def cmd_fit(args) -> int:
    data = _dataset(args)
    validation = _validation(args)
    reports, skipped = fit_many(data, args.degrees)
    for d, reason in skipped.items():
        _err(f"warning: degree {d} skipped: {reason}")
    if not reports:
        raise CommandError("no degree could be fitted")
    source = "validation" if validation is not None else "training"
    devs = [deviation(r.model, data if validation is None else validation, args.metric) for r in reports]
    best = min(range(len(reports)), key=lambda i: (devs[i], reports[i].degree))

    t = Table(["degree", "coefficients", "rss", f"deviation_{args.metric}", "deviation_on",
               "condition", "note"])
    for i, r in enumerate(reports):
        t.add(r.degree, _fmt_coeffs(r.model.coeffs), f"{r.rss:.4f}", f"{devs[i]:.4f}", source,
              f"{r.condition_estimate:.4g}", "optimum" if i == best else "")
    t.emit(args.format)
    if args.model_out:
        Path(args.model_out).write_text(reports[best].model.to_text(), encoding="utf-8")
    return 0


def _run_method(method, model, rng, args):
    if method == "analytic":
        return minimize_analytic(model, rng)
    if method == "grid":
        return minimize_grid(model, rng, args.n_grid)
    if method == "pure_random":
        return minimize_pure_random(model, rng, args.n_random, args.seed)
    params = RandomSearchParams(args.samples, args.shrink, args.tol, args.max_iter, args.seed)
    return minimize_controlled_random(model, rng, params)


def cmd_optimize(args) -> int:
    model, rng = _model(args), _range(args)
    methods = METHODS if args.method == "all" else (args.method,)
    if model.degree > 3 and "analytic" in methods:
        if args.method == "analytic":
            raise CommandError(
                f"analytic minimisation needs degree <= 3 (model has {model.degree}); "
                "use --method grid, pure_random or controlled_random"
            )
        methods = tuple(m for m in methods if m != "analytic")
    t = Table(["method", "argmin_p", "min_t", "evaluations", "converged", "physically_valid"])
    results = [_run_method(m, model, rng, args) for m in methods]
    for r in results:
        t.add(r.method, f"{r.argmin_p:.4f}", f"{r.min_value:.4f}", r.evaluations,
              str(r.converged).lower(), str(r.physically_valid).lower())
        if not r.physically_valid:
            _err(f"warning: {r.method} minimum {r.min_value:.4f} s is not a physical time")
    t.emit(args.format)
    if len(results) > 1:
        spread = max(r.min_value for r in results) - min(r.min_value for r in results)
        print(f"# spread of minima across methods: {spread:.4g} s", file=sys.stderr)
    return 0


def cmd_invert(args) -> int:
    model, rng = _model(args), _range(args)
    t = Table(["power_w", "time_s"])
    for p in inverse_solve(model, args.target, rng):
        t.add(f"{p:.6f}", f"{model(p):.6f}")
    t.emit(args.format)
    return 0


def cmd_report(args) -> int:
    data = _dataset(args)
    paths = write_report(
        data, args.out_dir, args.degrees, _range(args), _validation(args), args.metric
    )
    for d, reason in paths.pop("skipped").items():
        _err(f"warning: degree {d} skipped: {reason}")
    for role, path in paths.items():
        print(f"{role}\t{path}")
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--store", help=f"store file (default ${STORE_ENV} or {DEFAULT_STORE})")
    common.add_argument("--format", choices=("text", "csv"), default="text")

    filters = argparse.ArgumentParser(add_help=False)
    for name in ("po-material", "to-material", "machine", "operation", "regime"):
        filters.add_argument(f"--{name}")

    fitting = argparse.ArgumentParser(add_help=False)
    fitting.add_argument("--degrees", type=_degrees, default=[1, 2, 3], help="e.g. 1,2,3")
    fitting.add_argument("--validation", help="held-out CSV for the deviation")
    fitting.add_argument("--metric", choices=("rmse", "rss"), default="rmse")

    span = argparse.ArgumentParser(add_help=False)
    span.add_argument("--range", nargs=2, type=float, metavar=("LO", "HI"),
                      default=list(DEFAULT_RANGE))

    source = argparse.ArgumentParser(add_help=False)
    src = source.add_mutually_exclusive_group()
    src.add_argument("--model", help="model file written by 'fit --model-out'")
    src.add_argument("--reference", help="published model: " + ", ".join(REFERENCE_NAMES.values()))
    source.add_argument("--degree", type=int, default=3, help="degree to fit from the store")

    p = argparse.ArgumentParser(prog="erode", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", parents=[common], help="load experiments from CSV")
    s.add_argument("csv")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("query", parents=[common, filters], help="list experiments")
    s.set_defaults(func=cmd_query)

    s = sub.add_parser("fit", parents=[common, filters, fitting], help="fit polynomial models")
    s.add_argument("--model-out", help="write the optimum model here")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("optimize", parents=[common, filters, span, source],
                       help="minimise processing time")
    s.add_argument("--method", choices=METHODS + ("all",), default="analytic")
    s.add_argument("--n-grid", type=int, default=66501)
    s.add_argument("--n-random", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--samples", type=int, default=16)
    s.add_argument("--shrink", type=float, default=0.5)
    s.add_argument("--tol", type=float, default=0.1)
    s.add_argument("--max-iter", type=int, default=64)
    s.set_defaults(func=cmd_optimize)

    s = sub.add_parser("invert", parents=[common, filters, span, source],
                       help="powers that give a target time")
    s.add_argument("--target", type=float, required=True)
    s.set_defaults(func=cmd_invert)

    s = sub.add_parser("report", parents=[common, filters, fitting, span],
                       help="write figure data, SVGs and the comparison document")
    s.add_argument("out_dir")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CommandError, ErodeError, ValueError, OSError) as exc:
        _err(str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
