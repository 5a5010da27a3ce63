"""Figure data, SVG renderings and the comparison against published values."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from erode.optimizer import Range, minimize_analytic, stationary_points
from erode.polyfit import FitReport, evaluate, fit_many, select_best
from erode.reference import (
    REFERENCE_COEFFS,
    REFERENCE_DEVIATIONS,
    REFERENCE_NAMES,
    REFERENCE_OPTIMA,
    reference_model,
)
from erode.store import Dataset

CURVE_POINTS = 241

SCATTER_FILE = "scatter.csv"
CURVES_FILE = "curves.csv"
COMPARISON_FILE = "comparison.csv"
DISCREPANCY_FILE = "discrepancy.md"

STYLE = {
    "font.family": "serif",
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.figsize": (5.0, 3.2),
    "lines.linewidth": 1.2,
    "svg.hashsalt": "erode",
    "svg.fonttype": "none",
}


def curve_grid(rng: Range, extra=()) -> np.ndarray:
    """Uniform samples over ``rng`` merged with ``extra`` points inside it."""
    grid = np.linspace(rng.lo, rng.hi, CURVE_POINTS)
    inside = [p for p in extra if rng.lo <= p <= rng.hi]
    return np.unique(np.concatenate([grid, np.asarray(inside, dtype=float)]))


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if not isinstance(v, str) else v for v in row])


def read_scatter(path) -> Dataset:
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return Dataset(tuple((float(p), float(t)) for p, t in rows[1:]))


# ---------------------------------------------------------------- discrepancy


@dataclass(frozen=True)
class OptimumComparison:
    degree: int
    published_p: float
    published_t: float
    reference_at_published_p: float
    reference_argmin: float
    reference_min: float
    reference_stationary: tuple[float, ...]
    refit_argmin: float | None
    refit_min: float | None


def compare_coefficients(reports: list[FitReport]) -> list[dict]:
    by_degree = {r.degree: r for r in reports}
    rows = []
    for d, ref in REFERENCE_COEFFS.items():
        refit = by_degree[d].model.coeffs if d in by_degree else None
        rows.append({"degree": d, "reference": ref, "refit": refit})
    return rows


def compare_optima(reports: list[FitReport], rng: Range) -> list[OptimumComparison]:
    by_degree = {r.degree: r for r in reports}
    out = []
    for d, (p_pub, t_pub) in REFERENCE_OPTIMA.items():
        ref = reference_model(d)
        ref_opt = minimize_analytic(ref, rng)
        refit_opt = minimize_analytic(by_degree[d].model, rng) if d in by_degree else None
        out.append(
            OptimumComparison(
                d,
                p_pub,
                t_pub,
                evaluate(ref, p_pub),
                ref_opt.argmin_p,
                ref_opt.min_value,
                tuple(stationary_points(ref, rng)),
                refit_opt.argmin_p if refit_opt else None,
                refit_opt.min_value if refit_opt else None,
            )
        )
    return out


def _g(v, digits=10):
    return "n/a" if v is None else f"{v:.{digits}g}"


def _f(v):
    return "n/a" if v is None else f"{v:.4f}"


def render_discrepancy(data: Dataset, reports: list[FitReport], rng: Range) -> str:
    out = io.StringIO()
    w = out.write
    w("# Refit versus published reference values\n\n")
    w(f"Data: {data.label or 'unlabelled'} ({len(data)} points). ")
    w(f"Admissible range: [{rng.lo:g}, {rng.hi:g}] W.\n\n")

    w("## Coefficients (ascending powers of P)\n\n")
    w("| degree | term | refit | published | refit - published |\n")
    w("|---|---|---|---|---|\n")
    for row in compare_coefficients(reports):
        for k, ref in enumerate(row["reference"]):
            refit = row["refit"][k] if row["refit"] else None
            diff = None if refit is None else refit - ref
            w(f"| {row['degree']} | a{k} | {_g(refit)} | {_g(ref)} | {_g(diff, 4)} |\n")
    w("\nThe published coefficients are not the least-squares solution for these points.\n\n")

    w("## Deviation\n\n")
    w("| degree | refit RMSE on training data | published deviation |\n|---|---|---|\n")
    by_degree = {r.degree: r for r in reports}
    for d, dev in REFERENCE_DEVIATIONS.items():
        mine = by_degree[d].deviation if d in by_degree else None
        w(f"| {d} | {_f(mine)} | {dev:.3f} |\n")
    w("\nThe published deviations were computed on validation points that are not available; ")
    w("the columns are not comparable, only the ordering (cubic lowest) is.\n\n")

    w("## Optima\n\n")
    w(
        "| degree | published P* | published t* | published model at P* "
        "| published model argmin | min | stationary points | refit argmin | refit min |\n"
    )
    w("|---|---|---|---|---|---|---|---|---|\n")
    for c in compare_optima(reports, rng):
        stat = ", ".join(f"{p:.4f}" for p in c.reference_stationary) or "none"
        w(
            f"| {c.degree} | {c.published_p:.4f} | {c.published_t:.4f} "
            f"| {c.reference_at_published_p:.4f} | {c.reference_argmin:.4f} | {c.reference_min:.4f} "
            f"| {stat} | {_f(c.refit_argmin)} | {_f(c.refit_min)} |\n"
        )
    w(
        "\nOnly the linear row is self-consistent: the published linear model gives "
        "the published time at the published power. The quadratic and cubic published "
        "optima do not lie on their own curves, and none of them is the minimum over "
        "the admissible range.\n"
    )
    return out.getvalue()


# ---------------------------------------------------------------- figures


def _render(path: Path, draw) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        draw(ax)
        ax.set_xlabel("induced power P [W]")
        ax.set_ylabel("processing time $t_p$ [s]")
        ax.grid(True, lw=0.3, alpha=0.5)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def write_report(
    data: Dataset,
    out_dir,
    degrees=(1, 2, 3),
    rng: Range | None = None,
    validation: Dataset | None = None,
    metric: str = "rmse",
) -> dict:
    """Write figure data, SVGs and the discrepancy document into ``out_dir``.

    Returns the written paths keyed by role, plus ``skipped`` degrees.
    """
    rng = rng or Range()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise PermissionError(f"cannot write to {out}")

    reports, skipped = fit_many(data, degrees)
    paths = {"skipped": skipped}

    _write_csv(out / SCATTER_FILE, ("power_w", "time_s"), data.points)
    paths["scatter"] = out / SCATTER_FILE

    ps = curve_grid(rng, data.x + [p for p, _ in REFERENCE_OPTIMA.values()])
    cols = [("fit_degree_%d" % r.degree, r.model) for r in reports]
    cols += [("published_" + REFERENCE_NAMES[d], reference_model(d)) for d in REFERENCE_COEFFS]
    table = np.column_stack([ps] + [evaluate(m, ps) for _, m in cols])
    _write_csv(out / CURVES_FILE, ["power_w"] + [c for c, _ in cols], table)
    paths["curves"] = out / CURVES_FILE

    best = select_best(reports, validation, metric) if reports else None
    if best is not None:
        pred = [evaluate(best.model, x) for x in data.x]
        rows = [(x, y, f, f - y) for (x, y), f in zip(data.points, pred)]
        _write_csv(
            out / COMPARISON_FILE, ("power_w", "observed_s", "model_s", "residual_s"), rows
        )
        paths["comparison"] = out / COMPARISON_FILE

    def scatter(ax):
        ax.plot(data.x, data.y, "o", ms=4, color="k", label="experiments")
        ax.legend(frameon=False)

    def curves(ax):
        ax.plot(data.x, data.y, "o", ms=4, color="k", label="experiments")
        for name, m in cols:
            style = "--" if name.startswith("published") else "-"
            ax.plot(ps, evaluate(m, ps), style, label=name.replace("_", " "))
        ax.legend(frameon=False, ncol=2)

    def comparison(ax):
        ax.plot(data.x, data.y, "o", ms=4, color="k", label="experimental")
        ax.plot(ps, evaluate(best.model, ps), "-", label=f"model, degree {best.degree}")
        ax.legend(frameon=False)

    _render(out / "scatter.svg", scatter)
    _render(out / "curves.svg", curves)
    paths["scatter_svg"] = out / "scatter.svg"
    paths["curves_svg"] = out / "curves.svg"
    if best is not None:
        _render(out / "comparison.svg", comparison)
        paths["comparison_svg"] = out / "comparison.svg"

    (out / DISCREPANCY_FILE).write_text(render_discrepancy(data, reports, rng), encoding="utf-8")
    paths["discrepancy"] = out / DISCREPANCY_FILE
    return paths

