"""Least-squares polynomial models of processing time versus induced power."""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb
from typing import Iterable, Sequence

import numpy as np

from erode.errors import FitError, SingularSystemError
from erode.linalg import EPS, gauss_solve
from erode.store import Dataset

MAX_DEGREE = 6
# Beyond this the normal equations lose more than ~3 of the 16 available digits.
MAX_CONDITION = 1.0 / (1e3 * EPS)
MODEL_MAGIC = "erode-model v1"


@dataclass(frozen=True)
class PolynomialModel:
    """Polynomial ``sum(coeffs[k] * p**k)`` in the original (unscaled) power units.

    ``scaling`` is the ``(center, half_width)`` pair used to normalise the
    abscissa while fitting; it is metadata only and does not affect evaluation.
    """

    coeffs: tuple[float, ...]
    domain: tuple[float, float]
    scaling: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "domain", tuple(float(v) for v in self.domain))
        object.__setattr__(self, "scaling", tuple(float(v) for v in self.scaling))
        if not coeffs:
            raise ValueError("a polynomial needs at least one coefficient")
        if not all(math.isfinite(c) for c in coeffs):
            raise ValueError("coefficients must be finite")
        lo, hi = self.domain
        if not lo < hi:
            raise ValueError(f"empty domain [{lo}, {hi}]")
        if not self.scaling[1] > 0:
            raise ValueError("scaling half-width must be positive")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, p):
        return evaluate(self, p)

    @classmethod
    def from_coeffs(cls, coeffs: Sequence[float], domain=(350.0, 7000.0)):
        lo, hi = domain
        return cls(tuple(coeffs), (lo, hi), ((lo + hi) / 2, (hi - lo) / 2))

    def to_text(self) -> str:
        """Serialise to the line-oriented model format (full precision)."""
        return "\n".join(
            [
                MODEL_MAGIC,
                f"degree {self.degree}",
                "coeffs " + " ".join(repr(c) for c in self.coeffs),
                f"domain {self.domain[0]!r} {self.domain[1]!r}",
                f"scaling {self.scaling[0]!r} {self.scaling[1]!r}",
                "",
            ]
        )

    @classmethod
    def from_text(cls, text: str) -> "PolynomialModel":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != MODEL_MAGIC:
            raise ValueError(f"model text must start with {MODEL_MAGIC!r}")
        fields = {}
        for ln in lines[1:]:
            key, _, rest = ln.partition(" ")
            fields[key] = rest.split()
        try:
            degree = int(fields["degree"][0])
            coeffs = [float(v) for v in fields["coeffs"]]
            domain = tuple(float(v) for v in fields["domain"])
            scaling = tuple(float(v) for v in fields["scaling"])
        except (KeyError, IndexError, ValueError) as exc:
            raise ValueError(f"malformed model text: {exc}") from None
        if len(coeffs) != degree + 1:
            raise ValueError(f"degree {degree} needs {degree + 1} coefficients, got {len(coeffs)}")
        return cls(tuple(coeffs), domain, scaling)


@dataclass(frozen=True)
class FitReport:
    model: PolynomialModel
    residuals: tuple[float, ...]
    rss: float
    deviation: float
    condition_estimate: float

    @property
    def degree(self) -> int:
        return self.model.degree


def evaluate(model: PolynomialModel, p):
    """Horner evaluation; ``p`` may be a scalar or an array."""
    coeffs = model.coeffs
    acc = coeffs[-1] if np.isscalar(p) else np.full(np.shape(p), coeffs[-1], dtype=float)
    for c in reversed(coeffs[:-1]):
        acc = acc * p + c
    return float(acc) if np.isscalar(p) else acc


def derivative(model: PolynomialModel) -> PolynomialModel:
    if model.degree < 1:
        raise ValueError("cannot differentiate a constant model")
    coeffs = tuple(k * c for k, c in enumerate(model.coeffs) if k)
    return PolynomialModel(coeffs, model.domain, model.scaling)


def _expand_scaled(z_coeffs: Sequence[float], center: float, half_width: float) -> list[float]:
    # sum c_k ((x - mu)/s)^k  ->  ascending coefficients in x
    out = [0.0] * len(z_coeffs)
    for k, c in enumerate(z_coeffs):
        if c == 0.0:
            continue
        ck = c / half_width**k
        for j in range(k + 1):
            out[j] += ck * comb(k, j) * (-center) ** (k - j)
    return out


def fit(data: Dataset, degree: int) -> FitReport:
    """Least-squares polynomial of ``degree`` through ``data``.

    The abscissa is mapped to [-1, 1] (midrange centre, half-range scale),
    the normal equations are solved in that variable, and the coefficients
    are expanded back to power units. ``deviation`` in the report is the
    training RMSE.
    """
    if not 1 <= degree <= MAX_DEGREE:
        raise FitError(f"degree must be in 1..{MAX_DEGREE}, got {degree}")
    xs, ys = data.x, data.y
    if len(xs) < degree + 1:
        raise FitError(f"degree {degree} needs at least {degree + 1} points, got {len(xs)}")
    if len(set(xs)) < degree + 1:
        raise FitError(
            f"degree {degree} needs at least {degree + 1} distinct powers, got {len(set(xs))}"
        )

    lo, hi = min(xs), max(xs)
    center, half = (lo + hi) / 2, (hi - lo) / 2
    zs = [(x - center) / half for x in xs]

    n = degree + 1
    # power sums sum z^k for k = 0..2d, and moments sum y z^k
    zpow = [[z**k for k in range(2 * degree + 1)] for z in zs]
    gram = [[math.fsum(row[i + j] for row in zpow) for j in range(n)] for i in range(n)]
    rhs = [math.fsum(y * row[i] for y, row in zip(ys, zpow)) for i in range(n)]
    z_coeffs, cond = gauss_solve(gram, rhs)
    if cond > MAX_CONDITION:
        raise SingularSystemError("normal equations are too ill-conditioned", cond)

    model = PolynomialModel(tuple(_expand_scaled(z_coeffs, center, half)), (lo, hi), (center, half))
    residuals = tuple(evaluate(model, x) - y for x, y in zip(xs, ys))
    rss = math.fsum(r * r for r in residuals)
    return FitReport(model, residuals, rss, math.sqrt(rss / len(residuals)), cond)


def fit_many(data: Dataset, degrees: Iterable[int]) -> tuple[list[FitReport], dict[int, str]]:
    """Fit each degree; degrees that cannot be fitted are returned with the reason."""
    reports, skipped = [], {}
    for d in degrees:
        try:
            reports.append(fit(data, d))
        except FitError as exc:
            skipped[d] = str(exc)
    return reports, skipped


def deviation(model: PolynomialModel, validation: Dataset, metric: str = "rmse") -> float:
    """Model-vs-observation error on ``validation``.

    ``metric="rmse"`` gives sqrt(sum r^2 / n); ``metric="rss"`` gives the
    root of the plain sum of squares, sqrt(sum r^2).
    """
    if len(validation) == 0:
        raise ValueError("validation set is empty")
    sq = math.fsum((evaluate(model, x) - y) ** 2 for x, y in validation.points)
    if metric == "rmse":
        return math.sqrt(sq / len(validation))
    if metric == "rss":
        return math.sqrt(sq)
    raise ValueError(f"unknown deviation metric {metric!r}")


def select_best(
    reports: Sequence[FitReport], validation: Dataset | None = None, metric: str = "rmse"
) -> FitReport:
    """Report whose model has the smallest deviation; ties go to the lower degree.

    Without ``validation`` the deviation already stored in each report is used.
    """
    if not reports:
        raise ValueError("no fit reports to choose from")

    def key(rep):
        dev = rep.deviation if validation is None else deviation(rep.model, validation, metric)
        return (dev, rep.degree)

    return min(reports, key=key)
