"""Minimum search for fitted models over an admissible power range.

All random draws come from numpy's ``Generator`` backed by PCG64, seeded
with the caller's integer seed, so every method is reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from erode.errors import UnsupportedDegreeError
from erode.polyfit import PolynomialModel, derivative, evaluate

DEFAULT_RANGE = (350.0, 7000.0)
INVERSE_SCAN_POINTS = 2048


@dataclass(frozen=True)
class Range:
    lo: float = DEFAULT_RANGE[0]
    hi: float = DEFAULT_RANGE[1]

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("range bounds must be finite")
        if not self.lo < self.hi:
            raise ValueError(f"empty range [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __contains__(self, p) -> bool:
        return self.lo <= p <= self.hi


@dataclass(frozen=True)
class RandomSearchParams:
    samples_per_iteration: int = 16
    shrink_factor: float = 0.5
    width_tolerance: float = 0.1
    max_iterations: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.samples_per_iteration < 2:
            raise ValueError("samples_per_iteration must be at least 2")
        if not 0.0 < self.shrink_factor < 1.0:
            raise ValueError("shrink_factor must lie in (0, 1)")
        if not self.width_tolerance > 0:
            raise ValueError("width_tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class OptimizationResult:
    method: str
    argmin_p: float
    min_value: float
    evaluations: int
    converged: bool
    physically_valid: bool
    widths: tuple[float, ...] = ()

    @classmethod
    def build(cls, method, model, p, evaluations, converged, widths=()):
        value = evaluate(model, float(p))
        return cls(method, float(p), value, int(evaluations), bool(converged), value > 0, tuple(widths))


def _as_range(rng) -> Range:
    if rng is None:
        return Range()
    if isinstance(rng, Range):
        return rng
    return Range(*rng)


def _real_roots(coeffs) -> list[float]:
    """Real roots of an ascending polynomial of degree <= 2."""
    coeffs = list(coeffs)
    while len(coeffs) > 1 and coeffs[-1] == 0.0:
        coeffs.pop()
    if len(coeffs) == 1:
        return []
    if len(coeffs) == 2:
        c, b = coeffs
        return [-c / b]
    if len(coeffs) != 3:
        raise UnsupportedDegreeError("closed-form roots only up to degree 2")
    c, b, a = coeffs
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    # avoids cancellation between -b and sqrt(disc)
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    if q == 0.0:
        return [0.0]
    return sorted({q / a, c / q})


def stationary_points(model: PolynomialModel, rng=None) -> list[float]:
    """Zeros of the first derivative inside ``rng`` (closed form, degree <= 3)."""
    rng = _as_range(rng)
    if model.degree > 3:
        raise UnsupportedDegreeError(
            f"closed-form minimisation supports degree <= 3, got {model.degree}; "
            "use the grid or random methods"
        )
    if model.degree < 1:
        return []
    return [r for r in _real_roots(derivative(model).coeffs) if r in rng]


def minimize_analytic(model: PolynomialModel, rng=None) -> OptimizationResult:
    """Compare the endpoints with every stationary point inside the range."""
    rng = _as_range(rng)
    candidates = sorted({rng.lo, rng.hi, *stationary_points(model, rng)})
    values = [evaluate(model, p) for p in candidates]
    best = min(range(len(candidates)), key=lambda i: (values[i], candidates[i]))
    return OptimizationResult.build("analytic", model, candidates[best], len(candidates), True)


def minimize_grid(model: PolynomialModel, rng=None, n: int = 10001) -> OptimizationResult:
    """Uniform grid of ``n`` points including both endpoints; ties go to the smallest power."""
    rng = _as_range(rng)
    if n < 2:
        raise ValueError("grid search needs n >= 2")
    ps = np.linspace(rng.lo, rng.hi, n)
    i = int(np.argmin(evaluate(model, ps)))
    return OptimizationResult.build("grid", model, ps[i], n, True)


def minimize_pure_random(model: PolynomialModel, rng=None, n: int = 100_000, seed: int = 0):
    rng = _as_range(rng)
    if n < 1:
        raise ValueError("random search needs n >= 1")
    gen = np.random.default_rng(seed)
    ps = gen.uniform(rng.lo, rng.hi, n)
    i = int(np.argmin(evaluate(model, ps)))
    return OptimizationResult.build("pure_random", model, ps[i], n, True)


def minimize_controlled_random(
    model: PolynomialModel, rng=None, params: RandomSearchParams | None = None
) -> OptimizationResult:
    """Random search with a shrinking window that follows the best point.

    Each iteration evaluates ``samples_per_iteration`` points of the current
    window (its two ends plus uniform draws in between), recentres the window on the best point seen so far, multiplies
    its width by ``shrink_factor`` and slides it back inside the original
    range if it sticks out. The window width therefore follows
    ``w0 * rho**i`` exactly. Stops once the width drops below
    ``width_tolerance`` or after ``max_iterations``.
    """
    rng = _as_range(rng)
    params = params or RandomSearchParams()
    gen = np.random.default_rng(params.seed)
    k, rho = params.samples_per_iteration, params.shrink_factor

    lo, hi = rng.lo, rng.hi
    width = rng.width
    best_p, best_v = None, math.inf
    evaluations = 0
    widths = []
    while width >= params.width_tolerance and len(widths) < params.max_iterations:
        ps = np.concatenate(([lo, hi], gen.uniform(lo, hi, k - 2)))
        vs = evaluate(model, ps)
        evaluations += k
        i = int(np.argmin(vs))
        if vs[i] < best_v:
            best_p, best_v = float(ps[i]), float(vs[i])
        width *= rho
        lo = best_p - width / 2
        hi = best_p + width / 2
        if lo < rng.lo:
            lo, hi = rng.lo, rng.lo + width
        elif hi > rng.hi:
            lo, hi = rng.hi - width, rng.hi
        widths.append(width)

    if best_p is None:
        # initial range already narrower than the tolerance
        best_p = (rng.lo + rng.hi) / 2
        evaluations = 1
    return OptimizationResult.build(
        "controlled_random", model, best_p, evaluations, width < params.width_tolerance, widths
    )


def _bisect(f, a, b, fa):
    for _ in range(200):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b = m
    return min((a, b), key=lambda p: abs(f(p)))


def _roots_in(coeffs, lo, hi, tol, scan):
    """All roots of the ascending polynomial ``coeffs`` in [lo, hi].

    Breakpoints are a uniform scan of ``scan`` points plus the roots of the
    derivative (found recursively), so f is monotone between neighbouring
    breakpoints and each sign change brackets exactly one root.
    """
    coeffs = list(coeffs)
    while len(coeffs) > 1 and coeffs[-1] == 0.0:
        coeffs.pop()
    if len(coeffs) == 1:
        return []
    rev = coeffs[::-1]

    def f(p):
        acc = 0.0
        for c in rev:
            acc = acc * p + c
        return acc

    crit = []
    if len(coeffs) > 2:
        dcoeffs = [k * c for k, c in enumerate(coeffs) if k]
        crit = _roots_in(dcoeffs, lo, hi, 0.0, 2)
    nodes = sorted(set(np.linspace(lo, hi, scan).tolist()) | set(crit))
    values = np.polynomial.polynomial.polyval(np.asarray(nodes), coeffs).tolist()
    # stationary points and range ends: places where f can touch the target without crossing
    touch = set(crit) | {lo, hi}

    changes = [
        v != 0.0 and w != 0.0 and (v < 0) != (w < 0) for v, w in zip(values, values[1:])
    ]
    roots = []
    for i, (p, v) in enumerate(zip(nodes, values)):
        if v == 0.0:
            roots.append(p)
        elif p in touch and abs(v) <= tol:
            # unless a bracketed root right next to it already covers it
            if not (i > 0 and changes[i - 1]) and not (i < len(changes) and changes[i]):
                roots.append(p)
        if i < len(changes) and changes[i]:
            roots.append(_bisect(f, p, nodes[i + 1], v))
    return sorted(roots)


def inverse_solve(model: PolynomialModel, target_t: float, rng=None) -> list[float]:
    """All powers in ``rng`` at which the model predicts ``target_t``.

    Sign changes of ``f(p) - target_t`` are bracketed on a uniform scan
    refined with the stationary points and closed by bisection. Tangential
    solutions are caught at stationary points. Empty list means no solution.
    """
    rng = _as_range(rng)
    if not math.isfinite(target_t):
        raise ValueError("target must be finite")
    tol = 1e-6 * (1 + abs(target_t))
    shifted = list(model.coeffs)
    shifted[0] -= target_t
    found = _roots_in(shifted, rng.lo, rng.hi, tol, INVERSE_SCAN_POINTS)
    found = [p for p in found if abs(evaluate(model, p) - target_t) <= tol]
    merged = []
    for p in found:
        if merged and p - merged[-1] <= 1e-9 * max(1.0, abs(p)):
            continue
        merged.append(p)
    return merged
