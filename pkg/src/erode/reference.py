"""Published reference values for the PC52/OL37 debiting data set.

These are the coefficients, deviations and optima reported alongside the
bundled data. They are kept as fixtures for comparison only; several of them
cannot be recomputed from the bundled points (see ``erode.report``).
"""

from erode.polyfit import PolynomialModel

REFERENCE_DOMAIN = (350.0, 7000.0)

REFERENCE_COEFFS = {
    1: (139.8528, -0.0227),
    2: (173.1836, -0.0664, 6.3902e-6),
    3: (203.1861, -0.1286, 2.9231e-5, -2.1012e-9),
}

REFERENCE_NAMES = {1: "linear", 2: "quadratic", 3: "cubic"}

# model-vs-validation deviation, seconds; the validation points were never published
REFERENCE_DEVIATIONS = {1: 97.228, 2: 37.339, 3: 11.295}

# (optimum power W, optimum time s)
REFERENCE_OPTIMA = {1: (3000.0, 71.75), 2: (2800.0, 65.55), 3: (2750.0, 62.04)}


def reference_model(degree: int) -> PolynomialModel:
    return PolynomialModel.from_coeffs(REFERENCE_COEFFS[degree], REFERENCE_DOMAIN)


def reference_degree(name) -> int:
    """Accept ``1``/``"1"``/``"linear"`` and friends."""
    if isinstance(name, int) or str(name).isdigit():
        degree = int(name)
    else:
        lookup = {v: k for k, v in REFERENCE_NAMES.items()}
        if name not in lookup:
            raise KeyError(f"unknown reference model {name!r}")
        degree = lookup[name]
    if degree not in REFERENCE_COEFFS:
        raise KeyError(f"no reference model of degree {degree}")
    return degree
