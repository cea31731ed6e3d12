"""Bundled charts: the de Sitter-type verification chart, flat charts for
trivial baselines, low-dimensional curved test charts, and seeded random
diagonal metrics for the identity suite."""

from __future__ import annotations

import random
from fractions import Fraction

from .geometry import Convention, MetricChart
from .symcore import Coord, Exp, Rational, simplify

__all__ = [
    "desitter4",
    "minkowski",
    "polar2",
    "euclidean2",
    "hyperbolic2",
    "random_diagonal_chart",
]

ZERO = Rational(0)
ONE = Rational(1)


def desitter4(convention: Convention = Convention.REVERSED) -> MetricChart:
    """The expanding-slicing chart ds^2 = -dw4^2 + e^{2 w4}(dw1^2 + dw2^2
    + dw3^2).  Under the REVERSED convention its Ricci scalar is -12."""
    w4 = Coord("w4")
    e2 = Exp(2 * w4)
    g = [[e2, 0, 0, 0], [0, e2, 0, 0], [0, 0, e2, 0], [0, 0, 0, -1]]
    return MetricChart(
        ("w1", "w2", "w3", "w4"), g, convention, label="desitter4",
        base_point={"w1": 0.0, "w2": 0.0, "w3": 0.0, "w4": 0.0})


def minkowski(convention: Convention = Convention.STANDARD) -> MetricChart:
    g = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, -1]]
    return MetricChart(
        ("w1", "w2", "w3", "w4"), g, convention, label="minkowski",
        base_point={"w1": 0.0, "w2": 0.0, "w3": 0.0, "w4": 0.0})


def polar2() -> MetricChart:
    """Flat plane in polar coordinates (r > 0)."""
    r = Coord("r")
    return MetricChart(("r", "theta"), [[1, 0], [0, r ** 2]],
                       Convention.STANDARD, label="polar2",
                       base_point={"r": 1.0, "theta": 0.0})


def euclidean2() -> MetricChart:
    return MetricChart(("x", "y"), [[1, 0], [0, 1]], Convention.STANDARD,
                       label="euclidean2", base_point={"x": 0.0, "y": 0.0})


def hyperbolic2() -> MetricChart:
    """Hyperbolic plane in horocyclic coordinates: ds^2 = dr^2 + e^{2r}
    dx^2, constant curvature -1 (Ricci = -g under STANDARD)."""
    r = Coord("r")
    return MetricChart(("r", "x"), [[1, 0], [0, Exp(2 * r)]],
                       Convention.STANDARD, label="hyperbolic2",
                       base_point={"r": 0.0, "x": 0.0})


_COEFFS = [Fraction(1), Fraction(2), Fraction(3), Fraction(1, 2),
           Fraction(3, 2), Fraction(-1), Fraction(-2), Fraction(-1, 2)]


def random_diagonal_chart(seed: int, dim: int = 4,
                          convention: Convention = Convention.STANDARD,
                          lorentzian: bool = False) -> MetricChart:
    """Seeded random diagonal metric whose entries are rational multiples
    of exponentials of integer linear forms in the coordinates."""
    rng = random.Random(seed)
    coords = tuple(f"w{i + 1}" for i in range(dim))
    atoms = [Coord(c) for c in coords]
    rows = [[ZERO] * dim for _ in range(dim)]
    for i in range(dim):
        coeff = rng.choice(_COEFFS)
        if lorentzian:
            coeff = abs(coeff) if i < dim - 1 else -abs(coeff)
        form = sum((Rational(rng.randint(-2, 2)) * a for a in atoms),
                   start=ZERO)
        entry = Rational(coeff)
        if not is_const_zero(form):
            entry = entry * Exp(form)
        rows[i][i] = entry
    return MetricChart(coords, rows, convention,
                       label=f"random-diag-{seed}",
                       base_point={c: 0.0 for c in coords})


def is_const_zero(e) -> bool:
    return simplify(e) == Rational(0)
