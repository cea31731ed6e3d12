"""Independent numeric validation: central finite differences over purely
numeric metric callables.

The pipeline deliberately shares no code with the symbolic kernel's
differentiation: symbolic expressions enter only through pointwise
*evaluation*, so agreement between this module and the symbolic curvature
is a genuine two-implementation check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .geometry import MetricChart
from .symcore import eval_numeric

__all__ = [
    "NumericChart",
    "IllConditionedMetricError",
    "from_chart",
    "fd_christoffel",
    "fd_riemann",
    "fd_ricci",
    "fd_directional",
    "random_points",
    "compare_symbolic_numeric",
    "evaluate_field",
    "random_zero_probe",
]

_COND_LIMIT = 1e8


class IllConditionedMetricError(ValueError):
    """Metric inversion is numerically unreliable at the sample point."""


@dataclass(frozen=True)
class NumericChart:
    """Numeric metric g(point) -> matrix with a finite-difference step,
    per-coordinate sampling bounds, and a seed for point generation.
    ``riemann_sign`` mirrors the symbolic chart's sign convention so that
    comparisons are convention-consistent."""

    coords: tuple
    metric_fn: Callable
    h: float = 1e-5
    seed: int = 0xF0F0
    bounds: tuple = None
    riemann_sign: int = 1

    @property
    def dim(self) -> int:
        return len(self.coords)

    def point_array(self, pt: Mapping) -> np.ndarray:
        return np.array([float(pt[c]) for c in self.coords])

    def metric_at(self, pt) -> np.ndarray:
        x = pt if isinstance(pt, np.ndarray) else self.point_array(pt)
        g = np.asarray(self.metric_fn(x), dtype=float)
        if g.shape != (self.dim, self.dim):
            raise ValueError("metric callable returned the wrong shape")
        if not np.allclose(g, g.T, rtol=0, atol=1e-12):
            raise ValueError("metric callable is not symmetric")
        return g


def from_chart(chart: MetricChart, fn_bindings=None, h: float = 1e-5,
               bounds=None, seed: int = 0xF0F0) -> NumericChart:
    """Wrap a symbolic chart as a numeric one (pointwise evaluation only)."""

    def metric_fn(x: np.ndarray) -> np.ndarray:
        pt = dict(zip(chart.coords, x))
        return np.array([[eval_numeric(chart.g[i][j], pt, fn_bindings)
                          for j in range(chart.dim)]
                         for i in range(chart.dim)])

    return NumericChart(coords=chart.coords, metric_fn=metric_fn, h=h,
                        seed=seed, bounds=bounds,
                        riemann_sign=chart.convention.sign)


def _inverse_checked(g: np.ndarray) -> np.ndarray:
    if np.linalg.cond(g) > _COND_LIMIT:
        raise IllConditionedMetricError(
            f"metric condition number exceeds {_COND_LIMIT:g}")
    return np.linalg.inv(g)


def _metric_partials(nc: NumericChart, x: np.ndarray, h: float) -> np.ndarray:
    n = nc.dim
    dg = np.empty((n, n, n))
    for l in range(n):
        step = np.zeros(n)
        step[l] = h
        dg[l] = (nc.metric_at(x + step) - nc.metric_at(x - step)) / (2 * h)
    return dg


def _christoffel_from_partials(g: np.ndarray, dg: np.ndarray) -> np.ndarray:
    ginv = _inverse_checked(g)
    n = g.shape[0]
    gamma = np.empty((n, n, n))
    for k in range(n):
        for i in range(n):
            for j in range(n):
                acc = 0.0
                for l in range(n):
                    acc += ginv[k, l] * (dg[i][j, l] + dg[j][i, l] - dg[l][i, j])
                gamma[k, i, j] = 0.5 * acc
    return gamma


def fd_christoffel(nc: NumericChart, pt, h: float = None,
                   richardson: bool = False) -> np.ndarray:
    """Gamma^k_ij from central differences of the metric entries."""
    h = nc.h if h is None else h
    x = nc.point_array(pt) if not isinstance(pt, np.ndarray) else pt
    if richardson:
        d1 = fd_christoffel(nc, x, h=h)
        d2 = fd_christoffel(nc, x, h=h / 2)
        return (4.0 * d2 - d1) / 3.0
    g = nc.metric_at(x)
    return _christoffel_from_partials(g, _metric_partials(nc, x, h))


def fd_riemann(nc: NumericChart, pt, h_outer: float = 1e-4,
               richardson: bool = False) -> np.ndarray:
    """R^l_{ijk} from central differences of the finite-difference
    Christoffel symbols, with the chart's sign convention applied."""
    x = nc.point_array(pt) if not isinstance(pt, np.ndarray) else pt
    if richardson:
        d1 = fd_riemann(nc, x, h_outer=h_outer)
        d2 = fd_riemann(nc, x, h_outer=h_outer / 2)
        return (4.0 * d2 - d1) / 3.0
    n = nc.dim
    gamma = fd_christoffel(nc, x)
    dgamma = np.empty((n, n, n, n))  # [i][l, j, k] = d_i Gamma^l_jk
    for i in range(n):
        step = np.zeros(n)
        step[i] = h_outer
        dgamma[i] = (fd_christoffel(nc, x + step)
                     - fd_christoffel(nc, x - step)) / (2 * h_outer)
    riem = np.empty((n, n, n, n))
    for l in range(n):
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    acc = dgamma[i][l, j, k] - dgamma[j][l, i, k]
                    for m in range(n):
                        acc += gamma[l, i, m] * gamma[m, j, k] \
                            - gamma[l, j, m] * gamma[m, i, k]
                    riem[l, i, j, k] = acc
    return nc.riemann_sign * riem


def fd_ricci(nc: NumericChart, pt, **kw) -> np.ndarray:
    riem = fd_riemann(nc, pt, **kw)
    return np.einsum("lljk->jk", riem)


def fd_directional(fn: Callable, pt: Mapping, coord: str, h: float = 1e-5,
                   richardson: bool = False) -> float:
    """Central finite difference of a scalar callable of a point dict."""

    def stencil(step):
        up = dict(pt)
        dn = dict(pt)
        up[coord] = up[coord] + step
        dn[coord] = dn[coord] - step
        return (fn(up) - fn(dn)) / (2 * step)

    if richardson:
        return (4.0 * stencil(h / 2) - stencil(h)) / 3.0
    return stencil(h)


def random_points(nc: NumericChart, n: int) -> list:
    """Seeded sample points, uniform over the chart bounds (default
    [-1, 1] per coordinate)."""
    rng = np.random.default_rng(nc.seed)
    bounds = nc.bounds or {c: (-1.0, 1.0) for c in nc.coords}
    if not isinstance(bounds, Mapping):
        bounds = {c: bounds for c in nc.coords}
    out = []
    for _ in range(n):
        pt = {}
        for c in nc.coords:
            lo, hi = bounds.get(c, (-1.0, 1.0))
            pt[c] = float(rng.uniform(lo, hi))
        out.append(pt)
    return out


def evaluate_field(field_like, pt: Mapping, fn_bindings=None) -> np.ndarray:
    """Numeric component array of a symbolic tensor/vector/scalar field."""
    from .geometry import CovectorField, ScalarField, TensorField, VectorField

    if isinstance(field_like, ScalarField):
        return np.array(eval_numeric(field_like.expr, pt, fn_bindings))
    if isinstance(field_like, (VectorField, CovectorField)):
        return np.array([eval_numeric(c, pt, fn_bindings)
                         for c in field_like.comps])
    if isinstance(field_like, TensorField):
        n = field_like.chart.dim
        flat = np.array([eval_numeric(c, pt, fn_bindings)
                         for c in field_like.comps])
        return flat.reshape((n,) * field_like.rank)
    raise TypeError(f"cannot evaluate {type(field_like).__name__}")


def compare_symbolic_numeric(field_like, numeric_fn: Callable,
                             points: Sequence, fn_bindings=None) -> float:
    """Max over points and components of |sym - num| / (1 + |num|)."""
    worst = 0.0
    for pt in points:
        sym = evaluate_field(field_like, pt, fn_bindings)
        num = np.asarray(numeric_fn(pt), dtype=float)
        if sym.shape != num.shape:
            raise ValueError("shape mismatch between symbolic and numeric")
        rel = np.abs(sym - num) / (1.0 + np.abs(num))
        worst = max(worst, float(rel.max()))
    return worst


def random_zero_probe(e, n: int = 32, tol: float = 1e-9, seed: int = 0xF0F0,
                      bounds=(-2.0, 2.0), fn_bindings=None) -> bool:
    """True iff |eval(e)| <= tol at all n seeded random points.  Named
    functions without explicit bindings get independent random constants
    per point."""
    from .symcore import EvalDomainError, free_coords, free_functions, simplify

    e = simplify(e)
    coords = sorted(free_coords(e))
    funcs = sorted(free_functions(e))
    rng = np.random.default_rng(seed)
    done = 0
    attempts = 0
    while done < n:
        attempts += 1
        if attempts > 50 * n:
            raise IllConditionedMetricError(
                "probe samples kept leaving the real domain")
        pt = {c: float(rng.uniform(*bounds)) for c in coords}
        fb = dict(fn_bindings or {})
        for key in funcs:
            if key not in fb:
                v = float(rng.uniform(*bounds))
                fb[key] = (lambda vv: (lambda _x: vv))(v)
        try:
            val = eval_numeric(e, pt, fb)
        except EvalDomainError:
            continue
        if abs(val) > tol:
            return False
        done += 1
    return True
