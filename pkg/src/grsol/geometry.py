"""Tensor calculus over coordinate charts.

Charts carry a symmetric matrix of exact symbolic entries, a signature
base point, and a Riemann sign-convention flag.  ``Convention.STANDARD``
is the textbook convention

    R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z,
    S(X, Y)  = trace of V -> R(V, X)Y,

``Convention.REVERSED`` flips the overall sign of the Riemann tensor and
therefore of the Ricci tensor and scalar (a convention in common use in
parts of the soliton literature).  Christoffel symbols, covariant and Lie
derivatives, Hessians and divergences are connection-level objects and do
not depend on the flag.

All fields are immutable; component computations are pure and cached per
chart.
"""

from __future__ import annotations

import enum
from fractions import Fraction
from functools import lru_cache
from itertools import product as iproduct
from typing import Callable, Iterable, Sequence, Union

from .symcore import (
    Expr,
    ExprLike,
    Point,
    Rational,
    as_expr,
    diff,
    eval_numeric,
    is_zero,
    simplify,
)

__all__ = [
    "Convention",
    "MetricChart",
    "TensorField",
    "VectorField",
    "CovectorField",
    "ScalarField",
    "GeometryError",
    "DegenerateMetricError",
    "metric_tensor",
    "metric_determinant",
    "inverse_metric",
    "christoffel",
    "riemann",
    "riemann_lowered",
    "ricci",
    "ricci_scalar",
    "ricci_operator",
    "covariant_derivative",
    "nabla_along",
    "commutator",
    "lie_derivative_metric",
    "gradient",
    "hessian",
    "box",
    "divergence",
    "riemann_commutator_apply",
    "lower_vector",
    "raise_covector",
    "exterior_derivative",
    "directional_derivative",
    "inner",
    "einstein_divergence",
    "orthonormal_frame",
    "coordinate_vector",
    "outer",
]

ZERO = Rational(0)
ONE = Rational(1)


class GeometryError(Exception):
    pass


class DegenerateMetricError(GeometryError):
    """The metric determinant is identically zero."""


class Convention(enum.Enum):
    STANDARD = "standard"
    REVERSED = "reversed"

    @property
    def sign(self) -> int:
        return 1 if self is Convention.STANDARD else -1


class MetricChart:
    """Coordinate chart with a symmetric matrix of symbolic entries.

    ``coords`` is an ordered tuple of 2 to 4 coordinate names (spacetime
    charts use 4); ``g`` is the metric matrix (entries are expressions or
    parseable strings); ``base_point`` optionally fixes where signatures
    are evaluated.
    """

    __slots__ = ("coords", "g", "convention", "label", "base_point",
                 "_key", "_hash")

    def __init__(self, coords: Sequence[str], g,
                 convention: Convention = Convention.STANDARD,
                 label: str = None, base_point: Point = None):
        coords = tuple(str(c) for c in coords)
        if not 2 <= len(coords) <= 4:
            raise ValueError("charts are 2- to 4-dimensional")
        if len(set(coords)) != len(coords):
            raise ValueError("duplicate coordinate names")
        n = len(coords)
        rows = tuple(tuple(simplify(as_expr(v)) for v in row) for row in g)
        if len(rows) != n or any(len(r) != n for r in rows):
            raise ValueError(f"metric must be a {n}x{n} matrix")
        for i in range(n):
            for j in range(i + 1, n):
                if rows[i][j] != rows[j][i]:
                    raise ValueError(
                        f"metric is not symmetric: g[{i}][{j}] != g[{j}][{i}]")
        if not isinstance(convention, Convention):
            convention = Convention(convention)
        bp = None
        if base_point is not None:
            bp = tuple(sorted((str(k), float(v)) for k, v in base_point.items()))
            if {k for k, _ in bp} != set(coords):
                raise ValueError("base point must bind every coordinate exactly once")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "g", rows)
        object.__setattr__(self, "convention", convention)
        object.__setattr__(self, "label", label)
        object.__setattr__(self, "base_point", bp)
        key = (coords, tuple(tuple(e._key for e in r) for r in rows),
               convention.value, label, bp)
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash(key))

    def __setattr__(self, name, value):  # pragma: no cover
        raise AttributeError("charts are immutable")

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return isinstance(other, MetricChart) and self._key == other._key

    def __repr__(self):
        name = self.label or "chart"
        return f"<MetricChart {name} dim={self.dim} {self.convention.value}>"

    def entry(self, i: int, j: int) -> Expr:
        return self.g[i][j]

    def with_convention(self, convention: Convention) -> "MetricChart":
        if convention is self.convention:
            return self
        return MetricChart(self.coords, self.g, convention, self.label,
                           dict(self.base_point) if self.base_point else None)

    def point(self, values: Iterable[float]) -> dict:
        values = tuple(values)
        if len(values) != self.dim:
            raise ValueError("wrong number of coordinate values")
        return dict(zip(self.coords, (float(v) for v in values)))

    def numeric_metric(self, point: Point, fn_bindings=None):
        import numpy as np

        n = self.dim
        out = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                out[i, j] = eval_numeric(self.g[i][j], point, fn_bindings)
        return out

    def signature(self, point: Point = None) -> tuple:
        """Signs of the metric eigenvalues at the given (or base) point."""
        import numpy as np

        if point is None:
            if self.base_point is None:
                raise GeometryError("no base point to evaluate the signature at")
            point = dict(self.base_point)
        eig = np.linalg.eigvalsh(self.numeric_metric(point))
        if min(abs(eig)) < 1e-12:
            raise DegenerateMetricError("metric is singular at the point")
        return tuple(1 if v > 0 else -1 for v in sorted(eig))

    def is_spacetime(self, point: Point = None) -> bool:
        """Lorentzian signature (-,+,+,+) on a 4-dimensional chart."""
        return self.dim == 4 and self.signature(point) == (-1, 1, 1, 1)


class _Components:
    """Shared componentwise arithmetic for fields."""

    def _binary(self, other, op):
        raise NotImplementedError

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __mul__(self, scalar):
        scalar = scalar.expr if isinstance(scalar, ScalarField) else as_expr(scalar)
        return self.map(lambda c: c * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self.map(lambda c: -c)


class TensorField(_Components):
    """Dense tensor over a chart: ``n_up`` upper then ``n_down`` lower
    indices, components in coordinate order.  Declared symmetries (pairs
    of positions in the combined index list) are validated structurally
    at construction."""

    __slots__ = ("chart", "n_up", "n_down", "comps", "symmetries")

    def __init__(self, chart: MetricChart, n_up: int, n_down: int,
                 components, symmetries=()):
        n = chart.dim
        rank = n_up + n_down
        flat = _flatten(components, rank, n)
        comps = tuple(simplify(as_expr(c)) for c in flat)
        if len(comps) != n ** rank:
            raise ValueError(
                f"expected {n ** rank} components, got {len(comps)}")
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "n_up", n_up)
        object.__setattr__(self, "n_down", n_down)
        object.__setattr__(self, "comps", comps)
        object.__setattr__(self, "symmetries", tuple(symmetries))
        for kind, a, b in self.symmetries:
            self._check_symmetry(kind, a, b)

    def __setattr__(self, name, value):  # pragma: no cover
        raise AttributeError("tensor fields are immutable")

    @property
    def valence(self):
        return (self.n_up, self.n_down)

    @property
    def rank(self):
        return self.n_up + self.n_down

    def _offset(self, idx) -> int:
        n = self.chart.dim
        off = 0
        for i in idx:
            off = off * n + i
        return off

    def __getitem__(self, idx) -> Expr:
        if isinstance(idx, int):
            idx = (idx,)
        if len(idx) != self.rank:
            raise IndexError(f"need {self.rank} indices")
        return self.comps[self._offset(idx)]

    @classmethod
    def build(cls, chart, n_up, n_down, fn: Callable, symmetries=()):
        n = chart.dim
        comps = [fn(idx) for idx in iproduct(range(n), repeat=n_up + n_down)]
        return cls(chart, n_up, n_down, comps, symmetries)

    def map(self, fn) -> "TensorField":
        return TensorField(self.chart, self.n_up, self.n_down,
                           [fn(c) for c in self.comps])

    def _binary(self, other, op):
        if not isinstance(other, TensorField) or other.valence != self.valence \
                or other.chart != self.chart:
            raise TypeError("tensor arithmetic needs matching chart and valence")
        return TensorField(self.chart, self.n_up, self.n_down,
                           [op(a, b) for a, b in zip(self.comps, other.comps)])

    def _check_symmetry(self, kind, a, b):
        n = self.chart.dim
        for idx in iproduct(range(n), repeat=self.rank):
            jdx = list(idx)
            jdx[a], jdx[b] = jdx[b], jdx[a]
            mirror = self[tuple(jdx)]
            if kind == "symmetric":
                ok = self[idx] == mirror
            elif kind == "antisymmetric":
                ok = self[idx] == -mirror
            else:
                raise ValueError(f"unknown symmetry kind {kind!r}")
            if not ok:
                raise ValueError(
                    f"declared {kind} symmetry fails at index {idx}")

    def is_zero_tensor(self, **kw) -> bool:
        return all(is_zero(c, **kw) for c in self.comps)

    def nonzero_components(self) -> dict:
        n = self.chart.dim
        return {idx: self[idx]
                for idx in iproduct(range(n), repeat=self.rank)
                if not is_zero(self[idx])}

    def __eq__(self, other):
        return (isinstance(other, TensorField)
                and self.chart == other.chart
                and self.valence == other.valence
                and self.comps == other.comps)

    def __hash__(self):
        return hash((self.chart, self.valence, tuple(c._key for c in self.comps)))

    def __repr__(self):
        return (f"<TensorField {self.valence} on "
                f"{self.chart.label or 'chart'}>")


def _flatten(components, rank, n):
    if rank == 0:
        return [components] if isinstance(components, (Expr, int, str)) \
            else list(components)
    out = []

    def rec(node, depth):
        if depth == rank:
            out.append(node)
            return
        seq = list(node)
        if len(seq) != n:
            raise ValueError("component array has the wrong shape")
        for item in seq:
            rec(item, depth + 1)

    if isinstance(components, (list, tuple)) and len(components) == n ** rank \
            and rank > 1 and not any(isinstance(c, (list, tuple))
                                     for c in components):
        return list(components)  # already flat
    rec(components, 0)
    return out


class VectorField(_Components):
    """Contravariant vector field (upper index)."""

    __slots__ = ("chart", "comps")

    def __init__(self, chart: MetricChart, components):
        comps = tuple(simplify(as_expr(c)) for c in components)
        if len(comps) != chart.dim:
            raise ValueError("wrong number of components")
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "comps", comps)

    def __setattr__(self, name, value):  # pragma: no cover
        raise AttributeError("vector fields are immutable")

    def __getitem__(self, i):
        return self.comps[i]

    def map(self, fn):
        return VectorField(self.chart, [fn(c) for c in self.comps])

    def _binary(self, other, op):
        if not isinstance(other, VectorField) or other.chart != self.chart:
            raise TypeError("vector arithmetic needs a matching chart")
        return VectorField(self.chart,
                           [op(a, b) for a, b in zip(self.comps, other.comps)])

    def is_zero_field(self, **kw):
        return all(is_zero(c, **kw) for c in self.comps)

    def __eq__(self, other):
        return (isinstance(other, VectorField) and self.chart == other.chart
                and self.comps == other.comps)

    def __hash__(self):
        return hash((self.chart, tuple(c._key for c in self.comps)))

    def __repr__(self):
        return f"<VectorField ({', '.join(map(str, self.comps))})>"


class CovectorField(_Components):
    """Covariant vector field (lower index)."""

    __slots__ = ("chart", "comps")

    def __init__(self, chart: MetricChart, components):
        comps = tuple(simplify(as_expr(c)) for c in components)
        if len(comps) != chart.dim:
            raise ValueError("wrong number of components")
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "comps", comps)

    def __setattr__(self, name, value):  # pragma: no cover
        raise AttributeError("covector fields are immutable")

    def __getitem__(self, i):
        return self.comps[i]

    def map(self, fn):
        return CovectorField(self.chart, [fn(c) for c in self.comps])

    def _binary(self, other, op):
        if not isinstance(other, CovectorField) or other.chart != self.chart:
            raise TypeError("covector arithmetic needs a matching chart")
        return CovectorField(self.chart,
                             [op(a, b) for a, b in zip(self.comps, other.comps)])

    def is_zero_field(self, **kw):
        return all(is_zero(c, **kw) for c in self.comps)

    def __eq__(self, other):
        return (isinstance(other, CovectorField) and self.chart == other.chart
                and self.comps == other.comps)

    def __hash__(self):
        return hash((self.chart, tuple(c._key for c in self.comps)))

    def __repr__(self):
        return f"<CovectorField ({', '.join(map(str, self.comps))})>"


class ScalarField:
    """Scalar function on a chart."""

    __slots__ = ("chart", "expr")

    def __init__(self, chart: MetricChart, expr: ExprLike):
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "expr", simplify(as_expr(expr)))

    def __setattr__(self, name, value):  # pragma: no cover
        raise AttributeError("scalar fields are immutable")

    def is_constant(self) -> bool:
        from .symcore import free_coords

        return not (free_coords(self.expr) & set(self.chart.coords))

    def __eq__(self, other):
        if isinstance(other, ScalarField):
            return self.chart == other.chart and self.expr == other.expr
        return self.expr == other

    def __hash__(self):
        return hash((self.chart, self.expr))

    def __repr__(self):
        return f"<ScalarField {self.expr}>"


def coordinate_vector(chart: MetricChart, i: int) -> VectorField:
    """The coordinate basis field for the i-th coordinate."""
    return VectorField(chart, [ONE if j == i else ZERO
                               for j in range(chart.dim)])


def as_scalar(chart, f) -> Expr:
    return f.expr if isinstance(f, ScalarField) else simplify(as_expr(f))


# ---------------------------------------------------------------------------
# Metric-level quantities


def metric_tensor(chart: MetricChart) -> TensorField:
    return TensorField(chart, 0, 2, chart.g, symmetries=(("symmetric", 0, 1),))


@lru_cache(maxsize=None)
def metric_determinant(chart: MetricChart) -> Expr:
    return _det([list(row) for row in chart.g])


def _det(m) -> Expr:
    n = len(m)
    if n == 1:
        return m[0][0]
    out = ZERO
    sign = 1
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        out = out + Rational(sign) * m[0][j] * _det(minor)
        sign = -sign
    return out


@lru_cache(maxsize=None)
def _inverse_rows(chart: MetricChart):
    det = metric_determinant(chart)
    if is_zero(det):
        raise DegenerateMetricError("degenerate metric: det(g) == 0")
    n = chart.dim
    m = [list(row) for row in chart.g]
    inv = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[m[r][c] for c in range(n) if c != j]
                     for r in range(n) if r != i]
            cof = Rational((-1) ** (i + j)) * _det(minor)
            inv[j][i] = simplify(cof / det)
    return tuple(tuple(row) for row in inv)


def inverse_metric(chart: MetricChart) -> TensorField:
    """g^{ab}, satisfying g^{ac} g_{cb} = delta^a_b componentwise."""
    return TensorField(chart, 2, 0, _inverse_rows(chart),
                       symmetries=(("symmetric", 0, 1),))


@lru_cache(maxsize=None)
def _metric_partials(chart: MetricChart):
    n = chart.dim
    return tuple(tuple(tuple(diff(chart.g[i][j], chart.coords[l])
                             for j in range(n)) for i in range(n))
                 for l in range(n))


@lru_cache(maxsize=None)
def christoffel(chart: MetricChart) -> TensorField:
    """Levi-Civita connection coefficients, symmetric in the lower pair."""
    n = chart.dim
    ginv = _inverse_rows(chart)
    dg = _metric_partials(chart)
    half = Rational(1, 2)

    def gamma(idx):
        k, i, j = idx
        out = ZERO
        for l in range(n):
            out = out + ginv[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j])
        return half * out

    return TensorField.build(chart, 1, 2, gamma,
                             symmetries=(("symmetric", 1, 2),))


@lru_cache(maxsize=None)
def riemann(chart: MetricChart) -> TensorField:
    """Curvature tensor R^l_{ijk}, the ``l`` component of R(e_i, e_j)e_k.

    STANDARD sign: R^l_{ijk} = d_i Gamma^l_{jk} - d_j Gamma^l_{ik}
    + Gamma^l_{im} Gamma^m_{jk} - Gamma^l_{jm} Gamma^m_{ik}; REVERSED
    negates every component.
    """
    n = chart.dim
    gam = christoffel(chart)
    coords = chart.coords
    sign = Rational(chart.convention.sign)

    def entry(idx):
        l, i, j, k = idx
        out = diff(gam[l, j, k], coords[i]) - diff(gam[l, i, k], coords[j])
        for m in range(n):
            out = out + gam[l, i, m] * gam[m, j, k] \
                - gam[l, j, m] * gam[m, i, k]
        return sign * out

    return TensorField.build(chart, 1, 3, entry)


@lru_cache(maxsize=None)
def riemann_lowered(chart: MetricChart) -> TensorField:
    """K_{abcd} = g(R(e_a, e_b)e_c, e_d): the upper slot lowered into the
    last position.  Antisymmetric in (a,b) and in (c,d)."""
    n = chart.dim
    riem = riemann(chart)

    def entry(idx):
        a, b, c, d = idx
        out = ZERO
        for m in range(n):
            out = out + chart.g[d][m] * riem[m, a, b, c]
        return out

    return TensorField.build(
        chart, 0, 4, entry,
        symmetries=(("antisymmetric", 0, 1), ("antisymmetric", 2, 3)))


@lru_cache(maxsize=None)
def ricci(chart: MetricChart) -> TensorField:
    """S_{jk} = R^l_{ljk} (the trace of V -> R(V, e_j)e_k)."""
    n = chart.dim
    riem = riemann(chart)

    def entry(idx):
        j, k = idx
        out = ZERO
        for l in range(n):
            out = out + riem[l, l, j, k]
        return out

    return TensorField.build(chart, 0, 2, entry,
                             symmetries=(("symmetric", 0, 1),))


@lru_cache(maxsize=None)
def ricci_scalar(chart: MetricChart) -> ScalarField:
    n = chart.dim
    ginv = _inverse_rows(chart)
    ric = ricci(chart)
    out = ZERO
    for j in range(n):
        for k in range(n):
            out = out + ginv[j][k] * ric[j, k]
    return ScalarField(chart, out)


@lru_cache(maxsize=None)
def ricci_operator(chart: MetricChart) -> TensorField:
    """Q^a_b = g^{ac} S_{cb}."""
    n = chart.dim
    ginv = _inverse_rows(chart)
    ric = ricci(chart)

    def entry(idx):
        a, b = idx
        out = ZERO
        for c in range(n):
            out = out + ginv[a][c] * ric[c, b]
        return out

    return TensorField.build(chart, 1, 1, entry)


# ---------------------------------------------------------------------------
# Derivative operators


def covariant_derivative(field) -> TensorField:
    """Levi-Civita covariant derivative.  The new derivative index is the
    first lower index of the result: (nabla T)^{ups}_{a, downs}."""
    if isinstance(field, ScalarField):
        chart = field.chart
        return TensorField(chart, 0, 1,
                           [diff(field.expr, c) for c in chart.coords])
    if isinstance(field, VectorField):
        field = TensorField(field.chart, 1, 0, field.comps)
    elif isinstance(field, CovectorField):
        field = TensorField(field.chart, 0, 1, field.comps)
    chart = field.chart
    n = chart.dim
    gam = christoffel(chart)
    u, d = field.valence
    coords = chart.coords

    def entry(idx):
        ups = idx[:u]
        a = idx[u]
        downs = idx[u + 1:]
        out = diff(field[ups + downs], coords[a])
        for pos in range(u):
            for m in range(n):
                swapped = ups[:pos] + (m,) + ups[pos + 1:]
                out = out + gam[ups[pos], a, m] * field[swapped + downs]
        for pos in range(d):
            for m in range(n):
                swapped = downs[:pos] + (m,) + downs[pos + 1:]
                out = out - gam[m, a, downs[pos]] * field[ups + swapped]
        return out

    return TensorField.build(chart, u, d + 1, entry)


def nabla_along(chart: MetricChart, X: VectorField, V: VectorField) -> VectorField:
    """nabla_X V."""
    n = chart.dim
    gam = christoffel(chart)
    comps = []
    for b in range(n):
        out = ZERO
        for a in range(n):
            term = diff(V[b], chart.coords[a])
            for m in range(n):
                term = term + gam[b, a, m] * V[m]
            out = out + X[a] * term
        comps.append(out)
    return VectorField(chart, comps)


def commutator(chart: MetricChart, X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y]^b = X^a d_a Y^b - Y^a d_a X^b."""
    n = chart.dim
    comps = []
    for b in range(n):
        out = ZERO
        for a in range(n):
            out = out + X[a] * diff(Y[b], chart.coords[a]) \
                - Y[a] * diff(X[b], chart.coords[a])
        comps.append(out)
    return VectorField(chart, comps)


def lie_derivative_metric(chart: MetricChart, X: VectorField) -> TensorField:
    """(Lie_X g)_{ab} = g(nabla_a X, e_b) + g(e_a, nabla_b X)."""
    n = chart.dim
    dx = covariant_derivative(VectorField(chart, X.comps))  # (1,1): [c, a]

    def entry(idx):
        a, b = idx
        out = ZERO
        for c in range(n):
            out = out + chart.g[c][b] * dx[c, a] + chart.g[a][c] * dx[c, b]
        return out

    return TensorField.build(chart, 0, 2, entry,
                             symmetries=(("symmetric", 0, 1),))


def gradient(chart: MetricChart, psi) -> VectorField:
    """(D psi)^a = g^{ab} d_b psi."""
    f = as_scalar(chart, psi)
    ginv = _inverse_rows(chart)
    n = chart.dim
    partials = [diff(f, c) for c in chart.coords]
    return VectorField(chart, [sum((ginv[a][b] * partials[b] for b in range(n)),
                                   start=ZERO) for a in range(n)])


def hessian(chart: MetricChart, psi) -> TensorField:
    """Hess_{ab} = d_a d_b psi - Gamma^c_{ab} d_c psi."""
    f = as_scalar(chart, psi)
    n = chart.dim
    gam = christoffel(chart)
    partials = [diff(f, c) for c in chart.coords]

    def entry(idx):
        a, b = idx
        out = diff(partials[b], chart.coords[a])
        for c in range(n):
            out = out - gam[c, a, b] * partials[c]
        return out

    return TensorField.build(chart, 0, 2, entry,
                             symmetries=(("symmetric", 0, 1),))


def box(chart: MetricChart, psi) -> ScalarField:
    """d'Alembertian: g^{ab} Hess_{ab} (= div grad for scalars)."""
    n = chart.dim
    ginv = _inverse_rows(chart)
    hess = hessian(chart, psi)
    out = ZERO
    for a in range(n):
        for b in range(n):
            out = out + ginv[a][b] * hess[a, b]
    return ScalarField(chart, out)


def divergence(chart: MetricChart, X: VectorField) -> ScalarField:
    """div X = d_a X^a + Gamma^a_{a b} X^b."""
    n = chart.dim
    gam = christoffel(chart)
    out = ZERO
    for a in range(n):
        out = out + diff(X[a], chart.coords[a])
        for b in range(n):
            out = out + gam[a, a, b] * X[b]
    return ScalarField(chart, out)


def riemann_commutator_apply(chart: MetricChart, E: VectorField,
                             F: VectorField, V: VectorField) -> VectorField:
    """nabla_E nabla_F V - nabla_F nabla_E V - nabla_[E,F] V.

    Under the STANDARD convention this equals the stored Riemann tensor
    contracted with (E, F, V).
    """
    a = nabla_along(chart, E, nabla_along(chart, F, V))
    b = nabla_along(chart, F, nabla_along(chart, E, V))
    c = nabla_along(chart, commutator(chart, E, F), V)
    return a - b - c


def lower_vector(chart: MetricChart, X: VectorField) -> CovectorField:
    n = chart.dim
    return CovectorField(chart, [sum((chart.g[a][b] * X[b] for b in range(n)),
                                     start=ZERO) for a in range(n)])


def raise_covector(chart: MetricChart, B: CovectorField) -> VectorField:
    n = chart.dim
    ginv = _inverse_rows(chart)
    return VectorField(chart, [sum((ginv[a][b] * B[b] for b in range(n)),
                                   start=ZERO) for a in range(n)])


def exterior_derivative(chart: MetricChart, B: CovectorField) -> TensorField:
    """(dB)_{ab} = d_a B_b - d_b B_a (the vorticity 2-form of a velocity
    covector)."""

    def entry(idx):
        a, b = idx
        return diff(B[b], chart.coords[a]) - diff(B[a], chart.coords[b])

    return TensorField.build(chart, 0, 2, entry,
                             symmetries=(("antisymmetric", 0, 1),))


def directional_derivative(chart: MetricChart, X: VectorField, f) -> Expr:
    """X(f) = X^a d_a f."""
    f = as_scalar(chart, f)
    out = ZERO
    for a in range(chart.dim):
        out = out + X[a] * diff(f, chart.coords[a])
    return simplify(out)


def inner(chart: MetricChart, X: VectorField, Y: VectorField) -> Expr:
    """g(X, Y)."""
    n = chart.dim
    out = ZERO
    for a in range(n):
        for b in range(n):
            out = out + chart.g[a][b] * X[a] * Y[b]
    return simplify(out)


def outer(B1: CovectorField, B2: CovectorField = None) -> TensorField:
    """B1 (x) B2 as a (0,2) tensor; B1 (x) B1 when B2 is omitted."""
    B2 = B1 if B2 is None else B2
    if B2.chart != B1.chart:
        raise TypeError("covectors live on different charts")
    chart = B1.chart
    return TensorField.build(chart, 0, 2, lambda idx: B1[idx[0]] * B2[idx[1]])


def einstein_divergence(chart: MetricChart) -> CovectorField:
    """nabla^a (S_{ab} - R/2 g_{ab}); identically zero by the contracted
    second Bianchi identity."""
    n = chart.dim
    ginv = _inverse_rows(chart)
    ric = ricci(chart)
    scal = ricci_scalar(chart).expr
    half = Rational(1, 2)
    tens = TensorField.build(
        chart, 0, 2,
        lambda idx: ric[idx] - half * scal * chart.g[idx[0]][idx[1]])
    grad_t = covariant_derivative(tens)  # (0,3): [a, b, c] = nabla_a T_bc
    comps = []
    for c in range(n):
        out = ZERO
        for a in range(n):
            for b in range(n):
                out = out + ginv[a][b] * grad_t[b, a, c]
        comps.append(out)
    return CovectorField(chart, comps)


def _definite_sign(e: Expr, chart: MetricChart = None):
    """Sign of an expression that is positive or negative on the whole
    chart domain; None when undecidable structurally."""
    from .symcore import Coord, Exp, Power, Product

    e = simplify(e)
    if isinstance(e, Rational):
        v = e.value
        return 0 if v == 0 else (1 if v > 0 else -1)
    factors = e.factors if isinstance(e, Product) else (e,)
    sign = 1
    for f in factors:
        if isinstance(f, Rational):
            sign *= 1 if f.value > 0 else -1
        elif isinstance(f, Exp):
            continue
        elif isinstance(f, Power):
            base, q = f.base, f.exponent
            if isinstance(base, Exp):
                continue
            if isinstance(base, Rational) and base.value > 0:
                continue
            if isinstance(base, Coord) and q.denominator == 1 and int(q) % 2 == 0:
                continue  # even power: nonnegative, positive off the axis
            return None
        else:
            return None
    return sign


def orthonormal_frame(chart: MetricChart):
    """Orthonormal frame (e_i, eps_i) for a diagonal metric: e_i is the
    rescaled coordinate field |g_ii|^(-1/2) d_i and eps_i = sign(g_ii)."""
    n = chart.dim
    for i in range(n):
        for j in range(n):
            if i != j and not is_zero(chart.g[i][j]):
                raise GeometryError(
                    "orthonormal frames require a diagonal metric; use the "
                    "g^{ab} contraction instead")
    frame = []
    for i in range(n):
        gii = chart.g[i][i]
        sign = _definite_sign(gii, chart)
        if sign is None and chart.base_point is not None:
            v = eval_numeric(gii, dict(chart.base_point))
            sign = 1 if v > 0 else -1
        if sign in (None, 0):
            raise GeometryError(
                f"cannot determine the sign of g[{i}][{i}]")
        scale = (Rational(sign) * gii) ** Fraction(-1, 2)
        comps = [scale if j == i else ZERO for j in range(n)]
        frame.append((VectorField(chart, comps), sign))
    return frame
