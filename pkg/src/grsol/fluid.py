"""Perfect-fluid matter on a chart: stress-energy, the constant-scalar
field equations of extended gravity, the induced Ricci form with its two
fluid coefficients, and equation-of-state era classification.

The theory function is represented by its two values at the constant
curvature scalar, ``f_value`` and ``fR_value`` (the derivative), which is
all the constant-scalar reduction ever uses.  The coupling ``kappa_sq``
stays symbolic unless numerically bound.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .geometry import (
    CovectorField,
    MetricChart,
    TensorField,
    inverse_metric,
    metric_tensor,
    outer,
    ricci,
    ricci_scalar,
)
from .symcore import Expr, Rational, as_expr, is_zero, simplify, symbol

__all__ = [
    "EraClass",
    "FluidState",
    "ZeroFRDerivativeError",
    "NotUnitTimelikeError",
    "alphas",
    "stress_energy",
    "fluid_ricci",
    "scalar_from_fluid",
    "field_equation_residual",
    "classify_era",
    "unit_timelike_covector",
    "state_for_alphas",
]


class ZeroFRDerivativeError(ValueError):
    """f_R vanishes at the constant scalar; the fluid coefficients are
    undefined."""


class NotUnitTimelikeError(ValueError):
    """The supplied velocity covector is not the dual of a unit timelike
    vector (g^{ab} B_a B_b != -1)."""


class EraClass(str, enum.Enum):
    DUST = "dust"
    DARK_MATTER = "dark-matter"
    STIFF_MATTER = "stiff-matter"
    RADIATION = "radiation"
    ISENTROPIC_OTHER = "isentropic-other"


@dataclass(frozen=True)
class FluidState:
    """Isotropic pressure, energy density, coupling, and the two values of
    the theory function at the constant scalar.  ``fR_value`` must be
    nonzero."""

    p: Expr
    sigma: Expr
    kappa_sq: Expr = field(default_factory=lambda: symbol("kappa2"))
    f_value: Expr = field(default_factory=lambda: symbol("f0"))
    fR_value: Expr = field(default_factory=lambda: symbol("f_R"))

    def __post_init__(self):
        for name in ("p", "sigma", "kappa_sq", "f_value", "fR_value"):
            object.__setattr__(self, name, simplify(as_expr(getattr(self, name))))
        if is_zero(self.fR_value):
            raise ZeroFRDerivativeError("f_R value must be nonzero")


def alphas(state: FluidState) -> tuple:
    """The fluid Ricci coefficients:

        alpha1 = kappa^2 (p + sigma) / f_R,
        alpha2 = (2 kappa^2 p + f) / (2 f_R).
    """
    a1 = state.kappa_sq * (state.p + state.sigma) / state.fR_value
    a2 = (2 * state.kappa_sq * state.p + state.f_value) / (2 * state.fR_value)
    return simplify(a1), simplify(a2)


def unit_timelike_covector(chart: MetricChart, B: CovectorField) -> bool:
    """Check g^{ab} B_a B_b == -1."""
    ginv = inverse_metric(chart)
    n = chart.dim
    norm = Rational(0)
    for a in range(n):
        for b in range(n):
            norm = norm + ginv[a, b] * B[a] * B[b]
    return is_zero(norm + 1)


def stress_energy(state: FluidState, B: CovectorField,
                  chart: MetricChart) -> TensorField:
    """T_ab = (sigma + p) B_a B_b + p g_ab for a unit timelike covector B."""
    if not unit_timelike_covector(chart, B):
        raise NotUnitTimelikeError(
            "velocity covector is not unit timelike (g^{ab} B_a B_b != -1)")
    return outer(B) * (state.sigma + state.p) + metric_tensor(chart) * state.p


def fluid_ricci(state: FluidState, B: CovectorField,
                chart: MetricChart) -> TensorField:
    """The Ricci form forced by the constant-scalar field equations:
    R_ab = alpha2 g_ab + alpha1 B_a B_b."""
    a1, a2 = alphas(state)
    return metric_tensor(chart) * a2 + outer(B) * a1


def scalar_from_fluid(state: FluidState) -> Expr:
    """The curvature scalar consistent with the fluid state:
    R = (kappa^2 (3p - sigma) + 2 f) / f_R  (equals -alpha1 + 4 alpha2)."""
    return simplify((state.kappa_sq * (3 * state.p - state.sigma)
                     + 2 * state.f_value) / state.fR_value)


def field_equation_residual(state: FluidState, B: CovectorField,
                            chart: MetricChart) -> TensorField:
    """LHS - RHS of the constant-scalar field equations

        S_ab - R/2 g_ab = kappa^2/f_R T_ab + (f - R f_R)/(2 f_R) g_ab

    with the chart's actual curvature; the zero tensor iff the chart
    solves the equations for this state."""
    g = metric_tensor(chart)
    S = ricci(chart)
    R = ricci_scalar(chart).expr
    T = stress_energy(state, B, chart)
    lhs = S - g * (Rational(1, 2) * R)
    rhs = T * (state.kappa_sq / state.fR_value) \
        + g * ((state.f_value - R * state.fR_value) / (2 * state.fR_value))
    return lhs - rhs


def classify_era(p, sigma) -> tuple:
    """All equation-of-state labels that hold exactly for (p, sigma):
    dust p = 0, dark matter p + sigma = 0, stiff matter p = sigma,
    radiation p = sigma/3; otherwise isentropic-other."""
    p = simplify(as_expr(p))
    sigma = simplify(as_expr(sigma))
    labels = []
    if is_zero(p):
        labels.append(EraClass.DUST)
    if is_zero(p + sigma):
        labels.append(EraClass.DARK_MATTER)
    if is_zero(p - sigma):
        labels.append(EraClass.STIFF_MATTER)
    if is_zero(p - sigma * Rational(1, 3)):
        labels.append(EraClass.RADIATION)
    if not labels:
        labels.append(EraClass.ISENTROPIC_OTHER)
    return tuple(labels)


def state_for_alphas(alpha1, alpha2, kappa_sq=1, fR=1) -> FluidState:
    """A concrete state realizing the given fluid coefficients by taking
    p = 0, sigma = alpha1 f_R / kappa^2, f = 2 alpha2 f_R."""
    alpha1 = as_expr(alpha1)
    alpha2 = as_expr(alpha2)
    kappa_sq = as_expr(kappa_sq)
    fR = as_expr(fR)
    return FluidState(p=Rational(0), sigma=alpha1 * fR / kappa_sq,
                      kappa_sq=kappa_sq, f_value=2 * alpha2 * fR,
                      fR_value=fR)
