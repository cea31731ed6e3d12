"""Soliton residual checkers, constant solvers, classification, the
Poisson consistency check, and the dichotomy branch reports.

Residuals are full component tensors; a structure is an exact soliton iff
every component passes the kernel zero test.  Expanding / steady /
shrinking classification follows the sign of the soliton constant beta2
(> 0 / = 0 / < 0).  The dichotomy evaluators never assert conclusions:
they check the stated invariance hypotheses, evaluate the governing
factors, and report which branch applies.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .fluid import FluidState, alphas
from .geometry import (
    CovectorField,
    MetricChart,
    ScalarField,
    TensorField,
    VectorField,
    box,
    covariant_derivative,
    directional_derivative,
    divergence,
    exterior_derivative,
    gradient,
    hessian,
    lie_derivative_metric,
    lower_vector,
    metric_tensor,
    outer,
    raise_covector,
    ricci,
    ricci_scalar,
)
from .symcore import (
    Expr,
    Rational,
    as_expr,
    const_value,
    is_zero,
    simplify,
)

__all__ = [
    "SolitonKind",
    "Classification",
    "SolitonSpec",
    "SolitonReport",
    "EtaConstants",
    "PoissonCheck",
    "DichotomyBranch",
    "DichotomyReport",
    "IndeterminateSignError",
    "classify_constant",
    "eta_ricci_residual",
    "gradient_eta_ricci_residual",
    "gradient_einstein_residual",
    "m_quasi_residual",
    "solve_eta_constants",
    "classify_divergence_free",
    "poisson_check",
    "dichotomy_report",
]


class IndeterminateSignError(ValueError):
    """A sign decision was requested for a quantity without a numeric
    (rational) value."""


class SolitonKind(str, enum.Enum):
    ETA_RICCI = "eta-ricci"
    GRADIENT_ETA_RICCI = "gradient-eta-ricci"
    GRADIENT_EINSTEIN = "gradient-einstein"
    M_QUASI_EINSTEIN = "m-quasi-einstein"


class Classification(str, enum.Enum):
    EXPANDING = "expanding"
    STEADY = "steady"
    SHRINKING = "shrinking"
    INDETERMINATE = "n/a"


@dataclass(frozen=True)
class SolitonSpec:
    """Bundle of soliton data as it arrives from a job file: the kind, a
    vector or scalar potential, the constants, and an optional explicit
    1-form (defaulting to the fluid covector when a fluid is present)."""

    kind: SolitonKind
    potential_vector: VectorField = None
    potential: ScalarField = None
    beta2: Expr = None
    beta1: Expr = None
    beta: Expr = None
    m: object = None
    eta: CovectorField = None

    def __post_init__(self):
        if self.kind is SolitonKind.M_QUASI_EINSTEIN:
            m = self.m
            if m != math.inf and not (isinstance(m, int) and m >= 1):
                raise ValueError("m must be a positive integer or math.inf")


@dataclass(frozen=True)
class SolitonReport:
    kind: SolitonKind
    residual: TensorField
    satisfied: bool
    classification: Classification
    solved_constants: dict = None
    era: tuple = None
    trivial: bool = None
    branch_notes: str = ""


def classify_constant(beta2) -> Classification:
    """Expanding / steady / shrinking by the sign of beta2; indeterminate
    when beta2 has no rational value."""
    v = const_value(as_expr(beta2))
    if v is None:
        return Classification.INDETERMINATE
    if v > 0:
        return Classification.EXPANDING
    if v < 0:
        return Classification.SHRINKING
    return Classification.STEADY


def _dual_or(chart, X: VectorField, eta) -> CovectorField:
    return lower_vector(chart, X) if eta is None else eta


def eta_ricci_residual(chart: MetricChart, X: VectorField, beta2, beta1,
                       eta: CovectorField = None) -> SolitonReport:
    """Residual of  Lie_X g + 2 beta2 g + 2 beta1 eta (x) eta + 2 S = 0.

    ``eta`` defaults to the g-dual of the potential field X.  With
    beta1 = 0 this is the plain Ricci-soliton equation.
    """
    beta2 = simplify(as_expr(beta2))
    beta1 = simplify(as_expr(beta1))
    eta = _dual_or(chart, X, eta)
    two = Rational(2)
    residual = (lie_derivative_metric(chart, X)
                + metric_tensor(chart) * (two * beta2)
                + outer(eta) * (two * beta1)
                + ricci(chart) * two)
    notes = "beta1 = 0: reduces to the Ricci-soliton equation" \
        if is_zero(beta1) else ""
    return SolitonReport(
        kind=SolitonKind.ETA_RICCI,
        residual=residual,
        satisfied=residual.is_zero_tensor(),
        classification=classify_constant(beta2),
        branch_notes=notes,
    )


def gradient_eta_ricci_residual(chart: MetricChart, psi, beta2, beta1,
                                eta: CovectorField) -> SolitonReport:
    """Residual of  Hess psi + S + beta2 g + beta1 eta (x) eta = 0."""
    psi = psi if isinstance(psi, ScalarField) else ScalarField(chart, psi)
    beta2 = simplify(as_expr(beta2))
    beta1 = simplify(as_expr(beta1))
    residual = (hessian(chart, psi)
                + ricci(chart)
                + metric_tensor(chart) * beta2
                + outer(eta) * beta1)
    return SolitonReport(
        kind=SolitonKind.GRADIENT_ETA_RICCI,
        residual=residual,
        satisfied=residual.is_zero_tensor(),
        classification=classify_constant(beta2),
    )


def gradient_einstein_residual(chart: MetricChart, psi, beta2) -> SolitonReport:
    """Residual of  Hess psi + S + (beta2 - R/2) g = 0; flags the trivial
    (constant-potential) case."""
    psi = psi if isinstance(psi, ScalarField) else ScalarField(chart, psi)
    beta2 = simplify(as_expr(beta2))
    scal = ricci_scalar(chart).expr
    residual = (hessian(chart, psi)
                + ricci(chart)
                + metric_tensor(chart) * (beta2 - Rational(1, 2) * scal))
    trivial = psi.is_constant()
    return SolitonReport(
        kind=SolitonKind.GRADIENT_EINSTEIN,
        residual=residual,
        satisfied=residual.is_zero_tensor(),
        classification=classify_constant(beta2),
        trivial=trivial,
        branch_notes="trivial: constant potential" if trivial else "",
    )


def m_quasi_residual(chart: MetricChart, psi, m, beta) -> SolitonReport:
    """Residual of  S + Hess psi - (1/m) dpsi (x) dpsi - beta g = 0.

    ``m`` is a positive integer or ``math.inf``; at infinity the (1/m)
    term is dropped and the equation is the gradient Ricci-soliton form.
    """
    if m != math.inf and not (isinstance(m, int) and m >= 1):
        raise ValueError("m must be a positive integer or math.inf")
    psi = psi if isinstance(psi, ScalarField) else ScalarField(chart, psi)
    beta = simplify(as_expr(beta))
    residual = (ricci(chart)
                + hessian(chart, psi)
                - metric_tensor(chart) * beta)
    if m != math.inf:
        dpsi = CovectorField(chart, covariant_derivative(psi).comps)
        residual = residual - outer(dpsi) * Rational(1, m)
    # the soliton constant playing the expanding/steady/shrinking role is
    # beta2 = -beta (matching the gradient form at m = infinity)
    return SolitonReport(
        kind=SolitonKind.M_QUASI_EINSTEIN,
        residual=residual,
        satisfied=residual.is_zero_tensor(),
        classification=classify_constant(-beta),
    )


@dataclass(frozen=True)
class EtaConstants:
    """Solved soliton constants, plus the reduced divergence-free form of
    beta2 (= -alpha2) when the divergence vanishes."""

    beta2: Expr
    beta1: Expr
    divergence_free: bool
    beta2_divergence_free_form: Expr = None


def solve_eta_constants(state: FluidState, div_rho) -> EtaConstants:
    """Solve the trace system of the soliton equation on a fluid
    background:

        beta2 = -div(rho)/3 - (2 kappa^2 p + f)/(2 f_R)
        beta1 = -div(rho)/3 - kappa^2 (p + sigma)/f_R
    """
    div_rho = simplify(as_expr(div_rho if not isinstance(div_rho, ScalarField)
                               else div_rho.expr))
    a1, a2 = alphas(state)
    third = Rational(1, 3)
    beta2 = simplify(-third * div_rho - a2)
    beta1 = simplify(-third * div_rho - a1)
    div_free = is_zero(div_rho)
    return EtaConstants(
        beta2=beta2,
        beta1=beta1,
        divergence_free=div_free,
        beta2_divergence_free_form=simplify(-a2) if div_free else None,
    )


def classify_divergence_free(state: FluidState) -> Classification:
    """Classification of the soliton with a divergence-free potential,
    where beta2 = -(2 kappa^2 p + f)/(2 f_R).

    Steady iff 2 kappa^2 p + f = 0; otherwise the sign decision needs
    rational values for 2 kappa^2 p + f and f_R (> 0).
    """
    t = simplify(2 * state.kappa_sq * state.p + state.f_value)
    if is_zero(t):
        return Classification.STEADY
    tv = const_value(t)
    if tv is None:
        raise IndeterminateSignError(
            "indeterminate sign: 2 kappa^2 p + f has no rational value")
    fv = const_value(state.fR_value)
    if fv is None:
        raise IndeterminateSignError("f_R sign unknown")
    if fv <= 0:
        raise IndeterminateSignError(
            "sign reasoning requires f_R > 0 at the constant scalar")
    return Classification.EXPANDING if tv < 0 else Classification.SHRINKING


@dataclass(frozen=True)
class PoissonCheck:
    lhs: Expr
    rhs: Expr
    match: bool


def poisson_check(chart: MetricChart, psi, state: FluidState,
                  beta1) -> PoissonCheck:
    """Check the Poisson equation for a gradient potential:
    box(psi) = -3 (beta1 + kappa^2 (p + sigma)/f_R)."""
    a1, _ = alphas(state)
    beta1 = simplify(as_expr(beta1))
    lhs = box(chart, psi).expr
    rhs = simplify(-3 * (beta1 + a1))
    return PoissonCheck(lhs=lhs, rhs=rhs, match=is_zero(lhs - rhs))


class DichotomyBranch(str, enum.Enum):
    STATE_EQUATION = "state-equation"
    VANISHING_DIVERGENCE = "vanishing-divergence"
    BOTH = "both-factors-zero"
    EQUATION_VIOLATED = "equation-violated"
    HYPOTHESES_VIOLATED = "hypotheses-violated"


@dataclass(frozen=True)
class DichotomyReport:
    kind: SolitonKind
    hypotheses_ok: bool
    rho_alpha2: Expr
    rho_psi: Expr
    alpha_factor: Expr
    div_rho: Expr
    branch: DichotomyBranch
    vorticity_free: bool = None
    notes: str = ""


def dichotomy_report(chart: MetricChart, state: FluidState, B: CovectorField,
                     kind: SolitonKind, psi, beta1=None) -> DichotomyReport:
    """Evaluate the dichotomy governing a gradient soliton on a fluid
    background.

    Hypotheses: alpha2 and the potential are invariant along the velocity
    (rho(alpha2) = 0, rho(psi) = 0).  Governing factor equation:
    (alpha1 + beta1) div rho = 0 for the gradient eta-type, alpha1 div rho
    = 0 for the gradient Einstein and m-quasi types.  The report states
    which factor vanishes; the vanishing-divergence branch also checks the
    vorticity 2-form d(eta) of the velocity covector.
    """
    if kind is SolitonKind.ETA_RICCI:
        raise ValueError("dichotomy reports apply to the gradient kinds")
    psi = psi if isinstance(psi, ScalarField) else ScalarField(chart, psi)
    a1, a2 = alphas(state)
    rho = raise_covector(chart, B)
    rho_alpha2 = directional_derivative(chart, rho, a2)
    rho_psi = directional_derivative(chart, rho, psi.expr)
    hypotheses_ok = is_zero(rho_alpha2) and is_zero(rho_psi)

    if kind is SolitonKind.GRADIENT_ETA_RICCI:
        if beta1 is None:
            raise ValueError("the gradient eta-type dichotomy needs beta1")
        factor = simplify(a1 + as_expr(beta1))
        state_note = ("state equation: p + sigma = alpha1 f_R / kappa^2 "
                      "is constant")
    else:
        factor = a1
        state_note = "dark matter era: p + sigma = 0"

    div_rho = divergence(chart, rho).expr
    alpha_zero = is_zero(factor)
    div_zero = is_zero(div_rho)
    vorticity_free = None
    if not hypotheses_ok:
        branch = DichotomyBranch.HYPOTHESES_VIOLATED
        notes = "invariance hypotheses fail; factors reported as data"
    elif alpha_zero and div_zero:
        branch = DichotomyBranch.BOTH
        notes = state_note + "; divergence also vanishes"
    elif alpha_zero:
        branch = DichotomyBranch.STATE_EQUATION
        notes = state_note
    elif div_zero:
        branch = DichotomyBranch.VANISHING_DIVERGENCE
        vorticity_free = exterior_derivative(chart, B).is_zero_tensor()
        notes = "conservative velocity field; vorticity 2-form " + \
            ("vanishes" if vorticity_free else "does not vanish")
    else:
        branch = DichotomyBranch.EQUATION_VIOLATED
        notes = "neither factor vanishes: the data do not satisfy the derived identity"
    return DichotomyReport(
        kind=kind,
        hypotheses_ok=hypotheses_ok,
        rho_alpha2=rho_alpha2,
        rho_psi=rho_psi,
        alpha_factor=factor,
        div_rho=div_rho,
        branch=branch,
        vorticity_free=vorticity_free,
        notes=notes,
    )
