"""Two-sided verification of the curvature identities behind the gradient
soliton dichotomies.

Every audit evaluates both sides of an identity on concrete data and
reports rows plus a verdict; nothing is asserted.  Contractions are
computed twice: an independent frame trace (orthonormal frame on diagonal
charts, inverse-metric contraction otherwise) and the printed contracted
equation, so a transcription problem in the latter shows up as a
(Match, Mismatch) pair that localizes the discrepancy.

Identity names understood by the CLI ``audit`` command:

* ``mquasi-commutator``           the commutator identity for m-quasi potentials
* ``mquasi-contraction-frame``    its independent frame-trace contraction
* ``mquasi-contraction-printed``  the printed contracted equation
* ``gradient-eta-contraction``    the gradient eta-type contracted identity
* ``gradient-einstein-contraction``  the gradient Einstein contracted identity
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .fluid import FluidState, alphas
from .geometry import (
    Convention,
    CovectorField,
    GeometryError,
    MetricChart,
    TensorField,
    VectorField,
    coordinate_vector,
    directional_derivative,
    divergence,
    gradient,
    inner,
    nabla_along,
    orthonormal_frame,
    raise_covector,
    ricci,
    ricci_operator,
)
from .solitons import (
    SolitonKind,
    gradient_einstein_residual,
    gradient_eta_ricci_residual,
    m_quasi_residual,
)
from .symcore import Expr, Rational, as_expr, is_zero, simplify

__all__ = [
    "AuditVerdict",
    "AuditRow",
    "IdentityAudit",
    "ContractionAudit",
    "apply_operator",
    "nabla_operator_along",
    "frame_trace",
    "audit_mquasi_commutator",
    "audit_mquasi_contraction",
    "audit_gradient_eta_contraction",
    "audit_gradient_einstein_contraction",
    "AUDIT_NAMES",
]

ZERO = Rational(0)


class AuditVerdict(str, enum.Enum):
    MATCH = "match"
    MISMATCH = "mismatch"
    HYPOTHESES_UNMET = "hypotheses-unmet"


@dataclass(frozen=True)
class AuditRow:
    label: str
    lhs: Expr
    rhs: Expr

    @property
    def difference(self) -> Expr:
        return simplify(self.lhs - self.rhs)


@dataclass(frozen=True)
class IdentityAudit:
    identity: str
    convention: Convention
    rows: tuple
    verdict: AuditVerdict
    notes: str = ""


@dataclass(frozen=True)
class ContractionAudit:
    """Paired contraction audits: the independent frame trace and the
    printed contracted equation."""

    frame: IdentityAudit
    printed: IdentityAudit


def _verdict(rows) -> AuditVerdict:
    ok = all(is_zero(r.lhs - r.rhs) for r in rows)
    return AuditVerdict.MATCH if ok else AuditVerdict.MISMATCH


def _unmet(identity, chart, notes) -> IdentityAudit:
    return IdentityAudit(identity=identity, convention=chart.convention,
                         rows=(), verdict=AuditVerdict.HYPOTHESES_UNMET,
                         notes=notes)


def apply_operator(chart: MetricChart, op: TensorField,
                   V: VectorField) -> VectorField:
    """(op V)^a = op^a_b V^b for a (1,1) tensor."""
    n = chart.dim
    return VectorField(chart, [
        sum((op[a, b] * V[b] for b in range(n)), start=ZERO)
        for a in range(n)])


def nabla_operator_along(chart: MetricChart, X: VectorField, op: TensorField,
                         V: VectorField) -> VectorField:
    """(nabla_X op)(V) = nabla_X (op V) - op (nabla_X V)."""
    a = nabla_along(chart, X, apply_operator(chart, op, V))
    b = apply_operator(chart, op, nabla_along(chart, X, V))
    return a - b


def frame_trace(chart: MetricChart, vmap) -> Expr:
    """Trace of a vector-valued map E -> vmap(E): sum_i eps_i
    g(vmap(e_i), e_i) over an orthonormal frame on diagonal charts, and
    the g^{ab}-contraction sum_a vmap(d_a)^a otherwise."""
    try:
        frame = orthonormal_frame(chart)
    except GeometryError:
        out = ZERO
        for a in range(chart.dim):
            out = out + vmap(coordinate_vector(chart, a))[a]
        return simplify(out)
    out = ZERO
    for e, sign in frame:
        out = out + Rational(sign) * inner(chart, vmap(e), e)
    return simplify(out)


def _mquasi_rhs_map(chart, psi_expr, m, beta):
    """E, F -> (nabla_F Q)E - (nabla_E Q)F + (beta/m)(F(psi) E - E(psi) F)
    + (1/m)(E(psi) QF - F(psi) QE)."""
    q = ricci_operator(chart)
    beta = as_expr(beta)
    inv_m = Rational(0) if m == math.inf else Rational(1, m)

    def rhs(E, F):
        e_psi = directional_derivative(chart, E, psi_expr)
        f_psi = directional_derivative(chart, F, psi_expr)
        out = nabla_operator_along(chart, F, q, E) \
            - nabla_operator_along(chart, E, q, F)
        out = out + (E * f_psi - F * e_psi) * (beta * inv_m)
        out = out + (apply_operator(chart, q, F) * e_psi
                     - apply_operator(chart, q, E) * f_psi) * inv_m
        return out

    return rhs


def audit_mquasi_commutator(chart: MetricChart, psi, m, beta,
                            include_zero_rows: bool = False) -> IdentityAudit:
    """Commutator identity for an exact m-quasi potential:

        R(E, F) Dpsi = (nabla_F Q)E - (nabla_E Q)F
                       + (beta/m){F(psi) E - E(psi) F}
                       + (1/m){E(psi) QF - F(psi) QE}

    evaluated for every coordinate pair (E, F).  Requires the defining
    m-quasi equation to hold (hypotheses-unmet otherwise).
    """
    identity = "mquasi-commutator"
    check = m_quasi_residual(chart, psi, m, beta)
    if not check.satisfied:
        return _unmet(identity, chart,
                      "the defining m-quasi equation has nonzero residual")
    psi_expr = psi.expr if hasattr(psi, "expr") else simplify(as_expr(psi))
    dpsi = gradient(chart, psi_expr)
    rhs_map = _mquasi_rhs_map(chart, psi_expr, m, beta)
    from .geometry import riemann_commutator_apply

    rows = []
    n = chart.dim
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            E = coordinate_vector(chart, i)
            F = coordinate_vector(chart, j)
            lhs = riemann_commutator_apply(chart, E, F, dpsi)
            rhs = rhs_map(E, F)
            for l in range(n):
                if include_zero_rows or not (is_zero(lhs[l]) and is_zero(rhs[l])):
                    rows.append(AuditRow(
                        label=f"pair ({chart.coords[i]},{chart.coords[j]}) "
                              f"component {chart.coords[l]}",
                        lhs=lhs[l], rhs=rhs[l]))
    return IdentityAudit(identity=identity, convention=chart.convention,
                         rows=tuple(rows), verdict=_verdict(rows))


def audit_mquasi_contraction(chart: MetricChart, psi, m, beta,
                             F: VectorField, state: FluidState,
                             B: CovectorField) -> ContractionAudit:
    """Contract the commutator identity over its first argument twice.

    Frame audit: independent traces of both sides (the left trace is
    S(F, Dpsi) by the frame-trace identity).  Printed audit: the printed
    contracted equation

        (alpha1 - alpha2 + 3 beta/m - 3 alpha1/m) rho(psi)
            = 3 rho(alpha2) + alpha1 div rho

    whose outcome is recorded, not asserted.
    """
    check = m_quasi_residual(chart, psi, m, beta)
    psi_expr = psi.expr if hasattr(psi, "expr") else simplify(as_expr(psi))
    if not check.satisfied:
        unmet = _unmet("mquasi-contraction-frame", chart,
                       "the defining m-quasi equation has nonzero residual")
        return ContractionAudit(frame=unmet, printed=_unmet(
            "mquasi-contraction-printed", chart, unmet.notes))
    dpsi = gradient(chart, psi_expr)
    rhs_map = _mquasi_rhs_map(chart, psi_expr, m, beta)
    from .geometry import riemann_commutator_apply

    lhs_tr = frame_trace(chart, lambda E: riemann_commutator_apply(
        chart, E, F, dpsi))
    rhs_tr = frame_trace(chart, lambda E: rhs_map(E, F))
    ric = ricci(chart)
    s_f_dpsi = ZERO
    for a in range(chart.dim):
        for b in range(chart.dim):
            s_f_dpsi = s_f_dpsi + ric[a, b] * F[a] * dpsi[b]
    frame_audit = IdentityAudit(
        identity="mquasi-contraction-frame",
        convention=chart.convention,
        rows=(AuditRow("trace over the first argument", lhs_tr, rhs_tr),),
        verdict=_verdict([AuditRow("", lhs_tr, rhs_tr)]),
        notes=f"left trace equals S(F, Dpsi) = {simplify(s_f_dpsi)}",
    )

    a1, a2 = alphas(state)
    rho = raise_covector(chart, B)
    inv_m = Rational(0) if m == math.inf else Rational(1, m)
    beta = as_expr(beta)
    lhs_printed = simplify((a1 - a2 + 3 * beta * inv_m - 3 * a1 * inv_m)
                           * directional_derivative(chart, rho, psi_expr))
    rhs_printed = simplify(3 * directional_derivative(chart, rho, a2)
                           + a1 * divergence(chart, rho).expr)
    printed_rows = (AuditRow("printed contracted equation",
                             lhs_printed, rhs_printed),)
    printed_audit = IdentityAudit(
        identity="mquasi-contraction-printed",
        convention=chart.convention,
        rows=printed_rows,
        verdict=_verdict(printed_rows),
        notes="outcome recorded as data; the frame trace is the checked side",
    )
    return ContractionAudit(frame=frame_audit, printed=printed_audit)


def audit_gradient_eta_contraction(chart: MetricChart, psi, beta2, beta1,
                                   state: FluidState,
                                   B: CovectorField) -> IdentityAudit:
    """Contracted identity for an exact gradient eta-type soliton:

        (alpha2 - alpha1) rho(psi) = [3 rho(alpha2) + alpha1 div rho]
                                      + beta1 div rho.
    """
    identity = "gradient-eta-contraction"
    check = gradient_eta_ricci_residual(chart, psi, beta2, beta1, eta=B)
    if not check.satisfied:
        return _unmet(identity, chart,
                      "the defining gradient eta-type equation has nonzero residual")
    psi_expr = psi.expr if hasattr(psi, "expr") else simplify(as_expr(psi))
    a1, a2 = alphas(state)
    rho = raise_covector(chart, B)
    beta1 = as_expr(beta1)
    lhs = simplify((a2 - a1) * directional_derivative(chart, rho, psi_expr))
    rhs = simplify(3 * directional_derivative(chart, rho, a2)
                   + a1 * divergence(chart, rho).expr
                   + beta1 * divergence(chart, rho).expr)
    rows = (AuditRow("contracted identity", lhs, rhs),)
    return IdentityAudit(identity=identity, convention=chart.convention,
                         rows=rows, verdict=_verdict(rows))


def audit_gradient_einstein_contraction(chart: MetricChart, psi, beta2,
                                        state: FluidState,
                                        B: CovectorField) -> IdentityAudit:
    """Contracted identity for an exact gradient Einstein soliton:

        (alpha2 - alpha1) rho(psi) = 3 rho(alpha2) + alpha1 div rho.
    """
    identity = "gradient-einstein-contraction"
    check = gradient_einstein_residual(chart, psi, beta2)
    if not check.satisfied:
        return _unmet(identity, chart,
                      "the defining gradient Einstein equation has nonzero residual")
    psi_expr = psi.expr if hasattr(psi, "expr") else simplify(as_expr(psi))
    a1, a2 = alphas(state)
    rho = raise_covector(chart, B)
    lhs = simplify((a2 - a1) * directional_derivative(chart, rho, psi_expr))
    rhs = simplify(3 * directional_derivative(chart, rho, a2)
                   + a1 * divergence(chart, rho).expr)
    rows = (AuditRow("contracted identity", lhs, rhs),)
    return IdentityAudit(identity=identity, convention=chart.convention,
                         rows=rows, verdict=_verdict(rows))


AUDIT_NAMES = (
    "mquasi-commutator",
    "mquasi-contraction-frame",
    "mquasi-contraction-printed",
    "gradient-eta-contraction",
    "gradient-einstein-contraction",
)
