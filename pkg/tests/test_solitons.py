"""Soliton residuals, constant solving, classification, Poisson check,
dichotomy branch reports.

Per the acceptance protocol, every exact instance asserted here is first
re-derived inside the test from the componentwise equations: the residual
is built with symbolic unknowns and the unknowns are eliminated with the
kernel's linear solver, component by component.  Only then is the
resulting instance asserted to have a vanishing residual.
"""

import math

import pytest

from grsol.charts import desitter4, minkowski
from grsol.fluid import FluidState, alphas, state_for_alphas
from grsol.geometry import (
    Convention,
    CovectorField,
    ScalarField,
    VectorField,
    box,
    coordinate_vector,
    divergence,
    lower_vector,
)
from grsol.solitons import (
    Classification,
    DichotomyBranch,
    EtaConstants,
    IndeterminateSignError,
    SolitonKind,
    SolitonSpec,
    classify_constant,
    classify_divergence_free,
    dichotomy_report,
    eta_ricci_residual,
    gradient_einstein_residual,
    gradient_eta_ricci_residual,
    m_quasi_residual,
    poisson_check,
    solve_eta_constants,
)
from grsol.symcore import (
    Coord,
    Rational,
    is_zero,
    simplify,
    solve_linear,
    substitute,
    symbol,
)

W4 = Coord("w4")


def eta_of(chart):
    return CovectorField(chart, [0, 0, 0, -1])


def solve_eta_ricci_instance(chart):
    """Re-derive the exact soliton constants for X = d4 on the bundled
    chart from the 11- and 44-component equations."""
    b2, b1 = symbol("b2"), symbol("b1")
    rep = eta_ricci_residual(chart, coordinate_vector(chart, 3), b2, b1)
    beta2 = solve_linear(rep.residual[0, 0], b2)
    beta1 = solve_linear(substitute(rep.residual[3, 3], {"b2": beta2}), b1)
    return beta2, beta1


class TestEtaRicci:
    def test_bundled_chart_reversed_constants(self):
        chart = desitter4(Convention.REVERSED)
        beta2, beta1 = solve_eta_ricci_instance(chart)
        assert (beta2, beta1) == (Rational(2), Rational(-1))
        rep = eta_ricci_residual(chart, coordinate_vector(chart, 3),
                                 beta2, beta1, eta_of(chart))
        assert rep.satisfied
        assert rep.classification is Classification.EXPANDING

    def test_bundled_chart_standard_constants(self):
        chart = desitter4(Convention.STANDARD)
        beta2, beta1 = solve_eta_ricci_instance(chart)
        assert (beta2, beta1) == (Rational(-4), Rational(-1))
        rep = eta_ricci_residual(chart, coordinate_vector(chart, 3),
                                 beta2, beta1)
        assert rep.satisfied

    def test_plain_ricci_soliton_reduction(self):
        chart = minkowski()
        rep = eta_ricci_residual(chart, VectorField(chart, [0, 0, 0, 0]),
                                 0, 0)
        assert rep.satisfied
        assert rep.classification is Classification.STEADY
        assert "Ricci-soliton" in rep.branch_notes

    def test_perturbed_constants_fail(self):
        chart = desitter4(Convention.REVERSED)
        rep = eta_ricci_residual(chart, coordinate_vector(chart, 3), 2, 0)
        assert not rep.satisfied

    def test_trace_identity_on_instance(self):
        # R = -div rho - 4 beta2 + beta1 on the exact instance
        chart = desitter4(Convention.REVERSED)
        rho = coordinate_vector(chart, 3)
        div = divergence(chart, rho).expr
        assert div == Rational(3)
        assert simplify(-div - 4 * Rational(2) + Rational(-1)) == Rational(-12)

    def test_alpha_beta_consistency_on_instance(self):
        # alpha1 - alpha2 = beta2 - beta1 (0 - (-3) = 2 - (-1) = 3)
        a1, a2 = alphas(state_for_alphas(0, -3))
        assert simplify(a1 - a2) == simplify(Rational(2) - Rational(-1))


class TestSolveEtaConstants:
    def test_bundled_chart_data(self):
        out = solve_eta_constants(state_for_alphas(0, -3), 3)
        assert out.beta2 == Rational(2)
        assert out.beta1 == Rational(-1)
        assert not out.divergence_free

    def test_divergence_free_reduced_form(self):
        state = state_for_alphas(0, -3)
        out = solve_eta_constants(state, 0)
        assert out.divergence_free
        assert out.beta2_divergence_free_form == Rational(3)  # -alpha2

    def _sym_state(self, sigma_of_p):
        p, k2, fr, f0 = (symbol(n) for n in ("p", "kappa2", "f_R", "f0"))
        return FluidState(p=p, sigma=sigma_of_p(p), kappa_sq=k2,
                          f_value=f0, fR_value=fr), p, k2, fr

    def test_dark_matter_form(self):
        state, p, k2, fr = self._sym_state(lambda p: -p)
        div = symbol("divrho")
        out = solve_eta_constants(state, div)
        assert out.beta1 == simplify(-div / 3)

    def test_stiff_matter_form(self):
        state, p, k2, fr = self._sym_state(lambda p: p)
        div = symbol("divrho")
        out = solve_eta_constants(state, div)
        assert out.beta1 == simplify(-div / 3 - 2 * k2 * p / fr)

    def test_radiation_form(self):
        state, p, k2, fr = self._sym_state(lambda p: 3 * p)
        div = symbol("divrho")
        out = solve_eta_constants(state, div)
        assert out.beta1 == simplify(-div / 3 - 4 * k2 * p / fr)


class TestClassifyDivergenceFree:
    def test_steady_at_balancing_pressure(self):
        f0, k2 = symbol("f0"), symbol("kappa2")
        state = FluidState(p=-f0 / (2 * k2), sigma=symbol("sigma"),
                           kappa_sq=k2, f_value=f0, fR_value=symbol("f_R"))
        assert classify_divergence_free(state) is Classification.STEADY

    def test_expanding(self):
        state = FluidState(p=-2, sigma=0, kappa_sq=1, f_value=2, fR_value=1)
        assert classify_divergence_free(state) is Classification.EXPANDING

    def test_shrinking(self):
        state = FluidState(p=0, sigma=0, kappa_sq=1, f_value=2, fR_value=1)
        assert classify_divergence_free(state) is Classification.SHRINKING

    def test_indeterminate_sign(self):
        state = FluidState(p=symbol("p"), sigma=0, kappa_sq=1, f_value=2,
                           fR_value=1)
        with pytest.raises(IndeterminateSignError, match="indeterminate"):
            classify_divergence_free(state)

    def test_fr_sign_unknown(self):
        state = FluidState(p=1, sigma=0, kappa_sq=1, f_value=2,
                           fR_value=symbol("f_R"))
        with pytest.raises(IndeterminateSignError, match="f_R"):
            classify_divergence_free(state)


class TestPoisson:
    def test_bundled_instance(self):
        chart = desitter4(Convention.REVERSED)
        state = state_for_alphas(0, -3)  # dark matter, alpha1 = 0
        out = poisson_check(chart, -W4, state, -1)
        assert out.lhs == Rational(3)
        assert out.rhs == Rational(3)
        assert out.match

    def test_constant_potential(self):
        chart = desitter4(Convention.REVERSED)
        state = state_for_alphas(2, -3)
        out = poisson_check(chart, 7, state, -2)  # beta1 = -alpha1
        assert out.lhs == Rational(0)
        assert out.rhs == Rational(0)
        assert out.match

    def test_mismatch_flagged(self):
        chart = desitter4(Convention.REVERSED)
        state = state_for_alphas(0, -3)
        out = poisson_check(chart, -W4, state, 0)
        assert out.lhs == Rational(3)
        assert out.rhs == Rational(0)
        assert not out.match


def derive_gradient_eta_instance(chart, beta2):
    """Solve Hess psi + S + beta2 g + beta1 eta(x)eta = 0 for the slope of
    psi = c w4 and for beta1, from the 11- and 44-components."""
    c, b1 = symbol("c"), symbol("b1")
    rep = gradient_eta_ricci_residual(chart, c * W4, beta2, b1, eta_of(chart))
    slope = solve_linear(rep.residual[0, 0], c)
    beta1 = solve_linear(substitute(rep.residual[3, 3], {"c": slope}), b1)
    return slope, beta1


class TestGradientEtaRicci:
    @pytest.mark.parametrize("beta2", [Rational(2), Rational(0),
                                       Rational(7, 3), symbol("beta2")])
    def test_reversed_instances(self, beta2):
        chart = desitter4(Convention.REVERSED)
        slope, beta1 = derive_gradient_eta_instance(chart, beta2)
        assert slope == simplify(beta2 - 3)
        assert beta1 == simplify(beta2 - 3)
        rep = gradient_eta_ricci_residual(chart, slope * W4, beta2, beta1,
                                          eta_of(chart))
        assert rep.satisfied

    def test_standard_instances(self):
        chart = desitter4(Convention.STANDARD)
        beta2 = symbol("beta2")
        slope, beta1 = derive_gradient_eta_instance(chart, beta2)
        assert slope == simplify(beta2 + 3)
        assert beta1 == simplify(beta2 + 3)
        rep = gradient_eta_ricci_residual(chart, slope * W4, beta2, beta1,
                                          eta_of(chart))
        assert rep.satisfied

    def test_gradient_form_of_bundled_soliton(self):
        # beta2 = 2 gives psi = -w4 and beta1 = -1
        chart = desitter4(Convention.REVERSED)
        slope, beta1 = derive_gradient_eta_instance(chart, Rational(2))
        assert slope == Rational(-1)
        assert beta1 == Rational(-1)

    def test_minkowski_trivial(self):
        chart = minkowski()
        rep = gradient_eta_ricci_residual(chart, 0, 0, 0, eta_of(chart))
        assert rep.satisfied

    def test_constant_shift_invariance(self):
        chart = desitter4(Convention.REVERSED)
        a = gradient_eta_ricci_residual(chart, -W4, 2, -1, eta_of(chart))
        b = gradient_eta_ricci_residual(chart, 9 - W4, 2, -1, eta_of(chart))
        assert a.residual == b.residual


class TestGradientEinstein:
    def _derive(self, chart):
        c, b2 = symbol("c"), symbol("b2")
        rep = gradient_einstein_residual(chart, c * W4, b2)
        # 44-component is independent of the slope: solve for beta2 first
        beta2 = solve_linear(rep.residual[3, 3], b2)
        slope = solve_linear(substitute(rep.residual[0, 0], {"b2": beta2}), c)
        return slope, beta2

    def test_reversed_forces_trivial(self):
        chart = desitter4(Convention.REVERSED)
        slope, beta2 = self._derive(chart)
        assert slope == Rational(0)
        assert beta2 == Rational(-3)
        rep = gradient_einstein_residual(chart, 5, beta2)
        assert rep.satisfied
        assert rep.trivial

    def test_standard_forces_trivial(self):
        chart = desitter4(Convention.STANDARD)
        slope, beta2 = self._derive(chart)
        assert slope == Rational(0)
        assert beta2 == Rational(3)
        rep = gradient_einstein_residual(chart, 0, beta2)
        assert rep.satisfied
        assert rep.trivial

    def test_minkowski(self):
        rep = gradient_einstein_residual(minkowski(), 1, 0)
        assert rep.satisfied
        assert rep.trivial

    def test_nonconstant_potential_not_trivial(self):
        rep = gradient_einstein_residual(desitter4(), W4, 0)
        assert not rep.trivial
        assert not rep.satisfied


def derive_m_quasi_instance(chart, m):
    """Eliminate beta from the 11-component (linear), then locate the
    nontrivial slope root of the 44-component."""
    c, b = symbol("c"), symbol("b")
    rep = m_quasi_residual(chart, c * W4, m, b)
    beta_from_11 = solve_linear(rep.residual[0, 0], b)
    eq44 = substitute(rep.residual[3, 3], {"b": beta_from_11})
    # eq44 = +-(c^2/m + c); divide out the trivial root c = 0
    reduced = simplify(eq44 / c)
    slope = solve_linear(reduced, c)
    beta = substitute(beta_from_11, {"c": slope})
    return slope, beta


class TestMQuasi:
    @pytest.mark.parametrize("m", [1, 2, 5])
    def test_standard_instances(self, m):
        chart = desitter4(Convention.STANDARD)
        slope, beta = derive_m_quasi_instance(chart, m)
        assert slope == Rational(-m)
        assert beta == Rational(m + 3)
        rep = m_quasi_residual(chart, slope * W4, m, beta)
        assert rep.satisfied

    @pytest.mark.parametrize("m", [1, 2, 5])
    def test_reversed_instances(self, m):
        chart = desitter4(Convention.REVERSED)
        slope, beta = derive_m_quasi_instance(chart, m)
        assert slope == Rational(-m)
        assert beta == Rational(m - 3)
        rep = m_quasi_residual(chart, slope * W4, m, beta)
        assert rep.satisfied

    def test_minkowski_any_m(self):
        for m in (1, 7, math.inf):
            rep = m_quasi_residual(minkowski(), 3, m, 0)
            assert rep.satisfied

    def test_infinite_m_matches_gradient_eta_with_zero_beta1(self):
        chart = desitter4(Convention.STANDARD)
        beta = symbol("beta")
        psi = W4 ** 2 - 5 * W4
        a = m_quasi_residual(chart, psi, math.inf, beta)
        b = gradient_eta_ricci_residual(chart, psi, -beta, 0, eta_of(chart))
        assert a.residual == b.residual

    def test_m_validation(self):
        with pytest.raises(ValueError):
            m_quasi_residual(minkowski(), 0, 0, 0)
        with pytest.raises(ValueError):
            SolitonSpec(kind=SolitonKind.M_QUASI_EINSTEIN, m=-2)


class TestClassifyConstant:
    def test_signs(self):
        assert classify_constant(2) is Classification.EXPANDING
        assert classify_constant(0) is Classification.STEADY
        assert classify_constant(Rational(-1, 2)) is Classification.SHRINKING
        assert classify_constant(symbol("b")) is Classification.INDETERMINATE


class TestDichotomy:
    def B(self, chart):
        return eta_of(chart)

    def test_eta_dark_matter_branch(self):
        chart = desitter4(Convention.REVERSED)
        rep = dichotomy_report(chart, state_for_alphas(0, -3), self.B(chart),
                               SolitonKind.GRADIENT_ETA_RICCI, psi=5, beta1=0)
        assert rep.hypotheses_ok
        assert rep.branch is DichotomyBranch.STATE_EQUATION
        assert rep.div_rho == Rational(3)

    def test_eta_constant_state_equation_branch(self):
        chart = desitter4(Convention.REVERSED)
        rep = dichotomy_report(chart, state_for_alphas(2, -3), self.B(chart),
                               SolitonKind.GRADIENT_ETA_RICCI, psi=5, beta1=-2)
        assert rep.branch is DichotomyBranch.STATE_EQUATION
        assert is_zero(rep.alpha_factor)
        assert "state equation" in rep.notes

    def test_eta_vanishing_divergence_branch(self):
        chart = minkowski()
        rep = dichotomy_report(chart, state_for_alphas(1, 0), self.B(chart),
                               SolitonKind.GRADIENT_ETA_RICCI, psi=5, beta1=0)
        assert rep.branch is DichotomyBranch.VANISHING_DIVERGENCE
        assert rep.vorticity_free is True

    @pytest.mark.parametrize("kind", [SolitonKind.GRADIENT_EINSTEIN,
                                      SolitonKind.M_QUASI_EINSTEIN])
    def test_einstein_and_mquasi_fixtures(self, kind):
        ds = desitter4(Convention.REVERSED)
        mk = minkowski()
        # dark matter: alpha factor zero, divergence nonzero
        rep = dichotomy_report(ds, state_for_alphas(0, -3), self.B(ds),
                               kind, psi=1)
        assert rep.branch is DichotomyBranch.STATE_EQUATION
        assert "dark matter" in rep.notes
        # conservative velocity: divergence zero, alpha factor nonzero
        rep = dichotomy_report(mk, state_for_alphas(1, 0), self.B(mk),
                               kind, psi=1)
        assert rep.branch is DichotomyBranch.VANISHING_DIVERGENCE
        assert rep.vorticity_free is True
        # both factors zero
        rep = dichotomy_report(mk, state_for_alphas(0, 0), self.B(mk),
                               kind, psi=1)
        assert rep.branch is DichotomyBranch.BOTH

    def test_equation_violated(self):
        chart = desitter4(Convention.REVERSED)
        rep = dichotomy_report(chart, state_for_alphas(2, -3), self.B(chart),
                               SolitonKind.GRADIENT_EINSTEIN, psi=1)
        assert rep.branch is DichotomyBranch.EQUATION_VIOLATED

    def test_hypotheses_violated(self):
        chart = desitter4(Convention.REVERSED)
        rep = dichotomy_report(chart, state_for_alphas(0, -3), self.B(chart),
                               SolitonKind.GRADIENT_EINSTEIN, psi=W4)
        assert not rep.hypotheses_ok
        assert rep.branch is DichotomyBranch.HYPOTHESES_VIOLATED

    def test_eta_kind_rejected(self):
        chart = minkowski()
        with pytest.raises(ValueError):
            dichotomy_report(chart, state_for_alphas(0, 0), self.B(chart),
                             SolitonKind.ETA_RICCI, psi=1)
