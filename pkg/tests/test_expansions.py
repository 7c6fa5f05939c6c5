import math
import random
import warnings

import numpy as np
import pytest

from draws import draw_default_region
from heunseries import (
    Branch,
    IntegrationSpec,
    Point,
    TruncationWarning,
    closed_form_case1,
    eval_series,
    expand_case3_2f1,
    expand_case3_appell,
    expand_case3_beta,
    find_closed_form_params,
    frobenius_series,
    heun_coefficients,
    integrate_heun_many,
    term_singular_exponent,
    validate_params,
)
from heunseries.errors import (
    CaseConditionViolation,
    InvalidParameters,
    NotAdmissible,
    OutsideConvergenceDomain,
)
from heunseries.expansions import (
    EXPANDERS,
    Kind,
    building_block,
    case3_coefficients,
    solve_closed_form_gamma,
)
from heunseries.hypergeo import Gauss2F1Spec, antiderivative_term, gauss_2f1, incomplete_beta
from heunseries.identities import Case, IdentityCase, map_case
from heunseries.oracle import adaptive_quadrature

# q = a*alpha*beta with gamma, delta = 0.5; epsilon = 3 from the Fuchsian condition
EXAMPLE = validate_params(2.0, 4.0, 1.0, 2.0, 0.5, 0.5)


def _fit(values, reference):
    values, reference = np.asarray(values), np.asarray(reference)
    c = reference @ values / (reference @ reference)
    return c, float(np.max(np.abs(values - c * reference) / np.abs(c * reference)))


class TestCoefficients:
    def test_worked_example(self):
        c = case3_coefficients(EXAMPLE, 1.0, 3)
        assert c[0] == 1.0
        assert c[1] == pytest.approx(6.0, rel=1e-15)

    def test_a1(self):
        p = draw_default_region(random.Random(1))
        q1 = p.a * p.ab + (p.epsilon + 1.0) * (1.0 - p.gamma)
        assert case3_coefficients(p, 1.0, 2)[1] == pytest.approx(q1 / (p.a * (1.0 - p.gamma)), rel=1e-15)

    def test_minus_epsilon_collapse(self):
        rng = random.Random(2)
        for _ in range(10):
            p = draw_default_region(rng)
            mirror = validate_params(p.a, p.a * p.ab, -p.alpha, -p.beta, 1.0 - p.gamma, 1.0 - p.delta)
            want = frobenius_series(mirror, Point.ZERO, Branch.FIRST, 51).coeffs
            got = case3_coefficients(p, -p.epsilon, 51)
            scale = 0.0
            for g, w in zip(got, want):
                scale = max(scale, abs(w))
                assert abs(g - w) <= 1e-12 * scale

    def test_matches_frobenius_of_s1_image(self):
        p = EXAMPLE
        ab1 = p.ab + (p.epsilon + 1.0) * (2.0 - p.gamma - p.delta)
        q1 = p.a * p.ab + (p.epsilon + 1.0) * (1.0 - p.gamma)
        # H(a, q1; ...) with gamma1 = 1 - gamma, delta1 = 1 - delta, epsilon1 = epsilon + 2
        roots = np.roots([1.0, -(p.epsilon + 2.0 + 1.0 - p.gamma + 1.0 - p.delta - 1.0), ab1])
        image = validate_params(p.a, q1, roots[0].real, roots[1].real, 1.0 - p.gamma, 1.0 - p.delta)
        want = frobenius_series(image, Point.ZERO, Branch.FIRST, 30).coeffs
        assert case3_coefficients(p, 1.0, 30) == pytest.approx(want, rel=1e-12)

    def test_condition(self):
        with pytest.raises(CaseConditionViolation):
            case3_coefficients(EXAMPLE.replace(q=1.0), 1.0, 5)

    def test_bad_s(self):
        with pytest.raises(InvalidParameters):
            case3_coefficients(EXAMPLE, 0.5, 5)


class TestAppell:
    def test_single_term_collapse(self):
        p = validate_params(2.0, 0.0, 0.0, 0.4, 0.3, 0.6)
        e = expand_case3_appell(p, 20)
        assert e.coeffs == (1.0,) + (0.0,) * 19
        assert e(0.4) == pytest.approx(antiderivative_term(0, p, 0.4), rel=1e-15)

    def test_leading_behaviour(self):
        e = expand_case3_appell(EXAMPLE, 50)
        z = 1e-8
        assert e(z) / z**0.5 == pytest.approx(1.0 / 0.5, rel=1e-6)
        assert e.leading_coefficient == 2.0

    def test_second_branch_proportional(self):
        e = expand_case3_appell(EXAMPLE, 200)
        zs = [0.1, 0.2, 0.3]
        s = frobenius_series(EXAMPLE, Point.ZERO, Branch.SECOND)
        c, dev = _fit([e(z) for z in zs], [eval_series(s, z) for z in zs])
        assert dev <= 1e-8
        assert c == pytest.approx(e.leading_coefficient, rel=1e-8)


class TestBeta:
    def test_delta_one(self):
        p = validate_params(2.0, 2.0 * 0.8 * 1.2, 0.8, 1.2, 0.4, 1.0)
        assert math.isfinite(expand_case3_beta(p, 100)(0.5))

    def test_first_bracket(self):
        p = EXAMPLE
        e = expand_case3_beta(p, 4)
        z = 0.3
        want = p.a * incomplete_beta(1 - p.gamma, 1 - p.delta, z) - incomplete_beta(2 - p.gamma, 1 - p.delta, z)
        assert e.terms(z)[0] == pytest.approx(want, rel=1e-15)

    def test_matches_two_f1(self):
        b, t = expand_case3_beta(EXAMPLE, 200), expand_case3_2f1(EXAMPLE, 200)
        for z in (0.1, 0.4, 0.7):
            assert b(z) == pytest.approx(t(z), rel=1e-10)


class TestTwoF1:
    def test_leading_limit(self):
        e = expand_case3_2f1(EXAMPLE, 40)
        z = 1e-9
        assert e(z) * z ** (EXAMPLE.gamma - 1.0) == pytest.approx(4.0, rel=1e-6)

    def test_delta_zero(self):
        p = validate_params(2.5, 2.5 * 0.9 * 0.7, 0.9, 0.7, 0.4, 0.0)
        e = expand_case3_2f1(p, 200)
        c = case3_coefficients(p, 1.0, 200)
        z = 0.45
        weights = [p.a * c[0]] + [p.a * c[n] - c[n - 1] for n in range(1, 200)]
        want = z ** (1 - p.gamma) * math.fsum(w * z**n / (1 - p.gamma + n) for n, w in enumerate(weights))
        assert e(z) == pytest.approx(want, rel=1e-13)

    def test_heun_residual(self):
        e = expand_case3_2f1(EXAMPLE, 200)
        h = 1e-4
        for z in np.linspace(0.1, 0.5, 5):
            u, up, um = e(z), e(z + h), e(z - h)
            du, d2u = (up - um) / (2 * h), (up - 2 * u + um) / h**2
            f, g = heun_coefficients(EXAMPLE, z)
            scale = max(abs(d2u), abs(f * du), abs(g * u))
            assert abs(d2u + f * du + g * u) <= 1e-6 * scale

    def test_literal_regrouping_differs(self):
        # (a-1) a_n weights in place of (a a_n - a_{n-1}) do not give a solution
        p = EXAMPLE
        c = case3_coefficients(p, 1.0, 200)
        z = 0.3
        literal = p.a / (1 - p.gamma) * gauss_2f1(Gauss2F1Spec.from_abc(1 - p.gamma, p.delta, 2 - p.gamma), z)
        literal += (p.a - 1) * math.fsum(
            c[n] * z**n / (1 - p.gamma + n)
            * gauss_2f1(Gauss2F1Spec.from_abc(1 - p.gamma + n, p.delta, 2 - p.gamma + n), z)
            for n in range(1, 200)
        )
        literal *= z ** (1 - p.gamma)
        assert abs(literal / expand_case3_2f1(p, 200)(z) - 1.0) > 1e-2

    def test_oracle(self):
        e = expand_case3_2f1(EXAMPLE, 200)
        zs = list(np.linspace(0.1, 0.8, 8))
        oracle = [u for u, _ in integrate_heun_many(IntegrationSpec(EXAMPLE, Point.ZERO, Branch.SECOND), zs)]
        c, dev = _fit([e(z) for z in zs], oracle)
        assert dev <= 1e-10
        assert c == pytest.approx(e.leading_coefficient, rel=1e-10)


class TestDomain:
    @pytest.mark.parametrize("kind", [Kind.APPELL, Kind.BETA, Kind.TWO_F1])
    def test_gamma_limit(self, kind):
        p = validate_params(2.0, 2.0 * 1.3, 1.0, 1.3, 1.2, 0.5)
        with pytest.raises(InvalidParameters):
            EXPANDERS[kind](p, 10)

    def test_a_inside_unit_interval(self):
        p = validate_params(0.5, 0.5 * 1.3, 1.0, 1.3, 0.2, 0.5)
        with pytest.raises(InvalidParameters):
            expand_case3_2f1(p, 10)

    def test_outside(self):
        e = expand_case3_beta(EXAMPLE, 10)
        with pytest.raises(OutsideConvergenceDomain):
            e(1.0)
        with pytest.raises(OutsideConvergenceDomain):
            e(0.0)

    def test_truncation_warning(self):
        e = expand_case3_2f1(EXAMPLE, 5)
        with pytest.warns(TruncationWarning):
            e(0.8)

    def test_converged_sum_is_silent(self):
        e = expand_case3_appell(EXAMPLE, 200)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            e(0.3)


@pytest.fixture(scope="module")
def sets():
    return find_closed_form_params(3, seed=4)


class TestClosedForm:
    def test_not_admissible(self):
        with pytest.raises(NotAdmissible, match="not admissible"):
            closed_form_case1(EXAMPLE, 0.3)

    def test_small_z(self, sets):
        p = sets[0]
        assert closed_form_case1(p, 1e-6) == pytest.approx(1.0, abs=1e-10)
        h = 1e-6
        slope = (closed_form_case1(p, 2 * h) - closed_form_case1(p, h)) / h
        assert abs(slope) <= 1e-4

    def test_oracle(self, sets):
        zs = [0.1, 0.25, 0.4, 0.6]
        for p in sets:
            oracle = integrate_heun_many(IntegrationSpec(p, Point.ZERO, Branch.FIRST), zs)
            for z, (u, _) in zip(zs, oracle):
                assert closed_form_case1(p, z) == pytest.approx(u, rel=1e-6)

    def test_quadrature_of_integrand(self, sets):
        p = sets[0]
        m = map_case(p, IdentityCase.first(Case.Q_ZERO))
        spec = Gauss2F1Spec(m.sum_ab, m.prod_ab, p.gamma + 2.0)
        integral = adaptive_quadrature(lambda t: t * gauss_2f1(spec, t), 0.5, tolerance=1e-14)
        # recover the constant from two evaluations of the closed form
        c = (closed_form_case1(p, 0.5) - 1.0) / integral
        z = 0.3
        integral_z = adaptive_quadrature(lambda t: t * gauss_2f1(spec, t), z, tolerance=1e-14)
        assert closed_form_case1(p, z) == pytest.approx(1.0 + c * integral_z, rel=1e-10)

    def test_residual(self, sets):
        p = sets[1]
        h = 1e-4
        for z in (0.2, 0.4):
            u = closed_form_case1(p, z)
            up, um = closed_form_case1(p, z + h), closed_form_case1(p, z - h)
            du, d2u = (up - um) / (2 * h), (up - 2 * u + um) / h**2
            f, g = heun_coefficients(p, z)
            scale = max(abs(d2u), abs(f * du), abs(g * u))
            assert abs(d2u + f * du + g * u) <= 1e-6 * scale

    def test_solver_roots(self):
        for gamma in solve_closed_form_gamma(2.0, 0.7, 0.3):
            p = validate_params(2.0, 0.0, 0.7, gamma + 0.3 - 2.0 - 0.7, gamma, 0.3, -1.0)
            m = map_case(p, IdentityCase.first(Case.Q_ZERO))
            assert m.q == pytest.approx(p.a * m.prod_ab, abs=1e-10)


class TestSingularExponents:
    @pytest.mark.parametrize("n", [0, 2])
    def test_slope_at_zero(self, n):
        est = term_singular_exponent(EXAMPLE, n)
        assert est.at_zero == pytest.approx(0.5 + n, abs=0.01)

    def test_bounded_at_one(self):
        est = term_singular_exponent(EXAMPLE, 1)
        assert est.at_one == 0.0
        assert est.nonconstant_at_one == pytest.approx(1.0 - EXAMPLE.delta, abs=0.02)

    def test_block_value(self):
        z = 0.35
        want = z**0.5 / 0.5 * gauss_2f1(Gauss2F1Spec.from_abc(0.5, 0.5, 1.5), z)
        assert building_block(EXAMPLE, 0, z) == want

    def test_probe_validation(self):
        with pytest.raises(InvalidParameters):
            term_singular_exponent(EXAMPLE, 0, probes_one=(0.01, 0.003, 0.002, 0.001))

    def test_partial_sums_improve(self):
        (u, _), = integrate_heun_many(IntegrationSpec(EXAMPLE, Point.ZERO, Branch.SECOND), [0.9])
        errs = []
        for n in (20, 40, 80, 160):
            e = expand_case3_2f1(EXAMPLE, n)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", TruncationWarning)
                errs.append(abs(e(0.9) / (e.leading_coefficient * u) - 1.0))
        assert all(b < a for a, b in zip(errs, errs[1:]))
