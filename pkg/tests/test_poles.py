import math
import warnings

import numpy as np
import pytest

from susyinv.erf import ErfModel, erf_from_poles, taylor_from_ere
from susyinv.errors import DegenerateDegreeError
from susyinv.poles import (
    PUBLISHED_SUMRULE_TOL,
    ComplexPoleWarning,
    PoleSet,
    delta_from_poles,
    extract_poles,
    pole_polynomial,
    polynomial_roots,
    solve_sum_rules,
    sum_rule_residuals,
    validate_pole_set,
)

from conftest import D_WAVE_ERE, D_WAVE_POLES, S_WAVE_POLES, S_WAVE_TAYLOR


def test_single_pole_polynomial():
    c = pole_polynomial(ErfModel(0, (-0.5,)))
    assert c.size - 1 == 1
    rep = extract_poles(ErfModel(0, (-0.5,)))
    assert rep.real_poles.kappas == (0.5,)


def test_degrees():
    assert pole_polynomial(ErfModel.taylor(S_WAVE_TAYLOR)).size - 1 == 4
    assert pole_polynomial(ErfModel.taylor((-1.12660, 7.66531, 8.8645), l=2)).size - 1 == 5


def test_degenerate_degree():
    # a vanishing top coefficient lowers the degree
    with pytest.raises(DegenerateDegreeError) as exc:
        pole_polynomial(ErfModel.taylor((1.0, 0.0)))
    assert exc.value.reduced_degree == 1


def test_s_wave_taylor_roots():
    rep = extract_poles(ErfModel.taylor(S_WAVE_TAYLOR))
    np.testing.assert_allclose(rep.real_poles.kappas, sorted((-0.0401, -4.6917, 0.8365, 3.8953)), atol=1e-3)
    assert not rep.has_complex


def test_d_wave_taylor_roots():
    a, r, P = D_WAVE_ERE
    rep = extract_poles(taylor_from_ere(-a, r, P, l=2))
    np.testing.assert_allclose(rep.real_poles.kappas, sorted(D_WAVE_POLES), atol=5e-3)
    assert not rep.has_complex
    assert max(abs(v) for v in rep.sum_rule_residuals) < 1e-10


def test_d_wave_printed_sign_gives_complex_pair():
    a, r, P = D_WAVE_ERE
    with pytest.warns(ComplexPoleWarning):
        rep = extract_poles(taylor_from_ere(a, r, P, l=2))
    assert rep.complex_poles.size == 2 and rep.symmetric


def test_roots_are_polished():
    c = np.array([-6.0, 11.0, -6.0, 1.0])
    np.testing.assert_allclose(np.sort(polynomial_roots(c).real), [1, 2, 3], atol=1e-14)


def test_sum_rules_published_d_wave(d_poles):
    s1, s3 = sum_rule_residuals(d_poles)
    assert abs(s1) <= 5e-3
    assert abs(s3) <= 1e-2


def test_sum_rules_trivial():
    assert sum_rule_residuals(PoleSet(0, (1.0, 2.0))) == []
    assert sum_rule_residuals(PoleSet(1, (1.0, -1.0))) == [0.0]


def test_delta_from_poles_examples(s_poles, d_poles):
    assert delta_from_poles(PoleSet(0, (0.5,)), [0.5])[0] == pytest.approx(-math.pi / 4)
    big = [1e7]
    assert delta_from_poles(s_poles, big)[0] == pytest.approx(-math.pi, abs=1e-5)
    assert delta_from_poles(d_poles, big)[0] == pytest.approx(math.pi / 2, abs=1e-5)
    assert s_poles.high_energy_limit() == -math.pi
    assert d_poles.high_energy_limit() == math.pi / 2


def test_validation(d_poles):
    v = validate_pole_set(d_poles, tol=PUBLISHED_SUMRULE_TOL)
    assert v.valid and v.n_plus == 2 and v.n_minus == 3
    assert v.high_energy_limit == pytest.approx(math.pi / 2)
    assert not validate_pole_set(d_poles).valid  # printed digits miss the strict tolerance
    assert not validate_pole_set(PoleSet(2, (1.0,))).valid
    assert "zero pole" in validate_pole_set(PoleSet(0, (0.0, 1.0))).problems


def test_solve_sum_rules():
    ps = solve_sum_rules([0.4376, 0.7750, -8.7653], 2, guess=[-0.43, -0.88])
    assert max(abs(v) for v in sum_rule_residuals(ps)) < 1e-12
    np.testing.assert_allclose(ps.kappas, sorted(D_WAVE_POLES), atol=2e-3)


def test_pole_round_trip_s_wave():
    m = erf_from_poles(PoleSet(0, S_WAVE_POLES))
    back = extract_poles(m).real_poles.kappas
    np.testing.assert_allclose(back, sorted(S_WAVE_POLES), rtol=1e-8)
