import math

import numpy as np
import pytest

from susyinv import susy
from susyinv.errors import DegeneratePoleError, UnsupportedPoleError, UnsupportedSingularityError, WronskianNodeError
from susyinv.poles import PoleSet
from susyinv.susy import (
    FactorizationSolution,
    WronskianBundle,
    build_potential,
    check_nodeless,
    classify_poles,
    compact_shifts,
    d2_ln_w_finite_difference,
    s_wave_compact_potential,
    singularity_strength,
    tail_decay_fit,
    u_eval,
    wronskian_bundle,
)


def test_counting(s_poles, d_poles):
    for poles, left, right, nu in [(s_poles, 4, 2, 2), (d_poles, 2, 3, 1), (PoleSet(0, (0.5,)), 1, 0, 1)]:
        sols = classify_poles(poles)
        assert sum(s.regularity == "left" for s in sols) == left
        assert sum(s.regularity == "right" for s in sols) == right
        assert singularity_strength(sols, poles.l) == nu


def test_left_solution_s_wave():
    u = u_eval(FactorizationSolution(1.0, 0), np.array([1.0]), 2)
    assert u[0][0] == pytest.approx(math.sinh(1.0), rel=1e-14)
    assert u[2][0] == pytest.approx(u[0][0], rel=1e-14)


def test_right_solution_d_wave_closed_form():
    # decaying solution; the decay constant is |kappa|
    kappa, r = -0.4294, 2.0
    x = abs(kappa) * r
    u = u_eval(FactorizationSolution(kappa, 2), np.array([r]), 0)[0][0]
    assert u == pytest.approx((1 + 3 / x + 3 / x**2) * math.exp(-x), rel=1e-13)


def test_left_solution_d_wave_is_regular():
    r = np.array([1e-3, 2e-3])
    u = u_eval(FactorizationSolution(0.7, 2), r, 0)[0]
    # u ~ c r^3 (1 + O(r^2))
    assert u[1] / u[0] == pytest.approx(8.0, rel=1e-5)


@pytest.mark.parametrize("l", [0, 1, 2, 3])
def test_solutions_satisfy_ode(l):
    r = np.linspace(0.3, 8.0, 30)
    for kappa in (0.6, -1.3):
        u, _, u2 = u_eval(FactorizationSolution(kappa, l), r, 2)
        np.testing.assert_allclose(u2, (l * (l + 1) / r**2 + kappa**2) * u, rtol=1e-11)


def test_single_left_wronskian():
    r = np.linspace(0.1, 10, 50)
    b = wronskian_bundle([FactorizationSolution(1.0)], r, scale=False)
    np.testing.assert_allclose(b.ln_w, np.log(np.sinh(r)), rtol=1e-12)
    np.testing.assert_allclose(b.d2, -1 / np.sinh(r) ** 2, rtol=1e-10, atol=1e-15)


def test_single_right_wronskian():
    r = np.linspace(0.1, 10, 50)
    b = wronskian_bundle([FactorizationSolution(-0.8)], r, scale=False)
    np.testing.assert_allclose(b.ln_w, -0.8 * r, rtol=1e-12)
    np.testing.assert_allclose(b.d2, 0.0, atol=1e-14)


@pytest.mark.parametrize("poles_fixture", ["s_poles", "d_poles"])
def test_analytic_vs_finite_difference(poles_fixture, request):
    poles = request.getfixturevalue(poles_fixture)
    sols = classify_poles(poles)
    r = np.linspace(0.05, 20, 60)
    analytic = susy.wronskian_bundle_extended(sols, r).d2
    fd = d2_ln_w_finite_difference(sols, r, extended=True)
    np.testing.assert_allclose(fd, analytic, rtol=1e-7)


def test_finite_difference_double_precision(s_poles):
    # in double precision the check is meaningful relative to the scale of the curve
    sols = classify_poles(s_poles)
    r = np.linspace(0.05, 20, 60)
    analytic = wronskian_bundle(sols, r).d2
    fd = d2_ln_w_finite_difference(sols, r)
    assert np.max(np.abs(fd - analytic)) <= 1e-6 * np.max(np.abs(analytic))
    at_one = wronskian_bundle(sols, np.array([1.0])).d2[0]
    assert d2_ln_w_finite_difference(sols, [1.0])[0] == pytest.approx(at_one, rel=1e-7)


@pytest.mark.parametrize("kappa", [0.3, 1.0, 3.0])
def test_one_pole_potential(kappa):
    r = np.linspace(0.05, 15, 300)
    v = build_potential(PoleSet(0, (kappa,)))(r)
    exact = 2 * kappa**2 / np.sinh(kappa * r) ** 2
    assert np.all(np.abs(v - exact) <= 1e-12 * np.maximum(1.0, np.abs(exact)))


def test_free_chain():
    pot = build_potential(PoleSet(2, ()))
    assert pot.nu == 2
    assert pot(2.0) == pytest.approx(1.5)


def test_s_wave_core(s_potential):
    assert s_potential.core_coefficient() == pytest.approx(6.0, rel=1e-2)
    assert s_potential(1e-5) * 1e-10 == pytest.approx(6.0, rel=1e-2)


def test_d_wave_core(d_potential):
    assert d_potential.core_coefficient() - 6.0 == pytest.approx(-4.0, rel=1e-2)


def test_compact_forms_agree(s_poles, s_potential):
    r = np.linspace(0.1, 20, 80)
    six = s_wave_compact_potential(s_poles, "wronskian-6", extended=True)(r)
    four = s_wave_compact_potential(s_poles, "cosh-4", extended=True)(r)
    generic = s_potential(r, extended=True)
    np.testing.assert_allclose(four, six, rtol=1e-8)
    np.testing.assert_allclose(generic, six, rtol=1e-8)


def test_compact_forms_double_precision(s_poles, s_potential):
    r = np.linspace(0.1, 5, 50)
    four = s_wave_compact_potential(s_poles, "cosh-4")(r)
    np.testing.assert_allclose(four, s_potential(r), rtol=1e-8)


def test_compact_shift_kinds(s_poles):
    kinds = [kind for _, _, kind in compact_shifts(s_poles)]
    assert len(kinds) == 4


def test_decay(s_potential, d_potential):
    for pot in (s_potential, d_potential):
        v = np.abs(pot.central(np.array([5.0, 10.0, 20.0])))
        assert v[0] > v[1] > v[2]
    mu, _ = tail_decay_fit(s_potential, (8.0, 15.0))
    assert mu > 0


def test_tail_fit_exact_exponential():
    mu, c = tail_decay_fit(lambda r: np.exp(-2 * r), (5.0, 10.0))
    assert mu == pytest.approx(2.0, abs=1e-6)


def test_tail_fit_one_pole():
    mu, _ = tail_decay_fit(build_potential(PoleSet(0, (1.0,))), (5.0, 10.0))
    assert mu == pytest.approx(2.0, abs=1e-3)


def test_errors():
    with pytest.raises(UnsupportedSingularityError):
        build_potential(PoleSet(0, (-0.5,)))
    with pytest.raises(DegeneratePoleError):
        build_potential(PoleSet(0, (0.5, 0.5)))
    with pytest.raises(UnsupportedPoleError):
        FactorizationSolution(complex(1, 1))
    with pytest.raises(UnsupportedPoleError):
        FactorizationSolution(0.0)


def test_node_detection(monkeypatch):
    def fake(solutions, r, **kw):
        sign = np.where(r < 2.0, 1.0, -1.0)
        return WronskianBundle(r, np.zeros_like(r), np.zeros_like(r), np.zeros_like(r), sign)

    monkeypatch.setattr(susy, "wronskian_bundle", fake)
    with pytest.raises(WronskianNodeError) as exc:
        check_nodeless([FactorizationSolution(1.0)], 10.0)
    assert exc.value.radius == pytest.approx(2.0, abs=0.05)
