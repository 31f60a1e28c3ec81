import math

import numpy as np
import pytest

from susyinv.erf import (
    ErfModel,
    K_from_delta,
    PhaseShiftDataset,
    delta_from_model,
    ere_parameters,
    erf_from_poles,
    s_matrix_from_model,
    taylor_from_ere,
    unwrap_phase,
)
from susyinv.errors import DegeneratePoleError, DomainError, PoleOfKError, UnwrapError
from susyinv.kinematics import k_from_elab
from susyinv.poles import PoleSet, delta_from_poles

from conftest import D_WAVE_ERE, S_WAVE_PADE, S_WAVE_POLES, S_WAVE_TAYLOR


@pytest.mark.parametrize(
    "k,delta,l,expected",
    [(1.0, math.pi / 4, 0, 1.0), (2.0, math.pi / 4, 2, 32.0), (0.3, -math.atan(0.3 / 0.5), 0, -0.5)],
)
def test_K_from_delta(k, delta, l, expected):
    assert K_from_delta(k, delta, l) == pytest.approx(expected, rel=1e-12)


def test_K_from_delta_rejects_multiple_of_pi():
    with pytest.raises(PoleOfKError):
        K_from_delta(1.0, 0.0, 0)


def test_constant_model_is_one_pole():
    k = np.linspace(0.1, 2.0, 20)
    d = delta_from_model(ErfModel(0, (-0.5,)), k)
    np.testing.assert_allclose(d, -np.arctan(k / 0.5), atol=1e-12)


def test_pade_model_matches_pole_sum_at_350():
    model = ErfModel(0, *S_WAVE_PADE)
    k = np.linspace(0.01, k_from_elab(350.0), 400)
    d_model = delta_from_model(model, k)[-1]
    d_poles = delta_from_poles(PoleSet(0, S_WAVE_POLES), k)[-1]
    d_model += math.pi * round((d_poles - d_model) / math.pi)
    assert abs(math.degrees(d_model - d_poles)) <= 0.5


def test_pade_model_high_energy():
    model = ErfModel(0, *S_WAVE_PADE)
    k = np.geomspace(0.01, 1e6, 6000)
    assert delta_from_model(model, k)[-1] == pytest.approx(-math.pi, abs=1e-3)


def test_s_matrix_examples():
    assert s_matrix_from_model(ErfModel(0, (0.0,)), 0.7) == pytest.approx(-1.0)
    assert s_matrix_from_model(ErfModel(0, (-0.5,)), 0.5) == pytest.approx(-1j)


def test_ere_s_wave():
    e = ere_parameters(ErfModel.taylor(S_WAVE_TAYLOR))
    assert e.a == pytest.approx(-23.70, abs=0.01)
    assert e.r == pytest.approx(2.608, abs=1e-3)


def test_ere_round_trip_d_wave():
    a, r, P = D_WAVE_ERE
    m = taylor_from_ere(-a, r, P, l=2)
    assert m.p[0] == pytest.approx(1.12660, abs=1e-5)
    assert m.p[1] == pytest.approx(7.66531, abs=1e-5)
    assert m.p[2] == pytest.approx(8.8637, abs=1e-3)
    back = ere_parameters(m)
    assert (back.a, back.r, back.P) == pytest.approx((-a, r, P), rel=1e-12)


def test_ere_degenerate_shape():
    e = ere_parameters(ErfModel.taylor((-1.0, 0.0, 0.0)))
    assert e.a == 1.0 and e.r == 0.0 and e.P == 0.0
    assert not e.shape_defined


def test_erf_from_single_pole():
    m = erf_from_poles(PoleSet(0, (0.5,)))
    assert m.p == pytest.approx((-0.5,)) and m.q == (1.0,)


def test_erf_from_published_s_wave():
    m = erf_from_poles(PoleSet(0, S_WAVE_POLES))
    p_ref, q_ref = S_WAVE_PADE
    np.testing.assert_allclose(m.p, p_ref, rtol=0.05)
    np.testing.assert_allclose(m.q, q_ref, rtol=0.05)


def test_symmetric_pair_has_vanishing_phase():
    # {kappa, -kappa}: the arctangents cancel, so K = k cot(0) is not finite
    with pytest.raises(DegeneratePoleError):
        erf_from_poles(PoleSet(0, (1.0, -1.0)))


def test_unwrap():
    k = np.linspace(0.1, 1, 5)
    p = np.array([1.4, 1.5, -1.55, -1.45, -1.3])
    np.testing.assert_allclose(unwrap_phase(p, k), [1.4, 1.5, math.pi - 1.55, math.pi - 1.45, math.pi - 1.3])
    with pytest.raises(UnwrapError):
        # a step of exactly pi/2 is ambiguous between two branches
        unwrap_phase(np.array([0.0, math.pi / 2]), np.array([0.1, 0.2]))


def test_model_validation():
    with pytest.raises(DomainError):
        ErfModel(0, (1.0,), (2.0,))
    with pytest.raises(DomainError):
        ErfModel(0, (math.nan,))
    m = ErfModel(1, (1.0, 2.0), (1.0, 0.5))
    assert ErfModel.from_dict(m.to_dict()) == m
    assert m.order == (1, 1)


def test_dataset_validation():
    with pytest.raises(DomainError):
        PhaseShiftDataset(0, [2.0, 1.0], [0.1, 0.2])
    with pytest.raises(DomainError):
        PhaseShiftDataset(0, [1.0], [0.1], sigma=[0.0])
    with pytest.raises(DomainError):
        PhaseShiftDataset(0, [-1.0], [0.1])
