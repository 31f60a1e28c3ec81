"""Acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line with the measured quantity and the
tolerance it is judged against, then asserts the same condition.
"""
import math
import time
import warnings

import numpy as np
import pytest

from susyinv.erf import ErfModel, PhaseShiftDataset, delta_from_model, ere_parameters, erf_from_poles, s_matrix_from_model, taylor_from_ere
from susyinv.fitting import FitConfig, fit_erf
from susyinv.io import load_sample
from susyinv.kinematics import elab_from_k
from susyinv.poles import PoleSet, delta_from_poles, extract_poles, sum_rule_residuals
from susyinv.solver import SolverConfig, phase_shift_from_potential, verify_inversion
from susyinv.susy import build_potential, classify_poles, s_wave_compact_potential, wronskian_bundle

from conftest import D_WAVE_ERE, D_WAVE_POLES, S_WAVE_PADE, S_WAVE_POLES, S_WAVE_TAYLOR


@pytest.fixture
def report(capsys):
    def emit(n, ok, text):
        with capsys.disabled():
            print(f"\n[criterion {n:>2}] {'PASS' if ok else 'FAIL'}  {text}")
        assert ok, text

    return emit


def test_criterion_01_s_wave_taylor_poles(report):
    t = time.perf_counter()
    model = ErfModel.taylor(S_WAVE_TAYLOR)
    rep = extract_poles(model)
    ere = ere_parameters(model)
    dt = time.perf_counter() - t
    got = np.array(rep.real_poles.kappas)
    dev = np.max(np.abs(got - np.sort([-0.0401, -4.6917, 0.8365, 3.8953]))) if got.size == 4 else np.inf
    ok = got.size == 4 and not rep.has_complex and dev <= 1e-3 and abs(ere.a + 23.70) <= 0.01 and abs(ere.r - 2.608) <= 1e-3
    report(1, ok, f"4 real poles, max|dkappa| = {dev:.2e} (tol 1e-3); a = {ere.a:.4f} fm, r = {ere.r:.5f} fm; {dt * 1e3:.1f} ms")


def test_criterion_02_d_wave_taylor_poles(report):
    # the printed a follows K(0) = +1/a; in the K(0) = -1/a convention used
    # throughout it enters with the opposite sign
    a, r, P = D_WAVE_ERE
    t = time.perf_counter()
    rep = extract_poles(taylor_from_ere(-a, r, P, l=2))
    dt = time.perf_counter() - t
    got = np.array(rep.real_poles.kappas)
    dev = np.max(np.abs(got - np.sort(D_WAVE_POLES))) if got.size == 5 else np.inf
    ok = got.size == 5 and not rep.has_complex and dev <= 5e-3
    report(2, ok, f"5 real poles from K(0) = +1/{a}, max|dkappa| = {dev:.2e} (tol 5e-3); {dt * 1e3:.1f} ms")


def test_criterion_03_d_wave_sum_rules(report):
    s1, s3 = sum_rule_residuals(PoleSet(2, D_WAVE_POLES))
    ok = abs(s1) <= 5e-3 and abs(s3) <= 1e-2
    report(3, ok, f"|sum 1/kappa| = {abs(s1):.2e} fm (tol 5e-3), |sum 1/kappa^3| = {abs(s3):.2e} fm^3 (tol 1e-2)")


def test_criterion_04_pade_round_trip(report):
    m = erf_from_poles(PoleSet(0, S_WAVE_POLES))
    p_ref, q_ref = S_WAVE_PADE
    rel = np.abs(np.array(m.p + m.q[1:]) - np.array(p_ref + q_ref[1:])) / np.abs(np.array(p_ref + q_ref[1:]))
    ok = m.order == (3, 2) and np.all(rel <= 0.05)
    report(4, ok, f"[3/2] coefficients, max relative deviation {np.max(rel):.2%} (tol 5%)")


def test_criterion_05_high_energy_limits(report):
    k = np.array([100.0])
    s = PoleSet(0, S_WAVE_POLES)
    d = PoleSet(2, D_WAVE_POLES)
    ds = delta_from_poles(s, k)[0] - (-math.pi)
    dd = delta_from_poles(d, k)[0] - math.pi / 2
    exact = s.high_energy_limit() == -math.pi and d.high_energy_limit() == math.pi / 2
    ok = exact and abs(ds) <= 1e-3 and abs(dd) <= 1e-3
    report(5, ok, f"limits -pi, +pi/2 exact = {exact}; at k = 100 fm^-1 deviation {ds:+.3e}, {dd:+.3e} rad (tol 1e-3)")


@pytest.mark.parametrize("which", ["S", "D"])
def test_criterion_06_susy_exactness(which, report, k_grid):
    poles = PoleSet(0, S_WAVE_POLES) if which == "S" else PoleSet(2, D_WAVE_POLES)
    t = time.perf_counter()
    rep = verify_inversion(poles, k_grid)
    dt = time.perf_counter() - t
    ok = rep.max_abs_deviation_deg < 0.1 and dt < 60
    report(6, ok, f"{which}-wave forward vs pole sum: max|ddelta| = {rep.max_abs_deviation_deg:.2e} deg (tol 0.1) in {dt:.1f} s (limit 60)")


def test_criterion_07_form_equivalence(report):
    poles = PoleSet(0, S_WAVE_POLES)
    r = np.linspace(0.1, 20.0, 500)
    six = s_wave_compact_potential(poles, "wronskian-6", extended=True)(r)
    four = s_wave_compact_potential(poles, "cosh-4", extended=True)(r)
    generic = build_potential(poles)(r, extended=True)
    e1 = np.max(np.abs(four - six) / np.abs(six))
    e2 = np.max(np.abs(generic - six) / np.abs(six))
    e3 = np.max(np.abs(generic - four) / np.abs(four))
    ok = max(e1, e2, e3) <= 1e-8
    report(7, ok, f"max relative: cosh-form vs 6x6 {e1:.1e}, generic vs 6x6 {e2:.1e}, generic vs cosh-form {e3:.1e} (tol 1e-8)")


def test_criterion_08_singularity_law(report):
    s = build_potential(PoleSet(0, S_WAVE_POLES))
    d = build_potential(PoleSet(2, D_WAVE_POLES))
    cs = s.core_coefficient()
    cd = d.core_coefficient() - 6.0
    ok = s.nu == 2 and d.nu == 1 and abs(cs - 6) <= 0.06 and abs(cd + 4) <= 0.04
    report(8, ok, f"S: nu = {s.nu}, r^2 V -> {cs:.6f} (target 6); D: nu = {d.nu}, r^2 (V - 6/r^2) -> {cd:.6f} (target -4); tol 1%")


def test_criterion_09_one_pole(report):
    r = np.linspace(0.05, 15.0, 500)
    worst = 0.0
    for kappa in (0.3, 1.0, 3.0):
        v = build_potential(PoleSet(0, (kappa,)))(r)
        exact = 2 * kappa**2 / np.sinh(kappa * r) ** 2
        worst = max(worst, float(np.max(np.abs(v - exact) / np.maximum(1.0, np.abs(exact)))))
    ok = worst <= 1e-12
    report(9, ok, f"max |V - 2k^2/sinh^2(kr)| / max(1,|V|) = {worst:.1e} (tol 1e-12)")


def test_criterion_10_fit_quality(report):
    data = load_sample("1S0")
    _, pade = fit_erf(data, FitConfig(order=(3, 2)))
    low = data.e_lab <= 30
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        taylor, _ = fit_erf(PhaseShiftDataset(0, data.e_lab[low], data.delta[low]), FitConfig(order=(2, 0)))
    res = np.degrees(delta_from_model(taylor, data.k()) - data.delta)
    high = data.e_lab >= 50
    ok = pade.rms_deg <= 1.0 and np.all(np.abs(res[high]) > 1.0) and np.all(np.abs(res[low]) <= 1.0)
    report(
        10,
        ok,
        f"[3/2] RMS = {pade.rms_deg:.3f} deg (tol 1); Taylor fitted <= 30 MeV: max|res| {np.max(np.abs(res[low])):.2f} deg below 30 MeV, "
        f"min|res| {np.min(np.abs(res[high])):.2f} deg above 50 MeV (must exceed 1)",
    )


def _admissible_s_wave(rng, n):
    while True:
        vals = rng.choice([-1.0, 1.0], n) * rng.uniform(0.1, 5.0, n)
        s = np.sort(np.abs(vals))
        if np.all(np.diff(s) > 0.05 * s[1:]) and np.sum(vals > 0) >= np.sum(vals < 0):
            return PoleSet(0, tuple(vals))


def test_criterion_11_property_suites(report):
    rng = np.random.default_rng(2024)
    # round trip poles -> model -> poles
    rt = 0.0
    for _ in range(30):
        ps = _admissible_s_wave(rng, int(rng.integers(1, 6)))
        back = np.array(extract_poles(erf_from_poles(ps)).real_poles.kappas)
        rt = max(rt, float(np.max(np.abs(back - ps.kappas) / np.abs(ps.kappas))))
    # unitarity
    un = 0.0
    for _ in range(200):
        m = ErfModel(int(rng.integers(0, 4)), tuple(rng.uniform(-5, 5, 3)), (1.0, *rng.uniform(-5, 5, 2)))
        un = max(un, abs(abs(s_matrix_from_model(m, rng.uniform(1e-3, 20))) - 1))
    # normalisation and permutation invariance of (ln W)''
    inv = 0.0
    r = np.linspace(0.2, 8.0, 40)
    for _ in range(20):
        sols = classify_poles(_admissible_s_wave(rng, int(rng.integers(1, 5))))
        base = wronskian_bundle(sols, r).d2
        scale = np.max(np.abs(base))
        scaled = wronskian_bundle(sols, r, norms=rng.uniform(1e-3, 1e3, len(sols))).d2
        perm = [sols[i] for i in rng.permutation(len(sols))]
        inv = max(inv, np.max(np.abs(scaled - base)) / scale, np.max(np.abs(wronskian_bundle(perm, r).d2 - base)) / scale)
    # step-halving order of the forward solver
    orders = []
    for ps in (PoleSet(0, S_WAVE_POLES), PoleSet(2, D_WAVE_POLES)):
        pot = build_potential(ps)
        d = []
        for h in (0.016, 0.008, 0.004):
            cfg = SolverConfig(step=h, r_start=0.016, r_refine=0.016 + 1e-9, origin_refine=1, r_match=(20.0, 22.0), r_max=22.0)
            d.append(phase_shift_from_potential(pot, np.array([1.0, 2.0]), cfg))
        orders.extend(np.log2(np.abs((d[0] - d[1]) / (d[1] - d[2]))))
    # weight scaling leaves the argmin unchanged
    truth = ErfModel(0, (-0.05, 1.3, 0.4), (1.0, 0.3))
    k = np.linspace(0.1, 2.0, 15)
    delta = delta_from_model(truth, k) + 0.01 * np.sin(5 * k)
    sig = 0.01 * (1 + k)
    ws = 0.0
    for c in (1e-3, 0.37, 1e3):
        fits = []
        for s in (sig, c * sig):
            m, _ = fit_erf(PhaseShiftDataset(0, elab_from_k(k), delta, s), FitConfig(order=(2, 1), weighting="by-sigma"))
            fits.append(np.array(m.p + m.q))
        ws = max(ws, float(np.max(np.abs(fits[1] - fits[0]) / np.abs(fits[0]))))
    ok = rt <= 1e-8 and un <= 1e-10 and inv <= 1e-10 and min(orders) >= 4 - 0.2 and ws <= 1e-10
    report(
        11,
        ok,
        f"round trip {rt:.1e} (1e-8), |S|-1 {un:.1e} (1e-10), V invariance {inv:.1e} (1e-10), "
        f"step-halving order >= {min(orders):.2f} (4), weight scaling {ws:.1e} (1e-10)",
    )
