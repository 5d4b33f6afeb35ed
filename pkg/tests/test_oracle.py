import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import trapezoid

from fourthorder.fields import CoherenceModel
from fourthorder.oracle import (
    Arm,
    AstroConfig,
    PulseMoments,
    ScenarioPrediction,
    gaussian_coincidence,
    isserlis_fourth_moment,
    predict_astronomy,
    predict_pulsed,
    predict_scenario_i,
    predict_scenario_ii,
    predict_scenario_iii,
    predict_scenario_iv,
    predict_uncorrelated,
)

BS = 4.0  # literal 50:50 outputs carry (1/sqrt2)^4
S = 1 / np.sqrt(2)
M1 = CoherenceModel("gaussian", 1.0, 50.0)
M2 = CoherenceModel("lorentzian", 2.0, 50.0)

delay = st.floats(-3, 3)
intensity = st.floats(0.1, 3)


def corr(model, I):
    return lambda u: I * complex(model.gamma(u))


# -- prediction container --------------------------------------------------


def test_prediction_curve_and_visibility():
    p = ScenarioPrediction(4.0, 2.0, np.pi)
    assert p.value == pytest.approx(2.0)
    assert p.visibility == 0.5
    assert p.curve(np.pi) == pytest.approx(6.0)
    assert np.allclose(p.full_curve(np.array([0, np.pi])), [2.0, 6.0])


# -- frozen closed-form values ---------------------------------------------


def test_uncorrelated_frozen():
    # I10 = 1, I20 = 0.5, thermal lambdas |g|^2
    g1, g2 = 0.6 + 0.0j, 0.5j
    p = predict_uncorrelated(1.0, 0.5, 0.36, 0.25, g1, g2)
    assert p.baseline == pytest.approx(1.36 + 0.25 * 1.25 + 1.0)
    assert p.value == pytest.approx(p.baseline - 2 * 0.5 * np.real(g1 * np.conj(g2)))


def test_identical_thermal_hom_is_flat_four():
    for tau in np.linspace(-3, 3, 13):
        g = complex(M1.gamma(tau))
        p = predict_scenario_ii(1.0, 1.0, abs(g) ** 2, abs(g) ** 2, g, g)
        assert p.value == pytest.approx(4.0, abs=1e-12)


def test_scenario_i_visibility():
    p = predict_scenario_i(1.0, 1.0, 0.7, 1.0)
    assert p.visibility == pytest.approx(0.35)
    assert predict_scenario_i(1.0, 1.0, 1.0, 1.0).value == pytest.approx(2.0)


def test_scenario_iv_dip():
    for dT in [0.0, 0.5, 1.0, 3.0]:
        g = complex(M1.gamma(dT))
        assert predict_scenario_iv(1.0, 1.0, g, g).value == pytest.approx(4 - 2 * abs(g) ** 2)


@pytest.mark.parametrize("g,vis", [(1.0, 0.4), (0.5, 2 * 0.5 / 4.25)])
def test_astronomy_matched_visibility(g, vis):
    p = predict_astronomy(AstroConfig(1.0, 1.0, 1.0, 0.0, g), matched=True)
    assert p.visibility == pytest.approx(vis, abs=1e-12)
    assert p.baseline == pytest.approx(4 + g ** 2)


def test_astronomy_general_reduces_to_matched():
    for g in [1.0, 0.5 * np.exp(0.3j), 0.0]:
        for dphi in [0.0, 1.0, 2.5]:
            cfg = AstroConfig(2.0, 2.0, 2.0, dphi, g)
            assert predict_astronomy(cfg).value == pytest.approx(predict_astronomy(cfg, matched=True).value)


def test_astronomy_matched_requires_equal_intensities():
    with pytest.raises(ValueError):
        predict_astronomy(AstroConfig(1.0, 2.0, 1.0, 0.0, 1.0), matched=True)


def test_astronomy_xi():
    cfg = AstroConfig(1.0, 4.0, 1.0, 0.0, 1.0, I_bar=2.0)
    assert cfg.xi == pytest.approx(2 * 2 * 1 * np.sqrt(2) / (1 * 1 + 2 * 4))


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_pulsed_thermal_matched(a):
    for beta in [1.0, 0.5, 0.02]:
        p = predict_pulsed(PulseMoments.thermal(a, a, (0, 0, 0, 0)), beta, beta)
        assert p.value == pytest.approx(6 * a ** 2 - 2 * a ** 2 * beta ** 2)
    assert predict_pulsed(PulseMoments.thermal(a, a, (0, 0, 0, 0)), 1.0, 1.0).value == pytest.approx(4 * a ** 2)


def test_pulsed_scaling_and_unmatched_slots():
    m = PulseMoments.thermal(1.0, 1.0, (0, 0, 1, 0))
    assert m.m1221 == 0
    p = predict_pulsed(m, 1.0, 1.0, rep_rate=0.25, charge=2.0)
    assert p.value == pytest.approx((1 + 2 + 1 + 1) * 0.25 * 4)


def test_pulse_moments_from_amplitudes_match_thermal():
    rng = np.random.default_rng(0)
    n = 200000
    A = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
    B = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * np.sqrt(2) / np.sqrt(2)
    m = PulseMoments.from_amplitudes(A, B, (0, 0, 0, 0))
    t = PulseMoments.thermal(1.0, 2.0, (0, 0, 0, 0))
    assert m.aa == pytest.approx(t.aa, rel=0.03)
    assert m.bb == pytest.approx(t.bb, rel=0.03)
    assert m.ab == pytest.approx(t.ab, rel=0.03)
    assert abs(m.m1221 - t.m1221) < 0.05
    assert abs(m.m1212) < 0.05


def test_coherent_moments():
    m = PulseMoments.coherent(1.0, 2.0, relative_phase=0.25)
    assert m.m1212 == pytest.approx(2.0 * np.exp(0.5j))
    assert PulseMoments.coherent(1.0, 2.0).m1212 == 0


# -- Gaussian moment theorem against direct sampling ------------------------


def test_isserlis_against_sampled_gaussian_vector():
    rng = np.random.default_rng(3)
    L = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    n = 400000
    w = (rng.standard_normal((4, n)) + 1j * rng.standard_normal((4, n))) / np.sqrt(2)
    z = L @ w  # <z_i z_j*> = C_ij
    C = L @ L.conj().T
    v1, v2, v2p, v1p = z
    I1 = C[0, 0].real
    I2 = C[1, 1].real
    pair = lambda i, j: C[j, i]  # <z_i* z_j>
    g11 = pair(0, 3) / I1
    g22 = pair(1, 2) / I2
    g12 = pair(0, 1) / np.sqrt(I1 * I2)
    g21 = pair(2, 3) / np.sqrt(I1 * I2)
    anomalous = 0.0  # circular vector: <z_i z_j> = 0
    exact = isserlis_fourth_moment(g11, g22, g12, g21, I1, I2, anomalous)
    samples = np.conj(v1) * v2 * np.conj(v2p) * v1p
    err = np.std(samples) / np.sqrt(n)
    assert abs(samples.mean() - exact) < 5 * err


# -- scenario formulas against the exact Gaussian evaluator -----------------


@settings(max_examples=60, deadline=None)
@given(delay, delay, delay, delay, delay, intensity, intensity)
def test_uncorrelated_and_scenario_ii_exact(T1, T2, T1p, T2p, tau, I1, I2):
    arms = [Arm(0, S, T1), Arm(1, S, T2)]
    arms_p = [Arm(0, S, T1p), Arm(1, -S, T2p)]
    exact = BS * gaussian_coincidence(arms, arms_p, [corr(M1, I1), corr(M2, I2)], tau)
    g1 = complex(M1.gamma(T1p - T1 + tau))
    g2 = complex(M2.gamma(T2p - T2 + tau))
    p = predict_uncorrelated(I1, I2, abs(g1) ** 2, abs(g2) ** 2, g1, g2)
    assert p.value == pytest.approx(exact, rel=1e-12, abs=1e-12)
    q = predict_scenario_ii(I1, I2, abs(g1) ** 2, abs(g2) ** 2, g1, g2)
    assert q.value == pytest.approx(exact, rel=1e-12, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), delay, intensity)
def test_scenario_i_exact_when_primed_pair_far(T2, T2p_off, tau, I0):
    T1, T1p = 0.0, 40.0
    T2p = T1p + T2p_off
    # common origin of intensity 2 I0 split in two, second half with random phase
    arms = [Arm(0, S * S, T1), Arm(0, S * S, T2, 1)]
    arms_p = [Arm(0, S * S, T1p), Arm(0, -S * S, T2p, 1)]
    exact = BS * gaussian_coincidence(arms, arms_p, [corr(M1, 2 * I0)], tau, random_phase=True)
    p = predict_scenario_i(I0, I0, complex(M1.gamma(T2 - T1)), complex(M1.gamma(T2p - T1p)))
    assert p.value == pytest.approx(exact, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-1, 1), intensity)
def test_scenario_iii_exact_with_cross_intensity_terms(a, b, tau, I0):
    T1, T2 = 0.0, 40.0
    T1p, T2p = T2 + a, T1 + b
    arms = [Arm(0, S * S, T1), Arm(0, S * S, T2)]
    arms_p = [Arm(0, S * S, T1p), Arm(0, -S * S, T2p)]
    exact = BS * gaussian_coincidence(arms, arms_p, [corr(M1, 2 * I0)], tau)
    g12 = complex(M1.gamma(T2p - T1 + tau))
    g21 = complex(M1.gamma(T1p - T2 + tau))
    p = predict_scenario_iii(I0, I0, g12, g21, cross_lambda=(abs(g12) ** 2, abs(g21) ** 2))
    assert p.value == pytest.approx(exact, rel=1e-12)
    bare = predict_scenario_iii(I0, I0, g12, g21)
    assert bare.value == pytest.approx(exact - I0 ** 2 * (abs(g12) ** 2 + abs(g21) ** 2), rel=1e-12)


def test_scenario_iii_fringe_vanishes_with_random_phase():
    arms = [Arm(0, 0.5, 0.0), Arm(0, 0.5, 40.0, 1)]
    arms_p = [Arm(0, 0.5, 40.0), Arm(0, -0.5, 0.0, 1)]
    taus = np.linspace(0, 0.2, 9)
    vals = [BS * gaussian_coincidence(arms, arms_p, [corr(M1, 2.0)], tau, random_phase=True) for tau in taus]
    # the cross-intensity terms 2|g(tau)|^2 remain, the phase-dependent fringe is gone
    assert np.allclose(vals, 4.0 + 2.0 * M1.envelope(taus) ** 2, rtol=1e-12)


@pytest.mark.parametrize("dT", [0.0, 0.7, 1.5])
def test_scenario_iv_is_the_slow_detector_limit(dT):
    arms = [Arm(0, S * S, 0.0), Arm(0, S * S, dT, 1)]
    arms_p = [Arm(0, S * S, 0.0), Arm(0, -S * S, dT, 1)]
    g = complex(M1.gamma(dT))
    limit = predict_scenario_iv(1.0, 1.0, g, g).value
    errs = []
    for TR in (100.0, 400.0):
        taus = np.linspace(0.0, TR, int(TR / 0.02) + 1)
        vals = np.array([gaussian_coincidence(arms, arms_p, [corr(M1, 2.0)], t, random_phase=True)
                         for t in taus[:400]])
        # beyond 8 Tc the integrand equals its asymptote to machine precision
        tail = np.full(taus.size - 400, vals[-1])
        full = BS * np.concatenate([vals, tail])
        avg = trapezoid(full, taus) / TR
        errs.append(avg - limit)
    assert abs(errs[1]) < 0.01
    # the residual is a tau-dependent bunching term and falls as 1/T_R
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=1e-6)


@pytest.mark.parametrize("g", [1.0, 0.5, 0.4 * np.exp(0.9j)])
@pytest.mark.parametrize("dphi", [0.0, 1.3, 3.0])
def test_astronomy_exact(g, dphi):
    I, a1, a2 = 1.3, 0.7, 2.1
    env = lambda u: I * float(M1.envelope(u))
    h = np.sqrt(1 - abs(g) ** 2)
    arms = [Arm(0, 1.0, 0.0)]
    arms_p = [Arm(0, g, 0.0), Arm(1, h, 0.0)]
    c = np.sqrt(a1)
    cp = np.sqrt(a2) * np.exp(1j * dphi)
    exact = gaussian_coincidence(arms, arms_p, [env, env], 0.0, coherent=(c, cp))
    p = predict_astronomy(AstroConfig(I, a1, a2, dphi, g))
    assert p.value == pytest.approx(exact, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(delay, st.floats(0, 2 * np.pi), intensity, intensity)
def test_thermal_plus_coherent_hom_exact(tau, phase, I1, I2):
    m = CoherenceModel("gaussian", 1.0, 0.0)
    alpha = np.sqrt(I2) * np.exp(1j * phase)
    arms = [Arm(0, S, 0.0)]
    arms_p = [Arm(0, S, 0.0)]
    exact = BS * gaussian_coincidence(arms, arms_p, [corr(m, I1)], tau, coherent=(S * alpha, -S * alpha))
    g1 = complex(m.gamma(tau))
    p = predict_scenario_ii(I1, I2, abs(g1) ** 2, 0.0, g1, 1.0)
    assert p.value == pytest.approx(exact, rel=1e-12)
