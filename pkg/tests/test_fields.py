import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fourthorder.fields import (
    CoherenceModel,
    FieldTrace,
    PulseProfile,
    PulseTrain,
    SourceSpec,
    estimate_gamma,
    make_partially_coherent_pair,
    split_common_origin,
    synth_coherent,
    synth_pulse_train,
    synth_thermal,
)

GAUSS = CoherenceModel("gaussian", 1.0, 50.0)
LORENTZ = CoherenceModel("lorentzian", 1.0, 50.0)


# -- coherence models ------------------------------------------------------


def test_envelope_frozen_values():
    assert GAUSS.envelope(1.0) == pytest.approx(np.exp(-0.5), rel=1e-15)
    assert LORENTZ.envelope(-2.0) == pytest.approx(np.exp(-2.0), rel=1e-15)
    g = GAUSS.gamma(0.1)
    assert abs(g) == pytest.approx(np.exp(-0.005))
    assert np.angle(g) == pytest.approx(5.0 - 2 * np.pi)


@pytest.mark.parametrize("kwargs", [dict(Tc=-1.0), dict(Tc=0.0), dict(shape="boxcar"), dict(omega=-1.0)])
def test_coherence_model_rejects(kwargs):
    with pytest.raises(ValueError):
        CoherenceModel(**kwargs)


@given(st.floats(-50, 50), st.sampled_from(["gaussian", "lorentzian"]), st.floats(0.1, 10))
def test_envelope_bounded_and_even(tau, shape, Tc):
    m = CoherenceModel(shape, Tc, 3.0)
    e = m.envelope(tau)
    assert 0.0 <= e <= 1.0
    assert e == pytest.approx(m.envelope(-tau), rel=1e-12)
    assert m.envelope(0.0) == 1.0
    assert abs(m.gamma(tau)) == pytest.approx(e, rel=1e-12, abs=1e-300)


# -- thermal synthesis -----------------------------------------------------


def test_thermal_intensity_and_bunching():
    means, sq = [], []
    for seed in range(40):
        x = synth_thermal(GAUSS, 2.0, 200.0, 0.05, seed)
        means.append(x.intensity.mean())
        sq.append(np.mean(x.intensity ** 2))
    means, sq = np.array(means), np.array(sq)
    assert abs(means.mean() - 2.0) < 3 * means.std(ddof=1) / np.sqrt(40)
    ratio = sq.mean() / means.mean() ** 2
    assert ratio == pytest.approx(2.0, abs=0.08)


def test_thermal_is_seeded():
    a = synth_thermal(GAUSS, 1.0, 100.0, 0.05, 7)
    b = synth_thermal(GAUSS, 1.0, 100.0, 0.05, 7)
    c = synth_thermal(GAUSS, 1.0, 100.0, 0.05, 8)
    assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)
    assert a.carrier == 50.0 and a.mean_intensity_nominal == 1.0


@pytest.mark.parametrize("model", [GAUSS, LORENTZ], ids=["gaussian", "lorentzian"])
def test_estimated_gamma_matches_model(model):
    taus = np.arange(0, 41) * 0.05
    est = np.mean([estimate_gamma(*(synth_thermal(model, 1.0, 400.0, 0.05, s),) * 2, taus) for s in range(10)], axis=0)
    assert np.max(np.abs(est - model.gamma(taus))) < 0.05


def test_thermal_circular_autocorrelation():
    # spectral synthesis: the circular autocorrelation is the target gamma on average
    acc = 0
    for s in range(50):
        x = synth_thermal(LORENTZ, 1.0, 100.0, 0.05, s).samples
        f = np.fft.fft(x)
        acc = acc + np.fft.ifft(np.abs(f) ** 2) / x.size
    acc = acc / 50
    lags = np.arange(21)
    # baseband envelope; the carrier is factored out of the samples
    assert np.max(np.abs(acc[lags] - LORENTZ.envelope(lags * 0.05))) < 0.05


@pytest.mark.parametrize(
    "dt,duration,match",
    [(0.06, 500.0, "Tc/20"), (0.05, 99.0, "100")],
)
def test_thermal_sampling_preconditions(dt, duration, match):
    with pytest.raises(ValueError, match=match):
        synth_thermal(GAUSS, 1.0, duration, dt, 0)


def test_thermal_sampling_boundary_is_allowed():
    synth_thermal(GAUSS, 1.0, 100.0, 0.05, 0)


# -- coherent, splitting, partially coherent pairs --------------------------


def test_coherent_trace():
    x = synth_coherent(4.0, 0.3, 10.0, 0.05, carrier=5.0)
    assert np.allclose(x.intensity, 4.0)
    assert np.allclose(np.angle(x.samples), 0.3)
    assert x.carrier == 5.0


def test_split_common_origin():
    src = synth_thermal(GAUSS, 2.0, 100.0, 0.05, 1)
    a, b = split_common_origin(src, apply_random_phase=True, seed=4)
    assert np.allclose(a.intensity + b.intensity, src.intensity)
    ratio = b.samples / a.samples
    assert np.allclose(np.abs(ratio), 1.0)
    assert np.allclose(ratio, ratio[0])
    a2, b2 = split_common_origin(src, apply_random_phase=False)
    assert np.allclose(a2.samples, b2.samples)


def test_split_random_phase_is_uniform():
    src = synth_thermal(GAUSS, 2.0, 100.0, 0.05, 1)
    phases = [np.angle(np.vdot(*(t.samples for t in split_common_origin(src, True, s)))) for s in range(400)]
    # first circular moment of a uniform phase vanishes
    assert abs(np.mean(np.exp(1j * np.array(phases)))) < 4 / np.sqrt(400)


@pytest.mark.parametrize("g", [1.0, 0.5, 0.3j, 0.0])
def test_partially_coherent_pair(g):
    vals = []
    for s in range(20):
        v, vb = make_partially_coherent_pair(GAUSS, g, 1.0, 200.0, 0.05, s)
        vals.append(np.mean(np.conj(v.samples) * vb.samples))
    assert abs(np.mean(vals) - g) < 0.05
    assert np.mean(np.abs(vb.samples) ** 2) == pytest.approx(1.0, abs=0.3)


def test_partially_coherent_pair_rejects_gamma_above_one():
    with pytest.raises(ValueError):
        make_partially_coherent_pair(GAUSS, 1.2, 1.0, 200.0, 0.05, 0)


# -- traces and specs ------------------------------------------------------


@pytest.mark.parametrize(
    "samples,dt",
    [([], 0.1), ([1.0, np.nan], 0.1), ([1.0, 2.0], 0.0), ([[1.0]], 0.1)],
)
def test_field_trace_validation(samples, dt):
    with pytest.raises(ValueError):
        FieldTrace(np.asarray(samples), dt)


def test_field_trace_properties():
    x = FieldTrace(np.array([1, 1j, 2]), 0.5, t0=1.0)
    assert x.duration == 1.5
    assert np.allclose(x.times, [1.0, 1.5, 2.0])
    assert np.allclose(x.intensity, [1, 1, 4])
    assert x.start_index == 2


@pytest.mark.parametrize("kwargs", [dict(kind="laser"), dict(I0=-1.0)])
def test_source_spec_validation(kwargs):
    with pytest.raises(ValueError):
        SourceSpec(**kwargs)


# -- pulses ----------------------------------------------------------------


def test_gaussian_pulse_normalized():
    p = PulseProfile("gaussian", 0.7)
    assert p.norm() == pytest.approx(1.0, abs=1e-12)
    t = np.linspace(-10, 10, 20001)
    assert np.sum(np.abs(p(t)) ** 2) * (t[1] - t[0]) == pytest.approx(1.0, abs=1e-9)


def test_user_profile_from_samples():
    t = np.linspace(-5, 5, 201)
    p = PulseProfile.from_samples(3.0 * np.exp(-t ** 2), dt=t[1] - t[0])
    assert p.norm() == pytest.approx(1.0, abs=1e-9)
    # rms width of |f|^2 = exp(-2 t^2) is 1/2
    assert p.width == pytest.approx(0.5, rel=1e-3)


def test_user_profile_must_be_normalized():
    with pytest.raises(ValueError, match="normalized"):
        PulseProfile("user_sampled", 1.0, samples=np.ones(10), dt=1.0)


def test_pulse_train_width_limit():
    with pytest.raises(ValueError):
        PulseTrain(np.ones(5, complex), 5.0, PulseProfile("gaussian", 1.0))
    PulseTrain(np.ones(5, complex), 10.0, PulseProfile("gaussian", 1.0))


def test_pulse_train_statistics():
    p = PulseProfile("gaussian", 1.0)
    th = synth_pulse_train(p, 40.0, 20000, "thermal", 2.0, seed=1)
    e = np.abs(th.amplitudes) ** 2
    assert e.mean() == pytest.approx(2.0, rel=0.05)
    # exponential energy distribution: <E^2> = 2 <E>^2
    assert np.mean(e ** 2) / e.mean() ** 2 == pytest.approx(2.0, rel=0.1)
    co = synth_pulse_train(p, 40.0, 10, "coherent", 2.0, phase=0.5)
    assert np.allclose(co.amplitudes, np.sqrt(2.0) * np.exp(0.5j))
    assert th.rep_rate == 1 / 40.0
    with pytest.raises(ValueError):
        synth_pulse_train(p, 40.0, 3, "user", amplitudes=[1, 2])
    with pytest.raises(ValueError):
        synth_pulse_train(p, 40.0, 3, "squeezed")
