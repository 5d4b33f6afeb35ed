"""
Stochastic optical fields
=========================

Synthesis of stationary and pulsed classical fields in the complex
baseband representation. A field is stored as its slowly varying envelope
sampled every ``dt``; the optical carrier ``exp(i*omega*t)`` is factored out
and kept as metadata on the trace. Delays therefore act as an envelope shift
plus an exact carrier phase (see :func:`fourthorder.interferometer.delay`).

Thermal fields are circular complex Gaussian processes generated by the
spectral method: complex white noise is filtered by the square root of the
power spectrum obtained from the discrete Fourier transform of the sampled
coherence function. The result has exactly the requested (circularly
wrapped) autocorrelation.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple

import numpy as np

__all__ = [
    "CoherenceModel",
    "FieldTrace",
    "SourceSpec",
    "PulseProfile",
    "PulseTrain",
    "synth_thermal",
    "synth_coherent",
    "split_common_origin",
    "make_partially_coherent_pair",
    "synth_pulse_train",
    "estimate_gamma",
]

_REL = 1e-12
NORM_TOL = 1e-9

SHAPES = ("gaussian", "lorentzian")
SOURCE_KINDS = ("thermal", "coherent", "common_origin_split")
AMP_STATS = ("thermal", "coherent", "user")


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


@dataclass(frozen=True)
class CoherenceModel:
    """Second-order coherence ``gamma(tau) = envelope(tau) * exp(i*omega*tau)``.

    ``gaussian``: ``exp(-tau**2 / (2 Tc**2))``; ``lorentzian`` (exponential
    decay, Lorentzian line): ``exp(-|tau| / Tc)``.
    """

    shape: str = "gaussian"
    Tc: float = 1.0
    omega: float = 0.0

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown coherence shape {self.shape!r}; expected one of {SHAPES}")
        if not self.Tc > 0:
            raise ValueError(f"Tc must be > 0, got {self.Tc}")
        if not self.omega >= 0:
            raise ValueError(f"omega must be >= 0, got {self.omega}")

    def envelope(self, tau):
        """Real, even envelope of gamma; equals 1 at zero lag."""
        tau = np.asarray(tau, dtype=float)
        if self.shape == "gaussian":
            return np.exp(-0.5 * (tau / self.Tc) ** 2)
        return np.exp(-np.abs(tau) / self.Tc)

    def gamma(self, tau):
        tau = np.asarray(tau, dtype=float)
        return self.envelope(tau) * np.exp(1j * self.omega * tau)


@dataclass(frozen=True, eq=False)
class FieldTrace:
    """Sampled complex envelope of one optical field.

    ``t0`` is the time label of the first sample; delays relabel time rather
    than discarding data, and :func:`fourthorder.interferometer.common_window`
    crops traces to their shared support.
    """

    samples: np.ndarray
    dt: float
    carrier: float = 0.0
    mean_intensity_nominal: float = float("nan")
    t0: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.ndim != 1 or s.size == 0:
            raise ValueError("samples must be a non-empty 1-D array")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite")
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        object.__setattr__(self, "samples", s)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size * self.dt

    @property
    def start_index(self) -> int:
        """``t0`` in units of ``dt`` (traces on one grid share integer offsets)."""
        return int(round(self.t0 / self.dt))

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.samples.size)

    @property
    def intensity(self) -> np.ndarray:
        return self.samples.real ** 2 + self.samples.imag ** 2

    def with_samples(self, samples, **changes) -> "FieldTrace":
        return replace(self, samples=samples, **changes)


@dataclass(frozen=True)
class SourceSpec:
    kind: str = "thermal"
    I0: float = 1.0
    alpha_phase: float = 0.0
    random_phase: bool = False

    def __post_init__(self):
        if self.kind not in SOURCE_KINDS:
            raise ValueError(f"unknown source kind {self.kind!r}; expected one of {SOURCE_KINDS}")
        if not self.I0 >= 0:
            raise ValueError(f"I0 must be >= 0, got {self.I0}")


def _check_sampling(model: CoherenceModel, duration: float, dt: float):
    if not dt > 0 or dt > model.Tc / 20 * (1 + _REL):
        raise ValueError(
            f"dt={dt} undersamples the coherence time (need 0 < dt <= Tc/20 = {model.Tc / 20})"
        )
    if duration < 100 * model.Tc * (1 - _REL):
        raise ValueError(
            f"duration={duration} is too short for averaging (need >= 100*Tc = {100 * model.Tc})"
        )


def _thermal_envelope(model: CoherenceModel, n: int, dt: float, rng) -> np.ndarray:
    k = np.arange(n)
    lag = np.minimum(k, n - k) * dt
    psd = np.fft.fft(model.envelope(lag)).real
    np.clip(psd, 0.0, None, out=psd)
    z = rng.standard_normal((2, n))
    spectrum = (z[0] + 1j * z[1]) * np.sqrt(psd * n / 2.0)
    return np.fft.ifft(spectrum)


def synth_thermal(model: CoherenceModel, I0: float, duration: float, dt: float, seed=None) -> FieldTrace:
    """Stationary circular-Gaussian field with coherence ``model`` and mean intensity ``I0``.

    Parameters
    ----------
    model : CoherenceModel
    I0 : float
        Mean intensity, ``<|V|^2>``.
    duration, dt : float
        Trace length and sample spacing; ``dt <= Tc/20`` and
        ``duration >= 100*Tc`` are enforced.
    seed : int, SeedSequence or Generator
        Identical seeds give bit-identical traces.
    """
    _check_sampling(model, duration, dt)
    if not I0 >= 0:
        raise ValueError(f"I0 must be >= 0, got {I0}")
    n = int(round(duration / dt))
    x = _thermal_envelope(model, n, dt, _rng(seed)) * np.sqrt(I0)
    return FieldTrace(x, dt, carrier=model.omega, mean_intensity_nominal=float(I0))


def synth_coherent(I0: float, phase: float, duration: float, dt: float, carrier: float = 0.0) -> FieldTrace:
    """Constant envelope ``sqrt(I0) * exp(i*phase)``: an ideal stable laser or coherent state."""
    if not I0 >= 0:
        raise ValueError(f"I0 must be >= 0, got {I0}")
    if not duration > 0 or not dt > 0:
        raise ValueError("duration and dt must be > 0")
    n = max(int(round(duration / dt)), 1)
    x = np.full(n, np.sqrt(I0) * np.exp(1j * phase), dtype=complex)
    return FieldTrace(x, dt, carrier=carrier, mean_intensity_nominal=float(I0))


def split_common_origin(src: FieldTrace, apply_random_phase: bool = True, seed=None):
    """Split one field on a 50:50 beam splitter into ``(V10, V20)``.

    ``V10 = src/sqrt(2)`` and ``V20 = exp(i*phi) * src/sqrt(2)``. With
    ``apply_random_phase`` the phase ``phi`` is drawn uniformly from
    ``[0, 2*pi)`` once per call (one realization) and held fixed along the
    trace; otherwise ``phi = 0``.

    Returns
    -------
    (FieldTrace, FieldTrace)
    """
    phi = _rng(seed).uniform(0.0, 2.0 * np.pi) if apply_random_phase else 0.0
    half = src.samples / np.sqrt(2.0)
    nominal = src.mean_intensity_nominal / 2.0
    a = src.with_samples(half, mean_intensity_nominal=nominal)
    b = src.with_samples(half * np.exp(1j * phi), mean_intensity_nominal=nominal)
    return a, b


def make_partially_coherent_pair(
    model: CoherenceModel,
    gamma_target: complex,
    I: float,
    duration: float,
    dt: float,
    seed=None,
) -> Tuple[FieldTrace, FieldTrace]:
    """Two thermal traces with equal-time mutual coherence ``gamma_target``.

    ``Vbar = gamma*V + sqrt(1 - |gamma|^2) * V_ind`` with ``V_ind`` an
    independent thermal trace of the same model, so both traces stay
    circular Gaussian with intensity ``I`` and
    ``<V*(t) Vbar(t+tau)> = I * gamma * envelope(tau)``.
    """
    g = complex(gamma_target)
    if abs(g) > 1 + _REL:
        raise ValueError(f"|gamma_target| must be <= 1, got {abs(g)}")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    s1, s2 = ss.spawn(2)
    v = synth_thermal(model, I, duration, dt, s1)
    if g == 1:
        return v, v.with_samples(v.samples.copy())
    w = synth_thermal(model, I, duration, dt, s2)
    mix = g * v.samples + np.sqrt(max(0.0, 1.0 - abs(g) ** 2)) * w.samples
    return v, v.with_samples(mix)


def _gaussian_profile(t, width):
    return (np.pi * width ** 2) ** -0.25 * np.exp(-0.5 * (np.asarray(t, dtype=float) / width) ** 2)


@dataclass(frozen=True, eq=False)
class PulseProfile:
    """Normalized single-pulse envelope ``f(t)`` with ``int |f|^2 dt = 1``.

    ``gaussian``: ``f(t) = (pi w^2)^(-1/4) exp(-t^2 / (2 w^2))`` with
    ``w = width``, so two copies offset by ``s`` overlap as
    ``exp(-s^2 / (4 w^2))``.

    ``user_sampled``: ``samples`` on a grid of spacing ``dt`` centred on
    ``t = 0`` (sample ``k`` sits at ``(k - (n-1)/2) * dt``), linearly
    interpolated and zero outside.
    """

    shape: str = "gaussian"
    width: float = 1.0
    samples: Optional[np.ndarray] = None
    dt: Optional[float] = None

    def __post_init__(self):
        if self.shape not in ("gaussian", "user_sampled"):
            raise ValueError(f"unknown pulse shape {self.shape!r}")
        if not self.width > 0:
            raise ValueError(f"pulse width must be > 0, got {self.width}")
        if self.shape == "user_sampled":
            if self.samples is None or self.dt is None or not self.dt > 0:
                raise ValueError("user_sampled profile needs samples and dt > 0")
            s = np.asarray(self.samples, dtype=complex)
            if s.ndim != 1 or s.size < 2 or not np.all(np.isfinite(s)):
                raise ValueError("profile samples must be a finite 1-D array of length >= 2")
            object.__setattr__(self, "samples", s)
            norm = self.norm()
            if abs(norm - 1.0) > NORM_TOL:
                raise ValueError(f"pulse profile not normalized: integral |f|^2 dt = {norm!r}")

    @classmethod
    def from_samples(cls, samples, dt: float, width: Optional[float] = None) -> "PulseProfile":
        """Normalize arbitrary samples; ``width`` defaults to the rms duration of ``|f|^2``."""
        s = np.asarray(samples, dtype=complex)
        p = np.abs(s) ** 2
        total = p.sum() * dt
        if not total > 0:
            raise ValueError("profile samples are identically zero")
        s = s / np.sqrt(total)
        if width is None:
            t = (np.arange(s.size) - (s.size - 1) / 2) * dt
            w = p / p.sum()
            mu = np.sum(w * t)
            width = float(np.sqrt(max(np.sum(w * (t - mu) ** 2), dt ** 2)))
        return cls("user_sampled", width=width, samples=s, dt=dt)

    @property
    def half_support(self) -> float:
        if self.shape == "gaussian":
            return 8.0 * self.width
        return (self.samples.size - 1) / 2 * self.dt

    @property
    def extent(self) -> float:
        """Half-width outside which ``|f|^2`` is negligible (below 1e-10 relative)."""
        if self.shape == "gaussian":
            return 5.0 * self.width
        return self.half_support

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.shape == "gaussian":
            return _gaussian_profile(t, self.width).astype(complex)
        grid = (np.arange(self.samples.size) - (self.samples.size - 1) / 2) * self.dt
        re = np.interp(t, grid, self.samples.real, left=0.0, right=0.0)
        im = np.interp(t, grid, self.samples.imag, left=0.0, right=0.0)
        return re + 1j * im

    def norm(self) -> float:
        """``int |f|^2 dt`` by the rectangle rule on the native grid."""
        if self.shape == "gaussian":
            h = self.width / 16
            t = np.arange(-self.half_support, self.half_support + h / 2, h)
            return float(np.sum(np.abs(self(t)) ** 2) * h)
        return float(np.sum(np.abs(self.samples) ** 2) * self.dt)

    def resample(self, dt: float) -> "PulseProfile":
        """Sampled copy on a grid of spacing ``dt`` (renormalized)."""
        n = 2 * int(np.ceil(self.half_support / dt)) + 1
        t = (np.arange(n) - (n - 1) / 2) * dt
        return PulseProfile.from_samples(self(t), dt, width=self.width)


@dataclass(frozen=True, eq=False)
class PulseTrain:
    """Pulse amplitudes ``A_j`` on a slot grid of period ``separation``."""

    amplitudes: np.ndarray
    separation: float
    profile: PulseProfile = field(default_factory=PulseProfile)

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.ndim != 1 or a.size == 0:
            raise ValueError("pulse train needs a non-empty 1-D amplitude array")
        if not np.all(np.isfinite(a)):
            raise ValueError("pulse amplitudes must be finite")
        if not self.separation > 0:
            raise ValueError("pulse separation must be > 0")
        if self.profile.width > self.separation / 10 * (1 + _REL):
            raise ValueError(
                f"pulse width {self.profile.width} exceeds separation/10 = {self.separation / 10}"
            )
        object.__setattr__(self, "amplitudes", a)

    @property
    def rep_rate(self) -> float:
        return 1.0 / self.separation

    def __len__(self) -> int:
        return self.amplitudes.size


def synth_pulse_train(
    profile: PulseProfile,
    separation: float,
    n_pulses: int,
    amp_stats: str = "thermal",
    mean_energy: float = 1.0,
    seed=None,
    amplitudes: Optional[Sequence[complex]] = None,
    phase: float = 0.0,
) -> PulseTrain:
    """Build a pulse train with thermal, coherent, or caller-supplied amplitudes.

    thermal: i.i.d. circular Gaussian ``A_j`` with ``<|A_j|^2> = mean_energy``.
    coherent: ``A_j = sqrt(mean_energy) * exp(i*phase)`` for every pulse.
    user: ``amplitudes`` as given (length must equal ``n_pulses``).
    """
    if amp_stats not in AMP_STATS:
        raise ValueError(f"unknown amplitude statistics {amp_stats!r}")
    if n_pulses < 1:
        raise ValueError("n_pulses must be >= 1")
    if abs(profile.norm() - 1.0) > NORM_TOL:
        raise ValueError("pulse profile not normalized")
    if amp_stats == "thermal":
        z = _rng(seed).standard_normal((2, n_pulses))
        amps = (z[0] + 1j * z[1]) * np.sqrt(mean_energy / 2.0)
    elif amp_stats == "coherent":
        amps = np.full(n_pulses, np.sqrt(mean_energy) * np.exp(1j * phase), dtype=complex)
    else:
        if amplitudes is None:
            raise ValueError("amp_stats='user' requires amplitudes")
        amps = np.asarray(amplitudes, dtype=complex)
        if amps.shape != (n_pulses,):
            raise ValueError(f"expected {n_pulses} user amplitudes, got {amps.size}")
    return PulseTrain(amps, separation, profile)


def estimate_gamma(a: FieldTrace, b: FieldTrace, tau_grid) -> np.ndarray:
    """Time-averaged normalized cross coherence ``<a*(t) b(t+tau)> / sqrt(Ia Ib)``.

    The traces are aligned on their common time window; lags are rounded to
    the sample grid and the largest-lag margin is discarded at both ends (no
    wraparound). The carrier factor ``exp(i*omega*tau)`` is restored so the
    result is directly comparable with :meth:`CoherenceModel.gamma`.
    Normalization uses the intensities over the windows that enter each lag,
    so the estimate obeys ``|gamma| <= 1`` and ``estimate_gamma(x, x, [0]) == 1``.
    """
    from .interferometer import common_window

    if abs(a.dt - b.dt) > _REL * a.dt:
        raise ValueError("traces must share dt")
    a, b = common_window(a, b)
    lags = _lags(tau_grid, a.dt)
    m = int(np.max(np.abs(lags))) if lags.size else 0
    n = len(a)
    if n - 2 * m < 1:
        raise ValueError(f"traces too short ({n} samples) for lags up to {m} samples")
    xa = a.samples[m:n - m]
    ia = np.mean(np.abs(xa) ** 2)
    out = np.empty(lags.size, dtype=complex)
    for i, k in enumerate(lags):
        xb = b.samples[m + k:n - m + k]
        ib = np.mean(np.abs(xb) ** 2)
        denom = np.sqrt(ia * ib)
        out[i] = np.vdot(xa, xb) / xa.size / denom if denom > 0 else 0.0
    return out * np.exp(1j * b.carrier * lags * a.dt)


def _lags(tau_grid, dt) -> np.ndarray:
    tau = np.atleast_1d(np.asarray(tau_grid, dtype=float))
    lags = np.rint(tau / dt).astype(int)
    if np.any(np.abs(lags * dt - tau) > 1e-6 * dt + 1e-9 * np.abs(tau)):
        raise ValueError("tau values must lie on the sample grid")
    return lags
