"""
Intensity detection and coincidence estimators
==============================================

Stationary traces: instantaneous intensities, time-resolved cross
correlations ``<Ia(t) Ib(t+tau)>`` pooled over realizations, and the
slow-detector rate (the correlation averaged over a one-sided window
``tau in [0, T_R]``).

Pulse trains: two independent routes to the coincidence rate.
:func:`pulsed_coincidence_amplitude` evaluates the closed amplitude-moment
sum directly from the pulse amplitudes; :func:`pulsed_coincidence_waveform`
builds sampled waveforms, passes them through the delay/beam-splitter
network, filters them with a rectangular detector response and integrates
the photocurrent product over a pulse-resolving coincidence window. The two
must agree within statistical error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .fields import FieldTrace, PulseProfile, PulseTrain, _lags, NORM_TOL
from .interferometer import BS_NORMALIZATION, DelayConfig

__all__ = [
    "DetectorSpec",
    "Moments",
    "CorrelationEstimate",
    "PulsedCoincidence",
    "intensity",
    "cross_correlate",
    "slow_detector_rate",
    "mean_photocurrent",
    "overlap_beta",
    "pulse_offsets",
    "pulsed_coincidence_amplitude",
    "pulsed_coincidence_waveform",
]


@dataclass(frozen=True)
class DetectorSpec:
    """Rectangular response ``k(t) = Q/T_R`` on ``[0, T_R)``."""

    resolve_time: float
    charge: float = 1.0

    def __post_init__(self):
        if not self.resolve_time > 0:
            raise ValueError(f"resolve_time must be > 0, got {self.resolve_time}")
        if not self.charge > 0:
            raise ValueError(f"charge must be > 0, got {self.charge}")


@dataclass
class Moments:
    """Running ``(count, sum, sum of squares)`` for pooling realizations.

    Merging is an elementwise sum, so any grouping of realizations yields the
    same pooled mean and standard error up to floating-point reassociation.
    """

    count: int = 0
    total: np.ndarray = 0.0
    total_sq: np.ndarray = 0.0

    def add(self, x) -> "Moments":
        x = np.asarray(x, dtype=float)
        self.count += 1
        self.total = self.total + x
        self.total_sq = self.total_sq + x * x
        return self

    def merge(self, other: "Moments") -> "Moments":
        return Moments(self.count + other.count, self.total + other.total, self.total_sq + other.total_sq)

    @property
    def mean(self) -> np.ndarray:
        return np.asarray(self.total) / self.count

    @property
    def stderr(self) -> np.ndarray:
        if self.count < 2:
            return np.full_like(np.asarray(self.mean, dtype=float), np.nan)
        n = self.count
        var = (np.asarray(self.total_sq) - n * self.mean ** 2) / (n - 1)
        return np.sqrt(np.clip(var, 0.0, None) / n)


@dataclass
class CorrelationEstimate:
    tau_grid: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    n_realizations: int
    n_time_samples: int

    def zscore(self, analytic) -> np.ndarray:
        return zscore(self.mean, self.stderr, analytic)


def zscore(mean, stderr, analytic, atol: float = 1e-9) -> np.ndarray:
    """``(mean - analytic) / stderr``; a zero stderr yields 0 or +-inf."""
    mean, stderr, analytic = np.broadcast_arrays(
        np.asarray(mean, float), np.asarray(stderr, float), np.asarray(analytic, float)
    )
    diff = mean - analytic
    with np.errstate(divide="ignore", invalid="ignore"):
        z = diff / stderr
    tiny = np.abs(diff) <= atol * np.maximum(1.0, np.abs(analytic))
    z = np.where(stderr > 0, z, np.where(tiny, 0.0, np.copysign(np.inf, diff)))
    return z


@dataclass
class PulsedCoincidence:
    """Coincidence rate and its six contributions, all in absolute units.

    ``rate = R11' + R22' + R12' + R1'2 - R1221 - R1212``; each interference
    entry already includes its complex conjugate.
    """

    rate: float
    components: Dict[str, float]
    stderr: float = float("nan")
    n_pulses: int = 0

    SIGNS = {"R11p": 1.0, "R22p": 1.0, "R12p": 1.0, "R1p2": 1.0, "R1221": -1.0, "R1212": -1.0}

    def component_sum(self) -> float:
        return float(sum(self.SIGNS[k] * v for k, v in self.components.items()))


def intensity(x: FieldTrace) -> np.ndarray:
    return x.intensity


def _as_2d(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[None, :] if x.ndim == 1 else x


def _per_realization(Ia: np.ndarray, Ib: np.ndarray, lags: np.ndarray) -> np.ndarray:
    n = Ia.shape[1]
    m = int(np.max(np.abs(lags)))
    xa = Ia[:, m:n - m]
    out = np.empty((Ia.shape[0], lags.size))
    for i, k in enumerate(lags):
        out[:, i] = np.einsum("rn,rn->r", xa, Ib[:, m + k:n - m + k]) / xa.shape[1]
    return out


def cross_correlate(Ia, Ib, dt: float, tau_grid, coherence_time: Optional[float] = None) -> CorrelationEstimate:
    """Estimate ``<Ia(t) Ib(t+tau)>`` on ``tau_grid``.

    ``Ia``/``Ib`` are intensity arrays of shape ``(n,)`` or
    ``(realizations, n)``. Every lag uses the same time window, the interior
    left after discarding the largest |lag| at both ends. With several
    realizations the standard error is the spread of per-realization time
    averages; a single trace uses ``duration / (2 Tc)`` effective samples
    when ``coherence_time`` is given (every sample otherwise).
    """
    Ia, Ib = _as_2d(Ia), _as_2d(Ib)
    if Ia.shape != Ib.shape:
        raise ValueError(f"intensity arrays differ in shape: {Ia.shape} vs {Ib.shape}")
    lags = _lags(tau_grid, dt)
    n = Ia.shape[1]
    m = int(np.max(np.abs(lags)))
    if n - 2 * m < 2:
        raise ValueError(f"trace of {n} samples is too short for |tau| up to {m * dt}")
    per = _per_realization(Ia, Ib, lags)
    r = per.shape[0]
    if r > 1:
        mean = per.mean(axis=0)
        stderr = per.std(axis=0, ddof=1) / np.sqrt(r)
    else:
        mean = per[0]
        window = n - 2 * m
        prods = np.stack([Ia[0, m:n - m] * Ib[0, m + k:n - m + k] for k in lags])
        n_eff = window if coherence_time is None else max(window * dt / (2 * coherence_time), 1.0)
        stderr = prods.std(axis=1, ddof=1) / np.sqrt(n_eff)
    return CorrelationEstimate(lags * dt, mean, stderr, r, n - 2 * m)


def slow_detector_rate(Ia, Ib, spec: DetectorSpec, dt: float, coherence_time: Optional[float] = None) -> float:
    """Coincidence rate seen by slow detectors, ``(1/T_R) int_0^T_R <Ia(t) Ib(t+tau)> dtau``.

    Equal to the mean of :func:`cross_correlate` over the lag grid
    ``0, dt, ..., T_R``, evaluated with a running sum in O(n).
    """
    if coherence_time is not None and spec.resolve_time < 10 * coherence_time:
        import warnings
        from .interferometer import RegimeWarning

        warnings.warn("slow-detector rate with T_R < 10 Tc", RegimeWarning, stacklevel=2)
    Ia = np.asarray(Ia, dtype=float)
    Ib = np.asarray(Ib, dtype=float)
    if Ia.ndim != 1 or Ia.shape != Ib.shape:
        raise ValueError("slow_detector_rate takes two 1-D intensity arrays of equal length")
    K = int(round(spec.resolve_time / dt))
    n = Ia.size
    if n - 2 * K < 2:
        raise ValueError(f"trace of {n} samples is too short for T_R = {spec.resolve_time}")
    c = np.concatenate(([0.0], np.cumsum(Ib)))
    idx = np.arange(K, n - K)
    window_sum = c[idx + K + 1] - c[idx]
    return float(np.dot(Ia[K:n - K], window_sum) / ((K + 1) * idx.size))


def mean_photocurrent(train: PulseTrain, spec: DetectorSpec) -> float:
    """Long-time average photocurrent ``Q * Rp * <|A_j|^2>_j``."""
    if len(train.amplitudes) == 0:
        raise ValueError("empty pulse train")
    return float(spec.charge * train.rep_rate * np.mean(np.abs(train.amplitudes) ** 2))


def overlap_beta(f: PulseProfile, g: PulseProfile, offset: float = 0.0) -> complex:
    """Mode-match factor ``beta(s) = int f*(t) g(t+s) dt`` by quadrature.

    The sum runs on a uniform grid covering both supports; it is divided by
    the discrete norms of the two sampled profiles (both 1 to within the
    quadrature error for normalized input), which keeps the discrete
    Cauchy bound ``|beta| <= 1``.
    """
    for p in (f, g):
        if abs(p.norm() - 1.0) > NORM_TOL:
            raise ValueError("overlap_beta needs normalized profiles")
    h = min(f.width, g.width) / 16
    for p in (f, g):
        if p.shape == "user_sampled":
            h = min(h, p.dt / 4)
    lo = min(-f.half_support, -g.half_support - offset)
    hi = max(f.half_support, g.half_support - offset)
    t = np.arange(lo, hi + h, h)
    fs = f(t)
    gs = g(t + offset)
    nf = np.sum(np.abs(fs) ** 2)
    ng = np.sum(np.abs(gs) ** 2)
    if nf == 0 or ng == 0:
        return 0j
    return complex(np.vdot(fs, gs) / np.sqrt(nf * ng))


def pulse_offsets(T: float, separation: float):
    """Split a delay ``T = N * separation + d`` with integer ``N`` and ``|d| <= separation/2``."""
    N = int(np.floor(T / separation + 0.5))
    return N, T - N * separation


def _valid_slots(n: int, offsets) -> np.ndarray:
    lo = max(0, -min(offsets))
    hi = min(n, n - max(offsets))
    if hi - lo < 1:
        raise ValueError("pulse offsets leave no slot with all four pulses in the train")
    return np.arange(lo, hi)


def pulsed_coincidence_amplitude(
    A,
    B,
    offsets,
    beta: complex,
    beta_prime: complex,
    spec: DetectorSpec,
    rep_rate: float = 1.0,
) -> PulsedCoincidence:
    """Coincidence rate from pulse amplitudes and mode-match factors.

    Parameters
    ----------
    A, B : array_like of complex
        Pulse amplitudes of the two input trains.
    offsets : (N1, N2, N1', N2')
        Whole-slot parts of the four delays.
    beta, beta_prime : complex
        Overlap factors at the two detectors, ``beta(d2 - d1)`` and
        ``beta(d2' - d1')``.
    spec : DetectorSpec
        Only the charge ``Q`` enters.
    rep_rate : float
        Pulse repetition rate ``Rp``.

    Notes
    -----
    Slots ``j`` run over indices with all four shifted pulses inside the
    trains. The standard error treats the per-slot summands as independent.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
        raise ValueError("pulse amplitudes contain NaN or inf")
    if A.size != B.size:
        raise ValueError("pulse trains must have equal length")
    if abs(beta) > 1 + 1e-9 or abs(beta_prime) > 1 + 1e-9:
        raise ValueError("|beta| must not exceed 1")
    N1, N2, N1p, N2p = (int(k) for k in offsets)
    j = _valid_slots(A.size, (N1, N2, N1p, N2p))
    a1, a1p = A[j + N1], A[j + N1p]
    b2, b2p = B[j + N2], B[j + N2p]
    p1, p1p, p2, p2p = (np.abs(x) ** 2 for x in (a1, a1p, b2, b2p))
    terms = {
        "R11p": p1 * p1p,
        "R22p": p2 * p2p,
        "R12p": p1 * p2p,
        "R1p2": p1p * p2,
        "R1221": 2.0 * np.real(beta * np.conj(beta_prime) * np.conj(a1) * b2 * np.conj(b2p) * a1p),
        "R1212": 2.0 * np.real(beta * beta_prime * np.conj(a1) * b2 * np.conj(a1p) * b2p),
    }
    scale = rep_rate * spec.charge ** 2
    per_slot = sum(PulsedCoincidence.SIGNS[k] * v for k, v in terms.items()) * scale
    components = {k: float(np.mean(v) * scale) for k, v in terms.items()}
    stderr = float(per_slot.std(ddof=1) / np.sqrt(j.size)) if j.size > 1 else float("nan")
    return PulsedCoincidence(float(np.mean(per_slot)), components, stderr, int(j.size))


def _arm_waveform(train: PulseTrain, T: float, t: np.ndarray) -> np.ndarray:
    """Samples of ``V(t + T) = sum_i A_i f(t + T - i*sep)`` on grid ``t``."""
    sep = train.separation
    s = t + T
    i0 = np.floor(s / sep + 0.5).astype(int)
    out = np.zeros(t.size, dtype=complex)
    reach = int(np.ceil(train.profile.half_support / sep))
    for di in range(-reach, reach + 1):
        i = i0 + di
        ok = (i >= 0) & (i < len(train))
        out[ok] += train.amplitudes[i[ok]] * train.profile(s[ok] - i[ok] * sep)
    return out


def pulsed_coincidence_waveform(
    trainA: PulseTrain,
    trainB: PulseTrain,
    delays: DelayConfig,
    spec: DetectorSpec,
    samples_per_width: int = 8,
) -> PulsedCoincidence:
    """Brute-force coincidence rate from sampled waveforms.

    Both trains are rendered on a fine time grid, combined as
    ``V = [V1(t+T1) + V2(t+T2)]/sqrt2`` and ``V' = [V1(t+T1') - V2(t+T2')]/sqrt2``,
    converted to photocurrents by a rectangular response of width ``T_R``, and
    correlated over the window ``|tau| < separation/2`` so that only pulses of
    the same slot pair up. The result is reported in the normalization of the
    amplitude-moment sum (the beam-splitter factor 1/4 is removed).

    Only the total rate is measured; the components are left empty.
    """
    sep = trainA.separation
    if abs(trainB.separation - sep) > 1e-12 * sep or len(trainA) != len(trainB):
        raise ValueError("pulse trains must share separation and length")
    TR = spec.resolve_time
    if TR >= sep:
        raise ValueError(f"T_R = {TR} >= pulse separation {sep}: detectors cannot resolve pulses")
    parts = [pulse_offsets(T, sep) for T in delays.as_tuple()]
    N = [p[0] for p in parts]
    d = [p[1] for p in parts]
    width = max(trainA.profile.extent, trainB.profile.extent)
    spread = (max(d) - min(d)) + TR + 2 * width
    if spread > sep / 2:
        raise ValueError(
            f"pulse-resolving assumption violated: delay spread + T_R + pulse extent = {spread} > separation/2"
        )

    j = _valid_slots(len(trainA), N)
    h = min(trainA.profile.width, trainB.profile.width) / samples_per_width
    spp = int(np.ceil(sep / h))
    h = sep / spp
    # slot j is the interval of length sep centred on its detector activity,
    # which spans [j*sep - max(d) - width, j*sep - min(d) + width + T_R]
    centre = 0.5 * (TR - max(d) - min(d))
    t = (j[0] - 0.5) * sep + centre + h * np.arange(j.size * spp)
    T1, T2, T1p, T2p = delays.as_tuple()
    v = (_arm_waveform(trainA, T1, t) + _arm_waveform(trainB, T2, t)) / np.sqrt(2.0)
    vp = (_arm_waveform(trainA, T1p, t) - _arm_waveform(trainB, T2p, t)) / np.sqrt(2.0)
    I = np.abs(v) ** 2
    Ip = np.abs(vp) ** 2

    def photocurrent(x):
        k = max(int(round(TR / h)), 1)
        c = np.concatenate(([0.0], np.cumsum(x)))
        idx = np.arange(x.size)
        lo = np.maximum(idx - k + 1, 0)
        return (c[idx + 1] - c[lo]) * h * (spec.charge / (k * h))

    i1 = photocurrent(I)
    i2 = photocurrent(Ip)
    half = spp // 2
    c2 = np.concatenate(([0.0], np.cumsum(i2)))
    idx = np.arange(i1.size)
    lo = np.clip(idx - half, 0, i1.size)
    hi = np.clip(idx + half + 1, 0, i1.size)
    window = (c2[hi] - c2[lo]) * h
    per_slot = (i1 * window).reshape(j.size, spp).sum(axis=1) * h
    per_slot = per_slot * (BS_NORMALIZATION / sep)
    stderr = float(per_slot.std(ddof=1) / np.sqrt(j.size)) if j.size > 1 else float("nan")
    return PulsedCoincidence(float(per_slot.mean()), {}, stderr, int(j.size))
