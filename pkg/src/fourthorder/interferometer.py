"""Delays, 50:50 beam splitters, and assembly of the detector input fields."""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .fields import (
    CoherenceModel,
    FieldTrace,
    SourceSpec,
    make_partially_coherent_pair,
    split_common_origin,
    synth_coherent,
    synth_thermal,
)

__all__ = [
    "DelayConfig",
    "ScenarioKind",
    "RegimeWarning",
    "BS_NORMALIZATION",
    "delay",
    "beam_split",
    "common_window",
    "regime_violations",
    "assemble_scenario",
]

# <I I'> of the literal 50:50 outputs is 1/4 of the source-intensity
# expansion used by the closed-form predictions.
BS_NORMALIZATION = 4.0

MUCH_GREATER = 10.0  # "a >> b" means a >= 10 b
COMPARABLE = 2.0  # "a ~ b" means |a - b| <= 2 Tc


class RegimeWarning(UserWarning):
    """Delays fall outside the asymptotic regime a scenario formula assumes."""


class ScenarioKind(str, enum.Enum):
    uncorrelated_sources = "uncorrelated_sources"
    astronomy = "astronomy"
    scenario_i = "scenario_i"
    scenario_ii = "scenario_ii"
    scenario_iii = "scenario_iii"
    scenario_iv = "scenario_iv"
    hom_mz = "hom_mz"
    pulsed = "pulsed"


@dataclass(frozen=True)
class DelayConfig:
    """The four path delays ``T1, T2, T1', T2'``; differences are always derived."""

    T1: float = 0.0
    T2: float = 0.0
    T1p: float = 0.0
    T2p: float = 0.0

    @property
    def dT(self) -> float:
        return self.T2 - self.T1

    @property
    def dTp(self) -> float:
        return self.T2p - self.T1p

    @property
    def dT1(self) -> float:
        return self.T1p - self.T1

    @property
    def dT2(self) -> float:
        return self.T2p - self.T2

    @property
    def dTbar1p(self) -> float:
        return self.T2p - self.T1

    @property
    def dTbar2p(self) -> float:
        return self.T2 - self.T1p

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.T1, self.T2, self.T1p, self.T2p)


def delay(x: FieldTrace, T: float) -> FieldTrace:
    """Return the field ``x(t + T)``.

    The envelope is relabelled in time by the nearest whole number of samples
    and multiplied by the exact carrier phase ``exp(i*omega*T)``, so fringes
    are never quantized even though the envelope shift is.
    """
    k = int(round(T / x.dt))
    if abs(k) >= len(x):
        raise ValueError(f"delay {T} exceeds the trace length {x.duration}")
    samples = x.samples * np.exp(1j * x.carrier * T) if (x.carrier and T) else x.samples
    return x.with_samples(samples, t0=(x.start_index - k) * x.dt)


def common_window(*traces: FieldTrace) -> Tuple[FieldTrace, ...]:
    """Crop traces on one sample grid to the time span they all cover."""
    dt = traces[0].dt
    for tr in traces[1:]:
        if abs(tr.dt - dt) > 1e-12 * dt:
            raise ValueError("traces must share dt")
    starts = [tr.start_index for tr in traces]
    stops = [s + len(tr) for s, tr in zip(starts, traces)]
    lo, hi = max(starts), min(stops)
    if hi <= lo:
        raise ValueError("traces do not overlap in time")
    return tuple(
        tr if (s == lo and len(tr) == hi - lo) else tr.with_samples(tr.samples[lo - s:hi - s], t0=lo * dt)
        for s, tr in zip(starts, traces)
    )


def beam_split(a: FieldTrace, b: FieldTrace) -> Tuple[FieldTrace, FieldTrace]:
    """Lossless 50:50 beam splitter: ``((a+b)/sqrt2, (a-b)/sqrt2)``."""
    if len(a) != len(b) or abs(a.dt - b.dt) > 1e-12 * a.dt or a.start_index != b.start_index:
        raise ValueError("beam_split inputs must share one sample grid (dt, t0, length)")
    if a.carrier != b.carrier:
        raise ValueError("beam_split inputs must share the carrier frequency")
    s = np.sqrt(0.5)
    nominal = 0.5 * (a.mean_intensity_nominal + b.mean_intensity_nominal)
    out1 = a.with_samples((a.samples + b.samples) * s, mean_intensity_nominal=nominal)
    out2 = a.with_samples((a.samples - b.samples) * s, mean_intensity_nominal=nominal)
    return out1, out2


def regime_violations(
    kind: ScenarioKind, delays: DelayConfig, Tc: float, resolve_time: Optional[float] = None
) -> list:
    """List the asymptotic-regime conditions of ``kind`` that ``delays`` break."""
    kind = ScenarioKind(kind)
    T1, T2, T1p, T2p = delays.as_tuple()
    scale = max(Tc, resolve_time or 0.0)
    far = MUCH_GREATER * scale
    near = COMPARABLE * Tc
    out = []

    def need(cond, text):
        if not cond:
            out.append(text)

    if kind is ScenarioKind.scenario_i:
        need(abs(T1 - T2) <= near, "T1 ~ T2")
        need(abs(T1p - T2p) <= near, "T1' ~ T2'")
        need(abs(T1 - T1p) >= far, "|T1 - T1'| >> Tc, T_R")
    elif kind is ScenarioKind.scenario_ii:
        need(abs(T1 - T1p) <= near, "T1 ~ T1'")
        need(abs(T2 - T2p) <= near, "T2 ~ T2'")
        need(abs(T1 - T2) >= far, "|T1 - T2| >> Tc, T_R")
    elif kind is ScenarioKind.scenario_iii:
        need(abs(T1 - T2p) <= near, "T1 ~ T2'")
        need(abs(T2 - T1p) <= near, "T2 ~ T1'")
        need(abs(T1 - T2) >= far, "|T1 - T2| >> Tc, T_R")
    elif kind is ScenarioKind.scenario_iv:
        need(resolve_time is not None and resolve_time >= MUCH_GREATER * Tc, "T_R >> Tc")
    elif kind is ScenarioKind.hom_mz:
        need(T1 == T1p and T2 == T2p, "T1 = T1' and T2 = T2'")
    return out


def _source_pair(
    sources: Sequence[SourceSpec],
    models: Sequence[CoherenceModel],
    n_dur: float,
    dt: float,
    seed: np.random.SeedSequence,
):
    """Synthesize ``(V10, V20)`` for the two-input interferometers."""
    sources = list(sources)
    if not sources:
        raise ValueError("at least one source spec is required")
    models = list(models)
    if not models:
        raise ValueError("at least one coherence model is required")
    omegas = {m.omega for m in models}
    if len(omegas) > 1:
        raise ValueError("all coherence models must share one carrier frequency")
    omega = omegas.pop()
    s_src, s_phase, s_b = seed.spawn(3)

    if sources[0].kind == "common_origin_split":
        if len(sources) > 1 and (sources[1].kind != "common_origin_split" or sources[1].I0 != sources[0].I0):
            raise ValueError("a common-origin pair needs two equal common_origin_split specs")
        origin = synth_thermal(models[0], 2.0 * sources[0].I0, n_dur, dt, s_src)
        return split_common_origin(origin, sources[0].random_phase, s_phase)

    if len(sources) != 2:
        raise ValueError("independent sources need exactly two specs")
    if sources[1].kind == "common_origin_split":
        raise ValueError("common_origin_split cannot be mixed with independent sources")
    traces = []
    model_iter = iter(models)
    model = models[0]
    for spec, ss in zip(sources, (s_src, s_b)):
        if spec.kind == "thermal":
            model = next(model_iter, model)
            traces.append(synth_thermal(model, spec.I0, n_dur, dt, ss))
        else:
            traces.append(synth_coherent(spec.I0, spec.alpha_phase, n_dur, dt, carrier=omega))
    if sources[1].random_phase:
        phi = np.random.default_rng(s_phase).uniform(0.0, 2.0 * np.pi)
        traces[1] = traces[1].with_samples(traces[1].samples * np.exp(1j * phi))
    return traces[0], traces[1]


def assemble_scenario(
    kind: ScenarioKind,
    sources: Sequence[SourceSpec],
    delays: DelayConfig,
    models: Sequence[CoherenceModel],
    seed=None,
    *,
    duration: float,
    dt: float,
    gamma_target: complex = 1.0,
    resolve_time: Optional[float] = None,
) -> Tuple[FieldTrace, FieldTrace]:
    """Build the two detector input fields ``(V, V')`` for one realization.

    Two-input scenarios follow the beam-splitter network

        V(t)  = [V10(t+T1) + V20(t+T2)]  / sqrt(2)
        V'(t) = [V10(t+T1') - V20(t+T2')] / sqrt(2)

    ``hom_mz`` forces ``T1' = T1`` and ``T2' = T2`` and mixes on one beam
    splitter. ``astronomy`` takes ``(stellar thermal, LO1 coherent, LO2
    coherent)`` and returns ``V + alpha1`` and ``Vbar + alpha2`` where
    ``(V, Vbar)`` has equal-time mutual coherence ``gamma_target``.

    Returned traces cover at least ``duration`` on a common grid. Violated
    regime conditions raise a :class:`RegimeWarning`, not an error.
    """
    kind = ScenarioKind(kind)
    if kind is ScenarioKind.pulsed:
        raise ValueError("pulsed scenarios use pulsed_coincidence_waveform, not trace assembly")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    models = list(models)

    if kind is ScenarioKind.astronomy:
        if len(sources) != 3 or sources[0].kind != "thermal" or any(s.kind != "coherent" for s in sources[1:]):
            raise ValueError("astronomy needs (thermal stellar source, coherent LO1, coherent LO2)")
        star, lo1, lo2 = sources
        v, vbar = make_partially_coherent_pair(models[0], gamma_target, star.I0, duration, dt, ss)
        a1 = np.sqrt(lo1.I0) * np.exp(1j * lo1.alpha_phase)
        a2 = np.sqrt(lo2.I0) * np.exp(1j * lo2.alpha_phase)
        return v.with_samples(v.samples + a1), vbar.with_samples(vbar.samples + a2)

    if kind is ScenarioKind.hom_mz:
        delays = DelayConfig(delays.T1, delays.T2, delays.T1, delays.T2)
    Tc = min(m.Tc for m in models) if models else 1.0
    problems = regime_violations(kind, delays, Tc, resolve_time)
    if problems:
        warnings.warn(f"{kind.value}: regime not satisfied: {', '.join(problems)}", RegimeWarning, stacklevel=2)

    T1, T2, T1p, T2p = delays.as_tuple()
    span = max(T1, T2, T1p, T2p) - min(T1, T2, T1p, T2p, 0.0)
    v10, v20 = _source_pair(sources, models, duration + span + 2 * dt, dt, ss)

    if kind is ScenarioKind.hom_mz:
        a, b = common_window(delay(v10, T1), delay(v20, T2))
        return beam_split(a, b)

    a, b, ap, bp = common_window(delay(v10, T1), delay(v20, T2), delay(v10, T1p), delay(v20, T2p))
    s = np.sqrt(0.5)
    nominal = 0.5 * (v10.mean_intensity_nominal + v20.mean_intensity_nominal)
    out = a.with_samples((a.samples + b.samples) * s, mean_intensity_nominal=nominal)
    outp = a.with_samples((ap.samples - bp.samples) * s, mean_intensity_nominal=nominal)
    return out, outp
