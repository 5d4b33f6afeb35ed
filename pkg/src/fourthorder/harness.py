"""
Configuration-driven sweep runner
=================================

A run is described by one YAML document (schema in the README). The runner
sweeps a single variable, draws an independent Monte-Carlo ensemble at each
sweep point, evaluates the closed-form prediction at the same point and
reports per-point z-scores.

Random streams are keyed by ``(sweep index, realization index)`` through
``numpy.random.SeedSequence(master_seed, spawn_key=...)``. Per-realization
values are collected and reduced in index order, so the numbers written to
disk do not depend on the worker count.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import yaml
from scipy.optimize import curve_fit

from . import oracle
from .detection import (
    DetectorSpec,
    cross_correlate,
    overlap_beta,
    pulse_offsets,
    pulsed_coincidence_amplitude,
    pulsed_coincidence_waveform,
    slow_detector_rate,
    zscore,
)
from .fields import CoherenceModel, PulseProfile, SourceSpec, synth_pulse_train
from .interferometer import (
    BS_NORMALIZATION,
    DelayConfig,
    RegimeWarning,
    ScenarioKind,
    assemble_scenario,
    regime_violations,
)
from .io import write_columns, write_json_summary

__all__ = [
    "ConfigError",
    "SweepPointError",
    "SweepSpec",
    "EnsembleSpec",
    "PulsedSpec",
    "FitSpec",
    "ExperimentConfig",
    "FringeFit",
    "ComparisonRow",
    "ComparisonReport",
    "load_config",
    "parse_config",
    "bundled_configs",
    "bundled_config_path",
    "run_sweep",
    "fit_fringe",
    "emit_outputs",
]

SWEEP_VARIABLES = ("T1", "T2", "T1p", "T2p", "tau", "delta_phi_alpha")
DELAY_NAMES = ("T1", "T2", "T1p", "T2p")
Z_POINT = 3.0
Z_MAX = 4.0
DATA_COLUMNS = ("sweep_value", "mc_mean", "mc_stderr", "analytic", "z")

# Bundled-config defaults (artifact choices: unit intensity, unit coherence
# time, carrier 50/Tc, 20 samples per Tc).
DEFAULT_I0 = 1.0
DEFAULT_TC = 1.0
DEFAULT_OMEGA = 50.0
DEFAULT_DT = 0.05
DEFAULT_DURATION = 500.0
DEFAULT_REALIZATIONS = 100


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending entry."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class SweepPointError(RuntimeError):
    """A module error raised while evaluating one sweep point."""

    def __init__(self, index: int, variable: str, value: float, cause: BaseException):
        super().__init__(f"sweep point {index} ({variable} = {value!r}): {type(cause).__name__}: {cause}")
        self.index = index
        self.value = value


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: float
    stop: float
    steps: int
    link: Tuple[str, ...] = ()

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class EnsembleSpec:
    realizations: int = DEFAULT_REALIZATIONS
    duration: float = DEFAULT_DURATION
    dt: float = DEFAULT_DT
    seed: int = 0


@dataclass(frozen=True)
class PulsedSpec:
    """Pulse-train settings; lengths are in units of the time axis."""

    width: float = 1.0
    separation: float = 40.0
    n_pulses: int = 2000
    amp_stats: Tuple[str, str] = ("thermal", "thermal")
    mean_energy: Tuple[float, float] = (1.0, 1.0)
    estimator: str = "amplitude"
    samples_per_width: int = 8


@dataclass(frozen=True)
class FitSpec:
    period: float
    fit_period: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    scenario: ScenarioKind
    sources: Tuple[SourceSpec, ...]
    coherence: Tuple[CoherenceModel, ...]
    delays: DelayConfig
    sweep: SweepSpec
    ensemble: EnsembleSpec
    tau: float = 0.0
    gamma: complex = 1.0
    delta_phi_alpha: float = 0.0
    detector: Optional[DetectorSpec] = None
    pulsed: Optional[PulsedSpec] = None
    fit: Optional[FitSpec] = None
    data_path: str = ""
    summary_path: str = ""
    description: str = ""
    applied_defaults: Tuple[str, ...] = ()

    def with_overrides(
        self,
        realizations: Optional[int] = None,
        seed: Optional[int] = None,
    ) -> "ExperimentConfig":
        ens = self.ensemble
        if realizations is not None:
            if realizations < 1:
                raise ConfigError("must be >= 1", "ensemble.realizations")
            ens = replace(ens, realizations=int(realizations))
        if seed is not None:
            ens = replace(ens, seed=int(seed))
        return replace(self, ensemble=ens)


_TOP_KEYS = {
    "name", "description", "scenario", "sources", "coherence", "delays", "tau", "gamma",
    "delta_phi_alpha", "sweep", "ensemble", "detector", "pulsed", "fit", "output",
}


class _Reader:
    """Pull typed values out of nested mappings while recording defaults."""

    def __init__(self):
        self.defaults: List[str] = []

    def table(self, raw, path: str, allowed) -> dict:
        if raw is None:
            return {}
        if not isinstance(raw, dict):
            raise ConfigError("expected a mapping", path)
        unknown = sorted(set(raw) - set(allowed))
        if unknown:
            raise ConfigError(f"unknown key(s) {unknown}", path or "<top level>")
        return raw

    def get(self, tbl: dict, key: str, path: str, kind, default=None, required=False):
        name = f"{path}.{key}" if path else key
        if key not in tbl or tbl[key] is None:
            if required:
                raise ConfigError("is required", name)
            self.defaults.append(name)
            return default
        value = tbl[key]
        try:
            if kind is float:
                if isinstance(value, bool):
                    raise TypeError
                out = float(value)
                if not math.isfinite(out):
                    raise ConfigError("must be finite", name)
                return out
            if kind is int:
                if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                    raise TypeError
                return int(value)
            if kind is bool:
                if not isinstance(value, bool):
                    raise TypeError
                return value
            if kind is str:
                if not isinstance(value, str):
                    raise TypeError
                return value
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"expected {kind.__name__}, got {value!r}", name) from None
        return value


def _complex(value, name: str) -> complex:
    if isinstance(value, dict):
        extra = set(value) - {"abs", "phase"}
        if extra or "abs" not in value:
            raise ConfigError("expected {abs, phase} or a number", name)
        return complex(float(value["abs"]) * np.exp(1j * float(value.get("phase", 0.0))))
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    raise ConfigError(f"expected a number, [re, im] or {{abs, phase}}, got {value!r}", name)


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    """Parse and validate a YAML configuration document."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark is not None else ""
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"YAML parse error in {source}{where}: {problem}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    rd = _Reader()
    top = rd.table(raw, "", _TOP_KEYS)

    try:
        scenario = ScenarioKind(rd.get(top, "scenario", "", str, required=True))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"unknown scenario; expected one of {[k.value for k in ScenarioKind]}", "scenario") from None
    name = rd.get(top, "name", "", str, default=Path(source).stem if source != "<string>" else scenario.value)
    description = rd.get(top, "description", "", str, default="")

    # sources
    raw_sources = top.get("sources")
    if raw_sources is None:
        rd.defaults.append("sources")
        default_kind = "common_origin_split" if scenario in (
            ScenarioKind.scenario_i, ScenarioKind.scenario_iii, ScenarioKind.scenario_iv
        ) else "thermal"
        if scenario is ScenarioKind.astronomy:
            raw_sources = [{"kind": "thermal"}, {"kind": "coherent"}, {"kind": "coherent"}]
        elif default_kind == "common_origin_split":
            raw_sources = [{"kind": default_kind, "random_phase": True}]
        else:
            raw_sources = [{"kind": "thermal"}, {"kind": "thermal"}]
    if not isinstance(raw_sources, list) or not raw_sources:
        raise ConfigError("expected a non-empty list", "sources")
    sources = []
    for i, s in enumerate(raw_sources):
        p = f"sources[{i}]"
        t = rd.table(s, p, {"kind", "I0", "alpha_phase", "random_phase"})
        try:
            sources.append(
                SourceSpec(
                    rd.get(t, "kind", p, str, default="thermal"),
                    rd.get(t, "I0", p, float, default=DEFAULT_I0),
                    rd.get(t, "alpha_phase", p, float, default=0.0),
                    rd.get(t, "random_phase", p, bool, default=False),
                )
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc), p) from None
    if sources[0].kind == "common_origin_split" and len(sources) == 1:
        sources.append(sources[0])

    # coherence
    raw_coh = top.get("coherence")
    if raw_coh is None:
        rd.defaults.append("coherence")
        raw_coh = [{}]
    if isinstance(raw_coh, dict):
        raw_coh = [raw_coh]
    if not isinstance(raw_coh, list) or not raw_coh:
        raise ConfigError("expected a mapping or a non-empty list", "coherence")
    models = []
    for i, c in enumerate(raw_coh):
        p = f"coherence[{i}]"
        t = rd.table(c, p, {"shape", "Tc", "omega"})
        shape = rd.get(t, "shape", p, str, default="gaussian")
        Tc = rd.get(t, "Tc", p, float, default=DEFAULT_TC)
        omega = rd.get(t, "omega", p, float, default=DEFAULT_OMEGA / Tc if Tc > 0 else DEFAULT_OMEGA)
        if not Tc > 0:
            raise ConfigError(f"must be > 0, got {Tc}", f"{p}.Tc")
        try:
            models.append(CoherenceModel(shape, Tc, omega))
        except ValueError as exc:
            raise ConfigError(str(exc), p) from None
    if len({m.omega for m in models}) > 1:
        raise ConfigError("all coherence models must share one omega", "coherence")

    t = rd.table(top.get("delays"), "delays", DELAY_NAMES)
    delays = DelayConfig(*(rd.get(t, k, "delays", float, default=0.0) for k in DELAY_NAMES))
    tau = rd.get(top, "tau", "", float, default=0.0)
    delta_phi_alpha = rd.get(top, "delta_phi_alpha", "", float, default=0.0)
    if top.get("gamma") is None:
        rd.defaults.append("gamma")
        gamma = 1.0 + 0j
    else:
        gamma = _complex(top["gamma"], "gamma")
        if abs(gamma) > 1 + 1e-12:
            raise ConfigError(f"|gamma| must be <= 1, got {abs(gamma)}", "gamma")

    sweep = _parse_sweep(rd, top.get("sweep"), scenario)

    t = rd.table(top.get("ensemble"), "ensemble", {"realizations", "duration", "dt", "seed"})
    ensemble = EnsembleSpec(
        rd.get(t, "realizations", "ensemble", int, default=DEFAULT_REALIZATIONS),
        rd.get(t, "duration", "ensemble", float, default=DEFAULT_DURATION * min(m.Tc for m in models)),
        rd.get(t, "dt", "ensemble", float, default=DEFAULT_DT * min(m.Tc for m in models)),
        rd.get(t, "seed", "ensemble", int, default=0),
    )
    if ensemble.realizations < 1:
        raise ConfigError("must be >= 1", "ensemble.realizations")
    if not ensemble.duration > 0:
        raise ConfigError("must be > 0", "ensemble.duration")
    if not ensemble.dt > 0:
        raise ConfigError("must be > 0", "ensemble.dt")
    if ensemble.seed < 0:
        raise ConfigError("must be >= 0", "ensemble.seed")

    detector = None
    if top.get("detector") is not None or scenario in (ScenarioKind.scenario_iv, ScenarioKind.pulsed):
        t = rd.table(top.get("detector"), "detector", {"resolve_time", "charge"})
        default_tr = 200.0 * models[0].Tc if scenario is ScenarioKind.scenario_iv else 5.0
        try:
            detector = DetectorSpec(
                rd.get(t, "resolve_time", "detector", float, default=default_tr),
                rd.get(t, "charge", "detector", float, default=1.0),
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc), "detector") from None

    pulsed = None
    if scenario is ScenarioKind.pulsed:
        pulsed = _parse_pulsed(rd, top.get("pulsed"))
    elif top.get("pulsed") is not None:
        raise ConfigError("only valid for the pulsed scenario", "pulsed")

    fit = None
    if top.get("fit") is not None:
        t = rd.table(top["fit"], "fit", {"period", "fit_period"})
        period = rd.get(t, "period", "fit", float, default=2 * np.pi / models[0].omega if models[0].omega > 0 else None)
        if period is None or not period > 0:
            raise ConfigError("must be > 0", "fit.period")
        fit = FitSpec(period, rd.get(t, "fit_period", "fit", bool, default=False))

    t = rd.table(top.get("output"), "output", {"data", "summary"})
    data_path = rd.get(t, "data", "output", str, default=f"{name}.dat")
    summary_path = rd.get(t, "summary", "output", str, default=f"{name}.summary.json")

    cfg = ExperimentConfig(
        name=name,
        scenario=scenario,
        sources=tuple(sources),
        coherence=tuple(models),
        delays=delays,
        sweep=sweep,
        ensemble=ensemble,
        tau=tau,
        gamma=gamma,
        delta_phi_alpha=delta_phi_alpha,
        detector=detector,
        pulsed=pulsed,
        fit=fit,
        data_path=data_path,
        summary_path=summary_path,
        description=description,
        applied_defaults=tuple(rd.defaults),
    )
    _check_consistency(cfg)
    return cfg


def _parse_sweep(rd: _Reader, raw, scenario: ScenarioKind) -> SweepSpec:
    if raw is None:
        raise ConfigError("is required", "sweep")
    if not isinstance(raw, dict):
        raise ConfigError("expected a mapping", "sweep")
    var = raw.get("variable")
    if isinstance(var, list):
        if len(var) != 1:
            raise ConfigError(f"exactly one swept variable allowed, got {len(var)}: {', '.join(map(str, var))}", "sweep.variable")
        var = var[0]
    extra_swept = [k for k in SWEEP_VARIABLES if k in raw]
    if extra_swept:
        names = ([var] if var else []) + extra_swept
        raise ConfigError(
            f"exactly one swept variable allowed, got {len(names)}: {', '.join(map(str, names))}", "sweep"
        )
    t = rd.table(raw, "sweep", {"variable", "start", "stop", "steps", "link"})
    if var is None:
        raise ConfigError("is required", "sweep.variable")
    if var not in SWEEP_VARIABLES:
        raise ConfigError(f"unknown variable {var!r}; expected one of {SWEEP_VARIABLES}", "sweep.variable")
    start = rd.get(t, "start", "sweep", float, required=True)
    stop = rd.get(t, "stop", "sweep", float, required=True)
    steps = rd.get(t, "steps", "sweep", int, required=True)
    if steps < 2:
        raise ConfigError(f"must be >= 2, got {steps}", "sweep.steps")
    link = t.get("link") or []
    if isinstance(link, str):
        link = [link]
    if not isinstance(link, list) or any(k not in DELAY_NAMES for k in link):
        raise ConfigError(f"link entries must be delay names {DELAY_NAMES}", "sweep.link")
    if link and var not in DELAY_NAMES:
        raise ConfigError("only delay sweeps can be linked", "sweep.link")
    if var in link:
        raise ConfigError("a variable cannot be linked to itself", "sweep.link")
    if scenario is ScenarioKind.pulsed and var in ("tau", "delta_phi_alpha"):
        raise ConfigError("pulsed sweeps must vary a delay", "sweep.variable")
    if var == "delta_phi_alpha" and scenario is not ScenarioKind.astronomy:
        raise ConfigError("delta_phi_alpha applies to the astronomy scenario only", "sweep.variable")
    return SweepSpec(var, start, stop, steps, tuple(link))


def _parse_pulsed(rd: _Reader, raw) -> PulsedSpec:
    t = rd.table(raw, "pulsed", {"width", "separation", "n_pulses", "amp_stats", "mean_energy", "estimator", "samples_per_width"})
    d = PulsedSpec()
    amp = t.get("amp_stats", None)
    if amp is None:
        rd.defaults.append("pulsed.amp_stats")
        amp = d.amp_stats
    elif isinstance(amp, str):
        amp = (amp, amp)
    energy = t.get("mean_energy", None)
    if energy is None:
        rd.defaults.append("pulsed.mean_energy")
        energy = d.mean_energy
    elif isinstance(energy, (int, float)):
        energy = (float(energy), float(energy))
    if len(amp) != 2 or amp[0] != amp[1] or amp[0] not in ("thermal", "coherent"):
        raise ConfigError("expected thermal or coherent, the same for both trains", "pulsed.amp_stats")
    if len(energy) != 2 or any(not float(e) > 0 for e in energy):
        raise ConfigError("expected two positive energies", "pulsed.mean_energy")
    spec = PulsedSpec(
        rd.get(t, "width", "pulsed", float, default=d.width),
        rd.get(t, "separation", "pulsed", float, default=d.separation),
        rd.get(t, "n_pulses", "pulsed", int, default=d.n_pulses),
        tuple(amp),
        tuple(float(e) for e in energy),
        rd.get(t, "estimator", "pulsed", str, default=d.estimator),
        rd.get(t, "samples_per_width", "pulsed", int, default=d.samples_per_width),
    )
    if spec.estimator not in ("amplitude", "waveform"):
        raise ConfigError("expected 'amplitude' or 'waveform'", "pulsed.estimator")
    if not spec.width > 0:
        raise ConfigError("must be > 0", "pulsed.width")
    if spec.width > spec.separation / 10:
        raise ConfigError("pulse width must be <= separation/10", "pulsed.width")
    if spec.n_pulses < 10:
        raise ConfigError("must be >= 10", "pulsed.n_pulses")
    return spec


def _check_consistency(cfg: ExperimentConfig) -> None:
    kind = cfg.scenario
    src = cfg.sources
    if kind is ScenarioKind.astronomy:
        if len(src) != 3 or src[0].kind != "thermal" or src[1].kind != "coherent" or src[2].kind != "coherent":
            raise ConfigError("astronomy needs [thermal, coherent, coherent]", "sources")
    elif kind is ScenarioKind.pulsed:
        pass
    elif len(src) != 2:
        raise ConfigError("two-input scenarios need two sources", "sources")
    if kind in (ScenarioKind.uncorrelated_sources, ScenarioKind.scenario_ii, ScenarioKind.hom_mz):
        if src[0].kind == "common_origin_split":
            raise ConfigError(f"{kind.value} assumes independent inputs", "sources")
    if kind is ScenarioKind.hom_mz and cfg.sweep.variable in ("T1p", "T2p"):
        raise ConfigError("hom_mz ties T1' = T1 and T2' = T2; sweep T1, T2 or tau", "sweep.variable")
    if cfg.scenario is ScenarioKind.scenario_iv and cfg.sweep.variable == "tau":
        raise ConfigError("slow-detector rates integrate over tau; sweep a delay", "sweep.variable")
    if cfg.sweep.variable == "tau":
        lags = cfg.sweep.values / cfg.ensemble.dt
        if np.max(np.abs(lags - np.round(lags))) > 1e-6:
            raise ConfigError("tau values must be multiples of ensemble.dt", "sweep")
    elif abs(cfg.tau / cfg.ensemble.dt - round(cfg.tau / cfg.ensemble.dt)) > 1e-6:
        raise ConfigError("must be a multiple of ensemble.dt", "tau")
    if kind is not ScenarioKind.pulsed:
        Tc = min(m.Tc for m in cfg.coherence)
        if cfg.ensemble.dt > Tc / 20 * (1 + 1e-12):
            raise ConfigError(f"must be <= Tc/20 = {Tc / 20}", "ensemble.dt")
        if cfg.ensemble.duration < 100 * max(m.Tc for m in cfg.coherence) * (1 - 1e-12):
            raise ConfigError("must be >= 100 Tc", "ensemble.duration")


def load_config(path) -> ExperimentConfig:
    """Read, parse and validate a YAML configuration file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from None
    return parse_config(text, str(path))


def bundled_configs() -> List[str]:
    """Names of the configurations shipped with the package."""
    root = resources.files("fourthorder") / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def bundled_config_path(name: str) -> Path:
    root = resources.files("fourthorder") / "configs"
    p = root / (name if name.endswith(".yaml") else f"{name}.yaml")
    if not p.is_file():
        raise ConfigError(f"no bundled config named {name!r}; available: {bundled_configs()}")
    return Path(str(p))


# --------------------------------------------------------------------------
# per-point evaluation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class _Point:
    delays: DelayConfig
    tau: float
    delta_phi_alpha: float


def _point(cfg: ExperimentConfig, x: float) -> _Point:
    var = cfg.sweep.variable
    d = cfg.delays
    tau, dpa = cfg.tau, cfg.delta_phi_alpha
    if var in DELAY_NAMES:
        d = replace(d, **{k: x for k in (var,) + cfg.sweep.link})
    elif var == "tau":
        tau = x
    else:
        dpa = x
    if cfg.scenario is ScenarioKind.hom_mz:
        d = replace(d, T1p=d.T1, T2p=d.T2)
    return _Point(d, tau, dpa)


def _source_models(cfg: ExperimentConfig) -> List[Optional[CoherenceModel]]:
    """Coherence model of each input, assigned as the scenario assembler does."""
    models = list(cfg.coherence)
    it = iter(models)
    out = []
    current = models[0]
    for s in cfg.sources[:2]:
        if s.kind == "thermal":
            current = next(it, current)
            out.append(current)
        elif s.kind == "common_origin_split":
            out.append(models[0])
        else:
            out.append(None)
    return out


def _snap(T: float, dt: float) -> float:
    return round(T / dt) * dt


class _Gamma:
    """Coherence function of one input as realized on the sample grid.

    Delays move the envelope by whole samples and carry the exact carrier
    phase, so the envelope is evaluated at the snapped delay difference.
    """

    def __init__(self, model: Optional[CoherenceModel], omega: float, dt: float):
        self.model = model
        self.omega = omega
        self.dt = dt

    def __call__(self, t_from: float, t_to: float, lag: float = 0.0) -> complex:
        exact = t_to - t_from + lag
        grid = _snap(t_to, self.dt) - _snap(t_from, self.dt) + lag
        env = 1.0 if self.model is None else float(self.model.envelope(grid))
        return complex(env * np.exp(1j * self.omega * exact))

    @property
    def thermal(self) -> bool:
        return self.model is not None


def _analytic(cfg: ExperimentConfig, pt: _Point) -> float:
    kind = cfg.scenario
    omega = cfg.coherence[0].omega
    dt = cfg.ensemble.dt
    T1, T2, T1p, T2p = pt.delays.as_tuple()
    tau = pt.tau

    if kind is ScenarioKind.astronomy:
        star, lo1, lo2 = cfg.sources
        g = cfg.gamma * float(cfg.coherence[0].envelope(tau))
        ac = oracle.AstroConfig(star.I0, lo1.I0, lo2.I0, pt.delta_phi_alpha, g)
        matched = np.allclose((lo1.I0, lo2.I0), star.I0, rtol=1e-12, atol=0)
        return oracle.predict_astronomy(ac, matched=matched).value

    s1, s2 = cfg.sources[:2]
    I10, I20 = s1.I0, s2.I0
    m1, m2 = _source_models(cfg)
    g1 = _Gamma(m1, omega, dt)
    g2 = _Gamma(m2, omega, dt)
    common = s1.kind == "common_origin_split"

    def lam(g: _Gamma, a, b, lag):
        return abs(g(a, b, lag)) ** 2 if g.thermal else 0.0

    if kind in (ScenarioKind.uncorrelated_sources, ScenarioKind.scenario_ii, ScenarioKind.hom_mz):
        # gamma_jj(dT_j + tau) with dT_j = T_j - T_j' ; the lag runs from T_j' + tau back to T_j
        a1 = g1(T1, T1p, tau)
        a2 = g2(T2, T2p, tau)
        l1 = lam(g1, T1, T1p, tau)
        l2 = lam(g2, T2, T2p, tau)
        if kind is ScenarioKind.uncorrelated_sources:
            return oracle.predict_uncorrelated(I10, I20, l1, l2, a1, a2).value
        return oracle.predict_scenario_ii(I10, I20, l1, l2, a1, a2).value

    if kind in (ScenarioKind.scenario_i, ScenarioKind.scenario_iv):
        if common:
            # gamma_12(dT): V10(t+T1)* V20(t+T2), with V20 = V10 up to a phase
            a = g1(T1, T2)
            b = g1(T1p, T2p)
        else:
            a = b = 0j
        if kind is ScenarioKind.scenario_i:
            return oracle.predict_scenario_i(I10, I20, a, b).value
        return oracle.predict_scenario_iv(I10, I20, a, b).value

    if kind is ScenarioKind.scenario_iii:
        if not common:
            return oracle.predict_scenario_iii(I10, I20, 0j, 0j).value
        # gamma_12(dTbar1' + tau): V10(t+T1)* against V20(t+T2'+tau)
        g12 = g1(T1, T2p, tau)
        # gamma_21(tau - dTbar2'): V20(t+T2)* against V10(t+T1'+tau)
        g21 = g1(T2, T1p, tau)
        lam_x = (abs(g12) ** 2, abs(g21) ** 2)
        if s1.random_phase:
            # the fringe carries exp(2i phi) and averages out
            g21 = 0j
        return oracle.predict_scenario_iii(I10, I20, g12, g21, cross_lambda=lam_x).value

    raise ValueError(f"no stationary oracle for {kind.value}")


def _pulsed_setup(cfg: ExperimentConfig, pt: _Point):
    ps = cfg.pulsed
    profile = PulseProfile("gaussian", ps.width)
    parts = [pulse_offsets(T, ps.separation) for T in pt.delays.as_tuple()]
    N = tuple(p[0] for p in parts)
    d = [p[1] for p in parts]
    beta = overlap_beta(profile, profile, d[1] - d[0])
    beta_p = overlap_beta(profile, profile, d[3] - d[2])
    return profile, N, beta, beta_p


def _pulsed_analytic(cfg: ExperimentConfig, pt: _Point) -> float:
    ps = cfg.pulsed
    _, N, beta, beta_p = _pulsed_setup(cfg, pt)
    a, b = ps.mean_energy
    if ps.amp_stats[0] == "thermal":
        m = oracle.PulseMoments.thermal(a, b, N)
    else:
        m = oracle.PulseMoments.coherent(a, b, relative_phase=0.0)
    return oracle.predict_pulsed(m, beta, beta_p, rep_rate=1.0, charge=cfg.detector.charge).value


def _seed(cfg: ExperimentConfig, point: int, real: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(cfg.ensemble.seed, spawn_key=(point, real))


def _realization(cfg: ExperimentConfig, pt: _Point, ss: np.random.SeedSequence, taus: np.ndarray):
    """One Monte-Carlo sample: ``(coincidence values on taus, detector-1 mean intensity)``."""
    kind = cfg.scenario
    ens = cfg.ensemble
    if kind is ScenarioKind.pulsed:
        ps = cfg.pulsed
        profile, N, beta, beta_p = _pulsed_setup(cfg, pt)
        sa, sb = ss.spawn(2)
        trains = [
            synth_pulse_train(profile, ps.separation, ps.n_pulses, stat, e, s)
            for stat, e, s in zip(ps.amp_stats, ps.mean_energy, (sa, sb))
        ]
        if ps.estimator == "waveform":
            res = pulsed_coincidence_waveform(trains[0], trains[1], pt.delays, cfg.detector, ps.samples_per_width)
            # absolute rate -> units of Rp Q^2
            res = replace(res, rate=res.rate * ps.separation, stderr=res.stderr * ps.separation)
        else:
            res = pulsed_coincidence_amplitude(
                trains[0].amplitudes, trains[1].amplitudes, N, beta, beta_p, cfg.detector, rep_rate=1.0
            )
        return np.array([res.rate]), float(np.mean(np.abs(trains[0].amplitudes) ** 2)), res.stderr

    sources = list(cfg.sources)
    if kind is ScenarioKind.astronomy:
        lo1 = sources[1]
        sources[2] = replace(sources[2], alpha_phase=lo1.alpha_phase + pt.delta_phi_alpha)
    margin = float(np.max(np.abs(taus))) + (cfg.detector.resolve_time if kind is ScenarioKind.scenario_iv else 0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        v, vp = assemble_scenario(
            kind,
            sources,
            pt.delays,
            cfg.coherence,
            ss,
            duration=ens.duration + 2 * margin,
            dt=ens.dt,
            gamma_target=cfg.gamma,
            resolve_time=cfg.detector.resolve_time if cfg.detector else None,
        )
    I, Ip = v.intensity, vp.intensity
    scale = 1.0 if kind is ScenarioKind.astronomy else BS_NORMALIZATION
    if kind is ScenarioKind.scenario_iv:
        vals = np.array([slow_detector_rate(I, Ip, cfg.detector, ens.dt)])
        err = np.array([np.nan])
    else:
        est = cross_correlate(I, Ip, ens.dt, taus, coherence_time=min(m.Tc for m in cfg.coherence))
        vals, err = est.mean, est.stderr
    return vals * scale, float(np.mean(I)), err * scale


def _work(args):
    cfg, point_index, x, pt, r_lo, r_hi, taus = args
    out = []
    for r in range(r_lo, r_hi):
        try:
            out.append(_realization(cfg, pt, _seed(cfg, point_index, r), taus))
        except Exception as exc:  # annotate with the sweep point
            raise SweepPointError(point_index, cfg.sweep.variable, x, exc) from exc
    return point_index, r_lo, out


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ComparisonRow:
    x: float
    mean: float
    stderr: float
    analytic: float
    z: float


@dataclass
class ComparisonReport:
    config: ExperimentConfig
    rows: List[ComparisonRow] = field(default_factory=list)
    singles_mean: Optional[np.ndarray] = None
    singles_stderr: Optional[np.ndarray] = None
    fit: Optional["FringeFit"] = None
    regime_notes: Tuple[str, ...] = ()

    @property
    def x(self) -> np.ndarray:
        return np.array([r.x for r in self.rows], dtype=float)

    @property
    def mean(self) -> np.ndarray:
        return np.array([r.mean for r in self.rows], dtype=float)

    @property
    def stderr(self) -> np.ndarray:
        return np.array([r.stderr for r in self.rows], dtype=float)

    @property
    def analytic(self) -> np.ndarray:
        return np.array([r.analytic for r in self.rows], dtype=float)

    @property
    def z(self) -> np.ndarray:
        return np.array([r.z for r in self.rows], dtype=float)

    @property
    def max_abs_z(self) -> float:
        return float(np.max(np.abs(self.z))) if self.rows else 0.0

    @property
    def fraction_within(self) -> float:
        return float(np.mean(np.abs(self.z) <= Z_POINT)) if self.rows else 1.0

    @property
    def passed(self) -> bool:
        return bool(np.all(np.isfinite(self.z))) and self.max_abs_z <= Z_MAX

    def summary(self) -> Dict[str, object]:
        cfg = self.config
        out: Dict[str, object] = {
            "config": cfg.name,
            "scenario": cfg.scenario.value,
            "master_seed": cfg.ensemble.seed,
            "realizations": cfg.ensemble.realizations,
            "duration": cfg.ensemble.duration,
            "dt": cfg.ensemble.dt,
            "sweep_variable": cfg.sweep.variable,
            "sweep_link": list(cfg.sweep.link),
            "n_points": len(self.rows),
            "max_abs_z": self.max_abs_z,
            "fraction_abs_z_le_3": self.fraction_within,
            "z_point_threshold": Z_POINT,
            "z_max_threshold": Z_MAX,
            "passed": self.passed,
            "applied_defaults": list(cfg.applied_defaults),
            "regime_notes": list(self.regime_notes),
        }
        if cfg.scenario is ScenarioKind.pulsed:
            out["units"] = "Rc / (Rp Q^2)"
        if self.fit is not None:
            out["fit"] = asdict(self.fit)
        return out


def run_sweep(cfg: ExperimentConfig, workers: int = 1) -> ComparisonReport:
    """Run the Monte-Carlo ensemble at every sweep point and compare with the oracle.

    ``workers > 1`` distributes independent work units over processes; the
    reduction order is fixed, so the report is identical for any count.
    """
    xs = cfg.sweep.values
    R = cfg.ensemble.realizations
    tau_sweep = cfg.sweep.variable == "tau"
    if tau_sweep:
        taus = np.round(xs / cfg.ensemble.dt) * cfg.ensemble.dt
        pts = [_point(cfg, cfg.tau)]
        chunk = max(1, -(-R // max(1, workers)))
        units = [(cfg, 0, None, pts[0], lo, min(R, lo + chunk), taus) for lo in range(0, R, chunk)]
    else:
        taus = np.array([cfg.tau])
        pts = [_point(cfg, x) for x in xs]
        units = [(cfg, i, float(x), p, 0, R, taus) for i, (x, p) in enumerate(zip(xs, pts))]

    notes = []
    if cfg.scenario is not ScenarioKind.pulsed:
        Tc = min(m.Tc for m in cfg.coherence)
        seen = set()
        for p in pts:
            for n in regime_violations(cfg.scenario, p.delays, Tc, cfg.detector.resolve_time if cfg.detector else None):
                if n not in seen:
                    seen.add(n)
                    notes.append(n)
        if notes:
            warnings.warn(f"{cfg.name}: regime not satisfied: {', '.join(notes)}", RegimeWarning, stacklevel=2)

    if workers > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_work, units))
    else:
        results = [_work(u) for u in units]

    # reassemble per-realization samples in (point, realization) order
    per_point: Dict[int, list] = {}
    for point_index, r_lo, out in sorted(results, key=lambda t: (t[0], t[1])):
        per_point.setdefault(point_index, []).extend(out)

    if tau_sweep:
        samples = per_point[0]
        vals = np.array([s[0] for s in samples])  # (R, n_tau)
        singles = np.array([s[1] for s in samples])
        mean, err = _reduce(vals, np.array([s[2] for s in samples]))
        s_mean = np.full(xs.size, singles.mean())
        s_err = np.full(xs.size, singles.std(ddof=1) / np.sqrt(R) if R > 1 else np.nan)
        analytic = np.array([_analytic(cfg, _point(cfg, t)) for t in taus])
    else:
        mean = np.empty(xs.size)
        err = np.empty(xs.size)
        s_mean = np.empty(xs.size)
        s_err = np.empty(xs.size)
        analytic = np.empty(xs.size)
        for i, p in enumerate(pts):
            samples = per_point[i]
            vals = np.array([s[0][0] for s in samples])
            m, e = _reduce(vals[:, None], np.array([[s[2][0] if np.ndim(s[2]) else s[2]] for s in samples]))
            mean[i], err[i] = m[0], e[0]
            singles = np.array([s[1] for s in samples])
            s_mean[i] = singles.mean()
            s_err[i] = singles.std(ddof=1) / np.sqrt(R) if R > 1 else np.nan
            try:
                analytic[i] = _pulsed_analytic(cfg, p) if cfg.scenario is ScenarioKind.pulsed else _analytic(cfg, p)
            except ConfigError:
                raise
            except Exception as exc:
                raise SweepPointError(i, cfg.sweep.variable, float(xs[i]), exc) from exc

    z = zscore(mean, err, analytic)
    rows = [ComparisonRow(float(x), float(m), float(e), float(a), float(zz)) for x, m, e, a, zz in zip(xs, mean, err, analytic, z)]
    report = ComparisonReport(cfg, rows, s_mean, s_err, regime_notes=tuple(notes))
    if cfg.fit is not None:
        report.fit = fit_fringe(xs, mean, cfg.fit.period, sigma=err, fit_period=cfg.fit.fit_period)
    return report


def _reduce(vals: np.ndarray, single_err: np.ndarray):
    R = vals.shape[0]
    mean = vals.mean(axis=0)
    if R > 1:
        err = vals.std(axis=0, ddof=1) / np.sqrt(R)
    else:
        err = np.asarray(single_err[0], dtype=float)
    return mean, err


# --------------------------------------------------------------------------
# fringe fitting
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FringeFit:
    """``y = baseline * (1 + visibility * cos(2 pi x / period + phase))``."""

    baseline: float
    visibility: float
    phase: float
    period: float
    baseline_err: float
    visibility_err: float
    phase_err: float
    period_err: float
    residual_rms: float

    @property
    def amplitude(self) -> float:
        return self.baseline * self.visibility

    @property
    def amplitude_err(self) -> float:
        return float(np.hypot(self.baseline * self.visibility_err, self.visibility * self.baseline_err))


def _fringe_model(x, B, V, phi, P):
    return B * (1 + V * np.cos(2 * np.pi * x / P + phi))


def fit_fringe(x, y, period_hint: float, sigma=None, fit_period: bool = False) -> FringeFit:
    """Least-squares fit of ``B (1 + V cos(2 pi x / period + phi0))``.

    The fixed-period problem is linear in ``(B, B V cos phi0, -B V sin phi0)``
    and solved exactly. With ``fit_period`` the linear solution seeds a
    nonlinear fit that also adjusts the period. ``sigma`` gives absolute
    per-point errors; without it the errors are scaled by the residual
    variance. ``V`` is reported non-negative with ``phi0`` in ``(-pi, pi]``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D arrays of equal length")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("fit inputs contain NaN or inf")
    if not period_hint > 0:
        raise ValueError("period_hint must be > 0")
    if x.size < 5:
        raise ValueError(f"need at least 5 points, got {x.size}")
    xs = np.sort(x)
    span = xs[-1] - xs[0] + np.median(np.diff(xs))
    if span < period_hint * (1 - 1e-9):
        raise ValueError(f"degenerate span: points cover {span} < one period {period_hint}")
    absolute = sigma is not None
    if absolute:
        sigma = np.asarray(sigma, dtype=float)
        if sigma.shape != y.shape or not np.all(np.isfinite(sigma)) or np.any(sigma <= 0):
            absolute = False
            sigma = None
    w = 1.0 / sigma if absolute else np.ones_like(y)

    k = 2 * np.pi / period_hint
    A = np.column_stack([np.ones_like(x), np.cos(k * x), np.sin(k * x)])
    coef, *_ = np.linalg.lstsq(A * w[:, None], y * w, rcond=None)
    resid = y - A @ coef
    dof = max(x.size - 3, 1)
    cov = np.linalg.pinv((A * w[:, None]).T @ (A * w[:, None]))
    if not absolute:
        cov = cov * float(resid @ resid) / dof
    B, c, s = coef
    amp = float(np.hypot(c, s))
    phi = float(np.arctan2(-s, c))
    V = amp / B if B != 0 else float("inf")
    # Jacobian of (B, V, phi) with respect to (B, c, s)
    if amp > 0 and B != 0:
        J = np.array([
            [1.0, 0.0, 0.0],
            [-amp / B ** 2, c / (amp * B), s / (amp * B)],
            [0.0, s / amp ** 2, -c / amp ** 2],
        ])
    else:
        J = np.array([[1.0, 0.0, 0.0], [0.0, 1.0 / abs(B or 1.0), 1.0 / abs(B or 1.0)], [0.0, 0.0, 0.0]])
    cp = J @ cov @ J.T
    errs = np.sqrt(np.clip(np.diag(cp), 0.0, None))
    if amp == 0:
        errs[2] = np.pi
    P, P_err = float(period_hint), 0.0

    if fit_period:
        p0 = [B, max(V, 1e-6), phi, period_hint]
        try:
            popt, pcov = curve_fit(
                _fringe_model, x, y, p0=p0, sigma=sigma, absolute_sigma=absolute, maxfev=20000
            )
        except RuntimeError as exc:
            raise ValueError(f"fringe fit did not converge: {exc}") from None
        B, V, phi, P = (float(v) for v in popt)
        if V < 0:
            V, phi = -V, phi + np.pi
        phi = float((phi + np.pi) % (2 * np.pi) - np.pi)
        errs4 = np.sqrt(np.clip(np.diag(pcov), 0.0, None))
        errs = errs4[:3]
        P_err = float(errs4[3])
        resid = y - _fringe_model(x, B, V, phi, P)

    return FringeFit(
        float(B), float(V), float(phi), P,
        float(errs[0]), float(errs[1]), float(errs[2]), P_err,
        float(np.sqrt(np.mean(resid ** 2))),
    )


# --------------------------------------------------------------------------
# output files
# --------------------------------------------------------------------------


def emit_outputs(report: ComparisonReport, data_path=None, summary_path=None, output_dir=None) -> Tuple[Path, Path]:
    """Write the sweep data file and the JSON summary.

    Paths default to those in the configuration and are resolved against
    ``output_dir`` when relative.
    """
    cfg = report.config
    base = Path(output_dir) if output_dir is not None else Path(".")
    dp = Path(data_path or cfg.data_path)
    sp = Path(summary_path or cfg.summary_path)
    if not dp.is_absolute():
        dp = base / dp
    if not sp.is_absolute():
        sp = base / sp
    header = {
        "config": cfg.name,
        "scenario": cfg.scenario.value,
        "master_seed": cfg.ensemble.seed,
        "realizations": cfg.ensemble.realizations,
        "sweep_variable": cfg.sweep.variable,
    }
    if cfg.sweep.link:
        header["sweep_link"] = " ".join(cfg.sweep.link)
    if cfg.scenario is ScenarioKind.pulsed:
        header["units"] = "Rc/(Rp*Q^2)"
    rows = [(r.x, r.mean, r.stderr, r.analytic, r.z) for r in report.rows]
    try:
        write_columns(dp, DATA_COLUMNS, rows, header, kind="sweep")
        write_json_summary(sp, _jsonable(report.summary()))
    except OSError as exc:
        raise OSError(f"cannot write outputs: {exc}") from exc
    return dp, sp


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj
