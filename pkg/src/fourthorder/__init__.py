"""Monte-Carlo simulation and closed-form checks of unbalanced fourth-order interference."""

__version__ = "0.1.0"

from .fields import (  # noqa: E402
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
from .interferometer import (  # noqa: E402
    BS_NORMALIZATION,
    DelayConfig,
    RegimeWarning,
    ScenarioKind,
    assemble_scenario,
    beam_split,
    common_window,
    delay,
)
from .detection import (  # noqa: E402
    CorrelationEstimate,
    DetectorSpec,
    Moments,
    PulsedCoincidence,
    cross_correlate,
    intensity,
    mean_photocurrent,
    overlap_beta,
    pulsed_coincidence_amplitude,
    pulsed_coincidence_waveform,
    slow_detector_rate,
)
from . import oracle  # noqa: E402
