"""
Closed-form coincidence predictions
===================================

Every ``predict_*`` function returns a :class:`ScenarioPrediction` in the
source-intensity normalization: the coincidence ``<I I'>`` expanded in the
source intensities ``I10, I20`` without the 1/2 power factors of the 50:50
beam splitters. Monte-Carlo estimates of the literal beam-splitter outputs
must be multiplied by :data:`fourthorder.interferometer.BS_NORMALIZATION`
before comparison.

Coherence arguments are complex values of the full (carrier-bearing)
coherence function, e.g. ``CoherenceModel.gamma(tau)``.

:func:`gaussian_coincidence` evaluates ``<I I'>`` exactly for arbitrary
linear combinations of delayed circular-Gaussian sources via the Gaussian
moment theorem. It is exact where the scenario formulas are asymptotic and
serves as their internal consistency check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

__all__ = [
    "ScenarioPrediction",
    "AstroConfig",
    "PulseMoments",
    "Arm",
    "isserlis_fourth_moment",
    "predict_uncorrelated",
    "predict_astronomy",
    "predict_scenario_i",
    "predict_scenario_ii",
    "predict_scenario_iii",
    "predict_scenario_iv",
    "predict_pulsed",
    "gaussian_coincidence",
]


@dataclass(frozen=True)
class ScenarioPrediction:
    """``value = baseline + fringe_amplitude * cos(fringe_phase)``.

    :meth:`curve` shifts the fringe phase, e.g. to trace a fringe while the
    envelope magnitudes stay fixed.
    """

    baseline: float
    fringe_amplitude: float
    fringe_phase: float

    @property
    def visibility(self) -> float:
        return self.fringe_amplitude / self.baseline if self.baseline > 0 else 0.0

    @property
    def value(self) -> float:
        return self.curve(0.0)

    def curve(self, phase_shift=0.0):
        return self.baseline + self.fringe_amplitude * np.cos(self.fringe_phase + np.asarray(phase_shift))

    @property
    def full_curve(self) -> Callable:
        return self.curve


def _interference(base: float, weight: float, product: complex) -> ScenarioPrediction:
    """``base - weight * 2 Re(product)`` written as baseline + A cos(phase)."""
    product = complex(product)
    return ScenarioPrediction(
        baseline=float(base),
        fringe_amplitude=float(2.0 * weight * abs(product)),
        fringe_phase=float(np.angle(product) + np.pi) if product != 0 else 0.0,
    )


def isserlis_fourth_moment(g11, g22, g12, g21, I1: float = 1.0, I2: float = 1.0, anomalous=0.0) -> complex:
    """Gaussian factorization of ``<V1* V2 V2'* V1'>``.

    Parameters
    ----------
    g11 : complex
        ``<V1* V1'> / I1``.
    g22 : complex
        ``<V2* V2'> / I2`` (enters conjugated, as ``<V2 V2'*>``).
    g12 : complex
        ``<V1* V2> / sqrt(I1 I2)``.
    g21 : complex
        ``<V2'* V1'> / sqrt(I1 I2)``.
    anomalous : complex
        The third pairing ``<V1* V2'*><V2 V1'>``; zero for fields with random
        phase.
    """
    return complex(I1 * I2 * (g12 * g21 + g11 * np.conj(g22)) + anomalous)


def predict_uncorrelated(I10, I20, lam1, lam2, g11, g22) -> ScenarioPrediction:
    """Independent sources.

    ``g11 = gamma11(tau - (T1 - T1'))``, ``g22 = gamma22(tau - (T2 - T2'))``;
    ``lam_j`` are the normalized auto-intensity correlations at the same
    arguments (``|g_jj|^2`` for thermal light, 0 for coherent light).
    """
    base = I10 ** 2 * (1 + lam1) + I20 ** 2 * (1 + lam2) + 2 * I10 * I20
    return _interference(base, I10 * I20, complex(g11) * np.conj(g22))


@dataclass(frozen=True)
class AstroConfig:
    """Stellar field at two sites mixed with two local oscillators."""

    I: float
    alpha1_sq: float
    alpha2_sq: float
    delta_phi_alpha: float
    gamma: complex
    I_bar: Optional[float] = None
    lam_bar: Optional[float] = None

    def __post_init__(self):
        if abs(self.gamma) > 1 + 1e-12:
            raise ValueError("|gamma| must be <= 1")
        if min(self.I, self.alpha1_sq, self.alpha2_sq) < 0:
            raise ValueError("intensities must be >= 0")

    @property
    def Ibar(self) -> float:
        return self.I if self.I_bar is None else self.I_bar

    @property
    def xi(self) -> float:
        denom = self.I * self.alpha2_sq + self.Ibar * self.alpha1_sq
        if denom == 0:
            return 0.0
        return 2 * np.sqrt(self.alpha1_sq * self.alpha2_sq * self.I * self.Ibar) / denom


def predict_astronomy(cfg: AstroConfig, matched: bool = False) -> ScenarioPrediction:
    """Stellar intensity interferometry with stable local oscillators.

    The fringe runs as ``cos(phi_gamma - delta_phi_alpha)`` with
    ``delta_phi_alpha = phi(alpha2) - phi(alpha1)``: the cross term is
    ``<V* Vbar> alpha1 alpha2* + c.c.``. ``lam_bar`` defaults to the thermal
    value ``|gamma|^2``.

    With ``matched`` (all four intensities equal to ``I``) the result is
    ``I^2 (4 + |gamma|^2) [1 + V cos(...)]`` with visibility
    ``V = 2|gamma| / (4 + |gamma|^2)``.
    """
    g = complex(cfg.gamma)
    lam = abs(g) ** 2 if cfg.lam_bar is None else cfg.lam_bar
    phase = float(np.angle(g)) - cfg.delta_phi_alpha if g != 0 else 0.0
    if matched:
        vals = (cfg.I, cfg.Ibar, cfg.alpha1_sq, cfg.alpha2_sq)
        if not np.allclose(vals, cfg.I, rtol=1e-12, atol=0):
            raise ValueError("matched prediction requires |alpha1|^2 = |alpha2|^2 = I = Ibar")
        base = cfg.I ** 2 * (4 + abs(g) ** 2)
        vis = 2 * abs(g) / (4 + abs(g) ** 2)
        return ScenarioPrediction(base, base * vis, phase)
    lo = cfg.I * cfg.alpha2_sq + cfg.Ibar * cfg.alpha1_sq
    base = cfg.I * cfg.Ibar * (1 + lam) + cfg.alpha1_sq * cfg.alpha2_sq + lo
    return ScenarioPrediction(base, lo * cfg.xi * abs(g), phase)


def predict_scenario_i(I10, I20, g12_dT, g12_dTp, delta_phi: float = 0.0) -> ScenarioPrediction:
    """Common-origin fields, ``T1 ~ T2``, ``T1' ~ T2'``, primed pair far away.

    ``I10^2 + I20^2 + 2 I10 I20 [1 - |g g'| cos(omega (dT - dT') + delta_phi)]``;
    the carrier phase is carried by the complex ``g12`` values. Independent of
    the detector delay ``tau``.
    """
    prod = complex(g12_dT) * np.conj(g12_dTp) * np.exp(1j * delta_phi)
    return _interference(I10 ** 2 + I20 ** 2 + 2 * I10 * I20, I10 * I20, prod)


def predict_scenario_ii(I10, I20, lam1, lam2, g11, g22, delta_phi: float = 0.0) -> ScenarioPrediction:
    """``T1 ~ T1'``, ``T2 ~ T2'``, the two pairs far apart.

    ``g11 = gamma11(dT1 + tau)``, ``g22 = gamma22(dT2 + tau)``. With
    ``T1' = T1, T2' = T2`` this is the unbalanced Mach-Zehnder / classical HOM
    curve; for two identical thermal fields it is flat at ``4 I0^2``.
    """
    base = I10 ** 2 * (1 + lam1) + I20 ** 2 * (1 + lam2) + 2 * I10 * I20
    return _interference(base, I10 * I20, complex(g11) * np.conj(g22) * np.exp(1j * delta_phi))


def predict_scenario_iii(
    I10, I20, g12, g21, delta_phi: float = 0.0, cross_lambda: Tuple[float, float] = (0.0, 0.0)
) -> ScenarioPrediction:
    """Franson-type arrangement, ``T1 ~ T2'``, ``T2 ~ T1'``.

    ``g12 = gamma12(dTbar1' + tau)``, ``g21 = gamma21(tau - dTbar2')``.

    ``cross_lambda = (lam_12', lam_1'2)`` adds ``I10 I20 (lam_12' + lam_1'2)``
    to the baseline: the excess intensity correlation between ``V10(t+T1)``
    and ``V20(t+T2'+tau)`` (and between ``V20(t+T2)`` and ``V10(t+T1'+tau)``)
    which is nonzero for a common-origin thermal source, where it equals
    ``|g12|^2`` and ``|g21|^2``. The default ``(0, 0)`` gives the bare
    formula.
    """
    base = I10 ** 2 + I20 ** 2 + 2 * I10 * I20 + I10 * I20 * (cross_lambda[0] + cross_lambda[1])
    return _interference(base, I10 * I20, complex(g12) * np.conj(g21) * np.exp(1j * delta_phi))


def predict_scenario_iv(I10, I20, g12_dT, g12_dTp) -> ScenarioPrediction:
    """Slow detectors (``T_R >> Tc``): only the equal-time cross coherences survive."""
    return _interference(I10 ** 2 + I20 ** 2 + 2 * I10 * I20, I10 * I20, complex(g12_dT) * np.conj(g12_dTp))


@dataclass(frozen=True)
class PulseMoments:
    """Slot-averaged amplitude moments entering the pulsed coincidence rate.

    ``aa = <|A_{j+N1}|^2 |A_{j+N1'}|^2>``, ``bb = <|B_{j+N2}|^2 |B_{j+N2'}|^2>``,
    ``ab = <|A_{j+N1}|^2 |B_{j+N2'}|^2>``, ``ba = <|A_{j+N1'}|^2 |B_{j+N2}|^2>``,
    ``m1221 = <A*_{j+N1} B_{j+N2} B*_{j+N2'} A_{j+N1'}>``,
    ``m1212 = <A*_{j+N1} B_{j+N2} A*_{j+N1'} B_{j+N2'}>``.
    """

    aa: float
    bb: float
    ab: float
    ba: float
    m1221: complex
    m1212: complex

    @classmethod
    def thermal(cls, a: float, b: float, offsets) -> "PulseMoments":
        """Independent i.i.d. circular-Gaussian trains with mean energies ``a``, ``b``."""
        N1, N2, N1p, N2p = offsets
        same1 = float(N1 == N1p)
        same2 = float(N2 == N2p)
        return cls(a * a * (1 + same1), b * b * (1 + same2), a * b, a * b, a * b * same1 * same2, 0j)

    @classmethod
    def coherent(cls, a: float, b: float, relative_phase: Optional[float] = None) -> "PulseMoments":
        """Constant amplitudes; ``relative_phase=None`` averages it out uniformly."""
        m1212 = 0j if relative_phase is None else a * b * np.exp(2j * relative_phase)
        return cls(a * a, b * b, a * b, a * b, complex(a * b), complex(m1212))

    @classmethod
    def from_amplitudes(cls, A, B, offsets) -> "PulseMoments":
        A = np.asarray(A, dtype=complex)
        B = np.asarray(B, dtype=complex)
        N1, N2, N1p, N2p = offsets
        lo = max(0, -min(offsets))
        hi = min(A.size, A.size - max(offsets))
        j = np.arange(lo, hi)
        a1, a1p, b2, b2p = A[j + N1], A[j + N1p], B[j + N2], B[j + N2p]
        return cls(
            float(np.mean(np.abs(a1) ** 2 * np.abs(a1p) ** 2)),
            float(np.mean(np.abs(b2) ** 2 * np.abs(b2p) ** 2)),
            float(np.mean(np.abs(a1) ** 2 * np.abs(b2p) ** 2)),
            float(np.mean(np.abs(a1p) ** 2 * np.abs(b2) ** 2)),
            complex(np.mean(np.conj(a1) * b2 * np.conj(b2p) * a1p)),
            complex(np.mean(np.conj(a1) * b2 * np.conj(a1p) * b2p)),
        )


def predict_pulsed(moments: PulseMoments, beta, beta_prime, rep_rate: float = 1.0, charge: float = 1.0) -> ScenarioPrediction:
    """Pulsed coincidence rate ``Rp Q^2 {baseline - interference}``.

    The ``beta beta'*`` term is reported as the fringe; the ``beta beta'``
    term (zero for independent or phase-randomized inputs) is folded into the
    baseline, so ``value`` is exact for any moments.
    """
    scale = rep_rate * charge ** 2
    x = complex(beta) * np.conj(beta_prime) * moments.m1221
    y = complex(beta) * complex(beta_prime) * moments.m1212
    base = moments.aa + moments.bb + moments.ab + moments.ba - 2 * y.real
    p = _interference(base, 1.0, x)
    return ScenarioPrediction(scale * p.baseline, scale * p.fringe_amplitude, p.fringe_phase)


@dataclass(frozen=True)
class Arm:
    """One term ``coeff * exp(i*phase_order*phi) * S_source(t + delay)`` of a detector field."""

    source: int
    coeff: complex
    delay: float
    phase_order: int = 0


def gaussian_coincidence(
    arms: Sequence[Arm],
    arms_p: Sequence[Arm],
    correlations: Sequence[Callable],
    tau: float = 0.0,
    random_phase: bool = False,
    coherent: Sequence[complex] = (),
) -> float:
    """Exact ``<|V(t)|^2 |V'(t+tau)|^2>`` for fields built from Gaussian sources.

    ``V = sum(arm.coeff * S_arm.source(t + arm.delay))`` and likewise for
    ``V'`` at ``t + tau``. Source ``s`` is a zero-mean circular-Gaussian
    process with ``<S_s*(t) S_s(t+u)> = correlations[s](u)``; different
    sources are independent. ``coherent`` adds constant amplitudes
    ``(c, c')`` to ``V`` and ``V'``. With ``random_phase`` each term is
    multiplied by ``exp(i * phase_order * phi)`` and the result is averaged
    over uniform ``phi``.
    """
    c, cp = (complex(x) for x in (coherent or (0, 0)))
    phases = np.arange(8) * (2 * np.pi / 8) if random_phase else np.zeros(1)

    def second(a_arms, b_arms, shift, phi):
        """<X* Y> with X from a_arms at t, Y from b_arms at t + shift."""
        total = 0j
        for a in a_arms:
            for b in b_arms:
                if a.source != b.source:
                    continue
                ca = a.coeff * np.exp(1j * a.phase_order * phi)
                cb = b.coeff * np.exp(1j * b.phase_order * phi)
                total += np.conj(ca) * cb * correlations[a.source](shift + b.delay - a.delay)
        return total

    vals = []
    for phi in phases:
        n = second(arms, arms, 0.0, phi).real
        n_p = second(arms_p, arms_p, 0.0, phi).real
        x = second(arms, arms_p, tau, phi)
        # Gaussian part plus the coherent-amplitude cross terms
        vals.append(
            n * n_p + abs(x) ** 2
            + abs(c) ** 2 * n_p + abs(cp) ** 2 * n + abs(c * cp) ** 2
            + 2 * (np.conj(c) * cp * np.conj(x)).real
        )
    return float(np.mean(vals))
