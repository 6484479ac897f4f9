"""Closed-form stationary second moments for both feedback schemes.

All formulas are in the rescaled units of params.py (omega_m = 1, hbar = 1)
and use the classical thermal approximation coth(x) -> 1/x, so the thermal
force density is flat.  The cutoff-dependent logarithmic correction to <P^2>
is available behind an explicit flag, default off.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .optimize import minimize_positive
from .params import (FeedbackKind, FeedbackScheme, ParameterDomainError,
                     SystemParams)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Breakdown:
    """Per-noise-source split of a stationary variance."""

    back_action: float
    feedback_induced: float
    brownian: float

    @property
    def total(self):
        return self.back_action + self.feedback_induced + self.brownian


@dataclass(frozen=True)
class SteadyState:
    """Stationary Gaussian state of the mirror quadratures."""

    q2: float
    p2: float
    qp_sym: float            # <QP+PQ>/2
    q2_parts: Breakdown
    p2_parts: Breakdown
    log_term: float = 0.0    # cutoff-dependent part included in p2

    @property
    def energy_units(self):
        """Stationary energy in zero-point units, 2 U / (hbar omega_m)."""
        return 2.0 * (self.q2 + self.p2)

    @property
    def occupancy(self):
        """Mean excitation number; None unless the state is thermal-form."""
        if self.qp_sym == 0.0 and math.isclose(self.q2, self.p2,
                                               rel_tol=1e-12, abs_tol=0.0):
            return 2.0 * self.q2 - 0.5
        return None

    @property
    def ellipse_angle(self):
        """Rotation of the phase-space ellipse w.r.t. the Q axis."""
        return 0.5 * math.atan2(2.0 * self.qp_sym, self.q2 - self.p2)

    @property
    def covariance(self):
        return np.array([[self.q2, self.qp_sym], [self.qp_sym, self.p2]])


def log_correction_term(quality, cutoff_ratio):
    """Cutoff-dependent momentum-variance term (gamma_m/pi) ln(cutoff_ratio/2pi).

    Valid in the intermediate-temperature regime cutoff_ratio >> 1; clamped to
    zero with a warning when cutoff_ratio <= 2pi, where the derivation breaks.
    """
    if cutoff_ratio <= TWO_PI:
        warnings.warn(
            f"cutoff_ratio={cutoff_ratio:g} <= 2*pi: logarithmic correction "
            "outside its validity regime, clamped to 0", stacklevel=2)
        return 0.0
    return math.log(cutoff_ratio / TWO_PI) / (math.pi * quality)


def _check_feedback_zeta(gain, zeta):
    if gain > 0 and zeta == 0:
        raise ParameterDomainError(
            "feedback noise diverges at zero input power (gain > 0, zeta = 0)")


def cold_damping_state(sys: SystemParams, g2, log_correction=False):
    """Stationary state under cold damping (derivative feedback).

    q2 = p2 = [g2^2/(8 eta zeta) + zeta/8 + theta/2] / (1 + g2), qp_sym = 0.
    """
    zeta, eta, theta = sys.zeta, sys.eta, sys.theta
    _check_feedback_zeta(g2, zeta)
    denom = 1.0 + g2
    ba = zeta / (8.0 * denom)
    fb = g2**2 / (8.0 * eta * zeta * denom) if g2 > 0 else 0.0
    bm = theta / (2.0 * denom)
    q2 = ba + fb + bm
    log_term = log_correction_term(sys.quality, sys.bath.cutoff_ratio) \
        if log_correction else 0.0
    parts_q = Breakdown(ba, fb, bm)
    parts_p = Breakdown(ba, fb, bm + log_term)
    return SteadyState(q2=q2, p2=q2 + log_term, qp_sym=0.0,
                       q2_parts=parts_q, p2_parts=parts_p, log_term=log_term)


def momentum_feedback_state(sys: SystemParams, g1, log_correction=False):
    """Stationary state under momentum feedback at finite quality factor."""
    zeta, eta, theta, Q = sys.zeta, sys.eta, sys.theta, sys.quality
    _check_feedback_zeta(g1, zeta)
    Q2 = Q * Q
    D = (1.0 + g1) * (Q2 + g1)
    therm = zeta / 8.0 + theta / 2.0

    q2_ba = zeta * Q2 / (8.0 * D)
    q2_fb = g1**2 * (1.0 + Q2 + g1) / (8.0 * eta * zeta * D) if g1 > 0 else 0.0
    q2_bm = (theta / 2.0) * Q2 / D

    p2_ba = zeta * (Q2 + g1**2 + g1) / (8.0 * D)
    p2_fb = g1**2 * Q2 / (8.0 * eta * zeta * D) if g1 > 0 else 0.0
    p2_bm = (theta / 2.0) * (g1**2 + Q2 + g1) / D
    log_term = log_correction_term(Q, sys.bath.cutoff_ratio) \
        if log_correction else 0.0

    qp = (therm * g1 * Q / D
          - (g1**2 / (8.0 * eta * zeta)) * Q / D) if g1 > 0 else 0.0

    return SteadyState(
        q2=q2_ba + q2_fb + q2_bm,
        p2=p2_ba + p2_fb + p2_bm + log_term,
        qp_sym=qp,
        q2_parts=Breakdown(q2_ba, q2_fb, q2_bm),
        p2_parts=Breakdown(p2_ba, p2_fb, p2_bm + log_term),
        log_term=log_term)


def steady_state(sys: SystemParams, scheme: FeedbackScheme,
                 log_correction=False):
    """Dispatch on the feedback scheme (ring-relative shares the momentum forms)."""
    if scheme.kind is FeedbackKind.COLD_DAMPING:
        return cold_damping_state(sys, scheme.gain, log_correction)
    s = sys
    if scheme.kind is FeedbackKind.RING_RELATIVE and scheme.zeta_tilde is not None:
        s = sys.with_zeta(scheme.zeta_tilde)
    return momentum_feedback_state(s, scheme.gain, log_correction)


def cold_damping_energy_units(g2, zeta, eta, theta):
    """2 U_st / (hbar omega_m) for cold damping (log correction neglected)."""
    _check_feedback_zeta(g2, zeta)
    fb = g2**2 / (eta * zeta) if g2 > 0 else 0.0
    return (fb + zeta + 4.0 * theta) / (2.0 * (1.0 + g2))


def momentum_feedback_energy_units(g1, zeta, eta, theta, quality):
    """2 U_st / (hbar omega_m) for momentum feedback (log correction neglected)."""
    _check_feedback_zeta(g1, zeta)
    Q2 = quality * quality
    D = (1.0 + g1) * (Q2 + g1)
    fb = g1**2 * (1.0 + 2.0 * Q2 + g1) / (eta * zeta) if g1 > 0 else 0.0
    return (fb + (zeta + 4.0 * theta) * (g1**2 + 2.0 * Q2 + g1)) / (4.0 * D)


@dataclass(frozen=True)
class OptimumResult:
    zeta_opt: float              # analytic (cold damping: exact; momentum: asymptotic)
    energy_units: float          # energy at zeta_opt
    zeta_opt_numeric: float
    energy_units_numeric: float


def cold_damping_optimum(g2, eta, theta):
    """Input power minimizing the cold-damping energy: zeta_opt = g2/sqrt(eta).

    The closed form is verified against a bracketed scalar minimization;
    both values are returned.
    """
    if g2 <= 0:
        raise ParameterDomainError("cold_damping_optimum requires g2 > 0")
    zopt = g2 / math.sqrt(eta)
    e_opt = (g2 / (1.0 + g2)) * (1.0 / math.sqrt(eta) + 2.0 * theta / g2)
    # minimize the zeta-dependent part only: the flat 4*theta offset would
    # otherwise swamp the curvature and cap the attainable precision
    zn, _ = minimize_positive(lambda z: g2 * g2 / (eta * z) + z, zopt)
    en = cold_damping_energy_units(g2, zn, eta, theta)
    return OptimumResult(zeta_opt=zopt, energy_units=e_opt,
                         zeta_opt_numeric=zn, energy_units_numeric=en)


def momentum_feedback_optimum(g1, eta, theta, quality):
    """Numeric energy minimum over zeta, next to the asymptotic g1/sqrt(eta).

    The g1/sqrt(eta) form holds in the quality >> g1 regime only; the numeric
    minimizer is the authoritative value at finite quality.
    """
    if g1 <= 0:
        raise ParameterDomainError("momentum_feedback_optimum requires g1 > 0")
    z_asym = g1 / math.sqrt(eta)
    zn, en = minimize_positive(
        lambda z: momentum_feedback_energy_units(g1, z, eta, theta, quality),
        z_asym)
    e_asym = momentum_feedback_energy_units(g1, z_asym, eta, theta, quality)
    return OptimumResult(zeta_opt=z_asym, energy_units=e_asym,
                         zeta_opt_numeric=zn, energy_units_numeric=en)


def contractive_threshold(sys: SystemParams):
    """Feedback gain above which <QP+PQ>_st turns negative: eta zeta (zeta + 4 theta)."""
    if sys.zeta <= 0:
        raise ParameterDomainError("contractive threshold needs zeta > 0")
    return sys.eta * sys.zeta * (sys.zeta + 4.0 * sys.theta)


@dataclass(frozen=True)
class SqueezingOptimum:
    q2_min: float
    zeta_at_min: float


def squeezing_minimum(g1, quality, eta, theta):
    """Minimum of <Q^2>_st over the input power at fixed gain and quality."""
    if g1 <= 0:
        raise ParameterDomainError("squeezing_minimum requires g1 > 0")
    Q = quality
    Q2 = Q * Q
    D = (1.0 + g1) * (Q2 + g1)
    q2_min = (g1 * Q * math.sqrt(1.0 + Q2 + g1) / (4.0 * math.sqrt(eta) * D)
              + (theta / 2.0) * Q2 / D)
    zeta_at_min = (g1 / Q) * math.sqrt((1.0 + Q2 + g1) / eta)
    return SqueezingOptimum(q2_min=q2_min, zeta_at_min=zeta_at_min)


def total_momentum_variance(theta, quality, cutoff_ratio):
    """<P_+^2>_st of the ring center of mass: Brownian motion only."""
    return theta / 2.0 + log_correction_term(quality, cutoff_ratio)


@dataclass(frozen=True)
class NonclassicalityReport:
    contractive: bool
    contractive_gain: float | None   # threshold gain (needs zeta > 0)
    squeezed: bool
    squeezing_zeta: float | None     # input power minimizing <Q^2>
    entanglement_marker: float | None = None
    entangled: bool | None = None


def entanglement_marker(ring_sys: SystemParams, g3, zeta_tilde=None):
    """Product entanglement marker E = 16 <Q_-^2> <P_+^2> of the ring mirrors.

    ring_sys must already be the relative-frame effective system (see
    params.to_relative_frame).  zeta_tilde defaults to the power minimizing
    the relative-position variance at the given gain.
    """
    theta, eta, Q = ring_sys.theta, ring_sys.eta, ring_sys.quality
    cutoff_ratio = ring_sys.bath.cutoff_ratio
    if g3 > 0 and zeta_tilde is None:
        zeta_tilde = squeezing_minimum(g3, Q, eta, theta).zeta_at_min
    if zeta_tilde is None:
        zeta_tilde = ring_sys.zeta
    state = momentum_feedback_state(ring_sys.with_zeta(zeta_tilde), g3)
    q_minus2 = state.q2
    p_plus2 = total_momentum_variance(theta, Q, cutoff_ratio)
    marker = 16.0 * q_minus2 * p_plus2
    sq = squeezing_minimum(g3, Q, eta, theta) if g3 > 0 else None
    zt = ring_sys.with_zeta(zeta_tilde)
    return NonclassicalityReport(
        contractive=state.qp_sym < 0.0,
        contractive_gain=contractive_threshold(zt) if zeta_tilde > 0 else None,
        squeezed=q_minus2 < 0.25,
        squeezing_zeta=sq.zeta_at_min if sq else None,
        entanglement_marker=marker,
        entangled=marker < 1.0)


def nonclassicality(sys: SystemParams, g1):
    """Contractive / squeezing assessment for single-mirror momentum feedback."""
    state = momentum_feedback_state(sys, g1)
    sq = squeezing_minimum(g1, sys.quality, sys.eta, sys.theta) if g1 > 0 else None
    return NonclassicalityReport(
        contractive=state.qp_sym < 0.0,
        contractive_gain=contractive_threshold(sys) if sys.zeta > 0 else None,
        squeezed=state.q2 < 0.25,
        squeezing_zeta=sq.zeta_at_min if sq else None)
