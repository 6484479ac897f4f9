"""Frequency-domain evaluation of the stationary variances by quadrature.

This module is the independent cross-check of steady.py: each variance is the
integral of a noise spectrum filtered by the mirror susceptibility, evaluated
by adaptive quadrature instead of closed forms.

Cold damping
------------
The susceptibility is

    chi_cd(w) = omega_m / (omega_m^2 - w^2 + i w gamma_m (1 + g2)),

and the variance integrands carry a flat radiation back-action density
zeta/4, a feedback density g2^2 |G_cd(w)|^2 / (4 eta zeta omega_m^2) (with
|G_cd|^2 = omega_m^2 at the resonance peak unless a detection-band filter is
supplied), and the thermal density (w / 2 omega_m) coth(w / 2 theta) gated at
the reservoir cutoff.  <P^2> takes an extra w^2/omega_m^2 weight; the QP
cross kernel vanishes identically by parity.

Momentum feedback: transfer functions
-------------------------------------
The scheme obeys the second-order displacement equation

    Q'' + (1+g1) gamma_m Q' + (omega_m^2 + gamma_m^2 g1) Q
        = omega_m [ sqrt(gamma_m zeta)/2 X_in + W ]
          - sqrt(gamma_m/zeta) g1 (Y_in' + gamma_m Y_in)
          + sqrt(gamma_m/(eta zeta)) (g1/2) (Y_in_eta' + gamma_m Y_in_eta),

with P recovered from the position equation,
P = [Q' + gamma_m g1 Q + sqrt(gamma_m/zeta) g1 Y_in
     - sqrt(gamma_m/(eta zeta)) (g1/2) Y_in_eta] / omega_m.

Fourier transforming with D(w) = omega_m^2 + gamma_m^2 g1 - w^2
+ i w gamma_m (1+g1) gives, per unit-density input noise,

    T_Q^X   = omega_m sqrt(gamma_m zeta)/2 / D
    T_Q^W   = omega_m / D
    T_Q^Y   = -sqrt(gamma_m/zeta) g1 (i w + gamma_m) / D
    T_Q^Yeta = -T_Q^Y / (2 sqrt(eta))
    T_P^X   = (i w + gamma_m g1) sqrt(gamma_m zeta)/2 / D
    T_P^W   = (i w + gamma_m g1) / D
    T_P^Y   = sqrt(gamma_m/zeta) g1 omega_m / D      (exact: the direct and
              filtered phase-noise routes cancel to omega_m^2/D)
    T_P^Yeta = -T_P^Y / (2 sqrt(eta)).

Contracting the correlated pair (Y_in, Y_in_eta), whose symmetrized density
matrix is [[1, sqrt(eta)], [sqrt(eta), 1]], every feedback-noise quadratic
form picks up the factor 1 + 1/(4 eta) - 1 = 1/(4 eta); expanding the
resulting |T|^2 and Re[T_Q T_P*] kernels and integrating reproduces the
closed forms of steady.py exactly in the classical thermal limit (this
agreement is tested, and is the point of the module).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .params import (FeedbackKind, FeedbackScheme, ParameterDomainError,
                     SystemParams)
from .steady import cold_damping_state, momentum_feedback_state

TWO_PI = 2.0 * math.pi

SOURCES = ("all", "back_action", "feedback", "thermal")
WHICH = ("q2", "p2", "qp")


@dataclass(frozen=True)
class Susceptibility:
    """Mechanical response chi(w) of the fed-back mirror."""

    scheme: FeedbackScheme
    omega0_sq: float  # renormalized squared resonance frequency
    damping: float    # effective linewidth (1+g) gamma_m

    def evaluate(self, w):
        return 1.0 / (self.omega0_sq - w**2 + 1j * w * self.damping)

    def __call__(self, w):
        return self.evaluate(w)


def susceptibility(sys: SystemParams, scheme: FeedbackScheme):
    g = scheme.gain
    gm = sys.gamma_m
    if scheme.kind is FeedbackKind.COLD_DAMPING:
        w0sq = 1.0
    else:
        w0sq = 1.0 + gm * gm * g  # momentum feedback renormalizes omega_m^2
    return Susceptibility(scheme=scheme, omega0_sq=w0sq,
                          damping=(1.0 + g) * gm)


def classical_thermal_density(w, theta, cutoff):
    """High-temperature limit of the gated bath spectrum: flat theta."""
    return theta if abs(w) < cutoff else 0.0


def thermal_density(w, theta, cutoff):
    """Symmetrized quantum Brownian force spectrum (w/2) coth(w/2 theta), gated.

    theta = 0 returns 0 (zero-temperature bath is out of the classical
    regime but the gate form is still well defined: (w/2) for |w| < cutoff).
    """
    aw = abs(w)
    if aw >= cutoff:
        return 0.0
    if theta == 0.0:
        return aw / 2.0
    if aw == 0.0:
        return theta
    return (aw / 2.0) / math.tanh(aw / (2.0 * theta))


@dataclass(frozen=True)
class NoiseSpectrum:
    kind: str                   # radiation_backaction | feedback_induced | thermal
    evaluate: object            # callable w -> density >= 0
    cutoff: float = math.inf

    def __call__(self, w):
        return self.evaluate(w)


@dataclass(frozen=True)
class SpectralResult:
    value: float
    abs_error_estimate: float
    n_evaluations: int
    split_points: list = field(default_factory=list)
    converged: bool = True


def _piecewise_quad(f, points, last_to_inf, rel_tol, limit=200):
    """Integrate f over [points[0], points[-1]] (+ tail to infinity) piecewise."""
    total = 0.0
    err = 0.0
    neval = 0
    segs = list(zip(points[:-1], points[1:]))
    if last_to_inf:
        segs.append((points[-1], np.inf))
    converged = True
    for a, b in segs:
        val, e, info = quad(f, a, b, epsabs=1e-300, epsrel=rel_tol,
                            limit=limit, full_output=1)[:3]
        total += val
        err += e
        neval += info["neval"]
        if e > 10.0 * rel_tol * max(abs(total), 1e-300) and e > 1e-13:
            # per-segment convergence is re-checked globally by the caller
            pass
    if err > max(100.0 * rel_tol * abs(total), 1e-10):
        converged = False
    return total, err, neval, converged


def _split_points(omega0_sq, damping, theta, end=None):
    """Quadrature breakpoints: resonance (or relaxation poles), coth knee, decades."""
    w0 = math.sqrt(omega0_sq)
    pts = {0.0}
    if damping < w0:  # underdamped: geometric ladder around the resonance
        # spike so the Lorentzian wings are resolved at every scale
        delta = min(10.0 * damping / w0, 0.9)
        while delta < 0.9:
            pts.update((w0 * (1.0 - delta), w0 * (1.0 + delta)))
            delta *= 10.0
        pts.update((0.1 * w0, 1.9 * w0))
    else:  # overdamped: slow and fast relaxation poles
        pts.update((0.1 * omega0_sq / damping, omega0_sq / damping,
                    w0, damping, 10.0 * damping))
    if theta > 0:
        pts.add(theta)
    top = max(pts)
    if end is not None:
        if end <= top:
            pts = {p for p in pts if p < end}
        else:
            # log-spaced decade points so long coth tails converge quickly
            d = top if top > 0 else 1.0
            while d * 10.0 < end:
                d *= 10.0
                pts.add(d)
        pts.add(end)
    return sorted(pts)


def _mf_kernels(sys, g, which, source, bath=thermal_density):
    """Momentum-feedback numerator n(w) with kernel n(w)/|D(w)|^2, per source."""
    gm = sys.gamma_m
    zeta, eta, theta = sys.zeta, sys.eta, sys.theta
    cutoff = sys.cutoff
    if g > 0 and zeta == 0:
        raise ParameterDomainError(
            "feedback noise diverges at zero input power (gain > 0, zeta = 0)")
    fbden = gm * g * g / (4.0 * eta * zeta) if g > 0 else 0.0
    ba = gm * zeta / 4.0

    def num(w, src):
        w2 = w * w
        if src == "back_action":
            if which == "q2":
                return ba
            if which == "p2":
                return ba * (w2 + gm * gm * g * g)
            return ba * gm * g
        if src == "feedback":
            if which == "q2":
                return fbden * (w2 + gm * gm)
            if which == "p2":
                return fbden
            return -fbden * gm
        # thermal
        s = gm * bath(w, theta, cutoff)
        if which == "q2":
            return s
        if which == "p2":
            return s * (w2 + gm * gm * g * g)
        return s * gm * g

    if source == "all":
        return lambda w: (num(w, "back_action") + num(w, "feedback")
                          + num(w, "thermal"))
    return lambda w: num(w, source)


def _cd_kernels(sys, g, which, source, gcd_filter=None, bath=thermal_density):
    """Cold-damping numerator n(w); |G_cd|^2 defaults to the flat peak value."""
    gm = sys.gamma_m
    zeta, eta, theta = sys.zeta, sys.eta, sys.theta
    cutoff = sys.cutoff
    if g > 0 and zeta == 0:
        raise ParameterDomainError(
            "feedback noise diverges at zero input power (gain > 0, zeta = 0)")
    fbden = gm * g * g / (4.0 * eta * zeta) if g > 0 else 0.0
    ba = gm * zeta / 4.0
    weight = (lambda w: w * w) if which == "p2" else (lambda w: 1.0)

    def num(w, src):
        if src == "back_action":
            return ba * weight(w)
        if src == "feedback":
            gcd2 = gcd_filter(w) if gcd_filter is not None else 1.0
            return fbden * gcd2 * weight(w)
        return gm * bath(w, theta, cutoff) * weight(w)

    if source == "all":
        return lambda w: (num(w, "back_action") + num(w, "feedback")
                          + num(w, "thermal"))
    return lambda w: num(w, source)


def variance_integral(scheme: FeedbackScheme, which, source,
                      sys: SystemParams, gain=None, *, rel_tol=1e-9,
                      gcd_filter=None, classical_bath=False):
    """Stationary variance by quadrature of the noise-spectrum integral.

    which in {q2, p2, qp}; source in {all, back_action, feedback, thermal}.
    The integrand is even, so the integral runs over w >= 0 and is doubled.
    classical_bath replaces the full bath weight by its flat high-temperature
    limit, the regime the closed-form expressions assume.  Returns a
    SpectralResult flagged non-converged if the error estimate stays above
    the requested tolerance.
    """
    if which not in WHICH:
        raise ValueError(f"which must be one of {WHICH}")
    if source not in SOURCES:
        raise ValueError(f"source must be one of {SOURCES}")
    g = scheme.gain if gain is None else gain
    if g < 0:
        raise ParameterDomainError("gain must be >= 0")
    if scheme.kind is FeedbackKind.RING_RELATIVE and scheme.zeta_tilde is not None:
        sys = sys.with_zeta(scheme.zeta_tilde)
    chi = susceptibility(sys, FeedbackScheme(scheme.kind, g))

    cold = scheme.kind is FeedbackKind.COLD_DAMPING
    if cold and which == "qp":
        # Re[T_Q (i w T_Q)^*] is odd: the cross moment vanishes identically
        return SpectralResult(value=0.0, abs_error_estimate=0.0,
                              n_evaluations=0)
    bath = classical_thermal_density if classical_bath else thermal_density
    if cold:
        numer = _cd_kernels(sys, g, which, source, gcd_filter, bath)
    else:
        numer = _mf_kernels(sys, g, which, source, bath)

    def integrand(w):
        d = chi.omega0_sq - w * w
        den = d * d + (chi.damping * w)**2
        return numer(w) / den

    thermal_only = source == "thermal"
    needs_cut = source in ("all", "thermal") and sys.theta > 0
    end = sys.cutoff if needs_cut else None
    pts = _split_points(chi.omega0_sq, chi.damping, sys.theta if needs_cut else 0.0,
                        end=end)
    last_to_inf = not thermal_only
    if thermal_only and end is None:
        return SpectralResult(value=0.0, abs_error_estimate=0.0,
                              n_evaluations=0, split_points=pts)
    val, err, neval, conv = _piecewise_quad(integrand, pts, last_to_inf, rel_tol)
    # even integrand: double the positive-frequency half; 1/(2 pi) measure
    scale = 2.0 / TWO_PI
    return SpectralResult(value=scale * val, abs_error_estimate=scale * err,
                          n_evaluations=neval, split_points=pts,
                          converged=conv)


def spectral_state(scheme, sys, *, rel_tol=1e-9, classical_bath=False):
    """(q2, p2, qp_sym) triple from quadrature, for cross-method reports."""
    vals = {}
    for which in WHICH:
        vals[which] = variance_integral(scheme, which, "all", sys,
                                        rel_tol=rel_tol,
                                        classical_bath=classical_bath).value
    return vals["q2"], vals["p2"], vals["qp"]


@dataclass(frozen=True)
class LogProbeResult:
    cutoff_ratios: tuple
    residuals: tuple           # p2(cutoff) - classical closed form, per rung
    slope: float               # fitted d p2 / d ln(cutoff)
    expected_slope: float      # gamma_m / (pi omega_m)

    @property
    def slope_ratio(self):
        return self.slope / self.expected_slope


def log_correction_probe(sys: SystemParams, scheme: FeedbackScheme,
                         cutoff_ratio_ladder, *, which="p2", rel_tol=1e-12):
    """Fit the cutoff dependence of a variance against ln(cutoff).

    For p2 the fitted slope should match gamma_m/pi (the analytic logarithmic
    correction); for q2 it should vanish.  The ladder must span at least two
    decades inside the intermediate-temperature regime
    cutoff >> theta >> 1 (omega_m units).
    """
    ladder = sorted(float(r) for r in cutoff_ratio_ladder)
    if len(ladder) < 2 or ladder[-1] / ladder[0] < 100.0:
        raise ParameterDomainError(
            "cutoff ladder must span at least two decades")
    if ladder[0] < 10.0:
        raise ParameterDomainError(
            "cutoff ladder outside validity: need hbar*cutoff >> k_B T "
            f"(min cutoff_ratio {ladder[0]:g} < 10)")
    if sys.theta < 10.0:
        raise ParameterDomainError(
            "intermediate-temperature regime needs theta >> 1 "
            f"(theta = {sys.theta:g})")

    g = scheme.gain
    residuals = []
    import dataclasses
    for ratio in ladder:
        bath = dataclasses.replace(sys.bath, cutoff_ratio=ratio)
        s = dataclasses.replace(sys, bath=bath)
        spec = variance_integral(scheme, which, "thermal", s, rel_tol=rel_tol)
        if scheme.kind is FeedbackKind.COLD_DAMPING:
            closed = cold_damping_state(s, g)
        else:
            closed = momentum_feedback_state(s, g)
        ref = closed.p2_parts.brownian if which == "p2" else closed.q2_parts.brownian
        residuals.append(spec.value - ref)
    lnw = np.log([r * sys.theta for r in ladder])
    slope = float(np.polyfit(lnw, residuals, 1)[0])
    return LogProbeResult(cutoff_ratios=tuple(ladder),
                          residuals=tuple(residuals), slope=slope,
                          expected_slope=sys.gamma_m / math.pi)


@dataclass(frozen=True)
class BandFilterResult:
    value: float
    flat_value: float
    deviation: float          # (value - flat_value) / flat_value
    outside_regime: bool


def detection_band_filter_effect(sys: SystemParams, g2, band, *,
                                 which="q2", rel_tol=1e-10):
    """Feedback-induced variance with a band-limited derivative filter.

    The resonance-peak approximation takes |G_cd(w)|^2 = omega_m^2 everywhere;
    here the derivative response is kept only inside the detection band
    |w - omega_m| <= band (|G_cd|^2 = w^2 there, zero outside).  The stated
    regime is band > gamma_m (1 + g2); narrower bands are computed anyway and
    flagged.
    """
    linewidth = sys.gamma_m * (1.0 + g2)
    outside = not band > linewidth
    scheme = FeedbackScheme(FeedbackKind.COLD_DAMPING, g2)

    lo, hi = max(0.0, 1.0 - band), 1.0 + band

    def gcd2(w):
        return w * w if lo <= w <= hi else 0.0

    flat = variance_integral(scheme, which, "feedback", sys,
                             rel_tol=rel_tol).value

    # integrate only over the band; outside it the integrand is zero
    chi = susceptibility(sys, scheme)
    numer = _cd_kernels(sys, g2, which, "feedback", gcd_filter=gcd2)

    def integrand(w):
        d = chi.omega0_sq - w * w
        return numer(w) / (d * d + (chi.damping * w)**2)

    ladder = _split_points(chi.omega0_sq, chi.damping, 0.0, end=hi)
    pts = sorted({lo, hi, *(p for p in ladder if lo < p < hi)})
    val, err, neval, conv = _piecewise_quad(integrand, pts, False, rel_tol)
    value = 2.0 * val / TWO_PI
    return BandFilterResult(value=value, flat_value=flat,
                            deviation=(value - flat) / flat,
                            outside_regime=outside)
