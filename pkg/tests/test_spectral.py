import math

import numpy as np
import pytest

from mirrorcool import (SystemParams, cold_damping, cold_damping_state,
                        detection_band_filter_effect, log_correction_probe,
                        momentum_feedback, momentum_feedback_state,
                        spectral_state, steady_state, susceptibility,
                        variance_integral)
from mirrorcool.params import ParameterDomainError
from mirrorcool.spectral import classical_thermal_density, thermal_density

RNG = np.random.default_rng(8273645)


def test_susceptibility_poles():
    sys = SystemParams.from_ratios(theta=1e3, eta=0.8, quality=1e3, zeta=10.0)
    chi_cd = susceptibility(sys, cold_damping(50.0))
    assert chi_cd.damping == pytest.approx(51.0 * sys.gamma_m)
    assert chi_cd.omega0_sq == pytest.approx(1.0)
    chi_mf = susceptibility(sys, momentum_feedback(50.0))
    assert chi_mf.damping == pytest.approx(51.0 * sys.gamma_m)
    # momentum feedback also stiffens the spring: omega0^2 = 1 + gamma_m^2 g
    assert chi_mf.omega0_sq == pytest.approx(1.0 + sys.gamma_m**2 * 50.0)
    # peak value of |chi|^2-like response at resonance ~ 1/(Gamma^2)
    w0 = math.sqrt(chi_cd.omega0_sq)
    assert abs(chi_cd.evaluate(w0)) == pytest.approx(
        1.0 / (w0 * chi_cd.damping), rel=1e-12)


def test_thermal_density_limits():
    assert thermal_density(0.0, 1e3, 1e5) == pytest.approx(1e3)
    assert thermal_density(1.0, 1e3, 1e5) == pytest.approx(1e3, rel=1e-6)
    # far tail: (w/2) coth -> w/2
    assert thermal_density(9e4, 1e3, 1e5) == pytest.approx(4.5e4, rel=1e-12)
    assert thermal_density(1.1e5, 1e3, 1e5) == 0.0    # beyond the gate
    assert classical_thermal_density(5.0, 1e3, 1e5) == 1e3
    assert classical_thermal_density(2e5, 1e3, 1e5) == 0.0
    assert thermal_density(3.0, 0.0, 1e5) == pytest.approx(1.5)


def test_thermal_only_oracle_matches_closed_form():
    sys = SystemParams.from_ratios(theta=1e5, eta=0.8, quality=1e4, zeta=0.0)
    res = variance_integral(cold_damping(0.0), "q2", "thermal", sys)
    assert res.value == pytest.approx(1e5 / 2.0, rel=1e-3)
    assert res.converged


def test_back_action_component_exact():
    for _ in range(8):
        theta = 10.0 ** RNG.uniform(1, 5)
        quality = 10.0 ** RNG.uniform(3, 7)
        zeta = 10.0 ** RNG.uniform(0, 4)
        g = 10.0 ** RNG.uniform(0, 4)
        sys = SystemParams.from_ratios(theta=theta, eta=0.8, quality=quality,
                                       zeta=zeta)
        st = cold_damping_state(sys, g)
        res = variance_integral(cold_damping(g), "q2", "back_action", sys)
        assert res.value == pytest.approx(st.q2_parts.back_action, rel=1e-9)


def test_feedback_component_flat_filter():
    # flat |G_cd|^2 at its resonance-peak value reproduces g^2/(8 eta zeta (1+g))
    sys = SystemParams.from_ratios(theta=1e3, eta=0.8, quality=1e4, zeta=50.0)
    g = 20.0
    res = variance_integral(cold_damping(g), "q2", "feedback", sys)
    assert res.value == pytest.approx(
        g * g / (8 * 0.8 * 50.0 * (1 + g)), rel=1e-9)


def test_oracle_vs_closed_form_both_schemes():
    for scheme_of in (cold_damping, momentum_feedback):
        sys = SystemParams.from_ratios(theta=1e3, eta=0.8, quality=1e4,
                                       zeta=50.0)
        scheme = scheme_of(20.0)
        st = steady_state(sys, scheme, log_correction=True)
        q2, p2, qp = spectral_state(scheme, sys)
        assert q2 == pytest.approx(st.q2, rel=1e-3)
        assert p2 == pytest.approx(st.p2, rel=1e-3)
        assert qp == pytest.approx(st.qp_sym, abs=1e-6 + 1e-3 * abs(st.qp_sym))


def test_classical_bath_mode_is_exact():
    # with the flat bath weight the oracle and the closed forms describe the
    # same model, so agreement is limited only by quadrature error
    sys = SystemParams.from_ratios(theta=10.0, eta=0.8, quality=1e3, zeta=1.0)
    scheme = momentum_feedback(10.0)
    st = steady_state(sys, scheme, log_correction=False)
    q2, p2, qp = spectral_state(scheme, sys, classical_bath=True)
    assert q2 == pytest.approx(st.q2, rel=1e-9)
    assert qp == pytest.approx(st.qp_sym, rel=1e-9)
    assert p2 == pytest.approx(st.p2, rel=1e-5)   # gate-tail truncation only


def test_cold_damping_qp_vanishes():
    sys = SystemParams.from_ratios(theta=1e3, eta=0.8, quality=1e3, zeta=10.0)
    res = variance_integral(cold_damping(30.0), "qp", "all", sys)
    assert res.value == 0.0


def test_zero_power_feedback_rejected():
    sys = SystemParams.from_ratios(theta=1e3, eta=0.8, quality=1e3, zeta=0.0)
    with pytest.raises(ParameterDomainError):
        variance_integral(momentum_feedback(5.0), "q2", "all", sys)


def test_log_probe_measures_the_integral_slope():
    # The probe's measured slope quantifies the cutoff divergence of the
    # gated bath integral.  Note the measured value is gamma_m/(2 pi), half
    # of the reported expected_slope: the flat-plus-log closed form carries
    # the exact-model coefficient, which the gated symmetrized-spectrum
    # integral does not reach.  The factor is asserted here as measured.
    sys = SystemParams.from_ratios(theta=1e5, eta=0.8, quality=1e3, zeta=0.0)
    probe = log_correction_probe(sys, momentum_feedback(0.0),
                                 [20.0, 100.0, 1000.0, 10000.0])
    assert probe.expected_slope == pytest.approx(sys.gamma_m / math.pi)
    assert probe.slope == pytest.approx(sys.gamma_m / (2 * math.pi), rel=0.02)
    assert probe.slope_ratio == pytest.approx(0.5, rel=0.02)


def test_log_probe_q2_has_no_divergence():
    sys = SystemParams.from_ratios(theta=1e5, eta=0.8, quality=1e3, zeta=0.0)
    probe = log_correction_probe(sys, momentum_feedback(0.0),
                                 [20.0, 100.0, 1000.0, 10000.0], which="q2")
    assert abs(probe.slope) < 1e-3 * sys.gamma_m / math.pi


def test_log_probe_regime_validation():
    sys = SystemParams.from_ratios(theta=1e5, eta=0.8, quality=1e3, zeta=0.0)
    with pytest.raises(ParameterDomainError):
        # less than two decades of ladder span
        log_correction_probe(sys, momentum_feedback(0.0), [20.0, 50.0])
    low = SystemParams.from_ratios(theta=1.0, eta=0.8, quality=1e3, zeta=0.0)
    with pytest.raises(ParameterDomainError):
        # theta ~ omega_m violates the intermediate-temperature regime
        log_correction_probe(low, momentum_feedback(0.0),
                             [20.0, 100.0, 1000.0, 10000.0])


def test_detection_band_filter():
    sys = SystemParams.from_ratios(theta=1e3, eta=0.8, quality=1e4,
                                   zeta=100.0)
    g2 = 10.0
    gamma_eff = sys.gamma_m * (1 + g2)
    res = detection_band_filter_effect(sys, g2, 10.0 * gamma_eff)
    assert abs(res.deviation) < 0.05
    assert not res.outside_regime
    # at the regime boundary the deviation is reported but flagged
    edge = detection_band_filter_effect(sys, g2, gamma_eff)
    assert edge.outside_regime
    assert abs(edge.deviation) > abs(res.deviation)
    # infinitely wide band recovers the flat approximation
    wide = detection_band_filter_effect(sys, g2, 1e6)
    assert abs(wide.deviation) < 1e-6
