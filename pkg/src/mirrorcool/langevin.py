"""Time-domain simulation of the linearized feedback dynamics.

Classical Gaussian surrogate: every input noise is replaced by a classical
white noise carrying its symmetrized spectrum (unit two-sided density for the
radiation quadratures, gamma_m * theta for the thermal force, the
high-temperature limit of the Brownian kernel).  The linearized dynamics is
Gaussian, so all stationary second moments of the closed forms are reproduced
exactly by this surrogate.

Detection correlation: the generalized phase noise is realized as
Y_eta = sqrt(eta) * Y_in + sqrt(1 - eta) * Y_aux with an independent auxiliary
noise, which reproduces the sqrt(eta) cross-correlation.

The full cold-damping form needs a derivative of the measured signal; raw
derivative white noise is ill-posed, so the measurement is fed through a
first-order causal differentiator i w / (1 + i w / bandwidth), realized as one
extra filter state.  The adiabatic cold-damping form uses the resonance-peak
(frequency-flat) feedback-noise surrogate instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import expm, solve_continuous_lyapunov

from .params import (FeedbackKind, FeedbackScheme, ParameterDomainError,
                     SystemParams)

FORMS = ("adiabatic_2var", "full_4var")


class StabilityError(ValueError):
    """Drift matrix is not Hurwitz."""


@dataclass(frozen=True)
class LinearSDE:
    """dx = A x dt + B dW with k independent unit Wiener processes."""

    drift: np.ndarray
    noise: np.ndarray
    state_labels: tuple
    scheme: FeedbackScheme
    form: str
    relax_rate: float          # slowest macroscopic relaxation (1+g) gamma_m
    fast_rate: float           # stiffest rate present (sets the dt bound)

    @property
    def dim(self):
        return self.drift.shape[0]

    def eigenvalues(self):
        return np.linalg.eigvals(self.drift)


def _check_hurwitz(a, context):
    eig = np.linalg.eigvals(a)
    if np.any(eig.real >= 0):
        raise StabilityError(
            f"drift matrix not Hurwitz for {context}: eigenvalues {eig}")


def build_sde(sys: SystemParams, scheme: FeedbackScheme,
              form="adiabatic_2var", *, filter_bandwidth=None):
    """Drift and noise matrices for the requested scheme and form.

    filter_bandwidth (cold damping, full form only) sets the corner of the
    derivative filter; default 100 * (1+g) * gamma_m.
    """
    if form not in FORMS:
        raise ValueError(f"form must be one of {FORMS}")
    g = scheme.gain
    if scheme.kind is FeedbackKind.RING_RELATIVE and scheme.zeta_tilde is not None:
        sys = sys.with_zeta(scheme.zeta_tilde)
    gm = sys.gamma_m
    zeta, eta, theta = sys.zeta, sys.eta, sys.theta
    if g > 0 and zeta == 0:
        raise ParameterDomainError(
            "feedback requires nonzero input power (gain > 0, zeta = 0)")
    s_th = math.sqrt(gm * theta)
    cold = scheme.kind is FeedbackKind.COLD_DAMPING
    relax = (1.0 + g) * gm

    if form == "adiabatic_2var":
        if sys.gamma_c < 10.0 * max(1.0, sys.gbeta):
            import warnings
            warnings.warn(
                "adiabatic form outside its regime: gamma_c should exceed "
                f"G*beta and omega_m (gamma_c={sys.gamma_c:g}, "
                f"G*beta={sys.gbeta:g})", stacklevel=2)
        s_ba = math.sqrt(gm * zeta) / 2.0
        if cold:
            a = np.array([[0.0, 1.0], [-1.0, -relax]])
            s_fb = math.sqrt(gm * g * g / (4.0 * eta * zeta)) if g > 0 else 0.0
            b = np.array([[0.0, 0.0, 0.0],
                          [s_ba, s_th, s_fb]])
        else:
            a = np.array([[-gm * g, 1.0], [-1.0, -gm]])
            if g > 0:
                cy = math.sqrt(gm / zeta) * g / 2.0
                caux = cy * math.sqrt((1.0 - eta) / eta)
            else:
                cy = caux = 0.0
            b = np.array([[0.0, 0.0, -cy, caux],
                          [s_ba, s_th, 0.0, 0.0]])
        _check_hurwitz(a, f"{scheme.kind.value} {form}")
        return LinearSDE(drift=a, noise=b, state_labels=("Q", "P"),
                         scheme=scheme, form=form, relax_rate=relax,
                         fast_rate=max(1.0, relax))

    # full form: cavity quadratures kept, optionally plus the filter state
    gc = sys.gamma_c
    gb = sys.gbeta
    sq = math.sqrt(gc) / 2.0
    if g > 0 and gb == 0:
        raise ParameterDomainError(
            "full form with feedback needs a nonzero working point (G*beta = 0)")
    if cold:
        bw = filter_bandwidth if filter_bandwidth is not None else 100.0 * relax
        g_cd = g * gm * gc / (4.0 * gb) if g > 0 else 0.0
        k = g_cd * bw
        # measurement s = Y - Y_eta / (2 sqrt(gamma_c eta)); filter state w
        # tracks the low-passed s, force = -g_cd * bw * (s - w)
        a = np.array([
            [0.0, 1.0, 0.0, 0.0, 0.0],
            [-1.0, -gm, -k, 2.0 * gb, k],
            [2.0 * gb, 0.0, -gc / 2.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, -gc / 2.0, 0.0],
            [0.0, 0.0, bw, 0.0, -bw],
        ])
        c_meas = 1.0 / (2.0 * math.sqrt(gc))      # Y_in route into s
        c_aux = c_meas * math.sqrt((1.0 - eta) / eta)
        b = np.array([
            [0.0, 0.0, 0.0, 0.0],
            [0.0, s_th, k * c_meas, k * c_aux],
            [0.0, 0.0, sq, 0.0],
            [sq, 0.0, 0.0, 0.0],
            [0.0, 0.0, -bw * c_meas, -bw * c_aux],
        ])
        labels = ("Q", "P", "Y", "X", "Wf")
        fast = max(1.0, relax, gc, bw)
    else:
        g_mf = -gm * g / (4.0 * gb) if g > 0 else 0.0
        a = np.array([
            [0.0, 1.0, g_mf * gc, 0.0],
            [-1.0, -gm, 0.0, 2.0 * gb],
            [2.0 * gb, 0.0, -gc / 2.0, 0.0],
            [0.0, 0.0, 0.0, -gc / 2.0],
        ])
        cy = -(g_mf / 2.0) * math.sqrt(gc)
        caux = cy * math.sqrt((1.0 - eta) / eta)
        b = np.array([
            [0.0, 0.0, cy, caux],
            [0.0, s_th, 0.0, 0.0],
            [0.0, 0.0, sq, 0.0],
            [sq, 0.0, 0.0, 0.0],
        ])
        labels = ("Q", "P", "Y", "X")
        fast = max(1.0, relax, gc)
    _check_hurwitz(a, f"{scheme.kind.value} {form}")
    return LinearSDE(drift=a, noise=b, state_labels=labels, scheme=scheme,
                     form=form, relax_rate=relax, fast_rate=fast)


def stationary_covariance_lyapunov(sde: LinearSDE):
    """Stationary covariance from A Sigma + Sigma A^T + B B^T = 0."""
    bbt = sde.noise @ sde.noise.T
    sigma = solve_continuous_lyapunov(sde.drift, -bbt)
    return 0.5 * (sigma + sigma.T)


@dataclass(frozen=True)
class EnsembleStats:
    n_traj: int
    burn_in_steps: int
    n_steps: int
    dt: float
    q2_mean: float
    q2_stderr: float
    p2_mean: float
    p2_stderr: float
    qp_mean: float
    qp_stderr: float
    autocorr_time: float
    q_series: np.ndarray = field(repr=False, default=None)  # (n_traj, n_keep)
    series_stride: int = 1

    def moments(self):
        return self.q2_mean, self.p2_mean, self.qp_mean

    def within_stderr(self, q2, p2, qp, n_sigma=3.0):
        return (abs(self.q2_mean - q2) <= n_sigma * self.q2_stderr
                and abs(self.p2_mean - p2) <= n_sigma * self.p2_stderr
                and abs(self.qp_mean - qp) <= n_sigma * self.qp_stderr)


def _step_noise_factor(sde, dt):
    """Exact per-step update: x -> M x + L xi, xi ~ N(0, I)."""
    m = expm(sde.drift * dt)
    sigma_inf = stationary_covariance_lyapunov(sde)
    cov = sigma_inf - m @ sigma_inf @ m.T
    cov = 0.5 * (cov + cov.T)
    w, v = np.linalg.eigh(cov)
    w = np.clip(w, 0.0, None)
    return m, v * np.sqrt(w)


def _integrated_autocorr(series, dt_eff):
    """Integrated autocorrelation time of the ensemble-mean normalized ACF."""
    x = series - series.mean(axis=1, keepdims=True)
    n = x.shape[1]
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, nfft, axis=1)
    acf = np.fft.irfft((f * f.conj()).real.mean(axis=0), nfft)[:n]
    if acf[0] <= 0:
        return 0.0
    rho = acf / acf[0] / np.arange(n, 0, -1) * n  # unbiased lag normalization
    tau = 1.0
    for k in range(1, n // 2):
        if rho[k] < 0:
            break
        tau += 2.0 * rho[k]
    return tau * dt_eff


def simulate_ensemble(sde: LinearSDE, dt, n_steps, n_traj, seed, *,
                      burn_in_steps=None, method="exact", enforce_dt=True,
                      keep_series=2048, dump_dir=None, dump_max=3,
                      chunk_steps=4096):
    """Ensemble statistics of the stationary state from seeded trajectories.

    Exact-propagator stepping by default (dt introduces no bias, only sampling
    density); Euler-Maruyama is kept as a cross-check integrator.  Trajectory
    i draws from its own generator seeded with seed + i, so results are
    independent of chunking and identical to a sequential run.
    """
    if n_traj < 2:
        raise ParameterDomainError("n_traj must be >= 2")
    dt_max = 0.05 / sde.fast_rate
    if enforce_dt and dt > dt_max * (1.0 + 1e-12):
        raise ParameterDomainError(
            f"dt={dt:g} too large for this form: need dt <= {dt_max:g} "
            "(pass enforce_dt=False to override; the exact propagator is "
            "unbiased at any dt)")
    if burn_in_steps is None:
        burn_in_steps = int(math.ceil(10.0 / (sde.relax_rate * dt)))
    if n_steps <= burn_in_steps:
        raise ParameterDomainError(
            f"n_steps={n_steps} must exceed burn_in_steps={burn_in_steps}")

    dim = sde.dim
    if method == "exact":
        m, ell = _step_noise_factor(sde, dt)
    elif method == "euler":
        m = np.eye(dim) + sde.drift * dt
        ell = sde.noise * math.sqrt(dt)
    else:
        raise ValueError("method must be 'exact' or 'euler'")
    k = ell.shape[1]

    rngs = [np.random.default_rng(seed + i) for i in range(n_traj)]
    x = np.zeros((n_traj, dim))  # burn-in washes out the cold start

    n_eff = n_steps - burn_in_steps
    stride = max(1, n_eff // keep_series)
    n_keep = n_eff // stride
    series = np.empty((n_traj, n_keep))

    sums = np.zeros((n_traj, 3))  # q^2, p^2, qp accumulators
    count = 0
    kept = 0

    dump_files = []
    if dump_dir is not None:
        ddir = Path(dump_dir)
        ddir.mkdir(parents=True, exist_ok=True)
        header = "t," + ",".join(sde.state_labels)
        for i in range(min(dump_max, n_traj)):
            fh = open(ddir / f"trajectory_{i:03d}.csv", "w")
            fh.write(header + "\n")
            dump_files.append(fh)

    step = 0
    mt, lt = m.T, ell.T
    try:
        while step < n_steps:
            nc = min(chunk_steps, n_steps - step)
            noise = np.empty((nc, n_traj, k))
            for i, rng in enumerate(rngs):
                noise[:, i, :] = rng.standard_normal((nc, k))
            for j in range(nc):
                x = x @ mt + noise[j] @ lt
                step += 1
                for i, fh in enumerate(dump_files):
                    fh.write(f"{step * dt:.10g}," +
                             ",".join(f"{v:.10g}" for v in x[i]) + "\n")
                if step > burn_in_steps:
                    sums[:, 0] += x[:, 0] ** 2
                    sums[:, 1] += x[:, 1] ** 2
                    sums[:, 2] += x[:, 0] * x[:, 1]
                    count += 1
                    if (count - 1) % stride == 0 and kept < n_keep:
                        series[:, kept] = x[:, 0]
                        kept += 1
    finally:
        for fh in dump_files:
            fh.close()

    per_traj = sums / count
    means = per_traj.mean(axis=0)
    stderrs = per_traj.std(axis=0, ddof=1) / math.sqrt(n_traj)
    tau = _integrated_autocorr(series[:, :kept], stride * dt)
    return EnsembleStats(
        n_traj=n_traj, burn_in_steps=burn_in_steps, n_steps=n_steps, dt=dt,
        q2_mean=means[0], q2_stderr=stderrs[0],
        p2_mean=means[1], p2_stderr=stderrs[1],
        qp_mean=means[2], qp_stderr=stderrs[2],
        autocorr_time=tau, q_series=series[:, :kept], series_stride=stride)


def acf_envelope_rate(stats: EnsembleStats):
    """Exponential decay rate of the <Q(t)Q(0)> envelope, fitted from data.

    For the underdamped oscillator this equals half the effective linewidth
    (1+g) gamma_m / 2, the real part of the slow eigenvalue pair.
    """
    x = stats.q_series - stats.q_series.mean(axis=1, keepdims=True)
    n = x.shape[1]
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, nfft, axis=1)
    acf = np.fft.irfft((f * f.conj()).real.mean(axis=0), nfft)[:n]
    acf = acf / np.arange(n, 0, -1) * n
    acf /= acf[0]
    dt_eff = stats.series_stride * stats.dt
    # envelope from |analytic signal| of the ACF; fit the initial decay only
    # (beyond it the ACF is statistical noise with a flat envelope)
    from scipy.signal import hilbert
    m = max(8, n // 2)
    env = np.abs(hilbert(acf[:m]))
    below = np.nonzero(env < 0.2 * env[0])[0]
    stop = below[0] if below.size else m
    if stop < 6:
        raise ValueError(
            "ACF decays within fewer than 6 stored samples; rerun with a "
            "larger keep_series so the envelope is resolved")
    t = np.arange(stop) * dt_eff
    coeffs = np.polyfit(t, np.log(env[:stop]), 1)
    return -coeffs[0]


@dataclass(frozen=True)
class AdiabaticDeviation:
    gamma_c: float
    q2_rel: float
    p2_rel: float
    qp_abs: float
    outside_regime: bool


def adiabatic_validity_check(sys: SystemParams, scheme: FeedbackScheme,
                             gamma_c_ladder, *, gain=None):
    """Full-form vs adiabatic-form Lyapunov covariance across a gamma_c ladder.

    The input power is held fixed while gamma_c varies (the working point is
    rebuilt each rung), so the deviation isolates the adiabatic-elimination
    error, which should shrink as gamma_c grows.
    """
    if gain is not None:
        scheme = FeedbackScheme(kind=scheme.kind, gain=float(gain),
                                zeta_tilde=scheme.zeta_tilde)
    ladder = sorted(float(x) for x in gamma_c_ladder)
    if len(ladder) >= 2 and ladder[-1] / ladder[0] < 100.0:
        raise ParameterDomainError("gamma_c ladder should span >= 2 decades")
    zeta = sys.zeta
    out = []
    for gc in ladder:
        s = SystemParams.from_ratios(sys.theta, sys.eta, sys.quality, zeta,
                                     cutoff_ratio=sys.bath.cutoff_ratio,
                                     gamma_c=gc)
        full = build_sde(s, scheme, "full_4var")
        adia = build_sde(s, scheme, "adiabatic_2var")
        cf = stationary_covariance_lyapunov(full)[:2, :2]
        ca = stationary_covariance_lyapunov(adia)
        out.append(AdiabaticDeviation(
            gamma_c=gc,
            q2_rel=abs(cf[0, 0] - ca[0, 0]) / ca[0, 0],
            p2_rel=abs(cf[1, 1] - ca[1, 1]) / ca[1, 1],
            qp_abs=abs(cf[0, 1] - ca[0, 1]),
            outside_regime=gc < 10.0 * max(1.0, s.gbeta)))
    return out
