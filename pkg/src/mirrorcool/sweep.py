"""Run configuration, parameter sweeps, and lossless CSV emission.

Config files are flat ``key = value`` text; '#' starts a comment.  All
physics inputs are dimensionless ratios (frequencies in units of the
mechanical frequency), so no unit handling is needed anywhere.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, fields, replace

from .params import (FeedbackKind, FeedbackScheme, ParameterDomainError,
                     SystemParams, cold_damping, momentum_feedback,
                     ring_relative)
from .steady import contractive_threshold, entanglement_marker, steady_state

SCHEME_NAMES = {
    "momentum": FeedbackKind.MOMENTUM,
    "cold_damping": FeedbackKind.COLD_DAMPING,
    "ring": FeedbackKind.RING_RELATIVE,
}
METHODS = ("analytic", "spectral", "lyapunov", "ensemble")
SWEEP_VARIABLES = ("zeta", "gain", "quality", "theta", "eta")
_FLOAT_KEYS = ("theta", "eta", "quality", "cutoff_ratio", "gamma_c", "zeta",
               "gain", "sweep_start", "sweep_stop")
_INT_KEYS = ("sweep_points", "seed", "n_traj", "n_steps")


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending key."""


@dataclass(frozen=True)
class RunConfig:
    theta: float = 1e5
    eta: float = 0.8
    quality: float = 1e4
    cutoff_ratio: float = 100.0
    gamma_c: float = 1e4            # in mechanical-frequency units
    zeta: float = 0.0
    scheme: str = "cold_damping"
    gain: float = 0.0
    sweep_variable: str = None
    sweep_scale: str = "log"
    sweep_start: float = None
    sweep_stop: float = None
    sweep_points: int = 100
    method: str = "analytic"
    log_correction: bool = False
    seed: int = 12345
    n_traj: int = 200
    n_steps: int = 20000
    out: str = None

    def system(self):
        return SystemParams.from_ratios(
            self.theta, self.eta, self.quality, self.zeta,
            cutoff_ratio=self.cutoff_ratio, gamma_c=self.gamma_c)

    def feedback(self):
        kind = SCHEME_NAMES[self.scheme]
        if kind is FeedbackKind.MOMENTUM:
            return momentum_feedback(self.gain)
        if kind is FeedbackKind.COLD_DAMPING:
            return cold_damping(self.gain)
        return ring_relative(self.gain, zeta_tilde=self.zeta or None)

    def methods(self):
        return METHODS if self.method == "all" else (self.method,)


def parse_config_text(text, source="<config>"):
    """Flat key=value lines -> dict of raw strings."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', "
                              f"got {line!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        raw[key] = val
    return raw


def build_config(raw, base=None):
    """Validated RunConfig from a dict of raw string/typed values."""
    cfg = base if base is not None else RunConfig()
    known = {f.name for f in fields(RunConfig)}
    updates = {}
    for key, val in raw.items():
        if key not in known:
            raise ConfigError(f"unknown configuration key '{key}'")
        if val is None:
            continue
        try:
            if key in _FLOAT_KEYS:
                val = float(val)
            elif key in _INT_KEYS:
                val = int(val)
            elif key == "log_correction" and isinstance(val, str):
                val = val.lower() in ("1", "true", "yes", "on")
        except ValueError:
            raise ConfigError(f"key '{key}': cannot parse {val!r}") from None
        updates[key] = val
    cfg = replace(cfg, **updates)
    _validate(cfg)
    return cfg


def _validate(cfg):
    def bad(key, why):
        raise ConfigError(f"key '{key}': {why}")

    if cfg.theta < 0:
        bad("theta", "temperature ratio must be >= 0")
    if not 0.0 < cfg.eta <= 1.0:
        bad("eta", "detection efficiency must be in (0, 1]")
    if cfg.quality <= 0:
        bad("quality", "must be > 0")
    if cfg.cutoff_ratio <= 0:
        bad("cutoff_ratio", "must be > 0")
    if cfg.gamma_c <= 0:
        bad("gamma_c", "must be > 0")
    if cfg.zeta < 0:
        bad("zeta", "rescaled input power must be >= 0")
    if cfg.gain < 0:
        bad("gain", "must be >= 0")
    if cfg.scheme not in SCHEME_NAMES:
        bad("scheme", f"must be one of {sorted(SCHEME_NAMES)}")
    if cfg.method not in METHODS + ("all",):
        bad("method", f"must be one of {METHODS + ('all',)}")
    if cfg.sweep_variable is not None:
        if cfg.sweep_variable not in SWEEP_VARIABLES:
            bad("sweep_variable", f"must be one of {SWEEP_VARIABLES}")
        if cfg.sweep_scale not in ("linear", "log"):
            bad("sweep_scale", "must be 'linear' or 'log'")
        if cfg.sweep_start is None or cfg.sweep_stop is None:
            bad("sweep_start", "sweep_start and sweep_stop are required")
        if cfg.sweep_scale == "log" and (cfg.sweep_start <= 0
                                         or cfg.sweep_stop <= 0):
            bad("sweep_start", "log-scale sweep range must be positive")
        if cfg.sweep_points < 2:
            bad("sweep_points", "must be >= 2")
    if cfg.n_traj < 2:
        bad("n_traj", "must be >= 2")
    if cfg.n_steps < 2:
        bad("n_steps", "must be >= 2")


def load_config(path, overrides=None):
    with open(path) as fh:
        raw = parse_config_text(fh.read(), source=str(path))
    if overrides:
        raw.update(overrides)
    return build_config(raw)


@dataclass(frozen=True)
class SweepRow:
    value: float
    q2: float
    p2: float
    qp_sym: float
    energy_units: float
    occupancy: float            # nan when the state is not a thermal-like one
    contractive: bool
    squeezed: bool
    entangled: bool
    method: str

    COLUMNS = ("value", "q2", "p2", "qp_sym", "energy_units", "occupancy",
               "contractive", "squeezed", "entangled", "method")


def sweep_values(cfg):
    if cfg.sweep_scale == "log":
        lo, hi = math.log10(cfg.sweep_start), math.log10(cfg.sweep_stop)
        return [10.0 ** (lo + (hi - lo) * i / (cfg.sweep_points - 1))
                for i in range(cfg.sweep_points)]
    lo, hi = cfg.sweep_start, cfg.sweep_stop
    return [lo + (hi - lo) * i / (cfg.sweep_points - 1)
            for i in range(cfg.sweep_points)]


def _config_at(cfg, value):
    if cfg.sweep_variable == "gain":
        return replace(cfg, gain=value)
    return replace(cfg, **{cfg.sweep_variable: value})


def row_for(cfg, value, method="analytic"):
    """One SweepRow, by the requested computation method."""
    point = _config_at(cfg, value)
    if point.scheme == "ring" and point.zeta == 0 and point.gain > 0:
        # ring sweeps default to the power minimizing the relative variance
        from .steady import squeezing_minimum
        point = replace(point, zeta=squeezing_minimum(
            point.gain, point.quality, point.eta, point.theta).zeta_at_min)
    sys = point.system()
    scheme = point.feedback()
    st = steady_state(sys, scheme, log_correction=point.log_correction)
    if method == "analytic":
        q2, p2, qp = st.q2, st.p2, st.qp_sym
    elif method == "spectral":
        from .spectral import spectral_state
        q2, p2, qp = spectral_state(scheme, sys)
    elif method == "lyapunov":
        from .langevin import build_sde, stationary_covariance_lyapunov
        import warnings
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            cov = stationary_covariance_lyapunov(
                build_sde(sys, scheme, "adiabatic_2var"))
        q2, p2, qp = cov[0, 0], cov[1, 1], cov[0, 1]
    elif method == "ensemble":
        from .langevin import build_sde, simulate_ensemble
        import warnings
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            sde = build_sde(sys, scheme, "adiabatic_2var")
            stats = simulate_ensemble(sde, 0.05 / sde.fast_rate,
                                      point.n_steps, point.n_traj, point.seed)
        q2, p2, qp = stats.q2_mean, stats.p2_mean, stats.qp_mean
    else:
        raise ConfigError(f"key 'method': unknown method '{method}'")

    energy = 2.0 * (q2 + p2)
    occ = energy / 2.0 - 0.5 if abs(qp) < 1e-12 * max(q2, p2) else math.nan
    contractive = (scheme.kind is FeedbackKind.MOMENTUM
                   and sys.zeta > 0 and scheme.gain > contractive_threshold(sys))
    entangled = False
    if scheme.kind is FeedbackKind.RING_RELATIVE and scheme.gain > 0:
        report = entanglement_marker(sys, scheme.gain,
                                     zeta_tilde=sys.zeta or None)
        entangled = report.entangled
    return SweepRow(value=value, q2=q2, p2=p2, qp_sym=qp,
                    energy_units=energy, occupancy=occ,
                    contractive=contractive, squeezed=q2 < 0.25,
                    entangled=entangled, method=method)


def run_sweep(cfg):
    """Rows ordered by swept value, then by method order."""
    if cfg.sweep_variable is None:
        raise ConfigError("key 'sweep_variable': required for a sweep")
    rows = []
    for value in sweep_values(cfg):
        for method in cfg.methods():
            rows.append(row_for(cfg, value, method))
    return rows


def _format(x):
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def write_rows(path, rows, columns=SweepRow.COLUMNS):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format(getattr(row, c)) for c in columns])


def read_rows(path):
    """Inverse of write_rows; floats round-trip exactly at 17 digits."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            out.append(SweepRow(
                value=float(rec["value"]), q2=float(rec["q2"]),
                p2=float(rec["p2"]), qp_sym=float(rec["qp_sym"]),
                energy_units=float(rec["energy_units"]),
                occupancy=float(rec["occupancy"]),
                contractive=bool(int(rec["contractive"])),
                squeezed=bool(int(rec["squeezed"])),
                entangled=bool(int(rec["entangled"])),
                method=rec["method"]))
    return out
