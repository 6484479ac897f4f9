"""Physical parameters, dimensionless groups, and the semiclassical working point.

Internal unit convention: hbar = 1 and all rates are ratios to the mechanical
frequency omega_m (so omega_m = 1 in the default constructors).  Temperature
enters only through theta = k_B T / (hbar omega_m), the reservoir cutoff only
through cutoff_ratio = hbar * cutoff / (k_B T).
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, replace

import numpy as np


class ParameterDomainError(ValueError):
    """A physical parameter is outside its admissible domain."""


class SolverError(RuntimeError):
    """A numerical solve failed (no admissible root / non-convergence)."""


def _require(cond, msg):
    if not cond:
        raise ParameterDomainError(msg)


@dataclass(frozen=True)
class MechanicalParams:
    """Mechanical oscillator: frequency, damping, quality factor."""

    gamma_m: float
    omega_m: float = 1.0

    def __post_init__(self):
        _require(self.omega_m > 0, f"omega_m must be > 0, got {self.omega_m}")
        _require(self.gamma_m > 0, f"gamma_m must be > 0, got {self.gamma_m}")

    @property
    def quality(self):
        return self.omega_m / self.gamma_m


@dataclass(frozen=True)
class CavityParams:
    """Driven cavity mode and its optomechanical coupling.

    Exactly one of drive_E / power is the source of truth for the drive;
    the other is derived via E = sqrt(power * gamma_c / (hbar * omega_0)).
    omega_c and omega_0 only matter through the bare detuning omega_c - omega_0
    (and omega_0 through the power conversion).
    """

    gamma_c: float
    coupling_g: float = 0.0
    omega_c: float = 0.0
    omega_0: float = 0.0
    drive_E: float | None = None
    power: float | None = None

    def __post_init__(self):
        _require(self.gamma_c > 0, f"gamma_c must be > 0, got {self.gamma_c}")
        _require(self.coupling_g >= 0,
                 f"coupling_g must be >= 0, got {self.coupling_g}")
        if self.drive_E is not None and self.power is not None:
            raise ParameterDomainError(
                "specify exactly one of drive_E / power, not both")

    @property
    def detuning0(self):
        """Bare cavity-drive detuning omega_c - omega_0."""
        return self.omega_c - self.omega_0

    def drive_amplitude(self, hbar=1.0):
        if self.drive_E is not None:
            return self.drive_E
        if self.power is not None:
            _require(self.omega_0 > 0,
                     "omega_0 must be > 0 to convert power to drive amplitude")
            return math.sqrt(self.power * self.gamma_c / (hbar * self.omega_0))
        return 0.0


@dataclass(frozen=True)
class BathParams:
    """Thermal bath and homodyne detection."""

    theta: float                 # k_B T / hbar omega_m
    eta: float = 1.0             # homodyne detection efficiency
    cutoff_ratio: float = 100.0  # hbar * cutoff / k_B T

    def __post_init__(self):
        _require(self.theta >= 0, f"theta must be >= 0, got {self.theta}")
        _require(0 < self.eta <= 1, f"eta must be in (0, 1], got {self.eta}")
        _require(self.cutoff_ratio > 0,
                 f"cutoff_ratio must be > 0, got {self.cutoff_ratio}")


class FeedbackKind(enum.Enum):
    MOMENTUM = "momentum"
    COLD_DAMPING = "cold_damping"
    RING_RELATIVE = "ring_relative"


@dataclass(frozen=True)
class FeedbackScheme:
    """Tagged feedback choice with its rescaled dimensionless gain.

    The ring-relative variant may additionally carry the rescaled ring input
    power (zeta_tilde); the other variants use the system's own zeta.
    """

    kind: FeedbackKind
    gain: float
    zeta_tilde: float | None = None

    def __post_init__(self):
        _require(self.gain >= 0, f"gain must be >= 0, got {self.gain}")
        if self.zeta_tilde is not None:
            _require(self.kind is FeedbackKind.RING_RELATIVE,
                     "zeta_tilde only applies to the ring-relative scheme")
            _require(self.zeta_tilde >= 0, "zeta_tilde must be >= 0")


def momentum_feedback(g1):
    return FeedbackScheme(FeedbackKind.MOMENTUM, g1)


def cold_damping(g2):
    return FeedbackScheme(FeedbackKind.COLD_DAMPING, g2)


def ring_relative(g3, zeta_tilde=None):
    return FeedbackScheme(FeedbackKind.RING_RELATIVE, g3, zeta_tilde)


def momentum_gain_from_hardware(g_mf, coupling_g, beta, gamma_m):
    """Rescaled momentum-feedback gain from the raw loop gain g_mf."""
    return -4.0 * coupling_g * beta * g_mf / gamma_m


def cold_damping_gain_from_hardware(g_cd, coupling_g, beta, omega_m,
                                    gamma_m, gamma_c):
    """Rescaled cold-damping gain from the raw derivative-loop gain g_cd."""
    return 4.0 * coupling_g * beta * omega_m * g_cd / (gamma_m * gamma_c)


def ring_gain_from_hardware(g_mf_minus, coupling_g_tilde, beta_tilde, gamma_m):
    """Rescaled ring-relative gain from the raw loop gain acting on Q_-."""
    return (-4.0 * math.sqrt(2.0) * coupling_g_tilde * beta_tilde
            * g_mf_minus / gamma_m)


def derive_zeta(cav: CavityParams, mech: MechanicalParams, beta):
    """Rescaled dimensionless input power zeta = 16 G^2 beta^2 / (gamma_m gamma_c)."""
    _require(mech.gamma_m > 0, "gamma_m must be > 0")
    _require(cav.gamma_c > 0, "gamma_c must be > 0")
    return 16.0 * cav.coupling_g**2 * beta**2 / (mech.gamma_m * cav.gamma_c)


def zeta_from_power(coupling_g, power, omega_0, gamma_m, gamma_c, hbar=1.0):
    """zeta expressed directly through the input laser power."""
    _require(gamma_m > 0, "gamma_m must be > 0")
    _require(gamma_c > 0, "gamma_c must be > 0")
    _require(omega_0 > 0, "omega_0 must be > 0")
    return 64.0 * coupling_g**2 * power / (hbar * omega_0 * gamma_m * gamma_c**2)


@dataclass(frozen=True)
class SystemParams:
    """Complete system description around a semiclassical working point."""

    mech: MechanicalParams
    cav: CavityParams
    bath: BathParams
    beta: float = 0.0

    @property
    def zeta(self):
        return derive_zeta(self.cav, self.mech, self.beta)

    @property
    def theta(self):
        return self.bath.theta

    @property
    def eta(self):
        return self.bath.eta

    @property
    def quality(self):
        return self.mech.quality

    @property
    def omega_m(self):
        return self.mech.omega_m

    @property
    def gamma_m(self):
        return self.mech.gamma_m

    @property
    def gamma_c(self):
        return self.cav.gamma_c

    @property
    def gbeta(self):
        """Linearized coupling G * beta."""
        return self.cav.coupling_g * self.beta

    @property
    def cutoff(self):
        """Reservoir frequency cutoff in omega_m units."""
        return self.bath.cutoff_ratio * self.bath.theta * self.omega_m

    @classmethod
    def from_ratios(cls, theta, eta, quality, zeta, *, cutoff_ratio=100.0,
                    gamma_c=1.0e4):
        """Build a working point directly from the dimensionless ratios.

        omega_m = 1; gamma_m = 1/quality; beta is set to 1 and the coupling
        chosen so that the rescaled input power equals zeta (up to rounding).
        gamma_c is in omega_m units and only matters for the full (pre
        adiabatic elimination) dynamics.
        """
        _require(quality > 0, f"quality must be > 0, got {quality}")
        _require(zeta >= 0, f"zeta must be >= 0, got {zeta}")
        gamma_m = 1.0 / quality
        coupling = math.sqrt(zeta * gamma_m * gamma_c) / 4.0
        mech = MechanicalParams(gamma_m=gamma_m)
        cav = CavityParams(gamma_c=gamma_c, coupling_g=coupling,
                           drive_E=gamma_c / 2.0)
        bath = BathParams(theta=theta, eta=eta, cutoff_ratio=cutoff_ratio)
        return cls(mech=mech, cav=cav, bath=bath, beta=1.0)

    def with_zeta(self, zeta):
        """Same system with the coupling rescaled to a new input power."""
        _require(zeta >= 0, f"zeta must be >= 0, got {zeta}")
        coupling = math.sqrt(zeta * self.gamma_m * self.gamma_c) / 4.0
        return replace(self, cav=replace(self.cav, coupling_g=coupling),
                       beta=1.0)


@dataclass(frozen=True)
class SemiclassicalSolution:
    beta: complex
    detuning: float        # effective detuning at the working point
    residual: float        # |beta - E/(gamma_c/2 + i*detuning)|
    n_positive_roots: int  # real positive roots of the cubic in |beta|^2

    @property
    def multistable(self):
        return self.n_positive_roots > 1


def solve_semiclassical(cav: CavityParams, mech: MechanicalParams,
                        zero_detuning=False, hbar=1.0):
    """Semiclassical steady-state cavity amplitude.

    The working point satisfies the fixed point
        beta = E / (gamma_c/2 + i*(omega_c - omega_0) + 2i G^2 |beta|^2 / omega_m).

    With zero_detuning the drive frequency is assumed tuned so the effective
    detuning vanishes, giving the real amplitude beta = 2E/gamma_c.  Otherwise
    the cubic in |beta|^2 is solved; among real positive roots the branch
    continuously connected to the G = 0 solution (smallest |beta|^2) is
    returned, and multistability is reported through n_positive_roots.
    """
    E = cav.drive_amplitude(hbar=hbar)
    if zero_detuning:
        beta = 2.0 * E / cav.gamma_c
        return SemiclassicalSolution(beta=complex(beta, 0.0), detuning=0.0,
                                     residual=0.0, n_positive_roots=1)

    g2q = cav.coupling_g**2 / mech.omega_m
    d0 = cav.detuning0
    if cav.coupling_g == 0.0:
        beta = E / (cav.gamma_c / 2.0 + 1j * d0)
        return SemiclassicalSolution(beta=beta, detuning=d0, residual=0.0,
                                     n_positive_roots=1)

    # x = |beta|^2 solves 4 g2q^2 x^3 + 4 g2q d0 x^2 + ((gc/2)^2 + d0^2) x = E^2
    coeffs = [4.0 * g2q**2, 4.0 * g2q * d0,
              (cav.gamma_c / 2.0)**2 + d0**2, -E**2]
    roots = np.roots(coeffs)
    real_pos = sorted(r.real for r in roots
                      if abs(r.imag) < 1e-9 * max(1.0, abs(r)) and r.real > 0)
    if not real_pos:
        raise SolverError(
            f"no real positive root of the semiclassical cubic; roots={roots}")
    x = real_pos[0]
    det = d0 + 2.0 * g2q * x
    beta = E / (cav.gamma_c / 2.0 + 1j * det)
    residual = abs(beta - E / (cav.gamma_c / 2.0 + 1j *
                               (d0 + 2.0 * g2q * abs(beta)**2)))
    return SemiclassicalSolution(beta=beta, detuning=det, residual=residual,
                                 n_positive_roots=len(real_pos))


@dataclass(frozen=True)
class RelativeFrame:
    """Ring cavity reduced to its radiation-coupled relative coordinate.

    The center-of-mass channel decouples from both light and feedback and
    undergoes plain Brownian motion; it is flagged rather than carried.
    """

    effective: SystemParams
    zeta_tilde: float
    com_thermal_only: bool = True


def to_relative_frame(ring: SystemParams) -> RelativeFrame:
    """Map a two-identical-mirror ring cavity onto a single effective oscillator.

    ring.cav.coupling_g is interpreted as the ring coupling G~ and ring.beta as
    the ring working-point amplitude; the relative coordinate couples with
    sqrt(2)*G~ and rescaled power zeta_tilde = 32 G~^2 beta^2 / (gamma_m gamma_c).
    """
    eff_cav = replace(ring.cav, coupling_g=math.sqrt(2.0) * ring.cav.coupling_g)
    eff = replace(ring, cav=eff_cav)
    return RelativeFrame(effective=eff, zeta_tilde=eff.zeta)
