"""Physical parameters and derived dimensionless quantities.

Single source of truth for unit handling: all user-facing inputs are SI
(rad/s, seconds, kilograms, joules, meters). Internally the formulas live in
c = 1 units with lengths stored as times, so this module is the one place
where factors of c are restored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import PostSelectionSingular

HBAR = 1.054571817e-34  # J s (CODATA 2018)
C_LIGHT = 299792458.0  # m/s

#: Config keys accepted by :func:`params_from_config`.
CONFIG_KEYS = frozenset(
    {"omega0", "sigma_omega", "pulse_energy", "photon_number", "interval", "mass", "theta", "ell", "phi"}
)


@dataclass(frozen=True)
class PulseParams:
    """Laser pulse description.

    Parameters
    ----------
    omega0 : float
        Central angular frequency [rad/s].
    sigma_omega : float
        Spectral width of the Gaussian envelope [rad/s]. The fractional
        width sigma_omega/omega0 must lie in (0, 1]; wider pulses invalidate
        the Gaussian-tail extension of every closed-form integral and are
        rejected outright.
    interval_T : float
        Time between pulses [s].
    mirror_mass : float
        Mirror mass [kg].
    pulse_energy : float, optional
        Energy per pulse [J]. Give exactly one of pulse_energy and
        photon_number; the other is derived via E = N0 * hbar * omega0.
    photon_number : float, optional
        Effective photon number N0 per pulse (dimensionless).
    """

    omega0: float
    sigma_omega: float
    interval_T: float
    mirror_mass: float
    pulse_energy: float | None = None
    photon_number: float | None = None

    def __post_init__(self):
        for name in ("omega0", "sigma_omega", "interval_T", "mirror_mass"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.sigma_omega / self.omega0 > 1.0:
            raise ValueError(
                f"sigma_omega/omega0 = {self.sigma_omega / self.omega0:.3g} > 1: "
                "the Gaussian-tail treatment of the photon distribution breaks down"
            )
        if (self.pulse_energy is None) == (self.photon_number is None):
            raise ValueError("give exactly one of pulse_energy or photon_number")
        if self.pulse_energy is None:
            if self.photon_number < 0:
                raise ValueError("photon_number must be >= 0")
            object.__setattr__(self, "pulse_energy", self.photon_number * HBAR * self.omega0)
        else:
            if self.pulse_energy < 0:
                raise ValueError("pulse_energy must be >= 0")
            object.__setattr__(self, "photon_number", self.pulse_energy / (HBAR * self.omega0))

    @property
    def sigma_tilde(self) -> float:
        """Fractional spectral width sigma_omega/omega0."""
        return self.sigma_omega / self.omega0

    def with_photon_number(self, n0: float) -> "PulseParams":
        """Same pulse with the photon number (hence energy) replaced."""
        return PulseParams(
            omega0=self.omega0,
            sigma_omega=self.sigma_omega,
            interval_T=self.interval_T,
            mirror_mass=self.mirror_mass,
            photon_number=n0,
        )

    def with_pulse_energy(self, energy: float) -> "PulseParams":
        """Same pulse with the per-pulse energy (hence N0) replaced."""
        return PulseParams(
            omega0=self.omega0,
            sigma_omega=self.sigma_omega,
            interval_T=self.interval_T,
            mirror_mass=self.mirror_mass,
            pulse_energy=energy,
        )


@dataclass(frozen=True)
class SelectionParams:
    """Pre/post-selection offset and mirror displacement.

    theta is the phase offset between the interferometer arms [rad],
    restricted to (-pi, pi]. theta = 0 is a legal configuration (exactly
    orthogonal selection) but every post-selected quantity will raise
    :class:`PostSelectionSingular` there. ell is the differential mirror
    displacement [m].
    """

    theta: float
    ell: float = 0.0

    def __post_init__(self):
        if not (-math.pi < self.theta <= math.pi):
            raise ValueError(f"theta must lie in (-pi, pi], got {self.theta!r}")

    @classmethod
    def from_phi(cls, theta: float, phi: float, omega0: float) -> "SelectionParams":
        """Build from the displacement phase phi = 4 omega0 ell / c."""
        return cls(theta=theta, ell=phi * C_LIGHT / (4.0 * omega0))


@dataclass(frozen=True)
class CouplingParams:
    """Derived coupling: measurement strength s, displacement phase phi [rad],
    and coupling g [s] (c = 1 internal units, lengths as times)."""

    s: float
    phi: float
    g: float

    def __post_init__(self):
        if self.s < 0:
            raise ValueError("s must be >= 0")


@dataclass(frozen=True)
class WeakValue:
    """Post-selected which-path weak value; purely imaginary here."""

    value: complex

    @property
    def magnitude(self) -> float:
        return abs(self.value)


class IntensityResult(NamedTuple):
    """Measurement intensity I = N0 * eta and mirror susceptibility eta."""

    I: float
    eta: float


class MinimumDisplacement(NamedTuple):
    """Minimum detectable displacement and its power-independent floor [m]."""

    ell_min: float
    ell_sql: float


def derive_coupling(sel: SelectionParams, pulse: PulseParams) -> CouplingParams:
    """Measurement strength s = 8 sigma_omega^2 ell^2 / c^2 and phase
    phi = 4 omega0 ell / c for a displacement ell.

    s equals sigma_tilde^2 * phi^2 / 2 identically.
    """
    ell_t = sel.ell / C_LIGHT  # displacement in time units
    g = -2.0 * ell_t
    phi = 4.0 * pulse.omega0 * ell_t
    s = 8.0 * pulse.sigma_omega**2 * ell_t**2
    return CouplingParams(s=s, phi=phi, g=g)


def weak_value(theta: float) -> WeakValue:
    """Which-path weak value -i cot(theta/2) for selection offset theta.

    Raises
    ------
    PostSelectionSingular
        If theta is an exact multiple of 2 pi (orthogonal selection, the
        post-selected output is empty and the weak value undefined).
    """
    if math.remainder(theta, math.tau) == 0.0:
        raise PostSelectionSingular(
            f"theta = {theta!r} is a multiple of 2*pi: orthogonal pre/post-selection"
        )
    return WeakValue(value=-1j / math.tan(theta / 2.0))


def measurement_intensity(pulse: PulseParams, theta: float) -> IntensityResult:
    """Dimensionless measurement intensity I = N0 * eta.

    eta = (4 hbar omega0 sigma_omega T / (m c^2)) |cos(theta/2)| sqrt(1 + sigma_tilde^2)
    is the susceptibility of the mirror to measurement disturbance. The c^2
    restores SI units; eta is independent of the pulse energy.
    """
    st = pulse.sigma_tilde
    eta = (
        4.0
        * HBAR
        * pulse.omega0
        * pulse.sigma_omega
        * pulse.interval_T
        / (pulse.mirror_mass * C_LIGHT**2)
        * abs(math.cos(theta / 2.0))
        * math.sqrt(1.0 + st * st)
    )
    return IntensityResult(I=pulse.photon_number * eta, eta=eta)


def params_to_config(pulse: PulseParams, sel: SelectionParams) -> dict:
    """Flatten a parameter pair into the key-value config format."""
    return {
        "omega0": pulse.omega0,
        "sigma_omega": pulse.sigma_omega,
        "pulse_energy": pulse.pulse_energy,
        "interval": pulse.interval_T,
        "mass": pulse.mirror_mass,
        "theta": sel.theta,
        "ell": sel.ell,
    }


def params_from_config(config: dict) -> tuple[PulseParams, SelectionParams]:
    """Build (PulseParams, SelectionParams) from a flat key-value mapping.

    Accepted keys: omega0, sigma_omega, pulse_energy | photon_number,
    interval, mass, theta, ell | phi. Unknown keys are rejected.
    """
    unknown = set(config) - CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    missing = {"omega0", "sigma_omega", "interval", "mass", "theta"} - set(config)
    if missing:
        raise ValueError(f"missing config keys: {sorted(missing)}")
    if ("ell" in config) and ("phi" in config):
        raise ValueError("give only one of 'ell' and 'phi'")
    pulse = PulseParams(
        omega0=float(config["omega0"]),
        sigma_omega=float(config["sigma_omega"]),
        interval_T=float(config["interval"]),
        mirror_mass=float(config["mass"]),
        pulse_energy=float(config["pulse_energy"]) if "pulse_energy" in config else None,
        photon_number=float(config["photon_number"]) if "photon_number" in config else None,
    )
    if "phi" in config:
        sel = SelectionParams.from_phi(float(config["theta"]), float(config["phi"]), pulse.omega0)
    else:
        sel = SelectionParams(theta=float(config["theta"]), ell=float(config.get("ell", 0.0)))
    return pulse, sel
