"""Output photon-number distribution and its conditional frequency moments.

Field-operator route to the post-selected output: the averaged photon
distribution over the normalized sideband Omega_tilde = (omega - omega0)/omega0,
the exact and approximate total output photon numbers, and the closed-form
frequency shift and second moment. Moments here come from the closed forms;
grid quadrature lives in the oracle module so the two paths stay independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TextIO

import numpy as np
from scipy.integrate import simpson

from .errors import PostSelectionSingular
from .params import PulseParams, SelectionParams, derive_coupling

#: denominators below this are treated as an exactly orthogonal selection
DENOMINATOR_FLOOR = 1e-30


def _denominator(s: float, psi: float) -> float:
    # cancellation-safe form of 1 - e^{-s} cos(psi)
    return 2.0 * math.sin(psi / 2.0) ** 2 - math.cos(psi) * math.expm1(-s)


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Ordered sideband sample points Omega_tilde.

    physical=True restricts the domain to Omega_tilde >= -1 (positive photon
    frequencies); the extended domain matches the Gaussian-tail convention of
    every closed-form integral.
    """

    points: np.ndarray
    physical: bool = False

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("grid needs at least two points")
        if not np.all(np.diff(pts) > 0):
            raise ValueError("grid points must be strictly increasing")
        if self.physical and pts[0] < -1.0:
            raise ValueError("physical grid must satisfy Omega_tilde >= -1")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.points[0]), float(self.points[-1])

    @classmethod
    def uniform(
        cls,
        sigma_tilde: float,
        n_points: int = 4001,
        span: float = 5.0,
        physical: bool = False,
    ) -> "FrequencyGrid":
        """Uniform grid over [-span*sigma_tilde, span*sigma_tilde], clipped
        at -1 in physical mode."""
        lo = -span * sigma_tilde
        if physical:
            lo = max(lo, -1.0)
        return cls(points=np.linspace(lo, span * sigma_tilde, n_points), physical=physical)


@dataclass(frozen=True, eq=False)
class FrequencyDistribution:
    """Sampled output photon distribution on a sideband grid.

    values carry n_bar(Omega_tilde) in units of N0/omega0 when
    normalized=False, or the probability density omega0*n_bar/(2 pi N)
    when normalized=True. total_photons is the closed-form extended-domain
    output photon number N (the published normalization constant).
    """

    grid: FrequencyGrid
    values: np.ndarray
    total_photons: float
    normalized: bool
    params: dict

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.points.shape:
            raise ValueError("values and grid shapes differ")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def grid_integral(self) -> float:
        """Simpson integral of the sampled values over the grid."""
        return float(simpson(self.values, x=self.grid.points))

    def as_probability(self) -> "FrequencyDistribution":
        """Normalized variant: omega0 * n_bar / (2 pi N) on the same grid.

        Integrates to 1 (within quadrature error) whenever the grid covers
        the support of the distribution.
        """
        if self.normalized:
            return self
        n0 = self.params["photon_number"]
        rho = self.values * n0 / (2.0 * math.pi * self.total_photons)
        return FrequencyDistribution(
            grid=self.grid,
            values=rho,
            total_photons=self.total_photons,
            normalized=True,
            params=self.params,
        )


def photon_distribution(
    grid: FrequencyGrid, pulse: PulseParams, sel: SelectionParams
) -> FrequencyDistribution:
    """Averaged output photon-number distribution on the grid.

    n_bar(Omega_tilde) = sqrt(2 pi)/(omega0 sigma_tilde) * N0
                         * exp(-Omega_tilde^2 / 2 sigma_tilde^2)
                         * sin^2[theta/2 + (1 + Omega_tilde) phi/2],
    reported in units of N0/omega0. theta = 0 is allowed (the distribution
    is then set by the displacement phase alone).
    """
    st = pulse.sigma_tilde
    phi = derive_coupling(sel, pulse).phi
    om = grid.points
    values = (
        math.sqrt(2.0 * math.pi)
        / st
        * np.exp(-(om**2) / (2.0 * st**2))
        * np.sin(sel.theta / 2.0 + (1.0 + om) * phi / 2.0) ** 2
    )
    return FrequencyDistribution(
        grid=grid,
        values=values,
        total_photons=total_output_photons(pulse, sel, mode="exact"),
        normalized=False,
        params={
            "omega0": pulse.omega0,
            "sigma_tilde": st,
            "theta": sel.theta,
            "phi": phi,
            "photon_number": pulse.photon_number,
        },
    )


def total_output_photons(pulse: PulseParams, sel: SelectionParams, mode: str = "exact") -> float:
    """Total output photon number N.

    mode="exact":  N = (N0/2) [1 - e^{-s} cos(theta + phi)]
    mode="approx": N = N0 sin^2(theta/2)  (leading order in the displacement
    phase; this is the normalization used inside the noise budget).
    """
    coupling = derive_coupling(sel, pulse)
    if mode == "exact":
        return pulse.photon_number / 2.0 * _denominator(coupling.s, sel.theta + coupling.phi)
    if mode == "approx":
        return pulse.photon_number * math.sin(sel.theta / 2.0) ** 2
    raise ValueError(f"mode must be 'exact' or 'approx', got {mode!r}")


def mean_shift_kernel(s: float, theta: float, phi: float) -> float:
    """Dimensionless mean sideband shift (2s/phi) e^{-s} sin(theta+phi) / (1 - e^{-s} cos(theta+phi)).

    Takes (s, theta, phi) as independent inputs (phi != 0) so the pointer
    closed forms can be cross-checked over an arbitrary parameter grid; the
    (pulse, sel) wrapper below handles phi = 0.
    """
    psi = theta + phi
    den = _denominator(s, psi)
    if abs(den) < DENOMINATOR_FLOOR:
        raise PostSelectionSingular(f"no output photons at theta+phi={psi!r}, s={s!r}")
    return (2.0 * s / phi) * math.exp(-s) * math.sin(psi) / den


def second_moment_kernel(s: float, theta: float, phi: float) -> float:
    """Dimensionless second sideband moment (2s/phi^2) [1 + 2 s e^{-s} cos(theta+phi) / (1 - e^{-s} cos(theta+phi))]."""
    psi = theta + phi
    den = _denominator(s, psi)
    if abs(den) < DENOMINATOR_FLOOR:
        raise PostSelectionSingular(f"no output photons at theta+phi={psi!r}, s={s!r}")
    return (2.0 * s / phi**2) * (1.0 + 2.0 * s * math.exp(-s) * math.cos(psi) / den)


def mean_frequency_shift(pulse: PulseParams, sel: SelectionParams) -> float:
    """Conditional mean sideband shift <Omega_tilde> of the output."""
    coupling = derive_coupling(sel, pulse)
    st = pulse.sigma_tilde
    psi = sel.theta + coupling.phi
    den = _denominator(coupling.s, psi)
    if abs(den) < DENOMINATOR_FLOOR:
        raise PostSelectionSingular(f"no output photons at theta+phi={psi!r}")
    # 2s/phi = sigma_tilde^2 * phi, regular at phi = 0
    return st * st * coupling.phi * math.exp(-coupling.s) * math.sin(psi) / den


def second_frequency_moment(pulse: PulseParams, sel: SelectionParams) -> float:
    """Conditional second sideband moment <Omega_tilde^2> of the output."""
    coupling = derive_coupling(sel, pulse)
    st = pulse.sigma_tilde
    psi = sel.theta + coupling.phi
    den = _denominator(coupling.s, psi)
    if abs(den) < DENOMINATOR_FLOOR:
        raise PostSelectionSingular(f"no output photons at theta+phi={psi!r}")
    # 2s/phi^2 = sigma_tilde^2, regular at phi = 0
    return st * st * (1.0 + 2.0 * coupling.s * math.exp(-coupling.s) * math.cos(psi) / den)


def weak_limit_shift(pulse: PulseParams, sel: SelectionParams) -> float:
    """Weak-limit amplified shift sigma_tilde^2 |phi cot(theta/2)|.

    This is the signal entering the SNR; it doubles (to leading order) each
    time theta is halved.
    """
    if math.remainder(sel.theta, math.tau) == 0.0:
        raise PostSelectionSingular("weak-limit shift undefined at orthogonal selection")
    coupling = derive_coupling(sel, pulse)
    st = pulse.sigma_tilde
    return st * st * abs(coupling.phi / math.tan(sel.theta / 2.0))


def write_distribution_csv(dist: FrequencyDistribution, stream: TextIO) -> None:
    """Emit distribution rows with a commented header carrying the resolved
    parameters.

    Unnormalized distributions get (omega_tilde, n_bar_units_N0_over_omega0,
    rho); normalized ones (omega_tilde, rho).
    """
    p = dist.params
    stream.write("# output photon-number distribution\n")
    for key in ("omega0", "sigma_tilde", "theta", "phi", "photon_number"):
        stream.write(f"# {key} = {p[key]:.17g}\n")
    stream.write(f"# total_photons = {dist.total_photons:.17g}\n")
    if dist.normalized:
        stream.write("omega_tilde,rho\n")
        for x, r in zip(dist.grid.points, dist.values):
            stream.write(f"{x:.17g},{r:.17g}\n")
    else:
        rho = dist.as_probability().values
        stream.write("omega_tilde,n_bar_units_N0_over_omega0,rho\n")
        for x, v, r in zip(dist.grid.points, dist.values, rho):
            stream.write(f"{x:.17g},{v:.17g},{r:.17g}\n")
