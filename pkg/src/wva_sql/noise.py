"""Shot noise, radiation-pressure noise, SNR, and the standard quantum limit.

The frequency-shift variance is assembled three ways and cross-checked:
from the raw shot and radiation-pressure pieces, from the SQL form
(SQL/2)(1/I + I), and from the variant that keeps the full second sideband
moment in the shot term. The first two are algebraically identical at
leading order in the displacement phase; the third deviates when the phase
is no longer small against the selection offset, which is exactly the
regime where the leading-order budget stops being trustworthy.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import PostSelectionSingular, WeakRegimeViolation, WeakRegimeWarning
from .heisenberg import second_frequency_moment, total_output_photons, weak_limit_shift
from .params import (
    HBAR,
    MinimumDisplacement,
    PulseParams,
    SelectionParams,
    derive_coupling,
    measurement_intensity,
)

#: soft validity guard on the displacement phase [rad]
WEAK_PHI_LIMIT = 1e-2
#: representation spread beyond this raises WeakRegimeViolation
REPRESENTATION_TOL = 1e-3


@dataclass(frozen=True)
class NoiseBudget:
    """Frequency-shift variance budget, all in <(Delta Omega_tilde)^2> units.

    total = shot + radiation_pressure with no cross term (vacuum fields of
    successive pulses are uncorrelated). xi_r_variance is the mean-square
    radiation-pressure time shift [s^2].
    """

    shot: float
    radiation_pressure: float
    total: float
    sql_reference: float
    intensity_I: float
    eta: float
    xi_r_variance: float


@dataclass(frozen=True)
class SNRReport:
    """Signal-to-noise of the amplified pointer shift and displacement floors [m]."""

    signal: float
    noise: float
    snr: float
    ell_min: float
    ell_sql: float


def radiation_pressure_variance(pulse: PulseParams) -> float:
    """Mean-square radiation-pressure time shift between pulses [s^2].

    <xi_r^2> = (2 hbar omega0 T / (m c^2))^2 (1 + sigma_tilde^2) N0.
    Scales as T^2 and linearly in the photon number.
    """
    st = pulse.sigma_tilde
    kick = 2.0 * HBAR * pulse.omega0 * pulse.interval_T / (pulse.mirror_mass * C_LIGHT**2)
    return kick * kick * (1.0 + st * st) * pulse.photon_number


def total_variance(pulse: PulseParams, sel: SelectionParams, exact_n: bool = False) -> NoiseBudget:
    """Total frequency-shift variance budget.

    shot = sigma_tilde^2 / N, radiation_pressure scales the mean-square
    mirror kick by the amplified readout factor sin^2(theta)/N^2, and
    total = (SQL/2)(1/I + I) with SQL = 2 sigma_tilde^2 eta / sin^2(theta/2).
    N is the approximate output photon number N0 sin^2(theta/2) unless
    exact_n=True (sensitivity analysis; total is then the plain sum of the
    recomputed terms).

    Raises
    ------
    PostSelectionSingular
        At theta = 0 (no post-selected photons).
    WeakRegimeViolation
        If the internal representations disagree beyond 1e-3, signalling a
        displacement phase too large for the leading-order budget.
    """
    if math.remainder(sel.theta, math.tau) == 0.0:
        raise PostSelectionSingular("noise budget undefined at orthogonal selection")
    coupling = derive_coupling(sel, pulse)
    if abs(coupling.phi) >= WEAK_PHI_LIMIT:
        warnings.warn(
            f"displacement phase {coupling.phi:.3g} rad exceeds the weak-regime "
            f"guard {WEAK_PHI_LIMIT:g}; the budget keeps only leading order",
            WeakRegimeWarning,
            stacklevel=2,
        )

    st = pulse.sigma_tilde
    n0 = pulse.photon_number
    p0 = pulse.pulse_energy
    xi2 = radiation_pressure_variance(pulse)
    intensity, eta = measurement_intensity(pulse, sel.theta)
    sql = 2.0 * st * st * eta / math.sin(sel.theta / 2.0) ** 2

    n_approx = total_output_photons(pulse, sel, mode="approx")
    n_used = total_output_photons(pulse, sel, mode="exact") if exact_n else n_approx

    # P0/hbar carries 1/s, xi2 carries s^2: the c^2 restoring SI units lives
    # inside radiation_pressure_variance already.
    shot = st * st / n_used
    rad = (p0 * p0 * st**4 / (n_used * n_used * HBAR * HBAR)) * xi2 * math.sin(sel.theta) ** 2
    total_sql_form = (sql / 2.0) * (1.0 / intensity + intensity)

    # Representation cross-check (always on the leading-order pieces): raw
    # sum, SQL form, and the full-second-moment variant of the shot term.
    shot_lead = st * st / n_approx
    rad_lead = (p0 * p0 * st**4 / (n_approx * n_approx * HBAR * HBAR)) * xi2 * math.sin(sel.theta) ** 2
    shot_full = second_frequency_moment(pulse, sel) / n_approx
    candidates = (shot_lead + rad_lead, total_sql_form, shot_full + rad_lead)
    spread = (max(candidates) - min(candidates)) / total_sql_form
    if spread > REPRESENTATION_TOL:
        raise WeakRegimeViolation(
            f"variance representations disagree by {spread:.3g} (> {REPRESENTATION_TOL:g}): "
            f"displacement phase {coupling.phi:.3g} rad too large against theta = {sel.theta:.3g} rad "
            "for the leading-order budget"
        )

    total = shot + rad if exact_n else total_sql_form
    return NoiseBudget(
        shot=shot,
        radiation_pressure=rad,
        total=total,
        sql_reference=sql,
        intensity_I=intensity,
        eta=eta,
        xi_r_variance=xi2,
    )


def snr(pulse: PulseParams, sel: SelectionParams, exact_n: bool = False) -> SNRReport:
    """Signal-to-noise ratio of the amplified pointer shift.

    signal = sigma_tilde^2 |phi cot(theta/2)|; noise = sqrt(total variance).
    At fixed intensity the weak-value amplification cancels between signal
    and noise: the ratio depends on theta only through |cos(theta/2)|^(1/2).
    """
    budget = total_variance(pulse, sel, exact_n=exact_n)
    signal = weak_limit_shift(pulse, sel)
    noise_amp = math.sqrt(budget.total)
    floors = minimum_displacement(pulse, sel)
    return SNRReport(
        signal=signal,
        noise=noise_amp,
        snr=signal / noise_amp,
        ell_min=floors.ell_min,
        ell_sql=floors.ell_sql,
    )


def minimum_displacement(pulse: PulseParams, sel: SelectionParams) -> MinimumDisplacement:
    """Minimum detectable mirror displacement (unit SNR) and its floor [m].

    ell_min = (1 + 1/sigma_tilde^2)^(1/4) sqrt(T hbar / 2m) |cos(theta/2)|^(-1/2)
    ell_sql = sqrt(T hbar / 2m)

    Both are independent of the laser power: improving the floor tenfold
    requires a hundredfold larger power at fixed intensity (N0 T = const).
    """
    ell_sql = math.sqrt(pulse.interval_T * HBAR / (2.0 * pulse.mirror_mass))
    st = pulse.sigma_tilde
    ell_min = (
        (1.0 + 1.0 / (st * st)) ** 0.25
        * ell_sql
        / math.sqrt(abs(math.cos(sel.theta / 2.0)))
    )
    return MinimumDisplacement(ell_min=ell_min, ell_sql=ell_sql)
