"""Independent verification paths for every closed form in the package.

Two oracles: adaptive quadrature of the output-distribution integrals
(photon number, mean shift, second moment, and the Gaussian base
identities), and a seeded Monte-Carlo pulse ensemble built from the
linearized semiclassical model — a Gaussian radiation-pressure time shift
per pulse plus photon counting noise per frequency bin — whose estimator
variance reproduces the analytic noise budget statistically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import quad

from .errors import EmptyPostSelection, QuadratureNonConvergence
from .heisenberg import total_output_photons
from .noise import radiation_pressure_variance
from .params import PulseParams, SelectionParams, derive_coupling
from .squeezing import SqueezeParams, f_pm

#: pulses per RNG substream block; fixed so results never depend on how
#: blocks are distributed over workers
BLOCK_PULSES = 1024
#: bin means at or above this use the Gaussian approximation to Poisson
POISSON_NORMAL_THRESHOLD = 30.0


@dataclass(frozen=True)
class McConfig:
    """Monte-Carlo ensemble configuration.

    bin_width is in sideband units; by default the bins span +-5 fractional
    widths of the pulse (the same extended domain the closed forms use).
    Variance estimation needs n_pulses >= 1000 and bins >= 64.
    """

    n_pulses: int
    seed: int
    bins: int = 256
    bin_width: float | None = None
    squeeze: SqueezeParams | None = None

    def __post_init__(self):
        if self.n_pulses < 1000:
            raise ValueError("n_pulses must be >= 1000 for variance estimates")
        if self.bins < 64:
            raise ValueError("bins must be >= 64")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if self.bin_width is not None and self.bin_width <= 0:
            raise ValueError("bin_width must be positive")

    def bin_centers(self, sigma_tilde: float) -> np.ndarray:
        width = self.bin_width if self.bin_width is not None else 10.0 * sigma_tilde / self.bins
        half = self.bins * width / 2.0
        return -half + (np.arange(self.bins) + 0.5) * width

    def resolved_bin_width(self, sigma_tilde: float) -> float:
        return self.bin_width if self.bin_width is not None else 10.0 * sigma_tilde / self.bins


@dataclass(frozen=True)
class McEstimate:
    """Ensemble statistics of the per-pulse frequency estimator.

    std_error is the jackknife standard error of the variance;
    n_effective is the mean post-selected photon count per retained pulse.
    """

    mean_shift: float
    variance: float
    std_error: float
    n_effective: float
    used_pulses: int
    excluded_pulses: int

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("variance must be >= 0")
        if not self.std_error > 0:
            raise ValueError("std_error must be positive")


class GaussianIntegralCheck(NamedTuple):
    analytic_cos: float
    analytic_sin: float
    quadrature_cos: float
    quadrature_sin: float


class QuadratureMoments(NamedTuple):
    """Numerically integrated output photon number and sideband moments."""

    N: float
    mean: float
    second: float


def gaussian_integral_check(a: float, b: float, c: float) -> GaussianIntegralCheck:
    """Gaussian base integrals against adaptive quadrature.

    integral e^{-a x^2} cos(2bx + c) dx = sqrt(pi/a) e^{-b^2/a} cos(c)
    integral e^{-a x^2} sin(2bx + c) dx = sqrt(pi/a) e^{-b^2/a} sin(c)
    """
    if a <= 0:
        raise ValueError("a must be positive")
    scale = math.sqrt(math.pi / a) * math.exp(-b * b / a)
    q_cos = quad(
        lambda x: math.exp(-a * x * x) * math.cos(2.0 * b * x + c),
        -math.inf, math.inf, epsabs=1e-14 * (1.0 + scale), epsrel=1e-12, limit=400,
    )[0]
    q_sin = quad(
        lambda x: math.exp(-a * x * x) * math.sin(2.0 * b * x + c),
        -math.inf, math.inf, epsabs=1e-14 * (1.0 + scale), epsrel=1e-12, limit=400,
    )[0]
    return GaussianIntegralCheck(
        analytic_cos=scale * math.cos(c),
        analytic_sin=scale * math.sin(c),
        quadrature_cos=q_cos,
        quadrature_sin=q_sin,
    )


def quadrature_moments(
    pulse: PulseParams, sel: SelectionParams, domain: str = "extended"
) -> QuadratureMoments:
    """Direct numerical integration of the output distribution moments.

    domain="extended" integrates over the full real sideband axis (the
    convention of the closed forms); domain="physical" truncates at
    Omega_tilde = -1 (positive photon frequencies only).

    Raises
    ------
    QuadratureNonConvergence
        If two independent subdivisions of the integral disagree beyond
        1e-8 relative.
    """
    if domain not in ("extended", "physical"):
        raise ValueError(f"domain must be 'extended' or 'physical', got {domain!r}")
    st = pulse.sigma_tilde
    phi = derive_coupling(sel, pulse).phi
    theta = sel.theta
    lo = -1.0 if domain == "physical" else -math.inf
    norm = pulse.photon_number / (math.sqrt(2.0 * math.pi) * st)

    def weight(x: float) -> float:
        return norm * math.exp(-x * x / (2.0 * st * st)) * math.sin(theta / 2.0 + (1.0 + x) * phi / 2.0) ** 2

    def integrate(power: int) -> float:
        def f(x: float) -> float:
            return x**power * weight(x) if power else weight(x)

        one_pass = quad(f, lo, math.inf, epsabs=0.0, epsrel=1e-12, limit=400)[0]
        # independent subdivision: split at the envelope center
        split = quad(f, lo, 0.0, epsabs=0.0, epsrel=1e-12, limit=400)[0] + quad(
            f, 0.0, math.inf, epsabs=0.0, epsrel=1e-12, limit=400
        )[0]
        scale = max(abs(one_pass), abs(split), 1e-300)
        if abs(one_pass - split) / scale > 1e-8:
            raise QuadratureNonConvergence(
                f"moment {power}: subdivisions differ by {abs(one_pass - split) / scale:.3g}"
            )
        return split

    n_out = integrate(0)
    return QuadratureMoments(N=n_out, mean=integrate(1) / n_out, second=integrate(2) / n_out)


def binned_prediction(pulse: PulseParams, sel: SelectionParams, cfg: McConfig) -> tuple[float, float]:
    """Expected (mean estimator, photons per pulse) on the ensemble's grid.

    The per-pulse estimator averages bin centers, so its expectation is the
    discretized mean — offset from the continuous closed form by the
    midpoint-rule error of the grid. Mean-consistency checks compare
    against this, not the continuum value.
    """
    st = pulse.sigma_tilde
    phi = derive_coupling(sel, pulse).phi
    centers = cfg.bin_centers(st)
    width = cfg.resolved_bin_width(st)
    mean_counts = (
        pulse.photon_number
        / (math.sqrt(2.0 * math.pi) * st)
        * width
        * np.exp(-(centers**2) / (2.0 * st * st))
        * np.sin(sel.theta / 2.0 + (1.0 + centers) * phi / 2.0) ** 2
    )
    total = float(mean_counts.sum())
    return float(centers @ mean_counts) / total, total


def _jackknife_variance_error(x: np.ndarray) -> float:
    """Delete-one jackknife standard error of the sample variance (ddof=1)."""
    n = x.size
    xbar = x.mean()
    dev2 = (x - xbar) ** 2
    ss = dev2.sum()
    leave_one = (ss - dev2 * (n / (n - 1.0))) / (n - 2.0)
    return float(np.sqrt((n - 1.0) / n * ((leave_one - leave_one.mean()) ** 2).sum()))


def monte_carlo_ensemble(
    pulse: PulseParams, sel: SelectionParams, cfg: McConfig
) -> McEstimate:
    """Seeded pulse-ensemble estimate of the frequency shift and its variance.

    Per pulse: (1) draw the radiation-pressure time shift from a zero-mean
    Gaussian with the analytic mean-square kick (scaled by 1 + f_minus for
    epoch-1 squeezing); (2) form the kicked mean distribution over the bins;
    (3) draw bin counts — exact Poisson below mean 30 and a Gaussian
    approximation above; squeezed runs always use Gaussian counts with the
    variance scaled by the per-bin factor 1 + f_plus cos^2(phase), since
    sub-Poissonian statistics are unreachable by Poisson draws (valid for
    bin means well above ~30); (4) form the estimator
    sum(Omega_i n_i)/sum(n_i). Pulses with no photons are excluded and
    counted.

    Reproducibility: pulses are partitioned into fixed blocks of 1024, each
    drawing from a counter-based substream keyed by (seed, block), so
    results are bit-identical however blocks are scheduled.

    Raises
    ------
    EmptyPostSelection
        If fewer than two pulses retain any photons.
    """
    st = pulse.sigma_tilde
    coupling = derive_coupling(sel, pulse)
    centers = cfg.bin_centers(st)
    width = cfg.resolved_bin_width(st)
    envelope = (
        pulse.photon_number
        / (math.sqrt(2.0 * math.pi) * st)
        * width
        * np.exp(-(centers**2) / (2.0 * st * st))
    )

    if cfg.squeeze is not None:
        f_minus = f_pm(-1, cfg.squeeze.r_s1, cfg.squeeze.phi_s1)
        f_plus = f_pm(+1, cfg.squeeze.r_s2, cfg.squeeze.phi_s2)
    else:
        f_minus = 0.0
        f_plus = 0.0
    xi_rms = math.sqrt(radiation_pressure_variance(pulse) * (1.0 + f_minus))

    shifts = np.empty(cfg.n_pulses)
    totals = np.empty(cfg.n_pulses)
    filled = 0
    for block_index in range(math.ceil(cfg.n_pulses / BLOCK_PULSES)):
        n_block = min(BLOCK_PULSES, cfg.n_pulses - block_index * BLOCK_PULSES)
        rng = np.random.Generator(np.random.Philox(key=(cfg.seed << 64) + block_index))
        xi_r = rng.normal(0.0, xi_rms, size=n_block)
        phi_eff = coupling.phi + 2.0 * pulse.omega0 * xi_r
        phase = sel.theta / 2.0 + (1.0 + centers)[None, :] * (phi_eff[:, None] / 2.0)
        mean = envelope[None, :] * np.sin(phase) ** 2
        if cfg.squeeze is not None:
            var = mean * (1.0 + f_plus * np.cos(phase) ** 2)
            counts = rng.normal(mean, np.sqrt(var))
        else:
            small = mean < POISSON_NORMAL_THRESHOLD
            counts = np.where(
                small,
                rng.poisson(np.where(small, mean, 0.0)).astype(float),
                rng.normal(np.where(small, 0.0, mean), np.sqrt(np.where(small, 1.0, mean))),
            )
        tot = counts.sum(axis=1)
        shifts[filled : filled + n_block] = np.divide(
            counts @ centers, tot, out=np.zeros(n_block), where=tot > 0
        )
        totals[filled : filled + n_block] = tot
        filled += n_block

    keep = totals > 0
    excluded = int((~keep).sum())
    kept = shifts[keep]
    if kept.size < 2:
        raise EmptyPostSelection(
            f"only {kept.size} of {cfg.n_pulses} pulses retained any photons"
        )
    return McEstimate(
        mean_shift=float(kept.mean()),
        variance=float(kept.var(ddof=1)),
        std_error=_jackknife_variance_error(kept),
        n_effective=float(totals[keep].mean()),
        used_pulses=int(kept.size),
        excluded_pulses=excluded,
    )


def run_manifest(
    pulse: PulseParams,
    sel: SelectionParams,
    cfg: McConfig,
    estimate: McEstimate,
    wall_time_s: float,
) -> dict:
    """JSON-ready record of a Monte-Carlo run."""
    squeeze = None
    if cfg.squeeze is not None:
        squeeze = {
            "r_s1": cfg.squeeze.r_s1,
            "phi_s1": cfg.squeeze.phi_s1,
            "r_s2": cfg.squeeze.r_s2,
            "phi_s2": cfg.squeeze.phi_s2,
        }
    return {
        "config": {
            "n_pulses": cfg.n_pulses,
            "seed": cfg.seed,
            "bins": cfg.bins,
            "bin_width": cfg.resolved_bin_width(pulse.sigma_tilde),
            "squeeze": squeeze,
        },
        "params": {
            "omega0": pulse.omega0,
            "sigma_tilde": pulse.sigma_tilde,
            "interval": pulse.interval_T,
            "mass": pulse.mirror_mass,
            "photon_number": pulse.photon_number,
            "theta": sel.theta,
            "ell": sel.ell,
        },
        "exclusion_fraction": estimate.excluded_pulses / cfg.n_pulses,
        "estimates": {
            "mean_shift": estimate.mean_shift,
            "variance": estimate.variance,
            "std_error": estimate.std_error,
            "n_effective": estimate.n_effective,
        },
        "wall_time_s": wall_time_s,
    }
