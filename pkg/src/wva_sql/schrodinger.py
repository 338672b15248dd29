"""Pointer moments of the post-selected output in the state-vector picture.

Closed forms for the first and second pointer moments (exact in the
measurement strength s, no weak-measurement expansion) plus a general
moment evaluated by Gauss-Hermite quadrature of the post-selected
expectation value. The closed forms are the cross-validation targets for
the output-distribution module, which reaches the same quantities from the
field-operator side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import PostSelectionSingular
from .params import CouplingParams, weak_value

#: denominators below this are treated as an exactly orthogonal selection
DENOMINATOR_FLOOR = 1e-30


@dataclass(frozen=True)
class PointerMoments:
    """First and second post-selected pointer moments, (phi/2)^n-scaled."""

    first: float
    second: float


def _denominator(s: float, psi: float) -> float:
    # cancellation-safe form of 1 - e^{-s} cos(psi)
    return 2.0 * math.sin(psi / 2.0) ** 2 - math.cos(psi) * math.expm1(-s)


def closed_first_moment(s: float, theta: float, phi: float) -> float:
    """Scaled first pointer moment s e^{-s} sin(theta+phi) / (1 - e^{-s} cos(theta+phi)).

    Weak limit (s -> 0): s * cot(theta + phi).
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    psi = theta + phi
    den = _denominator(s, psi)
    if abs(den) < DENOMINATOR_FLOOR:
        raise PostSelectionSingular(
            f"post-selected output vanishes at s={s!r}, theta+phi={psi!r}"
        )
    return s * math.exp(-s) * math.sin(psi) / den


def closed_second_moment(s: float, theta: float, phi: float) -> float:
    """Scaled second pointer moment (s/2) [1 + 2 s e^{-s} cos(theta+phi) / (1 - e^{-s} cos(theta+phi))].

    Weak limit (s -> 0): s/2.
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    psi = theta + phi
    den = _denominator(s, psi)
    if abs(den) < DENOMINATOR_FLOOR:
        raise PostSelectionSingular(
            f"post-selected output vanishes at s={s!r}, theta+phi={psi!r}"
        )
    return (s / 2.0) * (1.0 + 2.0 * s * math.exp(-s) * math.cos(psi) / den)


def pointer_moments(s: float, theta: float, phi: float) -> PointerMoments:
    """Both closed-form moments bundled."""
    return PointerMoments(
        first=closed_first_moment(s, theta, phi),
        second=closed_second_moment(s, theta, phi),
    )


@lru_cache(maxsize=None)
def _hermgauss(n: int):
    x, w = np.polynomial.hermite.hermgauss(n)
    return x, w


def general_moment(
    n: int,
    coupling: CouplingParams,
    theta: float,
    centered: bool | None = None,
    sigma_tilde: float | None = None,
    tol: float = 1e-10,
    start_nodes: int = 64,
    max_nodes: int = 4096,
) -> float:
    """n-th post-selected pointer moment by Gauss-Hermite quadrature.

    Evaluates the exact post-selected expectation value (numerator and
    denominator averages of the trigonometric interaction factors against
    the Gaussian pulse envelope) with the which-path weak value for the
    selection offset theta.

    Parameters
    ----------
    n : int
        Moment order, n >= 0.
    coupling : CouplingParams
        Supplies (s, phi).
    theta : float
        Selection offset [rad].
    centered : bool, optional
        If True, return the centered moment scaled by (phi/2)^n, matching
        the closed forms for n in {1, 2}. If False, return the raw moment
        of omega in omega0^n units. Default: centered for n in {1, 2},
        raw otherwise.
    sigma_tilde : float, optional
        Fractional envelope width. Derived from the coupling as
        sqrt(2 s / phi^2) when omitted; required explicitly for raw
        moments at zero coupling, where s/phi^2 is indeterminate.
    tol : float
        Node count is doubled until successive evaluations agree to this
        relative tolerance (the integrand is a Gaussian times bounded
        trigonometric factors, so convergence is spectral).

    Raises
    ------
    PostSelectionSingular
        If the post-selected normalization falls below the floor.
    """
    if n < 0:
        raise ValueError("moment order n must be >= 0")
    if centered is None:
        centered = n in (1, 2)
    if sigma_tilde is None:
        if coupling.phi == 0.0:
            if centered:
                # zero coupling leaves the pointer untouched
                return 0.0 if n >= 1 else 1.0
            raise ValueError(
                "raw moments at zero coupling need an explicit sigma_tilde"
            )
        sigma_tilde = math.sqrt(2.0 * coupling.s) / abs(coupling.phi)
    aw = weak_value(theta)
    aw2 = aw.magnitude**2
    im_aw = aw.value.imag

    def evaluate(nodes: int) -> float:
        x, w = _hermgauss(nodes)
        om_t = math.sqrt(2.0) * sigma_tilde * x  # Omega/omega0 at the nodes
        gp = -(coupling.phi / 2.0) * (1.0 + om_t)  # interaction phase g*omega
        sin2 = np.sin(gp) ** 2
        sin_2gp = np.sin(2.0 * gp)
        pn = om_t**n if centered else (1.0 + om_t) ** n
        norm = 1.0 / math.sqrt(math.pi)

        den = 1.0 + (aw2 - 1.0) * norm * np.sum(w * sin2) + im_aw * norm * np.sum(w * sin_2gp)
        if abs(den) < DENOMINATOR_FLOOR:
            raise PostSelectionSingular(
                f"post-selected normalization {den!r} below floor at theta={theta!r}"
            )
        num = (
            norm * np.sum(w * pn)
            + (aw2 - 1.0) * norm * np.sum(w * pn * sin2)
            + im_aw * norm * np.sum(w * pn * sin_2gp)
        )
        return num / den

    nodes = start_nodes
    previous = evaluate(nodes)
    while nodes < max_nodes:
        nodes *= 2
        current = evaluate(nodes)
        scale = max(abs(current), abs(previous), 1e-300)
        if abs(current - previous) / scale < tol:
            previous = current
            break
        previous = current
    result = previous
    if centered:
        result *= (coupling.phi / 2.0) ** n
    return result
