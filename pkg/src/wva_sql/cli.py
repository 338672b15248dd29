"""Command-line surface: figure data, noise reports, and verification suites.

Subcommands
-----------
distribution
    Output photon-number distribution curves (the six-curve family varying
    the displacement phase and the selection offset, or a single curve for
    explicit parameters) as CSV plus a JSON manifest.
noise
    Noise-budget JSON report (shot, radiation pressure, SQL, intensity,
    minimum displacement) and an optional intensity-sweep CSV.
squeeze
    Squeezed-vacuum noise-ratio curves over intensity, or the optimal-angle
    summary with --optimize.
verify
    Cross-validation suite: picture equivalence, quadrature oracles,
    intensity-floor and squeezing identities, Monte-Carlo agreement.
    Nonzero exit on any failure.

Every output file embeds the fully resolved parameter set; CSV and JSON
artifacts are byte-stable for a given (version, seed, config). The
WVA_SQL_THREADS environment variable caps sweep parallelism.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .heisenberg import (
    FrequencyGrid,
    mean_shift_kernel,
    photon_distribution,
    second_moment_kernel,
    write_distribution_csv,
)
from .noise import minimum_displacement, snr, total_variance
from .oracle import (
    McConfig,
    gaussian_integral_check,
    monte_carlo_ensemble,
    quadrature_moments,
    run_manifest,
)
from .params import PulseParams, SelectionParams, measurement_intensity, params_to_config
from .schrodinger import closed_first_moment, closed_second_moment
from .squeezing import SqueezeParams, intensity_ratio, optimize_angles

# fiducial figure parameters (dimensionless side)
FID_SIGMA_TILDE = 1.0
FID_THETA = 1e-3
FID_PHI = 1e-4
PHI_FAMILY = (2e-4, 1e-4, 5e-5)
THETA_FAMILY = (2e-3, 1e-3, 5e-4)

# fiducial laboratory parameters (SI side)
FID_OMEGA0 = 1.8e15  # rad/s
FID_INTERVAL = 1e-3  # s
FID_MASS = 1e-3  # kg
FID_PULSE_ENERGY = 10.0  # J


def _thread_cap() -> int:
    raw = os.environ.get("WVA_SQL_THREADS", "")
    if raw:
        try:
            cap = int(raw)
        except ValueError as exc:
            raise SystemExit(f"WVA_SQL_THREADS must be an integer, got {raw!r}") from exc
        if cap < 1:
            raise SystemExit("WVA_SQL_THREADS must be >= 1")
        return cap
    return os.cpu_count() or 1


def _sweep_map(fn, items):
    """Order-preserving map, parallel over sweep points up to the thread cap."""
    items = list(items)
    workers = min(len(items), _thread_cap())
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _build_pulse(args) -> PulseParams:
    return PulseParams(
        omega0=args.omega0,
        sigma_omega=args.sigma_tilde * args.omega0,
        interval_T=args.interval_s,
        mirror_mass=args.mass_g * 1e-3,
        pulse_energy=args.pulse_energy_j,
    )


def _build_selection(args, pulse: PulseParams) -> SelectionParams:
    if args.phi is not None and args.ell_m is not None:
        raise SystemExit("give only one of --phi and --ell-m")
    if args.phi is not None:
        return SelectionParams.from_phi(args.theta, args.phi, pulse.omega0)
    return SelectionParams(theta=args.theta, ell=args.ell_m or 0.0)


def _add_param_flags(parser: argparse.ArgumentParser, theta_default: float) -> None:
    parser.add_argument("--theta", type=float, default=theta_default, help="selection offset [rad]")
    parser.add_argument("--phi", type=float, default=None, help="displacement phase [rad]")
    parser.add_argument("--ell-m", type=float, default=None, help="mirror displacement [m]")
    parser.add_argument("--sigma-tilde", type=float, default=FID_SIGMA_TILDE, help="fractional spectral width")
    parser.add_argument("--omega0", type=float, default=FID_OMEGA0, help="central angular frequency [rad/s]")
    parser.add_argument("--mass-g", type=float, default=FID_MASS * 1e3, help="mirror mass [g]")
    parser.add_argument("--interval-s", type=float, default=FID_INTERVAL, help="pulse interval [s]")
    parser.add_argument("--pulse-energy-j", type=float, default=FID_PULSE_ENERGY, help="energy per pulse [J]")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory")
    parser.add_argument("--seed", type=int, default=20250809, help="RNG seed")
    parser.add_argument("--format", choices=("csv", "json"), default="csv", help="sweep output format")


def _curve_filename(prefix: str, theta: float, phi: float) -> str:
    return f"{prefix}_theta{theta:.0e}_phi{phi:.0e}.csv"


def cmd_distribution(args) -> int:
    pulse = _build_pulse(args)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    grid = FrequencyGrid.uniform(pulse.sigma_tilde)
    prefix = "fig1b" if args.normalized else "fig1a"

    explicit = args.theta != FID_THETA or args.phi is not None or args.ell_m is not None
    if explicit:
        sel = _build_selection(args, pulse)
        curves = [(sel.theta, sel)]
    else:
        curves = []
        for phi in PHI_FAMILY:
            curves.append((FID_THETA, SelectionParams.from_phi(FID_THETA, phi, pulse.omega0)))
        for theta in THETA_FAMILY:
            curves.append((theta, SelectionParams.from_phi(theta, FID_PHI, pulse.omega0)))

    manifest = {"figure": prefix, "version": __version__, "curves": []}
    for theta, sel in curves:
        dist = photon_distribution(grid, pulse, sel)
        if args.normalized:
            dist = dist.as_probability()
        name = _curve_filename(prefix, theta, dist.params["phi"])
        with open(out / name, "w") as fh:
            write_distribution_csv(dist, fh)
        manifest["curves"].append({"file": name, **{k: dist.params[k] for k in sorted(dist.params)}})
    _write_json(out / f"{prefix}_manifest.json", manifest)
    print(f"wrote {len(curves)} curve(s) to {out}")
    return 0


def _parse_sweep(spec: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) not in (2, 3):
        raise SystemExit("--I-sweep expects lo:hi[:n]")
    lo, hi = float(parts[0]), float(parts[1])
    n = int(parts[2]) if len(parts) == 3 else 41
    if lo <= 0 or hi <= lo or n < 2:
        raise SystemExit("--I-sweep needs 0 < lo < hi and n >= 2")
    return np.logspace(math.log10(lo), math.log10(hi), n)


def cmd_noise(args) -> int:
    pulse = _build_pulse(args)
    sel = _build_selection(args, pulse)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)

    budget = total_variance(pulse, sel)
    report = snr(pulse, sel)
    payload = {
        "params": params_to_config(pulse, sel),
        "shot": budget.shot,
        "radiation_pressure": budget.radiation_pressure,
        "total": budget.total,
        "sql": budget.sql_reference,
        "I": budget.intensity_I,
        "snr": report.snr,
        "ell_min_m": report.ell_min,
        "ell_sql_m": report.ell_sql,
    }
    if args.exact_N:
        exact = total_variance(pulse, sel, exact_n=True)
        payload["exact_n"] = {
            "shot": exact.shot,
            "radiation_pressure": exact.radiation_pressure,
            "total": exact.total,
            "total_delta_rel": exact.total / budget.total - 1.0,
        }
        print(f"exact-N total differs by {payload['exact_n']['total_delta_rel']:+.3e} (relative)")
    _write_json(out / "noise_budget.json", payload)

    if args.I_sweep:
        i_values = _parse_sweep(args.I_sweep)
        eta = budget.eta

        def ratio_at(i_val: float) -> float:
            scaled = pulse.with_photon_number(i_val / eta)
            b = total_variance(scaled, sel)
            return b.total / b.sql_reference

        ratios = _sweep_map(ratio_at, i_values)
        sweep_path = out / ("intensity_sweep.json" if args.format == "json" else "intensity_sweep.csv")
        if args.format == "json":
            _write_json(sweep_path, {"params": params_to_config(pulse, sel),
                                     "I": list(map(float, i_values)),
                                     "total_over_sql": ratios})
        else:
            with open(sweep_path, "w") as fh:
                fh.write("# noise-budget intensity sweep\n")
                for key, val in sorted(params_to_config(pulse, sel).items()):
                    fh.write(f"# {key} = {val:.17g}\n")
                fh.write("I,total_over_sql\n")
                for i_val, r in zip(i_values, ratios):
                    fh.write(f"{i_val:.17g},{r:.17g}\n")
        print(f"wrote {sweep_path}")

    print(f"ell_sql = {report.ell_sql:.6e} m")
    print(f"I = {budget.intensity_I:.6f}")
    return 0


def cmd_squeeze(args) -> int:
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    pulse = _build_pulse(args)
    sel = _build_selection(args, pulse)

    if args.optimize:
        best = optimize_angles(pulse, sel, args.r)
        payload = {
            "r": args.r,
            "phi_s1": best.phi_s1,
            "phi_s2": best.phi_s2,
            "intensity": best.intensity,
            "ratio_min": best.ratio,
        }
        _write_json(out / "squeeze_optimum.json", payload)
        print(
            f"optimal angles (phi_s1, phi_s2) = ({best.phi_s1:g}, {best.phi_s2:g}), "
            f"I* = {best.intensity:.6g}, min ratio = {best.ratio:.6g}"
        )
        return 0

    i_values = np.logspace(-2, 2, 201)
    custom = args.phis1 is not None or args.phis2 is not None
    if custom:
        curves = [(args.r, args.phis1 or 0.0, args.phis2 or 0.0)]
    else:
        curves = [(0.0, 0.0, 0.0), (args.r, 0.0, 0.0), (args.r, math.pi, math.pi), (args.r, 0.0, math.pi)]

    written = []
    for r, p1, p2 in curves:
        sq = SqueezeParams.constant(r, p1, p2)
        ratios = _sweep_map(lambda i_val: intensity_ratio(i_val, sq), i_values)
        name = f"fig3_r{r:g}_phis1_{p1:.3g}_phis2_{p2:.3g}.csv"
        with open(out / name, "w") as fh:
            fh.write("# squeezed-vacuum noise ratio\n")
            fh.write(f"# r_s = {r:.17g}\n")
            fh.write(f"# phi_s1 = {p1:.17g}\n")
            fh.write(f"# phi_s2 = {p2:.17g}\n")
            fh.write("I,Rs2\n")
            for i_val, ratio in zip(i_values, ratios):
                fh.write(f"{i_val:.17g},{ratio:.17g}\n")
        written.append(name)
    _write_json(out / "fig3_manifest.json", {"version": __version__, "curves": written})
    print(f"wrote {len(written)} curve(s) to {out}")
    return 0


def _verify_checks(args) -> list[dict]:
    checks = []

    def record(name: str, observed: float, tolerance: float) -> None:
        tol = args.strict if args.strict is not None else tolerance
        checks.append(
            {"check": name, "observed": observed, "tolerance": tol, "passed": bool(observed <= tol)}
        )

    # picture equivalence on a (s, theta, phi) grid
    s_grid = np.logspace(-10, -1, 10)
    theta_grid = np.linspace(1e-4, math.pi / 2, 10)
    phi_grid = np.logspace(-6, -2, 10)
    worst = 0.0
    for s in s_grid:
        for theta in theta_grid:
            for phi in phi_grid:
                first = closed_first_moment(s, theta, phi)
                second = closed_second_moment(s, theta, phi)
                h1 = (phi / 2.0) * mean_shift_kernel(s, theta, phi)
                h2 = (phi * phi / 4.0) * second_moment_kernel(s, theta, phi)
                worst = max(
                    worst,
                    abs(h1 - first) / max(abs(first), 1e-300),
                    abs(h2 - second) / max(abs(second), 1e-300),
                )
    record("picture_equivalence", worst, 1e-12)

    # closed forms versus adaptive quadrature at random parameter points
    rng = np.random.Generator(np.random.Philox(key=args.seed))
    worst = 0.0
    for _ in range(20):
        st = rng.uniform(0.2, 1.0)
        theta = rng.uniform(1e-3, math.pi / 2)
        phi = 10.0 ** rng.uniform(-6, -2)
        pulse = PulseParams(
            omega0=FID_OMEGA0, sigma_omega=st * FID_OMEGA0,
            interval_T=FID_INTERVAL, mirror_mass=FID_MASS, pulse_energy=FID_PULSE_ENERGY,
        )
        sel = SelectionParams.from_phi(theta, phi, pulse.omega0)
        q = quadrature_moments(pulse, sel, domain="extended")
        s = derive_coupling(sel, pulse).s
        n_closed = total_output_photons(pulse, sel, mode="exact")
        worst = max(
            worst,
            abs(q.N - n_closed) / n_closed,
            abs(q.mean - mean_shift_kernel(s, theta, phi)) / max(abs(q.mean), 1e-300),
            abs(q.second - second_moment_kernel(s, theta, phi)) / q.second,
        )
    record("closed_vs_quadrature", worst, 1e-8)

    # Gaussian base integrals
    worst = 0.0
    cases = [(1.0, 0.0, 0.0), (1.0, 0.0, math.pi / 2), (2.0, 1.0, 0.3)]
    cases += [(float(rng.uniform(0.3, 3.0)), float(rng.uniform(-2, 2)), float(rng.uniform(-3, 3))) for _ in range(10)]
    for a, b, c in cases:
        res = gaussian_integral_check(a, b, c)
        scale = math.sqrt(math.pi / a)
        worst = max(
            worst,
            abs(res.quadrature_cos - res.analytic_cos) / scale,
            abs(res.quadrature_sin - res.analytic_sin) / scale,
        )
    record("gaussian_integrals", worst, 1e-10)

    # intensity floor: total/SQL >= 1 with equality at I = 1
    pulse = PulseParams(
        omega0=FID_OMEGA0, sigma_omega=FID_OMEGA0, interval_T=FID_INTERVAL,
        mirror_mass=FID_MASS, pulse_energy=FID_PULSE_ENERGY,
    )
    sel = SelectionParams(theta=FID_THETA)
    eta = measurement_intensity(pulse, sel.theta).eta
    worst = 0.0
    for i_val in np.logspace(-3, 3, 61):
        b = total_variance(pulse.with_photon_number(i_val / eta), sel)
        worst = max(worst, 1.0 - b.total / b.sql_reference)
    b1 = total_variance(pulse.with_photon_number(1.0 / eta), sel)
    worst = max(worst, abs(b1.total / b1.sql_reference - 1.0))
    record("intensity_floor", worst, 1e-12)

    # squeezing special-case identities at I = 1
    worst = max(
        abs(intensity_ratio(1.0, SqueezeParams.constant(1.0, 0.0, 0.0)) - math.cosh(2.0)) / math.cosh(2.0),
        abs(intensity_ratio(1.0, SqueezeParams.constant(1.0, math.pi, math.pi)) - math.cosh(2.0)) / math.cosh(2.0),
        abs(intensity_ratio(1.0, SqueezeParams.constant(1.0, 0.0, math.pi)) - math.exp(-2.0)) / math.exp(-2.0),
    )
    record("squeeze_special_cases", worst, 1e-6)

    # Monte-Carlo agreement with the analytic budget at I = 1
    mc_pulse = pulse.with_photon_number(1.0 / eta)
    budget = total_variance(mc_pulse, sel)
    cfg = McConfig(n_pulses=args.mc_pulses, seed=args.seed)
    est = monte_carlo_ensemble(mc_pulse, sel, cfg)
    record(
        "mc_total_variance",
        abs(est.variance - budget.total) / budget.total,
        args.strict if args.strict is not None else 3.0 * est.std_error / budget.total,
    )

    sq = SqueezeParams.constant(1.0, 0.0, math.pi)
    cfg_sq = McConfig(n_pulses=args.mc_pulses, seed=args.seed + 1, squeeze=sq)
    est_sq = monte_carlo_ensemble(mc_pulse, sel, cfg_sq)
    target = math.exp(-2.0) * budget.sql_reference
    record(
        "mc_squeezed_variance",
        abs(est_sq.variance - target) / target,
        args.strict if args.strict is not None else 3.0 * est_sq.std_error / target,
    )
    return checks


def cmd_verify(args) -> int:
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    checks = _verify_checks(args)
    for chk in checks:
        status = "pass" if chk["passed"] else "FAIL"
        print(f"{status}  {chk['check']}: observed {chk['observed']:.3e} (tolerance {chk['tolerance']:.3e})")
    payload = {"version": __version__, "seed": args.seed, "checks": checks}
    _write_json(out / "verify_report.json", payload)
    failed = [c for c in checks if not c["passed"]]
    if failed:
        print(f"{len(failed)} of {len(checks)} checks failed")
        return 1
    print(f"all {len(checks)} checks passed")
    return 0


def cmd_mc(args) -> int:
    """Standalone Monte-Carlo run emitting the run manifest."""
    pulse = _build_pulse(args)
    sel = _build_selection(args, pulse)
    squeeze = None
    if args.r:
        squeeze = SqueezeParams.constant(args.r, args.phis1 or 0.0, args.phis2 or 0.0)
    cfg = McConfig(n_pulses=args.mc_pulses, seed=args.seed, squeeze=squeeze)
    start = time.perf_counter()
    est = monte_carlo_ensemble(pulse, sel, cfg)
    wall = time.perf_counter() - start
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "mc_manifest.json", run_manifest(pulse, sel, cfg, est, wall))
    print(f"variance = {est.variance:.6e} +- {est.std_error:.2e} (mean shift {est.mean_shift:.3e})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wva-sql",
        description="Quantum-noise budget of a weak-value-amplified position measurement",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_dist = sub.add_parser("distribution", help="output photon-distribution curves")
    _add_param_flags(p_dist, theta_default=FID_THETA)
    p_dist.add_argument("--normalized", action="store_true", help="emit probability-density curves")
    p_dist.set_defaults(func=cmd_distribution)

    p_noise = sub.add_parser("noise", help="noise budget, SQL, and intensity sweep")
    _add_param_flags(p_noise, theta_default=FID_THETA)
    p_noise.add_argument("--I-sweep", dest="I_sweep", default=None, metavar="LO:HI[:N]",
                         help="log-spaced intensity sweep of total/SQL")
    p_noise.add_argument("--exact-N", dest="exact_N", action="store_true",
                         help="also report the budget with the exact output photon number")
    p_noise.set_defaults(func=cmd_noise)

    p_sq = sub.add_parser("squeeze", help="squeezed-vacuum noise-ratio curves")
    _add_param_flags(p_sq, theta_default=FID_THETA)
    p_sq.add_argument("--r", type=float, default=1.0, help="squeezing factor")
    p_sq.add_argument("--phis1", type=float, default=None, help="epoch-1 squeezing angle [rad]")
    p_sq.add_argument("--phis2", type=float, default=None, help="epoch-2 squeezing angle [rad]")
    p_sq.add_argument("--optimize", action="store_true", help="report the optimal angles and intensity")
    p_sq.set_defaults(func=cmd_squeeze)

    p_ver = sub.add_parser("verify", help="run the cross-validation suite")
    _add_param_flags(p_ver, theta_default=FID_THETA)
    p_ver.add_argument("--mc-pulses", type=int, default=10_000, help="Monte-Carlo ensemble size")
    p_ver.add_argument("--strict", type=float, default=None,
                       help="override every check tolerance (for failure-path testing)")
    p_ver.set_defaults(func=cmd_verify)

    p_mc = sub.add_parser("mc", help="standalone Monte-Carlo ensemble run")
    _add_param_flags(p_mc, theta_default=FID_THETA)
    p_mc.add_argument("--mc-pulses", type=int, default=100_000, help="Monte-Carlo ensemble size")
    p_mc.add_argument("--r", type=float, default=0.0, help="squeezing factor")
    p_mc.add_argument("--phis1", type=float, default=None, help="epoch-1 squeezing angle [rad]")
    p_mc.add_argument("--phis2", type=float, default=None, help="epoch-2 squeezing angle [rad]")
    p_mc.set_defaults(func=cmd_mc)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
