# interface/cli.py

from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from dataclasses import asdict
from typing import Any, Dict, List, Optional

import numpy as np

from interface.checks import format_table, run_checks
from interface.run_state import RunConfig, load_run_params
from interface.study import StudyConfig, run_study
from mirror_mass.config.presets import TRAJECTORY_PRESETS
from mirror_mass.config.settings import SETTINGS
from mirror_mass.errors import ConvergenceError, MirrorMassError, NegativeMassError
from mirror_mass.physics.closed_forms import mu0_closed_form
from mirror_mass.physics.dynamics import DynamicsConfig, evolve
from mirror_mass.physics.massshift import evaluate_direct, evaluate_rates, mu_series, parallel_map
from mirror_mass.physics.quadrature import QuadratureSpec
from mirror_mass.physics.trajectory import (
    Hyperbolic,
    Trajectory,
    Uniform,
    VelocityStep,
    compile_profile,
)
from mirror_mass.utils.series_io import COLUMNS, rows_to_csv, rows_to_json

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_NONCONVERGED = 3

COMMANDS = ("mu", "mu0", "flux", "dynamics", "check", "study-sign")
FLUX_COLUMNS = ("tau", "mu_dot", "flux_plus", "flux_minus", "alpha", "err")
MU0_COLUMNS = ("a", "mu0", "mu0_numeric", "err")
DYNAMICS_COLUMNS = (
    "tau", "eta", "zplus", "zminus", "m_total", "mu", "alpha", "m_dot", "flux_plus", "flux_minus", "err",
)


# ----------------------------
# Parser
# ----------------------------
def _common_flags() -> argparse.ArgumentParser:
    # defaults are None so that unset flags never override --config / --from-code
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("trajectory")
    g.add_argument("--traj", help='profile expression, e.g. "eta = 0.01*sin(0.05*tau)"')
    g.add_argument("--family", choices=["uniform", "hyperbolic", "step", "preset"])
    g.add_argument("--preset", choices=sorted(TRAJECTORY_PRESETS))
    g.add_argument("--beta", type=float)
    g.add_argument("--alpha0", type=float)
    g.add_argument("--tau0", help="onset of acceleration (number or '<x>/a')")
    g.add_argument("--beta-i", dest="beta_i", type=float)
    g.add_argument("--beta-f", dest="beta_f", type=float)
    g.add_argument("--width", help="step width (number or '<x>/a')")
    g = p.add_argument_group("run")
    g.add_argument("--a", type=float, help="coupling, 1/length")
    g.add_argument("--tau-start", dest="tau_start")
    g.add_argument("--tau-end", dest="tau_end")
    g.add_argument("--dtau")
    g.add_argument("--rel-tol", dest="rel_tol", type=float)
    g.add_argument("--abs-tol", dest="abs_tol", type=float)
    g.add_argument("--window", type=float, help="history window in units of 1/a")
    g.add_argument("--method", choices=["accumulate", "direct"])
    g.add_argument("--threads", type=int, help="worker threads, 0 = all cores")
    g.add_argument("--seed", type=int)
    g.add_argument("--mass", type=float, help="bare mass for dynamics")
    g.add_argument("--kick", type=float, help="peak/a of the Gaussian acceleration pulse before tau-start")
    g.add_argument("--samples", type=int)
    g.add_argument("--quick", action="store_true", default=None)
    g = p.add_argument_group("output")
    g.add_argument("--out", help="output path (default: standard output)")
    g.add_argument("--format", choices=["csv", "json"])
    g.add_argument("--emit-plot-script", dest="plot_script", help="write a gnuplot script for the CSV output")
    g.add_argument("--config", help="key = value file; flags override it")
    g.add_argument("--from-code", dest="from_code", help="run code from a previous JSON output")
    g.add_argument("-v", "--verbose", action="count", default=0)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mirror-mass",
        description="Vacuum-induced mass shift of a partially reflecting mirror in 1+1 dimensions.",
    )
    parser.add_argument("--version", action="version", version=SETTINGS.run.version)
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_flags()
    helps = {
        "mu": "mass shift series mu(tau) with rate and fluxes",
        "mu0": "uniform-motion constant mu0(a), closed form and quadrature",
        "flux": "rate and flux pair on a grid",
        "dynamics": "backreaction evolution of a free mirror",
        "check": "invariant battery; exit 1 on any failure",
        "study-sign": "random search for negative mass shifts",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


# ----------------------------
# Building blocks
# ----------------------------
def configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(
        level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr
    )


def quadrature_spec(cfg: RunConfig) -> QuadratureSpec:
    if cfg.quick and cfg.window is None:
        return QuadratureSpec.from_overrides(rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol, window_lambda=30.0)
    return QuadratureSpec.from_overrides(rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol, window_lambda=cfg.window)


def build_trajectory(cfg: RunConfig) -> Trajectory:
    """--traj wins over --family; DSL profiles are at rest before tau-start."""
    if cfg.traj:
        return compile_profile(cfg.traj, uniform_before=cfg.tau_start, scale=1.0 / cfg.a)
    if cfg.family == "uniform":
        return Uniform(cfg.beta)
    if cfg.family == "hyperbolic":
        return Hyperbolic(cfg.alpha0, cfg.tau0)
    if cfg.family == "step":
        return VelocityStep(cfg.beta_i, cfg.beta_f, cfg.width)
    if cfg.family == "preset":
        if not cfg.preset:
            raise ValueError("--family preset needs --preset NAME")
        return TRAJECTORY_PRESETS[cfg.preset].build(cfg.a)
    raise ValueError(f"unknown family: {cfg.family}")


def tau_grid(cfg: RunConfig) -> np.ndarray:
    n = int(math.floor((cfg.tau_end - cfg.tau_start) / cfg.dtau + 1e-9))
    grid = cfg.tau_start + cfg.dtau * np.arange(n + 1)
    if grid[-1] < cfg.tau_end - 1e-12 * max(1.0, abs(cfg.tau_end)):
        grid = np.append(grid, cfg.tau_end)
    return grid


def metadata(cfg: RunConfig, spec: QuadratureSpec, trajectory: Optional[Dict[str, Any]]) -> Dict[str, Any]:
    return {
        "command": cfg.command,
        "coupling": {"a": cfg.a},
        "trajectory": trajectory,
        "tolerances": asdict(spec),
        "version": SETTINGS.run.version,
        "run_code": cfg.run_code(),
    }


def render(cfg: RunConfig, rows: List[Dict[str, float]], meta: Dict[str, Any], columns) -> str:
    if cfg.format == "json":
        return rows_to_json(rows, meta, columns)
    return rows_to_csv(rows, columns)


def write_output(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def plot_script(csv_path: str, columns, y: str) -> str:
    col = list(columns).index(y) + 1
    return (
        'set datafile separator ","\n'
        "set key autotitle columnhead\n"
        'set xlabel "tau"\n'
        f'set ylabel "{y}"\n'
        f'plot "{csv_path}" using 1:{col} with lines\n'
    )


def _emit(cfg: RunConfig, script_path: Optional[str], text: str, columns, y: str) -> None:
    write_output(text, cfg.out)
    if script_path:
        if cfg.out is None or cfg.format != "csv":
            raise ValueError("--emit-plot-script needs --out and --format csv")
        write_output(plot_script(cfg.out, columns, y), script_path)


# ----------------------------
# Commands
# ----------------------------
def cmd_mu(cfg: RunConfig, script_path: Optional[str] = None) -> int:
    spec = quadrature_spec(cfg)
    traj = build_trajectory(cfg)
    series = mu_series(traj, cfg.a, tau_grid(cfg), spec, method=cfg.method, threads=cfg.threads)
    rows = [s.as_dict() for s in series.samples]
    _emit(cfg, script_path, render(cfg, rows, metadata(cfg, spec, series.trajectory), COLUMNS), COLUMNS, "mu")
    logger.info("mu: %d samples, converged=%s", len(series), series.converged)
    return EXIT_OK if series.converged else EXIT_NONCONVERGED


def cmd_mu0(cfg: RunConfig, script_path: Optional[str] = None) -> int:
    spec = quadrature_spec(cfg)
    numeric = evaluate_direct(Uniform(cfg.beta), 0.0, cfg.a, spec, subtract_mu0=False)
    row = {"a": cfg.a, "mu0": mu0_closed_form(cfg.a), "mu0_numeric": numeric.value, "err": numeric.total_error}
    write_output(render(cfg, [row], metadata(cfg, spec, Uniform(cfg.beta).descriptor()), MU0_COLUMNS), cfg.out)
    return EXIT_OK if numeric.converged else EXIT_NONCONVERGED


def cmd_flux(cfg: RunConfig, script_path: Optional[str] = None) -> int:
    spec = quadrature_spec(cfg)
    traj = build_trajectory(cfg)
    grid = tau_grid(cfg)
    rates = parallel_map(lambda t: evaluate_rates(traj, t, cfg.a, spec), list(grid), cfg.threads)
    alphas = traj.rapidity(grid, 1)[1]
    rows = [
        {"tau": r.tau, "mu_dot": r.mu_dot, "flux_plus": r.flux_plus, "flux_minus": r.flux_minus,
         "alpha": float(al), "err": r.error}
        for r, al in zip(rates, alphas)
    ]
    _emit(cfg, script_path, render(cfg, rows, metadata(cfg, spec, traj.descriptor()), FLUX_COLUMNS),
          FLUX_COLUMNS, "mu_dot")
    return EXIT_OK if all(r.converged for r in rates) else EXIT_NONCONVERGED


# proper time, in units of 1/a, that a dynamics prefix spends in motion before tau-start
PREFIX_SPAN = 16.0


def kick_prefix(cfg: RunConfig) -> Trajectory:
    """
    History before tau-start: uniform motion, a Gaussian acceleration pulse of
    peak kick·a, or a --traj profile. Both moving prefixes are at rest before
    tau-start - PREFIX_SPAN/a.
    """
    start = cfg.tau_start - PREFIX_SPAN / cfg.a
    if cfg.traj:
        return compile_profile(cfg.traj, uniform_before=start, scale=1.0 / cfg.a)
    if cfg.kick == 0.0:
        return Uniform(cfg.beta)
    width = 2.0 / cfg.a
    center = cfg.tau_start - 4.0 * width
    source = f"alpha = {cfg.kick * cfg.a!r}*exp(-((tau - {center!r})/{width!r})^2)"
    return compile_profile(source, uniform_before=start, scale=1.0 / cfg.a)


def cmd_dynamics(cfg: RunConfig, script_path: Optional[str] = None) -> int:
    spec = quadrature_spec(cfg)
    prefix = kick_prefix(cfg)
    dyn = DynamicsConfig(
        a=cfg.a, initial=prefix, bare_mass=cfg.mass, tau_start=cfg.tau_start, dtau=cfg.dtau, spec=spec
    )
    series = evolve(dyn, cfg.tau_end)
    rows = [
        {"tau": s.tau, "eta": s.eta, "zplus": s.z.zplus, "zminus": s.z.zminus, "m_total": s.m_total,
         "mu": s.m_total - cfg.mass, "alpha": s.alpha, "m_dot": s.m_dot, "flux_plus": s.flux_plus,
         "flux_minus": s.flux_minus, "err": s.error}
        for s in series.states
    ]
    meta = metadata(cfg, spec, prefix.descriptor())
    _emit(cfg, script_path, render(cfg, rows, meta, DYNAMICS_COLUMNS), DYNAMICS_COLUMNS, "mu")
    return EXIT_OK if series.converged else EXIT_NONCONVERGED


def cmd_check(cfg: RunConfig, script_path: Optional[str] = None) -> int:
    results = run_checks(quick=cfg.quick, a=cfg.a, spec=quadrature_spec(cfg), seed=cfg.seed)
    write_output(format_table(results), cfg.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED


def cmd_study_sign(cfg: RunConfig, script_path: Optional[str] = None) -> int:
    study = StudyConfig(
        a=cfg.a, samples=cfg.samples, seed=cfg.seed, threads=cfg.threads,
        points=11 if cfg.quick else 41,
    )
    report = run_study(study, quadrature_spec(cfg))
    write_output(report.to_json(), cfg.out)
    if report.skipped:
        logger.warning("study: %d samples skipped", report.skipped)
    return EXIT_OK


HANDLERS = {
    "mu": cmd_mu,
    "mu0": cmd_mu0,
    "flux": cmd_flux,
    "dynamics": cmd_dynamics,
    "check": cmd_check,
    "study-sign": cmd_study_sign,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    started = time.perf_counter()
    control = {"command", "config", "from_code", "verbose", "plot_script"}
    overrides = {k: v for k, v in vars(args).items() if k not in control and v is not None}
    try:
        params = load_run_params(code=args.from_code, config_path=args.config, overrides=overrides)
        cfg = RunConfig.from_params(args.command, params)
        code = HANDLERS[args.command](cfg, args.plot_script)
    except (ConvergenceError, NegativeMassError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except (ValueError, MirrorMassError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logger.info("%s finished in %.2f s with exit code %d", args.command, time.perf_counter() - started, code)
    return code


if __name__ == "__main__":
    sys.exit(main())
