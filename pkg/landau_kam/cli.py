#!/usr/bin/env python3
"""
Landau KAM Experiment Driver
Batch runs of the constants table, reductions, drift and boundedness checks, and measure estimates
"""

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .config import COMMANDS, ExperimentConfig, load_config
from .constants import c_omega, constants_table, d_omega
from .errors import EXIT_DIVERGENCE, EXIT_OK, EXIT_RESONANCE, LandauKamError, exit_code_for
from .kam import KamResult, KamSettings, Status, kam_reduce
from .oracle import (
    GaugeSpec,
    boundedness_metric,
    drift_rate,
    integrate_flow,
    landau_drift_spectral,
    measure_excluded,
    rotation_numbers,
)
from .quadham import Gauge, build_problem
from .trigpoly import TrigPoly

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

REDUCE_COLUMNS = ["omega", "epsilon", "gauge", "status", "steps", "nu1", "second", "second_over_eps2", "message"]
NORM_COLUMNS = ["omega", "epsilon", "step", "cutoff", "kappa", "sigma", "q_norm_before", "q_norm_after",
                "chi_norm", "tail_norm", "min_divisor", "nu1", "second"]
GROWTH_COLUMNS = ["gauge", "omega", "epsilon", "p1", "slope", "stderr", "predicted", "exact", "relative_error"]
BOUNDED_COLUMNS = ["omega", "epsilon", "horizon", "sup_norm", "final_norm", "growth_exponent",
                   "nu1", "nu2", "nu2_predicted", "hyperbolic"]
MEASURE_COLUMNS = ["epsilon", "samples", "resonant", "diverged", "fraction", "ci_low", "ci_high"]


def configure_logging(verbose: bool = False, log_file: Optional[str] = None) -> None:
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )


def _label(omega: Sequence[float]) -> str:
    return " ".join(f"{w:.12g}" for w in omega)


def _write(frame: pd.DataFrame, out: Path, name: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    frame.to_csv(path, index=False, float_format="%.15g")
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def _status_code(statuses: Sequence[Status]) -> int:
    if Status.DIVERGED in statuses:
        return EXIT_DIVERGENCE
    if Status.RESONANT in statuses:
        return EXIT_RESONANCE
    return EXIT_OK


# commands ---------------------------------------------------------------

def cmd_constants(config: ExperimentConfig, out: Path) -> int:
    """Table of c_omega, d_omega and a_omega over the configured frequencies"""
    forcing = config.forcing.build()
    table = constants_table(forcing, config.omegas, config.B0)
    _write(table, out, "constants.csv")
    return EXIT_OK


def _norm_rows(omega: Sequence[float], epsilon: float, result: KamResult) -> List[Dict[str, object]]:
    rows = []
    for d in result.diagnostics:
        row = {"omega": _label(omega), "epsilon": epsilon}
        row.update(d.to_dict())
        rows.append(row)
    return rows


def _reduce_job(job: Tuple[Gauge, float, Dict[str, Any], float, Sequence[float], KamSettings]) -> KamResult:
    gauge, B0, forcing_data, epsilon, omega, settings = job
    problem = build_problem(gauge, B0, TrigPoly.from_dict(forcing_data), epsilon)
    return kam_reduce(problem, omega, settings)


def cmd_reduce(config: ExperimentConfig, out: Path) -> int:
    """
    Reduce every (omega, epsilon) pair; writes one result JSON per run, a summary
    table and the per-step norms. Exits with the worst non-converged status.
    Runs are spread over ``config.jobs`` worker processes.
    """
    payload = config.forcing.build().to_dict()
    settings = config.schedule.to_settings()
    pairs = [(i, j, omega, epsilon) for i, omega in enumerate(config.omegas)
             for j, epsilon in enumerate(config.epsilons)]
    work = [(config.gauge, config.B0, payload, epsilon, omega, settings) for _, _, omega, epsilon in pairs]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_reduce_job, work))
    else:
        results = [_reduce_job(job) for job in work]
    summary: List[Dict[str, object]] = []
    norms: List[Dict[str, object]] = []
    out.mkdir(parents=True, exist_ok=True)
    for (i, j, omega, epsilon), result in zip(pairs, results):
        (out / f"reduce_{i:03d}_{j:03d}.json").write_text(
            result.to_json(include_generator=config.output.write_generator)
        )
        second = result.normal_form.second
        summary.append({
            "omega": _label(omega),
            "epsilon": epsilon,
            "gauge": config.gauge.value,
            "status": result.status.value,
            "steps": len(result.diagnostics),
            "nu1": result.normal_form.nu1,
            "second": second,
            "second_over_eps2": second / epsilon ** 2 if epsilon > 0 else np.nan,
            "message": result.message,
        })
        norms.extend(_norm_rows(omega, epsilon, result))
    _write(pd.DataFrame(summary, columns=REDUCE_COLUMNS), out, "reduce.csv")
    _write(pd.DataFrame(norms, columns=NORM_COLUMNS), out, "reduce_norms.csv")
    return _status_code([result.status for result in results])


def _drift_row(spec: GaugeSpec, p1: float, config: ExperimentConfig, predicted: float,
               exact: float) -> Dict[str, object]:
    trajectory = integrate_flow(spec, (0.0, 0.0, p1, 0.0), config.oracle.horizon,
                                config.oracle.dt, config.oracle.samples_per_period)
    fit = drift_rate(trajectory, "x1")
    return {
        "gauge": spec.gauge.value,
        "omega": _label(spec.omega),
        "epsilon": spec.epsilon,
        "p1": p1,
        "slope": fit.slope,
        "stderr": fit.stderr,
        "predicted": predicted,
        "exact": exact,
        "relative_error": abs(fit.slope - exact) / abs(exact) if exact != 0 else np.nan,
    }


def cmd_landau_growth(config: ExperimentConfig, out: Path) -> int:
    """
    Linear drift of x1 in the Landau gauge against -4 c eps^2 p1 / B0, for eps and
    eps/2, with a symmetric-gauge control that should not drift.
    """
    forcing = config.forcing.build()
    p1 = config.oracle.p1
    rows: List[Dict[str, object]] = []
    for omega in config.omegas:
        constant = c_omega(forcing, omega, config.B0)
        for epsilon in config.epsilons:
            for eps in (epsilon, epsilon / 2.0):
                spec = GaugeSpec(Gauge.LANDAU, config.B0, forcing, eps, omega)
                predicted = -4.0 * constant * eps ** 2 * p1 / config.B0
                exact = -4.0 * landau_drift_spectral(config.B0, forcing, eps, omega) * p1 / config.B0
                rows.append(_drift_row(spec, p1, config, predicted, exact))
            control = GaugeSpec(Gauge.SYMMETRIC, config.B0, forcing, epsilon, omega)
            rows.append(_drift_row(control, p1, config, 0.0, 0.0))
    _write(pd.DataFrame(rows, columns=GROWTH_COLUMNS), out, "landau_growth.csv")
    return EXIT_OK


def cmd_symmetric_bounded(config: ExperimentConfig, out: Path) -> int:
    """Running sup of the chart norm along long symmetric-gauge runs"""
    forcing = config.forcing.build()
    x0 = (1.0, 0.0, config.oracle.p1, 0.0)
    rows: List[Dict[str, object]] = []
    for i, omega in enumerate(config.omegas):
        shift = d_omega(forcing, omega, config.B0)
        for j, epsilon in enumerate(config.epsilons):
            spec = GaugeSpec(Gauge.SYMMETRIC, config.B0, forcing, epsilon, omega)
            trajectory = integrate_flow(spec, x0, config.oracle.horizon,
                                        config.oracle.dt, config.oracle.samples_per_period)
            if config.oracle.write_trajectory:
                out.mkdir(parents=True, exist_ok=True)
                trajectory.to_csv(out / f"trajectory_{i:03d}_{j:03d}.csv")
            report = boundedness_metric(trajectory)
            rotation = rotation_numbers(spec)
            rows.append({
                "omega": _label(omega),
                "epsilon": epsilon,
                "horizon": config.oracle.horizon,
                "sup_norm": report.sup_norm,
                "final_norm": report.final_norm,
                "growth_exponent": report.growth_exponent,
                "nu1": rotation.nu1,
                "nu2": rotation.nu2,
                "nu2_predicted": shift * epsilon ** 2,
                "hyperbolic": rotation.hyperbolic,
            })
    _write(pd.DataFrame(rows, columns=BOUNDED_COLUMNS), out, "symmetric_bounded.csv")
    return EXIT_OK


def cmd_measure(config: ExperimentConfig, out: Path) -> int:
    """Excluded-frequency fraction of the Landau reduction over the epsilon sweep"""
    forcing = config.forcing.build()
    settings = config.schedule.to_settings()
    rows = []
    for epsilon in config.epsilons:
        estimate = measure_excluded(epsilon, config.B0, forcing, config.measure.samples,
                                    config.seed, settings, config.jobs)
        rows.append(estimate.to_dict())
    _write(pd.DataFrame(rows, columns=MEASURE_COLUMNS), out, "measure.csv")
    return EXIT_OK


COMMAND_HANDLERS = {
    "constants": cmd_constants,
    "reduce": cmd_reduce,
    "landau-growth": cmd_landau_growth,
    "symmetric-bounded": cmd_symmetric_bounded,
    "measure": cmd_measure,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="KAM reducibility experiments for the modulated Landau Hamiltonian")
    parser.add_argument("command", choices=COMMANDS, help="Experiment to run")
    parser.add_argument("--config", help="YAML experiment file (built-in defaults when omitted)")
    parser.add_argument("--out", default=None, help="Output directory")
    parser.add_argument("--seed", type=int, default=None, help="Override the configured seed")
    parser.add_argument("--jobs", type=int, default=None, help="Override the configured worker count")
    parser.add_argument("--verbose", action="store_true", help="Debug logging")
    parser.add_argument("--log-file", default=None, help="Also log to this file")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point"""
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.log_file)

    try:
        config = load_config(args.config, args.command)
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.jobs is not None:
            overrides["jobs"] = max(1, args.jobs)
        if overrides:
            config = config.model_copy(update=overrides)
        out = Path(args.out or config.output.directory)
        logger.info(f"Running {args.command} ({config.gauge.value} gauge, B0={config.B0}) into {out}")
        return COMMAND_HANDLERS[args.command](config, out)
    except LandauKamError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return exit_code_for(e)
    except Exception as e:
        logger.error(f"System error: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
