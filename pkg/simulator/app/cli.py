"""lossyloop command line.

    lossyloop <command> [--config PATH] [--out DIR] [--set section.key=value]...

Exit codes: 0 success, 1 a run went unstable or an output could not be
written, 2 the config (file or --set) is invalid.
"""

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Callable, Dict, Optional, Sequence

from app.core.config import settings
from app.core.errors import CalibrationError, ConfigError, SimulatorError
from app.core.logging import configure_logging
from app.schemas.experiment import Command, ExperimentConfig, ExperimentSpec
from app.schemas.simulation import LossKind, SimConfig
from app.services import reporting
from app.services.channel import region_table, sweep_from_settings
from app.services.config_loader import parse_config, render_section
from app.services.control import evaluate_grid, select_baseline
from app.services.plant import discretize_zoh, plant_from_params
from app.services.simcore import batch_run, run_closed_loop

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def _loss_label(sim: SimConfig) -> str:
    if sim.loss.kind == LossKind.CHANNEL:
        return f"channel link at {sim.loss.distance:g} m"
    return f"PLR {sim.loss.p:g}"


def cmd_sweep_channel(spec: ExperimentSpec, config: ExperimentConfig) -> int:
    curve = sweep_from_settings(config.radio, config.path_loss, config.sweep)
    csv_path = reporting.write_csv(reporting.sweep_frame(curve), spec.output_dir / "sweep.csv")
    table = region_table(config.radio, config.path_loss, config.regions, curve)
    reporting.write_csv(reporting.regions_frame(table), spec.output_dir / "regions.csv")
    for source, (connected_end, disconnected_start) in table.items():
        logger.info(
            f"{source} regions: connected up to {connected_end} m, "
            f"disconnected from {disconnected_start} m"
        )
    reporting.plot_sweep(
        csv_path,
        spec.output_dir / "sweep.svg",
        f"Packet loss rate vs distance, {config.radio.tx_power:g} dBm",
    )
    return EXIT_OK


def cmd_run(spec: ExperimentSpec, config: ExperimentConfig) -> int:
    sim = config.simulation()
    result = run_closed_loop(sim)
    csv_path = reporting.write_csv(
        reporting.timeseries_frame(result), spec.output_dir / "timeseries.csv"
    )
    logger.info(
        f"IAE {result.iae:.4f} over {result.steps} steps, observed PLR {result.observed_plr:.4f}"
    )
    if result.failed:
        # the partial CSV is kept; a diverged trace has no useful chart
        logger.error(f"Run failed at step {result.failure_step}: {result.failure_reason}")
        return EXIT_FAILURE
    reporting.plot_timeseries(
        csv_path,
        spec.output_dir / "timeseries.svg",
        f"{sim.predictor.label}, {_loss_label(sim)}: IAE {result.iae:.3f}",
    )
    return EXIT_OK


def cmd_batch(spec: ExperimentSpec, config: ExperimentConfig) -> int:
    summary = batch_run(config.simulation(), config.batch.n_seeds, config.batch.max_workers)
    reporting.write_csv(reporting.summary_frame(summary), spec.output_dir / "summary.csv")
    logger.info(
        f"{summary.n_replicas} replicas: median IAE {summary.median:.4f}, "
        f"mean {summary.mean:.4f}, range [{summary.min:.4f}, {summary.max:.4f}]"
    )
    return EXIT_FAILURE if summary.n_failed else EXIT_OK


def cmd_compare(spec: ExperimentSpec, config: ExperimentConfig) -> int:
    rows = []
    n_failed = 0
    for bar, sim in config.compare_runs():
        logger.info(f"Comparing {bar} ({sim.predictor.label}) over {config.batch.n_seeds} seeds")
        summary = batch_run(sim, config.batch.n_seeds, config.batch.max_workers)
        n_failed += summary.n_failed
        p = sim.loss.p if sim.loss.kind == LossKind.BERNOULLI else math.nan
        rows.append((bar, sim.predictor.label, p, summary))

    frame = reporting.compare_frame(rows)
    csv_path = reporting.write_csv(frame, spec.output_dir / "compare.csv")
    table = reporting.text_table(frame)
    (spec.output_dir / "compare.txt").write_text(table, encoding="utf-8")
    logger.info(f"Median IAE per predictor:\n{table}")
    reporting.plot_compare(
        csv_path,
        spec.output_dir / "compare.svg",
        f"Accumulated IAE, {_loss_label(config.simulation())}",
    )
    return EXIT_FAILURE if n_failed else EXIT_OK


def cmd_calibrate(spec: ExperimentSpec, config: ExperimentConfig) -> int:
    plant = discretize_zoh(plant_from_params(config.plant), config.sim.h)
    grid = config.calibration.points(config.pid.n_filter, config.sim.h)
    evaluated = evaluate_grid(plant, config.reference, grid, config.sim.duration)
    reporting.write_csv(reporting.calibration_frame(evaluated), spec.output_dir / "calibration.csv")
    best, best_iae = select_baseline(evaluated, config.calibration.target_iae)

    # re-run the winner through the full loop on a perfect link
    lossless = config.simulation().loss.model_copy(update={"kind": LossKind.BERNOULLI, "p": 0.0})
    check = run_closed_loop(config.simulation(pid=best, loss=lossless))
    if check.failed or not math.isclose(check.iae, best_iae, rel_tol=1e-9, abs_tol=1e-12):
        raise CalibrationError(
            f"verification run gave IAE {check.iae:.6g}, grid search gave {best_iae:.6g}",
            [best],
        )

    fragment = render_section(
        "pid",
        {"k": best.k, "ti": best.ti, "td": best.td, "n_filter": best.n_filter},
        comment=f"lossless IAE {check.iae:.6g} (target {config.calibration.target_iae:g})",
    )
    path = spec.output_dir / "pid.ini"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(fragment, encoding="utf-8")
    logger.info(f"Wrote {path}")
    return EXIT_OK


COMMANDS: Dict[Command, Callable[[ExperimentSpec, ExperimentConfig], int]] = {
    Command.SWEEP_CHANNEL: cmd_sweep_channel,
    Command.RUN: cmd_run,
    Command.BATCH: cmd_batch,
    Command.COMPARE: cmd_compare,
    Command.CALIBRATE: cmd_calibrate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lossyloop",
        description=f"{settings.PROJECT_NAME}: {settings.DESCRIPTION}",
    )
    parser.add_argument("command", choices=[c.value for c in Command])
    parser.add_argument("--config", type=Path, default=None, help="Config file (defaults if omitted)")
    parser.add_argument("--out", type=Path, default=Path("out"), help="Output directory")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="Override one config value; may be repeated",
    )
    parser.add_argument("--log-level", default=None, help=f"Defaults to {settings.LOG_LEVEL}")
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.VERSION}")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    spec = ExperimentSpec(
        command=Command(args.command),
        config_path=args.config,
        output_dir=args.out,
        overrides=args.overrides,
    )
    try:
        config = parse_config(spec.config_path, spec.overrides)
    except ConfigError as e:
        logger.error(f"Invalid config: {e}")
        return EXIT_CONFIG

    logger.info(f"{spec.command.value}: writing to {spec.output_dir}")
    try:
        code = COMMANDS[spec.command](spec, config)
    except SimulatorError as e:
        logger.error(f"{spec.command.value} failed: {e}")
        return EXIT_FAILURE
    except OSError as e:
        logger.error(f"Cannot write outputs to {spec.output_dir}: {e}")
        return EXIT_FAILURE
    logger.info(f"{spec.command.value} finished with exit code {code}")
    return code


if __name__ == "__main__":
    sys.exit(main())
