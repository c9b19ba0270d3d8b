"""Closed-loop engine: sensor -> lossy link -> actuator (compensator + PID) -> plant.

Random streams are derived from the master seed with numpy SeedSequence:
  [seed, LOSS_STREAM]     one uniform draw per step decides packet delivery
  [seed, CHANNEL_STREAM]  shadowing redraws of a channel-driven link
  [master, index]         replica seeds in batch_run
Because the loss stream is consumed exactly once per step, changing the
predictor never changes which packets are lost for a given seed.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional

import numpy as np

from app.core.errors import ControllerFault, InstabilityError
from app.schemas.compensation import PredictorKind
from app.schemas.plant import PlantState
from app.schemas.simulation import (
    BatchSummary,
    LossKind,
    LossProcess,
    RunResult,
    SimConfig,
    TimeseriesRow,
)
from app.schemas.control import PidState
from app.services.channel import plr_one_measure
from app.services.compensate import actuator_step, empty_history
from app.services.control import reference
from app.services.plant import discretize_zoh, output, plant_from_params, plant_step

logger = logging.getLogger(__name__)

LOSS_STREAM = 0
CHANNEL_STREAM = 1


def stream_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, stream]))


def replica_seed(master_seed: int, index: int) -> int:
    """Stable 32-bit seed for replica `index`; never derived from the clock"""
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1)[0])


def loss_draw(
    process: LossProcess,
    step: int,
    rng: np.random.Generator,
    link_plr: Optional[float] = None,
) -> bool:
    """Whether the packet of `step` is lost.

    Exactly one uniform is drawn from rng per call. A channel-driven process
    needs the current link PLR (see LossStream, which redraws it).
    """
    draw = rng.random()
    if process.kind == LossKind.BERNOULLI:
        p = process.p
    else:
        if link_plr is None:
            raise ValueError(f"channel-driven loss at step {step} needs a link PLR")
        p = link_plr
    return bool(draw < p)


class LossStream:
    """Per-run loss process state: the loss rng plus the current link PLR"""

    def __init__(self, process: LossProcess, seed: int):
        self.process = process
        base = process.seed if process.seed is not None else seed
        self._rng = stream_rng(base, LOSS_STREAM)
        self._channel_rng = stream_rng(base, CHANNEL_STREAM)
        self.link_plr: Optional[float] = None

    def lost(self, step: int) -> bool:
        if self.process.kind == LossKind.CHANNEL and step % self.process.redraw_period == 0:
            self.link_plr = plr_one_measure(
                self.process.profile, self.process.model, self.process.distance, self._channel_rng
            )
        return loss_draw(self.process, step, self._rng, self.link_plr)


def iae_update(iae: float, r: float, y: float, h: float) -> float:
    return iae + abs(r - y) * h


def run_closed_loop(config: SimConfig) -> RunResult:
    """One run; per step: reference, sense, loss draw, compensate+control, actuate, metric"""
    plant = discretize_zoh(plant_from_params(config.plant), config.h)
    loss = LossStream(config.loss, config.seed)
    if config.predictor.kind == PredictorKind.NONE and (
        config.loss.kind == LossKind.CHANNEL or config.loss.p > 0
    ):
        logger.warning(
            "Predictor 'none' on a lossy link: lost samples are replaced by the last "
            "measurement at the controller input (assumed no-compensation baseline)"
        )

    state = PlantState.at_rest(plant.order)
    history = empty_history(config.predictor)
    pid_state = PidState()
    iae = 0.0
    lost_count = 0
    rows: List[TimeseriesRow] = []
    steps = config.steps

    for k in range(steps):
        t = k * config.h
        r = reference(config.reference, t)
        y = output(plant, state)
        lost = loss.lost(k)
        try:
            act = actuator_step(
                None if lost else y,
                history,
                config.predictor,
                config.pid,
                pid_state,
                r,
                step=k,
            )
            next_state = plant_step(plant, state, act.u, step=k)
        except (InstabilityError, ControllerFault) as e:
            logger.error(f"Run with seed {config.seed} aborted: {e}")
            return RunResult(
                iae=iae,
                observed_plr=lost_count / k if k else 0.0,
                steps=k,
                lost_count=lost_count,
                timeseries=tuple(rows),
                final_state=state,
                failed=True,
                failure_step=k,
                failure_reason=str(e),
            )
        iae = iae_update(iae, r, y, config.h)
        lost_count += int(lost)
        if k % config.log_decimation == 0:
            rows.append(TimeseriesRow(t, r, y, act.y_used, act.u, lost))
        history, pid_state, state = act.history, act.pid_state, next_state

    return RunResult(
        iae=iae,
        observed_plr=lost_count / steps,
        steps=steps,
        lost_count=lost_count,
        timeseries=tuple(rows),
        final_state=state,
    )


def replica_config(config: SimConfig, index: int) -> SimConfig:
    return config.model_copy(update={"seed": replica_seed(config.seed, index)})


def summarize(seeds: List[int], results: List[RunResult]) -> BatchSummary:
    ok = [res for res in results if not res.failed]
    n_failed = len(results) - len(ok)
    if n_failed:
        logger.warning(f"{n_failed} of {len(results)} replicas were unstable and are excluded")
    iae = np.array([res.iae for res in ok], dtype=float)
    plr = np.array([res.observed_plr for res in ok], dtype=float)
    empty = not len(ok)
    return BatchSummary(
        seeds=seeds,
        iae=[res.iae for res in results],
        observed_plr=[res.observed_plr for res in results],
        failed=[res.failed for res in results],
        median=math.nan if empty else float(np.median(iae)),
        mean=math.nan if empty else float(np.mean(iae)),
        min=math.nan if empty else float(np.min(iae)),
        max=math.nan if empty else float(np.max(iae)),
        observed_plr_mean=math.nan if empty else float(np.mean(plr)),
        n_failed=n_failed,
    )


def batch_run(config: SimConfig, n_seeds: int, max_workers: Optional[int] = None) -> BatchSummary:
    """n_seeds replicas with seeds derived from (config.seed, index).

    Results are reassembled in index order, so running them in a process
    pool gives the same summary as running them one by one.
    """
    if n_seeds < 1:
        raise ValueError(f"n_seeds must be at least 1, got {n_seeds}")
    configs = [replica_config(config, i) for i in range(n_seeds)]
    if max_workers and max_workers > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(run_closed_loop, configs))
    else:
        results = [run_closed_loop(c) for c in configs]
    for c, res in zip(configs, results):
        logger.debug(f"seed {c.seed}: IAE {res.iae:.4f}, PLR {res.observed_plr:.4f}")
    return summarize([c.seed for c in configs], results)
