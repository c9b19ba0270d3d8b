import logging
import math
from typing import List, Optional, Tuple

from app.core.errors import CalibrationError, ControllerFault, InstabilityError
from app.schemas.control import PidParams, PidState, ReferenceKind, ReferenceSignal
from app.schemas.plant import DiscretePlant, PlantState
from app.services.plant import output, plant_step

logger = logging.getLogger(__name__)

# |y| above this multiple of the reference peak counts as unstable
STABILITY_BOUND = 10.0


def pid_step(
    params: PidParams, state: PidState, r: float, y: float, step: int = 0
) -> Tuple[float, PidState]:
    """One positional PID update.

    P acts on r - y, I is a forward rectangle (updated after use), D is a
    first-order filtered derivative of -y so setpoint steps never kick it.
    """
    error = r - y
    proportional = params.k * error

    if params.td > 0:
        denom = params.td + params.n_filter * params.h
        ad = params.td / denom
        bd = params.k * params.td * params.n_filter / denom
        derivative = ad * state.derivative_state - bd * (y - state.prev_measurement)
    else:
        derivative = 0.0

    u = proportional + state.integral_term + derivative
    if not math.isfinite(u):
        raise ControllerFault(step)

    if math.isinf(params.ti):
        integral = state.integral_term
    else:
        integral = state.integral_term + params.k * params.h / params.ti * error
    return u, PidState(integral_term=integral, prev_measurement=y, derivative_state=derivative)


def reference(signal: ReferenceSignal, t: float) -> float:
    if signal.kind == ReferenceKind.CONSTANT:
        return signal.offset + signal.amplitude
    # half-open [0, period/2) high, [period/2, period) low; eps absorbs k*h rounding
    cycles = t / signal.period
    phase = cycles - math.floor(cycles + 1e-9)
    high = phase < 0.5 - 1e-9
    return signal.offset + (signal.amplitude if high else -signal.amplitude)


def lossless_iae(
    plant: DiscretePlant,
    params: PidParams,
    signal: ReferenceSignal,
    duration: float,
) -> Optional[float]:
    """IAE of a perfect-link run, or None when the loop leaves the stability bound"""
    steps = int(round(duration / plant.h))
    bound = STABILITY_BOUND * max(abs(signal.amplitude) + abs(signal.offset), 1e-12)
    state = PlantState.at_rest(plant.order)
    pid_state = PidState()
    iae = 0.0
    try:
        for k in range(steps):
            r = reference(signal, k * plant.h)
            y = output(plant, state)
            if abs(y) > bound:
                return None
            iae += abs(r - y) * plant.h
            u, pid_state = pid_step(params, pid_state, r, y, step=k)
            state = plant_step(plant, state, u, step=k)
    except (InstabilityError, ControllerFault):
        return None
    return iae


def evaluate_grid(
    plant: DiscretePlant,
    signal: ReferenceSignal,
    search_grid: List[PidParams],
    duration: float = 100.0,
) -> List[Tuple[PidParams, Optional[float]]]:
    """Lossless IAE of every grid point; None marks an unstable point"""
    evaluated = []
    for params in search_grid:
        iae = lossless_iae(plant, params, signal, duration)
        if iae is None:
            logger.warning(
                f"Calibration point k={params.k:g} ti={params.ti:g} td={params.td:g} is unstable"
            )
        else:
            logger.debug(f"k={params.k:g} ti={params.ti:g} td={params.td:g}: IAE {iae:.3f}")
        evaluated.append((params, iae))
    return evaluated


def select_baseline(
    evaluated: List[Tuple[PidParams, Optional[float]]], target_iae: float = 7.1
) -> Tuple[PidParams, float]:
    stable = [(params, iae) for params, iae in evaluated if iae is not None]
    if not stable:
        grid = [f"k={p.k:g},ti={p.ti:g},td={p.td:g}" for p, _ in evaluated]
        raise CalibrationError(f"every calibration grid point is unstable: {grid}", grid)
    # first point wins ties, so grid order is the tie-break
    best, best_iae = min(stable, key=lambda item: abs(item[1] - target_iae))
    logger.info(
        f"Calibrated PID k={best.k:g} ti={best.ti:g} td={best.td:g} "
        f"(lossless IAE {best_iae:.3f}, target {target_iae:g})"
    )
    return best, best_iae


def calibrate_baseline(
    plant: DiscretePlant,
    signal: ReferenceSignal,
    search_grid: List[PidParams],
    target_iae: float = 7.1,
    duration: float = 100.0,
) -> PidParams:
    """Grid point whose lossless IAE over `duration` lands closest to target_iae"""
    if not search_grid:
        raise CalibrationError("calibration grid is empty", [])
    best, _ = select_baseline(evaluate_grid(plant, signal, search_grid, duration), target_iae)
    return best
