"""Actuator-side packet-loss compensation.

The actuator keeps the last m measurements. When a sensor packet is lost it
stands in a prediction from that memory, computes the control command on it
and stores the prediction as if it had been measured.
"""

import logging
from typing import NamedTuple, Optional

from app.core.errors import ColdStartError, ConfigError
from app.schemas.compensation import HistoryBuffer, Predictor, PredictorKind
from app.schemas.control import PidParams, PidState
from app.services.control import pid_step

logger = logging.getLogger(__name__)

# Measurement assumed when a packet is lost before anything was ever stored:
# the plant starts at rest.
COLD_START_VALUE = 0.0


class ActuatorOutput(NamedTuple):
    u: float
    y_used: float
    history: HistoryBuffer
    pid_state: PidState
    predicted: bool


def empty_history(predictor: Predictor) -> HistoryBuffer:
    return HistoryBuffer(capacity=predictor.buffer_capacity)


def _require(history: HistoryBuffer) -> None:
    if history.is_empty:
        raise ColdStartError("no stored measurement to predict from")


def predict_hold(history: HistoryBuffer) -> float:
    _require(history)
    return history.values[0]


def predict_moving_average(history: HistoryBuffer, m: int) -> float:
    """Mean of the newest min(m, stored) values.

    Accumulated as offsets from the newest value so that a constant history
    maps onto itself exactly and m = 1 reduces to predict_hold bit for bit.
    """
    _require(history)
    if m < 1:
        raise ConfigError("predictor.m", f"must be at least 1, got {m}")
    window = history.values[:m]
    anchor = window[0]
    return anchor + sum(v - anchor for v in window) / len(window)


def predict_weighted(history: HistoryBuffer, alpha: float) -> float:
    """alpha * y(k-1) + (1 - alpha) * y(k-2), written as a step from y(k-2)"""
    _require(history)
    if not 0 < alpha < 1:
        raise ConfigError("predictor.alpha", f"must lie in (0, 1), got {alpha}")
    if len(history) == 1:
        return history.values[0]
    newest, previous = history.values[0], history.values[1]
    return previous + alpha * (newest - previous)


def predict(predictor: Predictor, history: HistoryBuffer) -> float:
    if predictor.kind == PredictorKind.MOVING_AVERAGE:
        return predict_moving_average(history, predictor.m)
    if predictor.kind == PredictorKind.WEIGHTED:
        return predict_weighted(history, predictor.alpha)
    # NONE reuses the last stored measurement, same as HOLD
    return predict_hold(history)


def actuator_step(
    received: Optional[float],
    history: HistoryBuffer,
    predictor: Predictor,
    pid: PidParams,
    pid_state: PidState,
    r: float,
    step: int = 0,
) -> ActuatorOutput:
    predicted = received is None
    if not predicted:
        y = float(received)
    elif history.is_empty:
        logger.debug(f"Loss at step {step} before any measurement; assuming rest output")
        y = COLD_START_VALUE
    else:
        y = predict(predictor, history)

    u, pid_state = pid_step(pid, pid_state, r, y, step=step)
    return ActuatorOutput(
        u=u,
        y_used=y,
        history=history.push(y),
        pid_state=pid_state,
        predicted=predicted,
    )
