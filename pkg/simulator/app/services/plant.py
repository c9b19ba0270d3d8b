import logging
import math

import numpy as np
from scipy.linalg import expm

from app.core.errors import DomainError, InstabilityError
from app.schemas.plant import ContinuousPlant, DiscretePlant, PlantParams, PlantState

logger = logging.getLogger(__name__)


def second_order_from_tf(gain: float, a1: float, a0: float) -> ContinuousPlant:
    """Controllable canonical realization of gain / (s^2 + a1 s + a0).

    States are (position-like, velocity-like); the input gain sits in B.
    """
    return ContinuousPlant(
        a_matrix=[[0.0, 1.0], [-a0, -a1]],
        b_matrix=[[0.0], [gain]],
        c_matrix=[[1.0, 0.0]],
        d_scalar=0.0,
    )


def plant_from_params(params: PlantParams) -> ContinuousPlant:
    return second_order_from_tf(params.gain, params.a1, params.a0)


def discretize_zoh(plant: ContinuousPlant, h: float) -> DiscretePlant:
    """Exact zero-order-hold discretization.

    With the input held over one period,
         |A B|      |Ad Bd|
    exp (|0 0| h) = |0  I |
    so one matrix exponential of the augmented matrix yields both maps.
    """
    if not h > 0:
        raise DomainError(f"sampling period must be positive, got {h}")
    n = plant.order
    augmented = np.zeros((n + 1, n + 1))
    augmented[:n, :n] = plant.a_matrix
    augmented[:n, n:] = plant.b_matrix
    phi = expm(augmented * h)
    return DiscretePlant(
        ad=phi[:n, :n],
        bd=phi[:n, n],
        cd=plant.c_matrix[0],
        d_scalar=plant.d_scalar,
        h=h,
    )


def plant_step(plant: DiscretePlant, state: PlantState, u: float, step: int = 0) -> PlantState:
    if not math.isfinite(u):
        raise InstabilityError(step, "non-finite plant input")
    x = plant.ad @ np.asarray(state.x) + plant.bd * u
    y = float(plant.cd @ x) + plant.d_scalar * u
    if not (np.all(np.isfinite(x)) and math.isfinite(y)):
        raise InstabilityError(step)
    return PlantState(x=tuple(x.tolist()), y=y)


def output(plant: DiscretePlant, state: PlantState) -> float:
    """Sensor reading of the current state (ideal sensor, no feedthrough)"""
    return float(plant.cd @ np.asarray(state.x))
