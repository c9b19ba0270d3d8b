from dataclasses import dataclass
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict


class PlantParams(BaseModel):
    """gain / (s^2 + a1 s + a0); the defaults are the DC servo 1000 / (s^2 + s)"""

    gain: float = 1000.0
    a1: float = 1.0
    a0: float = 0.0

    model_config = ConfigDict(extra="forbid")


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ContinuousPlant:
    a_matrix: np.ndarray  # n x n
    b_matrix: np.ndarray  # n x 1
    c_matrix: np.ndarray  # 1 x n
    d_scalar: float = 0.0

    def __post_init__(self):
        a = _frozen(self.a_matrix)
        b = _frozen(self.b_matrix).reshape(-1, 1)
        c = _frozen(self.c_matrix).reshape(1, -1)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError("A must be a non-empty square matrix")
        n = a.shape[0]
        if b.shape != (n, 1) or c.shape != (1, n):
            raise ValueError(f"B must be {n}x1 and C must be 1x{n}")
        b.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "a_matrix", a)
        object.__setattr__(self, "b_matrix", b)
        object.__setattr__(self, "c_matrix", c)
        object.__setattr__(self, "d_scalar", float(self.d_scalar))

    @property
    def order(self) -> int:
        return self.a_matrix.shape[0]


@dataclass(frozen=True)
class DiscretePlant:
    ad: np.ndarray
    bd: np.ndarray
    cd: np.ndarray
    d_scalar: float
    h: float

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("sampling period h must be positive")
        ad = _frozen(self.ad)
        bd = _frozen(self.bd).reshape(-1)
        cd = _frozen(self.cd).reshape(-1)
        n = ad.shape[0]
        if ad.shape != (n, n) or bd.shape != (n,) or cd.shape != (n,):
            raise ValueError("inconsistent discrete plant dimensions")
        bd.setflags(write=False)
        cd.setflags(write=False)
        object.__setattr__(self, "ad", ad)
        object.__setattr__(self, "bd", bd)
        object.__setattr__(self, "cd", cd)
        object.__setattr__(self, "d_scalar", float(self.d_scalar))
        object.__setattr__(self, "h", float(self.h))

    @property
    def order(self) -> int:
        return self.ad.shape[0]


@dataclass(frozen=True)
class PlantState:
    """State vector and last output; tuples keep states comparable with =="""

    x: Tuple[float, ...]
    y: float = 0.0

    @classmethod
    def at_rest(cls, order: int) -> "PlantState":
        return cls(x=(0.0,) * order, y=0.0)
