"""Exception hierarchy shared by every simulator module"""

from typing import Any, List, Optional


class SimulatorError(Exception):
    """Root of all simulator failures"""


class DomainError(SimulatorError, ValueError):
    """A numeric argument is outside the domain of an operation"""


class ConfigError(SimulatorError, ValueError):
    def __init__(self, key: str, message: str, line: Optional[int] = None):
        self.key = key
        self.line = line
        self.message = message
        where = f"line {line}" if line is not None else "override"
        super().__init__(f"{key} ({where}): {message}")


class ColdStartError(SimulatorError):
    """Prediction requested before any measurement was stored"""


class InstabilityError(SimulatorError):
    def __init__(self, step: int, message: str = "non-finite plant state"):
        self.step = step
        super().__init__(f"{message} at step {step}")


class ControllerFault(SimulatorError):
    def __init__(self, step: int, message: str = "non-finite controller output"):
        self.step = step
        super().__init__(f"{message} at step {step}")


class CalibrationError(SimulatorError):
    def __init__(self, message: str, grid: Optional[List[Any]] = None):
        self.grid = list(grid or [])
        super().__init__(message)
