from .ode import StepControl, Trajectory, ode_solve
from .quadrature import (
    NODE_BUDGET,
    QuadratureResult,
    integrate,
    integrate_halfline,
    integrate_unit,
)
from .search import bisect, golden_max, grid_sup

__all__ = [
    "NODE_BUDGET",
    "QuadratureResult",
    "StepControl",
    "Trajectory",
    "bisect",
    "golden_max",
    "grid_sup",
    "integrate",
    "integrate_halfline",
    "integrate_unit",
    "ode_solve",
]
