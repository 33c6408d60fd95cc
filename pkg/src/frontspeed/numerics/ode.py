"""Dormand-Prince 5(4) integrator with dense output and stop-predicate location.

Works on Python floats (fast path for scalar problems) and on 1-D numpy
arrays.  Integration may run in either direction (``x1 < x0`` is fine).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..errors import ODEFailure

_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
# difference between the 5th and embedded 4th order weights (7 stages, FSAL)
_E = (-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40)
# continuous extension: y(x0 + th*h) = y0 + h * sum_k K_k * sum_j P[k][j] th**(j+1)
_P = (
    (1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799),
    (0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072),
    (0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632),
    (0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844),
    (0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423),
)


@dataclass(frozen=True)
class StepControl:
    rtol: float = 1e-10
    atol: float = 1e-14
    h0: Optional[float] = None
    h_min: float = 1e-15  # relative to the integration span
    max_steps: int = 200_000
    x_tol: float = 1e-12


@dataclass
class Trajectory:
    """Accepted steps of a DOPRI5 run, with 4th-order dense output."""

    xs: list
    ys: list
    status: str = "completed"  # or "stopped"
    _hs: list = field(default_factory=list, repr=False)
    _ks: list = field(default_factory=list, repr=False)

    @property
    def x_end(self):
        return self.xs[-1]

    @property
    def y_end(self):
        return self.ys[-1]

    def __call__(self, x):
        """Dense evaluation at a point inside the integrated range."""
        xs = np.asarray(self.xs)
        forward = xs[-1] >= xs[0]
        lo, hi = (xs[0], xs[-1]) if forward else (xs[-1], xs[0])
        if not lo - 1e-14 * max(1.0, abs(lo)) <= x <= hi + 1e-14 * max(1.0, abs(hi)):
            raise ValueError(f"x={x} outside integrated range [{lo}, {hi}]")
        if forward:
            i = int(np.searchsorted(xs, x, side="right")) - 1
        else:
            i = len(xs) - 1 - int(np.searchsorted(xs[::-1], x, side="left"))
        i = min(max(i, 0), len(self._hs) - 1)
        return _dense(self.ys[i], self._hs[i], self._ks[i], (x - xs[i]) / self._hs[i])

    def sample(self, points):
        return [self(x) for x in points]


def _dense(y0, h, ks, theta):
    powers = (theta, theta**2, theta**3, theta**4)
    acc = 0.0
    for k, row in zip(ks, _P):
        coef = row[0] * powers[0] + row[1] * powers[1] + row[2] * powers[2] + row[3] * powers[3]
        if coef != 0.0:
            acc = acc + coef * k
    return y0 + h * acc


def _scaled_error(err_vec, y, y_new, rtol, atol):
    if isinstance(err_vec, np.ndarray):
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        return float(np.max(np.abs(err_vec) / scale))
    return abs(err_vec) / (atol + rtol * max(abs(y), abs(y_new)))


def ode_solve(
    rhs: Callable,
    x0: float,
    y0,
    x1: float,
    control: StepControl = StepControl(),
    stop: Optional[Callable[[float, object], bool]] = None,
) -> Trajectory:
    """Integrate ``dy/dx = rhs(x, y)`` from ``x0`` to ``x1``.

    If ``stop(x, y)`` becomes true the first crossing is located on the dense
    output to ``control.x_tol`` and the run ends there with
    ``status == "stopped"``.  Step-size underflow raises :class:`ODEFailure`
    whose ``best_estimate`` is the last accepted ``(x, y)``.
    """
    if isinstance(y0, (list, tuple)):
        y0 = np.asarray(y0, dtype=float)
    span = x1 - x0
    if span == 0:
        raise ValueError("x0 == x1")
    direction = 1.0 if span > 0 else -1.0
    h_min = control.h_min * abs(span)
    rtol, atol = control.rtol, control.atol

    x, y = x0, y0
    k1 = rhs(x, y)
    if control.h0 is not None:
        h = abs(control.h0)
    else:
        d0 = _scaled_error(y, 0.0 * y, 0.0 * y, rtol, atol + rtol * np.max(np.abs(y)))
        d1 = _scaled_error(k1, 0.0 * y, 0.0 * y, rtol, atol + rtol * np.max(np.abs(y)))
        h = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        h = min(h, abs(span))
    traj = Trajectory(xs=[x], ys=[y])
    steps = 0
    while True:
        if steps >= control.max_steps:
            raise ODEFailure(f"max_steps={control.max_steps} exceeded at x={x}",
                             best_estimate=(x, y))
        remaining = (x1 - x) * direction
        if remaining <= 0:
            break
        h = min(h, remaining)
        if h < h_min:
            raise ODEFailure(f"step size underflow at x={x}", best_estimate=(x, y))
        hs = h * direction
        ks = [k1]
        for i in range(1, 6):
            yi = y
            for a, k in zip(_A[i], ks):
                yi = yi + (hs * a) * k
            ks.append(rhs(x + _C[i] * hs, yi))
        y_new = y
        for b, k in zip(_B, ks):
            if b != 0.0:
                y_new = y_new + (hs * b) * k
        k7 = rhs(x + hs, y_new)
        ks.append(k7)
        err_vec = 0.0
        for e, k in zip(_E, ks):
            if e != 0.0:
                err_vec = err_vec + (hs * e) * k
        err = _scaled_error(err_vec, y, y_new, rtol, atol)
        if not math.isfinite(err):
            h *= 0.2
            continue
        if err <= 1.0:
            x_new = x + hs if h < remaining else x1
            steps += 1
            traj.xs.append(x_new)
            traj.ys.append(y_new)
            traj._hs.append(hs)
            traj._ks.append(ks)
            if stop is not None and stop(x_new, y_new):
                _locate_stop(traj, stop, control.x_tol)
                return traj
            x, y, k1 = x_new, y_new, k7
            factor = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err**-0.2))
        else:
            factor = max(0.2, 0.9 * err**-0.2)
        h *= factor
    return traj


def _locate_stop(traj: Trajectory, stop, x_tol):
    """Bisect the last accepted step for the first point where ``stop`` holds."""
    a = traj.xs[-2]
    y_a, h, ks = traj.ys[-2], traj._hs[-1], traj._ks[-1]
    lo, hi = 0.0, 1.0
    while abs(hi - lo) * abs(h) > x_tol:
        mid = 0.5 * (lo + hi)
        if stop(a + mid * h, _dense(y_a, h, ks, mid)):
            hi = mid
        else:
            lo = mid
    x_stop = a + hi * h
    traj.xs[-1] = x_stop
    traj.ys[-1] = _dense(y_a, h, ks, hi)
    traj.status = "stopped"
