"""Direct simulation of u_t = u_xx + f(u) and measurement of the spreading speed."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import NumericalFailure
from .reaction import ReactionTerm

LEVEL = 0.5
BOUNDARY_MARGIN = 10.0
BOUND_SLACK = 1e-6


@dataclass
class Evolution:
    x_grid: np.ndarray
    snapshots: list = field(default_factory=list)   # (t, u) pairs
    front_track: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    dx: float = 0.0
    dt: float = 0.0
    max_overshoot: float = 0.0  # largest excursion outside [0, 1]


def _level_crossing(x, u, level):
    """Rightmost x where u crosses ``level`` downward, by linear interpolation."""
    above = np.nonzero(u >= level)[0]
    if len(above) == 0:
        return math.nan
    i = int(above[-1])
    if i == len(u) - 1:
        return float(x[-1])
    u0, u1 = u[i], u[i + 1]
    return float(x[i] + (u0 - level) / (u0 - u1) * (x[i + 1] - x[i]))


def initial_condition(kind: str, x: np.ndarray, x0: float, width: float = 5.0) -> np.ndarray:
    if kind == "step":
        return np.where(x < x0, 1.0, 0.0)
    if kind == "compact_bump":
        r = np.abs(x - x0) / width
        return np.where(r < 1.0, np.cos(0.5 * np.pi * r) ** 2, 0.0)
    raise ValueError(f"unknown initial condition {kind!r}")


def evolve(f: ReactionTerm, ic: str = "step", L: float = 400.0, dx: float = 0.1,
           t_end: float = 150.0, x0: Optional[float] = None, level: float = LEVEL,
           snapshot_every: Optional[float] = None) -> Evolution:
    """Method of lines with central differences and classical RK4.

    Dirichlet data u = 1 at x = 0 and u = 0 at x = L.  The time step is the
    largest divisor of one time unit not exceeding 0.2 dx^2, so the level
    crossing is recorded exactly at integer times.
    """
    if not 0 < dx <= 0.1:
        raise ValueError("dx must lie in (0, 0.1]")
    if t_end < 0:
        raise ValueError("t_end must be non-negative")
    n = int(round(L / dx))
    x = np.linspace(0.0, n * dx, n + 1)
    if x0 is None:
        x0 = 0.05 * L
    u = initial_condition(ic, x, x0)
    u[0], u[-1] = 1.0, 0.0
    steps_per_unit = int(math.ceil(1.0 / (0.2 * dx * dx)))
    dt = 1.0 / steps_per_unit
    inv_dx2 = 1.0 / (dx * dx)
    fv = f.f

    def rhs(w):
        out = np.empty_like(w)
        out[1:-1] = (w[:-2] - 2.0 * w[1:-1] + w[2:]) * inv_dx2 + fv(w[1:-1])
        out[0] = out[-1] = 0.0
        return out

    ev = Evolution(x_grid=x, dx=dx, dt=dt)
    track = [(0.0, _level_crossing(x, u, level))]
    snaps = [(0.0, u.copy())]
    next_snap = snapshot_every
    overshoot = 0.0
    for t_unit in range(1, int(math.floor(t_end + 1e-12)) + 1):
        for _ in range(steps_per_unit):
            k1 = rhs(u)
            k2 = rhs(u + 0.5 * dt * k1)
            k3 = rhs(u + 0.5 * dt * k2)
            k4 = rhs(u + dt * k3)
            u = u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(u)):
            raise NumericalFailure(f"non-finite field at t={t_unit}",
                                   best_estimate=np.array(track))
        overshoot = max(overshoot, float(np.max(u)) - 1.0, -float(np.min(u)))
        xl = _level_crossing(x, u, level)
        track.append((float(t_unit), xl))
        if xl > x[-1] - BOUNDARY_MARGIN:
            raise NumericalFailure(
                f"front reached x={xl:.3f} within {BOUNDARY_MARGIN:g} of the right boundary "
                f"at t={t_unit}; increase L", best_estimate=np.array(track))
        if next_snap is not None and t_unit >= next_snap - 1e-12:
            snaps.append((float(t_unit), u.copy()))
            next_snap += snapshot_every
    if snaps[-1][0] != track[-1][0]:
        snaps.append((track[-1][0], u.copy()))
    ev.snapshots = snaps
    ev.front_track = np.array(track, dtype=float)
    ev.max_overshoot = overshoot
    return ev


@dataclass(frozen=True)
class SpeedFit:
    speed: float
    fit_residual: float
    intercept: float
    window: tuple[float, float]


def spreading_speed(ev: Union[Evolution, np.ndarray], window_fraction: float = 1.0 / 3.0,
                    min_points: int = 10) -> SpeedFit:
    """Least-squares slope of the level track over the final ``window_fraction`` of time."""
    track = ev.front_track if isinstance(ev, Evolution) else np.asarray(ev, dtype=float)
    if not 0 < window_fraction <= 1:
        raise ValueError("window_fraction must lie in (0, 1]")
    t, xl = track[:, 0], track[:, 1]
    t_start = t[-1] - window_fraction * (t[-1] - t[0])
    sel = (t >= t_start - 1e-12) & np.isfinite(xl)
    if sel.sum() < min_points:
        raise ValueError(f"need at least {min_points} track points in the fit window, "
                         f"got {int(sel.sum())}")
    tw, xw = t[sel], xl[sel]
    if np.any(np.diff(xw) < 0):
        raise NumericalFailure("front track is not monotone in the fit window; "
                               "transient not finished")
    slope, intercept = np.polyfit(tw, xw, 1)
    resid = float(np.max(np.abs(xw - (slope * tw + intercept))))
    return SpeedFit(float(slope), resid, float(intercept), (float(tw[0]), float(tw[-1])))


def write_track_csv(ev: Evolution, path: Union[str, Path]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x_level"])
        for t, xl in ev.front_track:
            w.writerow([f"{t:.12g}", f"{xl:.12g}"])


def write_snapshots_csv(ev: Evolution, path: Union[str, Path], stride: int = 1) -> None:
    """Long-format snapshot export with header ``t,x,u``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "u"])
        xs = ev.x_grid[::stride]
        for t, u in ev.snapshots:
            for x, val in zip(xs, u[::stride]):
                w.writerow([f"{t:.12g}", f"{x:.12g}", f"{val:.12g}"])
