"""Bracketing searches: sign bisection, golden-section maximization, grid supremum."""

from __future__ import annotations

import math
from typing import Callable, Iterable

import numpy as np

from ..errors import BracketError

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def bisect(s: Callable[[float], int], lo: float, hi: float, x_tol: float,
           max_iter: int = 200) -> float:
    """Locate a sign change of ``s`` in ``[lo, hi]`` to bracket width ``x_tol``.

    ``s`` returns a sign (any value compared against zero, or a bool).  The
    midpoint of the final bracket is returned.
    """
    s_lo, s_hi = _sign(s(lo)), _sign(s(hi))
    if s_lo == s_hi:
        raise BracketError(f"no sign change on [{lo}, {hi}] (both {s_lo})")
    for _ in range(max_iter):
        if hi - lo <= x_tol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _sign(s(mid)) == s_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _sign(v) -> int:
    if isinstance(v, (bool, np.bool_)):
        return 1 if v else -1
    return 1 if v > 0 else -1


def golden_max(phi: Callable[[float], float], a: float, b: float,
               tol: float = 1e-12, max_iter: int = 200) -> tuple[float, float]:
    """Golden-section search for a maximum of a unimodal ``phi`` on ``[a, b]``."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = phi(c), phi(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = phi(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = phi(d)
    return (c, fc) if fc >= fd else (d, fd)


def grid_sup(phi: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
             n: int = 10_000, limits: Iterable[tuple[float, float]] = (),
             grid: np.ndarray | None = None) -> tuple[float, float]:
    """Supremum of ``phi`` over ``(lo, hi)``.

    ``phi`` is sampled on ``n`` interior points (or a caller-supplied ``grid``)
    and the best cell is refined by golden-section search.  ``limits`` adds
    ``(x, value)`` candidates for endpoint limits that cannot be sampled
    directly.  Returns ``(value, argmax)``.
    """
    if grid is None:
        grid = lo + (hi - lo) * (np.arange(1, n + 1) / (n + 1))
    values = np.asarray(phi(grid), dtype=float)
    finite = np.isfinite(values)
    if not finite.any():
        raise ValueError("phi is not finite anywhere on the grid")
    i = int(np.argmax(np.where(finite, values, -np.inf)))
    best_x, best_v = float(grid[i]), float(values[i])
    a = grid[i - 1] if i > 0 else lo
    b = grid[i + 1] if i + 1 < len(grid) else hi
    if a < b:
        x, v = golden_max(lambda t: float(phi(np.array([t]))[0]), float(a), float(b))
        if v > best_v:
            best_x, best_v = x, v
    for x, v in limits:
        if v > best_v:
            best_x, best_v = x, v
    return best_v, best_x
