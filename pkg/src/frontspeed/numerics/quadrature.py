"""Adaptive quadrature.

Two rules are provided behind :func:`integrate`:

* a double-exponential (tanh-sinh) rule with level halving, used whenever an
  endpoint is flagged as singular.  Nodes are generated from their distance to
  the nearest endpoint so that points within 1e-300 of ``lo`` stay
  representable.
* globally adaptive Gauss-Kronrod (7/15) bisection for regular integrands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..errors import QuadratureError

NODE_BUDGET = 2**15
_T_MAX = 6.0  # beyond this the tanh-sinh node distance underflows 1e-300
_MIN_LEVELS = 3

# 15-point Kronrod nodes on [0, 1) (symmetric), with the embedded 7-point Gauss rule.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_K15_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_K15_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss weights laid out on the same 15 nodes (zero on Kronrod-only nodes).
_G7_WEIGHTS = np.zeros(15)
_G7_WEIGHTS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int


def integrate(
    phi: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    rel_tol: float = 1e-10,
    singular_endpoints: Sequence[bool] = (False, False),
    *,
    abs_tol: float = 0.0,
    breakpoints: Sequence[float] = (),
    max_evals: int = NODE_BUDGET,
) -> QuadratureResult:
    """Integrate a vectorized ``phi`` over ``[lo, hi]``.

    ``singular_endpoints`` flags integrable singularities (or any endpoint
    behaviour a polynomial rule resolves badly).  ``breakpoints`` split the
    interval at interior kinks; each piece is integrated separately.

    Raises :class:`QuadratureError` (carrying the best estimate) when the
    tolerance is not met within ``max_evals`` evaluations.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    if not 1e-14 <= rel_tol <= 1e-2:
        raise ValueError(f"rel_tol {rel_tol} outside [1e-14, 1e-2]")
    cuts = [lo] + sorted(b for b in breakpoints if lo < b < hi) + [hi]
    if len(cuts) > 2:
        pieces = []
        for i, (a, b) in enumerate(zip(cuts[:-1], cuts[1:])):
            flags = (singular_endpoints[0] and i == 0, singular_endpoints[1] and i == len(cuts) - 2)
            pieces.append(integrate(phi, a, b, rel_tol, flags, abs_tol=abs_tol,
                                    max_evals=max_evals))
        return QuadratureResult(
            sum(p.value for p in pieces),
            sum(p.error_estimate for p in pieces),
            sum(p.evaluations for p in pieces),
        )
    if any(singular_endpoints):
        return _tanh_sinh(phi, lo, hi, rel_tol, abs_tol, max_evals)
    return _gauss_kronrod(phi, lo, hi, rel_tol, abs_tol, max_evals)


def integrate_unit(phi_uv: Callable[[np.ndarray, np.ndarray], np.ndarray],
                   rel_tol: float = 1e-10, *, abs_tol: float = 0.0,
                   breakpoints: Sequence[float] = ()) -> QuadratureResult:
    """Integrate ``phi(u, 1 - u)`` over (0, 1) with both endpoints treated as singular.

    The integrand receives ``u`` and ``v = 1 - u`` separately; near ``u = 1`` the
    value of ``v`` is exact (not ``1 - u`` after rounding), so factors such as
    ``(1 - u)**beta`` can be formed without cancellation.
    """
    left = integrate(lambda u: phi_uv(u, 1.0 - u), 0.0, 0.5, rel_tol, (True, False),
                     abs_tol=abs_tol, breakpoints=[b for b in breakpoints if b < 0.5])
    right = integrate(lambda v: phi_uv(1.0 - v, v), 0.0, 0.5, rel_tol, (True, False),
                      abs_tol=abs_tol, breakpoints=[1.0 - b for b in breakpoints if b > 0.5])
    return QuadratureResult(left.value + right.value,
                            left.error_estimate + right.error_estimate,
                            left.evaluations + right.evaluations)


def integrate_halfline(phi: Callable[[np.ndarray], np.ndarray], lo: float = 0.0,
                       rel_tol: float = 1e-10) -> QuadratureResult:
    """Integrate over ``[lo, inf)`` via ``s = lo + x / (1 - x)``."""

    def mapped(x):
        one_minus = 1.0 - x
        return phi(lo + x / one_minus) / one_minus**2

    return integrate(mapped, 0.0, 1.0, rel_tol, (True, True))


def _eval(phi, x):
    y = np.asarray(phi(x), dtype=float)
    if y.shape != np.shape(x):
        y = np.broadcast_to(y, np.shape(x)).astype(float)
    if not np.all(np.isfinite(y)):
        bad = np.asarray(x)[~np.isfinite(y)]
        raise QuadratureError(f"integrand not finite at x={bad[:3]}")
    return y


def _ts_level_nodes(level: int):
    """Offsets t and un-scaled weights for one tanh-sinh level (new nodes only)."""
    h = 2.0**-level
    n = int(_T_MAX / h)
    j = np.arange(-n, n + 1)
    if level > 0:
        j = j[j % 2 != 0]
    t = j * h
    s = 0.5 * math.pi * np.sinh(t)
    e = np.exp(-2.0 * np.abs(s))
    # distance to the nearer endpoint in units of the half width: 1 - tanh|s|
    dist = 2.0 * e / (1.0 + e)
    # d x / d t, again relative to the half width
    w = 0.5 * math.pi * np.cosh(t) * 4.0 * e / (1.0 + e) ** 2
    return t, dist, w, h


def _tanh_sinh(phi, lo, hi, rel_tol, abs_tol, max_evals):
    half = 0.5 * (hi - lo)
    total = 0.0
    total_abs = 0.0
    evals = 0
    history: list[float] = []
    err = math.inf
    for level in range(0, 20):
        t, dist, w, h = _ts_level_nodes(level)
        d = half * dist
        x = np.where(t < 0, lo + d, hi - d)
        keep = (d > 1e-300) & (x > lo) & (x < hi)
        x, w = x[keep], w[keep]
        if evals + x.size > max_evals:
            best = history[-1] if history else None
            raise QuadratureError(
                f"tanh-sinh did not reach rel_tol={rel_tol:g} within {max_evals} evaluations",
                best_estimate=best, diagnostics={"error_estimate": err})
        y = _eval(phi, x) * w
        evals += x.size
        total += float(np.sum(y))
        total_abs += float(np.sum(np.abs(y)))
        estimate = total * h * half
        history.append(estimate)
        if len(history) >= 2:
            d1 = abs(history[-1] - history[-2])
            roundoff = 64 * np.finfo(float).eps * total_abs * h * half
            if len(history) >= 3:
                d2 = abs(history[-2] - history[-3])
                # quadratic convergence of the level sequence
                err = d1 if d1 >= d2 or d2 == 0 else max(d1 * d1 / d2, d1 * 1e-3)
            else:
                err = d1
            err = max(err, roundoff)
            if level >= _MIN_LEVELS and err <= max(abs_tol, rel_tol * abs(estimate)):
                return QuadratureResult(float(estimate), float(err), evals)
    raise QuadratureError(f"tanh-sinh exhausted levels (rel_tol={rel_tol:g})",
                          best_estimate=history[-1], diagnostics={"error_estimate": err})


def _gk15(phi, a, b):
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    y = _eval(phi, mid + half * _K15_NODES)
    k = half * float(np.dot(_K15_WEIGHTS, y))
    g = half * float(np.dot(_G7_WEIGHTS, y))
    return k, abs(k - g)


def _gauss_kronrod(phi, lo, hi, rel_tol, abs_tol, max_evals):
    k, e = _gk15(phi, lo, hi)
    intervals = [(e, lo, hi, k)]
    evals = 15
    while True:
        value = sum(iv[3] for iv in intervals)
        err = sum(iv[0] for iv in intervals)
        if err <= max(abs_tol, rel_tol * abs(value)):
            return QuadratureResult(value, err, evals)
        if evals + 30 > max_evals:
            raise QuadratureError(
                f"Gauss-Kronrod did not reach rel_tol={rel_tol:g} within {max_evals} evaluations",
                best_estimate=value, diagnostics={"error_estimate": err})
        intervals.sort(key=lambda iv: iv[0])
        _, a, b, _ = intervals.pop()
        m = 0.5 * (a + b)
        for lo_, hi_ in ((a, m), (m, b)):
            k, e = _gk15(phi, lo_, hi_)
            intervals.append((e, lo_, hi_, k))
        evals += 30
