"""Minimal front speed and heteroclinic trajectory by phase-plane shooting.

The front ODE ``u'' + c u' + f(u) = 0`` with ``p(u) = -u_z`` becomes
``p dp/du = c p - f(u)``, ``p(0) = p(1) = 0``, ``p > 0``.  Trajectories leave
the saddle at ``u = 1`` along its unstable manifold and are integrated
downward in ``u``.  The state is ``w = p**2`` (``dw/du = 2 c sqrt(w) - 2 f``),
which stays regular where ``p`` reaches zero.

Near the origin the fate of a trajectory is read off its slope ``r = p/u``:
complex origin eigenvalues, or ``r`` above the steep-manifold slope, send it
to the ``u = 0`` axis with ``p > 0``; below it the trajectory either enters
the origin (``f'(0) >= 0``) or has ``p`` vanish at some ``u* > 0`` (``f'(0) < 0``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import BracketError, NumericalFailure, ODEFailure, ReactionSpecError
from .numerics import StepControl, bisect, ode_solve
from .reaction import ReactionTerm, aw_upper, kpp_speed, sup_ratio, zfk_speed

EPS_DEFAULT = 1e-8
U_LIN = 1e-4          # below this the near-origin linearization decides the fate
U_MIN = 1e-9          # bottom of the tabulated grid
BRACKET_MARGIN = 0.5
SHOOT_CONTROL = StepControl(rtol=1e-11, atol=1e-30, x_tol=1e-12)

_GL_X, _GL_W = np.polynomial.legendre.leggauss(5)


@dataclass(frozen=True)
class ShootOutcome:
    kind: str  # hit_axis_p_positive | hit_p_zero_interior | connected
    terminal_u: float
    terminal_p: float
    c: float
    slope_at_lin: Optional[float] = None  # p/u where the linearization took over


def departure_slope(f: ReactionTerm, c: float) -> float:
    """Positive root of mu**2 + c mu + f'(1) = 0 (unstable direction at u = 1)."""
    fp1 = f.fprime1
    if fp1 >= 0:
        raise ReactionSpecError(
            f"{f.label}: f'(1) = {fp1:g} >= 0; the departure slope at u = 1 needs f'(1) < 0")
    return 0.5 * (-c + math.sqrt(c * c - 4.0 * fp1))


def origin_slopes(f: ReactionTerm, c: float) -> tuple[Optional[float], Optional[float]]:
    """(lambda_minus, lambda_plus) = (c -/+ sqrt(c^2 - 4 f'(0)))/2, or (None, None) if complex."""
    disc = c * c - 4.0 * f.fprime0
    if disc < 0:
        return None, None
    root = math.sqrt(disc)
    return 0.5 * (c - root), 0.5 * (c + root)


def _lower_end(f: ReactionTerm) -> float:
    cls = f.reaction_class
    if cls.tag == "combustion":
        return cls.a
    return U_LIN


def _integrate_w(f: ReactionTerm, c: float, u_start: float, w_start: float, u_end: float,
                 control: StepControl = SHOOT_CONTROL, h0: Optional[float] = None):
    """Integrate w = p^2 downward from u_start to u_end, restarting at breakpoints.

    Returns the list of trajectory pieces; the last one has status "stopped"
    if w reached zero.
    """
    fv = f.f
    two_c = 2.0 * c

    def rhs(u, w):
        return (two_c * math.sqrt(w) if w > 0 else 0.0) - 2.0 * fv(u)

    def stop(u, w):
        if w <= 0.0:
            return True
        fu = fv(u)
        return fu < 0.0 and c * math.sqrt(w) < 1e-3 * -fu

    cuts = [u_start] + sorted((b for b in f.breakpoints if u_end < b < u_start), reverse=True)
    cuts.append(u_end)
    pieces = []
    w = w_start
    for i, (a, b) in enumerate(zip(cuts[:-1], cuts[1:])):
        ctl = StepControl(control.rtol, control.atol, h0 if i == 0 else None,
                          control.h_min, control.max_steps, control.x_tol)
        traj = ode_solve(rhs, a, w, b, ctl, stop=stop)
        pieces.append(traj)
        if traj.status == "stopped":
            u_s, w_s = traj.xs[-1], max(traj.ys[-1], 0.0)
            if w_s > 0.0:
                # p is about to vanish where f < 0; finish with du = p dp / f
                traj.xs[-1] = u_s + w_s / (2.0 * float(fv(u_s)))
                traj.ys[-1] = 0.0
            break
        w = traj.y_end
    return pieces


def _steep_slope(f: ReactionTerm, c: float, u: float) -> tuple[float, float]:
    """Steep-manifold slope at u to first order: (lambda_plus + b u, b)."""
    _, lam_plus = origin_slopes(f, c)
    f2 = (float(f.f(u)) - f.fprime0 * u) / (u * u)
    b = -f2 / (3.0 * lam_plus - c)
    return lam_plus + b * u, b


def _fate(f: ReactionTerm, c: float, u: float, p: float) -> str:
    """Classify the continuation below u of a trajectory passing through (u, p)."""
    if f.reaction_class.tag == "combustion":
        # f = 0 below the threshold: p decreases linearly with slope c
        gap = p - c * u
        if gap > 0:
            return "hit_axis_p_positive"
        return "hit_p_zero_interior" if gap < 0 else "connected"
    lam_minus, lam_plus = origin_slopes(f, c)
    if lam_plus is None:
        return "hit_axis_p_positive"
    r_steep, _ = _steep_slope(f, c, u)
    if p / u > r_steep:
        return "hit_axis_p_positive"
    return "hit_p_zero_interior" if f.fprime0 < 0 else "connected"


def _run_to_lin(f, c, eps):
    mu1 = departure_slope(f, c)
    u0 = 1.0 - eps
    pieces = _integrate_w(f, c, u0, (mu1 * eps) ** 2, _lower_end(f), h0=0.1 * eps)
    return mu1, pieces


def _predicate(f: ReactionTerm, c: float, eps: float) -> bool:
    """True when c is at or above the minimal speed (connected or overshooting)."""
    _, pieces = _run_to_lin(f, c, eps)
    last = pieces[-1]
    if last.status == "stopped":
        return True
    u_end = last.x_end
    return _fate(f, c, u_end, math.sqrt(max(last.y_end, 0.0))) != "hit_axis_p_positive"


def shoot(f: ReactionTerm, c: float, eps: float = EPS_DEFAULT,
          p_tol: Optional[float] = None) -> ShootOutcome:
    """Shoot from u = 1 - eps at speed c and classify where the trajectory ends.

    For outcomes other than ``connected`` the trajectory is continued to its
    terminal point.  ``p_tol`` (default ``1e-7 max(1, mu1)``) bounds the
    terminal ``p`` reported for connected trajectories.
    """
    if not c > 0:
        raise ValueError("c must be positive")
    if not 1e-10 <= eps <= 1e-4:
        raise ValueError("eps must lie in [1e-10, 1e-4]")
    mu1, pieces = _run_to_lin(f, c, eps)
    if p_tol is None:
        p_tol = 1e-7 * max(1.0, mu1)
    last = pieces[-1]
    if last.status == "stopped":
        return ShootOutcome("hit_p_zero_interior", float(last.x_end), 0.0, c)
    u_end = float(last.x_end)
    p_end = math.sqrt(max(last.y_end, 0.0))
    kind = _fate(f, c, u_end, p_end)
    r = p_end / u_end
    if kind == "connected":
        return ShootOutcome(kind, 0.0, min(r * eps, p_tol), c, r)
    if f.reaction_class.tag == "combustion":
        if kind == "hit_axis_p_positive":
            return ShootOutcome(kind, 0.0, p_end - c * u_end, c, r)
        return ShootOutcome(kind, u_end - p_end / c, 0.0, c, r)
    # continue below the linearization point for terminal values
    try:
        tail = _integrate_w(f, c, u_end, last.y_end, 0.0)[-1]
        if tail.status == "stopped":
            return ShootOutcome(kind, float(tail.x_end), 0.0, c, r)
        return ShootOutcome(kind, 0.0, math.sqrt(max(tail.y_end, 0.0)), c, r)
    except ODEFailure as exc:
        u_last, w_last = exc.best_estimate
        return ShootOutcome(kind, float(u_last), math.sqrt(max(w_last, 0.0)), c, r)


# ---------------------------------------------------------------------------
# Solutions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PhasePlaneSolution:
    """A speed c with the heteroclinic p(u) tabulated on an increasing grid.

    Between grid nodes p is a cubic Hermite interpolant with slopes
    ``c - f/p``; outside the grid it is continued linearly in u (resp. 1 - u).
    """

    reaction: ReactionTerm
    c: float
    u_grid: np.ndarray
    p: np.ndarray
    mu1: float
    lambda_minus: Optional[float]
    lambda_plus: Optional[float]
    decay_branch: str  # steep | shallow | spiral | not_applicable

    @classmethod
    def from_arrays(cls, f: ReactionTerm, c: float, u_grid, p,
                    decay_branch: Optional[str] = None) -> "PhasePlaneSolution":
        u_grid = np.asarray(u_grid, dtype=float)
        p = np.asarray(p, dtype=float)
        lam_minus, lam_plus = origin_slopes(f, c)
        if decay_branch is None:
            decay_branch = _branch(f, c, float(p[0] / u_grid[0]), lam_minus, lam_plus)
        return cls(f, c, u_grid, p, departure_slope(f, c), lam_minus, lam_plus, decay_branch)

    @cached_property
    def _dpdu(self) -> np.ndarray:
        return self.c - self.reaction.f(self.u_grid) / self.p

    @cached_property
    def _spline(self) -> CubicHermiteSpline:
        return CubicHermiteSpline(self.u_grid, self.p, self._dpdu)

    @property
    def origin_slope(self) -> float:
        return float(self.p[0] / self.u_grid[0])

    @property
    def top_slope(self) -> float:
        return float(self.p[-1] / (1.0 - self.u_grid[-1]))

    def p_at(self, u, v=None):
        """p at u; pass ``v = 1 - u`` separately to keep precision near u = 1."""
        u = np.asarray(u, dtype=float)
        v = 1.0 - u if v is None else np.asarray(v, dtype=float)
        lo, hi = self.u_grid[0], self.u_grid[-1]
        inside = np.clip(u, lo, hi)
        out = self._spline(inside)
        out = np.where(u < lo, self.origin_slope * u, out)
        out = np.where(u > hi, self.top_slope * v, out)
        return out

    def dpdu_at(self, u):
        return self._spline(np.clip(np.asarray(u, dtype=float), self.u_grid[0],
                                    self.u_grid[-1]), 1)

    # cumulative integrals on the grid, anchored at u = 1/2
    def _cumulative(self, integrand) -> np.ndarray:
        u = self.u_grid
        mids = 0.5 * (u[:-1] + u[1:])
        halves = 0.5 * (u[1:] - u[:-1])
        nodes = mids[:, None] + halves[:, None] * _GL_X[None, :]
        cell = (integrand(nodes) * _GL_W[None, :]).sum(axis=1) * halves
        cum = np.concatenate([[0.0], np.cumsum(cell)])
        i_half = int(np.searchsorted(u, 0.5))
        return cum - cum[i_half]

    @cached_property
    def _inv_p_cum(self) -> np.ndarray:
        return self._cumulative(lambda x: 1.0 / self._spline(x))

    @cached_property
    def _f_over_p2_cum(self) -> np.ndarray:
        return self._cumulative(lambda x: self.reaction.f(x) / self._spline(x) ** 2)

    def _partial(self, table, integrand, u, v, end_lo, end_hi):
        """Integral of ``integrand`` from 1/2 to u (u, v = 1 - u arrays).

        Outside the grid the integrand is continued as k/u (resp. k/v), which
        is exact to leading order because p vanishes linearly at both ends.
        """
        u = np.atleast_1d(np.asarray(u, dtype=float))
        v = np.atleast_1d(np.asarray(v, dtype=float))
        grid = self.u_grid
        lo, hi = grid[0], grid[-1]
        out = np.empty_like(u)
        inside = (u >= lo) & (u <= hi)
        if inside.any():
            ui = u[inside]
            idx = np.clip(np.searchsorted(grid, ui, side="right") - 1, 0, len(grid) - 2)
            a = grid[idx]
            half = 0.5 * (ui - a)
            nodes = (a + half)[:, None] + half[:, None] * _GL_X[None, :]
            part = (integrand(nodes) * _GL_W[None, :]).sum(axis=1) * half
            out[inside] = table[idx] + part
        below = u < lo
        if below.any():
            out[below] = table[0] - end_lo * np.log(lo / u[below])
        above = u > hi
        if above.any():
            out[above] = table[-1] + end_hi * np.log((1.0 - hi) / v[above])
        return out

    def z_of_u(self, u, v=None):
        """Front coordinate z(u) = -integral_{1/2}^{u} ds / p(s) (gauge z = 0 at u = 1/2)."""
        u = np.asarray(u, dtype=float)
        v = 1.0 - u if v is None else v
        k_lo = 1.0 / self.origin_slope
        k_hi = 1.0 / self.top_slope
        return -self._partial(self._inv_p_cum, lambda x: 1.0 / self._spline(x), u, v,
                              k_lo, k_hi)

    def int_f_over_p2(self, u, v=None):
        """integral_{1/2}^{u} f(s)/p(s)^2 ds, used for the gradient-weighted trial."""
        u = np.asarray(u, dtype=float)
        v = 1.0 - u if v is None else v
        f = self.reaction
        lo, hi = self.u_grid[0], self.u_grid[-1]
        k_lo = float(f.f(lo)) / self.p[0] ** 2 * lo
        k_hi = float(f.f(hi)) / self.p[-1] ** 2 * (1.0 - hi)
        return self._partial(self._f_over_p2_cum,
                             lambda x: f.f(x) / self._spline(x) ** 2, u, v, k_lo, k_hi)


def _branch(f, c, r, lam_minus, lam_plus) -> str:
    tag = f.reaction_class.tag
    if tag in ("combustion", "bistable"):
        return "steep"
    if lam_plus is None:
        return "shallow" if c * c - 4.0 * f.fprime0 > -1e-8 * max(1.0, c * c) else "spiral"
    if lam_plus - lam_minus <= 1e-4 * max(1.0, c):
        return "shallow"
    return "steep" if abs(r - lam_plus) <= abs(r - lam_minus) else "shallow"


def _solution_grid(f: ReactionTerm, eps: float) -> np.ndarray:
    per_decade = 100
    low = np.logspace(math.log10(U_MIN), -2, int(7 * per_decade) + 1)
    mid = np.linspace(1e-2, 0.99, 991)
    top = 1.0 - np.logspace(-2, math.log10(eps), int(round(-math.log10(eps) - 2) * per_decade) + 1)
    extra = [0.5, *f.breakpoints]
    if f.reaction_class.tag == "combustion":
        extra.append(f.reaction_class.a)
    grid = np.unique(np.concatenate([low, mid, top, extra]))
    return grid[(grid >= U_MIN) & (grid <= 1.0 - eps)]


def build_solution(f: ReactionTerm, c: float, eps: float = EPS_DEFAULT) -> PhasePlaneSolution:
    """Integrate the trajectory at speed c and tabulate it on the solution grid."""
    mu1, pieces = _run_to_lin(f, c, eps)
    if pieces[-1].status == "stopped":
        raise NumericalFailure(
            f"{f.label}: trajectory at c={c:.12g} loses positivity at u={pieces[-1].x_end:.6g}",
            diagnostics={"c": c})
    u_end = float(pieces[-1].x_end)
    p_end = math.sqrt(pieces[-1].y_end)
    lam_minus, lam_plus = origin_slopes(f, c)
    branch = _branch(f, c, p_end / u_end, lam_minus, lam_plus)
    grid = _solution_grid(f, eps)
    p = np.empty_like(grid)

    upper = grid >= u_end
    for piece in pieces:
        lo, hi = sorted((piece.xs[0], piece.xs[-1]))
        sel = upper & (grid >= lo) & (grid <= hi)
        p[sel] = np.sqrt(np.maximum([piece(x) for x in grid[sel]], 0.0))

    below = ~upper
    ub = grid[below]
    if f.reaction_class.tag == "combustion":
        p[below] = p_end * ub / u_end
    elif branch == "steep":
        _, b = _steep_slope(f, c, u_end)
        p[below] = p_end * (ub / u_end) * (lam_plus + b * ub) / (lam_plus + b * u_end)
    else:
        tail = _integrate_w(f, c, u_end, pieces[-1].y_end, U_MIN)[-1]
        if tail.status == "stopped":
            raise NumericalFailure(f"{f.label}: shallow continuation lost positivity")
        p[below] = np.sqrt(np.maximum([tail(x) for x in ub], 0.0))
    if np.any(p <= 0):
        raise NumericalFailure(f"{f.label}: tabulated p has non-positive entries")
    return PhasePlaneSolution(f, c, grid, p, mu1, lam_minus, lam_plus, branch)


def speed_bracket(f: ReactionTerm) -> tuple[float, float]:
    """Initial (c_lo, c_hi) for the speed bisection."""
    tag = f.reaction_class.tag
    if f.reaction_class.is_monostable:
        c_lo = max(kpp_speed(f), zfk_speed(f)) - BRACKET_MARGIN
        c_hi = aw_upper(f) + BRACKET_MARGIN
    elif tag == "combustion":
        c_lo = zfk_speed(f) - BRACKET_MARGIN
        c_hi = aw_upper(f) + BRACKET_MARGIN
    else:
        sup, _ = sup_ratio(f)
        c_lo = 0.0
        c_hi = 2.0 * math.sqrt(max(sup, 0.0)) + BRACKET_MARGIN
    return max(c_lo, 1e-3), c_hi


def minimal_speed(f: ReactionTerm, c_tol: float = 1e-4,
                  eps: float = EPS_DEFAULT) -> PhasePlaneSolution:
    """Minimal speed c0 (to within ``min(c_tol, 1e-10)``) and its trajectory.

    The bisection runs well below ``c_tol`` because the optimal trial and
    profile identities downstream are sensitive to the trajectory near the
    origin, which depends on c.
    """
    if c_tol < 1e-8:
        raise ValueError("c_tol must be at least 1e-8")
    f.reaction_class  # classify up front; raises for unsupported sign patterns
    c_lo, c_hi = speed_bracket(f)

    def pred(c):
        return _predicate(f, c, eps)

    for _ in range(8):
        if not pred(c_lo):
            break
        c_lo *= 0.5
    else:
        raise BracketError(f"{f.label}: every trial speed down to {c_lo:g} connects")
    for _ in range(8):
        if pred(c_hi):
            break
        c_hi *= 2.0
    else:
        raise BracketError(f"{f.label}: no connection up to c = {c_hi:g}")
    probes = np.linspace(c_lo, c_hi, 7)[1:-1]
    flags = [pred(c) for c in probes]
    if any(a and not b for a, b in zip(flags[:-1], flags[1:])):
        raise BracketError(
            f"{f.label}: shooting predicate not monotone in c on [{c_lo:g}, {c_hi:g}]",
            diagnostics={"probes": probes.tolist(), "flags": flags})
    lo = max([c for c, fl in zip(probes, flags) if not fl], default=c_lo)
    hi = min([c for c, fl in zip(probes, flags) if fl], default=c_hi)
    c0 = bisect(pred, lo, hi, x_tol=min(c_tol, 1e-10))
    if f.fprime0 > 0:
        c0 = max(c0, kpp_speed(f))  # linear spreading speed is a strict lower bound
    return build_solution(f, c0, eps)


def residual(sol: PhasePlaneSolution) -> float:
    """Max midpoint residual of p p' - c p + f, normalized by max(1, max p^2)."""
    u, p = sol.u_grid, sol.p
    if len(u) < 3:
        raise ValueError("need at least 3 grid points")
    mid = 0.5 * (u[:-1] + u[1:])
    dp = np.diff(p) / np.diff(u)
    p_mid = sol._spline(mid)
    res = np.abs(p_mid * dp - sol.c * p_mid + sol.reaction.f(mid))
    return float(np.max(res) / max(1.0, float(np.max(p)) ** 2))


# ---------------------------------------------------------------------------
# Spatial profile
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FrontProfile:
    """Front u(z) on a truncated z-grid (u(0) = 1/2), decreasing in z.

    ``uzz`` is optional; when present the weighted integrals in the bounds
    module use the fourth-order Hermite (end-corrected trapezoid) rule.
    """

    z: np.ndarray
    u: np.ndarray
    uz: np.ndarray
    c: float
    delta: float
    uzz: Optional[np.ndarray] = None
    right_rate: Optional[float] = None  # decay rate of u as z -> +inf


def front_profile(sol: PhasePlaneSolution, delta: float = 1e-6) -> FrontProfile:
    """Invert z(u) = -int_{1/2}^{u} ds/p on the solution grid, truncated to [delta, 1 - delta]."""
    if not 1e-8 <= delta <= 1e-3:
        raise ValueError("delta must lie in [1e-8, 1e-3]")
    if np.any(sol.p <= 0):
        raise NumericalFailure("p has non-positive grid values")
    grid = sol.u_grid
    u = grid[(grid > delta) & (grid < 1.0 - delta)]
    u = np.concatenate([[delta], u, [1.0 - delta]])
    v = 1.0 - u
    v[-1] = delta
    z = sol.z_of_u(u, v)
    p = sol.p_at(u, v)
    dpdu = sol.dpdu_at(u)
    order = np.argsort(z)
    rate = sol.lambda_plus if sol.decay_branch == "steep" else sol.origin_slope
    return FrontProfile(z=z[order], u=u[order], uz=-p[order], c=sol.c, delta=delta,
                        uzz=(dpdu * p)[order], right_rate=rate)
