"""Variational bounds on the minimal front speed.

Upper bound (alpha > 0, alpha(0) = 0, alpha'(0) > 0)::

    VP1:  c0 <= sup_u [alpha'(u) + f(u)/alpha(u)]

Lower bounds (g > 0 decreasing, h = -g')::

    VP2:  c0 >= 2 int sqrt(f g h) du / int g du
    VP4:  c0^2 >= 2 int f g du / int g^2/h du

With ``s = 1/g`` the VP4 quotient becomes ``2 int V(u(s))/s^2 ds /
int (du/ds)^2 ds`` (VP4s) and its reciprocal is the action ``Lambda``
(VP5).  The profile functionals ``Phi_c`` and ``X_c`` integrate against the
weight ``exp(c z)`` on a spatial front profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import simpson

from .errors import ClassificationError, DivergentIntegral, InadmissibleTrial, QuadratureError
from .numerics import QuadratureResult, grid_sup, integrate, integrate_halfline, integrate_unit
from .oracle import FrontProfile
from .reaction import ReactionTerm
from .trials import TrialFunction, check_admissible

DEFAULT_REL_TOL = 1e-10
TAIL_FLAG_FRACTION = 0.01


@dataclass(frozen=True)
class BoundResult:
    principle: str  # VP1 | VP2 | VP4 | VP4s | ZFK | AW
    direction: str  # upper | lower
    value: float
    trial: dict
    quad_error: float
    squared: Optional[float] = None
    metadata: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        rec = {"principle": self.principle, "direction": self.direction,
               "value": self.value, "quad_error": self.quad_error, "trial": self.trial}
        if self.squared is not None:
            rec["squared"] = self.squared
        if self.metadata:
            rec["metadata"] = self.metadata
        return rec


def _require_nonnegative(f: ReactionTerm, principle: str) -> None:
    if f.reaction_class.tag == "bistable":
        raise ClassificationError(f"{principle} needs f >= 0; {f.label} is bistable")


def _signed_exp(f_vals, log_rest):
    """f * exp(log_rest) formed without overflow of exp(log_rest) alone."""
    out = np.zeros_like(np.asarray(log_rest, dtype=float))
    nz = f_vals != 0
    with np.errstate(over="ignore", divide="ignore"):
        out[nz] = np.sign(f_vals[nz]) * np.exp(np.log(np.abs(f_vals[nz])) + log_rest[nz])
    return out


def _unit(phi, f: ReactionTerm, rel_tol: float, what: str):
    try:
        return integrate_unit(phi, rel_tol, breakpoints=f.breakpoints)
    except QuadratureError as exc:
        raise QuadratureError(f"{what} did not converge (divergent or too singular): {exc}",
                              best_estimate=exc.best_estimate) from exc


# ---------------------------------------------------------------------------
# VP1, VP2, VP4
# ---------------------------------------------------------------------------

def _vp1_grid(n: int) -> np.ndarray:
    edge = np.logspace(-12, -2, 200)
    return np.unique(np.concatenate([edge, (np.arange(1, n + 1)) / (n + 1), 1.0 - edge]))


def vp1_upper(f: ReactionTerm, alpha: TrialFunction, n: int = 10_000) -> BoundResult:
    """sup over (0, 1) of alpha' + f/alpha, including both endpoint limits."""
    if alpha.role != "alpha":
        raise InadmissibleTrial("VP1 needs an alpha trial")
    _require_nonnegative(f, "VP1")
    check_admissible(alpha)

    def phi(u):
        a = alpha.value(u)
        if np.any(a <= 0):
            raise InadmissibleTrial(f"{alpha.label}: alpha vanishes inside (0, 1)")
        return alpha.deriv(u) + f.f(u) / a

    zero, one = np.array([0.0]), np.array([1.0])
    d0 = float(alpha.deriv(zero, one)[0])
    limits = [(0.0, d0 + f.fprime0 / d0)]
    a1 = float(alpha.value(one, zero)[0])
    d1 = float(alpha.deriv(one, zero)[0])
    if a1 > 0:
        limits.append((1.0, d1))
    elif d1 != 0:
        limits.append((1.0, d1 + f.fprime1 / d1))
    grid = _vp1_grid(n)
    raw = float(np.max(phi(grid)))
    value, arg = grid_sup(phi, 0.0, 1.0, grid=grid, limits=limits)
    return BoundResult("VP1", "upper", float(value), alpha.describe(),
                       quad_error=abs(float(value) - max(raw, max(v for _, v in limits))),
                       metadata={"argmax": float(arg)})


def vp2_lower(f: ReactionTerm, g: TrialFunction,
              rel_tol: float = DEFAULT_REL_TOL) -> BoundResult:
    """2 int sqrt(f g h) / int g over (0, 1)."""
    if g.role != "g":
        raise InadmissibleTrial("VP2 needs a g trial")
    _require_nonnegative(f, "VP2")
    check_admissible(g)

    def num(u, v):
        fr = np.maximum(f.f(u), 0.0) * g.rate(u, v)
        return _sqrt_weighted(fr, g.log_value(u, v))

    def den(u, v):
        return np.exp(g.log_value(u, v))

    n = _unit(num, f, rel_tol, "VP2 numerator")
    d = _unit(den, f, rel_tol, "VP2 denominator (int g)")
    value = n.value / d.value
    err = abs(value) * (n.error_estimate / max(abs(n.value), 1e-300)
                        + d.error_estimate / d.value)
    return BoundResult("VP2", "lower", float(value), g.describe(), float(err))


def _sqrt_weighted(fr, log_g):
    """2 g sqrt(fr) with g = exp(log_g)."""
    out = np.zeros_like(np.asarray(log_g, dtype=float))
    pos = fr > 0
    with np.errstate(over="ignore"):
        out[pos] = 2.0 * np.exp(log_g[pos] + 0.5 * np.log(fr[pos]))
    return out


def vp4_lower(f: ReactionTerm, g: TrialFunction,
              rel_tol: float = DEFAULT_REL_TOL) -> BoundResult:
    """sqrt(2 int f g / int g^2/h); the squared quotient is kept in ``squared``."""
    if g.role != "g":
        raise InadmissibleTrial("VP4 needs a g trial")
    check_admissible(g)

    def num(u, v):
        return 2.0 * _signed_exp(f.f(u), g.log_value(u, v))

    def den(u, v):
        with np.errstate(divide="ignore"):
            return np.exp(g.log_value(u, v) - np.log(g.rate(u, v)))

    n = _unit(num, f, rel_tol, "VP4 numerator")
    if n.value <= 0:
        raise InadmissibleTrial(
            f"VP4 numerator 2 int f g = {n.value:.6g} is not positive for {g.label}; "
            "choose a trial weighted toward the region where f > 0")
    d = _unit(den, f, rel_tol, "VP4 denominator (int g^2/h)")
    sq = n.value / d.value
    err_sq = sq * (n.error_estimate / n.value + d.error_estimate / d.value)
    value = math.sqrt(sq)
    return BoundResult("VP4", "lower", value, g.describe(), float(0.5 * err_sq / value),
                       squared=float(sq))


# ---------------------------------------------------------------------------
# s-parameterized forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SProfile:
    """Increasing map s in (s_min, inf) -> u, with u = 0 for s <= s_min and u -> 1.

    ``uv(s)`` returns ``(u, 1 - u)``; ``duds(s)`` the derivative.
    """

    uv: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]
    duds: Callable[[np.ndarray], np.ndarray]
    s_min: float = 0.0
    label: str = ""
    s_breaks: tuple[float, ...] = ()

    def scaled(self, kappa: float) -> "SProfile":
        """The profile s -> u(kappa s)."""
        return SProfile(lambda s: self.uv(kappa * np.asarray(s)),
                        lambda s: kappa * self.duds(kappa * np.asarray(s)),
                        self.s_min / kappa, f"{self.label} (s scaled by {kappa:g})",
                        tuple(b / kappa for b in self.s_breaks))


_LOGIT_SPAN = 700.0


def s_profile(g: TrialFunction, iterations: int = 60,
              u_breaks: Sequence[float] = ()) -> SProfile:
    """The image of a trial g under s = 1/g, inverted by vectorized bisection in log(u/v).

    ``u_breaks`` (e.g. the reaction's breakpoints) are mapped to s so the
    s-integrals can be split at the corresponding kinks.
    """
    if g.value_at_one() != 0.0:
        raise InadmissibleTrial(f"{g.label}: the s-form needs g(1) = 0")

    def _logit_uv(x):
        return 1.0 / (1.0 + np.exp(-x)), 1.0 / (1.0 + np.exp(x))

    lo_u, lo_v = _logit_uv(np.array([-_LOGIT_SPAN]))
    log_g_lo = float(g.log_value(lo_u, lo_v)[0])

    def solve(s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        target = -np.log(s)
        lo = np.full_like(s, -_LOGIT_SPAN)
        hi = np.full_like(s, _LOGIT_SPAN)
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            above = g.log_value(*_logit_uv(mid)) > target
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        x = 0.5 * (lo + hi)
        u, v = _logit_uv(x)
        below_support = target >= log_g_lo
        u = np.where(below_support, 0.0, u)
        v = np.where(below_support, 1.0, v)
        return u, v, below_support

    def uv(s):
        u, v, _ = solve(s)
        return u, v

    def duds(s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        u, v, outside = solve(s)
        with np.errstate(divide="ignore", invalid="ignore"):
            d = 1.0 / (s * g.rate(u, v))
        return np.where(outside | ~np.isfinite(d), 0.0, d)

    s_min = 0.0 if g.endpoint_exponents[0] < 0 else math.exp(-log_g_lo)
    breaks = tuple(float(np.exp(-g.log_value(np.array([b]))[0])) for b in u_breaks if 0 < b < 1)
    return SProfile(uv, duds, s_min, f"s=1/({g.label})", breaks)


def s_profile_from_callable(u_of_s: Callable, s_min: float = 0.0, h: float = 1e-4,
                            label: str = "") -> SProfile:
    """Wrap a plain map s -> u (or s -> (u, 1 - u)); du/ds by central differences in log s."""

    def uv(s):
        out = u_of_s(np.asarray(s, dtype=float))
        if isinstance(out, tuple):
            return np.asarray(out[0], float), np.asarray(out[1], float)
        out = np.asarray(out, dtype=float)
        return out, 1.0 - out

    def duds(s):
        s = np.asarray(s, dtype=float)
        up, _ = uv(s * math.exp(h))
        dn, _ = uv(s * math.exp(-h))
        return (up - dn) / (s * 2.0 * math.sinh(h))

    return SProfile(uv, duds, s_min, label or "callable")


def _split_halfline(phi, lo, breaks, rel_tol):
    """Integral over [lo, inf) split at interior kinks (images of reaction breakpoints)."""
    cuts = [b for b in sorted(breaks) if b > lo]
    if not cuts:
        return integrate_halfline(phi, lo, rel_tol)
    pieces = [integrate(phi, a, b, rel_tol, (a == 0.0, False))
              for a, b in zip([lo] + cuts[:-1], cuts)]
    pieces.append(integrate_halfline(phi, cuts[-1], rel_tol))
    return QuadratureResult(sum(p.value for p in pieces),
                            sum(p.error_estimate for p in pieces),
                            sum(p.evaluations for p in pieces))


def _s_integrals(f: ReactionTerm, prof: SProfile, rel_tol: float):
    half_fp0 = 0.5 * f.fprime0

    def pot(s):
        # V/s^2 = (V/u^2) (u/s)^2; both V and s^2 underflow near s = 0
        u, _ = prof.uv(s)
        safe = np.where(u > 1e-100, u, 1.0)
        ratio = np.where(u > 1e-100, f.V(safe) / safe**2, half_fp0)
        return np.where(u > 0, ratio * (u / s) ** 2, 0.0)

    def kin(s):
        return prof.duds(s) ** 2

    try:
        n = _split_halfline(pot, prof.s_min, prof.s_breaks, rel_tol)
        d = _split_halfline(kin, prof.s_min, prof.s_breaks, rel_tol)
    except QuadratureError as exc:
        raise QuadratureError(f"s-form integral did not converge: {exc}",
                              best_estimate=exc.best_estimate) from exc
    if not d.value > 0:
        raise DivergentIntegral("int (du/ds)^2 ds vanished; profile is constant")
    return n, d


def vp4s_value(f: ReactionTerm, profile_s, corrected: bool = True,
               rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Speed-squared candidate of the s-form.

    ``corrected=True`` returns ``2 int V/s^2 ds / int (du/ds)^2 ds``, the
    constant obtained by substituting s = 1/g into the VP4 quotient.
    ``corrected=False`` drops the factor 2, as in the commonly printed form of
    this principle; it is kept only so the discrepancy can be tested.
    """
    prof = profile_s if isinstance(profile_s, SProfile) else s_profile_from_callable(profile_s)
    n, d = _s_integrals(f, prof, rel_tol)
    return (2.0 if corrected else 1.0) * n.value / d.value


def vp4s_lower(f: ReactionTerm, g: TrialFunction,
               rel_tol: float = DEFAULT_REL_TOL) -> BoundResult:
    sq = vp4s_value(f, s_profile(g, u_breaks=f.breakpoints), rel_tol=rel_tol)
    if sq <= 0:
        raise InadmissibleTrial(f"VP4s quotient {sq:.6g} is not positive for {g.label}")
    return BoundResult("VP4s", "lower", math.sqrt(sq), g.describe(),
                       quad_error=rel_tol * math.sqrt(sq), squared=float(sq))


def vp5_action(f: ReactionTerm, profile_xi, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Lambda[u] = int (du/dxi)^2/2 dxi / int V(u)/xi^2 dxi, the reciprocal of the s-form."""
    prof = profile_xi if isinstance(profile_xi, SProfile) else s_profile_from_callable(profile_xi)
    n, d = _s_integrals(f, prof, rel_tol)
    if n.value <= 0:
        raise DivergentIntegral("int V/xi^2 is not positive; action undefined")
    return 0.5 * d.value / n.value


# ---------------------------------------------------------------------------
# Weighted profile functionals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightedIntegrals:
    """int e^{cz} u_z^2/2 dz and int e^{cz} V(u) dz, tails included."""

    kinetic: float
    potential: float
    tail_fraction: float
    flagged: bool


def _decay_rate(profile: FrontProfile) -> float:
    if profile.right_rate is not None:
        return float(profile.right_rate)
    uz = np.abs(profile.uz[-2:])
    return float(-np.log(uz[1] / uz[0]) / (profile.z[-1] - profile.z[-2]))


def _hermite_trapezoid(z, y, dy):
    dz = np.diff(z)
    return float(np.sum(0.5 * dz * (y[:-1] + y[1:]) + dz**2 * (dy[:-1] - dy[1:]) / 12.0))


def _tail(z, y, end: str) -> float:
    """Exponential tail beyond the truncated grid, rate estimated from the last cell."""
    if end == "left":
        (z0, z1), (y0, y1) = z[:2], y[:2]
        edge = y0
    else:
        (z1, z0), (y1, y0) = z[-2:], y[-2:]
        edge = y0
    if edge == 0.0:
        return 0.0
    if y1 <= 0 or y0 <= 0:
        return 0.0
    rate = math.log(y1 / y0) / abs(z1 - z0)
    if rate <= 0:
        raise DivergentIntegral(f"weighted integrand does not decay at the {end} end")
    return edge / rate


def weighted_integrals(f: ReactionTerm, profile: FrontProfile, c: float) -> WeightedIntegrals:
    if not c > 0:
        raise ValueError("c must be positive")
    z, u, uz = profile.z, profile.u, profile.uz
    if not np.any(uz != 0):
        return WeightedIntegrals(0.0, 0.0, 0.0, False)
    rate = _decay_rate(profile)
    if not c < 2.0 * rate:
        raise DivergentIntegral(
            f"weight e^(cz) with c={c:.6g} outgrows the profile decay (need c < {2 * rate:.6g})")
    w = np.exp(c * z)
    yk = 0.5 * w * uz**2
    yp = w * f.V(u)
    if profile.uzz is not None:
        dyk = w * (0.5 * c * uz**2 + uz * profile.uzz)
        dyp = w * (c * f.V(u) + f.f(u) * uz)
        core_k = _hermite_trapezoid(z, yk, dyk)
        core_p = _hermite_trapezoid(z, yp, dyp)
    else:
        core_k = float(simpson(yk, x=z))
        core_p = float(simpson(yp, x=z))
    tails_k = _tail(z, yk, "left") + _tail(z, yk, "right")
    tails_p = _tail(z, yp, "left") + _tail(z, yp, "right")
    kin, pot = core_k + tails_k, core_p + tails_p
    frac = max(abs(tails_k) / max(abs(kin), 1e-300), abs(tails_p) / max(abs(pot), 1e-300))
    return WeightedIntegrals(kin, pot, frac, frac > TAIL_FLAG_FRACTION)


def vp3_functional(f: ReactionTerm, profile: FrontProfile, c: float) -> float:
    """Phi_c[u] = int e^{cz} (u_z^2/2 - V(u)) dz, with exponential tails added."""
    wi = weighted_integrals(f, profile, c)
    return wi.kinetic - wi.potential


def xc_ratio(f: ReactionTerm, profile: FrontProfile, c: float) -> float:
    """X_c = int e^{cz} V dz / int e^{cz} u_z^2/2 dz."""
    wi = weighted_integrals(f, profile, c)
    if wi.kinetic == 0.0:
        raise DivergentIntegral("kinetic integral vanishes; X_c undefined for a flat profile")
    return wi.potential / wi.kinetic
