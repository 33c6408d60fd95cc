"""Trial functions for the variational bounds.

Every trial is evaluated on pairs ``(u, v)`` with ``v = 1 - u`` supplied
separately, so behaviour near ``u = 1`` is resolved without cancellation.
Decreasing trials ``g`` (lower bounds) are carried in logarithmic form:
``log g`` and the rate ``h/g = -g'/g``.  Products such as ``f g`` or ``g^2/h``
are then formed as exponentials of sums, which stays finite at quadrature
nodes where ``g`` alone would overflow.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InadmissibleTrial, NumericalFailure

ADMISSIBILITY_SAMPLES = 64

UV = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _uv(u, v):
    u = np.asarray(u, dtype=float)
    return u, (1.0 - u if v is None else np.asarray(v, dtype=float))


@dataclass(frozen=True, eq=False)
class TrialFunction:
    """A trial alpha (role ``"alpha"``) or g (role ``"g"``).

    ``endpoint_exponents`` records the behaviour ``u**beta0`` near 0 and
    ``(1 - u)**beta1`` near 1.
    """

    role: str
    family: str
    params: tuple[float, ...]
    endpoint_exponents: tuple[float, float]
    label: str
    _value: UV = field(repr=False)
    _deriv: UV = field(repr=False)
    _log: Optional[UV] = field(default=None, repr=False)
    _rate: Optional[UV] = field(default=None, repr=False)

    def value(self, u, v=None):
        return self._value(*_uv(u, v))

    def deriv(self, u, v=None):
        return self._deriv(*_uv(u, v))

    def log_value(self, u, v=None):
        u, v = _uv(u, v)
        if self._log is not None:
            return self._log(u, v)
        with np.errstate(divide="ignore"):
            return np.log(self._value(u, v))

    def rate(self, u, v=None):
        """h/g = -g'/g for a g-trial."""
        u, v = _uv(u, v)
        if self._rate is not None:
            return self._rate(u, v)
        return -self._deriv(u, v) / self._value(u, v)

    def h(self, u, v=None):
        return -self.deriv(u, v)

    def value_at_one(self) -> float:
        """Limit of the trial at u = 1 (0 when beta1 > 0)."""
        if self.endpoint_exponents[1] > 0:
            return 0.0
        with np.errstate(all="ignore"):
            return float(self.value(np.array([1.0]), np.array([0.0]))[0])

    def describe(self) -> dict:
        return {"role": self.role, "family": self.family, "label": self.label,
                "params": [float(x) for x in self.params],
                "endpoint_exponents": [float(x) for x in self.endpoint_exponents]}


# ---------------------------------------------------------------------------
# alpha trials
# ---------------------------------------------------------------------------

def power_alpha(a: float = 1.0, b: float = 0.0) -> TrialFunction:
    """alpha = a u (1 - b u)."""
    if b == 0.0:
        label = "alpha=u" if a == 1.0 else f"alpha={a:g}*u"
    elif b == 1.0:
        label = "alpha=u*(1-u)" if a == 1.0 else f"alpha={a:g}*u*(1-u)"
    else:
        label = f"alpha={a:g}*u*(1-{b:g}*u)"
    return TrialFunction(
        "alpha", "power_alpha", (a, b), (1.0, 0.0 if b != 1 else 1.0), label,
        lambda u, v: a * u * (1.0 - b * u),
        lambda u, v: a * (1.0 - 2.0 * b * u))


def poly_alpha(a0: float, a1: float, a2: float) -> TrialFunction:
    """alpha = u (a0 + a1 u + a2 u^2)."""
    return TrialFunction(
        "alpha", "poly_alpha", (a0, a1, a2), (1.0, 0.0),
        f"alpha=u*({a0:g}+{a1:g}u+{a2:g}u^2)",
        lambda u, v: u * (a0 + u * (a1 + a2 * u)),
        lambda u, v: a0 + u * (2.0 * a1 + 3.0 * a2 * u))


def alpha_from_solution(sol) -> TrialFunction:
    """alpha = p(u) of an oracle trajectory (the exact upper-bound trial)."""
    return TrialFunction(
        "alpha", "tabulated", (float(sol.c),), (1.0, 1.0), f"alpha=p (c={sol.c:.6g})",
        lambda u, v: sol.p_at(u, v),
        lambda u, v: sol.dpdu_at(u))


# ---------------------------------------------------------------------------
# g trials
# ---------------------------------------------------------------------------

def power_g(lam: float) -> TrialFunction:
    """g = ((1 - u)/u)**lam."""
    with np.errstate(divide="ignore"):
        return TrialFunction(
            "g", "power_g", (lam,), (-lam, lam), f"g=((1-u)/u)^{lam:g}",
            lambda u, v: np.exp(lam * (np.log(v) - np.log(u))),
            lambda u, v: -lam / (u * v) * np.exp(lam * (np.log(v) - np.log(u))),
            lambda u, v: lam * (np.log(v) - np.log(u)),
            lambda u, v: lam / (u * v))


def beta_g(lam0: float, lam1: float) -> TrialFunction:
    """g = u**(-lam0) (1 - u)**lam1."""
    if (lam0, lam1) == (0.0, 1.0):
        label = "g=1-u"
    elif lam0 == 0.0:
        label = f"g=(1-u)^{lam1:g}"
    else:
        label = f"g=u^-{lam0:g}*(1-u)^{lam1:g}"

    def log_g(u, v):
        with np.errstate(divide="ignore"):
            return lam1 * np.log(v) - lam0 * np.log(u)

    def rate(u, v):
        return lam0 / u + lam1 / v

    return TrialFunction(
        "g", "beta_g", (lam0, lam1), (-lam0, lam1), label,
        lambda u, v: np.exp(log_g(u, v)),
        lambda u, v: -rate(u, v) * np.exp(log_g(u, v)),
        log_g, rate)


def g_from_solution(sol, principle: str = "VP4") -> TrialFunction:
    """The optimizing g for a principle, tabulated from an oracle trajectory.

    ``VP4``: log g = -int_{1/2}^{u} c/p, the maximizer of the phase-space
    quotient.  ``VP2``: log g = -int_{1/2}^{u} f/p^2, the equality case of
    the AM-GM step in the integral principle.  Both are normalized g(1/2) = 1.
    """
    f = sol.reaction
    c = sol.c
    if principle == "VP4":
        lam = sol.lambda_plus if sol.decay_branch == "steep" else sol.origin_slope
        exps = (-c / lam, c / sol.mu1)

        def log_g(u, v):
            return c * sol.z_of_u(u, v)

        def rate(u, v):
            return c / sol.p_at(u, v)
    elif principle == "VP2":
        lam = sol.lambda_plus if sol.decay_branch == "steep" else sol.origin_slope
        exps = (-f.fprime0 / lam**2, -f.fprime1 / sol.mu1**2)

        def log_g(u, v):
            return -sol.int_f_over_p2(u, v)

        def rate(u, v):
            # f/p^2 scaled by w = min(u, v) so p^2 cannot underflow near either end
            w = np.minimum(u, v)
            return (f.f(u) / w) / ((sol.p_at(u, v) / w) ** 2 * w)
    else:
        raise ValueError(f"no optimal trial for principle {principle!r}")

    def value(u, v):
        return np.exp(log_g(u, v))

    def deriv(u, v):
        return -rate(u, v) * value(u, v)

    return TrialFunction("g", "tabulated", (c,), exps,
                         f"g_opt[{principle}] (c={c:.6g})", value, deriv, log_g, rate)


def optimal_trial(sol, principle: str = "VP4") -> TrialFunction:
    """Optimizing trial g built from an oracle solution, with endpoint checks.

    Raises :class:`NumericalFailure` if the tabulated near-endpoint slopes
    of p have not settled to the linear behaviour the exponents assume.
    """
    if np.any(sol.p <= 0):
        raise NumericalFailure("optimal trial needs p > 0 on the grid")
    u, p = sol.u_grid, sol.p
    j = int(np.searchsorted(u, 10 * u[0]))
    drift_lo = abs(p[j] / u[j] / (p[0] / u[0]) - 1.0)
    top = 1.0 - u[-1]
    drift_hi = abs(sol.top_slope / sol.mu1 - 1.0)
    if drift_lo > 5e-2 or drift_hi > 1e-2 * max(1.0, top / 1e-8):
        raise NumericalFailure(
            "endpoint exponents of the optimal trial did not converge",
            diagnostics={"drift_origin": drift_lo, "drift_top": drift_hi})
    return g_from_solution(sol, principle)


# ---------------------------------------------------------------------------
# admissibility
# ---------------------------------------------------------------------------

def check_admissible(trial: TrialFunction, n: int = ADMISSIBILITY_SAMPLES) -> None:
    """Raise :class:`InadmissibleTrial` if sampling shows the trial is not admissible.

    alpha: alpha > 0 on (0, 1) and alpha'(0) > 0.  g: finite, positive,
    strictly decreasing (h/g > 0).
    """
    u = (np.arange(1, n + 1) - 0.5) / n
    v = (n - np.arange(1, n + 1) + 0.5) / n
    if trial.role == "alpha":
        vals = trial.value(u, v)
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
            raise InadmissibleTrial(f"{trial.label}: alpha is not positive on (0, 1)")
        d0 = float(trial.deriv(np.array([0.0]), np.array([1.0]))[0])
        if not d0 > 0:
            raise InadmissibleTrial(f"{trial.label}: alpha'(0) = {d0:g} is not positive")
    elif trial.role == "g":
        logs = trial.log_value(u, v)
        rates = trial.rate(u, v)
        if not np.all(np.isfinite(logs)):
            raise InadmissibleTrial(f"{trial.label}: g is not finite and positive on (0, 1)")
        if not np.all(np.isfinite(rates)) or np.any(rates <= 0):
            raise InadmissibleTrial(f"{trial.label}: g is not strictly decreasing")
    else:
        raise ValueError(f"unknown trial role {trial.role!r}")


def logit_grid(n: int, span: float = 30.0) -> tuple[np.ndarray, np.ndarray]:
    """(u, v) pairs equally spaced in log(u/v); useful for sampling near both ends."""
    x = np.linspace(-span, span, n)
    return 1.0 / (1.0 + np.exp(-x)), 1.0 / (1.0 + np.exp(x))


__all__ = [
    "TrialFunction", "alpha_from_solution", "beta_g", "check_admissible", "g_from_solution",
    "logit_grid", "optimal_trial", "poly_alpha", "power_alpha", "power_g",
]
