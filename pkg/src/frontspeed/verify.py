"""Numerical certification of the inequality chains and change-of-variables identities."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .bounds import (
    vp1_upper,
    vp2_lower,
    vp4_lower,
    vp4s_value,
    s_profile,
    weighted_integrals,
    xc_ratio,
)
from .errors import ClassificationError, FrontSpeedError, InadmissibleTrial
from .numerics import integrate_unit
from .oracle import PhasePlaneSolution, front_profile, minimal_speed, residual
from .reaction import ReactionTerm, aw_upper, kpp_speed, zfk_speed
from .trials import (
    TrialFunction,
    alpha_from_solution,
    beta_g,
    check_admissible,
    optimal_trial,
    power_alpha,
    power_g,
)

PASS, FAIL, INCONCLUSIVE, NOT_APPLICABLE = "pass", "fail", "inconclusive", "not_applicable"
CHAIN_TOL = 1e-8
IBP_TOL = 1e-8
IDENTITY_TOL = 1e-4
XC_TOL = 1e-3
S_FORM_TOL = 1e-6
ATTAIN_TOL = 5e-3
QUAD_TOL = 1e-11


@dataclass(frozen=True)
class CheckRecord:
    id: str
    lhs: Optional[float]
    rhs: Optional[float]
    tol: float
    status: str
    details: dict = field(default_factory=dict)
    note: str = ""

    def to_record(self) -> dict:
        rec = {"id": self.id, "lhs": _num(self.lhs), "rhs": _num(self.rhs),
               "tol": self.tol, "status": self.status}
        if self.details:
            rec["details"] = {k: _num(v) for k, v in self.details.items()}
        if self.note:
            rec["note"] = self.note
        return rec


def _num(v):
    if v is None or isinstance(v, (str, bool)):
        return v
    if isinstance(v, (list, tuple)):
        return [_num(x) for x in v]
    v = float(v)
    return v if math.isfinite(v) else None


def _status(ok: bool) -> str:
    return PASS if ok else FAIL


def _rel_close(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol * max(abs(a), abs(b), 1e-300)


def _int(phi, f: ReactionTerm):
    return integrate_unit(phi, QUAD_TOL, breakpoints=f.breakpoints).value


def _signed(vals, logs):
    out = np.zeros_like(np.asarray(logs, dtype=float))
    nz = vals != 0
    with np.errstate(over="ignore", divide="ignore"):
        out[nz] = np.sign(vals[nz]) * np.exp(np.log(np.abs(vals[nz])) + logs[nz])
    return out


def _require_monostable(f: ReactionTerm, what: str) -> None:
    if not f.reaction_class.is_monostable:
        raise ClassificationError(f"{what} is stated for monostable terms; "
                                  f"{f.label} is {f.reaction_class.tag}")


# ---------------------------------------------------------------------------
# chains between the integral principle and the sup principle
# ---------------------------------------------------------------------------

def _chain_pieces(f: ReactionTerm, g: TrialFunction, alpha: TrialFunction):
    int_g = _int(lambda u, v: np.exp(g.log_value(u, v)), f)

    def alpha_h(u, v):
        with np.errstate(divide="ignore"):
            return np.exp(np.log(alpha.value(u, v)) + np.log(g.rate(u, v)) + g.log_value(u, v))

    def f_g_over_alpha(u, v):
        with np.errstate(divide="ignore"):
            return _signed(f.f(u), g.log_value(u, v) - np.log(alpha.value(u, v)))

    def alpha_prime_g(u, v):
        return _signed(alpha.deriv(u, v), g.log_value(u, v))

    return (int_g, _int(alpha_h, f), _int(f_g_over_alpha, f), _int(alpha_prime_g, f))


def check_chain_vp2_implies_vp1(f: ReactionTerm, g: TrialFunction,
                                alpha: TrialFunction) -> CheckRecord:
    """2 int sqrt(fgh)/int g <= int (alpha h + f g/alpha)/int g <= sup(alpha' + f/alpha).

    The middle step rests on int alpha h = int alpha' g (integration by parts
    with alpha(0) = 0, g(1) = 0); when g(1) > 0 the boundary term makes it
    an inequality, which is checked instead.
    """
    _require_monostable(f, "the integral-to-sup chain")
    check_admissible(g)
    check_admissible(alpha)
    lower = vp2_lower(f, g, QUAD_TOL)
    upper = vp1_upper(f, alpha)
    int_g, a_h, fg_a, ap_g = _chain_pieces(f, g, alpha)
    middle = (a_h + fg_a) / int_g
    scale = max(1.0, abs(upper.value))
    tol = CHAIN_TOL * scale + lower.quad_error + upper.quad_error
    g1 = g.value_at_one()
    if g1 == 0.0:
        ibp_ok = _rel_close(a_h, ap_g, IBP_TOL)
        ibp_kind = "equality"
    else:
        ibp_ok = a_h <= ap_g + IBP_TOL * max(abs(ap_g), 1.0)
        ibp_kind = "inequality (g(1) > 0)"
    ok = lower.value <= middle + tol and middle <= upper.value + tol and ibp_ok
    return CheckRecord(
        "chain_vp2_implies_vp1", lower.value, upper.value, tol, _status(ok),
        {"middle": middle, "ibp_alpha_h": a_h, "ibp_alphaprime_g": ap_g},
        f"{g.label}; {alpha.label}; integration by parts checked as {ibp_kind}")


def check_chain_vp1_implies_vp2(f: ReactionTerm, alpha: TrialFunction,
                                g: TrialFunction) -> CheckRecord:
    """sup(alpha' + f/alpha) >= int (alpha' + f/alpha) g / int g >= 2 int sqrt(fgh)/int g."""
    if g.value_at_one() != 0.0:
        raise InadmissibleTrial(
            f"{g.label}: this chain integrates by parts and needs g(1) = 0")
    _require_monostable(f, "the sup-to-integral chain")
    check_admissible(g)
    check_admissible(alpha)
    upper = vp1_upper(f, alpha)
    lower = vp2_lower(f, g, QUAD_TOL)
    int_g, _, fg_a, ap_g = _chain_pieces(f, g, alpha)
    middle = (ap_g + fg_a) / int_g
    tol = CHAIN_TOL * max(1.0, abs(upper.value)) + lower.quad_error + upper.quad_error
    ok = upper.value >= middle - tol and middle >= lower.value - tol
    return CheckRecord("chain_vp1_implies_vp2", upper.value, lower.value, tol, _status(ok),
                       {"middle": middle}, f"{alpha.label}; {g.label}")


# ---------------------------------------------------------------------------
# identities relating phase-space and profile integrals
# ---------------------------------------------------------------------------

def _steep_or_na(sol: PhasePlaneSolution, check_id: str) -> Optional[CheckRecord]:
    if sol.decay_branch != "steep":
        return CheckRecord(check_id, None, None, IDENTITY_TOL, NOT_APPLICABLE,
                           note=f"decay branch is {sol.decay_branch}; the optimal trial "
                                "exists only when the front decays along the steep direction")
    return None


def check_identity_down(f: ReactionTerm, sol: PhasePlaneSolution,
                        delta: float = 1e-6) -> CheckRecord:
    """int g^2/h du = (1/c) int e^{cz} u_z^2 dz with g(u(z)) = e^{cz}."""
    na = _steep_or_na(sol, "identity_down")
    if na:
        return na
    g = optimal_trial(sol, "VP4")
    lhs = _int(lambda u, v: np.exp(g.log_value(u, v) - np.log(g.rate(u, v))), f)
    wi = weighted_integrals(f, front_profile(sol, delta), sol.c)
    rhs = 2.0 * wi.kinetic / sol.c
    if wi.flagged:
        return CheckRecord("identity_down", lhs, rhs, IDENTITY_TOL, INCONCLUSIVE,
                           {"tail_fraction": wi.tail_fraction}, "tail correction above 1%")
    return CheckRecord("identity_down", lhs, rhs, IDENTITY_TOL,
                       _status(_rel_close(lhs, rhs, IDENTITY_TOL)),
                       {"tail_fraction": wi.tail_fraction})


def check_identity_up(f: ReactionTerm, sol: PhasePlaneSolution,
                      delta: float = 1e-6) -> CheckRecord:
    """int f g du = c int e^{cz} V dz, plus -int V dg/du du = int f g du."""
    na = _steep_or_na(sol, "identity_up")
    if na:
        return na
    g = optimal_trial(sol, "VP4")
    lhs = _int(lambda u, v: _signed(f.f(u), g.log_value(u, v)), f)
    with np.errstate(divide="ignore"):
        ibp = _int(lambda u, v: _signed(f.V(u), g.log_value(u, v) + np.log(g.rate(u, v))), f)
    wi = weighted_integrals(f, front_profile(sol, delta), sol.c)
    rhs = sol.c * wi.potential
    details = {"ibp_V_h": ibp, "tail_fraction": wi.tail_fraction}
    if wi.flagged:
        return CheckRecord("identity_up", lhs, rhs, IDENTITY_TOL, INCONCLUSIVE, details,
                           "tail correction above 1%")
    ok = _rel_close(lhs, rhs, IDENTITY_TOL) and _rel_close(lhs, ibp, IDENTITY_TOL)
    return CheckRecord("identity_up", lhs, rhs, IDENTITY_TOL, _status(ok), details)


def _xc_lower_limit(f: ReactionTerm) -> float:
    """c_KPP when f'(0) > 0; zero otherwise, since no linear spreading speed exists."""
    return kpp_speed(f) if f.fprime0 > 0 else 0.0


def default_c_list(f: ReactionTerm, sol: PhasePlaneSolution, n: int = 5) -> list[float]:
    """n speeds strictly inside (c_lo, c0), followed by c0 itself."""
    lo = _xc_lower_limit(f)
    return [float(c) for c in np.linspace(lo, sol.c, n + 2)[1:-1]] + [sol.c]


def check_phasespace_relation(f: ReactionTerm, sol: PhasePlaneSolution,
                              c_list: Optional[Sequence[float]] = None,
                              tol: float = XC_TOL) -> list[CheckRecord]:
    """X_c0 = 1 on the minimal profile, and X_c >= 1 for admissible c below c0."""
    if sol.decay_branch != "steep":
        return [CheckRecord("phasespace_relation", None, None, tol, NOT_APPLICABLE,
                            note=f"decay branch is {sol.decay_branch}; the weighted integrals "
                                 "diverge at c = c0 for this profile")]
    if c_list is None:
        c_list = default_c_list(f, sol)
    profile = front_profile(sol)
    lo = _xc_lower_limit(f)
    out = []
    for c in c_list:
        cid = f"phasespace_relation[c={c:.12g}]"
        at_c0 = abs(c - sol.c) <= 1e-9 * max(1.0, sol.c)
        if not at_c0 and not lo < c < sol.c:
            out.append(CheckRecord(cid, None, 1.0, tol, NOT_APPLICABLE,
                                   note="c outside the range where X_c >= 1 is asserted"))
            continue
        try:
            x = xc_ratio(f, profile, c)
        except FrontSpeedError as exc:
            out.append(CheckRecord(cid, None, 1.0, tol, INCONCLUSIVE, note=str(exc)))
            continue
        ok = abs(x - 1.0) <= tol if at_c0 else x >= 1.0 - tol
        out.append(CheckRecord(cid, x, 1.0, tol, _status(ok),
                               note="X_c = 1 at c0" if at_c0 else "X_c >= 1"))
    return out


def check_vp4_vp4s_consistency(f: ReactionTerm, g: TrialFunction, tol: float = S_FORM_TOL,
                               corrected: bool = True) -> CheckRecord:
    """The s-form quotient (s = 1/g) against the squared VP4 quotient."""
    if g.value_at_one() != 0.0:
        raise InadmissibleTrial(f"{g.label}: the s-form needs g(1) = 0")
    cid = "vp4_vp4s_consistency" + ("" if corrected else "[printed constant]")
    try:
        lhs = vp4s_value(f, s_profile(g, u_breaks=f.breakpoints), corrected=corrected, rel_tol=QUAD_TOL)
        rhs = vp4_lower(f, g, QUAD_TOL).squared
    except FrontSpeedError as exc:
        return CheckRecord(cid, None, None, tol, INCONCLUSIVE, note=str(exc))
    return CheckRecord(cid, lhs, rhs, tol, _status(_rel_close(lhs, rhs, tol)),
                       {"ratio": lhs / rhs}, g.label)


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

@dataclass
class Report:
    reaction: str
    c0: float
    branch: str
    checks: list
    passed: bool

    def to_record(self) -> dict:
        return {"reaction": self.reaction,
                "oracle": {"c0": float(self.c0), "branch": self.branch},
                "checks": [c.to_record() for c in self.checks],
                "pass": self.passed}

    def to_json(self) -> str:
        return json.dumps(self.to_record(), indent=2, sort_keys=True)


def _guard(check_id: str, thunk: Callable[[], object]) -> list[CheckRecord]:
    try:
        out = thunk()
    except FrontSpeedError as exc:
        return [CheckRecord(check_id, None, None, 0.0, INCONCLUSIVE,
                            note=f"{type(exc).__name__}: {exc}")]
    return out if isinstance(out, list) else [out]


def _value_check(check_id, lhs, rhs, tol, ok, note=""):
    return CheckRecord(check_id, lhs, rhs, tol, _status(ok), note=note)


def full_report(f: ReactionTerm, c_tol: float = 1e-4, jobs: int = 1) -> Report:
    """Oracle plus every applicable bound and identity check for ``f``.

    A report passes when every check is ``pass`` or ``not_applicable``.
    """
    sol = minimal_speed(f, c_tol)
    c0 = sol.c
    tag = f.reaction_class.tag
    mono = f.reaction_class.is_monostable
    steep = sol.decay_branch == "steep"
    thunks: list[tuple[str, Callable]] = []

    thunks.append(("oracle_residual", lambda: _value_check(
        "oracle_residual", residual(sol), 1e-6, 1e-6, residual(sol) <= 1e-6)))
    if mono:
        def sandwich():
            lo, hi = kpp_speed(f), aw_upper(f)
            return [_value_check("sandwich_lower_kpp", lo, c0, c_tol, lo - c_tol <= c0),
                    _value_check("sandwich_upper_aw", c0, hi, c_tol, c0 <= hi + c_tol),
                    _value_check("zfk_lower", zfk_speed(f), c0, c_tol, zfk_speed(f) <= c0 + c_tol)]
        thunks.append(("sandwich", sandwich))
    if tag != "bistable":
        def vp1_exact():
            v = vp1_upper(f, alpha_from_solution(sol)).value
            return _value_check("vp1_exact_alpha", v, c0, ATTAIN_TOL,
                                _rel_close(v, c0, ATTAIN_TOL), "alpha = oracle p")
        thunks.append(("vp1_exact_alpha", vp1_exact))
    if mono:
        thunks.append(("chain_vp2_implies_vp1", lambda: check_chain_vp2_implies_vp1(
            f, beta_g(0.0, 1.0), power_alpha())))
        thunks.append(("chain_vp1_implies_vp2", lambda: check_chain_vp1_implies_vp2(
            f, power_alpha(), beta_g(0.0, 1.0))))
        if steep:
            thunks.append(("chain_vp2_implies_vp1[optimal]", lambda: check_chain_vp2_implies_vp1(
                f, optimal_trial(sol, "VP2"), alpha_from_solution(sol))))

    def vp4_attain():
        if not steep:
            return CheckRecord("vp4_attainment", None, c0, ATTAIN_TOL, NOT_APPLICABLE,
                               note=f"decay branch is {sol.decay_branch}")
        v = vp4_lower(f, optimal_trial(sol, "VP4")).value
        return _value_check("vp4_attainment", v, c0, ATTAIN_TOL, _rel_close(v, c0, ATTAIN_TOL))
    thunks.append(("vp4_attainment", vp4_attain))
    thunks.append(("identity_down", lambda: check_identity_down(f, sol)))
    thunks.append(("identity_up", lambda: check_identity_up(f, sol)))
    thunks.append(("phasespace_relation", lambda: check_phasespace_relation(f, sol)))

    s_trials = [power_g(1.0), beta_g(0.5, 2.0)] if mono else [power_g(0.2), beta_g(0.0, 0.5)]
    if steep:
        thunks.append(("vp4_vp4s_consistency[optimal]", lambda: check_vp4_vp4s_consistency(
            f, optimal_trial(sol, "VP4"))))
    for g in s_trials:
        thunks.append((f"vp4_vp4s_consistency[{g.label}]",
                       lambda g=g: check_vp4_vp4s_consistency(f, g)))

    def printed_constant():
        rec = check_vp4_vp4s_consistency(f, s_trials[0], corrected=False)
        if rec.status == INCONCLUSIVE:
            return rec
        ratio = rec.details["ratio"]
        return CheckRecord("vp4s_printed_constant_off_by_two", ratio, 0.5, S_FORM_TOL,
                           _status(abs(ratio - 0.5) <= S_FORM_TOL), {"ratio": ratio},
                           "s-form without the factor 2 gives half the VP4 quotient")
    thunks.append(("vp4s_printed_constant", printed_constant))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            groups = list(pool.map(lambda t: _guard(*t), thunks))
    else:
        groups = [_guard(*t) for t in thunks]
    checks = [rec for grp in groups for rec in grp]
    passed = all(c.status in (PASS, NOT_APPLICABLE) for c in checks)
    return Report(f.label, c0, sol.decay_branch, checks, passed)
