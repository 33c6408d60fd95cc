"""Tightening the variational bounds over parameterized trial families."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize

from .bounds import BoundResult, vp1_upper, vp2_lower, vp4_lower
from .errors import FrontSpeedError, InadmissibleTrial
from .oracle import minimal_speed, speed_bracket
from .reaction import ReactionTerm, aw_upper
from .trials import TrialFunction, beta_g, check_admissible, poly_alpha, power_alpha, power_g

PRINCIPLE_ROLE = {"VP1": "alpha", "VP2": "g", "VP4": "g"}
MIN_BUDGET = 50


@dataclass(frozen=True)
class TrialFamily:
    name: str
    role: str
    param_names: tuple[str, ...]
    box: tuple[tuple[float, float], ...]
    start: tuple[float, ...]
    build: Callable[..., TrialFunction]

    def with_box(self, box) -> "TrialFamily":
        box = tuple((float(lo), float(hi)) for lo, hi in box)
        start = tuple(min(max(s, lo), hi) for s, (lo, hi) in zip(self.start, box))
        return replace(self, box=box, start=start)

    def contains(self, x) -> bool:
        return all(lo <= xi <= hi for xi, (lo, hi) in zip(x, self.box))


def family(name: str, principle: str = "VP4") -> TrialFamily:
    """A named family with its default parameter box for ``principle``.

    The g-families keep the exponent at u = 0 below 1 for VP2 (so that
    int g converges) and below 2 for VP4 (so that int g^2/h converges).
    """
    edge = 0.95 if principle == "VP2" else 1.95
    if name == "power_alpha":
        return TrialFamily(name, "alpha", ("a", "b"), ((0.05, 5.0), (-2.0, 1.0)),
                           (1.0, 0.5), power_alpha)
    if name == "poly_alpha":
        return TrialFamily(name, "alpha", ("a0", "a1", "a2"),
                           ((0.05, 5.0), (-5.0, 5.0), (-5.0, 5.0)), (1.0, 0.0, 0.0), poly_alpha)
    if name == "power_g":
        return TrialFamily(name, "g", ("lambda",), ((0.05, edge),), (0.5 * edge,), power_g)
    if name == "beta_g":
        return TrialFamily(name, "g", ("lambda0", "lambda1"), ((0.0, edge), (0.05, 6.0)),
                           (0.5 * edge, 1.0), beta_g)
    raise ValueError(f"unknown trial family {name!r}")


def families_for(principle: str) -> list[TrialFamily]:
    if principle == "VP1":
        return [family("power_alpha", principle), family("poly_alpha", principle)]
    return [family("power_g", principle), family("beta_g", principle)]


_EVALUATORS = {"VP1": vp1_upper, "VP2": vp2_lower, "VP4": vp4_lower}


def _penalty_scale(f: ReactionTerm) -> float:
    if f.reaction_class.tag == "bistable":
        return 10.0 * speed_bracket(f)[1]
    return 10.0 * aw_upper(f)


def optimize_bound(f: ReactionTerm, fam: TrialFamily, principle: str, budget: int = 200,
                   rel_tol: float = 1e-8) -> BoundResult:
    """Best bound found by a Nelder-Mead search over ``fam``'s parameter box.

    Minimizes VP1 or maximizes VP2/VP4.  The search is restarted once from
    the best vertex.  Points outside the box, or failing the sampled
    admissibility check, score a penalty of 10 aw_upper and never reach the
    bound evaluation.  The result's metadata holds the best parameters and
    the best-so-far trace.
    """
    if principle not in _EVALUATORS:
        raise ValueError(f"unknown principle {principle!r}")
    if PRINCIPLE_ROLE[principle] != fam.role:
        raise ValueError(f"family {fam.name} ({fam.role}) does not fit {principle}")
    if budget < MIN_BUDGET:
        raise ValueError(f"budget must be at least {MIN_BUDGET}")
    sign = 1.0 if principle == "VP1" else -1.0
    penalty = _penalty_scale(f)
    evaluate = _EVALUATORS[principle]
    kwargs = {} if principle == "VP1" else {"rel_tol": rel_tol}
    state = {"best": None, "best_x": None, "trace": [], "evals": 0}

    def objective(x):
        state["evals"] += 1
        if not fam.contains(x):
            return penalty
        try:
            trial = fam.build(*map(float, x))
            check_admissible(trial)
            result = evaluate(f, trial, **kwargs)
        except (InadmissibleTrial, FrontSpeedError, ValueError, ArithmeticError):
            return penalty
        score = sign * result.value
        best = state["best"]
        if best is None or score < sign * best.value:
            state["best"], state["best_x"] = result, np.array(x, dtype=float)
        state["trace"].append(state["best"].value)
        return score

    first = int(budget * 2 // 3)
    _nelder_mead(objective, np.array(fam.start, float), fam, first)
    if state["best"] is not None:
        _nelder_mead(objective, state["best_x"], fam, budget - state["evals"])
    if state["best"] is None:
        raise InadmissibleTrial(f"no admissible point of {fam.name} found for {principle}")
    best = state["best"]
    meta = dict(best.metadata)
    meta.update({"family": fam.name,
                 "params": dict(zip(fam.param_names, map(float, state["best_x"]))),
                 "evaluations": state["evals"], "trace": state["trace"]})
    return replace(best, metadata=meta)


def _nelder_mead(objective, x0, fam: TrialFamily, maxfev: int) -> None:
    if maxfev <= len(x0) + 1:
        return
    simplex = [x0]
    for i, (lo, hi) in enumerate(fam.box):
        step = 0.15 * (hi - lo)
        y = x0.copy()
        y[i] = x0[i] + step if x0[i] + step <= hi else x0[i] - step
        simplex.append(y)
    minimize(objective, x0, method="Nelder-Mead",
             options={"maxfev": maxfev, "initial_simplex": np.array(simplex),
                      "xatol": 1e-7, "fatol": 1e-10})


def bound_gap(f: ReactionTerm, budget: int = 200, c_tol: float = 1e-4, jobs: int = 1,
              oracle_c: Optional[float] = None) -> dict:
    """Tightest optimized bounds around the oracle speed.

    VP1 and VP2 are used only for non-bistable terms; VP4 always.
    """
    if oracle_c is None:
        oracle_c = float(minimal_speed(f, c_tol).c)
    bistable = f.reaction_class.tag == "bistable"
    tasks = [] if bistable else [("VP1", fam) for fam in families_for("VP1")]
    if not bistable:
        tasks += [("VP2", fam) for fam in families_for("VP2")]
    tasks += [("VP4", fam) for fam in families_for("VP4")]

    def run(task):
        principle, fam = task
        try:
            return principle, fam.name, optimize_bound(f, fam, principle, budget)
        except FrontSpeedError as exc:
            return principle, fam.name, exc

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]

    uppers = [(r.value, p, n) for p, n, r in results if isinstance(r, BoundResult) and p == "VP1"]
    lowers = [(r.value, p, n) for p, n, r in results if isinstance(r, BoundResult) and p != "VP1"]
    best_upper = min(uppers) if uppers else None
    best_lower = max(lowers) if lowers else None
    record = {
        "reaction": f.label,
        "oracle_c": oracle_c,
        "best_upper": best_upper[0] if best_upper else None,
        "best_upper_source": f"{best_upper[1]}/{best_upper[2]}" if best_upper else None,
        "best_lower": best_lower[0] if best_lower else None,
        "best_lower_source": f"{best_lower[1]}/{best_lower[2]}" if best_lower else None,
        "gap": (best_upper[0] - best_lower[0]) if best_upper and best_lower else None,
        "runs": [{"principle": p, "family": n,
                  "value": r.value if isinstance(r, BoundResult) else None,
                  "error": None if isinstance(r, BoundResult) else str(r)}
                 for p, n, r in results],
    }
    if record["gap"] is not None and not math.isfinite(record["gap"]):
        record["gap"] = None
    return record
