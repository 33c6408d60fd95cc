"""Command-line front end: speed, bound, optimize, verify, evolve.

Exit codes: 0 success, 1 computational failure (or a verification report
that did not pass), 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import re
import sys
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Optional, Sequence

import numpy as np

from . import bounds, optimize, verify
from .errors import ClassificationError, FrontSpeedError, InadmissibleTrial, ReactionSpecError
from .evolve import evolve, spreading_speed, write_track_csv
from .oracle import front_profile, minimal_speed
from .reaction import ReactionTerm, builtin, make_reaction
from .trials import (
    TrialFunction,
    alpha_from_solution,
    beta_g,
    optimal_trial,
    poly_alpha,
    power_alpha,
    power_g,
)

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2
SIG = 12
COMMANDS = ("speed", "bound", "optimize", "verify", "evolve")


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    return f"{x:.{SIG}g}"


def _round(obj: Any):
    """Round every float in a JSON-able structure to 12 significant digits."""
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return float(fmt(v)) if np.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    command: str
    reaction: Any
    c_tol: float = 1e-4
    quad_rel_tol: float = 1e-8
    principle: Optional[str] = None
    trial: Optional[str] = None
    budget: int = 200
    jobs: int = 1
    ic: str = "step"
    L: float = 400.0
    dx: float = 0.1
    t_end: float = 150.0
    out: Optional[str] = None
    profile_out: Optional[str] = None
    json: bool = False

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        if "command" not in data or "reaction" not in data:
            raise UsageError("config needs 'command' and 'reaction'")
        return cls(**data)


_NAME_CALL = re.compile(r"^\s*([A-Za-z_]\w*)\s*(?:\((.*)\))?\s*$")


def parse_reaction(spec: Any) -> ReactionTerm:
    """A reaction from a builtin name, ``name(k=v, ...)``, a JSON object string, or a dict."""
    if isinstance(spec, dict):
        return make_reaction(spec)
    if not isinstance(spec, str) or not spec.strip():
        raise ReactionSpecError("empty reaction")
    text = spec.strip()
    if text.startswith("{"):
        try:
            return make_reaction(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ReactionSpecError(f"reaction JSON: {exc}") from exc
    m = _NAME_CALL.match(text)
    if not m:
        raise ReactionSpecError(f"cannot parse reaction {spec!r}")
    params = {}
    if m.group(2):
        for item in m.group(2).split(","):
            if not item.strip():
                continue
            key, sep, val = item.partition("=")
            if not sep:
                raise ReactionSpecError(f"reaction parameter {item!r} is not key=value")
            try:
                params[key.strip()] = float(val)
            except ValueError as exc:
                raise ReactionSpecError(f"reaction parameter {item!r} is not numeric") from exc
    return builtin(m.group(1), **params)


_NUM = r"([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"
_TRIAL_PATTERNS = [
    (re.compile(r"^g=1-u$"), lambda: beta_g(0.0, 1.0)),
    (re.compile(rf"^g=\(1-u\)\^{_NUM}$"), lambda L: beta_g(0.0, float(L))),
    (re.compile(rf"^g=\(\(1-u\)/u\)\^{_NUM}$"), lambda L: power_g(float(L))),
    (re.compile(r"^alpha=u$"), lambda: power_alpha(1.0, 0.0)),
    (re.compile(r"^alpha=u\*\(1-u\)$"), lambda: power_alpha(1.0, 1.0)),
    (re.compile(rf"^alpha={_NUM}\*u\*\(1-u\)$"), lambda a: power_alpha(float(a), 1.0)),
]
_FAMILIES = {"power_alpha": (power_alpha, 2), "poly_alpha": (poly_alpha, 3),
             "power_g": (power_g, 1), "beta_g": (beta_g, 2)}


def parse_trial(text: str, sol_factory=None, principle: str = "VP4") -> TrialFunction:
    """Parse the trial mini-language.

    Literal forms: ``g=1-u``, ``g=(1-u)^L``, ``g=((1-u)/u)^L``, ``alpha=u``,
    ``alpha=u*(1-u)``, ``alpha=A*u*(1-u)``; family calls such as
    ``power_g(0.5)`` or ``beta_g(0.5,2)``; and ``g=optimal`` / ``alpha=optimal``
    for the trials built from the oracle trajectory (``g=optimal`` is the
    VP2 optimum when ``principle`` is VP2 and the VP4 optimum otherwise).
    """
    t = re.sub(r"\s+", "", text)
    for pat, build in _TRIAL_PATTERNS:
        m = pat.match(t)
        if m:
            return build(*m.groups())
    if t in ("g=optimal", "alpha=optimal"):
        if sol_factory is None:
            raise UsageError("optimal trials need an oracle solution")
        sol = sol_factory()
        if t.startswith("alpha"):
            return alpha_from_solution(sol)
        return optimal_trial(sol, "VP2" if principle == "VP2" else "VP4")
    m = re.match(r"^(\w+)\((.*)\)$", t)
    if m and m.group(1) in _FAMILIES:
        build, nargs = _FAMILIES[m.group(1)]
        try:
            args = [float(a) for a in m.group(2).split(",") if a]
        except ValueError as exc:
            raise UsageError(f"non-numeric parameter in trial {text!r}") from exc
        if len(args) != nargs:
            raise UsageError(f"{m.group(1)} takes {nargs} parameters, got {len(args)}")
        return build(*args)
    raise UsageError(f"cannot parse trial {text!r}")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _emit(cfg: RunConfig, record: dict, lines: Sequence[str]) -> None:
    out = sys.stdout
    if cfg.json:
        out.write(json.dumps(_round({"command": cfg.command, **record}), sort_keys=True) + "\n")
    else:
        out.write("\n".join(lines) + "\n")


def _cmd_speed(cfg: RunConfig, f: ReactionTerm) -> int:
    sol = minimal_speed(f, cfg.c_tol)
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["u", "p"])
            for u, p in zip(sol.u_grid, sol.p):
                w.writerow([fmt(u), fmt(p)])
    if cfg.profile_out:
        prof = front_profile(sol)
        with open(cfg.profile_out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["z", "u", "uz"])
            for z, u, uz in zip(prof.z, prof.u, prof.uz):
                w.writerow([fmt(z), fmt(u), fmt(uz)])
    _emit(cfg, {"reaction": f.label, "c0": sol.c, "branch": sol.decay_branch},
          [f"reaction {f.label}", f"c0 {fmt(sol.c)}", f"branch {sol.decay_branch}"])
    return EXIT_OK


_BOUND_FUNCS = {"VP1": bounds.vp1_upper, "VP2": bounds.vp2_lower, "VP4": bounds.vp4_lower,
                "VP4s": bounds.vp4s_lower}


def _cmd_bound(cfg: RunConfig, f: ReactionTerm) -> int:
    if cfg.principle not in _BOUND_FUNCS:
        raise UsageError(f"--principle must be one of {sorted(_BOUND_FUNCS)}")
    if not cfg.trial:
        raise UsageError("bound needs --trial")
    trial = parse_trial(cfg.trial, lambda: minimal_speed(f, cfg.c_tol), cfg.principle)
    expected = "alpha" if cfg.principle == "VP1" else "g"
    if trial.role != expected:
        raise UsageError(f"{cfg.principle} needs a {expected} trial, got {trial.label}")
    fn = _BOUND_FUNCS[cfg.principle]
    res = fn(f, trial) if cfg.principle == "VP1" else fn(f, trial, rel_tol=cfg.quad_rel_tol)
    lines = [f"reaction {f.label}", f"principle {res.principle}", f"direction {res.direction}",
             f"trial {trial.label}", f"value {fmt(res.value)}",
             f"quad_error {fmt(res.quad_error)}"]
    if res.squared is not None:
        lines.append(f"squared {fmt(res.squared)}")
    _emit(cfg, {"reaction": f.label, **res.to_record()}, lines)
    return EXIT_OK


def _cmd_optimize(cfg: RunConfig, f: ReactionTerm) -> int:
    rec = optimize.bound_gap(f, cfg.budget, cfg.c_tol, cfg.jobs)
    lines = [f"reaction {f.label}", f"oracle_c {fmt(rec['oracle_c'])}"]
    for key in ("best_upper", "best_lower", "gap"):
        val = rec[key]
        lines.append(f"{key} {fmt(val) if val is not None else 'n/a'}")
    for key in ("best_upper_source", "best_lower_source"):
        lines.append(f"{key} {rec[key] or 'n/a'}")
    _emit(cfg, rec, lines)
    return EXIT_OK


def _cmd_verify(cfg: RunConfig, f: ReactionTerm) -> int:
    report = verify.full_report(f, cfg.c_tol, cfg.jobs)
    text = json.dumps(_round(report.to_record()), indent=2, sort_keys=True) + "\n"
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
        counts = {}
        for c in report.checks:
            counts[c.status] = counts.get(c.status, 0) + 1
        summary = ", ".join(f"{k}={v}" for k, v in sorted(counts.items()))
        _emit(cfg, {"reaction": f.label, "pass": report.passed, "out": cfg.out,
                    "counts": counts},
              [f"reaction {f.label}", f"pass {str(report.passed).lower()}",
               f"checks {summary}", f"report {cfg.out}"])
    else:
        sys.stdout.write(text)
    return EXIT_OK if report.passed else EXIT_FAILURE


def _cmd_evolve(cfg: RunConfig, f: ReactionTerm) -> int:
    ev = evolve(f, cfg.ic, cfg.L, cfg.dx, cfg.t_end)
    if cfg.out:
        write_track_csv(ev, cfg.out)
    fit = spreading_speed(ev)
    _emit(cfg, {"reaction": f.label, "speed": fit.speed, "fit_residual": fit.fit_residual,
                "window": list(fit.window), "track": cfg.out},
          [f"reaction {f.label}", f"speed {fmt(fit.speed)}",
           f"fit_residual {fmt(fit.fit_residual)}"])
    return EXIT_OK


_COMMANDS = {"speed": _cmd_speed, "bound": _cmd_bound, "optimize": _cmd_optimize,
             "verify": _cmd_verify, "evolve": _cmd_evolve}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="frontspeed",
                     description="Minimal front speeds and variational bounds.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p):
        p.add_argument("--reaction", help="builtin name, name(k=v,...), or JSON object")
        p.add_argument("--config", help="RunConfig JSON file; flags override its values")
        p.add_argument("--c-tol", type=float, dest="c_tol")
        p.add_argument("--quad-rel-tol", type=float, dest="quad_rel_tol")
        p.add_argument("--json", action="store_true", default=None)
        p.add_argument("--out")
        p.add_argument("--jobs", type=int)

    p = sub.add_parser("speed", help="minimal speed and decay branch")
    common(p)
    p.add_argument("--profile-out", dest="profile_out", help="CSV z,u,uz of the front profile")
    p = sub.add_parser("bound", help="evaluate one bound on one trial")
    common(p)
    p.add_argument("--principle", choices=sorted(_BOUND_FUNCS))
    p.add_argument("--trial")
    p = sub.add_parser("optimize", help="optimized bounds around the oracle speed")
    common(p)
    p.add_argument("--budget", type=int)
    p = sub.add_parser("verify", help="verification report as JSON")
    common(p)
    p = sub.add_parser("evolve", help="PDE simulation and measured spreading speed")
    common(p)
    p.add_argument("--ic", choices=["step", "compact_bump"])
    p.add_argument("--L", type=float, dest="L")
    p.add_argument("--dx", type=float)
    p.add_argument("--t-end", type=float, dest="t_end")
    return parser


def config_from_args(argv: Sequence[str]) -> RunConfig:
    args = build_parser().parse_args(list(argv))
    if args.command is None:
        raise UsageError(f"a subcommand is required: {', '.join(COMMANDS)}")
    data: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if data.get("command", args.command) != args.command:
            raise UsageError(f"config is for {data['command']!r}, not {args.command!r}")
    data["command"] = args.command
    for key, val in vars(args).items():
        if key in ("command", "config") or val is None:
            continue
        data[key] = val
    if "reaction" not in data:
        raise UsageError("--reaction is required (flag or config)")
    cfg = RunConfig.from_dict(data)
    if cfg.c_tol < 1e-8:
        raise UsageError("--c-tol must be at least 1e-8")
    if not 1e-14 <= cfg.quad_rel_tol <= 1e-2:
        raise UsageError("--quad-rel-tol must lie in [1e-14, 1e-2]")
    if cfg.jobs < 1:
        raise UsageError("--jobs must be positive")
    return cfg


def run(argv: Sequence[str]) -> int:
    try:
        cfg = config_from_args(argv)
        f = parse_reaction(cfg.reaction)
        f.reaction_class
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (UsageError, ReactionSpecError, ClassificationError) as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    try:
        return _COMMANDS[cfg.command](cfg, f)
    except (UsageError, InadmissibleTrial) as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except (FrontSpeedError, ValueError, ArithmeticError) as exc:
        sys.stderr.write(f"failure: {type(exc).__name__}: {exc}\n")
        diag = getattr(exc, "diagnostics", None)
        if diag:
            sys.stderr.write(f"diagnostics: {json.dumps(_round(diag), sort_keys=True)}\n")
        return EXIT_FAILURE


def main() -> None:
    sys.exit(run(sys.argv[1:]))
