"""Reaction terms f(u) on [0, 1], their classification, and closed-form speed functionals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from .errors import ClassificationError, ReactionSpecError
from .numerics import bisect, grid_sup, integrate

ENDPOINT_TOL = 1e-12
FD_STEP = 1e-6

BUILTINS = {
    "fisher": (),
    "hadeler_rothe": ("nu",),
    "bistable_cubic": ("a",),
    "ignition": ("a",),
    "degenerate_power": ("m",),
}

MONOSTABLE_TAGS = ("monostable_kpp", "monostable_general", "monostable_degenerate")


@dataclass(frozen=True)
class Segment:
    """Polynomial piece ``sum_k coefficients[k] * u**k`` on ``[lo, hi]``."""

    lo: float
    hi: float
    coefficients: tuple[float, ...]


@dataclass(frozen=True)
class ReactionClass:
    tag: str
    fprime0: float
    a: Optional[float] = None

    @property
    def is_monostable(self) -> bool:
        return self.tag in MONOSTABLE_TAGS


@dataclass(frozen=True, eq=False)
class ReactionTerm:
    """A nonlinearity f on [0, 1] with f(0) = f(1) = 0.

    ``f``, ``fprime`` and ``V`` accept floats or numpy arrays.  Builtin and
    polynomial terms have analytic derivatives and potentials; piecewise terms
    use centered differences for the derivative and exact segment integrals for V.
    """

    kind: str
    name: str
    params: Mapping[str, float] = field(default_factory=dict)
    coefficients: tuple[float, ...] = ()
    segments: tuple[Segment, ...] = ()
    scale: float = 1.0

    # -- evaluation -----------------------------------------------------
    def f(self, u):
        return self.scale * self._f(u)

    def fprime(self, u):
        return self.scale * self._fprime(u)

    def V(self, u):
        """Potential V(u) = integral of f from 0 to u."""
        return self.scale * self._V(u)

    def _f(self, u):
        if self.kind == "polynomial":
            return _horner(self.coefficients, u) * u
        if self.kind == "piecewise":
            return self._piecewise(u, lambda seg, x: _horner(seg.coefficients, x))
        p = self.params
        if self.name == "fisher":
            return u * (1.0 - u)
        if self.name == "hadeler_rothe":
            return u * (1.0 - u) * (1.0 + p["nu"] * u)
        if self.name == "bistable_cubic":
            return u * (1.0 - u) * (u - p["a"])
        if self.name == "ignition":
            a = p["a"]
            return (u > a) * (u - a) * (1.0 - u)
        if self.name == "degenerate_power":
            return u ** p["m"] * (1.0 - u)
        raise AssertionError(self.name)

    def _fprime(self, u):
        if self.kind == "polynomial":
            c = self.coefficients
            return _horner(tuple(i * ci for i, ci in enumerate(c, start=1)), u)
        if self.kind == "piecewise":
            return self._fd_derivative(u)
        p = self.params
        if self.name == "fisher":
            return 1.0 - 2.0 * u
        if self.name == "hadeler_rothe":
            nu = p["nu"]
            return 1.0 + 2.0 * (nu - 1.0) * u - 3.0 * nu * u * u
        if self.name == "bistable_cubic":
            a = p["a"]
            return -a + 2.0 * (1.0 + a) * u - 3.0 * u * u
        if self.name == "ignition":
            a = p["a"]
            return (u > a) * (1.0 + a - 2.0 * u)
        if self.name == "degenerate_power":
            m = p["m"]
            return m * u ** (m - 1.0) - (m + 1.0) * u**m
        raise AssertionError(self.name)

    def _V(self, u):
        if self.kind == "polynomial":
            c = self.coefficients
            return _horner(tuple(ci / (i + 1) for i, ci in enumerate(c, start=1)), u) * u * u
        if self.kind == "piecewise":
            return self._piecewise_V(u)
        p = self.params
        if self.name == "fisher":
            return u * u * (0.5 - u / 3.0)
        if self.name == "hadeler_rothe":
            nu = p["nu"]
            return u * u * (0.5 + (nu - 1.0) * u / 3.0 - nu * u * u / 4.0)
        if self.name == "bistable_cubic":
            a = p["a"]
            return u * u * (-a / 2.0 + (1.0 + a) * u / 3.0 - u * u / 4.0)
        if self.name == "ignition":
            a = p["a"]
            x = np.maximum(u - a, 0.0) if isinstance(u, np.ndarray) else max(u - a, 0.0)
            return x * x * ((1.0 - a) / 2.0 - x / 3.0)
        if self.name == "degenerate_power":
            m = p["m"]
            return u ** (m + 1.0) / (m + 1.0) - u ** (m + 2.0) / (m + 2.0)
        raise AssertionError(self.name)

    def _piecewise(self, u, fn):
        if isinstance(u, np.ndarray):
            out = np.zeros_like(u, dtype=float)
            for seg in self.segments:
                mask = (u >= seg.lo) & (u <= seg.hi)
                out[mask] = fn(seg, u[mask])
            return out
        for seg in self.segments:
            if seg.lo <= u <= seg.hi:
                return fn(seg, u)
        return 0.0

    @cached_property
    def _segment_offsets(self):
        offsets, acc = [], 0.0
        for seg in self.segments:
            offsets.append(acc - _poly_antiderivative(seg.coefficients, seg.lo))
            acc += _poly_antiderivative(seg.coefficients, seg.hi) - _poly_antiderivative(
                seg.coefficients, seg.lo)
        return offsets

    def _piecewise_V(self, u):
        offsets = self._segment_offsets
        if isinstance(u, np.ndarray):
            out = np.zeros_like(u, dtype=float)
            for seg, off in zip(self.segments, offsets):
                mask = (u >= seg.lo) & (u <= seg.hi)
                out[mask] = off + _poly_antiderivative(seg.coefficients, u[mask])
            return out
        for seg, off in zip(self.segments, offsets):
            if seg.lo <= u <= seg.hi:
                return off + _poly_antiderivative(seg.coefficients, u)
        return 0.0

    def _fd_derivative(self, u):
        if isinstance(u, np.ndarray):
            return np.array([self._fd_derivative(float(x)) for x in u])
        h = FD_STEP
        f = self._f
        near_left = u - h < 0.0 or any(abs(u - b) < h and u >= b for b in self.breakpoints)
        near_right = u + h > 1.0 or any(abs(u - b) < h and u < b for b in self.breakpoints)
        if near_left and not near_right:
            return (-3.0 * f(u) + 4.0 * f(u + h) - f(u + 2 * h)) / (2 * h)
        if near_right and not near_left:
            return (3.0 * f(u) - 4.0 * f(u - h) + f(u - 2 * h)) / (2 * h)
        return (f(u + h) - f(u - h)) / (2 * h)

    # -- derived properties --------------------------------------------
    @property
    def breakpoints(self) -> tuple[float, ...]:
        if self.kind == "piecewise":
            return tuple(seg.hi for seg in self.segments[:-1])
        if self.name == "ignition":
            return (self.params["a"],)
        return ()

    @cached_property
    def fprime0(self) -> float:
        return float(self.fprime(0.0))

    @cached_property
    def fprime1(self) -> float:
        return float(self.fprime(1.0))

    @cached_property
    def reaction_class(self) -> ReactionClass:
        return classify(self)

    @property
    def label(self) -> str:
        if self.params:
            args = ",".join(f"{k}={_fmt(v)}" for k, v in sorted(self.params.items()))
            base = f"{self.name}({args})"
        else:
            base = self.name
        return base if self.scale == 1.0 else f"{_fmt(self.scale)}*{base}"

    def scaled(self, kappa: float) -> "ReactionTerm":
        """The term kappa * f (same shape, amplitude multiplied)."""
        return ReactionTerm(self.kind, self.name, dict(self.params), self.coefficients,
                            self.segments, self.scale * kappa)

    def to_record(self) -> dict[str, Any]:
        rec: dict[str, Any] = {"kind": self.kind, "name": self.name}
        if self.params:
            rec["params"] = dict(sorted(self.params.items()))
        if self.kind == "polynomial":
            rec["coefficients"] = list(self.coefficients)
        if self.kind == "piecewise":
            rec["segments"] = [
                {"lo": s.lo, "hi": s.hi, "coefficients": list(s.coefficients)}
                for s in self.segments
            ]
        if self.scale != 1.0:
            rec["scale"] = self.scale
        return rec

    def __repr__(self) -> str:
        return f"ReactionTerm({self.label})"


def _fmt(v: float) -> str:
    return f"{v:g}"


def _horner(coeffs: Sequence[float], u):
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * u + c
    return acc


def _poly_antiderivative(coeffs: Sequence[float], u):
    return _horner(tuple(c / (k + 1) for k, c in enumerate(coeffs)), u) * u


def make_reaction(spec: Mapping[str, Any]) -> ReactionTerm:
    """Build a :class:`ReactionTerm` from a reaction record.

    Accepted shapes::

        {"kind": "builtin", "name": "hadeler_rothe", "params": {"nu": 4}}
        {"kind": "polynomial", "name": "...", "coefficients": [c1, ..., cn]}   # f = sum c_i u^i
        {"kind": "piecewise", "name": "...",
         "segments": [{"lo": 0, "hi": 0.3, "coefficients": [k0, k1, ...]}, ...]}

    An optional ``"scale"`` multiplies f.
    """
    if not spec:
        raise ReactionSpecError("empty reaction spec")
    kind = spec.get("kind", "builtin")
    name = spec.get("name")
    scale = float(spec.get("scale", 1.0))
    if not scale > 0:
        raise ReactionSpecError(f"scale must be positive, got {scale}")
    if kind == "builtin":
        term = _make_builtin(name, dict(spec.get("params") or {}), scale)
    elif kind == "polynomial":
        coeffs = tuple(float(c) for c in spec.get("coefficients") or ())
        if not coeffs:
            raise ReactionSpecError("polynomial reaction needs coefficients")
        term = ReactionTerm("polynomial", name or "polynomial", {}, coeffs, (), scale)
    elif kind == "piecewise":
        term = ReactionTerm("piecewise", name or "piecewise", {}, (),
                            _parse_segments(spec.get("segments") or ()), scale)
    else:
        raise ReactionSpecError(f"unknown reaction kind {kind!r}")
    _check_endpoints(term)
    return term


def builtin(name: str, **params: float) -> ReactionTerm:
    """Shorthand for ``make_reaction({"kind": "builtin", "name": name, "params": params})``."""
    return make_reaction({"kind": "builtin", "name": name, "params": params})


def _make_builtin(name, params, scale) -> ReactionTerm:
    if name not in BUILTINS:
        raise ReactionSpecError(f"unknown builtin reaction {name!r}; known: {sorted(BUILTINS)}")
    expected = BUILTINS[name]
    missing = [k for k in expected if k not in params]
    extra = [k for k in params if k not in expected]
    if missing or extra:
        raise ReactionSpecError(
            f"{name} takes parameters {list(expected)}; missing={missing} unexpected={extra}")
    params = {k: float(v) for k, v in params.items()}
    if "a" in params and not 0.0 < params["a"] < 1.0:
        raise ReactionSpecError(f"{name}: a must lie in (0, 1), got {params['a']}")
    if name == "hadeler_rothe" and not params["nu"] > -1.0:
        raise ReactionSpecError("hadeler_rothe: nu must exceed -1 so that f > 0 on (0, 1)")
    if name == "degenerate_power" and not params["m"] >= 2.0:
        raise ReactionSpecError("degenerate_power: m must be >= 2")
    return ReactionTerm("builtin", name, params, (), (), scale)


def _parse_segments(raw) -> tuple[Segment, ...]:
    segs = tuple(Segment(float(s["lo"]), float(s["hi"]),
                         tuple(float(c) for c in s["coefficients"])) for s in raw)
    if not segs:
        raise ReactionSpecError("piecewise reaction needs segments")
    if segs[0].lo != 0.0 or segs[-1].hi != 1.0:
        raise ReactionSpecError("piecewise segments must cover [0, 1]")
    for s, t in zip(segs[:-1], segs[1:]):
        if s.hi != t.lo or not s.lo < s.hi:
            raise ReactionSpecError("piecewise segments must be contiguous and increasing")
    return segs


def _check_endpoints(term: ReactionTerm) -> None:
    f0, f1 = float(term.f(0.0)), float(term.f(1.0))
    if abs(f0) > ENDPOINT_TOL or abs(f1) > ENDPOINT_TOL:
        raise ReactionSpecError(f"{term.label}: need f(0) = f(1) = 0, got f(0)={f0:g}, f(1)={f1:g}")


def classify(f: ReactionTerm, n_samples: int = 1000) -> ReactionClass:
    """Determine the reaction class from the sign pattern of f on a uniform interior grid."""
    if n_samples < 100:
        raise ValueError("n_samples must be at least 100")
    u = np.arange(1, n_samples + 1) / (n_samples + 1)
    vals = np.asarray(f.f(u), dtype=float)
    zero_tol = 1e-13 * max(float(np.max(np.abs(vals))), 1e-300)
    signs = np.where(vals > zero_tol, 1, np.where(vals < -zero_tol, -1, 0))
    runs = [int(signs[0])]
    for s in signs[1:]:
        if s != runs[-1]:
            runs.append(int(s))
    fp0 = f.fprime0
    if runs == [1]:
        if abs(fp0) <= 1e-12:
            return ReactionClass("monostable_degenerate", 0.0)
        if np.all(vals <= fp0 * u * (1 + 1e-12) + 1e-15):
            return ReactionClass("monostable_kpp", fp0)
        return ReactionClass("monostable_general", fp0)
    if runs in ([0, 1], [-1, 1]):
        i = int(np.argmax(signs == 1))
        lo = float(u[i - 1]) if i > 0 else 0.0
        if runs == [0, 1]:
            a = bisect(lambda x: float(f.f(x)) > zero_tol, lo, float(u[i]), 1e-14)
            a = next((b for b in f.breakpoints if abs(b - a) < 1e-9), a)
            return ReactionClass("combustion", fp0, a)
        a = bisect(lambda x: float(f.f(x)) > 0.0, lo, float(u[i]), 1e-14)
        if float(f.V(1.0)) <= 0:
            raise ClassificationError(f"{f.label}: bistable sign pattern but integral of f <= 0")
        return ReactionClass("bistable", fp0, a)
    raise ClassificationError(f"{f.label}: sign pattern {runs} matches no supported class")


def kpp_speed(f: ReactionTerm) -> float:
    """Linear spreading speed 2 sqrt(f'(0))."""
    fp0 = f.fprime0
    if fp0 < -1e-12:
        raise ValueError(f"{f.label}: f'(0) = {fp0:g} < 0, no KPP speed")
    return 2.0 * math.sqrt(max(fp0, 0.0))


def zfk_speed(f: ReactionTerm, rel_tol: float = 1e-10) -> float:
    """sqrt(2 * integral of f over [0, 1])."""
    total = integrate(f.f, 0.0, 1.0, rel_tol, breakpoints=f.breakpoints).value
    if total <= 0:
        raise ValueError(f"{f.label}: integral of f is {total:g} <= 0")
    return math.sqrt(2.0 * total)


def sup_ratio(f: ReactionTerm) -> tuple[float, float]:
    """sup over (0, 1] of f(u)/u, with the u -> 0 limit f'(0) as a candidate."""
    return grid_sup(lambda u: f.f(u) / u, 0.0, 1.0, n=10_000,
                    limits=[(0.0, f.fprime0), (1.0, 0.0)])


def aw_upper(f: ReactionTerm) -> float:
    """Upper speed bound 2 sqrt(sup f(u)/u) for nonnegative reaction terms."""
    tag = f.reaction_class.tag
    if tag == "bistable":
        raise ValueError(f"{f.label}: upper bound 2 sqrt(sup f/u) requires f >= 0 (got bistable)")
    value, _ = sup_ratio(f)
    return 2.0 * math.sqrt(max(value, 0.0))
