import math

import numpy as np
import pytest
from conftest import solved

from frontspeed import (
    PhasePlaneSolution,
    aw_upper,
    builtin,
    front_profile,
    kpp_speed,
    make_reaction,
    minimal_speed,
    residual,
    shoot,
    zfk_speed,
)
from frontspeed.errors import ReactionSpecError
from frontspeed.oracle import departure_slope, origin_slopes


@pytest.mark.parametrize("name,params,c,kind", [
    ("fisher", {}, 3.0, "connected"),
    ("fisher", {}, 1.0, "hit_axis_p_positive"),
    ("bistable_cubic", {"a": 0.3}, 1.0, "hit_p_zero_interior"),
    ("bistable_cubic", {"a": 0.3}, 0.1, "hit_axis_p_positive"),
    ("hadeler_rothe", {"nu": 4}, 2.0, "hit_axis_p_positive"),
    ("ignition", {"a": 0.2}, 2.0, "hit_p_zero_interior"),
])
def test_shoot_outcomes(name, params, c, kind):
    out = shoot(builtin(name, **params), c)
    assert out.kind == kind
    if kind == "hit_p_zero_interior":
        assert out.terminal_u > 0 and out.terminal_p == pytest.approx(0.0, abs=1e-9)


def test_shoot_preconditions():
    f = builtin("fisher")
    with pytest.raises(ValueError):
        shoot(f, -1.0)
    with pytest.raises(ValueError):
        shoot(f, 2.0, eps=1e-2)


def test_departure_slope_root():
    f = builtin("hadeler_rothe", nu=4)
    c = 2.5
    mu = departure_slope(f, c)
    assert mu > 0
    assert mu * mu + c * mu + float(f.fprime(1.0)) == pytest.approx(0.0, abs=1e-12)


def test_positive_fprime_at_one_rejected():
    f = make_reaction({"kind": "polynomial", "coefficients": [-1.0, 0.0, 1.0]})  # u^3 - u, f'(1) = 2
    with pytest.raises(ReactionSpecError):
        departure_slope(f, 1.0)


def test_origin_slopes():
    lm, lp = origin_slopes(builtin("fisher"), 2.5)
    assert (lm, lp) == pytest.approx((0.5, 2.0))
    assert origin_slopes(builtin("fisher"), 1.0) == (None, None)


@pytest.mark.parametrize("name,params,exact,branch", [
    ("fisher", {}, 2.0, "shallow"),
    ("hadeler_rothe", {"nu": 4.0}, 3.0 / math.sqrt(2.0), "steep"),
    ("bistable_cubic", {"a": 0.3}, 0.4 / math.sqrt(2.0), "steep"),
])
def test_minimal_speed_known_values(name, params, exact, branch):
    f, sol = solved(name, **params)
    assert sol.c == pytest.approx(exact, abs=1e-4)
    assert sol.decay_branch == branch
    assert residual(sol) <= 1e-6 * max(1.0, float(np.max(sol.p)) ** 2)


def test_solution_invariants(catalog_term):
    f, sol = catalog_term
    assert np.all(sol.p > 0)
    assert np.all(np.diff(sol.u_grid) > 0)
    assert sol.mu1 ** 2 + sol.c * sol.mu1 + float(f.fprime(1.0)) == pytest.approx(0.0, abs=1e-10)


def test_sandwich_and_zfk_on_catalog(catalog_term):
    f, sol = catalog_term
    if not f.reaction_class.is_monostable:
        pytest.skip("sandwich is stated for monostable terms")
    assert kpp_speed(f) - 1e-4 <= sol.c <= aw_upper(f) + 1e-4
    assert sol.c >= zfk_speed(f) - 1e-4


@pytest.mark.parametrize("nu,expected", [(1.0, {"shallow", "spiral"}), (1.5, {"shallow", "spiral"}),
                                         (3.0, {"steep"}), (8.0, {"steep"})])
def test_hadeler_rothe_branch(nu, expected):
    assert minimal_speed(builtin("hadeler_rothe", nu=nu)).decay_branch in expected


@pytest.mark.parametrize("kappa", [0.25, 4.0])
@pytest.mark.parametrize("name,params", [("hadeler_rothe", {"nu": 4.0}),
                                         ("bistable_cubic", {"a": 0.3}),
                                         ("fisher", {})])
def test_scaling_covariance(kappa, name, params):
    base = solved(name, **params)[1].c
    f = make_reaction({"kind": "builtin", "name": name, "params": params, "scale": kappa})
    assert minimal_speed(f).c == pytest.approx(math.sqrt(kappa) * base, abs=2e-4)


def test_c_tol_lower_limit():
    with pytest.raises(ValueError):
        minimal_speed(builtin("fisher"), c_tol=1e-9)


def _ansatz(f, c, k):
    u = np.linspace(1e-4, 1 - 1e-4, 2001)
    return PhasePlaneSolution.from_arrays(f, c, u, k * u * (1 - u))


def test_residual_exact_ansatz():
    f = builtin("bistable_cubic", a=0.3)
    assert residual(_ansatz(f, 0.4 / math.sqrt(2), 1 / math.sqrt(2))) <= 1e-10


def test_residual_detects_noise():
    f = builtin("bistable_cubic", a=0.3)
    exact = _ansatz(f, 0.4 / math.sqrt(2), 1 / math.sqrt(2))
    rng = np.random.default_rng(7)
    noisy = PhasePlaneSolution.from_arrays(f, exact.c, exact.u_grid,
                                           exact.p + 1e-3 * rng.standard_normal(exact.p.size))
    assert residual(noisy) > 1e-4


def test_profile_bistable_closed_form():
    f, sol = solved("bistable_cubic", a=0.3)
    prof = front_profile(sol)
    assert np.interp(0.0, prof.z, prof.u) == pytest.approx(0.5, abs=1e-12)
    exact = 1.0 / (1.0 + np.exp(prof.z / math.sqrt(2.0)))
    assert np.max(np.abs(prof.u - exact)) < 1e-4
    assert np.all(np.diff(prof.u) < 0) and np.all(prof.uz < 0)


def test_profile_slope_at_gauge():
    f, sol = solved("hadeler_rothe", nu=4.0)
    prof = front_profile(sol)
    assert np.interp(0.0, prof.z, prof.uz) == pytest.approx(-math.sqrt(2) / 4, abs=1e-5)
    np.testing.assert_allclose(prof.uz, -sol.p_at(prof.u), atol=1e-6)


def test_profile_delta_range():
    _, sol = solved("fisher")
    with pytest.raises(ValueError):
        front_profile(sol, delta=0.1)
