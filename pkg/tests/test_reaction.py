import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frontspeed import aw_upper, builtin, classify, kpp_speed, make_reaction, zfk_speed
from frontspeed.errors import ClassificationError, ReactionSpecError


def test_builtin_values():
    f = builtin("fisher")
    assert f.f(0.5) == pytest.approx(0.25)
    h = builtin("hadeler_rothe", nu=4)
    assert h.f(0.5) == pytest.approx(0.25 * 3.0)
    b = builtin("bistable_cubic", a=0.3)
    assert b.f(0.2) < 0 < b.f(0.5)


@pytest.mark.parametrize("name,params,tag", [
    ("fisher", {}, "monostable_kpp"),
    ("hadeler_rothe", {"nu": 4}, "monostable_general"),
    ("hadeler_rothe", {"nu": 1}, "monostable_kpp"),
    ("degenerate_power", {"m": 2}, "monostable_degenerate"),
    ("bistable_cubic", {"a": 0.3}, "bistable"),
    ("ignition", {"a": 0.2}, "combustion"),
])
def test_classification(name, params, tag):
    assert classify(builtin(name, **params)).tag == tag


def test_threshold_located():
    assert classify(builtin("bistable_cubic", a=0.3)).a == pytest.approx(0.3, abs=1e-10)
    assert classify(builtin("ignition", a=0.2)).a == pytest.approx(0.2, abs=1e-12)


def test_closed_form_speeds():
    f = builtin("fisher")
    assert kpp_speed(f) == pytest.approx(2.0)
    assert zfk_speed(f) == pytest.approx(math.sqrt(1.0 / 3.0), rel=1e-10)
    assert aw_upper(f) == pytest.approx(2.0, rel=1e-9)
    h = builtin("hadeler_rothe", nu=4)
    # sup of (1 - u)(1 + 4u) is 25/16 at u = 3/8
    assert aw_upper(h) == pytest.approx(2.0 * math.sqrt(25.0 / 16.0), rel=1e-9)


def test_aw_upper_rejects_bistable():
    with pytest.raises(ValueError):
        aw_upper(builtin("bistable_cubic", a=0.3))


def test_potential_matches_quadrature():
    from scipy.integrate import quad
    for f in (builtin("hadeler_rothe", nu=3), builtin("ignition", a=0.4),
              builtin("degenerate_power", m=2.5)):
        for u in (0.1, 0.45, 0.9, 1.0):
            ref, _ = quad(f.f, 0.0, u, points=[0.4] if u > 0.4 else None, epsabs=1e-14)
            assert float(f.V(u)) == pytest.approx(ref, abs=1e-12)


def test_polynomial_and_piecewise_specs():
    p = make_reaction({"kind": "polynomial", "coefficients": [1.0, -1.0]})
    assert p.f(0.3) == pytest.approx(0.21)
    pw = make_reaction({"kind": "piecewise", "segments": [
        {"lo": 0, "hi": 0.5, "coefficients": [0.0]},
        {"lo": 0.5, "hi": 1, "coefficients": [-0.5, 1.5, -1.0]},
    ]})
    assert classify(pw).tag == "combustion"


@pytest.mark.parametrize("spec", [
    {},
    {"kind": "builtin", "name": "nosuch"},
    {"kind": "builtin", "name": "bistable_cubic", "params": {}},
    {"kind": "builtin", "name": "bistable_cubic", "params": {"a": 1.5}},
    {"kind": "polynomial", "coefficients": [1.0]},  # f(1) != 0
    {"kind": "builtin", "name": "fisher", "scale": -1},
])
def test_bad_specs(spec):
    with pytest.raises(ReactionSpecError):
        make_reaction(spec)


def test_bistable_with_negative_integral_is_rejected():
    with pytest.raises(ClassificationError):
        classify(builtin("bistable_cubic", a=0.7))


@settings(max_examples=30, deadline=None)
@given(kappa=st.floats(0.1, 10.0))
def test_amplitude_scaling_covariance(kappa):
    base = builtin("hadeler_rothe", nu=2)
    scaled = make_reaction({"kind": "builtin", "name": "hadeler_rothe",
                            "params": {"nu": 2}, "scale": kappa})
    root = math.sqrt(kappa)
    assert kpp_speed(scaled) == pytest.approx(root * kpp_speed(base), rel=1e-12)
    assert zfk_speed(scaled) == pytest.approx(root * zfk_speed(base), rel=1e-9)
    assert aw_upper(scaled) == pytest.approx(root * aw_upper(base), rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(nu=st.floats(-0.9, 20.0))
def test_sandwich_formulas_ordered(nu):
    f = builtin("hadeler_rothe", nu=nu)
    assert zfk_speed(f) <= aw_upper(f) + 1e-12
    assert kpp_speed(f) <= aw_upper(f) + 1e-12


def test_vectorized_evaluation():
    u = np.linspace(0, 1, 11)
    assert builtin("ignition", a=0.3).f(u).shape == u.shape
