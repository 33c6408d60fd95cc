import math

import numpy as np
import pytest
from conftest import solved
from hypothesis import given, settings
from hypothesis import strategies as st

from frontspeed import (
    alpha_from_solution,
    beta_g,
    builtin,
    front_profile,
    optimal_trial,
    poly_alpha,
    power_alpha,
    power_g,
    s_profile,
    vp1_upper,
    vp2_lower,
    vp3_functional,
    vp4_lower,
    vp4s_lower,
    vp4s_value,
    vp5_action,
    xc_ratio,
)
from frontspeed.bounds import s_profile_from_callable
from frontspeed.errors import FrontSpeedError, InadmissibleTrial
from frontspeed.trials import check_admissible

FISHER = builtin("fisher")
HR4 = builtin("hadeler_rothe", nu=4.0)
BISTABLE = builtin("bistable_cubic", a=0.3)


# -- golden values ----------------------------------------------------------

def test_vp1_golden():
    assert vp1_upper(FISHER, power_alpha(1, 0)).value == pytest.approx(2.0, rel=1e-9)
    assert vp1_upper(FISHER, power_alpha(1, 1)).value == pytest.approx(2.0, rel=1e-9)
    exact = power_alpha(math.sqrt(2.0), 1.0)
    assert vp1_upper(HR4, exact).value == pytest.approx(3 / math.sqrt(2), rel=1e-9)


def test_vp2_golden():
    assert vp2_lower(FISHER, beta_g(0, 1)).value == pytest.approx(16 / 15, rel=1e-9)
    # exact value 96 sqrt(2)/105 = 1.2929952...; the decimal 1.29285 quoted alongside it is a slip
    assert vp2_lower(FISHER, beta_g(0, 2)).value == pytest.approx(96 * math.sqrt(2) / 105, rel=1e-9)


def test_vp4_golden():
    res = vp4_lower(FISHER, beta_g(0, 1))
    assert res.value == pytest.approx(math.sqrt(0.5), rel=1e-9)
    assert res.squared == pytest.approx(0.5, rel=1e-9)
    assert res.direction == "lower"


# -- optimal trials ---------------------------------------------------------

def test_optimal_trial_bistable_closed_form():
    _, sol = solved("bistable_cubic", a=0.3)
    g = optimal_trial(sol)
    u = np.array([0.05, 0.3, 0.7, 0.95])
    ref = ((1 - u) / u) ** 0.4
    np.testing.assert_allclose(g.value(u), ref, rtol=2e-3)
    assert g.endpoint_exponents == pytest.approx((-0.4, 0.4), abs=2e-3)


def test_optimal_trial_exponent_at_one():
    _, sol = solved("hadeler_rothe", nu=4.0)
    assert optimal_trial(sol).endpoint_exponents[1] == pytest.approx(1.5, abs=1e-3)


def test_optimal_trial_decreasing(catalog_term):
    f, sol = catalog_term
    g = optimal_trial(sol)
    u = np.linspace(0.01, 0.99, 99)
    assert np.all(np.diff(g.value(u)) < 0)


@pytest.mark.parametrize("name,params", [("hadeler_rothe", {"nu": 4.0}),
                                         ("bistable_cubic", {"a": 0.3})])
def test_attainment(name, params):
    f, sol = solved(name, **params)
    assert vp4_lower(f, optimal_trial(sol)).value == pytest.approx(sol.c, rel=5e-3)
    if f.reaction_class.is_monostable:
        assert vp1_upper(f, alpha_from_solution(sol)).value == pytest.approx(sol.c, rel=5e-3)
        assert vp2_lower(f, optimal_trial(sol, "VP2")).value == pytest.approx(sol.c, abs=1e-3)


# -- bracketing ---------------------------------------------------------------

G_TRIALS = [beta_g(0, 1), beta_g(0, 2), beta_g(0.5, 1), power_g(0.3), power_g(0.9)]
ALPHA_TRIALS = [power_alpha(1, 0), power_alpha(1, 1), power_alpha(0.5, 0.5),
                poly_alpha(1.0, 0.5, -0.3), power_alpha(3.0, 1.0)]


@pytest.mark.parametrize("g", G_TRIALS, ids=lambda t: t.label)
def test_lower_bounds_below_speed(catalog_term, g):
    f, sol = catalog_term
    if f.reaction_class.is_monostable:
        assert vp2_lower(f, g).value <= sol.c + 2e-4
    try:
        assert vp4_lower(f, g).value <= sol.c + 2e-4
    except FrontSpeedError:
        # negative numerator (bistable) or divergent denominator: trial is not usable
        assert not f.reaction_class.is_monostable or g.endpoint_exponents[0] < -1


@pytest.mark.parametrize("alpha", ALPHA_TRIALS, ids=lambda t: t.label)
def test_upper_bounds_above_speed(catalog_term, alpha):
    f, sol = catalog_term
    if not f.reaction_class.is_monostable:
        pytest.skip("upper bounds need f >= 0")
    assert vp1_upper(f, alpha).value >= sol.c - 2e-4


@settings(max_examples=25, deadline=None)
@given(lam0=st.floats(0.0, 0.9), lam1=st.floats(0.1, 4.0), a=st.floats(0.2, 4.0),
       b=st.floats(-1.0, 1.0))
def test_vp2_never_exceeds_vp1(lam0, lam1, a, b):
    assert vp2_lower(HR4, beta_g(lam0, lam1)).value <= vp1_upper(HR4, power_alpha(a, b)).value + 1e-9


def test_inadmissible_trials_rejected():
    with pytest.raises(InadmissibleTrial):
        check_admissible(power_alpha(1.0, 2.0))  # alpha changes sign at u = 1/2
    with pytest.raises(InadmissibleTrial):
        check_admissible(poly_alpha(-1.0, 0.0, 0.0))
    with pytest.raises(InadmissibleTrial):
        vp1_upper(FISHER, power_alpha(1.0, 2.0))


def test_divergent_vp2_rejected():
    with pytest.raises(FrontSpeedError):
        vp2_lower(FISHER, power_g(1.2))  # integral of g diverges at u = 0


def test_vp4_negative_numerator_rejected():
    # g concentrated near u = 0 sees mostly the negative part of the bistable term
    with pytest.raises(FrontSpeedError):
        vp4_lower(BISTABLE, beta_g(0.0, 40.0))


# -- s-form -------------------------------------------------------------------

def test_vp4s_matches_vp4_on_fisher():
    g = power_g(1.0)
    prof = s_profile_from_callable(lambda s: s / (1 + s))
    assert vp4s_value(FISHER, prof) == pytest.approx(vp4_lower(FISHER, g).squared, rel=1e-6)


@pytest.mark.parametrize("g", [power_g(1.0), beta_g(0.5, 2.0), beta_g(0.0, 1.0)],
                         ids=lambda t: t.label)
def test_corrected_constant_and_printed_constant(g):
    ref = vp4_lower(HR4, g).squared
    prof = s_profile(g)
    assert vp4s_value(HR4, prof) == pytest.approx(ref, rel=1e-6)
    assert vp4s_value(HR4, prof, corrected=False) / ref == pytest.approx(0.5, rel=1e-6)


def test_vp4s_scale_invariance():
    prof = s_profile(beta_g(0.5, 2.0))
    assert vp4s_value(HR4, prof.scaled(3.7)) == pytest.approx(vp4s_value(HR4, prof), rel=1e-8)


def test_vp4s_attainment_and_reciprocity():
    _, sol = solved("hadeler_rothe", nu=4.0)
    g = optimal_trial(sol)
    prof = s_profile(g)
    value = vp4s_value(HR4, prof)
    assert value == pytest.approx(4.5, rel=5e-3)
    assert vp5_action(HR4, prof) * value == pytest.approx(1.0, abs=1e-10)
    assert vp4s_lower(HR4, g).value == pytest.approx(math.sqrt(value), rel=1e-12)


def test_vp5_bistable():
    f, sol = solved("bistable_cubic", a=0.3)
    assert vp5_action(f, s_profile(optimal_trial(sol))) == pytest.approx(12.5, rel=1e-2)


# -- weighted z-integrals -----------------------------------------------------

def test_xc_at_and_below_minimal_speed():
    _, sol = solved("hadeler_rothe", nu=4.0)
    prof = front_profile(sol)
    assert xc_ratio(HR4, prof, sol.c) == pytest.approx(1.0, abs=1e-3)
    assert xc_ratio(HR4, prof, 2.05) > 1.0
    assert vp3_functional(HR4, prof, 2.05) < 0
    scale = abs(vp3_functional(HR4, prof, 2.05))
    assert abs(vp3_functional(HR4, prof, sol.c)) <= 1e-3 * scale


@settings(max_examples=20, deadline=None)
@given(c=st.floats(0.5, 2.8))
def test_xc_and_phi_signs_agree(c):
    _, sol = solved("hadeler_rothe", nu=4.0)
    prof = front_profile(sol)
    x = xc_ratio(HR4, prof, c)
    phi = vp3_functional(HR4, prof, c)
    if abs(x - 1) > 1e-9:
        assert np.sign(1 - x) == np.sign(phi)


def test_xc_rejects_divergent_weight():
    _, sol = solved("hadeler_rothe", nu=4.0)
    with pytest.raises(FrontSpeedError):
        xc_ratio(HR4, front_profile(sol), 10.0)


def test_bound_record_shape():
    rec = vp2_lower(FISHER, beta_g(0, 1)).to_record()
    assert rec["principle"] == "VP2" and rec["direction"] == "lower"
    assert rec["trial"]["label"] == "g=1-u"
    assert rec["quad_error"] >= 0
