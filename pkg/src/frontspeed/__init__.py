"""Minimal speeds of reaction-diffusion fronts and their variational bounds."""

from .bounds import (
    BoundResult,
    SProfile,
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
from .errors import (
    ClassificationError,
    FrontSpeedError,
    InadmissibleTrial,
    NumericalFailure,
    ReactionSpecError,
)
from .evolve import Evolution, evolve, spreading_speed
from .optimize import bound_gap, family, optimize_bound
from .oracle import (
    FrontProfile,
    PhasePlaneSolution,
    ShootOutcome,
    front_profile,
    minimal_speed,
    residual,
    shoot,
)
from .reaction import (
    ReactionTerm,
    aw_upper,
    builtin,
    classify,
    kpp_speed,
    make_reaction,
    zfk_speed,
)
from .trials import (
    TrialFunction,
    alpha_from_solution,
    beta_g,
    optimal_trial,
    poly_alpha,
    power_alpha,
    power_g,
)
from .verify import Report, full_report

__version__ = "0.1.0"
