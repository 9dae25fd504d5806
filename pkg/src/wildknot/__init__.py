"""Wild knots invariant under Schottky groups generated by sphere inversions."""

from .conformal import (
    Ball,
    ExtPoint,
    GeometryError,
    LimitProximity,
    Sphere,
    apply_word,
    invert_ball,
    invert_point,
    reduce_to_domain,
)
from .necklace import (
    Necklace,
    ThreadSample,
    build_stage,
    dimension_estimate,
    enumerate_beads,
    knot_approx,
    symmetric_necklace,
    transport_equivalence,
    validate,
)
from .algebra import abelianization, amalgamated_sum, fiber_betti, knot_group, summand_census
from .fibration import TrivialModel, fiber_sample, fiber_value, theta_trivial
from .covers import CoverConfig, deck, ends_census, lift_path, verify_branch

__version__ = "0.1.0"
