"""Simpson-style reversal statistics for sequential two-outcome quantum measurements."""

from .bound import BoundVerdict, EllTable, IdentityReport, RatioSet, check_bound, ell_table, verify_identities
from .classical import (
    ClassicalDistribution,
    classical_rates,
    classical_S,
    embed_commuting,
    extremal_grid_search,
    random_distribution,
    verify_convexity,
)
from .construction import CubeLengths, FamilyParams, build_paper_scenario, closed_form_rates, cube_annotations, family_S
from .engine import (
    MeasurementScenario,
    RateTable,
    SimpsonStats,
    TwoOutcomeMeasurement,
    classicality_check,
    conditional_rates,
    convexity_residual,
    joint_probability,
    rate_intervals_disjoint,
    simpson_statistics,
)
from .errors import *  # noqa: F401,F403
from .linalg import Projector, StateVector, commutator_norm, orthonormalize, projector_from_span
from .optimizer import (
    OptimizationReport,
    ScenarioParameterization,
    optimize_family,
    optimize_general,
    sweep_family,
)
from .scenario_file import load_scenario, parse_scenario, serialize_scenario

__version__ = "0.1.0"
