"""Minimal-bending-energy flat ribbon framings along space curves."""

from .analysis import (
    IntervalBound,
    SingularPoint,
    TorsionVanishes,
    ZeroTorsionAtPoint,
    check_interval_lemma,
    coercivity_probe,
    find_singular_points,
    isolation_radius,
    isolation_report,
    morrey_probe,
    verify_count_theorem,
)
from .curves import (
    CurveSpec,
    FrenetFrame,
    NonPositiveCurvature,
    eval_fields,
    field_bound,
    integrate_frenet,
    make_preset,
    make_sampled,
)
from .energy import (
    EnergyReport,
    FramingField,
    GridMismatch,
    energy_E,
    energy_E_eps,
    energy_E_interval,
    framing_components,
    gradient_E_eps,
    integrand_extended,
)
from .estimator import MinimalBendingFraming
from .ribbon import (
    DarbouxFrame,
    DegenerateRuling,
    EmptyMesh,
    RibbonMesh,
    build_mesh,
    darboux_frames,
    flatness_report,
    ruling_directions,
    write_obj,
)
from .solver import SolveResult, SolverConfig, initial_guesses, minimize_at_eps, solve

__version__ = "0.1.0"

__all__ = [
    "CurveSpec",
    "DarbouxFrame",
    "DegenerateRuling",
    "EmptyMesh",
    "EnergyReport",
    "FramingField",
    "FrenetFrame",
    "GridMismatch",
    "IntervalBound",
    "MinimalBendingFraming",
    "NonPositiveCurvature",
    "RibbonMesh",
    "SingularPoint",
    "SolveResult",
    "SolverConfig",
    "TorsionVanishes",
    "ZeroTorsionAtPoint",
    "build_mesh",
    "check_interval_lemma",
    "coercivity_probe",
    "darboux_frames",
    "energy_E",
    "energy_E_eps",
    "energy_E_interval",
    "eval_fields",
    "field_bound",
    "find_singular_points",
    "flatness_report",
    "framing_components",
    "gradient_E_eps",
    "initial_guesses",
    "integrand_extended",
    "integrate_frenet",
    "isolation_radius",
    "isolation_report",
    "make_preset",
    "make_sampled",
    "minimize_at_eps",
    "morrey_probe",
    "ruling_directions",
    "solve",
    "verify_count_theorem",
    "write_obj",
]
