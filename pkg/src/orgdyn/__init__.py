"""Two-population dynamic model of a terrorist organization.

Leaders ``L`` and foot soldiers ``F`` evolve under promotion, recruitment,
desertion and constant-rate counter-terrorism removal.  The package provides
the closed-form phase-plane analysis, trajectory simulation, the collapse
theorem as an executable check, and counter-terrorism policy analytics.
"""

from .model import (
    DegenerateError,
    DomainError,
    InvalidParameterError,
    OrgDynError,
    OrgParams,
    OrgState,
    RegimeError,
    SystemMatrix,
    derivative,
    promotion_drain_transform,
    strength,
    system_matrix,
)
from .analysis import (
    Classification,
    EigenCoords,
    EigenStructure,
    FixedPoint,
    Kind,
    Line,
    PhaseAnalysis,
    Regime,
    Verdict,
    analyze,
    classify,
    critical_desertion,
    eigen_coords,
    eigen_structure,
    fixed_point,
    regime,
    sink_line,
    trend_line,
    victory_check,
)
from .simulate import (
    Method,
    Outcome,
    SimOptions,
    Trajectory,
    closed_form_state,
    integrate_rk4,
    sample_orbits,
    simulate,
    vector_field,
)

__version__ = "0.1.0"
