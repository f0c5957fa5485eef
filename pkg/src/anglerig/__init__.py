"""Planar angle rigidity: analysis, construction, and angle-only formation control."""

from .angularity import (
    AngleTriplet,
    Angularity,
    ValidationFinding,
    angle_function,
    interior_angle,
    is_congruent,
    is_equivalent,
    signed_angle,
    validate,
    wrap_angle,
)
from .construction import (
    AdditionStep,
    BuildResult,
    ConstructionPlan,
    InscribedArc,
    LinearConstraintSpec,
    QuadraticConstraintSpec,
    Ray,
    add_vertex_type1,
    add_vertex_type2,
    build,
    constraint_ray,
    inscribed_arc,
    intersect,
    seed_angularity,
)
from .control import (
    AddedAgentTargets,
    AgentState,
    FormationSpec,
    LinearizationReport,
    bearing,
    canonical_realization,
    control_added,
    control_triangle,
    control_unified,
    error_dynamics_triangle,
    formation_spec_from_angularity,
    linearize_added,
    linearize_triangle,
    local_frame_control,
    measured_angle,
)
from .rigidity import (
    DependencyFinding,
    RigidityMatrix,
    RigidityReport,
    TrivialMotionBasis,
    classify,
    detect_dependent_structures,
    is_generic_configuration,
    min_constraint_involvement,
    numerical_rank,
    rigidity_matrix,
    trivial_motion_basis,
)
from .simulate import (
    MonitorReport,
    SimConfig,
    SimEvent,
    Trajectory,
    fit_exponential_rate,
    local_frame_experiment,
    monitor_invariants,
    simulate,
)

__version__ = "0.1.0"
