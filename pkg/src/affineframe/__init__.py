"""Stress-certified affine formation frameworks: grow, prune, audit and simulate."""
from .construction import AdditionRequest, GrowthError, add_vertex, grow, random_growth_points, select_parents
from .errors import (
    AmbiguousRegionError,
    AuditError,
    DegenerateConfigurationError,
    DimensionError,
    FrameworkError,
    InadmissibleRegionError,
    NoUniquePhiError,
    PerceptionError,
    StaleHierarchyError,
    TopologyError,
)
from .framework import Framework, HierarchyRecord, assemble_stress, equilibrium_residual, omega_blocks, seed_framework
from .geometry import Region, affinely_independent, barycentric, classify_region, compute_phi, is_general_position
from .pruning import (
    DeletionSupport,
    admissible_relay_regions,
    delete_edge,
    delete_edge_direct,
    delete_edge_two_relays,
    delete_edge_with_relay,
    delete_inner_vertex,
    delete_outer_vertex,
    delete_vertex,
    edge_deletion_scaling,
    find_deletion_support,
)
from .sim import (
    AddVertexEvent,
    AffineSegment,
    AffineTrajectory,
    DeleteEdgeEvent,
    DeleteVertexEvent,
    ScenarioScript,
    Trace,
    follower_fixed_point,
    integrate,
    run_scenario,
    target_configuration,
)
from .verify import (
    Tolerances,
    check_affine_localizability,
    check_null_space,
    check_universal_rigidity,
    full_audit,
    spectral_audit,
)

__version__ = "0.1.0"
