"""Phase-plane analysis of a Holling-Tanner predator-prey model with an
Allee effect in the prey and alternative food for the predator."""

__version__ = "0.1.0"

from .model import (
    DimensionalParams,
    ParameterError,
    Params,
    State,
    dimensional_vector_field,
    jacobian,
    map_state,
    nondimensionalize,
    unmap_state,
    validate_params,
    vector_field,
)
from .equilibria import (
    CaseLabel,
    Equilibrium,
    EquilibriumKind,
    all_equilibria,
    boundary_equilibria,
    case_label,
    discriminant,
    interior_equilibria,
)
from .stability import (
    Classification,
    StabilityTag,
    ThresholdUndefinedError,
    classify,
    hopf_threshold,
    is_global_extinction,
    threshold_S1,
    threshold_S2,
    threshold_S3,
    threshold_S4,
)
from .flow import (
    AttractorLabel,
    AttractorTag,
    Cycle,
    IntegratorConfig,
    Termination,
    Trajectory,
    classify_omega_limit,
    find_limit_cycle,
    integrate,
)
from .manifolds import (
    BranchDirection,
    BranchKind,
    GapUndefinedError,
    ManifoldBranch,
    Separatrix,
    homoclinic_gap,
    saddle_directions,
    separatrix,
    trace_manifold,
)
from .bifurcation import (
    BifurcationDiagram,
    DegenerateSaddleNodeError,
    RegionLabel,
    bt_point,
    compute_diagram,
    homoclinic_locus,
    hopf_locus,
    region_classify,
    saddle_node_M,
    sotomayor_check,
)
from .basin import (
    BasinRaster,
    basin_fractions,
    boundary_vs_separatrix,
    compute_basins,
    load_raster,
    save_raster,
)
