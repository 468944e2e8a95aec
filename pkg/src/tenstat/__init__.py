"""Inverse statics for compound tensegrity robots.

Computes minimum-energy equilibrium cable tensions for rigid-body
assemblies suspended in a cable network, by stacking per-body force and
moment balances into a linear constraint and solving a strictly convex QP.
"""

from .elastic import (
    CableState,
    TensionBounds,
    build_inequality,
    build_objective,
    member_lengths,
    potential_energy,
    rest_inputs_from_solution,
)
from .equilibrium import (
    AnchorSpec,
    CompoundConstraint,
    Coordinates,
    LoadVector,
    ReactionResult,
    assemble_compound,
    equilibrium_matrix_A,
    gravity_load,
    insert_reactions,
    moment_arm_matrix_B,
    presolve_pinned_reactions,
)
from .errors import (
    AllNodesAnchored,
    EmptyFeasibleBox,
    InconsistentSystem,
    InvalidStructureError,
    NonPositiveLength,
    NonPositiveStiffness,
    TenstatError,
    ZeroLengthMember,
)
from .oracle import BodyWrenchReport, body_wrench_residuals, nodal_residual
from .poses import (
    BodyPose,
    SpineSweep,
    Trajectory,
    interpolate_pose,
    nodes_from_poses,
    slerp,
    spine_bend_trajectory,
)
from .qpsolver import (
    KktResiduals,
    QpConfig,
    QpProblem,
    QpSolution,
    SolveStatus,
    kkt_residuals,
    solve,
)
from .topology import (
    Member,
    MemberKind,
    Structure,
    ValidationReport,
    build_connectivity,
    cable_selector,
    compounding_matrix,
    validate_structure,
)

__version__ = "0.1.0"
