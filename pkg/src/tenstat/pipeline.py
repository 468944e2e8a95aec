"""One-pose solve pipeline shared by the CLI, model fixtures, and tests.

Chains the assembly steps for a single pose: member lengths, compound
equality constraint, elastic objective and bounds, QP solve, and the
derived cable state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .elastic import (
    CableState,
    TensionBounds,
    build_inequality,
    build_objective,
    member_lengths,
    potential_energy,
)
from .equilibrium import (
    AnchorSpec,
    CompoundConstraint,
    Coordinates,
    LoadVector,
    assemble_compound,
)
from .qpsolver import QpConfig, QpProblem, QpSolution, SolveStatus, solve
from .topology import Structure, build_connectivity


@dataclass(frozen=True)
class PoseSolve:
    """Everything computed while solving one pose."""

    solution: QpSolution
    cable_lengths: np.ndarray
    constraint: CompoundConstraint
    coords: Coordinates

    @property
    def optimal(self) -> bool:
        return self.solution.status is SolveStatus.OPTIMAL

    def cable_state(self, kappa: np.ndarray) -> CableState:
        return CableState.from_densities(self.solution.q, self.cable_lengths, kappa)

    def energy(self, kappa: np.ndarray) -> float:
        return potential_energy(self.solution.q, kappa, self.cable_lengths)


def solve_pose(
    structure: Structure,
    coords: Coordinates,
    load: LoadVector,
    bounds: TensionBounds,
    anchors: Optional[AnchorSpec] = None,
    config: QpConfig = QpConfig(),
    warm_start: Optional[np.ndarray] = None,
) -> PoseSolve:
    """Assemble and solve the inverse-statics QP for one pose.

    Propagates EmptyFeasibleBox / ZeroLengthMember from the assembly steps;
    solver-level infeasibility is reported through the solution status.
    """
    C = build_connectivity(structure)
    lengths = member_lengths(C, coords)
    cable_lengths = lengths[: structure.num_cables]
    constraint = assemble_compound(structure, coords, load, anchors)
    kappa = structure.spring_constants
    R = build_objective(kappa, cable_lengths)
    S, v = build_inequality(kappa, cable_lengths, bounds)
    problem = QpProblem(
        R=R, A_eq=constraint.A_b, b_eq=constraint.p_b, S=S, v=v, config=config
    )
    solution = solve(problem, warm_start=warm_start)
    return PoseSolve(
        solution=solution,
        cable_lengths=cable_lengths,
        constraint=constraint,
        coords=coords,
    )
