"""Independent statics verification by direct summation.

Recomputes each body's net force and net moment from the cable pulls and
external loads with plain scalar loops. Deliberately shares no code with
the matrix assembly in `equilibrium`, so agreement between the two is a
meaningful cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .equilibrium import Coordinates, LoadVector
from .topology import MemberKind, Structure


@dataclass(frozen=True)
class BodyWrenchReport:
    """Per-body net wrench (cable pulls plus external loads) about the origin.

    A body in equilibrium has zero net force and zero net moment; the
    entries here are therefore residuals. Moments are scalars in 2D and
    3-vectors in 3D.
    """

    force: np.ndarray
    moment: np.ndarray

    @property
    def max_force(self) -> float:
        return float(np.max(np.abs(self.force))) if self.force.size else 0.0

    @property
    def max_moment(self) -> float:
        return float(np.max(np.abs(self.moment))) if self.moment.size else 0.0

    @property
    def worst(self) -> float:
        return max(self.max_force, self.max_moment)


def _cross(pos, force):
    if pos.size == 2:
        return np.array([pos[0] * force[1] - pos[1] * force[0]])
    return np.cross(pos, force)


def body_wrench_residuals(
    structure: Structure,
    coords: Coordinates,
    load: LoadVector,
    q_s: np.ndarray,
) -> BodyWrenchReport:
    """Net force and moment per body under cable densities q_s and loads p."""
    d = structure.dimension
    n = structure.n
    pts = coords.as_array()
    p = load.p.reshape(d, n).T  # (n, d) external force per node
    q_s = np.asarray(q_s, dtype=float)

    owner = structure.body_of_node()
    b = structure.num_bodies
    force = np.zeros((b, d))
    moment = np.zeros((b, 1 if d == 2 else 3))

    for i in range(n):
        k = owner[i]
        force[k] += p[i]
        moment[k] += _cross(pts[i], p[i])

    cable_index = 0
    for mem in structure.members:
        if mem.kind is not MemberKind.CABLE:
            continue
        q = q_s[cable_index]
        cable_index += 1
        for this, other in ((mem.from_node, mem.to_node), (mem.to_node, mem.from_node)):
            pull = q * (pts[other] - pts[this])
            k = owner[this]
            force[k] += pull
            moment[k] += _cross(pts[this], pull)

    return BodyWrenchReport(force=force, moment=moment)


def nodal_residual(
    C: np.ndarray,
    coords: Coordinates,
    q_full: np.ndarray,
    load: LoadVector,
) -> np.ndarray:
    """Residual of the pin-joint nodal balance, (n, d), zero at equilibrium.

    Computed per node as the external force plus the pulls of every incident
    member (bars included, with their force densities in q_full).
    """
    pts = coords.as_array()
    n, d = pts.shape
    p = load.p.reshape(d, n).T
    q_full = np.asarray(q_full, dtype=float)

    residual = p.copy()
    for a in range(C.shape[0]):
        row = C[a]
        j = int(np.flatnonzero(row > 0)[0])
        k = int(np.flatnonzero(row < 0)[0])
        residual[j] += q_full[a] * (pts[k] - pts[j])
        residual[k] += q_full[a] * (pts[j] - pts[k])
    return residual
