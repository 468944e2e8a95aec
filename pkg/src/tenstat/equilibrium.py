"""Per-body static equilibrium assembly for compound tensegrity structures.

Builds the equality constraint ``A_b q_s = p_b`` stacking force and moment
balances for every rigid body, with optional anchor-node removal and a
pinned-joint reaction pre-solve for standing structures.

Conventions: load vectors store external forces applied to nodes, stacked
axis-major ([all x; all y; all z]). Moments are taken about the global
origin; reactions are forces applied *to* the structure and are added into
the load vector as-is.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import AllNodesAnchored, InconsistentSystem, ZeroLengthMember
from .topology import (
    Structure,
    body_summation_matrix,
    build_connectivity,
    cable_selector,
)

GRAVITY = 9.81  # m/s^2, default; overridable at every call site


@dataclass(frozen=True)
class Coordinates:
    """Nodal positions for one pose, one vector per axis (z absent in 2D)."""

    x: np.ndarray
    y: np.ndarray
    z: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        if self.z is not None:
            object.__setattr__(self, "z", np.asarray(self.z, dtype=float))

    @classmethod
    def from_array(cls, points: np.ndarray) -> "Coordinates":
        """Build from an (n, d) array of positions."""
        points = np.asarray(points, dtype=float)
        if points.shape[1] == 2:
            return cls(points[:, 0], points[:, 1])
        return cls(points[:, 0], points[:, 1], points[:, 2])

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def dimension(self) -> int:
        return 2 if self.z is None else 3

    def axes(self) -> tuple[np.ndarray, ...]:
        if self.z is None:
            return (self.x, self.y)
        return (self.x, self.y, self.z)

    def as_array(self) -> np.ndarray:
        """(n, d) position array."""
        return np.column_stack(self.axes())

    def stacked(self) -> np.ndarray:
        """Axis-major stacked vector of length d*n."""
        return np.concatenate(self.axes())

    def translated(self, offset: Sequence[float]) -> "Coordinates":
        off = np.asarray(offset, dtype=float)
        if self.z is None:
            return Coordinates(self.x + off[0], self.y + off[1])
        return Coordinates(self.x + off[0], self.y + off[1], self.z + off[2])


@dataclass(frozen=True)
class LoadVector:
    """External nodal forces, stacked axis-major, length d*n (Newtons)."""

    p: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.p, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise ValueError("load vector has non-finite entries")
        object.__setattr__(self, "p", arr)

    def per_axis(self, n: int) -> np.ndarray:
        """(d, n) view of the stacked vector."""
        return self.p.reshape(-1, n)


@dataclass(frozen=True)
class AnchorSpec:
    """Boolean node mask; marked nodes are anchors or pinned, per use site."""

    marked: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "marked", np.asarray(self.marked, dtype=bool))

    @classmethod
    def from_indices(cls, n: int, indices: Sequence[int]) -> "AnchorSpec":
        mask = np.zeros(n, dtype=bool)
        mask[list(indices)] = True
        return cls(mask)

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.marked)

    @property
    def count(self) -> int:
        return int(self.marked.sum())


@dataclass(frozen=True)
class CompoundConstraint:
    """Equality constraint A_b q_s = p_b, force rows then moment rows.

    Rows are axis-major within each block: for d=3 the force block is
    [x-sums of every body; y-sums; z-sums] and the moment block likewise,
    so there are 6b rows (3b in 2D). body_ids lists the original body
    indices that survived anchor removal.
    """

    A_b: np.ndarray
    p_b: np.ndarray
    dimension: int
    body_ids: tuple[int, ...]

    @property
    def num_bodies(self) -> int:
        return len(self.body_ids)

    @property
    def num_force_rows(self) -> int:
        return self.dimension * self.num_bodies

    def rows_of_body(self, position: int) -> tuple[list[int], list[int]]:
        """(force row indices, moment row indices) for the body at `position`."""
        b = self.num_bodies
        d = self.dimension
        force = [axis * b + position for axis in range(d)]
        n_m_axes = 3 if d == 3 else 1
        moment = [d * b + axis * b + position for axis in range(n_m_axes)]
        return force, moment


def member_geometry(C: np.ndarray, coords: Coordinates):
    """Per-member coordinate differences (one array per axis) and lengths."""
    diffs = [C @ axis for axis in coords.axes()]
    lengths = np.sqrt(np.sum([d * d for d in diffs], axis=0))
    return diffs, lengths


def equilibrium_matrix_A(C: np.ndarray, coords: Coordinates) -> np.ndarray:
    """Nodal force-balance matrix A (d*n x m): A q = p is the pin-joint balance.

    Stacks C^T diag(C x) per axis. Raises ZeroLengthMember if any member has
    (numerically) coincident endpoints.
    """
    diffs, lengths = member_geometry(C, coords)
    degenerate = np.flatnonzero(lengths <= 1e-12)
    if degenerate.size:
        raise ZeroLengthMember(int(degenerate[0]))
    return np.vstack([C.T * d for d in diffs])


def moment_arm_matrix_B(coords: Coordinates) -> np.ndarray:
    """Skew moment-arm operator: maps stacked nodal forces to nodal moments.

    d=3: 3n x 3n block matrix [[0,-Z,Y],[Z,0,-X],[-Y,X,0]] with X=diag(x) etc.
    d=2: n x 2n block row [-Y, X] producing the scalar z-moment per node.
    """
    if coords.dimension == 2:
        X, Y = np.diag(coords.x), np.diag(coords.y)
        return np.hstack([-Y, X])
    X, Y, Z = np.diag(coords.x), np.diag(coords.y), np.diag(coords.z)
    O = np.zeros_like(X)
    return np.block([[O, -Z, Y], [Z, O, -X], [-Y, X, O]])


def _selector(s: int, r: int) -> np.ndarray:
    return cable_selector(s, r)


def assemble_compound(
    structure: Structure,
    coords: Coordinates,
    load: LoadVector,
    anchors: Optional[AnchorSpec] = None,
) -> CompoundConstraint:
    """Assemble the per-body force/moment balance for one pose.

    Without anchors: A_f = K A H, p_f = K p, A_m = K B A H, p_m = K B p,
    stacked as [A_f; A_m]. With anchors, the anchored nodes' contributions
    are removed before compounding (their reactions may evolve freely) and
    bodies left with no nodes drop out entirely.
    """
    d = structure.dimension
    n = structure.n
    C = build_connectivity(structure)
    A = equilibrium_matrix_A(C, coords)
    H = _selector(structure.num_cables, structure.num_bars)
    B = moment_arm_matrix_B(coords)
    p = load.p

    AH = A @ H
    BAH = B @ AH  # moment rows: per node (2D) or per node per axis (3D)
    Bp = B @ p
    if anchors is None or anchors.count == 0:
        eta = list(structure.nodes_per_body)
        body_ids = tuple(range(structure.num_bodies))
    else:
        keep = ~anchors.marked
        if not keep.any():
            raise AllNodesAnchored()
        W = np.eye(n)[keep]
        Wf = np.kron(np.eye(d), W)
        Wm = W if d == 2 else Wf
        eta, body_ids_list = [], []
        for k, group in enumerate(structure.bodies):
            kept = sum(1 for i in group if keep[i])
            if kept:
                eta.append(kept)
                body_ids_list.append(k)
        body_ids = tuple(body_ids_list)
        AH = Wf @ AH
        BAH = Wm @ BAH
        Bp = Wm @ Bp
        p = Wf @ p

    Kt = body_summation_matrix(eta)
    K = np.kron(np.eye(d), Kt)
    A_f = K @ AH
    p_f = K @ p
    if d == 2:
        A_m = Kt @ BAH
        p_m = Kt @ Bp
    else:
        A_m = K @ BAH
        p_m = K @ Bp
    return CompoundConstraint(
        A_b=np.vstack([A_f, A_m]),
        p_b=np.concatenate([p_f, p_m]),
        dimension=d,
        body_ids=body_ids,
    )


@dataclass(frozen=True)
class ReactionResult:
    """Pre-solved support reactions at pinned nodes.

    r is stacked axis-major over the pinned nodes ([x-reactions; y; z]),
    forces applied to the structure. residual is the relative residual of
    the wrench-balance system the reactions were solved from.
    """

    r: np.ndarray
    pinned: AnchorSpec
    residual: float


def presolve_pinned_reactions(
    structure: Structure,
    coords: Coordinates,
    p_ext: LoadVector,
    pinned: AnchorSpec,
    extra_eq: Sequence[tuple[int, int, float]] = (),
    tol: float = 1e-8,
) -> ReactionResult:
    """Solve for support reactions at pinned nodes before the cable solve.

    The reactions must balance the total external wrench on the structure
    (force and moment about the origin); extra_eq rows (axis, node, value)
    pin individual reaction components, e.g. zero tangential forces at feet.
    Underdetermined systems take the minimum-norm solution. Raises
    InconsistentSystem when no reaction set satisfies everything within tol.
    """
    d = structure.dimension
    idx = pinned.indices
    v = idx.size
    if v < 1:
        raise ValueError("need at least one pinned node")

    pts = coords.as_array()
    pinned_coords = Coordinates.from_array(pts[idx])
    ones_v = np.ones((1, v))
    K_v = np.kron(np.eye(d), ones_v)  # d x d*v, sums reactions per axis
    B_v = moment_arm_matrix_B(pinned_coords)
    B_n = moment_arm_matrix_B(coords)
    n_maxes = 3 if d == 3 else 1
    K_ones_m = np.kron(np.eye(n_maxes), ones_v) if d == 3 else ones_v

    G_f = K_v
    G_m = K_ones_m @ B_v
    # External wrench summed per axis: reactions must cancel it.
    p = p_ext.p
    total_force = p.reshape(d, -1).sum(axis=1)
    moments = B_n @ p
    total_moment = moments.reshape(n_maxes, -1).sum(axis=1)
    b_f = -total_force
    b_m = -total_moment

    rows = [np.vstack([G_f, G_m])]
    rhs = [np.concatenate([b_f, b_m])]
    node_pos = {int(node): j for j, node in enumerate(idx)}
    for axis, node, value in extra_eq:
        if int(node) not in node_pos:
            raise ValueError(f"equality constraint on non-pinned node {node}")
        row = np.zeros((1, d * v))
        row[0, axis * v + node_pos[int(node)]] = 1.0
        rows.append(row)
        rhs.append(np.atleast_1d(float(value)))
    G = np.vstack(rows)
    b = np.concatenate(rhs)

    r, *_ = np.linalg.lstsq(G, b, rcond=None)
    residual = float(np.linalg.norm(G @ r - b)) / max(1.0, float(np.linalg.norm(b)))
    if residual > tol:
        raise InconsistentSystem(residual, tol)
    return ReactionResult(r=r, pinned=pinned, residual=residual)


def insert_reactions(
    p_ext: LoadVector, r: np.ndarray, pinned: AnchorSpec
) -> LoadVector:
    """Add pre-solved reactions into the load vector at the pinned nodes."""
    idx = pinned.indices
    v = idx.size
    r = np.asarray(r, dtype=float)
    if r.size % v != 0:
        raise ValueError("reaction vector size does not match the pinned set")
    d = r.size // v
    n = p_ext.p.size // d
    p = p_ext.p.copy()
    for axis in range(d):
        p[axis * n + idx] += r[axis * v : (axis + 1) * v]
    return LoadVector(p)


def gravity_load(structure: Structure, g: float = GRAVITY) -> LoadVector:
    """Gravity on the vertical axis (y in 2D, z in 3D): -m_i * g per node."""
    if g < 0:
        raise ValueError("g must be non-negative")
    d = structure.dimension
    p = np.zeros(d * structure.n)
    vertical = 1 if d == 2 else 2
    p[vertical * structure.n : (vertical + 1) * structure.n] = (
        -structure.node_masses * g
    )
    return LoadVector(p)
