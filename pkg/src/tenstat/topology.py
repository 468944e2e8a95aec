"""Structure graph: members, rigid-body partition, and the combinatorial matrices.

A structure is a graph of ``n`` nodes and ``m = s + r`` members (``s`` cables
followed by ``r`` bars), together with a partition of the nodes into ``b``
rigid bodies. Bars live inside a body; cables run between bodies. Internally
everything is 0-based; file formats and CLI output are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class MemberKind(Enum):
    CABLE = "cable"
    BAR = "bar"


@dataclass(frozen=True)
class Member:
    """Edge between two nodes; canonical form stores from_node < to_node."""

    kind: MemberKind
    from_node: int
    to_node: int


@dataclass(frozen=True)
class Structure:
    """Immutable description of a compound tensegrity structure.

    bodies holds the node indices of each rigid body, in order; each body
    must be a contiguous index range and together they partition 0..n-1.
    spring_constants has one entry per cable (N/m), node_masses one per
    node (kg).
    """

    n: int
    members: tuple[Member, ...]
    bodies: tuple[tuple[int, ...], ...]
    spring_constants: np.ndarray
    node_masses: np.ndarray
    dimension: int

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        object.__setattr__(
            self, "bodies", tuple(tuple(int(i) for i in g) for g in self.bodies)
        )
        kappa = np.asarray(self.spring_constants, dtype=float).copy()
        masses = np.asarray(self.node_masses, dtype=float).copy()
        kappa.setflags(write=False)
        masses.setflags(write=False)
        object.__setattr__(self, "spring_constants", kappa)
        object.__setattr__(self, "node_masses", masses)

    @property
    def num_members(self) -> int:
        return len(self.members)

    @property
    def num_cables(self) -> int:
        return sum(1 for mem in self.members if mem.kind is MemberKind.CABLE)

    @property
    def num_bars(self) -> int:
        return self.num_members - self.num_cables

    @property
    def num_bodies(self) -> int:
        return len(self.bodies)

    @property
    def nodes_per_body(self) -> tuple[int, ...]:
        return tuple(len(g) for g in self.bodies)

    @property
    def cables(self) -> tuple[Member, ...]:
        return tuple(m for m in self.members if m.kind is MemberKind.CABLE)

    def body_of_node(self) -> np.ndarray:
        """Array mapping node index to the index of its body."""
        owner = np.full(self.n, -1, dtype=int)
        for k, group in enumerate(self.bodies):
            for i in group:
                if 0 <= i < self.n:
                    owner[i] = k
        return owner


@dataclass
class ValidationReport:
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_structure(structure: Structure) -> ValidationReport:
    """Check the structural invariants; returns a report, never raises.

    Violations cover: node indexing, member ordering (cables before bars,
    from < to), bars spanning bodies, cables inside a body, non-contiguous
    or non-partitioning bodies, non-positive stiffness, negative masses.
    """
    v: list[str] = []
    n = structure.n
    if n < 1:
        v.append("structure has no nodes")
    if structure.dimension not in (2, 3):
        v.append(f"dimension must be 2 or 3, got {structure.dimension}")

    seen: set[int] = set()
    for k, group in enumerate(structure.bodies):
        if len(group) < 1:
            v.append(f"body {k} is empty")
            continue
        lo, hi = min(group), max(group)
        if sorted(group) != list(range(lo, hi + 1)):
            v.append(f"body {k} is not a contiguous index range")
        if seen & set(group):
            v.append(f"body {k} overlaps another body")
        seen |= set(group)
    if seen != set(range(n)):
        v.append("bodies do not partition the node set")

    owner = structure.body_of_node()
    seen_bar = False
    for a, mem in enumerate(structure.members):
        if not (0 <= mem.from_node < n and 0 <= mem.to_node < n):
            v.append(f"member {a} references a node outside 0..{n - 1}")
            continue
        if mem.from_node == mem.to_node:
            v.append(f"member {a} connects a node to itself")
            continue
        if mem.from_node > mem.to_node:
            v.append(f"member {a} not in canonical order (from >= to)")
        if mem.kind is MemberKind.BAR:
            seen_bar = True
            if owner[mem.from_node] != owner[mem.to_node]:
                v.append(f"bar {a} spans bodies")
        else:
            if seen_bar:
                v.append(f"cable {a} appears after a bar (cables must come first)")
            if owner[mem.from_node] == owner[mem.to_node]:
                v.append(f"cable {a} lies within one body")

    s = structure.num_cables
    if structure.spring_constants.shape != (s,):
        v.append(
            f"spring_constants has {structure.spring_constants.size} entries, "
            f"expected one per cable ({s})"
        )
    elif np.any(structure.spring_constants <= 0):
        v.append("non-positive stiffness")
    if structure.node_masses.shape != (n,):
        v.append(f"node_masses has {structure.node_masses.size} entries, expected {n}")
    elif np.any(structure.node_masses < 0):
        v.append("negative node mass")

    return ValidationReport(v)


def build_connectivity(structure: Structure) -> np.ndarray:
    """Connectivity matrix C (m x n): row a has +1 at from_node, -1 at to_node."""
    C = np.zeros((structure.num_members, structure.n))
    for a, mem in enumerate(structure.members):
        C[a, mem.from_node] = 1.0
        C[a, mem.to_node] = -1.0
    return C


def body_summation_matrix(nodes_per_body) -> np.ndarray:
    """Block row matrix (b x n) that sums nodal quantities per body."""
    eta = [int(e) for e in nodes_per_body]
    b, n = len(eta), sum(eta)
    Kt = np.zeros((b, n))
    start = 0
    for k, e in enumerate(eta):
        Kt[k, start : start + e] = 1.0
        start += e
    return Kt


def compounding_matrix(structure: Structure) -> np.ndarray:
    """Compounding matrix K = I_d (x) Ktilde, shape (d*b, d*n).

    Left-multiplying a stacked per-axis nodal vector sums its entries per
    body, separately for each axis.
    """
    Kt = body_summation_matrix(structure.nodes_per_body)
    return np.kron(np.eye(structure.dimension), Kt)


def cable_selector(s: int, r: int) -> np.ndarray:
    """Selector H ((s+r) x s): H @ q_s embeds cable densities, zero for bars."""
    return np.vstack([np.eye(s), np.zeros((r, s))])
