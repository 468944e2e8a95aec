"""Built-in structure generators: planar tensegrity spine and 3D quadruped.

Both are reconstructions: published constants (masses, total length, spring
constant, optimization bounds) are exact, while body geometry and the pose
sweeps carry documented defaults chosen to reproduce the studies'
qualitative behavior.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .elastic import TensionBounds
from .equilibrium import GRAVITY, AnchorSpec, gravity_load
from .errors import EmptyFeasibleBox
from .poses import BodyPose, SpineSweep, Trajectory, nodes_from_poses
from .topology import Member, MemberKind, Structure

# Spine cable stiffness, converted once from the spec sheet value 4.8 lbf/in.
LBF_PER_INCH_IN_N_PER_M = 4.448222 / 0.0254
SPINE_STIFFNESS = 4.8 * LBF_PER_INCH_IN_N_PER_M  # ~840.6 N/m
SPINE_MASS = 0.495  # kg, total
QUADRUPED_MASS = 7.3  # kg, total
QUADRUPED_LENGTH = 0.95  # m, nose-to-tail extent in the neutral pose


@dataclass(frozen=True)
class ModelBundle:
    """A structure plus everything needed to pose and solve it.

    Generators fill initial_frame; structures loaded from file leave it
    None (poses then come from pose or trajectory files).
    """

    structure: Structure
    local_coords: tuple[np.ndarray, ...]
    cable_labels: tuple[str, ...]
    initial_frame: Optional[tuple[BodyPose, ...]] = None
    anchors: Optional[AnchorSpec] = None
    pinned: Optional[AnchorSpec] = None


@dataclass(frozen=True)
class SpineGeometry:
    """Vertebra shape: center node, two rear tips, one forward tip.

    Local coordinates in numbering order: center (0,0), first rear tip
    (-width, -height), second rear tip (-width, +height), forward tip
    (+width, 0). spacing is the center-to-center distance in the initial
    horizontal chain; the forward tip of each vertebra interlocks between
    the rear tips of the next whenever spacing < 2*width.
    """

    width: float = 0.1
    height: float = 0.1
    spacing: float = 0.15

    def vertebra_nodes(self) -> np.ndarray:
        w, h = self.width, self.height
        return np.array([[0.0, 0.0], [-w, -h], [-w, h], [w, 0.0]])


def spine2d(
    num_vertebrae: int = 5,
    geometry: SpineGeometry = SpineGeometry(),
    mass_total: float = SPINE_MASS,
    stiffness: float = SPINE_STIFFNESS,
    anchor_first: bool = True,
) -> ModelBundle:
    """Planar tensegrity spine of num_vertebrae four-node vertebrae.

    Between consecutive vertebrae run four cables in connectivity order:
    the two rear-tip-to-rear-tip horizontals and the two saddle cables from
    the forward tip, carrying the conventional group labels HT, HB, SB, ST
    per gap. Each vertebra is three bars from its center. Mass is spread
    uniformly over nodes; the first vertebra is flagged as anchored when
    requested.
    """
    if num_vertebrae < 2:
        raise ValueError("a spine needs at least two vertebrae")
    nv = num_vertebrae
    n = 4 * nv
    members: list[Member] = []
    labels: list[str] = []
    for g in range(nv - 1):
        a, b = 4 * g, 4 * (g + 1)
        members += [
            Member(MemberKind.CABLE, a + 1, b + 1),  # first-tip horizontal
            Member(MemberKind.CABLE, a + 2, b + 2),  # second-tip horizontal
            Member(MemberKind.CABLE, a + 3, b + 1),  # saddle to first tip
            Member(MemberKind.CABLE, a + 3, b + 2),  # saddle to second tip
        ]
        labels += [f"HT-{g + 1}", f"HB-{g + 1}", f"SB-{g + 1}", f"ST-{g + 1}"]
    for k in range(nv):
        c = 4 * k
        members += [
            Member(MemberKind.BAR, c, c + 1),
            Member(MemberKind.BAR, c, c + 2),
            Member(MemberKind.BAR, c, c + 3),
        ]

    s = 4 * (nv - 1)
    structure = Structure(
        n=n,
        members=tuple(members),
        bodies=tuple(tuple(range(4 * k, 4 * k + 4)) for k in range(nv)),
        spring_constants=np.full(s, stiffness),
        node_masses=np.full(n, mass_total / n),
        dimension=2,
    )
    local = geometry.vertebra_nodes()
    frame = tuple(
        BodyPose(np.array([k * geometry.spacing, 0.0]), 0.0) for k in range(nv)
    )
    anchors = AnchorSpec.from_indices(n, range(4)) if anchor_first else None
    return ModelBundle(
        structure=structure,
        local_coords=tuple(local.copy() for _ in range(nv)),
        cable_labels=tuple(labels),
        initial_frame=frame,
        anchors=anchors,
    )


def spine_rolled_frame(
    bundle: ModelBundle,
    geometry: SpineGeometry,
    bend_per_vertebra: float,
    gaps,
) -> tuple[BodyPose, ...]:
    """Bent frame with vertebra k rotated by k * bend_per_vertebra.

    The vertebrae chain along their inside rear tips (the tips on the
    concave side of the curl); gaps[k] is the tip-to-tip separation at gap
    k. The first vertebra keeps its initial pose.
    """
    nv = bundle.structure.num_bodies
    inside = np.array([-geometry.width, geometry.height])
    angles = [k * bend_per_vertebra for k in range(nv)]
    base = bundle.initial_frame[0]
    tips = [base.translation + base.rotation_matrix() @ inside]
    centers = [base.translation]
    for k in range(nv - 1):
        mid = 0.5 * (angles[k] + angles[k + 1])
        tip = tips[-1] + gaps[k] * np.array([np.cos(mid), np.sin(mid)])
        tips.append(tip)
        pose = BodyPose(np.zeros(2), angles[k + 1])
        centers.append(tip - pose.rotation_matrix() @ inside)
    return tuple(BodyPose(c, a) for c, a in zip(centers, angles))


def spine_bend_sweep(
    bundle: ModelBundle,
    geometry: SpineGeometry = SpineGeometry(),
    bend_per_vertebra: float = np.deg2rad(10.0),
    final_gap: float = 0.013,
    gap_taper: float = 1.0,
) -> SpineSweep:
    """Cantilever bend sweep with an explicit final tip separation per gap.

    Gap k closes to final_gap * gap_taper**k; see spine_winch_limit_sweep
    for the variant that closes the gaps as far as the cable bounds allow.
    """
    nv = bundle.structure.num_bodies
    gaps = [final_gap * gap_taper**k for k in range(nv - 1)]
    final = spine_rolled_frame(bundle, geometry, bend_per_vertebra, gaps)
    return SpineSweep(initial=bundle.initial_frame, final=final)


def spine_winch_limit_sweep(
    bundle: ModelBundle,
    geometry: SpineGeometry = SpineGeometry(),
    bend_per_vertebra: float = np.deg2rad(10.0),
    bounds: Optional[TensionBounds] = None,
    gravity_accel: float = GRAVITY,
    slack_tol: float = 1e-7,
) -> SpineSweep:
    """Bend sweep whose final frame winches every gap to the actuation limit.

    A cable-driven spine curls until the cables on the inside of the curve
    are fully wound, i.e. their rest lengths reach the minimum. This
    factory finds, per gap, the tip separation at which the inside
    horizontal cable's optimal rest length hits that floor (bisection on
    the solved pose), so the final frame sits exactly on the saturation
    bound while remaining solvable.
    """
    from .pipeline import solve_pose  # local import keeps module layering flat

    if bounds is None:
        bounds = TensionBounds(0.5, 0.01)
    structure = bundle.structure
    nv = structure.num_bodies
    kappa = structure.spring_constants
    u_min = bounds.rest_length_vector(structure.num_cables)
    if u_min is None:
        raise ValueError("the winch limit needs a minimum rest length bound")
    load = gravity_load(structure, gravity_accel)
    inside_cable = [4 * g + 1 for g in range(nv - 1)]  # second cable of each gap

    warm = [None]

    def inside_slack(gaps):
        """Per-gap u - u_min of the inside horizontals, None when unsolvable."""
        frame = spine_rolled_frame(bundle, geometry, bend_per_vertebra, gaps)
        coords = nodes_from_poses(structure, bundle.local_coords, frame)
        try:
            result = solve_pose(
                structure, coords, load, bounds, bundle.anchors, warm_start=warm[0]
            )
        except EmptyFeasibleBox:
            return None
        if not result.optimal:
            return None
        warm[0] = result.solution.q
        state = result.cable_state(kappa)
        return state.rest_inputs[inside_cable] - u_min[inside_cable]

    # Tightest conceivable gap: the cable's feasible force-density box
    # collapses to a point when its length reaches u_min / (1 - c/kappa).
    lo_limit = float(np.max(u_min / (1.0 - bounds.min_density / kappa)))
    hi_limit = None
    for candidate in (2.0 * lo_limit, 0.02, 0.05, geometry.spacing):
        if inside_slack(np.full(nv - 1, candidate)) is not None:
            hi_limit = candidate
            break
    if hi_limit is None:
        raise ValueError("spine is unsolvable even before winching the gaps")

    gaps = np.full(nv - 1, hi_limit)
    for round_index in range(4):
        for k in range(nv - 2, -1, -1):
            if round_index == 0:
                lo, hi = lo_limit, hi_limit
            else:
                # Refine locally; a wide re-bracket would push other gaps,
                # already sitting on their limits, into infeasibility.
                width = 10.0 ** (-2 - round_index)
                lo = max(lo_limit, gaps[k] - width)
                hi = gaps[k] + width
                trial = gaps.copy()
                trial[k] = hi
                if inside_slack(trial) is None:
                    continue
            while hi - lo > 0.5 * slack_tol:
                mid = 0.5 * (lo + hi)
                trial = gaps.copy()
                trial[k] = mid
                slack = inside_slack(trial)
                if slack is None or slack[k] < 0:
                    lo = mid
                else:
                    hi = mid
            # stay strictly on the solvable side of the frontier
            gaps[k] = hi + 2 * slack_tol
        slack = inside_slack(gaps)
        if slack is not None and np.all(slack >= 0) and np.all(slack <= 8 * slack_tol):
            break
    final = spine_rolled_frame(bundle, geometry, bend_per_vertebra, gaps)
    return SpineSweep(initial=bundle.initial_frame, final=final)


@dataclass(frozen=True)
class QuadrupedGeometry:
    """Reconstruction of the quadruped: shoulders, spine vertebrae, hips.

    Every body carries four rear-facing tips (top/bottom/left/right) that
    receive cables; every body except the hips has a forward saddle tip.
    Shoulders and hips additionally carry two legs ending in foot nodes.
    The chain runs along +x, z is up.
    """

    length: float = QUADRUPED_LENGTH
    mass_total: float = QUADRUPED_MASS
    num_vertebrae: int = 3
    tip_back: float = 0.13  # rear tips sit this far behind the body center
    tip_radius: float = 0.11  # vertical / lateral tip offset
    saddle_forward: float = 0.18  # forward saddle tip offset; the deep
    # interlock keeps the wrench cone solvable over the whole arch sweep
    leg_spread: float = 0.16  # lateral foot offset
    leg_drop: float = 0.30  # feet this far below the body center
    stiffness: float = 1000.0  # uniform; with no saturation bound the
    # optimum is invariant to its absolute value

    @property
    def num_bodies(self) -> int:
        return self.num_vertebrae + 2

    @property
    def spacing(self) -> float:
        # Front tips overhang by tip_back; solve so nose-to-tail = length.
        return (self.length - self.tip_back) / (self.num_bodies - 1)


def _quadruped_body_nodes(geo: QuadrupedGeometry, has_saddle: bool, has_legs: bool):
    a, t = geo.tip_back, geo.tip_radius
    nodes = [
        [0.0, 0.0, 0.0],
        [-a, 0.0, t],  # top tip
        [-a, 0.0, -t],  # bottom tip
        [-a, t, 0.0],  # left tip
        [-a, -t, 0.0],  # right tip
    ]
    if has_saddle:
        nodes.append([geo.saddle_forward, 0.0, 0.0])
    if has_legs:
        nodes.append([0.0, geo.leg_spread, -geo.leg_drop])
        nodes.append([0.0, -geo.leg_spread, -geo.leg_drop])
    return np.array(nodes)


def quadruped3d(geometry: QuadrupedGeometry = QuadrupedGeometry()) -> ModelBundle:
    """Quadruped: shoulders and hips with rigid legs, spine vertebrae between.

    Eight cables per gap: four horizontals between matching rear tips
    (HT/HB/HL/HR) and four saddles from the forward tip to the next body's
    rear tips (ST/SB/SL/SR, named by the tip they attach to). Feet are
    flagged for the pinned-reaction pre-solve.
    """
    geo = geometry
    b = geo.num_bodies
    locals_: list[np.ndarray] = []
    bodies: list[tuple[int, ...]] = []
    feet: list[int] = []
    start = 0
    for k in range(b):
        has_saddle = k < b - 1
        has_legs = k in (0, b - 1)
        block = _quadruped_body_nodes(geo, has_saddle, has_legs)
        locals_.append(block)
        bodies.append(tuple(range(start, start + len(block))))
        if has_legs:
            feet += [start + len(block) - 2, start + len(block) - 1]
        start += len(block)
    n = start

    members: list[Member] = []
    labels: list[str] = []
    for g in range(b - 1):
        prev, nxt = bodies[g], bodies[g + 1]
        saddle = prev[5]  # forward tip (always present on non-terminal bodies)
        for tip, tag in ((1, "T"), (2, "B"), (3, "L"), (4, "R")):
            members.append(Member(MemberKind.CABLE, prev[tip], nxt[tip]))
            labels.append(f"H{tag}-{g + 1}")
        for tip, tag in ((1, "T"), (2, "B"), (3, "L"), (4, "R")):
            members.append(Member(MemberKind.CABLE, saddle, nxt[tip]))
            labels.append(f"S{tag}-{g + 1}")
    for k, group in enumerate(bodies):
        center = group[0]
        for other in group[1:]:
            members.append(Member(MemberKind.BAR, center, other))

    s = 8 * (b - 1)
    structure = Structure(
        n=n,
        members=tuple(members),
        bodies=tuple(bodies),
        spring_constants=np.full(s, geo.stiffness),
        node_masses=np.full(n, geo.mass_total / n),
        dimension=3,
    )
    identity = np.array([1.0, 0.0, 0.0, 0.0])
    frame = tuple(
        BodyPose(np.array([k * geo.spacing, 0.0, geo.leg_drop]), identity)
        for k in range(b)
    )
    return ModelBundle(
        structure=structure,
        local_coords=tuple(locals_),
        cable_labels=tuple(labels),
        initial_frame=frame,
        pinned=AnchorSpec.from_indices(n, feet),
    )


def _pitch_quaternion(angle: float) -> np.ndarray:
    return np.array([np.cos(angle / 2), 0.0, np.sin(angle / 2), 0.0])


def quadruped_arch_frame(
    geometry: QuadrupedGeometry, arch: float
) -> tuple[BodyPose, ...]:
    """Standing frame with the back arched; arch > 0 humps the spine upward.

    The feet stay planted at their neutral-stance ground points: shoulders
    and hips pitch by -arch/+arch about their planted feet, and the spine
    vertebrae chain between them along a circular-arc bulge. arch < 0 sways
    the back downward instead.
    """
    geo = geometry
    b = geo.num_bodies
    end_angles = {0: -arch, b - 1: arch}
    poses: dict[int, BodyPose] = {}
    for k, angle in end_angles.items():
        local = _quadruped_body_nodes(geo, k < b - 1, True)
        feet_local = local[-2:]
        feet_target = feet_local + np.array([k * geo.spacing, 0.0, geo.leg_drop])
        rot = BodyPose(np.zeros(3), _pitch_quaternion(angle))
        # Same translation fixes both feet (pitch preserves their y offsets).
        translation = feet_target[0] - rot.rotation_matrix() @ feet_local[0]
        poses[k] = BodyPose(translation, _pitch_quaternion(angle))

    start = poses[0].translation
    end = poses[b - 1].translation
    chord = end - start
    span = float(np.linalg.norm(chord))
    bulge = 0.25 * span * np.tan(arch / 2) if abs(arch) > 1e-12 else 0.0
    frame = []
    for k in range(b):
        if k in poses:
            frame.append(poses[k])
            continue
        t = k / (b - 1)
        rise = 4.0 * bulge * t * (1.0 - t)  # parabolic arc between the ends
        center = start + t * chord + np.array([0.0, 0.0, rise])
        angle = -arch * (1.0 - 2.0 * t)  # tangent pitch along the arc
        frame.append(BodyPose(center, _pitch_quaternion(angle)))
    return tuple(frame)


EXTENSION_ARCH = np.deg2rad(18.0)
FLEXION_ARCH = np.deg2rad(-18.0)


def quadruped_arch_trajectory(
    geometry: QuadrupedGeometry,
    arch_start: float = EXTENSION_ARCH,
    arch_end: float = FLEXION_ARCH,
    num_poses: int = 20,
) -> Trajectory:
    """Sweep the back arch from the extension pose to the flexion pose.

    The study's extension pose carries the spine arched up (tension spread
    evenly across cable groups); flexion curls it downward, shifting the
    load onto the ventral (HB) cables.
    """
    if num_poses < 1:
        raise ValueError("need at least one pose")
    if num_poses == 1:
        return Trajectory((quadruped_arch_frame(geometry, arch_start),))
    frames = []
    for step in range(num_poses):
        t = step / (num_poses - 1)
        frames.append(
            quadruped_arch_frame(geometry, (1 - t) * arch_start + t * arch_end)
        )
    return Trajectory(tuple(frames))
