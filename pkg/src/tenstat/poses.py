"""Rigid-body poses and pose trajectories.

A pose per body (translation plus rotation) determines every nodal
coordinate from the body-local node positions. 2D rotations are plane
angles in radians; 3D rotations are unit quaternions [w, x, y, z].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .equilibrium import Coordinates
from .topology import Structure


@dataclass(frozen=True)
class BodyPose:
    """Pose of one rigid body: translation (d,) and rotation.

    rotation: scalar angle for d=2, unit quaternion [w,x,y,z] for d=3
    (normalized on construction).
    """

    translation: np.ndarray
    rotation: Union[float, np.ndarray]

    def __post_init__(self):
        t = np.asarray(self.translation, dtype=float)
        object.__setattr__(self, "translation", t)
        if np.ndim(self.rotation) == 0:
            if t.size != 2:
                raise ValueError("scalar rotation requires a 2D translation")
            object.__setattr__(self, "rotation", float(self.rotation))
        else:
            quat = np.asarray(self.rotation, dtype=float)
            if quat.shape != (4,) or t.size != 3:
                raise ValueError("3D pose needs a 3-translation and a 4-quaternion")
            norm = np.linalg.norm(quat)
            if norm < 1e-9:
                raise ValueError("zero quaternion")
            object.__setattr__(self, "rotation", quat / norm)

    @property
    def dimension(self) -> int:
        return self.translation.size

    def rotation_matrix(self) -> np.ndarray:
        if self.dimension == 2:
            c, s = np.cos(self.rotation), np.sin(self.rotation)
            return np.array([[c, -s], [s, c]])
        w, x, y, z = self.rotation
        return np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
            ]
        )

    def apply(self, local_points: np.ndarray) -> np.ndarray:
        """Map (k, d) body-local points to global coordinates."""
        return local_points @ self.rotation_matrix().T + self.translation


Frame = tuple  # one BodyPose per body


@dataclass(frozen=True)
class Trajectory:
    """Sequence of frames; each frame holds one pose per body."""

    frames: tuple[Frame, ...]

    def __post_init__(self):
        frames = tuple(tuple(f) for f in self.frames)
        if frames:
            b = len(frames[0])
            if any(len(f) != b for f in frames):
                raise ValueError("all frames must pose the same number of bodies")
        object.__setattr__(self, "frames", frames)

    def __len__(self) -> int:
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)


def nodes_from_poses(
    structure: Structure,
    local_coords: Sequence[np.ndarray],
    frame: Sequence[BodyPose],
) -> Coordinates:
    """Global nodal coordinates for one frame of body poses."""
    if len(local_coords) != structure.num_bodies or len(frame) != structure.num_bodies:
        raise ValueError("local coordinates / poses do not match the body partition")
    points = np.zeros((structure.n, structure.dimension))
    for group, local, pose in zip(structure.bodies, local_coords, frame):
        local = np.asarray(local, dtype=float)
        if local.shape != (len(group), structure.dimension):
            raise ValueError("local coordinate block does not match its body")
        points[list(group)] = pose.apply(local)
    return Coordinates.from_array(points)


def slerp(qa: np.ndarray, qb: np.ndarray, t: float) -> np.ndarray:
    """Constant-angular-velocity interpolation between unit quaternions."""
    qa = np.asarray(qa, dtype=float)
    qb = np.asarray(qb, dtype=float)
    dot = float(qa @ qb)
    if dot < 0.0:  # take the short arc
        qb, dot = -qb, -dot
    if dot > 1.0 - 1e-12:
        out = qa + t * (qb - qa)
        return out / np.linalg.norm(out)
    theta = np.arccos(np.clip(dot, -1.0, 1.0))
    return (np.sin((1 - t) * theta) * qa + np.sin(t * theta) * qb) / np.sin(theta)


def interpolate_pose(start: BodyPose, end: BodyPose, t: float) -> BodyPose:
    """Linear in translation; linear angle (2D) or slerp (3D) in rotation."""
    translation = (1 - t) * start.translation + t * end.translation
    if start.dimension == 2:
        rotation: Union[float, np.ndarray] = (1 - t) * start.rotation + t * end.rotation
    else:
        rotation = slerp(start.rotation, end.rotation, t)
    return BodyPose(translation, rotation)


@dataclass(frozen=True)
class SpineSweep:
    """Endpoint frames of a bending sweep, interpolated linearly in between."""

    initial: tuple[BodyPose, ...]
    final: tuple[BodyPose, ...]

    def __post_init__(self):
        object.__setattr__(self, "initial", tuple(self.initial))
        object.__setattr__(self, "final", tuple(self.final))
        if len(self.initial) != len(self.final):
            raise ValueError("sweep endpoints pose different body counts")


def spine_bend_trajectory(
    structure: Structure, sweep: SpineSweep, num_poses: int
) -> Trajectory:
    """Sample the sweep at num_poses frames (T=1 yields just the initial frame)."""
    if num_poses < 1:
        raise ValueError("need at least one pose")
    if len(sweep.initial) != structure.num_bodies:
        raise ValueError("sweep does not match the structure's body count")
    if num_poses == 1:
        return Trajectory((sweep.initial,))
    frames = []
    for step in range(num_poses):
        t = step / (num_poses - 1)
        frames.append(
            tuple(
                interpolate_pose(a, b, t)
                for a, b in zip(sweep.initial, sweep.final)
            )
        )
    return Trajectory(tuple(frames))
