import numpy as np
import pytest

from tenstat import (
    BodyPose,
    SpineSweep,
    Trajectory,
    build_connectivity,
    interpolate_pose,
    member_lengths,
    nodes_from_poses,
    slerp,
    spine_bend_trajectory,
)
from tenstat import models


class TestBodyPose:
    def test_identity_2d(self):
        pose = BodyPose(np.zeros(2), 0.0)
        pts = np.array([[1.0, 2.0], [3.0, -1.0]])
        np.testing.assert_allclose(pose.apply(pts), pts)

    def test_quarter_turn(self):
        pose = BodyPose(np.array([5.0, 0.0]), np.pi / 2)
        np.testing.assert_allclose(
            pose.apply(np.array([[1.0, 0.0]])), [[5.0, 1.0]], atol=1e-12
        )

    def test_quaternion_normalized(self):
        pose = BodyPose(np.zeros(3), np.array([2.0, 0.0, 0.0, 0.0]))
        np.testing.assert_allclose(pose.rotation, [1.0, 0.0, 0.0, 0.0])
        np.testing.assert_allclose(pose.rotation_matrix(), np.eye(3))

    def test_zero_quaternion_rejected(self):
        with pytest.raises(ValueError):
            BodyPose(np.zeros(3), np.zeros(4))

    def test_rotation_matrix_orthonormal(self, rng):
        for _ in range(20):
            quat = rng.normal(size=4)
            pose = BodyPose(np.zeros(3), quat)
            Rm = pose.rotation_matrix()
            np.testing.assert_allclose(Rm @ Rm.T, np.eye(3), atol=1e-12)
            assert np.linalg.det(Rm) == pytest.approx(1.0)


class TestNodesFromPoses:
    def test_identity_frame(self, spine2):
        frame = tuple(BodyPose(np.zeros(2), 0.0) for _ in range(2))
        coords = nodes_from_poses(spine2.structure, spine2.local_coords, frame)
        np.testing.assert_allclose(coords.as_array()[:4], spine2.local_coords[0])

    def test_pure_translation(self, spine2):
        shift = np.array([0.3, -0.2])
        frame = tuple(BodyPose(shift, 0.0) for _ in range(2))
        coords = nodes_from_poses(spine2.structure, spine2.local_coords, frame)
        np.testing.assert_allclose(
            coords.as_array()[4:], spine2.local_coords[1] + shift
        )

    def test_mismatched_counts_rejected(self, spine2):
        with pytest.raises(ValueError):
            nodes_from_poses(
                spine2.structure, spine2.local_coords, (BodyPose(np.zeros(2), 0.0),)
            )

    def test_rigid_distances_preserved(self, rng, quadruped):
        structure = quadruped.structure
        for _ in range(5):
            frame = tuple(
                BodyPose(rng.normal(size=3), rng.normal(size=4))
                for _ in range(structure.num_bodies)
            )
            coords = nodes_from_poses(structure, quadruped.local_coords, frame)
            pts = coords.as_array()
            for group, local in zip(structure.bodies, quadruped.local_coords):
                idx = list(group)
                for i in range(len(idx)):
                    for j in range(i + 1, len(idx)):
                        want = np.linalg.norm(local[i] - local[j])
                        got = np.linalg.norm(pts[idx[i]] - pts[idx[j]])
                        assert got == pytest.approx(want, rel=1e-12, abs=1e-12)


class TestSlerp:
    def test_endpoints(self, rng):
        qa = rng.normal(size=4)
        qa /= np.linalg.norm(qa)
        qb = rng.normal(size=4)
        qb /= np.linalg.norm(qb)
        np.testing.assert_allclose(slerp(qa, qb, 0.0), qa, atol=1e-12)
        end = slerp(qa, qb, 1.0)
        assert min(np.linalg.norm(end - qb), np.linalg.norm(end + qb)) < 1e-12

    def test_constant_angular_velocity(self):
        qa = np.array([1.0, 0.0, 0.0, 0.0])
        angle = 1.2
        qb = np.array([np.cos(angle / 2), 0.0, 0.0, np.sin(angle / 2)])
        for t in (0.25, 0.5, 0.75):
            expected = np.array(
                [np.cos(t * angle / 2), 0.0, 0.0, np.sin(t * angle / 2)]
            )
            np.testing.assert_allclose(slerp(qa, qb, t), expected, atol=1e-12)


class TestSpineTrajectory:
    def test_single_pose_is_initial(self, spine5):
        sweep = models.spine_bend_sweep(spine5)
        traj = spine_bend_trajectory(spine5.structure, sweep, 1)
        assert len(traj) == 1
        assert traj.frames[0] == spine5.initial_frame

    def test_zero_sweep_constant(self, spine5):
        sweep = SpineSweep(spine5.initial_frame, spine5.initial_frame)
        traj = spine_bend_trajectory(spine5.structure, sweep, 5)
        for frame in traj:
            for pose, ref in zip(frame, spine5.initial_frame):
                np.testing.assert_allclose(pose.translation, ref.translation)
                assert pose.rotation == ref.rotation

    def test_monotone_counterclockwise(self, spine5):
        sweep = models.spine_bend_sweep(spine5)
        traj = spine_bend_trajectory(spine5.structure, sweep, 20)
        angles = np.array([[pose.rotation for pose in frame] for frame in traj])
        assert np.all(np.diff(angles, axis=0) >= -1e-15)
        assert np.all(angles[-1][1:] > 0)
        # vertebra k's final rotation scales with k
        final = angles[-1]
        np.testing.assert_allclose(np.diff(final), final[1], atol=1e-12)

    def test_bar_lengths_frame_invariant(self, spine5):
        sweep = models.spine_bend_sweep(spine5)
        traj = spine_bend_trajectory(spine5.structure, sweep, 6)
        C = build_connectivity(spine5.structure)
        s = spine5.structure.num_cables
        bar_lengths = []
        cable_lengths = []
        for frame in traj:
            coords = nodes_from_poses(spine5.structure, spine5.local_coords, frame)
            lengths = member_lengths(C, coords)
            bar_lengths.append(lengths[s:])
            cable_lengths.append(lengths[:s])
        bar_lengths = np.array(bar_lengths)
        np.testing.assert_allclose(
            bar_lengths, np.broadcast_to(bar_lengths[0], bar_lengths.shape),
            rtol=1e-12,
        )
        assert np.max(np.ptp(np.array(cable_lengths), axis=0)) > 1e-3

    def test_interpolation_midpoint(self):
        a = BodyPose(np.zeros(2), 0.0)
        b = BodyPose(np.array([2.0, 4.0]), 1.0)
        mid = interpolate_pose(a, b, 0.5)
        np.testing.assert_allclose(mid.translation, [1.0, 2.0])
        assert mid.rotation == pytest.approx(0.5)

    def test_frame_count_mismatch_rejected(self, spine5, spine2):
        sweep = models.spine_bend_sweep(spine2)
        with pytest.raises(ValueError):
            spine_bend_trajectory(spine5.structure, sweep, 3)

    def test_inconsistent_trajectory_rejected(self):
        a = (BodyPose(np.zeros(2), 0.0),)
        b = (BodyPose(np.zeros(2), 0.0), BodyPose(np.zeros(2), 0.0))
        with pytest.raises(ValueError):
            Trajectory((a, b))
