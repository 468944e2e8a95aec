import json

import numpy as np
import pytest

from tenstat import fileio, models
from tenstat.errors import InvalidStructureError
from tenstat.poses import BodyPose, Trajectory


class TestStructureRoundTrip:
    def test_spine(self, tmp_path, spine5):
        path = tmp_path / "structure.json"
        fileio.write_structure(spine5, path)
        loaded = fileio.read_structure(path)
        s0, s1 = spine5.structure, loaded.structure
        assert s0.members == s1.members
        assert s0.bodies == s1.bodies
        np.testing.assert_array_equal(s0.spring_constants, s1.spring_constants)
        np.testing.assert_array_equal(s0.node_masses, s1.node_masses)
        assert loaded.cable_labels == spine5.cable_labels
        assert loaded.anchors.indices.tolist() == [0, 1, 2, 3]
        for a, b in zip(spine5.local_coords, loaded.local_coords):
            np.testing.assert_array_equal(a, b)

    def test_quadruped_pinned(self, tmp_path, quadruped):
        path = tmp_path / "structure.json"
        fileio.write_structure(quadruped, path)
        loaded = fileio.read_structure(path)
        np.testing.assert_array_equal(
            loaded.pinned.indices, quadruped.pinned.indices
        )
        assert loaded.anchors is None

    def test_default_labels(self, tmp_path, spine2):
        path = tmp_path / "structure.json"
        data = fileio.structure_to_dict(spine2)
        del data["cable_labels"]
        path.write_text(json.dumps(data))
        loaded = fileio.read_structure(path)
        assert loaded.cable_labels == ("C1", "C2", "C3", "C4")

    def test_missing_field_diagnostic(self, tmp_path, spine2):
        path = tmp_path / "structure.json"
        data = fileio.structure_to_dict(spine2)
        del data["members"]
        path.write_text(json.dumps(data))
        with pytest.raises(ValueError, match="members"):
            fileio.read_structure(path)

    def test_invalid_structure_rejected(self, tmp_path, spine2):
        path = tmp_path / "structure.json"
        data = fileio.structure_to_dict(spine2)
        data["spring_constants"][0] = -1.0
        path.write_text(json.dumps(data))
        with pytest.raises(InvalidStructureError):
            fileio.read_structure(path)

    def test_bad_local_block_shape(self, tmp_path, spine2):
        path = tmp_path / "structure.json"
        data = fileio.structure_to_dict(spine2)
        data["local_coordinates"][0] = [[0.0, 0.0]]
        path.write_text(json.dumps(data))
        with pytest.raises(ValueError, match="local_coordinates"):
            fileio.read_structure(path)


class TestPoseFiles:
    def test_pose_round_trip_2d(self, tmp_path):
        frame = (BodyPose(np.array([0.1, 0.2]), 0.3), BodyPose(np.zeros(2), -0.5))
        path = tmp_path / "pose.json"
        fileio.write_pose(frame, path)
        loaded = fileio.read_pose(path)
        for a, b in zip(frame, loaded):
            np.testing.assert_array_equal(a.translation, b.translation)
            assert a.rotation == b.rotation

    def test_trajectory_round_trip_3d(self, tmp_path, rng):
        frames = []
        for _ in range(3):
            frames.append(
                tuple(
                    BodyPose(rng.normal(size=3), rng.normal(size=4))
                    for _ in range(2)
                )
            )
        traj = Trajectory(tuple(frames))
        path = tmp_path / "trajectory.json"
        fileio.write_trajectory(traj, path)
        loaded = fileio.read_trajectory(path)
        assert len(loaded) == 3
        for fa, fb in zip(traj, loaded):
            for a, b in zip(fa, fb):
                np.testing.assert_array_equal(a.translation, b.translation)
                np.testing.assert_allclose(a.rotation, b.rotation)

    def test_pose_accepts_single_frame_trajectory(self, tmp_path):
        frame = (BodyPose(np.zeros(2), 0.0),)
        path = tmp_path / "t.json"
        fileio.write_trajectory(Trajectory((frame,)), path)
        loaded = fileio.read_pose(path)
        assert len(loaded) == 1

    def test_pose_rejects_multi_frame(self, tmp_path):
        frame = (BodyPose(np.zeros(2), 0.0),)
        path = tmp_path / "t.json"
        fileio.write_trajectory(Trajectory((frame, frame)), path)
        with pytest.raises(ValueError, match="exactly one frame"):
            fileio.read_pose(path)


class TestSolutionCsv:
    def rows(self):
        return [
            fileio.SolutionRow(1, 1, "HT-1", 0.15, 0.5, 0.075, 0.149, "Optimal"),
            fileio.SolutionRow(1, 2, "HB-1", 0.15, 65.2, 9.78, 0.138, "Optimal"),
            fileio.SolutionRow(
                2, 1, "HT-1", 0.15, float("nan"), float("nan"), float("nan"),
                "Infeasible",
            ),
        ]

    def test_round_trip(self, tmp_path):
        path = tmp_path / "solution.csv"
        fileio.write_solution_csv(self.rows(), path)
        loaded = fileio.read_solution_csv(path)
        assert len(loaded) == 3
        assert loaded[0] == self.rows()[0]
        assert loaded[2].status == "Infeasible"
        assert np.isnan(loaded[2].q_N_per_m)

    def test_header_and_line_endings(self, tmp_path):
        path = tmp_path / "solution.csv"
        fileio.write_solution_csv(self.rows(), path)
        raw = path.read_bytes()
        assert b"\r" not in raw
        first = raw.split(b"\n", 1)[0].decode()
        assert first == ",".join(fileio.SOLUTION_COLUMNS)

    def test_schema_mismatch_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError, match="header"):
            fileio.read_solution_csv(path)
