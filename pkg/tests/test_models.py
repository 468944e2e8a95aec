import numpy as np
import pytest

from tenstat import (
    TensionBounds,
    build_connectivity,
    gravity_load,
    member_lengths,
    nodes_from_poses,
    presolve_pinned_reactions,
    validate_structure,
)
from tenstat import models
from tenstat.pipeline import solve_pose

# the two-vertebra planar spine's connectivity, rows cables then bars
SPINE2_CONNECTIVITY = np.array(
    [
        [0, 1, 0, 0, 0, -1, 0, 0],
        [0, 0, 1, 0, 0, 0, -1, 0],
        [0, 0, 0, 1, 0, -1, 0, 0],
        [0, 0, 0, 1, 0, 0, -1, 0],
        [1, -1, 0, 0, 0, 0, 0, 0],
        [1, 0, -1, 0, 0, 0, 0, 0],
        [1, 0, 0, -1, 0, 0, 0, 0],
        [0, 0, 0, 0, 1, -1, 0, 0],
        [0, 0, 0, 0, 1, 0, -1, 0],
        [0, 0, 0, 0, 1, 0, 0, -1],
    ],
    dtype=float,
)


class TestSpineGenerator:
    def test_two_vertebra_connectivity(self, spine2):
        C = build_connectivity(spine2.structure)
        np.testing.assert_array_equal(C, SPINE2_CONNECTIVITY)

    def test_counts_scale_with_vertebrae(self):
        for nv in (2, 3, 5, 8):
            bundle = models.spine2d(num_vertebrae=nv)
            s = bundle.structure
            assert s.n == 4 * nv
            assert s.num_cables == 4 * (nv - 1)
            assert s.num_bars == 3 * nv
            assert validate_structure(s).ok

    def test_labels_group_by_gap(self, spine5):
        labels = spine5.cable_labels
        assert len(labels) == 16
        assert labels[:4] == ("HT-1", "HB-1", "SB-1", "ST-1")
        assert labels[-4:] == ("HT-4", "HB-4", "SB-4", "ST-4")

    def test_mass_and_stiffness_defaults(self, spine5):
        s = spine5.structure
        assert s.node_masses.sum() == pytest.approx(0.495)
        np.testing.assert_allclose(s.spring_constants, 840.6, atol=0.05)

    def test_anchoring_optional(self):
        free = models.spine2d(num_vertebrae=2, anchor_first=False)
        assert free.anchors is None

    def test_too_few_vertebrae(self):
        with pytest.raises(ValueError):
            models.spine2d(num_vertebrae=1)


class TestSpineSweeps:
    def test_winch_limit_hits_the_bound(self, spine5):
        geometry = models.SpineGeometry()
        bounds = TensionBounds(0.5, 0.01)
        sweep = models.spine_winch_limit_sweep(spine5, geometry, bounds=bounds)
        coords = nodes_from_poses(spine5.structure, spine5.local_coords, sweep.final)
        load = gravity_load(spine5.structure)
        result = solve_pose(spine5.structure, coords, load, bounds, spine5.anchors)
        assert result.optimal
        state = result.cable_state(spine5.structure.spring_constants)
        inside = [i for i, l in enumerate(spine5.cable_labels) if l.startswith("HB")]
        slack = state.rest_inputs[inside] - 0.01
        assert np.all(np.abs(slack) <= 1e-6)

    def test_winch_limit_requires_rest_length_bound(self, spine5):
        with pytest.raises(ValueError):
            models.spine_winch_limit_sweep(
                spine5, bounds=TensionBounds(0.5, None)
            )

    def test_explicit_sweep_gaps(self, spine2):
        geometry = models.SpineGeometry()
        sweep = models.spine_bend_sweep(
            spine2, geometry, np.deg2rad(8.0), final_gap=0.05
        )
        coords = nodes_from_poses(spine2.structure, spine2.local_coords, sweep.final)
        C = build_connectivity(spine2.structure)
        lengths = member_lengths(C, coords)
        assert lengths[1] == pytest.approx(0.05)  # the rolled-tip cable


class TestQuadrupedGenerator:
    def test_published_scale(self, quadruped):
        s = quadruped.structure
        assert s.node_masses.sum() == pytest.approx(7.3, abs=1e-9)
        coords = nodes_from_poses(
            s, quadruped.local_coords, quadruped.initial_frame
        )
        pts = coords.as_array()
        assert pts[:, 0].max() - pts[:, 0].min() == pytest.approx(0.95, abs=1e-9)

    def test_structure_valid(self, quadruped):
        assert validate_structure(quadruped.structure).ok

    def test_feet_on_ground(self, quadruped):
        coords = nodes_from_poses(
            quadruped.structure, quadruped.local_coords, quadruped.initial_frame
        )
        feet = coords.as_array()[quadruped.pinned.indices]
        np.testing.assert_allclose(feet[:, 2], 0.0, atol=1e-12)
        assert quadruped.pinned.count == 4

    def test_cable_group_labels(self, quadruped):
        labels = quadruped.cable_labels
        assert len(labels) == 8 * (quadruped.structure.num_bodies - 1)
        assert labels[:8] == (
            "HT-1", "HB-1", "HL-1", "HR-1", "ST-1", "SB-1", "SL-1", "SR-1",
        )

    def test_standing_presolve_zero_lateral(self, quadruped):
        coords = nodes_from_poses(
            quadruped.structure, quadruped.local_coords, quadruped.initial_frame
        )
        load = gravity_load(quadruped.structure)
        extra = [
            (axis, int(i), 0.0)
            for axis in (0, 1)
            for i in quadruped.pinned.indices
        ]
        result = presolve_pinned_reactions(
            quadruped.structure, coords, load, quadruped.pinned, extra
        )
        v = quadruped.pinned.count
        np.testing.assert_allclose(result.r[: 2 * v], 0.0, atol=1e-9)
        assert result.r[2 * v :].sum() == pytest.approx(7.3 * 9.81, abs=1e-6)


class TestQuadrupedFrames:
    def test_feet_planted_across_arches(self):
        geometry = models.QuadrupedGeometry()
        bundle = models.quadruped3d(geometry)
        neutral = nodes_from_poses(
            bundle.structure, bundle.local_coords, bundle.initial_frame
        ).as_array()[bundle.pinned.indices]
        for arch in (-0.3, 0.0, 0.2):
            frame = models.quadruped_arch_frame(geometry, arch)
            pts = nodes_from_poses(
                bundle.structure, bundle.local_coords, frame
            ).as_array()
            np.testing.assert_allclose(
                pts[bundle.pinned.indices], neutral, atol=1e-9
            )

    def test_trajectory_arch_interpolates(self):
        geometry = models.QuadrupedGeometry()
        traj = models.quadruped_arch_trajectory(geometry, num_poses=5)
        assert len(traj) == 5
        single = models.quadruped_arch_trajectory(geometry, num_poses=1)
        assert len(single) == 1
