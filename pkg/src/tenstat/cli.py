"""Command-line front end.

Subcommands: validate, solve, trajectory, presolve, verify, and demo (the
built-in spine / quadruped studies). Exit codes: 0 ok, 1 input error,
2 infeasible (or verification failure).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import fileio, models
from .elastic import TensionBounds, potential_energy
from .equilibrium import (
    GRAVITY,
    LoadVector,
    gravity_load,
    insert_reactions,
    presolve_pinned_reactions,
)
from .errors import InconsistentSystem, InvalidStructureError, TenstatError
from .models import ModelBundle
from .oracle import body_wrench_residuals
from .pipeline import solve_pose
from .poses import Trajectory, nodes_from_poses, spine_bend_trajectory
from .qpsolver import QpConfig, SolveStatus
from .topology import validate_structure

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INFEASIBLE = 2


def _tangential_axes(dimension: int) -> list[int]:
    return [0] if dimension == 2 else [0, 1]


def _zero_tangential_constraints(bundle: ModelBundle) -> list[tuple[int, int, float]]:
    return [
        (axis, int(node), 0.0)
        for axis in _tangential_axes(bundle.structure.dimension)
        for node in bundle.pinned.indices
    ]


def _pose_load(bundle: ModelBundle, coords, g: float, presolve: bool):
    """Gravity load, with pre-solved foot reactions inserted when requested."""
    load = gravity_load(bundle.structure, g)
    reactions = None
    if presolve:
        if bundle.pinned is None or bundle.pinned.count == 0:
            raise ValueError("--presolve needs pinned nodes in the structure file")
        reactions = presolve_pinned_reactions(
            bundle.structure,
            coords,
            load,
            bundle.pinned,
            _zero_tangential_constraints(bundle),
        )
        load = insert_reactions(load, reactions.r, bundle.pinned)
    return load, reactions


def _oracle_worst(bundle: ModelBundle, coords, load: LoadVector, q) -> float:
    """Largest per-body wrench residual, skipping bodies with anchored nodes."""
    report = body_wrench_residuals(bundle.structure, coords, load, q)
    anchored = (
        set(bundle.anchors.indices.tolist()) if bundle.anchors is not None else set()
    )
    worst = 0.0
    for k, group in enumerate(bundle.structure.bodies):
        if anchored & set(group):
            continue
        worst = max(
            worst,
            float(np.max(np.abs(report.force[k]))),
            float(np.max(np.abs(report.moment[k]))),
        )
    return worst


def _solution_rows(bundle, t, state, status) -> list[fileio.SolutionRow]:
    rows = []
    for i, label in enumerate(bundle.cable_labels):
        rows.append(
            fileio.SolutionRow(
                t=t,
                cable_index=i + 1,
                group_label=label,
                length_m=float(state.lengths[i]),
                q_N_per_m=float(state.densities[i]),
                tension_N=float(state.tensions[i]),
                rest_length_m=float(state.rest_inputs[i]),
                status=status,
            )
        )
    return rows


def _failure_rows(bundle, t, cable_lengths, status) -> list[fileio.SolutionRow]:
    nan = float("nan")
    return [
        fileio.SolutionRow(
            t=t,
            cable_index=i + 1,
            group_label=label,
            length_m=float(cable_lengths[i]),
            q_N_per_m=nan,
            tension_N=nan,
            rest_length_m=nan,
            status=status,
        )
        for i, label in enumerate(bundle.cable_labels)
    ]


def _run_frames(
    bundle: ModelBundle,
    frames: Sequence,
    bounds: TensionBounds,
    out_csv: Path,
    g: float,
    presolve: bool,
    config: QpConfig,
    summary_json: Optional[Path] = None,
) -> int:
    """Solve a sequence of frames (warm-started) and write the solution CSV."""
    from .elastic import member_lengths
    from .errors import EmptyFeasibleBox
    from .topology import build_connectivity

    structure = bundle.structure
    kappa = structure.spring_constants
    C = build_connectivity(structure)
    rows: list[fileio.SolutionRow] = []
    warm = None
    all_ok = True
    last_summary = None

    for t, frame in enumerate(frames, start=1):
        coords = nodes_from_poses(structure, bundle.local_coords, frame)
        load, _ = _pose_load(bundle, coords, g, presolve)
        try:
            result = solve_pose(
                structure, coords, load, bounds, bundle.anchors, config, warm
            )
        except EmptyFeasibleBox as exc:
            all_ok = False
            lengths = member_lengths(C, coords)[: structure.num_cables]
            rows += _failure_rows(bundle, t, lengths, "EmptyFeasibleBox")
            print(f"t={t}: EmptyFeasibleBox ({exc})", file=sys.stderr)
            continue
        status = result.solution.status
        if status is SolveStatus.OPTIMAL:
            warm = result.solution.q
            state = result.cable_state(kappa)
            rows += _solution_rows(bundle, t, state, status.value)
            last_summary = (t, result, state, load, coords)
        else:
            all_ok = False
            rows += _failure_rows(bundle, t, result.cable_lengths, status.value)
            print(f"t={t}: {status.value}", file=sys.stderr)

    fileio.write_solution_csv(rows, out_csv)
    print(f"wrote {out_csv} ({len(rows)} rows)")

    if summary_json is not None and last_summary is not None:
        t, result, state, load, coords = last_summary
        kkt = result.solution.kkt
        summary = {
            "t": t,
            "status": result.solution.status.value,
            "objective": result.solution.objective,
            "potential_energy_J": potential_energy(
                result.solution.q, kappa, result.cable_lengths
            ),
            "kkt": {
                "stationarity": kkt.stationarity,
                "primal_eq": kkt.primal_eq,
                "primal_ineq": kkt.primal_ineq,
                "complementarity": kkt.complementarity,
            },
            "oracle_max_wrench_residual": _oracle_worst(
                bundle, coords, load, result.solution.q
            ),
        }
        summary_json.write_text(json.dumps(summary, indent=2) + "\n")
        print(f"wrote {summary_json}")
    return EXIT_OK if all_ok else EXIT_INFEASIBLE


def _bounds_from_args(args) -> TensionBounds:
    u_min = None if args.no_saturation else args.min_rest_length
    return TensionBounds(args.min_density, u_min)


def _add_solve_flags(parser, default_density=0.5, default_rest=None):
    parser.add_argument(
        "--min-density",
        type=float,
        default=default_density,
        metavar="C",
        help="minimum cable force density in N/m (default %(default)s)",
    )
    parser.add_argument(
        "--min-rest-length",
        type=float,
        default=default_rest,
        metavar="U",
        help="minimum cable rest length in m (omit for no saturation bound)",
    )
    parser.add_argument(
        "--no-saturation",
        action="store_true",
        help="drop the rest-length saturation constraint",
    )
    parser.add_argument(
        "--tol", type=float, default=1e-8, help="solver tolerance (default %(default)s)"
    )
    parser.add_argument(
        "--gravity", type=float, default=GRAVITY, help="gravity in m/s^2"
    )
    parser.add_argument(
        "--presolve",
        action="store_true",
        help="pre-solve foot reactions at pinned nodes (zero tangential forces)",
    )
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory")


def cmd_validate(args) -> int:
    try:
        bundle = fileio.read_structure(args.structure)
    except InvalidStructureError as exc:
        for violation in exc.violations:
            print(f"violation: {violation}", file=sys.stderr)
        return EXIT_INPUT
    report = validate_structure(bundle.structure)
    if report.ok:
        s = bundle.structure
        print(
            f"ok: {s.n} nodes, {s.num_cables} cables, {s.num_bars} bars, "
            f"{s.num_bodies} bodies, dimension {s.dimension}"
        )
        return EXIT_OK
    for violation in report.violations:
        print(f"violation: {violation}", file=sys.stderr)
    return EXIT_INPUT


def cmd_solve(args) -> int:
    bundle = fileio.read_structure(args.structure)
    frame = fileio.read_pose(args.pose)
    args.out.mkdir(parents=True, exist_ok=True)
    config = QpConfig(feas_tol=args.tol, opt_tol=args.tol)
    return _run_frames(
        bundle,
        [frame],
        _bounds_from_args(args),
        args.out / "solution.csv",
        args.gravity,
        args.presolve,
        config,
        summary_json=args.out / "solution.json",
    )


def cmd_trajectory(args) -> int:
    bundle = fileio.read_structure(args.structure)
    trajectory = fileio.read_trajectory(args.trajectory)
    args.out.mkdir(parents=True, exist_ok=True)
    config = QpConfig(feas_tol=args.tol, opt_tol=args.tol)
    return _run_frames(
        bundle,
        list(trajectory),
        _bounds_from_args(args),
        args.out / "trajectory.csv",
        args.gravity,
        args.presolve,
        config,
    )


def cmd_presolve(args) -> int:
    bundle = fileio.read_structure(args.structure)
    frame = fileio.read_pose(args.pose)
    structure = bundle.structure
    pinned = bundle.pinned
    if args.pinned:
        from .equilibrium import AnchorSpec

        indices = [int(tok) - 1 for tok in args.pinned.split(",")]
        pinned = AnchorSpec.from_indices(structure.n, indices)
    if pinned is None or pinned.count == 0:
        print("no pinned nodes (use --pinned or the structure file)", file=sys.stderr)
        return EXIT_INPUT

    coords = nodes_from_poses(structure, bundle.local_coords, frame)
    load = gravity_load(structure, args.gravity)
    extra: list[tuple[int, int, float]] = []
    axis_index = {"x": 0, "y": 1, "z": 2}
    if args.zero_tangential:
        extra += [
            (axis, int(node), 0.0)
            for axis in _tangential_axes(structure.dimension)
            for node in pinned.indices
        ]
    for spec in args.eq or []:
        try:
            axis_name, node, value = spec.split(":")
            axis = axis_index[axis_name.lower()]
            if axis >= structure.dimension:
                raise KeyError(axis_name)
            extra.append((axis, int(node) - 1, float(value)))
        except (KeyError, ValueError):
            print(f"bad --eq spec '{spec}' (want AXIS:NODE:VALUE)", file=sys.stderr)
            return EXIT_INPUT

    try:
        result = presolve_pinned_reactions(structure, coords, load, pinned, extra)
    except InconsistentSystem as exc:
        print(f"inconsistent: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    args.out.mkdir(parents=True, exist_ok=True)
    out = args.out / "reactions.json"
    fileio.write_reactions(result, out, structure.dimension)
    print(f"wrote {out} (relative residual {result.residual:.3e})")
    return EXIT_OK


def cmd_verify(args) -> int:
    bundle = fileio.read_structure(args.structure)
    trajectory = fileio.read_trajectory(args.poses)
    rows = fileio.read_solution_csv(args.solution)
    s = bundle.structure

    by_t: dict[int, list[fileio.SolutionRow]] = {}
    for row in rows:
        by_t.setdefault(row.t, []).append(row)

    worst = 0.0
    checked = 0
    for t, frame in enumerate(trajectory, start=1):
        group = by_t.get(t)
        if not group or any(r.status != "Optimal" for r in group):
            continue
        group = sorted(group, key=lambda r: r.cable_index)
        if len(group) != s.num_cables:
            print(f"t={t}: expected {s.num_cables} rows, got {len(group)}",
                  file=sys.stderr)
            return EXIT_INPUT
        q = np.array([r.q_N_per_m for r in group])
        coords = nodes_from_poses(s, bundle.local_coords, frame)
        load, _ = _pose_load(bundle, coords, args.gravity, args.presolve)
        worst = max(worst, _oracle_worst(bundle, coords, load, q))
        checked += 1
    print(f"checked {checked} pose(s); worst wrench residual {worst:.3e}")
    if worst > args.tol:
        print(f"FAIL: residual above {args.tol:g}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_demo(args) -> int:
    args.out.mkdir(parents=True, exist_ok=True)
    if args.name == "spine2d":
        geometry = models.SpineGeometry()
        bundle = models.spine2d(num_vertebrae=args.vertebrae, geometry=geometry)
        bounds = TensionBounds(args.min_density, None if args.no_saturation
                               else args.min_rest_length)
        sweep = models.spine_winch_limit_sweep(
            bundle, geometry, np.deg2rad(args.bend), bounds, args.gravity
        )
        trajectory = spine_bend_trajectory(bundle.structure, sweep, args.poses)
        presolve = False
    else:
        geometry = models.QuadrupedGeometry(num_vertebrae=args.vertebrae)
        bundle = models.quadruped3d(geometry)
        if args.pose is not None:
            arch = (
                models.EXTENSION_ARCH
                if args.pose == "extension"
                else models.FLEXION_ARCH
            )
            trajectory = Trajectory((models.quadruped_arch_frame(geometry, arch),))
        else:
            trajectory = models.quadruped_arch_trajectory(
                geometry, num_poses=args.poses
            )
        presolve = True

    structure_path = args.out / "structure.json"
    trajectory_path = args.out / "trajectory.json"
    fileio.write_structure(bundle, structure_path)
    fileio.write_trajectory(trajectory, trajectory_path)
    print(f"wrote {structure_path}")
    print(f"wrote {trajectory_path}")

    # Re-read what was just written so demo output is bit-identical with a
    # later `trajectory` run on the same files.
    bundle = fileio.read_structure(structure_path)
    trajectory = fileio.read_trajectory(trajectory_path)
    config = QpConfig(feas_tol=args.tol, opt_tol=args.tol)
    single = len(trajectory) == 1
    return _run_frames(
        bundle,
        list(trajectory),
        _bounds_from_args(args),
        args.out / ("solution.csv" if single else "trajectory.csv"),
        args.gravity,
        presolve,
        config,
        summary_json=(args.out / "solution.json") if single else None,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tenstat",
        description="Inverse statics for compound tensegrity robots",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a structure file")
    p.add_argument("structure")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="solve one pose")
    p.add_argument("structure")
    p.add_argument("pose")
    _add_solve_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("trajectory", help="solve a pose sequence")
    p.add_argument("structure")
    p.add_argument("trajectory")
    _add_solve_flags(p)
    p.set_defaults(func=cmd_trajectory)

    p = sub.add_parser("presolve", help="pre-solve pinned-joint reactions")
    p.add_argument("structure")
    p.add_argument("pose")
    p.add_argument("--pinned", help="comma-separated 1-based node list")
    p.add_argument(
        "--zero-tangential",
        action="store_true",
        help="force zero tangential reactions at every pinned node",
    )
    p.add_argument(
        "--eq",
        action="append",
        metavar="AXIS:NODE:VALUE",
        help="extra reaction equality, e.g. z:12:0.0 (repeatable)",
    )
    p.add_argument("--gravity", type=float, default=GRAVITY)
    p.add_argument("--out", type=Path, default=Path("."))
    p.set_defaults(func=cmd_presolve)

    p = sub.add_parser("verify", help="recheck a solution CSV with the statics oracle")
    p.add_argument("structure")
    p.add_argument("poses", help="pose or trajectory file matching the CSV")
    p.add_argument("solution", help="solution CSV")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--gravity", type=float, default=GRAVITY)
    p.add_argument("--presolve", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("demo", help="run a built-in study end to end")
    p.add_argument("name", choices=["spine2d", "quadruped"])
    p.add_argument("--vertebrae", type=int, default=None)
    p.add_argument("--poses", type=int, default=20)
    p.add_argument("--bend", type=float, default=10.0,
                   help="spine bend per vertebra, degrees")
    p.add_argument("--pose", choices=["extension", "flexion"],
                   help="quadruped: solve a single named pose instead")
    p.add_argument(
        "--seed", type=int, default=None,
        help="reserved for randomized fixtures; built-in demos are deterministic",
    )
    _add_solve_flags(p)
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "demo":
        if args.vertebrae is None:
            args.vertebrae = 5 if args.name == "spine2d" else 3
        if args.name == "spine2d" and args.min_rest_length is None:
            args.min_rest_length = 0.01
        if args.name == "quadruped":
            if args.min_density == 0.5:
                args.min_density = 25.0
            args.no_saturation = args.min_rest_length is None
    try:
        return args.func(args)
    except (InvalidStructureError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TenstatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
