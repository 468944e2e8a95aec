"""File formats: structure / pose / trajectory JSON and the solution CSV.

All node and cable indices in files are 1-based (matching the usual node
numbering of these structures); everything in memory is 0-based. Floats in
the CSV are written with repr so that a write/read/solve round trip is
bit-identical.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .equilibrium import AnchorSpec, ReactionResult
from .errors import InvalidStructureError
from .models import ModelBundle
from .poses import BodyPose, Trajectory
from .topology import Member, MemberKind, Structure, validate_structure

PathLike = Union[str, Path]

SOLUTION_COLUMNS = [
    "t",
    "cable_index",
    "group_label",
    "length_m",
    "q_N_per_m",
    "tension_N",
    "rest_length_m",
    "status",
]


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------- structures


def structure_to_dict(bundle: ModelBundle) -> dict:
    structure = bundle.structure
    data: dict = {
        "dimension": structure.dimension,
        "nodes_per_body": list(structure.nodes_per_body),
        "members": [
            {"kind": m.kind.value, "from": m.from_node + 1, "to": m.to_node + 1}
            for m in structure.members
        ],
        "spring_constants": structure.spring_constants.tolist(),
        "node_masses": structure.node_masses.tolist(),
        "local_coordinates": [np.asarray(c).tolist() for c in bundle.local_coords],
    }
    if bundle.cable_labels:
        data["cable_labels"] = list(bundle.cable_labels)
    if bundle.anchors is not None and bundle.anchors.count:
        data["anchors"] = [int(i) + 1 for i in bundle.anchors.indices]
    if bundle.pinned is not None and bundle.pinned.count:
        data["pinned"] = [int(i) + 1 for i in bundle.pinned.indices]
    return data


def write_structure(bundle: ModelBundle, path: PathLike) -> None:
    Path(path).write_text(json.dumps(structure_to_dict(bundle), indent=2) + "\n")


def _require(data: dict, key: str, context: str):
    if key not in data:
        raise ValueError(f"{context}: missing required field '{key}'")
    return data[key]


def structure_from_dict(data: dict, context: str = "structure") -> ModelBundle:
    dimension = int(_require(data, "dimension", context))
    nodes_per_body = [int(e) for e in _require(data, "nodes_per_body", context)]
    n = sum(nodes_per_body)

    members = []
    for idx, entry in enumerate(_require(data, "members", context)):
        try:
            kind = MemberKind(entry["kind"])
            members.append(Member(kind, int(entry["from"]) - 1, int(entry["to"]) - 1))
        except (KeyError, ValueError) as exc:
            raise ValueError(f"{context}: members[{idx}]: {exc}") from exc

    bodies = []
    start = 0
    for count in nodes_per_body:
        bodies.append(tuple(range(start, start + count)))
        start += count

    structure = Structure(
        n=n,
        members=tuple(members),
        bodies=tuple(bodies),
        spring_constants=np.asarray(
            _require(data, "spring_constants", context), dtype=float
        ),
        node_masses=np.asarray(_require(data, "node_masses", context), dtype=float),
        dimension=dimension,
    )
    report = validate_structure(structure)
    if not report.ok:
        raise InvalidStructureError(report.violations)

    local_raw = _require(data, "local_coordinates", context)
    if len(local_raw) != len(bodies):
        raise ValueError(f"{context}: local_coordinates must have one block per body")
    local = []
    for k, block in enumerate(local_raw):
        arr = np.asarray(block, dtype=float)
        if arr.shape != (nodes_per_body[k], dimension):
            raise ValueError(
                f"{context}: local_coordinates[{k}] has shape {arr.shape}, "
                f"expected ({nodes_per_body[k]}, {dimension})"
            )
        local.append(arr)

    labels = tuple(data.get("cable_labels") or ())
    if not labels:
        labels = tuple(f"C{i + 1}" for i in range(structure.num_cables))
    if len(labels) != structure.num_cables:
        raise ValueError(f"{context}: cable_labels must have one entry per cable")

    def mask(key):
        if key not in data:
            return None
        idx = [int(i) - 1 for i in data[key]]
        if any(i < 0 or i >= n for i in idx):
            raise ValueError(f"{context}: {key} references nodes outside 1..{n}")
        return AnchorSpec.from_indices(n, idx)

    return ModelBundle(
        structure=structure,
        local_coords=tuple(local),
        cable_labels=labels,
        initial_frame=None,
        anchors=mask("anchors"),
        pinned=mask("pinned"),
    )


def read_structure(path: PathLike) -> ModelBundle:
    with open(path) as fh:
        data = json.load(fh)
    return structure_from_dict(data, context=str(path))


# ------------------------------------------------------- poses / trajectories


def _pose_to_dict(pose: BodyPose) -> dict:
    rotation = (
        pose.rotation
        if np.ndim(pose.rotation) == 0
        else np.asarray(pose.rotation).tolist()
    )
    return {"translation": pose.translation.tolist(), "rotation": rotation}


def _pose_from_dict(entry: dict, context: str) -> BodyPose:
    try:
        return BodyPose(
            np.asarray(entry["translation"], dtype=float), entry["rotation"]
        )
    except (KeyError, ValueError) as exc:
        raise ValueError(f"{context}: bad body pose: {exc}") from exc


def write_pose(frame: Sequence[BodyPose], path: PathLike) -> None:
    Path(path).write_text(
        json.dumps([_pose_to_dict(p) for p in frame], indent=2) + "\n"
    )


def write_trajectory(trajectory: Trajectory, path: PathLike) -> None:
    data = [[_pose_to_dict(p) for p in frame] for frame in trajectory]
    Path(path).write_text(json.dumps(data, indent=2) + "\n")


def read_pose(path: PathLike) -> tuple[BodyPose, ...]:
    """Single frame: a JSON list of per-body poses (or a one-frame trajectory)."""
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, list) or not data:
        raise ValueError(f"{path}: expected a non-empty JSON list")
    if isinstance(data[0], list):
        if len(data) != 1:
            raise ValueError(f"{path}: a pose file must contain exactly one frame")
        data = data[0]
    return tuple(_pose_from_dict(e, f"{path}[{i}]") for i, e in enumerate(data))


def read_trajectory(path: PathLike) -> Trajectory:
    """Trajectory: JSON list of frames; accepts a bare single frame too."""
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, list) or not data:
        raise ValueError(f"{path}: expected a non-empty JSON list")
    if isinstance(data[0], dict):
        data = [data]
    frames = []
    for t, frame in enumerate(data):
        frames.append(
            tuple(
                _pose_from_dict(e, f"{path}[t={t}][{i}]") for i, e in enumerate(frame)
            )
        )
    return Trajectory(tuple(frames))


# ------------------------------------------------------------- solution CSV


@dataclass(frozen=True)
class SolutionRow:
    t: int
    cable_index: int  # 1-based
    group_label: str
    length_m: float
    q_N_per_m: float
    tension_N: float
    rest_length_m: float
    status: str


def write_solution_csv(rows: Sequence[SolutionRow], path: PathLike) -> None:
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SOLUTION_COLUMNS)
        for row in rows:
            if np.isfinite(row.q_N_per_m):
                numeric = [
                    _fmt(row.length_m),
                    _fmt(row.q_N_per_m),
                    _fmt(row.tension_N),
                    _fmt(row.rest_length_m),
                ]
            else:  # pose without a solution: keep the row, blank the values
                numeric = [_fmt(row.length_m), "", "", ""]
            writer.writerow(
                [row.t, row.cable_index, row.group_label, *numeric, row.status]
            )


def read_solution_csv(path: PathLike) -> list[SolutionRow]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SOLUTION_COLUMNS:
            raise ValueError(
                f"{path}: unexpected CSV header {reader.fieldnames}, "
                f"expected {SOLUTION_COLUMNS}"
            )
        for record in reader:
            rows.append(
                SolutionRow(
                    t=int(record["t"]),
                    cable_index=int(record["cable_index"]),
                    group_label=record["group_label"],
                    length_m=float(record["length_m"]),
                    q_N_per_m=float(record["q_N_per_m"] or "nan"),
                    tension_N=float(record["tension_N"] or "nan"),
                    rest_length_m=float(record["rest_length_m"] or "nan"),
                    status=record["status"],
                )
            )
    return rows


# ---------------------------------------------------------------- reactions


def write_reactions(
    result: ReactionResult, path: PathLike, dimension: Optional[int] = None
) -> None:
    idx = result.pinned.indices
    v = idx.size
    d = result.r.size // v if dimension is None else dimension
    per_node = result.r.reshape(d, v).T
    data = {
        "pinned_nodes": [int(i) + 1 for i in idx],
        "reactions": per_node.tolist(),
        "relative_residual": result.residual,
    }
    Path(path).write_text(json.dumps(data, indent=2) + "\n")
