"""JSON files for frameworks, point lists, scenarios and trajectories.

Floats are written with Python's shortest round-trip repr, so
``load_framework(save_framework(F))`` reproduces every weight and
coordinate bit for bit.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import FrameworkError
from .framework import Framework, HierarchyRecord
from .geometry import as_points
from .sim import (
    AddVertexEvent,
    AffineSegment,
    AffineTrajectory,
    DeleteEdgeEvent,
    DeleteVertexEvent,
    ScenarioScript,
)

FORMAT_TAG = "affineframe/framework"
FORMAT_VERSION = 1


class FileFormatError(FrameworkError):
    """A file does not follow the expected layout."""


def framework_to_dict(fw: Framework) -> dict:
    vertices = []
    for v, p in zip(fw.ids, fw.positions):
        entry = {"id": v, "position": [float(x) for x in p], "leader": fw.is_leader(v)}
        rec = fw.hierarchy[v]
        if not rec.is_root:
            entry["hierarchy"] = {
                "parents": list(rec.parents),
                "phi": list(rec.phi),
                "s": rec.s,
                "level": rec.level,
            }
        vertices.append(entry)
    edges = [{"i": i, "j": j, "weight": w} for (i, j), w in sorted(fw.edges.items())]
    return {
        "format": FORMAT_TAG,
        "version": FORMAT_VERSION,
        "dim": fw.dim,
        "leaders": list(fw.leaders),
        "vertices": vertices,
        "edges": edges,
    }


def framework_from_dict(data: dict) -> Framework:
    try:
        if data.get("format", FORMAT_TAG) != FORMAT_TAG:
            raise FileFormatError(f"not a framework file (format {data.get('format')!r})")
        if data.get("version", FORMAT_VERSION) != FORMAT_VERSION:
            raise FileFormatError(f"unsupported framework file version {data.get('version')}")
        dim = int(data["dim"])
        verts = data["vertices"]
        ids = [int(v["id"]) for v in verts]
        positions = [v["position"] for v in verts]
        if "leaders" in data:
            leaders = [int(v) for v in data["leaders"]]
        else:
            leaders = [int(v["id"]) for v in verts if v.get("leader")]
        flagged = {int(v["id"]) for v in verts if v.get("leader")}
        if flagged and flagged != set(leaders):
            raise FileFormatError("leader flags disagree with the leader list")
        children: dict[int, set[int]] = {v: set() for v in ids}
        raw = {}
        for v in verts:
            h = v.get("hierarchy")
            if h:
                parents = tuple(int(p) for p in h["parents"])
                for p in parents:
                    if p not in children:
                        raise FileFormatError(f"vertex {v['id']} names unknown parent {p}")
                    children[p].add(int(v["id"]))
                raw[int(v["id"])] = (parents, tuple(float(x) for x in h["phi"]), float(h["s"]), int(h["level"]))
        hier = {}
        for v in ids:
            parents, phi, s, level = raw.get(v, ((), (), 0.0, 0))
            hier[v] = HierarchyRecord(v, parents, phi, s, level, frozenset(children[v]))
        edges = [(int(e["i"]), int(e["j"]), float(e["weight"])) for e in data["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FrameworkError):
            raise
        raise FileFormatError(f"malformed framework file: {exc!r}") from exc
    return Framework.build(dim, ids, positions, leaders, edges, hier)


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: invalid JSON ({exc})") from exc


def _write_json(path, data) -> None:
    Path(path).write_text(json.dumps(data, indent=1) + "\n")


def save_framework(fw: Framework, path) -> None:
    _write_json(path, framework_to_dict(fw))


def load_framework(path) -> Framework:
    return framework_from_dict(_read_json(path))


def load_points(path, dim: int | None = None) -> np.ndarray:
    """A JSON list of points, or an object with a ``points`` list."""
    data = _read_json(path)
    if isinstance(data, dict):
        data = data.get("points")
    if not isinstance(data, list):
        raise FileFormatError(f"{path}: expected a list of points")
    if not data:
        return np.empty((0, dim or 2))
    return as_points(data, dim)


def save_points(points, path) -> None:
    pts = np.asarray(points, dtype=float)
    rows = [] if pts.size == 0 else [[float(x) for x in p] for p in np.atleast_2d(pts)]
    _write_json(path, {"points": rows})


def trajectory_from_dict(data: dict) -> AffineTrajectory:
    try:
        segs = [AffineSegment(np.array(s["A"], dtype=float), np.array(s["b"], dtype=float), float(s["duration"])) for s in data["segments"]]
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"malformed trajectory: {exc!r}") from exc
    return AffineTrajectory(segs)


def trajectory_to_dict(traj: AffineTrajectory) -> dict:
    return {"segments": [{"A": s.A.tolist(), "b": s.b.tolist(), "duration": s.duration} for s in traj.segments]}


def _opt_tuple(x, cast=float):
    return None if x is None else tuple(cast(v) for v in x)


def scenario_from_dict(data: dict) -> ScenarioScript:
    events = []
    try:
        for e in data.get("events", []):
            kind, t = e["type"], float(e["time"])
            if kind == "add_vertex":
                events.append(AddVertexEvent(t, tuple(map(float, e["point"])), float(e.get("s", 1.0)), _opt_tuple(e.get("parents"), int), _opt_tuple(e.get("start"))))
            elif kind == "delete_edge":
                anchor = e.get("anchor")
                events.append(DeleteEdgeEvent(t, int(e["j"]), int(e["k"]), _opt_tuple(e.get("relay")), None if anchor is None else int(anchor)))
            elif kind == "delete_vertex":
                events.append(DeleteVertexEvent(t, int(e["u"])))
            else:
                raise FileFormatError(f"unknown event type {kind!r}")
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"malformed scenario: {exc!r}") from exc
    d_per = data.get("d_per")
    return ScenarioScript(tuple(events), None if d_per is None else float(d_per))


def scenario_to_dict(script: ScenarioScript) -> dict:
    out = []
    for e in script.events:
        if isinstance(e, AddVertexEvent):
            d = {"type": "add_vertex", "time": e.time, "point": list(e.point), "s": e.s}
            if e.parents is not None:
                d["parents"] = list(e.parents)
            if e.start is not None:
                d["start"] = list(e.start)
        elif isinstance(e, DeleteEdgeEvent):
            d = {"type": "delete_edge", "time": e.time, "j": e.j, "k": e.k}
            if e.relay is not None:
                d["relay"] = list(e.relay)
            if e.anchor is not None:
                d["anchor"] = e.anchor
        else:
            d = {"type": "delete_vertex", "time": e.time, "u": e.u}
        out.append(d)
    return {"d_per": script.d_per, "events": out}


def load_trajectory(path) -> AffineTrajectory:
    return trajectory_from_dict(_read_json(path))


def load_scenario(path) -> ScenarioScript:
    return scenario_from_dict(_read_json(path))


def save_trajectory(traj: AffineTrajectory, path) -> None:
    _write_json(path, trajectory_to_dict(traj))


def save_scenario(script: ScenarioScript, path) -> None:
    _write_json(path, scenario_to_dict(script))
