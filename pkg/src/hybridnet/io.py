"""Readers and writers for every file the toolkit emits.

All writers are deterministic: floats are written with ``repr`` (shortest
round-trip form), JSON keeps insertion order, and lines end with ``\\n``.
Every writer has a matching reader so outputs can be loaded back.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

from .analysis import Curve, DegreeHistogram
from .graph import GeneratorTag, GraphError, HybridGraph, Origin, Visibility
from .meanfield import Trajectory
from .propagation import SimulationTrace

PathLike = Union[str, Path]

__all__ = [
    "FormatError",
    "read_curve_csv",
    "read_edge_list",
    "read_graph",
    "read_histogram_csv",
    "read_node_metadata",
    "read_trace_csv",
    "read_trajectory_csv",
    "write_construction_log",
    "write_curve_csv",
    "write_edge_list",
    "write_histogram_csv",
    "write_json",
    "write_node_metadata",
    "write_trace_csv",
    "write_trajectory_csv",
    "write_trigger_json",
]


class FormatError(ValueError):
    """A file does not follow the expected layout."""


def _num(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return None if math.isnan(x) else ("infinite" if math.isinf(x) else x)
    if hasattr(obj, "value") and not isinstance(obj, (int, str)):
        return obj.value
    return obj


def write_json(obj, path: PathLike) -> None:
    """Indented JSON; NaN becomes ``null`` and infinities ``"infinite"``."""
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2) + "\n")


# -- graphs -----------------------------------------------------------------------


def write_edge_list(g: HybridGraph, path: PathLike) -> None:
    """``# nodes=<n> generator=<tag>`` then one ``<i> <j> <D|I>`` line per edge."""
    codes = {int(v): v.code for v in Visibility}
    lines = [f"# nodes={g.n} generator={g.generator_tag.value}"]
    lines += [f"{i} {j} {codes[v]}" for i, j, v in zip(g.src.tolist(), g.dst.tolist(), g.visibility.tolist())]
    Path(path).write_text("\n".join(lines) + "\n")


def read_edge_list(path: PathLike, origin=None, subnet=None) -> HybridGraph:
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("#"):
        raise FormatError(f"{path}: missing '# nodes=<n> generator=<tag>' header")
    fields = dict(tok.split("=", 1) for tok in text[0][1:].split() if "=" in tok)
    try:
        n = int(fields["nodes"])
        tag = GeneratorTag(fields["generator"])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: bad header {text[0]!r}") from exc
    by_code = {v.code: int(v) for v in Visibility}
    src, dst, vis = [], [], []
    for lineno, line in enumerate(text[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 3 or parts[2] not in by_code:
            raise FormatError(f"{path}:{lineno}: expected '<i> <j> <D|I>', got {line!r}")
        src.append(int(parts[0]))
        dst.append(int(parts[1]))
        vis.append(by_code[parts[2]])
    try:
        return HybridGraph.from_edges(n, src, dst, tag, origin=origin, subnet=subnet, visibility=vis)
    except GraphError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_node_metadata(g: HybridGraph, path: PathLike) -> None:
    """JSON array of ``{id, origin, subnet, birth_order}``; ids follow birth order."""
    subnet = g.subnet.tolist() if g.subnet is not None else [None] * g.n
    rows = [
        {"id": i, "origin": Origin(o).label, "subnet": s, "birth_order": i}
        for i, (o, s) in enumerate(zip(g.origin.tolist(), subnet))
    ]
    # one record per line keeps large files diff-friendly
    body = ",\n".join("  " + json.dumps(r) for r in rows)
    Path(path).write_text("[\n" + body + "\n]\n" if rows else "[]\n")


def read_node_metadata(path: PathLike) -> tuple[np.ndarray, Optional[np.ndarray]]:
    """``(origin codes, subnet ids or None)`` ordered by id."""
    rows = json.loads(Path(path).read_text())
    labels = {o.label: int(o) for o in Origin}
    rows = sorted(rows, key=lambda r: r["id"])
    if [r["id"] for r in rows] != list(range(len(rows))):
        raise FormatError(f"{path}: node ids must be dense 0..n-1")
    origin = np.array([labels[r["origin"]] for r in rows], dtype=np.int8)
    subnets = [r.get("subnet") for r in rows]
    if all(s is None for s in subnets):
        return origin, None
    if any(s is None for s in subnets):
        raise FormatError(f"{path}: subnet must be given for all nodes or none")
    return origin, np.array(subnets, dtype=np.int64)


def read_graph(edge_path: PathLike, meta_path: Optional[PathLike] = None) -> HybridGraph:
    origin = subnet = None
    if meta_path is not None:
        origin, subnet = read_node_metadata(meta_path)
    return read_edge_list(edge_path, origin, subnet)


def write_construction_log(events: Iterable[dict], path: PathLike) -> None:
    """JSON lines, one ``{step, kind, details}`` event per line."""
    lines = [json.dumps(_jsonable(e)) for e in events]
    Path(path).write_text("".join(line + "\n" for line in lines))


# -- tables ------------------------------------------------------------------------


def _write_rows(path: PathLike, header: list[str], rows: Iterable[Iterable]) -> None:
    out = [",".join(header)]
    out += [",".join(cell if isinstance(cell, str) else _num(cell) if isinstance(cell, float) else str(cell) for cell in row) for row in rows]
    Path(path).write_text("\n".join(out) + "\n")


def _read_rows(path: PathLike, header: list[str]) -> list[list[str]]:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise FormatError(f"{path}: empty file")
    if [h.strip() for h in rows[0]] != header:
        raise FormatError(f"{path}: expected header {','.join(header)!r}, got {','.join(rows[0])!r}")
    for lineno, r in enumerate(rows[1:], start=2):
        if len(r) != len(header):
            raise FormatError(f"{path}:{lineno}: expected {len(header)} columns, got {len(r)}")
    return rows[1:]


TRACE_HEADER = ["t", "s", "i", "r", "phi", "gamma"]


def write_trace_csv(trace: SimulationTrace, path: PathLike) -> None:
    rows = zip(
        trace.t.tolist(),
        map(float, trace.s_density),
        map(float, trace.i_density),
        map(float, trace.r_density),
        map(float, trace.phi),
        map(float, trace.gamma),
    )
    _write_rows(path, TRACE_HEADER, rows)


def read_trace_csv(path: PathLike) -> dict[str, np.ndarray]:
    rows = _read_rows(path, TRACE_HEADER)
    cols = list(zip(*rows)) if rows else [[] for _ in TRACE_HEADER]
    out = {name: np.array([float(x) for x in col]) for name, col in zip(TRACE_HEADER, cols)}
    out["t"] = out["t"].astype(np.int64)
    return out


def write_trigger_json(trace: SimulationTrace, path: PathLike) -> None:
    write_json([{"replica": k, "trigger_time": t} for k, t in enumerate(trace.trigger_times)], path)


HIST_HEADER = ["k", "count", "pk"]


def write_histogram_csv(hist: DegreeHistogram, path: PathLike) -> None:
    rows = zip(hist.degrees.tolist(), hist.counts.tolist(), map(float, hist.pk))
    _write_rows(path, HIST_HEADER, rows)


def read_histogram_csv(path: PathLike) -> DegreeHistogram:
    rows = _read_rows(path, HIST_HEADER)
    degrees = np.array([int(r[0]) for r in rows], dtype=np.int64)
    counts = np.array([int(r[1]) for r in rows], dtype=np.int64)
    return DegreeHistogram(degrees, counts, int(counts.sum()))


TRAJ_HEADER = ["t", "k", "s_k", "i_k", "r_k", "theta"]


def write_trajectory_csv(traj: Trajectory, path: PathLike) -> None:
    """Long format: one row per (recorded time, degree class)."""
    ks = [int(k) if float(k).is_integer() else float(k) for k in traj.degrees.tolist()]

    def rows():
        for ti, t in enumerate(traj.t.tolist()):
            th = float(traj.theta[ti])
            s, i, r = traj.s[ti].tolist(), traj.i[ti].tolist(), traj.r[ti].tolist()
            for c, k in enumerate(ks):
                yield float(t), k, s[c], i[c], r[c], th

    _write_rows(path, TRAJ_HEADER, rows())


def read_trajectory_csv(path: PathLike) -> dict[str, np.ndarray]:
    rows = _read_rows(path, TRAJ_HEADER)
    cols = list(zip(*rows)) if rows else [[] for _ in TRAJ_HEADER]
    return {name: np.array([float(x) for x in col]) for name, col in zip(TRAJ_HEADER, cols)}


CURVE_HEADER = ["t", "value"]


def write_curve_csv(curve: Curve, path: PathLike) -> None:
    _write_rows(path, CURVE_HEADER, zip(map(float, curve.t), map(float, curve.values)))


def read_curve_csv(path: PathLike, label: str = "") -> Curve:
    """Two-column ``t,value`` CSV; rejects empty, non-numeric or non-increasing input."""
    rows = _read_rows(path, CURVE_HEADER)
    if not rows:
        raise FormatError(f"{path}: curve has no samples")
    try:
        t = [float(r[0]) for r in rows]
        v = [float(r[1]) for r in rows]
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric value ({exc})") from exc
    try:
        return Curve(np.array(t), np.array(v), label or Path(path).stem)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
