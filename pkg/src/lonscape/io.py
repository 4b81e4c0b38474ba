"""Reading and writing run traces, LON files, reports and CSV tables.

Every writer produces byte-stable output for equal inputs: keys are
sorted, floats use round-trip ``repr`` and no timestamps are recorded.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, fields
from pathlib import Path
from typing import Any, Iterable, Sequence

from .errors import ValidationError
from .lon import LocalOptimaNetwork
from .sampler import EdgeEvent, RunTrace, SamplerParams, VertexEvent


class FormatError(ValidationError):
    pass


def _dump(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, allow_nan=False, separators=(",", ":"))


def write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# -- run traces ----------------------------------------------------------------


def trace_to_jsonl(trace: RunTrace, meta: dict | None = None) -> str:
    header = {
        "t": "h",
        "seed": trace.seed,
        "params": asdict(trace.params),
        "space_hash": trace.space_hash,
        "evaluations": trace.evaluations,
        "unique_evaluations": trace.unique_evaluations,
        "stop_reason": trace.stop_reason,
    }
    if trace.error:
        header["error"] = trace.error
    if meta:
        header["meta"] = meta
    lines = [_dump(header)]
    for ev in trace.events():
        if isinstance(ev, VertexEvent):
            lines.append(_dump({"t": "v", "k": ev.key, "f": ev.fitness, "n": ev.multiplicity}))
        else:
            lines.append(_dump({"t": "e", "s": ev.source, "d": ev.dest, "c": ev.count}))
    return "\n".join(lines) + "\n"


def write_trace(trace: RunTrace, path: str | Path, meta: dict | None = None) -> None:
    write_text(path, trace_to_jsonl(trace, meta))


def read_trace(path: str | Path) -> RunTrace:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise FormatError(f"{path}: empty trace file")
    try:
        header = json.loads(lines[0])
        if header.get("t") != "h":
            raise FormatError(f"{path}:1: first record must be the header")
        names = {f.name for f in fields(SamplerParams)}
        params = SamplerParams(**{k: v for k, v in header["params"].items() if k in names})
        trace = RunTrace(seed=header["seed"], params=params, space_hash=header.get("space_hash", ""))
        trace.evaluations = header.get("evaluations", 0)
        trace.unique_evaluations = header.get("unique_evaluations", 0)
        trace.stop_reason = header.get("stop_reason", "")
        trace.error = header.get("error")
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise FormatError(f"{path}:1: bad header ({exc})") from None
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            seq = lineno - 2
            if rec["t"] == "v":
                if rec["k"] in trace.vertices:
                    raise FormatError(f"{path}:{lineno}: duplicate vertex {rec['k']!r}")
                trace.vertices[rec["k"]] = VertexEvent(rec["k"], float(rec["f"]), int(rec["n"]), seq)
            elif rec["t"] == "e":
                if rec["s"] not in trace.vertices or rec["d"] not in trace.vertices:
                    raise FormatError(f"{path}:{lineno}: edge endpoint precedes its vertex record")
                trace.edges[(rec["s"], rec["d"])] = EdgeEvent(rec["s"], rec["d"], int(rec["c"]), seq)
            else:
                raise FormatError(f"{path}:{lineno}: unknown record type {rec['t']!r}")
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"{path}:{lineno}: bad record ({exc})") from None
    trace._seq = len(lines) - 1
    return trace


# -- LON files -----------------------------------------------------------------


def lon_to_dict(lon: LocalOptimaNetwork, meta: dict | None = None) -> dict:
    d = {
        "space_hash": lon.space_hash,
        "vertices": [{"k": v.key, "f": v.fitness, "m": v.multiplicity} for v in lon.vertices],
        "edges": [
            {"s": lon.vertices[e.source].key, "d": lon.vertices[e.dest].key, "c": e.count} for e in lon.edges
        ],
        "provenance": list(lon.provenance),
    }
    if meta:
        d["meta"] = meta
    return d


def lon_to_json(lon: LocalOptimaNetwork, meta: dict | None = None) -> str:
    return json.dumps(lon_to_dict(lon, meta), sort_keys=True, indent=1, allow_nan=False) + "\n"


def write_lon(lon: LocalOptimaNetwork, path: str | Path, meta: dict | None = None) -> None:
    write_text(path, lon_to_json(lon, meta))


def lon_from_dict(d: dict, where: str = "LON") -> LocalOptimaNetwork:
    def field_(rec: dict, name: str, ctx: str):
        try:
            return rec[name]
        except (KeyError, TypeError):
            raise FormatError(f"{where}: {ctx}: missing field {name!r}") from None

    vertices: dict[str, tuple[float, int]] = {}
    for n, rec in enumerate(field_(d, "vertices", "top level")):
        ctx = f"vertices[{n}]"
        key = field_(rec, "k", ctx)
        if key in vertices:
            raise FormatError(f"{where}: {ctx}: duplicate key {key!r}")
        try:
            vertices[str(key)] = (float(field_(rec, "f", ctx)), int(field_(rec, "m", ctx)))
        except (TypeError, ValueError) as exc:
            raise FormatError(f"{where}: {ctx}: {exc}") from None
    edges: dict[tuple[str, str], int] = {}
    for n, rec in enumerate(field_(d, "edges", "top level")):
        ctx = f"edges[{n}]"
        pair = (str(field_(rec, "s", ctx)), str(field_(rec, "d", ctx)))
        try:
            edges[pair] = edges.get(pair, 0) + int(field_(rec, "c", ctx))
        except (TypeError, ValueError) as exc:
            raise FormatError(f"{where}: {ctx}: {exc}") from None
    try:
        return LocalOptimaNetwork.from_maps(vertices, edges, d.get("provenance", []), d.get("space_hash", ""))
    except ValidationError as exc:
        raise FormatError(f"{where}: {exc}") from None


def read_lon(path: str | Path) -> LocalOptimaNetwork:
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(d, dict):
        raise FormatError(f"{path}: top level must be an object")
    return lon_from_dict(d, str(path))


# -- reports ---------------------------------------------------------------------


def write_json(path: str | Path, obj: Any) -> None:
    write_text(path, json.dumps(obj, sort_keys=True, indent=1, allow_nan=False) + "\n")


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]], comment: str | None = None) -> str:
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else ("" if v is None else v) for v in row])
    return buf.getvalue()


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]], comment: str | None = None) -> None:
    write_text(path, csv_text(header, rows, comment))


def read_csv_rows(path: str | Path) -> list[list[str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [row for row in csv.reader(line for line in fh if not line.startswith("#"))]
