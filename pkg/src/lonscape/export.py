"""DOT and GraphML renderings of a LON for external layout tools."""

from __future__ import annotations

import xml.etree.ElementTree as ET

from .io import lon_to_json
from .lon import LocalOptimaNetwork, global_optimum

FORMATS = ("dot", "graphml", "json")


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(lon: LocalOptimaNetwork, comment: str | None = None) -> str:
    go = global_optimum(lon) if lon.vn else -1
    lines = []
    if comment:
        lines.append(f"// {comment}")
    lines.append("digraph LON {")
    lines.append('  node [shape=circle, style=filled, fillcolor=lightgray, label=""];')
    for i, v in enumerate(lon.vertices):
        attrs = [
            f"key={_dot_quote(v.key)}",
            f'fitness="{v.fitness!r}"',
            f'multiplicity="{v.multiplicity}"',
            f'is_global_optimum="{str(i == go).lower()}"',
        ]
        if i == go:
            attrs.append("fillcolor=red")
        lines.append(f"  n{i} [{', '.join(attrs)}];")
    for e in lon.edges:
        lines.append(f'  n{e.source} -> n{e.dest} [count="{e.count}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_graphml(lon: LocalOptimaNetwork, comment: str | None = None) -> str:
    go = global_optimum(lon) if lon.vn else -1
    root = ET.Element("graphml", xmlns="http://graphml.graphdrawing.org/xmlns")
    keys = [
        ("d_key", "node", "key", "string"),
        ("d_fitness", "node", "fitness", "double"),
        ("d_mult", "node", "multiplicity", "int"),
        ("d_go", "node", "is_global_optimum", "boolean"),
        ("d_count", "edge", "count", "int"),
    ]
    for kid, domain, name, typ in keys:
        ET.SubElement(root, "key", {"id": kid, "for": domain, "attr.name": name, "attr.type": typ})
    graph = ET.SubElement(root, "graph", id="LON", edgedefault="directed")
    for i, v in enumerate(lon.vertices):
        node = ET.SubElement(graph, "node", id=f"n{i}")
        for kid, value in (
            ("d_key", v.key),
            ("d_fitness", repr(v.fitness)),
            ("d_mult", str(v.multiplicity)),
            ("d_go", str(i == go).lower()),
        ):
            ET.SubElement(node, "data", key=kid).text = value
    for n, e in enumerate(lon.edges):
        edge = ET.SubElement(graph, "edge", id=f"e{n}", source=f"n{e.source}", target=f"n{e.dest}")
        ET.SubElement(edge, "data", key="d_count").text = str(e.count)
    ET.indent(root)
    body = ET.tostring(root, encoding="unicode")
    head = '<?xml version="1.0" encoding="UTF-8"?>\n'
    if comment:
        head += f"<!-- {comment.replace('--', '- -')} -->\n"
    return head + body + "\n"


def export(lon: LocalOptimaNetwork, fmt: str, comment: str | None = None) -> str:
    if fmt == "dot":
        return to_dot(lon, comment)
    if fmt == "graphml":
        return to_graphml(lon, comment)
    if fmt == "json":
        return lon_to_json(lon, {"produced_by": comment} if comment else None)
    raise ValueError(f"unknown export format {fmt!r}; choose from {', '.join(FORMATS)}")
