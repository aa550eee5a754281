"""Deterministic DOT rendering of materialized windows."""

from __future__ import annotations

from .analysis import BallView

PALETTE = [
    "lightblue", "lightsalmon", "palegreen", "plum", "khaki",
    "lightpink", "lightgray", "aquamarine", "wheat", "thistle",
]


def export_dot(view: BallView, name="window", cut_orbits=()) -> str:
    """Vertices labeled by orbit and representative, colored per orbit; cut
    vertices double-circled.  Output is byte-deterministic."""
    orbit_ids = []
    for v in view.vertices:
        if v.elem.orbit_id not in orbit_ids:
            orbit_ids.append(v.elem.orbit_id)
    color = {oid: PALETTE[i % len(PALETTE)] for i, oid in enumerate(orbit_ids)}
    lines = [f"graph \"{name}\" {{", "  node [style=filled];"]
    for v in view.vertices:
        oid = v.elem.orbit_id
        shape = "doublecircle" if oid in cut_orbits else "ellipse"
        label = f"{oid}|{v.elem.rep}"
        lines.append(
            f"  n{v.index} [label=\"{label}\", fillcolor={color[oid]}, "
            f"shape={shape}];"
        )
    for e in sorted(view.edges, key=lambda e: (e.endpoints, e.orbit_id)):
        i, j = e.endpoints
        lines.append(f"  n{i} -- n{j} [label=\"{e.orbit_id}\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"
