"""SVG and DOT output for diagrams.

SVG follows the drawing conventions of the notation: marker and line style
are a function of the information kind, inset (migration) edges carry their
marker part way along the path, and everything is drawn in grayscale.
DOT output goes through `graphviz.Digraph` and approximates what DOT cannot
express (inset placement, the parallel-lines glyph) with attributes.
"""
import logging
import math
import xml.etree.ElementTree as ET
from typing import Dict, List, Optional, Tuple

import graphviz

from .builder import derive_border_style
from .layout import Layout, LayoutConfig, Placement, Point, layout
from .schemas import (
    Attachment,
    BorderStyle,
    ComputationNode,
    Diagram,
    Edge,
    InfoKind,
    MacroBox,
    PopulationNode,
    RepeatGroup,
)

logger = logging.getLogger(__name__)

INSET_POSITION = 0.6

BLACK = "#000000"
WHITE = "#ffffff"
LIGHT_GRAY = "#c8c8c8"
GRAY = "#808080"
PALETTE = (BLACK, WHITE, LIGHT_GRAY, GRAY)

MARKER_CLASS = {
    InfoKind.GENOTYPIC: "marker-closed-unfilled",
    InfoKind.PHENOTYPIC: "marker-closed-filled",
    InfoKind.EVALUATIVE: "marker-open",
}
LINE_CLASS = {
    InfoKind.GENOTYPIC: "line-solid",
    InfoKind.PHENOTYPIC: "line-solid",
    InfoKind.EVALUATIVE: "line-dashed",
}
BORDER_DASH = {
    BorderStyle.SOLID: None,
    BorderStyle.DASHED: "8,3",
    BorderStyle.ALTERNATING: "5,5",
}
LINE_DASH = "6,4"
PARALLEL_LINES = 3

SVG_NS = "http://www.w3.org/2000/svg"


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _points(points: List[Point]) -> str:
    head, *rest = points
    return "M" + " L".join([f"{_fmt(head[0])},{_fmt(head[1])}"] +
                           [f"{_fmt(x)},{_fmt(y)}" for x, y in rest])


def _along(points: List[Point], fraction: float) -> Point:
    lengths = [math.dist(a, b) for a, b in zip(points, points[1:])]
    target = sum(lengths) * fraction
    for (a, b), length in zip(zip(points, points[1:]), lengths):
        if target <= length and length > 0:
            t = target / length
            return a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t
        target -= length
    return points[-1]


def _with_vertex_at(points: List[Point], fraction: float) -> Tuple[List[Point], int]:
    """The same path with a vertex inserted at `fraction` of its length, and its index."""
    lengths = [math.dist(a, b) for a, b in zip(points, points[1:])]
    target = sum(lengths) * fraction
    for i, length in enumerate(lengths):
        if target <= length and length > 0:
            a, b = points[i], points[i + 1]
            t = target / length
            vertex = (a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t)
            return [*points[:i + 1], vertex, *points[i + 1:]], i + 1
        target -= length
    return [points[0], *points], 1


class SvgWriter:
    def __init__(self, diagram: Diagram, geometry: Layout):
        self.diagram = diagram
        self.geometry = geometry
        self.groups: Dict[str, RepeatGroup] = {g.template: g for g in diagram.repeat_groups}
        self.root = ET.Element("svg", {
            "xmlns": SVG_NS,
            "version": "1.1",
            "width": _fmt(geometry.width),
            "height": _fmt(geometry.height),
            "viewBox": f"0 0 {_fmt(geometry.width)} {_fmt(geometry.height)}",
            "class": "mpead",
        })
        ET.SubElement(self.root, "title").text = diagram.name

    # markers

    def defs(self) -> None:
        defs = ET.SubElement(self.root, "defs")
        for kind, css in MARKER_CLASS.items():
            marker = ET.SubElement(defs, "marker", {
                "id": f"arrow-{kind.value}",
                "class": css,
                "viewBox": "0 0 10 10",
                "refX": "10" if css != "marker-open" else "9",
                "refY": "5",
                "markerWidth": "10",
                "markerHeight": "10",
                "orient": "auto",
                "markerUnits": "userSpaceOnUse",
            })
            if kind == InfoKind.EVALUATIVE:
                ET.SubElement(marker, "path", {"d": "M0,0 L10,5 L0,10", "fill": "none",
                                               "stroke": BLACK, "stroke-width": "1"})
            else:
                fill = BLACK if kind == InfoKind.PHENOTYPIC else WHITE
                ET.SubElement(marker, "path", {"d": "M0,0 L10,5 L0,10 z", "fill": fill,
                                               "stroke": BLACK, "stroke-width": "1"})

    # nodes

    def macro_box(self, parent: ET.Element, box: MacroBox, place: Placement) -> None:
        g = ET.SubElement(parent, "g", {"class": "macro-box", "data-id": box.id})
        tip = place.height / 4
        left, right = place.left, place.left + place.width
        top, bottom = place.top, place.top + place.height
        corners = [
            (left, place.y), (left + tip, top), (right - tip, top),
            (right, place.y), (right - tip, bottom), (left + tip, bottom),
        ]
        ET.SubElement(g, "polygon", {
            "points": " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in corners),
            "fill": LIGHT_GRAY, "stroke": "none",
        })
        for i, (a, b) in enumerate(zip(corners, corners[1:] + corners[:1])):
            long_face = i in (1, 4)
            attrs = {
                "class": "macro-face-long" if long_face else "macro-face-short",
                "x1": _fmt(a[0]), "y1": _fmt(a[1]), "x2": _fmt(b[0]), "y2": _fmt(b[1]),
                "stroke": BLACK, "stroke-width": "1",
            }
            if long_face:
                attrs["stroke-dasharray"] = LINE_DASH
            ET.SubElement(g, "line", attrs)

    def population_shape(self, parent: ET.Element, x: float, y: float, w: float, h: float,
                         label: str) -> None:
        ET.SubElement(parent, "rect", {
            "class": "population", "x": _fmt(x), "y": _fmt(y),
            "width": _fmt(w), "height": _fmt(h),
            "fill": WHITE, "stroke": BLACK, "stroke-width": "1",
        })
        text = ET.SubElement(parent, "text", {
            "x": _fmt(x + w / 2), "y": _fmt(y + h * 0.35), "text-anchor": "middle",
            "font-family": "sans-serif", "font-size": "12", "fill": BLACK,
        })
        text.text = label
        for i in range(PARALLEL_LINES):
            ly = y + h * (0.55 + 0.12 * i)
            ET.SubElement(parent, "line", {
                "class": "population-line",
                "x1": _fmt(x + w * 0.15), "y1": _fmt(ly), "x2": _fmt(x + w * 0.85), "y2": _fmt(ly),
                "stroke": BLACK, "stroke-width": "1",
            })

    def bar(self, parent: ET.Element, start: Point, end: Point, count: int, axis: str) -> None:
        g = ET.SubElement(parent, "g", {"class": "ellipsis-bar", "data-axis": axis,
                                        "data-count": str(count)})
        line = {"stroke": BLACK, "stroke-width": "1"}
        ET.SubElement(g, "line", {"x1": _fmt(start[0]), "y1": _fmt(start[1]),
                                  "x2": _fmt(end[0]), "y2": _fmt(end[1]), **line})
        for px, py in (start, end):
            if axis == "horizontal":
                tick = {"x1": _fmt(px), "y1": _fmt(py - 5), "x2": _fmt(px), "y2": _fmt(py + 5)}
            else:
                tick = {"x1": _fmt(px - 5), "y1": _fmt(py), "x2": _fmt(px + 5), "y2": _fmt(py)}
            ET.SubElement(g, "line", {**tick, **line})
        mx, my = (start[0] + end[0]) / 2, (start[1] + end[1]) / 2
        offset = (0.0, -4.0) if axis == "horizontal" else (-8.0, 4.0)
        ET.SubElement(g, "text", {
            "x": _fmt(mx + offset[0]), "y": _fmt(my + offset[1]),
            "text-anchor": "middle" if axis == "horizontal" else "end",
            "font-family": "sans-serif", "font-size": "11", "fill": BLACK,
        }).text = str(count)

    def ellipsis(self, parent: ET.Element, x: float, y: float) -> None:
        ET.SubElement(parent, "text", {
            "class": "ellipsis", "x": _fmt(x), "y": _fmt(y), "text-anchor": "middle",
            "font-family": "sans-serif", "font-size": "16", "fill": BLACK,
        }).text = "…"

    def repeat_block(self, parent: ET.Element, pop: PopulationNode, group: RepeatGroup,
                     place: Placement, w: float, h: float) -> None:
        g = ET.SubElement(parent, "g", {"class": "repeat-block", "data-id": group.id,
                                        "data-node": pop.id, "data-count": str(group.total)})
        left, top = place.left, place.top
        if not group.is_grid:
            (count,) = group.counts
            self.population_shape(g, left, top, w, h, f"{pop.name}_0")
            self.population_shape(g, left + place.width - w, top, w, h, f"{pop.name}_{count - 1}")
            self.ellipsis(g, place.x, top + h / 2)
            bar_y = top + h + 15
            self.bar(g, (left, bar_y), (left + place.width, bar_y), count, "horizontal")
            return

        rows, cols = group.counts
        inner_w = place.width - 30
        inner_h = place.height - 30
        corners = [(0, 0), (0, cols - 1), (rows - 1, 0), (rows - 1, cols - 1)]
        for r, c in corners:
            cx = left if c == 0 else left + inner_w - w
            cy = top if r == 0 else top + inner_h - h
            self.population_shape(g, cx, cy, w, h, f"{pop.name}_{r}_{c}")
        self.ellipsis(g, left + inner_w / 2, top + h / 2)
        self.ellipsis(g, left + inner_w / 2, top + inner_h - h / 2)
        self.ellipsis(g, left + w / 2, top + inner_h / 2 + 5)
        self.ellipsis(g, left + inner_w - w / 2, top + inner_h / 2 + 5)
        bar_y = top + inner_h + 15
        self.bar(g, (left, bar_y), (left + inner_w, bar_y), cols, "horizontal")
        bar_x = left + inner_w + 15
        self.bar(g, (bar_x, top), (bar_x, top + inner_h), rows, "vertical")

    def population(self, parent: ET.Element, pop: PopulationNode, place: Placement,
                   config: LayoutConfig) -> None:
        group = self.groups.get(pop.id)
        if group is not None:
            self.repeat_block(parent, pop, group, place,
                              config.population_width, config.population_height)
            return
        g = ET.SubElement(parent, "g", {"class": "population-node", "data-node": pop.id})
        self.population_shape(g, place.left, place.top, place.width, place.height, pop.name)

    def computation(self, parent: ET.Element, comp: ComputationNode, place: Placement) -> None:
        style = derive_border_style(comp, self.diagram.outgoing(comp.id))
        g = ET.SubElement(parent, "g", {"class": "computation-node", "data-node": comp.id})
        attrs = {
            "class": f"computation border-{style.value}",
            "cx": _fmt(place.x), "cy": _fmt(place.y), "r": _fmt(place.width / 2),
            "fill": WHITE, "stroke": BLACK, "stroke-width": "1",
        }
        if BORDER_DASH[style] is not None:
            attrs["stroke-dasharray"] = BORDER_DASH[style]
        ET.SubElement(g, "circle", attrs)
        ET.SubElement(g, "text", {
            "x": _fmt(place.x), "y": _fmt(place.y + 4), "text-anchor": "middle",
            "font-family": "sans-serif", "font-size": "12", "fill": BLACK,
        }).text = comp.name

    # edges

    def edge_path(self, parent: ET.Element, edge: Edge, points: List[Point]) -> None:
        css = f"edge {LINE_CLASS[edge.kind]} {MARKER_CLASS[edge.kind]}"
        attrs = {"class": "", "data-edge": edge.id, "data-kind": edge.kind.value,
                 "fill": "none", "stroke": BLACK, "stroke-width": "1"}
        if edge.kind == InfoKind.EVALUATIVE:
            attrs["stroke-dasharray"] = LINE_DASH
        marker = f"url(#arrow-{edge.kind.value})"
        inset_at = None
        if edge.target.attachment == Attachment.INSET:
            css += " attach-inset"
            bends = len(points) > 2
            points, inset_at = _with_vertex_at(points, INSET_POSITION)
            if not bends:
                attrs["marker-mid"] = marker
        else:
            css += " attach-node"
            attrs["marker-end"] = marker
        attrs["class"] = css
        attrs["d"] = _points(points)
        ET.SubElement(parent, "path", attrs)
        if inset_at is not None and "marker-mid" not in attrs:
            # bent route: the arrowhead rides on a stub through the inset vertex
            stub = points[inset_at - 1:inset_at + 2]
            ET.SubElement(parent, "path", {
                "class": f"inset-marker {MARKER_CLASS[edge.kind]}", "data-edge": edge.id,
                "d": _points(stub), "fill": "none", "stroke": "none", "marker-mid": marker,
            })

        for endpoint, at in ((edge.source, 0.15), (edge.target, 0.85)):
            if endpoint.label is None:
                continue
            lx, ly = _along(points, at)
            ET.SubElement(parent, "text", {
                "class": "edge-label", "x": _fmt(lx + 6), "y": _fmt(ly - 6),
                "font-family": "serif", "font-style": "italic", "font-size": "11", "fill": BLACK,
            }).text = str(endpoint.label)

    def trunk(self, parent: ET.Element, group_id: str, members: List[Edge],
              points: List[Point]) -> None:
        if len(members) < 2:
            return
        kind = members[0].kind
        attrs = {"class": f"trunk {LINE_CLASS[kind]}", "data-group": group_id,
                 "d": _points(points), "fill": "none", "stroke": BLACK, "stroke-width": "1"}
        if kind == InfoKind.EVALUATIVE:
            attrs["stroke-dasharray"] = LINE_DASH
        ET.SubElement(parent, "path", attrs)

    def write(self, config: LayoutConfig) -> str:
        self.defs()
        geometry = self.geometry
        boxes = ET.SubElement(self.root, "g", {"class": "macro-boxes"})
        for box in self.diagram.macro_boxes:
            self.macro_box(boxes, box, geometry.nodes[box.id])

        edges = ET.SubElement(self.root, "g", {"class": "edges"})
        groups = self.diagram.divergence_groups()
        for group_id, points in geometry.trunks.items():
            self.trunk(edges, group_id, groups[group_id], points)
        boundary = [e for g in self.diagram.repeat_groups for e in g.boundary]
        for edge in [*self.diagram.edges, *boundary]:
            self.edge_path(edges, edge, geometry.edges[edge.id])

        nodes = ET.SubElement(self.root, "g", {"class": "nodes"})
        for pop in self.diagram.populations:
            self.population(nodes, pop, geometry.nodes[pop.id], config)
        for comp in self.diagram.computations:
            self.computation(nodes, comp, geometry.nodes[comp.id])

        ET.indent(self.root)
        return ET.tostring(self.root, encoding="unicode") + "\n"


def render_svg(diagram: Diagram, config: Optional[LayoutConfig] = None) -> str:
    """Draw the diagram as an SVG 1.1 document."""
    config = config or LayoutConfig()
    geometry = layout(diagram, config)
    svg = SvgWriter(diagram, geometry).write(config)
    logger.debug("rendered %s: %d node(s), %d edge(s)",
                 diagram.name, len(diagram.nodes), len(geometry.edges))
    return svg


# DOT

ARROWHEAD = {
    InfoKind.GENOTYPIC: "empty",
    InfoKind.PHENOTYPIC: "normal",
    InfoKind.EVALUATIVE: "vee",
}
DOT_BORDER = {
    BorderStyle.SOLID: "solid",
    BorderStyle.DASHED: "dashed",
    BorderStyle.ALTERNATING: "dotted",
}


def _dot_node(graph: graphviz.Digraph, diagram: Diagram, node_id: str,
              groups: Dict[str, RepeatGroup]) -> None:
    node = diagram.nodes[node_id]
    if isinstance(node, PopulationNode):
        label = node.name
        group = groups.get(node_id)
        if group is not None:
            label = f"{node.name} … x{group.total}"
        # the parallel-lines glyph becomes a double border
        graph.node(node_id, label=label, shape="box", peripheries="2")
    else:
        style = derive_border_style(node, diagram.outgoing(node_id))
        graph.node(node_id, label=node.name, shape="circle", style=DOT_BORDER[style])


def render_dot(diagram: Diagram) -> str:
    dot = graphviz.Digraph(
        diagram.name,
        graph_attr={"rankdir": "TB", "compound": "true"},
        node_attr={"fontname": "Helvetica", "fontsize": "10.5", "color": BLACK},
        edge_attr={"fontname": "Helvetica", "fontsize": "9.5", "color": BLACK},
    )
    groups = {g.template: g for g in diagram.repeat_groups}
    boxed = {m for box in diagram.macro_boxes for m in box.members}

    for box in diagram.macro_boxes:
        with dot.subgraph(name=f"cluster_{box.id}") as cluster:
            cluster.attr(label=box.id, style="filled,dashed", fillcolor=LIGHT_GRAY)
            for member in box.members:
                _dot_node(cluster, diagram, member, groups)

    for group in diagram.repeat_groups:
        if group.template in boxed:
            continue
        with dot.subgraph(name=f"cluster_{group.id}") as cluster:
            cluster.attr(label=f"{group.id} ({' x '.join(map(str, group.counts))})", style="solid")
            _dot_node(cluster, diagram, group.template, groups)

    for node_id in diagram.nodes:
        if node_id not in boxed and node_id not in groups:
            _dot_node(dot, diagram, node_id, groups)

    boundary = [e for g in diagram.repeat_groups for e in g.boundary]
    for edge in [*diagram.edges, *boundary]:
        attrs = {"arrowhead": ARROWHEAD[edge.kind]}
        if edge.kind == InfoKind.EVALUATIVE:
            attrs["style"] = "dashed"
        if edge.is_inset:
            # inset placement has no DOT equivalent
            attrs["style"] = "bold"
            attrs["xlabel"] = "migrate"
        if edge.source.label is not None:
            attrs["taillabel"] = str(edge.source.label)
        if edge.target.label is not None:
            attrs["headlabel"] = str(edge.target.label)
        tail, head = edge.source.node, edge.target.node
        if tail in diagram.boxes:
            attrs["ltail"] = f"cluster_{tail}"
            tail = diagram.boxes[tail].members[0]
        if head in diagram.boxes:
            attrs["lhead"] = f"cluster_{head}"
            head = diagram.boxes[head].members[0]
        dot.edge(tail, head, **attrs)
    return dot.source
