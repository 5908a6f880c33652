"""Node placement and edge routing for rendering.

Layout works on units: every node outside a macro box, every macro box (its
members sit in a row inside it) and, unexpanded, every repeat template drawn
as a block. Layered mode is a small Sugiyama pipeline; force mode is a seeded
Fruchterman-Reingold run followed by a uniform scale-up that removes
overlaps.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Tuple

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt

from .errors import LayoutFailure
from .schemas import Diagram, Edge, PopulationNode

logger = logging.getLogger(__name__)

Point = Tuple[float, float]

ELLIPSIS_GAP = 40.0
BAR_SPACE = 30.0
SWEEPS = 4


class LayoutConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: int = 0
    algorithm: Literal["layered", "force"] = "layered"
    spacing: PositiveFloat = 40.0
    padding: float = Field(default=30.0, ge=0)
    population_width: PositiveFloat = 120.0
    population_height: PositiveFloat = 70.0
    computation_radius: PositiveFloat = 30.0
    iterations: PositiveInt = 500
    tolerance: PositiveFloat = 0.5


@dataclass
class Placement:
    """Center point and extent of one drawn shape."""

    x: float
    y: float
    width: float
    height: float
    shape: str

    @property
    def left(self) -> float:
        return self.x - self.width / 2

    @property
    def top(self) -> float:
        return self.y - self.height / 2

    def overlaps(self, other: "Placement") -> bool:
        return (abs(self.x - other.x) * 2 < self.width + other.width and
                abs(self.y - other.y) * 2 < self.height + other.height)

    def boundary_toward(self, point: Point) -> Point:
        dx, dy = point[0] - self.x, point[1] - self.y
        if dx == 0 and dy == 0:
            return self.x, self.y
        if self.shape == "computation":
            scale = (self.width / 2) / math.hypot(dx, dy)
        else:
            scale = min(
                (self.width / 2) / abs(dx) if dx else math.inf,
                (self.height / 2) / abs(dy) if dy else math.inf,
            )
        return self.x + dx * scale, self.y + dy * scale


@dataclass
class Layout:
    width: float
    height: float
    nodes: Dict[str, Placement] = field(default_factory=dict)
    edges: Dict[str, List[Point]] = field(default_factory=dict)
    trunks: Dict[str, List[Point]] = field(default_factory=dict)


# Unit sizes

def _templates(diagram: Diagram) -> Dict[str, Tuple[int, ...]]:
    return {group.template: group.counts for group in diagram.repeat_groups}


def _node_size(diagram: Diagram, node_id: str, config: LayoutConfig) -> Tuple[float, float, str]:
    node = diagram.nodes[node_id]
    if not isinstance(node, PopulationNode):
        diameter = 2 * config.computation_radius
        return diameter, diameter, "computation"
    counts = _templates(diagram).get(node_id)
    w, h = config.population_width, config.population_height
    if counts is None:
        return w, h, "population"
    if len(counts) == 1:
        return 2 * w + ELLIPSIS_GAP, h + BAR_SPACE, "repeat"
    return 2 * w + ELLIPSIS_GAP + BAR_SPACE, 2 * h + ELLIPSIS_GAP + BAR_SPACE, "grid"


def _member_row(diagram: Diagram, members, config: LayoutConfig):
    sizes = [_node_size(diagram, m, config) for m in members]
    row_width = sum(w for w, _, _ in sizes) + config.spacing * (len(sizes) - 1)
    row_height = max(h for _, h, _ in sizes)
    return sizes, row_width, row_height


def _box_size(diagram: Diagram, box_id: str, config: LayoutConfig) -> Tuple[float, float]:
    _, row_width, row_height = _member_row(diagram, diagram.boxes[box_id].members, config)
    height = row_height + config.spacing
    return row_width + config.spacing + height / 2, height


def _units(diagram: Diagram, config: LayoutConfig):
    """unit id -> (width, height, shape), plus node -> owning unit."""
    owner: Dict[str, str] = {}
    for box in diagram.macro_boxes:
        for member in box.members:
            owner.setdefault(member, box.id)

    units: Dict[str, Tuple[float, float, str]] = {}
    for node_id in diagram.nodes:
        if node_id not in owner:
            units[node_id] = _node_size(diagram, node_id, config)
            owner[node_id] = node_id
    for box in diagram.macro_boxes:
        units[box.id] = (*_box_size(diagram, box.id, config), "macro")
        owner[box.id] = box.id
    return units, owner


def _unit_edges(diagram: Diagram, owner: Dict[str, str]) -> List[Tuple[str, str]]:
    boundary = [e for g in diagram.repeat_groups for e in g.boundary]
    pairs = []
    for edge in [*diagram.edges, *boundary]:
        u, v = owner[edge.source.node], owner[edge.target.node]
        if u != v and (u, v) not in pairs:
            pairs.append((u, v))
    return pairs


# Layered mode

def _acyclic(graph: nx.DiGraph) -> nx.DiGraph:
    """Reverse DFS back edges, visiting nodes in insertion order."""
    result = graph.copy()
    visited, stack = set(), set()

    def visit(node):
        visited.add(node)
        stack.add(node)
        for succ in list(graph.successors(node)):
            if succ in stack:
                result.remove_edge(node, succ)
                if not result.has_edge(succ, node):
                    result.add_edge(succ, node)
            elif succ not in visited:
                visit(succ)
        stack.discard(node)

    for node in graph.nodes:
        if node not in visited:
            visit(node)
    return result


def _layers(dag: nx.DiGraph) -> List[List[str]]:
    rank: Dict[str, int] = {}
    for node in nx.lexicographical_topological_sort(dag, key=list(dag.nodes).index):
        rank[node] = max((rank[p] + 1 for p in dag.predecessors(node)), default=0)
    layers: List[List[str]] = [[] for _ in range(max(rank.values(), default=-1) + 1)]
    for node in dag.nodes:
        layers[rank[node]].append(node)
    return layers


def _barycenter_sweeps(layers: List[List[str]], graph: nx.DiGraph) -> List[List[str]]:
    undirected = graph.to_undirected(as_view=True)
    for sweep in range(SWEEPS):
        order = range(1, len(layers)) if sweep % 2 == 0 else range(len(layers) - 2, -1, -1)
        for index in order:
            fixed = layers[index - 1] if sweep % 2 == 0 else layers[index + 1]
            position = {node: i for i, node in enumerate(fixed)}
            current = layers[index]

            def barycenter(item):
                i, node = item
                neighbors = [position[n] for n in undirected.neighbors(node) if n in position]
                return (sum(neighbors) / len(neighbors)) if neighbors else float(i)

            layers[index] = [node for _, node in sorted(enumerate(current), key=barycenter)]
    return layers


def _layered(units, pairs, config: LayoutConfig) -> Dict[str, Tuple[float, float]]:
    graph = nx.DiGraph()
    graph.add_nodes_from(units)
    graph.add_edges_from(pairs)
    layers = _barycenter_sweeps(_layers(_acyclic(graph)), graph)

    widths = [sum(units[n][0] for n in layer) + config.spacing * (len(layer) - 1)
              for layer in layers]
    heights = [max(units[n][1] for n in layer) for layer in layers]
    total_width = max(widths, default=0.0)

    centers: Dict[str, Tuple[float, float]] = {}
    y = config.padding
    for layer, width, height in zip(layers, widths, heights):
        x = config.padding + (total_width - width) / 2
        for node in layer:
            w = units[node][0]
            centers[node] = (x + w / 2, y + height / 2)
            x += w + config.spacing
        y += height + config.spacing * 2
    return centers


# Force mode

def _force(units, pairs, config: LayoutConfig) -> Dict[str, Tuple[float, float]]:
    ids = list(units)
    n = len(ids)
    if n == 1:
        w, h, _ = units[ids[0]]
        return {ids[0]: (config.padding + w / 2, config.padding + h / 2)}

    rng = np.random.default_rng(config.seed)
    size = np.array([[units[i][0], units[i][1]] for i in ids])
    k = float(np.max(np.hypot(size[:, 0], size[:, 1]))) + config.spacing
    pos = rng.uniform(0.0, k * math.sqrt(n), size=(n, 2))
    index = {node: i for i, node in enumerate(ids)}
    edges = np.array([(index[u], index[v]) for u, v in pairs], dtype=int).reshape(-1, 2)

    temperature = k * math.sqrt(n) / 10
    for iteration in range(config.iterations):
        delta = pos[:, None, :] - pos[None, :, :]
        dist = np.hypot(delta[..., 0], delta[..., 1])
        np.fill_diagonal(dist, 1.0)
        dist = np.maximum(dist, 1e-3)
        disp = np.sum(delta / dist[..., None] * (k * k / dist)[..., None], axis=1)
        if len(edges):
            d = pos[edges[:, 0]] - pos[edges[:, 1]]
            length = np.maximum(np.hypot(d[:, 0], d[:, 1]), 1e-3)
            pull = d / length[:, None] * (length * length / k)[:, None]
            np.add.at(disp, edges[:, 0], -pull)
            np.add.at(disp, edges[:, 1], pull)
        norm = np.maximum(np.hypot(disp[:, 0], disp[:, 1]), 1e-9)
        step = disp / norm[:, None] * np.minimum(norm, temperature)[:, None]
        pos += step
        temperature *= 0.95
        if float(np.max(np.hypot(step[:, 0], step[:, 1]))) < config.tolerance:
            logger.debug("force layout converged after %d iterations", iteration + 1)
            break
    else:
        raise LayoutFailure(
            f"force layout did not settle within {config.iterations} iterations"
        )

    scale = 1.0
    for a in range(n):
        for b in range(a + 1, n):
            dx, dy = abs(pos[a, 0] - pos[b, 0]), abs(pos[a, 1] - pos[b, 1])
            need_x = (size[a, 0] + size[b, 0]) / 2 + config.spacing / 2
            need_y = (size[a, 1] + size[b, 1]) / 2 + config.spacing / 2
            fits = min(need_x / dx if dx else math.inf, need_y / dy if dy else math.inf)
            if math.isinf(fits):
                raise LayoutFailure(f"{ids[a]!r} and {ids[b]!r} landed on the same point")
            scale = max(scale, fits)
    pos *= scale
    pos -= (pos - size / 2).min(axis=0)
    pos += config.padding
    return {node: (float(pos[i, 0]), float(pos[i, 1])) for i, node in enumerate(ids)}


# Edge routing

def _route(edge: Edge, nodes: Dict[str, Placement]) -> List[Point]:
    src, dst = nodes[edge.source.node], nodes[edge.target.node]
    if edge.source.node == edge.target.node:
        top = src.y - src.height / 2
        return [(src.x - 10, top), (src.x - 10, top - 30), (src.x + 10, top - 30), (src.x + 10, top)]
    return [src.boundary_toward((dst.x, dst.y)), dst.boundary_toward((src.x, src.y))]


def _route_groups(diagram: Diagram, nodes: Dict[str, Placement], out: Layout) -> None:
    for group_id, members in diagram.divergence_groups().items():
        src = nodes[members[0].source.node]
        tx = sum(nodes[e.target.node].x for e in members) / len(members)
        ty = sum(nodes[e.target.node].y for e in members) / len(members)
        start = src.boundary_toward((tx, ty))
        split = ((start[0] + tx) / 2, (start[1] + ty) / 2) if len(members) > 1 else start
        out.trunks[group_id] = [start, split]
        for edge in members:
            end = nodes[edge.target.node].boundary_toward(split)
            out.edges[edge.id] = [split, end]


def layout(diagram: Diagram, config: Optional[LayoutConfig] = None) -> Layout:
    config = config or LayoutConfig()
    units, owner = _units(diagram, config)
    if not units:
        return Layout(width=2 * config.padding, height=2 * config.padding)
    pairs = _unit_edges(diagram, owner)
    place = _force if config.algorithm == "force" else _layered
    centers = place(units, pairs, config)

    nodes: Dict[str, Placement] = {}
    for unit_id, (w, h, shape) in units.items():
        cx, cy = centers[unit_id]
        nodes[unit_id] = Placement(cx, cy, w, h, shape)
    for box in diagram.macro_boxes:
        outer = nodes[box.id]
        sizes, row_width, _ = _member_row(diagram, box.members, config)
        x = outer.x - row_width / 2
        for member, (w, h, shape) in zip(box.members, sizes):
            if member not in nodes:
                nodes[member] = Placement(x + w / 2, outer.y, w, h, shape)
            x += w + config.spacing

    width = max(p.x + p.width / 2 for p in nodes.values()) + config.padding
    height = max(p.y + p.height / 2 for p in nodes.values()) + config.padding
    result = Layout(width=width, height=height, nodes=nodes)

    boundary = [e for g in diagram.repeat_groups for e in g.boundary]
    for edge in [*diagram.edges, *boundary]:
        if edge.divergence_group is None:
            result.edges[edge.id] = _route(edge, nodes)
    _route_groups(diagram, nodes, result)
    logger.debug("laid out %d unit(s) of %s with %s", len(units), diagram.name, config.algorithm)
    return result
