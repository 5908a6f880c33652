"""Lowering of macro boxes and repeat groups into a flat graph.

Macro boxes: an edge ending at a box border is copied once per member
(`<edge>@<member>`). A computation node whose every edge ends at the same box
is duplicated along with its edges (`<node>@<member>`), so each member gets
its own evaluation; other external elements are shared by all members.

Repeat groups: the template population is copied once per index together
with its private attachments, i.e. the nodes hanging off the template whose
every edge stays inside that cluster. Copies are suffixed `_k` (repeat) or
`_r_c` (grid). Edges to shared nodes and the group's boundary patterns are
instantiated per index; grids then add link edges between neighbors.
"""
import logging
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from pydantic import BaseModel, ConfigDict

from .builder import build_diagram
from .errors import AdjacencyUnknown, BoxTargetAmbiguous, TemplateUnresolved
from .schemas import (
    Adjacency,
    Attachment,
    ComputationNode,
    Diagram,
    Edge,
    Endpoint,
    FlatGraph,
    IndexVar,
    InfoKind,
    PopulationNode,
    RepeatGroup,
)

logger = logging.getLogger(__name__)

NEIGHBOR_OFFSETS = {
    Adjacency.VON_NEUMANN: [(-1, 0), (0, -1), (0, 1), (1, 0)],
    Adjacency.MOORE: [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)],
}


class GraphStats(BaseModel):
    model_config = ConfigDict(frozen=True)

    populations: int = 0
    computations: int = 0
    edges: int = 0
    edges_by_kind: Dict[str, int] = {}
    migration_edges: int = 0

    def lines(self) -> List[str]:
        out = [
            f"populations: {self.populations}",
            f"computations: {self.computations}",
            f"edges: {self.edges}",
        ]
        out += [f"edges ({kind}): {count}" for kind, count in self.edges_by_kind.items()]
        out.append(f"migration edges: {self.migration_edges}")
        return out


# Macro boxes

def _incident(edges: Iterable[Edge]) -> Dict[str, List[Tuple[Edge, str]]]:
    """node -> [(edge, other endpoint)]"""
    index: Dict[str, List[Tuple[Edge, str]]] = {}
    for edge in edges:
        index.setdefault(edge.source.node, []).append((edge, edge.target.node))
        index.setdefault(edge.target.node, []).append((edge, edge.source.node))
    return index


def _private_to_box(diagram: Diagram) -> Dict[str, str]:
    """computation id -> box id, for computations wired only to one box border."""
    members = {m for box in diagram.macro_boxes for m in box.members}
    boundary = [e for g in diagram.repeat_groups for e in g.boundary]
    incident = _incident([*diagram.edges, *boundary])
    private: Dict[str, str] = {}
    for comp in diagram.computations:
        links = incident.get(comp.id, [])
        others = {other for _, other in links}
        if comp.id in members or len(others) != 1:
            continue
        (other,) = others
        if other in diagram.boxes:
            private[comp.id] = other
    return private


def _copy_endpoint(endpoint: Endpoint, node: str) -> Endpoint:
    return endpoint.model_copy(update={"node": node})


def _expand_box_edge(edge: Edge, diagram: Diagram, private: Dict[str, str]) -> List[Edge]:
    boxes = diagram.boxes
    src_box = boxes.get(edge.source.node)
    tgt_box = boxes.get(edge.target.node)
    if src_box is None and tgt_box is None:
        return [edge]

    if src_box is not None and tgt_box is not None:
        return [
            edge.model_copy(update={
                "id": f"{edge.id}@{a}-{b}",
                "source": _copy_endpoint(edge.source, a),
                "target": _copy_endpoint(edge.target, b),
            })
            for a in src_box.members for b in tgt_box.members
        ]

    box_side, outer_side = ("source", "target") if src_box is not None else ("target", "source")
    box = src_box or tgt_box
    box_endpoint: Endpoint = getattr(edge, box_side)
    outer_endpoint: Endpoint = getattr(edge, outer_side)
    duplicated = private.get(outer_endpoint.node) == box.id and len(box.members) > 1

    if isinstance(getattr(box_endpoint.label, "binding", None), IndexVar) and \
            private.get(outer_endpoint.node) != box.id:
        raise BoxTargetAmbiguous(
            f"edge {edge.source.node} -> {edge.target.node} carries index label "
            f"'{box_endpoint.label}' at the border of {box.id!r}, but "
            f"{outer_endpoint.node!r} is shared by all members"
        )

    copies = []
    for member in box.members:
        outer_node = f"{outer_endpoint.node}@{member}" if duplicated else outer_endpoint.node
        group = edge.divergence_group
        if duplicated and group is not None:
            group = f"{group}@{member}"
        copies.append(edge.model_copy(update={
            "id": f"{edge.id}@{member}",
            box_side: _copy_endpoint(box_endpoint, member),
            outer_side: _copy_endpoint(outer_endpoint, outer_node),
            "divergence_group": group,
        }))
    return copies


def expand_macros(diagram: Diagram) -> Diagram:
    """Replace every box-border edge by one copy per box member."""
    if not diagram.macro_boxes:
        return diagram
    private = _private_to_box(diagram)

    computations: List[ComputationNode] = []
    for comp in diagram.computations:
        box_id = private.get(comp.id)
        members = diagram.boxes[box_id].members if box_id else ()
        if len(members) > 1:
            computations += [comp.model_copy(update={"id": f"{comp.id}@{m}"}) for m in members]
        else:
            computations.append(comp)

    edges = [copy for edge in diagram.edges for copy in _expand_box_edge(edge, diagram, private)]
    groups = [
        group.model_copy(update={"boundary": tuple(
            copy for edge in group.boundary for copy in _expand_box_edge(edge, diagram, private)
        )})
        for group in diagram.repeat_groups
    ]
    expanded = build_diagram(diagram.name, diagram.populations, computations, edges,
                             (), groups)
    logger.info("expanded %d macro box(es) of %s: %d -> %d edges",
                len(diagram.macro_boxes), diagram.name, len(diagram.edges), len(edges))
    return expanded


# Repeat groups

def _attachments(template: str, edges: Sequence[Edge], boundary: Sequence[Edge],
                 excluded: Set[str]) -> Set[str]:
    """Nodes private to the template: every edge of theirs stays in the cluster."""
    incident = _incident(edges)
    external = {e.source.node for e in boundary} | {e.target.node for e in boundary}
    cluster = {n for n in incident if n != template and n not in excluded and n not in external}

    changed = True
    while changed:
        changed = False
        for node in sorted(cluster):
            if any(other not in cluster and other != template for _, other in incident[node]):
                cluster.discard(node)
                changed = True

    reached: Set[str] = set()
    frontier = [template]
    while frontier:
        current = frontier.pop()
        for _, other in incident.get(current, []):
            if other in cluster and other not in reached:
                reached.add(other)
                frontier.append(other)
    return reached


def _instances(group: RepeatGroup) -> List[Tuple[Tuple[int, ...], str]]:
    if group.is_grid:
        rows, cols = group.counts
        return [((r, c), f"_{r}_{c}") for r in range(rows) for c in range(cols)]
    return [((k,), f"_{k}") for k in range(group.counts[0])]


def _neighbors(index: Tuple[int, ...], group: RepeatGroup) -> List[Tuple[int, ...]]:
    adjacency = group.adjacency or Adjacency.VON_NEUMANN
    if adjacency not in NEIGHBOR_OFFSETS:
        raise AdjacencyUnknown(f"{group.id!r}: unknown adjacency {adjacency!r}")
    if not group.is_grid:
        (k,) = index
        return [(j,) for j in (k - 1, k + 1) if 0 <= j < group.counts[0]]
    rows, cols = group.counts
    r, c = index
    return [
        (r + dr, c + dc) for dr, dc in NEIGHBOR_OFFSETS[adjacency]
        if 0 <= r + dr < rows and 0 <= c + dc < cols
    ]


def _rename(edge: Edge, rename: Dict[str, str], suffix: str, members: Set[str]) -> Edge:
    group = edge.divergence_group
    if group is not None and edge.source.node in members:
        group = f"{group}{suffix}"
    return edge.model_copy(update={
        "id": f"{edge.id}{suffix}",
        "source": _copy_endpoint(edge.source, rename.get(edge.source.node, edge.source.node)),
        "target": _copy_endpoint(edge.target, rename.get(edge.target.node, edge.target.node)),
        "divergence_group": group,
    })


def _splice(items: List, removed: Set[str], additions: List) -> List:
    """Drop removed ids and put the additions where the first one was."""
    position: Optional[int] = None
    kept = []
    for item in items:
        if item.id in removed:
            if position is None:
                position = len(kept)
        else:
            kept.append(item)
    if position is None:
        position = len(kept)
    return kept[:position] + additions + kept[position:]


def _expand_group(group: RepeatGroup, populations: List[PopulationNode],
                  computations: List[ComputationNode], edges: List[Edge],
                  other_templates: Set[str]):
    template = group.template
    if template not in {p.id for p in populations}:
        raise TemplateUnresolved(f"{group.id!r}: template population {template!r} not found")
    if group.adjacency is not None and group.adjacency not in NEIGHBOR_OFFSETS:
        raise AdjacencyUnknown(f"{group.id!r}: unknown adjacency {group.adjacency!r}")

    private = _attachments(template, edges, group.boundary, other_templates)
    members = {template} | private
    touched = [e for e in edges if e.source.node in members or e.target.node in members]
    touched_ids = {e.id for e in touched}

    new_pops: List[PopulationNode] = []
    new_comps: List[ComputationNode] = []
    new_edges: List[Edge] = []
    for _, suffix in _instances(group):
        rename = {m: f"{m}{suffix}" for m in members}
        for pop in populations:
            if pop.id in members:
                name = rename[pop.id] if pop.name == pop.id else pop.name
                new_pops.append(pop.model_copy(update={"id": rename[pop.id], "name": name}))
        for comp in computations:
            if comp.id in members:
                new_comps.append(comp.model_copy(update={"id": rename[comp.id]}))
        for edge in [*touched, *group.boundary]:
            new_edges.append(_rename(edge, rename, suffix, members))

    if group.link_kind is not None:
        suffixes = dict(_instances(group))
        attachment = Attachment.INSET if group.link_inset else Attachment.AT_NODE
        for index, suffix in _instances(group):
            for neighbor in _neighbors(index, group):
                src, dst = f"{template}{suffix}", f"{template}{suffixes[neighbor]}"
                new_edges.append(Edge(
                    id=f"{group.id}@{src}-{dst}",
                    source=Endpoint(node=src),
                    target=Endpoint(node=dst, attachment=attachment),
                    kind=group.link_kind,
                ))

    populations = _splice(populations, members, new_pops)
    computations = _splice(computations, members, new_comps)
    edges = _splice(edges, touched_ids, new_edges)
    return populations, computations, edges


def expand_repeats(diagram: Diagram) -> FlatGraph:
    """Instantiate every repeat group; the result holds no groups or boxes."""
    if isinstance(diagram, FlatGraph):
        return diagram
    diagram = expand_macros(diagram)
    populations = list(diagram.populations)
    computations = list(diagram.computations)
    edges = list(diagram.edges)
    templates = {g.template for g in diagram.repeat_groups}
    for group in diagram.repeat_groups:
        populations, computations, edges = _expand_group(
            group, populations, computations, edges, templates - {group.template},
        )
        logger.info("expanded %s %r: %d instance(s)",
                    "grid" if group.is_grid else "repeat", group.id, group.total)
    return build_diagram(diagram.name, populations, computations, edges, flat=True)


def expand(diagram: Diagram) -> FlatGraph:
    return expand_repeats(expand_macros(diagram))


def stats(flat: Diagram) -> GraphStats:
    by_kind = {kind.value: 0 for kind in InfoKind}
    for edge in flat.edges:
        by_kind[edge.kind.value] += 1
    return GraphStats(
        populations=len(flat.populations),
        computations=len(flat.computations),
        edges=len(flat.edges),
        edges_by_kind=by_kind,
        migration_edges=sum(1 for edge in flat.edges if edge.is_inset),
    )


def flat_to_json(flat: Diagram) -> dict:
    nodes = [
        {"id": p.id, "type": "population", "name": p.name, "size": p.size,
         "genome": str(p.genome) if p.genome else None, "algo": p.algo}
        for p in flat.populations
    ]
    nodes += [
        {"id": c.id, "type": "computation", "name": c.name, "fn": c.fn_ref,
         "out": [k.value for k in c.declared_output_kinds]}
        for c in flat.computations
    ]
    edges = [
        {
            "id": e.id,
            "source": e.source.node,
            "target": e.target.node,
            "kind": e.kind.value,
            "source_label": str(e.source.label) if e.source.label else None,
            "target_label": str(e.target.label) if e.target.label else None,
            "attachment": e.target.attachment.value,
            "divergence_group": e.divergence_group,
        }
        for e in flat.edges
    ]
    return {"name": flat.name, "nodes": nodes, "edges": edges}
