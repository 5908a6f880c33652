"""Diagram construction and the small pure operations on the diagram model."""
from collections import Counter
from typing import Iterable, List, Optional, Sequence

from .errors import DanglingReference, DuplicateId
from .schemas import (
    BorderStyle,
    ComputationNode,
    Diagram,
    Edge,
    FlatGraph,
    InfoKind,
    MacroBox,
    PopulationNode,
    RepeatGroup,
    is_genetic,
)


def derive_border_style(node: ComputationNode, outgoing: Sequence[Edge]) -> BorderStyle:
    kinds = [edge.kind for edge in outgoing] or list(node.declared_output_kinds)
    return border_style_for(kinds)


def border_style_for(kinds: Iterable[InfoKind]) -> BorderStyle:
    kinds = set(kinds)
    if all(is_genetic(kind) for kind in kinds):
        return BorderStyle.SOLID
    if kinds == {InfoKind.EVALUATIVE}:
        return BorderStyle.DASHED
    return BorderStyle.ALTERNATING


def build_diagram(
    name: str,
    populations: Sequence[PopulationNode] = (),
    computations: Sequence[ComputationNode] = (),
    edges: Sequence[Edge] = (),
    macro_boxes: Sequence[MacroBox] = (),
    repeat_groups: Sequence[RepeatGroup] = (),
    flat: bool = False,
) -> Diagram:
    """Assemble a diagram, checking only that ids are unique and resolve."""
    seen = set()
    for element in [*populations, *computations, *macro_boxes, *repeat_groups]:
        if element.id in seen:
            raise DuplicateId(element.id)
        seen.add(element.id)

    edge_ids = set()
    for edge in edges:
        if edge.id in edge_ids:
            raise DuplicateId(edge.id)
        edge_ids.add(edge.id)

    node_ids = {p.id for p in populations} | {c.id for c in computations}
    endpoint_ids = node_ids | {box.id for box in macro_boxes}

    for edge in edges:
        for endpoint in (edge.source, edge.target):
            if endpoint.node not in endpoint_ids:
                raise DanglingReference(endpoint.node, f"edge {edge.id}")

    for box in macro_boxes:
        for member in box.members:
            if member not in node_ids:
                raise DanglingReference(member, f"macro {box.id}")

    population_ids = {p.id for p in populations}
    for group in repeat_groups:
        if group.template not in population_ids:
            raise DanglingReference(group.template, f"repeat {group.id}")
        for edge in group.boundary:
            for endpoint in (edge.source, edge.target):
                if endpoint.node not in endpoint_ids:
                    raise DanglingReference(endpoint.node, f"repeat {group.id}")

    model = FlatGraph if flat else Diagram
    return model(
        name=name,
        populations=tuple(populations),
        computations=tuple(computations),
        edges=tuple(edges),
        macro_boxes=tuple(macro_boxes),
        repeat_groups=tuple(repeat_groups),
    )


def infer_output_kinds(node_id: str, edges: Sequence[Edge]) -> List[InfoKind]:
    kinds: List[InfoKind] = []
    for edge in edges:
        if edge.source.node == node_id and edge.kind not in kinds:
            kinds.append(edge.kind)
    return kinds or [InfoKind.EVALUATIVE]


def _edge_key(edge: Edge) -> str:
    return "|".join([
        edge.source.model_dump_json(),
        edge.target.model_dump_json(),
        edge.kind.value,
    ])


def _group_partition(diagram: Diagram) -> Counter:
    return Counter(
        tuple(sorted(_edge_key(edge) for edge in members))
        for members in diagram.divergence_groups().values()
    )


def structurally_equal(a: Diagram, b: Optional[Diagram]) -> bool:
    """Compare two diagrams ignoring spans, edge ids and group ids."""
    if b is None:
        return False
    if a.name != b.name:
        return False
    for attr in ("populations", "computations", "macro_boxes"):
        if [x.model_dump() for x in getattr(a, attr)] != [x.model_dump() for x in getattr(b, attr)]:
            return False
    if Counter(map(_edge_key, a.edges)) != Counter(map(_edge_key, b.edges)):
        return False
    if _group_partition(a) != _group_partition(b):
        return False
    if len(a.repeat_groups) != len(b.repeat_groups):
        return False
    for left, right in zip(a.repeat_groups, b.repeat_groups):
        if left.model_dump(exclude={"boundary"}) != right.model_dump(exclude={"boundary"}):
            return False
        if Counter(map(_edge_key, left.boundary)) != Counter(map(_edge_key, right.boundary)):
            return False
    return True
