"""Canonical text form of a diagram."""
from typing import List, Set

from .errors import ParseFailed
from .parser import parse
from .schemas import (
    Attachment,
    ComputationNode,
    Diagram,
    Edge,
    Endpoint,
    MacroBox,
    PopulationNode,
    RepeatGroup,
)

INDENT = "  "


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _endpoint(endpoint: Endpoint) -> str:
    if endpoint.label is None:
        return endpoint.node
    return f"{endpoint.node}[{endpoint.label}]"


def _arrow(endpoint: Endpoint) -> str:
    return "~>" if endpoint.attachment == Attachment.INSET else "->"


def _population(pop: PopulationNode) -> str:
    attrs = []
    if pop.name != pop.id:
        attrs.append(f"name = {_quote(pop.name)}")
    if pop.size is not None:
        attrs.append(f"size = {pop.size}")
    if pop.genome is not None:
        attrs.append(f"genome = {pop.genome}")
    if pop.algo is not None:
        attrs.append(f"algo = {_quote(pop.algo)}")
    if not attrs:
        return f"population {pop.id}"
    return f"population {pop.id} {{ {' '.join(attrs)} }}"


def _computation(comp: ComputationNode) -> str:
    attrs = []
    if comp.name != comp.id:
        attrs.append(f"name = {_quote(comp.name)}")
    attrs.append(f"fn = {_quote(comp.fn_ref)}")
    kinds = ", ".join(kind.value for kind in comp.declared_output_kinds)
    attrs.append(f"out = {kinds}")
    return f"compute {comp.id} {{ {' '.join(attrs)} }}"


def _edge(edge: Edge) -> str:
    return (f"{_endpoint(edge.source)} {_arrow(edge.target)} "
            f"{_endpoint(edge.target)} : {edge.kind.value}")


def _fan_out(members: List[Edge]) -> str:
    first = members[0]
    targets = ", ".join(_endpoint(edge.target) for edge in members)
    return f"{_endpoint(first.source)} {_arrow(first.target)} {{ {targets} }} : {first.kind.value}"


def _macro(box: MacroBox) -> str:
    return f"macro {box.id} {{ members = [{', '.join(box.members)}] }}"


def _group(group: RepeatGroup) -> List[str]:
    if group.is_grid:
        rows, cols = group.counts
        if group.link_kind is None:
            link = "none"
        else:
            link = group.link_kind.value + (" inset" if group.link_inset else "")
        adjacency = group.adjacency.value if group.adjacency is not None else "von_neumann"
        return [f"grid {group.id} {{ rows = {rows} cols = {cols} template = {group.template} "
                f"adjacency = {adjacency} link = {link} }}"]
    lines = [f"repeat {group.id} {{", f"{INDENT}count = {group.counts[0]}",
             f"{INDENT}template = {group.template}"]
    lines += [f"{INDENT}edge {_edge(edge)}" for edge in group.boundary]
    lines.append("}")
    return lines


def serialize(diagram: Diagram) -> str:
    """Canonical text: populations, computations, edges, boxes, groups."""
    lines: List[str] = []
    lines += [_population(pop) for pop in diagram.populations]
    lines += [_computation(comp) for comp in diagram.computations]

    groups = diagram.divergence_groups()
    emitted: Set[str] = set()
    for edge in diagram.edges:
        if edge.divergence_group is None:
            lines.append(_edge(edge))
        elif edge.divergence_group not in emitted:
            emitted.add(edge.divergence_group)
            lines.append(_fan_out(groups[edge.divergence_group]))

    lines += [_macro(box) for box in diagram.macro_boxes]
    for group in diagram.repeat_groups:
        lines += _group(group)

    body = "".join(f"{INDENT}{line}\n" for line in lines)
    return f"diagram {diagram.name} {{\n{body}}}\n"


def format_source(text: str, file: str = "<input>") -> str:
    """serialize(parse(text)); raises ParseFailed when the text has errors."""
    result = parse(text, file)
    if not result.ok:
        raise ParseFailed(result.errors)
    return serialize(result.diagram)


format = format_source
