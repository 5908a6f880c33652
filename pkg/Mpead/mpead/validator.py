"""Well-formedness rules for diagrams.

Each rule has a stable code. `validate` returns every violation as a
diagnostic, sorted by rule number and then by source position.
"""
from typing import Dict, Iterable, List, Optional, Tuple

import networkx as nx
from pydantic import BaseModel, ConfigDict

from .builder import derive_border_style
from .schemas import (
    AllBinding,
    Attachment,
    BorderStyle,
    Diagram,
    Edge,
    Endpoint,
    InfoKind,
    ParseDiagnostic,
    Severity,
    SourceSpan,
    is_genetic,
)


class Rule(BaseModel):
    model_config = ConfigDict(frozen=True)

    code: str
    description: str
    severity: Severity


RULES: Dict[str, Rule] = {rule.code: rule for rule in [
    Rule(code="V1", severity=Severity.ERROR,
         description="an all-individuals label ('*') takes no selector"),
    Rule(code="V2", severity=Severity.ERROR,
         description="repeat and grid counts must exceed 2"),
    Rule(code="V3", severity=Severity.ERROR,
         description="inset (migration) edges carry genetic information into a population"),
    Rule(code="V4", severity=Severity.ERROR,
         description="a computation node needs at least one input and one output"),
    Rule(code="V5", severity=Severity.ERROR,
         description="edges of one fan-out share their source endpoint and kind"),
    Rule(code="V6", severity=Severity.ERROR,
         description="edges leaving a computation match its declared output kinds"),
    Rule(code="V7", severity=Severity.ERROR,
         description="evaluative edges into a population say where to store the value"),
    Rule(code="V8", severity=Severity.ERROR,
         description="labels index individuals, so they sit on population endpoints"),
    Rule(code="V9", severity=Severity.WARNING,
         description="a genetic edge ending at a population border is hierarchical composition"),
    Rule(code="V10", severity=Severity.ERROR,
         description="a cycle made only of computation nodes has no state to break it"),
    Rule(code="V11", severity=Severity.ERROR,
         description="a node belongs to at most one macro box"),
    Rule(code="V12", severity=Severity.ERROR,
         description="labels on a macro box border need a box of populations"),
]}


class _Collector:
    def __init__(self):
        self.diagnostics: List[ParseDiagnostic] = []

    def add(self, code: str, message: str, span: Optional[SourceSpan],
            severity: Optional[Severity] = None) -> None:
        self.diagnostics.append(ParseDiagnostic(
            severity=severity or RULES[code].severity, message=message, span=span, code=code,
        ))


def _all_edges(diagram: Diagram) -> List[Edge]:
    boundary = [edge for group in diagram.repeat_groups for edge in group.boundary]
    return [*diagram.edges, *boundary]


def _is_population_like(diagram: Diagram, ref: str) -> bool:
    if diagram.is_population(ref):
        return True
    box = diagram.boxes.get(ref)
    return box is not None and all(diagram.is_population(m) for m in box.members)


def _endpoints(edge: Edge) -> Iterable[Tuple[str, Endpoint]]:
    yield "source", edge.source
    yield "target", edge.target


def _check_labels(diagram: Diagram, edges: List[Edge], out: _Collector) -> None:
    for edge in edges:
        for side, endpoint in _endpoints(edge):
            label = endpoint.label
            if label is None:
                continue
            if isinstance(label.binding, AllBinding) and label.selector is not None:
                out.add("V1", f"label '{label}' on {endpoint.node}: '*' selects every "
                              f"individual, no selector may be given", edge.span)
            if endpoint.node in diagram.boxes:
                if not _is_population_like(diagram, endpoint.node):
                    out.add("V12", f"label '{label}' on macro box {endpoint.node!r} whose "
                                   f"members are not all populations", edge.span)
            elif not diagram.is_population(endpoint.node):
                out.add("V8", f"label '{label}' on {side} {endpoint.node!r}, which is not "
                              f"a population", edge.span)


def _check_repeat_counts(diagram: Diagram, out: _Collector) -> None:
    for group in diagram.repeat_groups:
        for count in group.counts:
            if count <= 2:
                out.add("V2", f"{group.id!r} has count {count}; the ellipsis stands for "
                              f"more than 2 elements", group.span)


def _check_inset(diagram: Diagram, edges: List[Edge], out: _Collector) -> None:
    for edge in edges:
        for side, endpoint in _endpoints(edge):
            if endpoint.attachment != Attachment.INSET:
                continue
            if not is_genetic(edge.kind):
                out.add("V3", f"inset edge {edge.source.node} ~> {edge.target.node} carries "
                              f"{edge.kind.value}; migration moves genetic information", edge.span)
            if side == "source" or not _is_population_like(diagram, endpoint.node):
                out.add("V3", f"inset arrow must end in a population, not {endpoint.node!r}",
                        edge.span)


def _check_computation_io(diagram: Diagram, edges: List[Edge], out: _Collector) -> None:
    incoming: Dict[str, List[Edge]] = {}
    outgoing: Dict[str, List[Edge]] = {}
    for edge in edges:
        incoming.setdefault(edge.target.node, []).append(edge)
        outgoing.setdefault(edge.source.node, []).append(edge)
    for comp in diagram.computations:
        inputs = incoming.get(comp.id, [])
        outputs = outgoing.get(comp.id, [])
        if not inputs:
            out.add("V4", f"computation {comp.id!r} has no input edge", comp.span)
        if not outputs:
            out.add("V4", f"computation {comp.id!r} has no output edge", comp.span)

        declared = set(comp.declared_output_kinds)
        for edge in outputs:
            if edge.kind not in declared:
                kinds = ", ".join(k.value for k in comp.declared_output_kinds)
                out.add("V6", f"edge from {comp.id!r} carries {edge.kind.value}, but the node "
                              f"declares out = {kinds}", edge.span)
        if outputs and len(declared) == 1 and \
                derive_border_style(comp, outputs) == BorderStyle.ALTERNATING:
            out.add("V6", f"computation {comp.id!r} emits mixed kinds but declares only one",
                    comp.span, Severity.WARNING)


def _check_divergence(diagram: Diagram, out: _Collector) -> None:
    for group_id, members in diagram.divergence_groups().items():
        first = members[0]
        for edge in members[1:]:
            if edge.source != first.source or edge.kind != first.kind:
                out.add("V5", f"fan-out {group_id!r} mixes sources or kinds "
                              f"({first.source.node}:{first.kind.value} vs "
                              f"{edge.source.node}:{edge.kind.value})", edge.span)


def _check_storage(diagram: Diagram, edges: List[Edge], out: _Collector) -> None:
    for edge in edges:
        target = edge.target
        if not _is_population_like(diagram, target.node):
            continue
        if edge.kind == InfoKind.EVALUATIVE and target.label is None:
            out.add("V7", f"evaluative edge into {target.node!r} needs a label saying where "
                          f"the value is stored (e.g. {target.node}[i])", edge.span)
        if is_genetic(edge.kind) and target.attachment == Attachment.AT_NODE:
            out.add("V9", f"{edge.kind.value} edge {edge.source.node} -> {target.node} ends at the "
                          f"population border: hierarchical composition, not migration "
                          f"(use '~>' for migration)", edge.span)


def _check_computation_cycles(diagram: Diagram, edges: List[Edge], out: _Collector) -> None:
    graph = nx.DiGraph()
    for edge in edges:
        if diagram.is_computation(edge.source.node) and diagram.is_computation(edge.target.node):
            graph.add_edge(edge.source.node, edge.target.node)
    for component in nx.strongly_connected_components(graph):
        if len(component) > 1 or any(graph.has_edge(n, n) for n in component):
            names = sorted(component)
            span = diagram.nodes[names[0]].span
            out.add("V10", f"computation nodes {', '.join(names)} form a cycle", span)


def _check_macro_membership(diagram: Diagram, out: _Collector) -> None:
    owner: Dict[str, str] = {}
    for box in diagram.macro_boxes:
        for member in box.members:
            if member in owner and owner[member] != box.id:
                out.add("V11", f"{member!r} is in macro boxes {owner[member]!r} and {box.id!r}",
                        box.span)
            owner.setdefault(member, box.id)


def _sort_key(diagnostic: ParseDiagnostic):
    span = diagnostic.span
    position = (0, span.start_line, span.start_col) if span else (1, 0, 0)
    return int(diagnostic.code[1:]), position, diagnostic.message


def validate(diagram: Diagram) -> List[ParseDiagnostic]:
    out = _Collector()
    edges = _all_edges(diagram)
    _check_labels(diagram, edges, out)
    _check_repeat_counts(diagram, out)
    _check_inset(diagram, edges, out)
    _check_computation_io(diagram, edges, out)
    _check_divergence(diagram, out)
    _check_storage(diagram, edges, out)
    _check_computation_cycles(diagram, edges, out)
    _check_macro_membership(diagram, out)
    return sorted(out.diagnostics, key=_sort_key)


def has_errors(diagnostics: Iterable[ParseDiagnostic]) -> bool:
    return any(d.is_error for d in diagnostics)
