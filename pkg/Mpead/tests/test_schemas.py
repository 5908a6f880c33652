import pytest
from pydantic import ValidationError

from mpead.builder import border_style_for, build_diagram, derive_border_style, structurally_equal
from mpead.errors import DanglingReference, DuplicateId
from mpead.schemas import (
    AllBinding,
    BorderStyle,
    ComputationNode,
    Count,
    Edge,
    EdgeLabel,
    Endpoint,
    FlatGraph,
    IndexVar,
    InfoKind,
    MacroBox,
    PopulationNode,
    RepeatGroup,
    SourceSpan,
)


def comp(node_id, *kinds):
    return ComputationNode(id=node_id, fn_ref="f", declared_output_kinds=kinds or (InfoKind.EVALUATIVE,))


def edge(edge_id, src, dst, kind=InfoKind.EVALUATIVE, group=None):
    return Edge(id=edge_id, source=Endpoint(node=src), target=Endpoint(node=dst),
                kind=kind, divergence_group=group)


@pytest.mark.parametrize("kinds, style", [
    ([InfoKind.GENOTYPIC], BorderStyle.SOLID),
    ([InfoKind.PHENOTYPIC, InfoKind.GENOTYPIC], BorderStyle.SOLID),
    ([InfoKind.EVALUATIVE], BorderStyle.DASHED),
    ([InfoKind.EVALUATIVE, InfoKind.PHENOTYPIC], BorderStyle.ALTERNATING),
])
def test_border_style(kinds, style):
    assert border_style_for(kinds) == style


def test_border_style_from_edges():
    "outgoing edge kinds decide the border, declared kinds are the fallback"
    node = comp("D", InfoKind.PHENOTYPIC)
    assert derive_border_style(node, []) == BorderStyle.SOLID
    mixed = [edge("e1", "D", "P", InfoKind.PHENOTYPIC), edge("e2", "D", "Q", InfoKind.EVALUATIVE)]
    assert derive_border_style(node, mixed) == BorderStyle.ALTERNATING


def test_build_minimal():
    diagram = build_diagram("d", [PopulationNode(id="P")], [comp("F")],
                            [edge("e1", "P", "F", InfoKind.GENOTYPIC), edge("e2", "F", "P")])
    assert set(diagram.nodes) == {"P", "F"}
    assert diagram.is_population("P")
    assert diagram.is_computation("F")
    assert [e.id for e in diagram.outgoing("F")] == ["e2"]


def test_build_dangling():
    with pytest.raises(DanglingReference) as err:
        build_diagram("d", [PopulationNode(id="P")], [], [edge("e1", "P", "Q")])
    assert err.value.code == "E101"
    assert "Q" in str(err.value)


def test_build_duplicate_node():
    with pytest.raises(DuplicateId):
        build_diagram("d", [PopulationNode(id="P")], [comp("P")])


def test_build_duplicate_edge():
    with pytest.raises(DuplicateId):
        build_diagram("d", [PopulationNode(id="P"), PopulationNode(id="Q")], [],
                      [edge("e1", "P", "Q"), edge("e1", "Q", "P")])


def test_build_box_member_dangling():
    with pytest.raises(DanglingReference):
        build_diagram("d", [PopulationNode(id="P")], [], [], [MacroBox(id="M", members=("X",))])


def test_build_template_must_be_population():
    with pytest.raises(DanglingReference):
        build_diagram("d", [], [comp("F")], [], [],
                      [RepeatGroup(id="R", template="F", counts=(3,))])


def test_flat_rejects_groups():
    with pytest.raises(ValidationError):
        FlatGraph(name="x", populations=(PopulationNode(id="P"),),
                  repeat_groups=(RepeatGroup(id="R", template="P", counts=(3,)),))


def test_label_text():
    assert str(EdgeLabel(binding=IndexVar(letter="i"))) == "i"
    assert str(EdgeLabel(binding=Count(lo=10, hi=10), selector="rand")) == "10/rand"
    assert str(EdgeLabel(binding=Count(lo=1, hi=10))) == "1..10"
    assert str(EdgeLabel(binding=AllBinding())) == "*"


def test_label_invariants():
    with pytest.raises(ValidationError):
        IndexVar(letter="ij")
    with pytest.raises(ValidationError):
        Count(lo=5, hi=2)
    with pytest.raises(ValidationError):
        SourceSpan(start_line=3, start_col=1, end_line=2, end_col=1)


def test_models_are_frozen():
    pop = PopulationNode(id="P", size=10)
    with pytest.raises(ValidationError):
        pop.size = 20
    assert pop.name == "P"


def test_structural_equality_ignores_ids_and_spans():
    span = SourceSpan(start_line=1, start_col=1, end_line=1, end_col=5)
    pops = [PopulationNode(id="P"), PopulationNode(id="Q", span=span)]
    a = build_diagram("d", pops, [], [edge("e1", "P", "Q", group="g1"), edge("e2", "P", "P", group="g1")])
    b = build_diagram("d", pops[:1] + [PopulationNode(id="Q")], [],
                      [edge("x2", "P", "P", group="h"), edge("x1", "P", "Q", group="h")])
    assert structurally_equal(a, b)
    c = build_diagram("d", pops, [], [edge("e1", "P", "Q"), edge("e2", "P", "P")])
    assert not structurally_equal(a, c)
    assert not structurally_equal(a, None)
