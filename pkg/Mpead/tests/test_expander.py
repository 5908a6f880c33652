import pytest

from mpead.errors import BoxTargetAmbiguous, TemplateUnresolved
from mpead.expander import expand, expand_macros, expand_repeats, flat_to_json, stats
from mpead.schemas import Diagram, FlatGraph, InfoKind, PopulationNode, RepeatGroup
from mpead.serializer import serialize
from mpead.parser import parse
from mpead.validator import has_errors, validate

from .conftest import corpus, diagram_of


@pytest.mark.parametrize("name, populations, migrations", [
    ("fig6_grid3x3", 9, 24),
    ("fig7_grid32", 1024, 3968),
    ("fig8_sefrioui25", 25, 48),
    ("sefrioui7", 7, 12),
])
def test_population_counts(name, populations, migrations):
    flat = expand(corpus(name))
    counted = stats(flat)
    assert counted.populations == populations
    assert counted.migration_edges == migrations
    assert isinstance(flat, FlatGraph)


def test_grid_per_island_evaluator():
    "the evaluator hangs off the template only, so every island gets a copy"
    flat = expand(corpus("fig6_grid3x3"))
    assert {c.id for c in flat.computations} == {f"F_{r}_{c}" for r in range(3) for c in range(3)}
    assert {p.id for p in flat.populations} == {f"P_{r}_{c}" for r in range(3) for c in range(3)}
    corner = [e for e in flat.edges if e.is_inset and e.source.node == "P_0_0"]
    assert sorted(e.target.node for e in corner) == ["P_0_1", "P_1_0"]
    assert "Islands@P_1_1-P_0_1" in {e.id for e in flat.edges}
    counted = stats(flat)
    assert counted.edges == 18 + 24
    assert counted.edges_by_kind == {"geno": 9 + 24, "pheno": 0, "eval": 9}


def test_moore_adjacency():
    flat = expand(diagram_of(
        "population P\ngrid G { rows = 3 cols = 3 template = P adjacency = moore link = geno }"
    ))
    # 4 corners x 3 + 4 sides x 5 + centre x 8
    assert len(flat.edges) == 40
    assert not any(e.is_inset for e in flat.edges)


def test_repeat_boundary():
    flat = expand(diagram_of(
        "population P\npopulation E\nrepeat R { count = 3 template = P edge P ~> E : geno }"
    ))
    assert [p.id for p in flat.populations] == ["P_0", "P_1", "P_2", "E"]
    assert [(e.source.node, e.target.node) for e in flat.edges] == \
        [("P_0", "E"), ("P_1", "E"), ("P_2", "E")]
    assert len({e.id for e in flat.edges}) == 3


def test_repeat_shared_source():
    "edges from nodes outside the template's subtree are instantiated per copy"
    flat = expand(diagram_of(
        'population P\npopulation S\ncompute F { fn = "onemax" out = eval }\n'
        "population T\nS[i] -> F : geno\nF -> S[i] : eval\nS ~> P : geno\nS ~> T : geno\n"
        "repeat R { count = 4 template = P }"
    ))
    assert sorted(e.target.node for e in flat.edges if e.is_inset) == ["P_0", "P_1", "P_2", "P_3", "T"]
    assert [c.id for c in flat.computations] == ["F"]


def test_sefrioui25_subtrees():
    flat = expand(corpus("fig8_sefrioui25"))
    ids = {p.id for p in flat.populations}
    assert "Top" in ids
    assert {f"Mid_{k}" for k in range(8)} <= ids
    assert {f"La_{k}" for k in range(8)} | {f"Lb_{k}" for k in range(8)} <= ids
    assert "Flo@La_3" in {c.id for c in flat.computations}
    assert len(flat.computations) == 1 + 3 * 8
    up = [e for e in flat.edges if e.is_inset and e.target.node == "Top"]
    assert sorted(e.source.node for e in up) == sorted(f"Mid_{k}" for k in range(8))


def test_macro_duplicates_private_computation():
    flat = expand(corpus("sefrioui7"))
    assert {c.id for c in flat.computations} == {
        "Fhi", "Fmid@Mid1", "Fmid@Mid2", "Flo@Leaf1", "Flo@Leaf2", "Flo@Leaf3", "Flo@Leaf4",
    }
    copies = {c.id: c.fn_ref for c in flat.computations}
    assert copies["Flo@Leaf3"] == copies["Fmid@Mid1"] == "coarse_onemax"
    into_leaf = [e for e in flat.edges if e.target.node == "Leaf2" and e.kind == InfoKind.EVALUATIVE]
    assert [e.source.node for e in into_leaf] == ["Flo@Leaf2"]
    assert str(into_leaf[0].target.label) == "i"


def test_macro_shared_node():
    "a node used by other things is shared by all members"
    diagram = expand_macros(diagram_of(
        'population A\npopulation B\npopulation C\ncompute F { fn = "coop_eval" out = eval }\n'
        "macro M { members = [A, B] }\nM -> F : geno\nC -> F : geno\nF -> C[i] : eval"
    ))
    assert [c.id for c in diagram.computations] == ["F"]
    assert [(e.id, e.source.node) for e in diagram.edges[:2]] == [("e1@A", "A"), ("e1@B", "B")]
    assert not diagram.macro_boxes


def test_box_to_box():
    diagram = expand_macros(diagram_of(
        "population A\npopulation B\npopulation C\npopulation D\n"
        "macro M { members = [A, B] }\nmacro N { members = [C, D] }\nM ~> N : geno"
    ))
    assert [(e.source.node, e.target.node) for e in diagram.edges] == \
        [("A", "C"), ("A", "D"), ("B", "C"), ("B", "D")]


def test_box_index_on_shared_node():
    diagram = diagram_of(
        "population A\npopulation B\npopulation Q\n"
        "macro M { members = [A, B] }\nQ -> M[i] : geno"
    )
    with pytest.raises(BoxTargetAmbiguous):
        expand(diagram)


def test_template_unresolved():
    diagram = Diagram(name="d", populations=(PopulationNode(id="P"),),
                      repeat_groups=(RepeatGroup(id="R", template="X", counts=(3,)),))
    with pytest.raises(TemplateUnresolved):
        expand_repeats(diagram)


def test_expand_is_idempotent():
    flat = expand(corpus("fig6_grid3x3"))
    assert expand(flat) is flat


@pytest.mark.parametrize("name", ["fig6_grid3x3", "fig8_sefrioui25", "sefrioui7"])
def test_expanded_still_valid(name):
    flat = expand(corpus(name))
    assert not has_errors(validate(flat))
    again = parse(serialize(flat))
    assert again.ok
    assert len(again.diagram.populations) == len(flat.populations)


def test_flat_json():
    document = flat_to_json(expand(corpus("fig2a_onemax")))
    assert document["name"] == "fig2a_onemax"
    assert [n["id"] for n in document["nodes"]] == ["P", "F"]
    assert document["nodes"][0]["genome"] == "bits(30)"
    assert document["edges"][0] == {
        "id": "e1", "source": "P", "target": "F", "kind": "geno",
        "source_label": "i", "target_label": None, "attachment": "at_node",
        "divergence_group": None,
    }


def test_stats_lines():
    lines = stats(expand(corpus("fig6_grid3x3"))).lines()
    assert lines[0] == "populations: 9"
    assert lines[-1] == "migration edges: 24"
