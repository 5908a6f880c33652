import pytest

from mpead.builder import build_diagram
from mpead.schemas import ComputationNode, Edge, EdgeLabel, Endpoint, IndexVar, InfoKind, PopulationNode
from mpead.validator import RULES, has_errors, validate

from .conftest import ALL_FILES, corpus, diagram_of

BASE = """
population P { size = 10 genome = bits(8) }
compute F { fn = "onemax" out = eval }
F -> P[i] : eval
"""

CASES = {
    "V1": BASE + "P[*/rand] -> F : geno",
    "V2": BASE + "P[i] -> F : geno\nrepeat R { count = 2 template = P }",
    "V3": BASE + "P ~> F : geno",
    "V4": BASE + 'P[i] -> F : geno\ncompute G { fn = "onemax" out = eval }',
    "V6": 'population P\ncompute F { fn = "onemax" out = pheno }\nP[i] -> F : geno\nF -> P[i] : eval',
    "V7": 'population P\ncompute F { fn = "onemax" out = eval }\nP[i] -> F : geno\nF -> P : eval',
    "V8": BASE + "P[i] -> F[j] : geno",
    "V9": BASE + "P[i] -> F : geno\npopulation Q\nP -> Q : geno",
    "V10": BASE + 'P[i] -> F : geno\ncompute G { fn = "modify" out = eval }\nF -> G : eval\nG -> F : eval',
    "V11": BASE + "P[i] -> F : geno\nmacro M { members = [P] }\nmacro N { members = [P] }",
    "V12": BASE + "P[i] -> F : geno\nmacro M { members = [P, F] }\nM[i] -> F : geno",
}


def test_base_is_clean():
    assert validate(diagram_of(BASE + "P[i] -> F : geno")) == []


@pytest.mark.parametrize("code", sorted(CASES, key=lambda c: int(c[1:])))
def test_rule(code):
    "each fixture breaks exactly one rule"
    diagnostics = validate(diagram_of(CASES[code]))
    assert {d.code for d in diagnostics} == {code}
    assert all(d.severity == RULES[code].severity for d in diagnostics)


def test_inset_into_population_needs_genetic_kind():
    diagram = diagram_of(BASE + "P[i] -> F : geno\npopulation Q\nF ~> Q[i] : eval")
    assert {d.code for d in validate(diagram)} == {"V3"}


def test_fan_out_mixing_sources():
    "fan-outs are always uniform from source text, so build one by hand"
    label = EdgeLabel(binding=IndexVar(letter="i"))

    def edge(edge_id, src, dst, kind, group=None, dst_label=None):
        return Edge(id=edge_id, source=Endpoint(node=src),
                    target=Endpoint(node=dst, label=dst_label), kind=kind, divergence_group=group)

    diagram = build_diagram(
        "d",
        [PopulationNode(id="P")],
        [ComputationNode(id=f, fn_ref="onemax", declared_output_kinds=(InfoKind.EVALUATIVE,))
         for f in ("F", "G")],
        [
            edge("e1", "P", "F", InfoKind.GENOTYPIC),
            edge("e2", "P", "G", InfoKind.GENOTYPIC),
            edge("e3", "F", "P", InfoKind.EVALUATIVE, "g1", label),
            edge("e4", "G", "P", InfoKind.EVALUATIVE, "g1", label),
        ],
    )
    assert [d.code for d in validate(diagram)] == ["V5"]


def test_only_warnings_are_not_errors():
    diagnostics = validate(diagram_of(CASES["V9"]))
    assert diagnostics
    assert not has_errors(diagnostics)


def test_mixed_output_warning():
    diagram = diagram_of(
        'population P\npopulation Q\ncompute F { fn = "f" out = eval }\n'
        "P[i] -> F : geno\nF -> P[i] : eval\nF -> Q : pheno"
    )
    found = [(d.code, d.severity.value) for d in validate(diagram)]
    assert ("V6", "error") in found
    assert ("V6", "warning") in found


def test_sorted_by_rule_then_position():
    text = BASE + "P[i] -> F : geno\nF -> P : eval\nrepeat R { count = 1 template = P }\nF -> P : eval"
    diagnostics = validate(diagram_of(text))
    assert [d.code for d in diagnostics] == ["V2", "V7", "V7"]
    lines = [d.span.start_line for d in diagnostics if d.code == "V7"]
    assert lines == sorted(lines)


def test_boundary_edges_count_as_inputs():
    text = BASE + 'P[i] -> F : geno\npopulation T\ncompute G { fn = "onemax" out = eval }\n' \
                  "repeat R { count = 3 template = P edge P -> G : geno edge G -> T[i] : eval }"
    assert validate(diagram_of(text)) == []


@pytest.mark.parametrize("name", ALL_FILES)
def test_corpus_has_no_errors(name):
    assert not has_errors(validate(corpus(name)))
