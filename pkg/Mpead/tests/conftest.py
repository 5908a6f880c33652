from pathlib import Path

import pytest

from mpead.parser import load_diagram, parse

CORPUS = Path(__file__).resolve().parents[1] / "corpus"

FIGURES = sorted(path.stem for path in CORPUS.glob("fig*.mpead"))
ALL_FILES = sorted(path.stem for path in CORPUS.glob("*.mpead"))


def corpus_path(name: str) -> Path:
    return CORPUS / f"{name}.mpead"


def corpus(name: str):
    return load_diagram(corpus_path(name))


def diagram_of(body: str, name: str = "t"):
    """Parse a diagram body that is expected to be free of errors."""
    result = parse(f"diagram {name} {{\n{body}\n}}\n")
    assert result.ok, [d.render() for d in result.diagnostics]
    return result.diagram


@pytest.fixture
def onemax():
    return corpus("fig2a_onemax")
