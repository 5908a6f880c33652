import json

import pytest
from click.testing import CliRunner

from mpead.main import cli

from .conftest import corpus_path


@pytest.fixture
def runner():
    return CliRunner(mix_stderr=False)


def invoke(runner, *args):
    return runner.invoke(cli, ["--quiet", *map(str, args)])


def test_check_ok(runner):
    result = invoke(runner, "check", corpus_path("fig2a_onemax"), corpus_path("fig6_grid3x3"))
    assert result.exit_code == 0


def test_check_warnings_only(runner):
    result = invoke(runner, "check", corpus_path("fig1_samples"))
    assert result.exit_code == 0
    assert "[V9] warning:" in result.stderr


def test_check_rule_violation(runner, tmp_path):
    path = tmp_path / "bad.mpead"
    path.write_text('diagram bad {\n  population P\n  compute F { fn = "onemax" }\n'
                    "  P[*/rand] -> F : geno\n  F -> P[i] : eval\n}\n")
    result = invoke(runner, "check", path)
    assert result.exit_code == 1
    assert f"{path}:4:3: [V1]" in result.stderr


def test_check_syntax_error(runner, tmp_path):
    path = tmp_path / "broken.mpead"
    path.write_text("diagram broken {\n  population\n}\n")
    result = invoke(runner, "check", path)
    assert result.exit_code == 1
    assert "[P002]" in result.stderr


def test_check_missing_file(runner, tmp_path):
    result = invoke(runner, "check", tmp_path / "nope.mpead")
    assert result.exit_code == 2


def test_fmt(runner, tmp_path):
    result = invoke(runner, "fmt", corpus_path("fig2a_onemax"))
    assert result.exit_code == 0
    assert result.stdout.startswith("diagram fig2a_onemax {\n  population P { size = 50")

    canonical = tmp_path / "canonical.mpead"
    canonical.write_text(result.stdout)
    assert invoke(runner, "fmt", "--check", canonical).exit_code == 0
    assert invoke(runner, "fmt", "--check", corpus_path("fig2a_onemax")).exit_code == 1


@pytest.mark.parametrize("fmt, marker", [("svg", "<svg"), ("dot", "digraph")])
def test_render(runner, fmt, marker):
    result = invoke(runner, "render", corpus_path("fig4d_coop_shared"), "--format", fmt)
    assert result.exit_code == 0
    assert result.stdout.startswith(marker)


def test_render_to_file(runner, tmp_path):
    out = tmp_path / "grid.svg"
    result = invoke(runner, "render", corpus_path("fig6_grid3x3"), "--expand",
                    "--layout", "force", "--seed", 3, "-o", out)
    assert result.exit_code == 0
    assert out.read_text().count('class="population-node"') == 9


def test_expand_stats(runner):
    result = invoke(runner, "expand", "--stats", corpus_path("fig7_grid32"))
    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    assert "populations: 1024" in lines
    assert "migration edges: 3968" in lines


def test_expand_json(runner):
    result = invoke(runner, "expand", "--json", corpus_path("fig8_sefrioui25"))
    assert result.exit_code == 0
    document = json.loads(result.stdout)
    assert sum(node["type"] == "population" for node in document["nodes"]) == 25


def test_expand_ambiguous_box(runner, tmp_path):
    path = tmp_path / "box.mpead"
    path.write_text("diagram box {\n  population A\n  population B\n  population Q\n"
                    "  Q -> M[i] : geno\n  macro M { members = [A, B] }\n}\n")
    result = invoke(runner, "expand", path)
    assert result.exit_code == 1
    assert "[E301]" in result.stderr


def test_run_csv(runner, tmp_path):
    out = tmp_path / "stats.csv"
    args = ["run", corpus_path("fig4d_coop_shared"), "--generations", 100, "--seed", 1,
            "--stats-out", out]
    assert invoke(runner, *args).exit_code == 0
    first = out.read_bytes()
    rows = first.decode().splitlines()[1:]
    assert len(rows) == 200
    assert sum(row.split(",")[1] == "A" for row in rows) == 100

    assert invoke(runner, *args).exit_code == 0
    assert out.read_bytes() == first


def test_run_workers_do_not_matter(runner):
    args = ["run", corpus_path("fig4c_predprey_ten"), "--generations", 3, "--seed", 5]
    single = runner.invoke(cli, ["--quiet", "--workers", "1", *map(str, args)])
    threaded = runner.invoke(cli, ["--quiet", "--workers", "4", *map(str, args)])
    assert single.exit_code == threaded.exit_code == 0
    assert single.stdout == threaded.stdout


def test_run_json_with_config(runner, tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"generations": 7, "migration": {"interval": 2}}))
    result = invoke(runner, "run", corpus_path("fig6_grid3x3"), "--config", config,
                    "--format", "json", "--interval", 5)
    assert result.exit_code == 0
    document = json.loads(result.stdout)
    assert len(document["rows"]) == 7 * 9
    assert document["migration_events"] == 24


def test_run_bad_config(runner, tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"generation": 7}))
    result = invoke(runner, "run", corpus_path("fig2a_onemax"), "--config", config)
    assert result.exit_code == 2
    assert "bad run configuration" in result.stderr


def test_run_size_mismatch(runner):
    result = invoke(runner, "run", corpus_path("coop_mismatch"), "--generations", 1)
    assert result.exit_code == 1
    assert "[E604]" in result.stderr
