"""Command line entry point: `mpead check|fmt|render|expand|run`.

Exit codes: 0 success, 1 diagnostics with errors or a toolchain error,
2 I/O and usage problems.
"""
import functools
import json
import logging
from pathlib import Path
from typing import List, Optional, Tuple

import click
from pydantic import ValidationError

from . import config as settings
from .engine import compile as compile_plan
from .engine import run as run_plan
from .engine import write_stats
from .errors import MpeadError
from .expander import expand as expand_diagram
from .expander import flat_to_json, stats
from .layout import LayoutConfig
from .parser import parse, parse_file
from .render import render_dot, render_svg
from .runconfig import RunConfig
from .schemas import Diagram, ParseDiagnostic
from .serializer import serialize
from .validator import has_errors, validate

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_IO = 2

FILE = click.Path(dir_okay=False, path_type=Path)


def handle_errors(command):
    """Map toolchain and I/O errors onto the exit code contract."""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except MpeadError as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(EXIT_DIAGNOSTICS)
        except ValidationError as exc:
            click.echo(f"error: bad run configuration\n{exc}", err=True)
            raise SystemExit(EXIT_IO)
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(EXIT_IO)
    return wrapper


def _read(path: Path) -> str:
    if not path.is_file():
        raise FileNotFoundError(f"{path}: no such file")
    return path.read_bytes().decode("utf-8", errors="replace")


def _report(diagnostics: List[ParseDiagnostic], path: Path) -> None:
    for diagnostic in diagnostics:
        click.echo(diagnostic.render(str(path)), err=True)


def _checked(path: Path) -> Tuple[Optional[Diagram], List[ParseDiagnostic]]:
    """Parse and validate one file; the diagram is None when there are errors."""
    result = parse(_read(path), str(path))
    diagnostics = list(result.diagnostics)
    if result.diagram is not None:
        diagnostics += validate(result.diagram)
    _report(diagnostics, path)
    if result.diagram is None or has_errors(diagnostics):
        return None, diagnostics
    return result.diagram, diagnostics


def _load(path: Path) -> Diagram:
    diagram, _ = _checked(path)
    if diagram is None:
        raise SystemExit(EXIT_DIAGNOSTICS)
    return diagram


def _emit(text: str, output: Optional[Path]) -> None:
    if output is None:
        click.echo(text, nl=False)
    else:
        output.write_text(text, encoding="utf-8")
        logger.info("wrote %s", output)


@click.group()
@click.option("--quiet", is_flag=True, help="Only log errors.")
@click.option("--workers", type=click.IntRange(min=1), default=settings.DEFAULT_WORKERS,
              show_default=True, help="Worker threads for `run`; results do not depend on it.")
@click.pass_context
def cli(ctx: click.Context, quiet: bool, workers: int):
    """Parse, check, draw and execute multi-population EA diagrams."""
    settings.configure_logging(quiet)
    ctx.obj = {"quiet": quiet, "workers": workers}


@cli.command()
@click.argument("files", nargs=-1, required=True, type=FILE)
@handle_errors
def check(files: Tuple[Path, ...]):
    """Parse and validate FILES; report diagnostics as file:line:col."""
    failed = False
    for path in files:
        diagram, diagnostics = _checked(path)
        failed = failed or diagram is None
        logger.info("%s: %d diagnostic(s)", path, len(diagnostics))
    raise SystemExit(EXIT_DIAGNOSTICS if failed else EXIT_OK)


@cli.command()
@click.argument("file", type=FILE)
@click.option("--check", "check_only", is_flag=True,
              help="Exit 1 when the file is not in canonical form.")
@handle_errors
def fmt(file: Path, check_only: bool):
    """Print FILE in canonical form."""
    text = _read(file)
    result = parse(text, str(file))
    if not result.ok:
        _report(result.diagnostics, file)
        raise SystemExit(EXIT_DIAGNOSTICS)
    canonical = serialize(result.diagram)
    if check_only:
        if canonical != text:
            click.echo(f"{file}: not in canonical form", err=True)
            raise SystemExit(EXIT_DIAGNOSTICS)
        return
    click.echo(canonical, nl=False)


@cli.command()
@click.argument("file", type=FILE)
@click.option("--format", "fmt_", type=click.Choice(["svg", "dot"]), default="svg", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--layout", "algorithm", type=click.Choice(["layered", "force"]),
              default="layered", show_default=True)
@click.option("--expand", "expanded", is_flag=True, help="Draw the flat graph.")
@click.option("-o", "--output", type=FILE, default=None)
@handle_errors
def render(file: Path, fmt_: str, seed: int, algorithm: str, expanded: bool,
           output: Optional[Path]):
    """Draw FILE as SVG or DOT."""
    diagram = _load(file)
    if expanded:
        diagram = expand_diagram(diagram)
    if fmt_ == "dot":
        text = render_dot(diagram)
    else:
        text = render_svg(diagram, LayoutConfig(seed=seed, algorithm=algorithm))
    _emit(text, output)


@cli.command()
@click.argument("file", type=FILE)
@click.option("--json", "as_json", is_flag=True, help="Emit the flat graph as JSON.")
@click.option("--stats", "show_stats", is_flag=True, help="Print element counts.")
@click.option("-o", "--output", type=FILE, default=None)
@handle_errors
def expand(file: Path, as_json: bool, show_stats: bool, output: Optional[Path]):
    """Expand macro boxes and repeat groups of FILE."""
    flat = expand_diagram(_load(file))
    if show_stats:
        for line in stats(flat).lines():
            click.echo(line)
        if output is None:
            return
    text = json.dumps(flat_to_json(flat), indent=2) + "\n" if as_json else serialize(flat)
    _emit(text, output)


@cli.command()
@click.argument("file", type=FILE)
@click.option("--generations", type=click.IntRange(min=1), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--stats-out", type=FILE, default=None)
@click.option("--format", "fmt_", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--config", "config_file", type=FILE, default=None,
              help="Run configuration (JSON); flags override it.")
@click.option("--interval", type=click.IntRange(min=1), default=None,
              help="Migration interval in generations.")
@click.pass_context
@handle_errors
def run(ctx: click.Context, file: Path, generations: Optional[int], seed: Optional[int],
        stats_out: Optional[Path], fmt_: str, config_file: Optional[Path],
        interval: Optional[int]):
    """Execute FILE and write per-generation statistics."""
    diagram = _load(file)
    run_config = RunConfig.from_file(config_file) if config_file else RunConfig()
    update = {"workers": ctx.obj["workers"]}
    if generations is not None:
        update["generations"] = generations
    if seed is not None:
        update["seed"] = seed
    if interval is not None:
        update["migration"] = run_config.migration.model_copy(update={"interval": interval})
    run_config = RunConfig.model_validate({**run_config.model_dump(), **update})

    plan = compile_plan(expand_diagram(diagram), run_config)
    result = run_plan(plan)
    _emit(write_stats(result, fmt_), stats_out)


def main():
    cli(prog_name="mpead")


if __name__ == "__main__":
    main()
