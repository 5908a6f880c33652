"""Toolchain for multi-population EA diagrams: parse, validate, expand,
render and execute `.mpead` files."""
from .builder import build_diagram, derive_border_style, structurally_equal
from .engine import compile, run, step, write_stats
from .errors import MpeadError
from .expander import expand, expand_macros, expand_repeats, flat_to_json, stats
from .functions import FunctionRegistry, builtin_registry, register_function
from .layout import LayoutConfig, layout
from .parser import load_diagram, parse, parse_file
from .render import render_dot, render_svg
from .runconfig import RunConfig
from .serializer import format_source, serialize
from .validator import validate

__version__ = "0.1.0"
