"""Parsing and rendering of the controlled notations."""

from .lexer import ParseError, split_units
from .parser import (
    Command,
    CommandKind,
    FlLink,
    format_fraction,
    parse_command,
    parse_fl,
    parse_sentence,
)
from .render import render_command, render_fe, render_fl, render_tree
from .kif import KifUnsupported, render_kif

__all__ = [
    "Command",
    "CommandKind",
    "FlLink",
    "KifUnsupported",
    "ParseError",
    "format_fraction",
    "parse_command",
    "parse_fl",
    "parse_sentence",
    "render_command",
    "render_fe",
    "render_fl",
    "render_kif",
    "render_tree",
    "split_units",
]
