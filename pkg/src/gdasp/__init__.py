"""Goal-directed answer set programming with justification trees."""

from .dual import DualProgram, compile_duals, emit_dual_text
from .justify import DetailLevel, Level, Node, PartialModel, filter_tree, model_of
from .parser import ParseError, Program, Query, parse_program, parse_query
from .render import render_html, render_model, render_nl, render_plain
from .solver import Answer, Solver
from .store import ConstraintStore, UnsupportedError


def solve(source: str, query: str | None = None, limit: int = 1, **kwargs) -> list[Answer]:
    """Parse ``source`` and return up to ``limit`` answers (0 means all)."""
    program = parse_program(source)
    q = parse_query(query) if query is not None else program.query
    if q is None:
        raise ValueError("no query")
    solver = Solver(compile_duals(program, kwargs.pop("raw", False)), **kwargs)
    return list(solver.solve(q, limit))


__all__ = [
    "Answer",
    "ConstraintStore",
    "DetailLevel",
    "DualProgram",
    "Level",
    "Node",
    "ParseError",
    "PartialModel",
    "Program",
    "Query",
    "Solver",
    "UnsupportedError",
    "compile_duals",
    "emit_dual_text",
    "filter_tree",
    "model_of",
    "parse_program",
    "parse_query",
    "render_html",
    "render_model",
    "render_nl",
    "render_plain",
    "solve",
]
