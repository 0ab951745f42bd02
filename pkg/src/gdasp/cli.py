"""Command-line driver: parse, compile duals, solve, filter and render."""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import dataclass, field

from .dual import compile_duals, emit_dual_text
from .justify import DetailLevel, Level, PartialModel, filter_tree
from .oracle import OutOfScope, TooLarge, ground, stable_models
from .parser import ParseError, Program, format_program, parse_program, parse_query
from .render import (
    RenderConfig,
    render_bindings,
    render_html,
    render_listing_html,
    render_model,
    render_nl,
    render_plain,
)
from .solver import Solver, run_with_stack

EXIT_OK, EXIT_NO_MODELS, EXIT_USAGE, EXIT_UNSUPPORTED = 0, 1, 2, 3


@dataclass
class CliConfig:
    files: list
    query: str | None = None
    answers: int = 1
    tree: bool = False
    level: DetailLevel = field(default_factory=DetailLevel)
    human: bool = False
    html: str | None = None
    dual: bool = False
    code: bool = False
    raw_duals: bool = False
    depth: int | None = None
    occurs_check: bool = False
    oracle: bool = False
    ascii: bool = False
    stats: bool = False


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="scasp", description="Goal-directed answer set solver with justifications.")
    ap.add_argument("files", nargs="+", help="program files, concatenated in order")
    ap.add_argument("--query", "-q", help="query text, overriding any ?- directive")
    ap.add_argument("--answers", "-n", type=int, default=1, help="number of answers, 0 for all (default 1)")
    ap.add_argument("--tree", action="store_true", help="print the justification tree")
    level = ap.add_mutually_exclusive_group()
    for name in ("short", "mid", "long"):
        level.add_argument(f"--{name}", dest="level", action="store_const", const=name)
    ap.add_argument("--neg", action="store_true", help="also show default-negated literals")
    mode = ap.add_mutually_exclusive_group()
    mode.add_argument("--human", action="store_true", help="natural-language output")
    mode.add_argument("--plain", action="store_true", help="plain text output (default)")
    ap.add_argument("--html", metavar="PATH", help="write an expandable HTML document")
    ap.add_argument("--dual", action="store_true", help="print the program with its dual")
    ap.add_argument("--code", action="store_true", help="print the parsed program")
    ap.add_argument("--raw-duals", action="store_true", help="dual clauses without guard prefixes")
    ap.add_argument("--depth", type=int, help="abandon branches deeper than this")
    ap.add_argument("--occurs-check", action="store_true")
    ap.add_argument("--oracle", action="store_true", help="enumerate stable models by brute force")
    ap.add_argument("--ascii", action="store_true", help="use '|' for the constraint separator")
    ap.add_argument("--stats", action="store_true", help="print solve time on stderr")
    return ap


def config_from_args(ns: argparse.Namespace) -> CliConfig:
    return CliConfig(
        files=ns.files,
        query=ns.query,
        answers=ns.answers,
        tree=ns.tree,
        level=DetailLevel(Level(ns.level or "mid"), ns.neg),
        human=ns.human,
        html=ns.html,
        dual=ns.dual,
        code=ns.code,
        raw_duals=ns.raw_duals,
        depth=ns.depth,
        occurs_check=ns.occurs_check,
        oracle=ns.oracle,
        ascii=ns.ascii,
        stats=ns.stats,
    )


def load_program(paths, stderr) -> Program | None:
    program = Program()
    for path in paths:
        try:
            with open(path, encoding="utf-8") as fh:
                source = fh.read()
        except OSError as e:
            print(f"scasp: cannot read {path}: {e.strerror}", file=stderr)
            return None
        try:
            program = program.extend(parse_program(source))
        except ParseError as e:
            print(f"{path}:{e.line}:{e.column}: {e.message}", file=stderr)
            return None
    return program


def project_model(model: PartialModel, show) -> PartialModel:
    """Keep the literals selected by #show, when there is any."""
    if not show:
        return model
    keep = []
    for lit in model:
        name, arity = lit.pred
        for (sname, sarity), snaf in show:
            if sname == name and (sarity is None or sarity == arity) and snaf == lit.naf:
                keep.append(lit)
                break
    return PartialModel(tuple(keep))


def run(cfg: CliConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    program = load_program(cfg.files, stderr)
    if program is None:
        return EXIT_USAGE
    title = os.path.basename(cfg.files[0])

    if cfg.code or cfg.dual:
        parts = []
        if cfg.code:
            parts.append(format_program(program))
        if cfg.dual:
            parts.append(emit_dual_text(compile_duals(program, cfg.raw_duals), cfg.human))
        text = "\n".join(parts)
        stdout.write(text)
        if cfg.html and not cfg.tree:
            with open(cfg.html, "w", encoding="utf-8") as fh:
                fh.write(render_listing_html(text, title))
        if not cfg.tree and not cfg.query and program.query is None:
            return EXIT_OK

    if cfg.oracle:
        return run_oracle(program, stdout, stderr)

    if cfg.query is not None:
        try:
            query = parse_query(cfg.query)
        except ParseError as e:
            print(f"query:{e.line}:{e.column}: {e.message}", file=stderr)
            return EXIT_USAGE
    elif program.query is not None:
        query = program.query
    else:
        print("scasp: no query given (use --query or a ?- directive)", file=stderr)
        return EXIT_USAGE

    dual = compile_duals(program, cfg.raw_duals)
    solver = Solver(dual, depth=cfg.depth, occurs_check=cfg.occurs_check)
    return run_with_stack(_solve_and_print, cfg, program, query, solver, title, stdout, stderr)


def _solve_and_print(cfg, program, query, solver, title, stdout, stderr) -> int:
    patterns = program.pred_patterns
    answers, trees = [], []
    start = time.perf_counter()
    for answer in solver.solve(query, cfg.answers):
        answers.append(answer)
        tree = None
        if cfg.tree or cfg.html:
            tree = filter_tree(answer.tree, cfg.level, program.show, patterns, cfg.human)
        trees.append(tree)
        if len(answers) > 1:
            stdout.write("\n")
        stdout.write(f"Answer {len(answers)}\n")
        stdout.write(render_bindings(answer.bindings) + "\n")
        model = answer.model if cfg.level.level is Level.LONG else project_model(answer.model, program.show)
        stdout.write(render_model(model, answer.store, answer.names, cfg.ascii) + "\n")
        if cfg.tree:
            stdout.write("\n")
            if cfg.human:
                stdout.write(render_nl(tree, patterns, answer.store, answer.names))
            else:
                stdout.write(render_plain(tree, answer.store, answer.names, cfg.ascii))
        stdout.flush()
    elapsed = time.perf_counter() - start
    for message in solver.diagnostics:
        print(f"scasp: {message}", file=stderr)
    if cfg.html:
        mode = "human" if cfg.human else "plain"
        doc = render_html(answers, title, RenderConfig(mode, "html", "because", cfg.ascii), patterns, trees)
        with open(cfg.html, "w", encoding="utf-8") as fh:
            fh.write(doc)
    if cfg.stats:
        print(f"% solve time: {elapsed * 1000:.1f} ms, answers: {len(answers)}", file=stderr)
    if answers:
        return EXIT_OK
    if any(m.startswith("unsupported") for m in solver.diagnostics):
        print("scasp: unsupported construct; no answer could be established", file=stderr)
        return EXIT_UNSUPPORTED
    stdout.write("no models\n")
    return EXIT_NO_MODELS


def run_oracle(program: Program, stdout, stderr) -> int:
    try:
        models = stable_models(ground(program))
    except (OutOfScope, TooLarge) as e:
        print(f"scasp: oracle: {e}", file=stderr)
        return EXIT_UNSUPPORTED
    for i, m in enumerate(sorted(sorted(m) for m in models), 1):
        stdout.write(f"Model {i}: {{ {', '.join(m)} }}\n")
    stdout.write(f"{len(models)} stable model(s)\n")
    return EXIT_OK if models else EXIT_NO_MODELS


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    if ns.answers < 0:
        build_parser().error("--answers must be 0 or positive")
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
