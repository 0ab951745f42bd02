"""Text, HTML and pseudo-natural-language output for trees, models and clauses."""

from __future__ import annotations

import html
import logging
import string
from dataclasses import dataclass

from .justify import Node, PartialModel
from .parser import Mark
from .store import ConstraintStore
from .terms import (
    Clause,
    Compound,
    Const,
    Constraint,
    Forall,
    Literal,
    Num,
    Var,
    format_number,
    is_ground,
)

log = logging.getLogger(__name__)

INDENT = "    "

OP_WORDS = {
    "\\=": "not equal",
    "=": "equal",
    "<": "less than",
    ">": "greater than",
    "=<": "less or equal",
    ">=": "greater or equal",
}


@dataclass(frozen=True)
class RenderConfig:
    mode: str = "plain"  # plain | human
    target: str = "text"  # text | html
    connective: str = "because"  # because | if
    ascii: bool = False


class TermPrinter:
    """Prints terms with store-aware constraint annotations."""

    def __init__(self, store: ConstraintStore | None = None, names: dict | None = None, ascii: bool = False):
        self.store = store or ConstraintStore()
        self.names = names or {}
        self.bar = "|" if ascii else "│"

    def name(self, v: Var) -> str:
        return self.names.get(v, v.name)

    def term(self, t, annotate: bool = True) -> str:
        t = self.store.deref(t)
        if isinstance(t, Var):
            cs = self.store.constraints_of(t) if annotate else []
            if not cs:
                return self.name(t)
            inner = ",".join(self.constraint_text(t, op, val) for op, val in cs)
            return f"{self.name(t)} {self.bar}{{{inner}}}"
        if isinstance(t, Num):
            return format_number(t.value)
        if isinstance(t, Const):
            return t.name
        return f"{t.functor}({','.join(self.term(a, annotate) for a in t.args)})"

    def constraint_text(self, v, op: str, val) -> str:
        return f"{self.term(v, False)} {op} {self.term(val, False)}"

    def literal(self, lit: Literal, annotate: bool = True) -> str:
        prefix = ("not " if lit.naf else "") + ("-" if lit.classical else "")
        return prefix + self.term(lit.atom, annotate)

    def item(self, item, annotate: bool = True, sep: str = ",") -> str:
        if isinstance(item, Literal):
            return self.literal(item, annotate)
        if isinstance(item, Constraint):
            return f"{self.term(item.lhs, False)} {item.op} {self.term(item.rhs, False)}"
        if isinstance(item, Forall):
            return f"forall({self.term(item.var, False)}{sep}{self.item(item.goal, annotate, sep)})"
        return str(item)

    def free_constraints(self, t) -> list[tuple]:
        """(var, op, value) for every constrained variable in ``t``, first occurrence order."""
        store = self.store
        if not (store.diseq or store.interval or store.pairs):
            return []
        out = []
        seen = set()
        stack = [t]
        order = []
        while stack:
            x = self.store.deref(stack.pop())
            if isinstance(x, Var):
                if x not in seen:
                    seen.add(x)
                    order.append(x)
            elif isinstance(x, Compound):
                stack.extend(reversed(x.args))
        for v in order:
            out.extend((v, op, val) for op, val in self.store.constraints_of(v))
        return out


# naming

def _fresh_letters(used: set):
    n = 0
    while True:
        for c in string.ascii_uppercase:
            name = c if n == 0 else f"{c}{n}"
            if name not in used:
                used.add(name)
                yield name
        n += 1


def clause_names(clause: Clause) -> dict:
    """Distinct printable names for the variables of one clause."""
    variables = clause.variables
    names: dict = {}
    used: set = set()
    clashes = []
    for v in variables:
        if v.name == "_" or v.name in used:
            clashes.append(v)
        else:
            names[v] = v.name
            used.add(v.name)
    letters = _fresh_letters(used)
    for v in clashes:
        names[v] = next(letters)
    return names


def format_clause(clause: Clause) -> str:
    p = TermPrinter(names=clause_names(clause))
    body = ", ".join(p.item(i, sep=", ") for i in clause.body)
    if clause.head is None:
        return f":- {body}."
    head = p.literal(clause.head)
    return f"{head} :- {body}." if body else f"{head}."


def format_term(t, store: ConstraintStore | None = None, names: dict | None = None, ascii: bool = False) -> str:
    return TermPrinter(store, names, ascii).term(t)


# plain trees

def node_text(node: Node, p: TermPrinter) -> str:
    if node.kind == "root":
        return "query"
    text = p.item(node.item)
    if node.marker:
        text = f"{node.marker}({text})"
    return text


def _tree_lines(children, depth: int, line_of, ends) -> list[tuple[int, Node, str]]:
    """(depth, node, line) in preorder; ``ends`` = (internal, more, last)."""
    out = []
    for i, child in enumerate(children):
        # every top-level proof closes with a period
        last = depth == 0 or i == len(children) - 1
        if child.children:
            suffix = ends[0]
        else:
            suffix = ends[2] if last else ends[1]
        out.append((depth, child, line_of(child) + suffix))
        out.extend(_tree_lines(child.children, depth + 1, line_of, ends))
    return out


PLAIN_ENDS = (" :-", ",", ".")
NL_ENDS = (", because", ", and", ".")


def _top(t: Node) -> tuple:
    return t.children if t.kind == "root" else (t,)


def plain_lines(t: Node, store=None, names=None, ascii=False):
    p = TermPrinter(store, names, ascii)
    return _tree_lines(_top(t), 0, lambda n: node_text(n, p), PLAIN_ENDS)


def render_plain(t: Node, store: ConstraintStore | None = None, names: dict | None = None, ascii: bool = False) -> str:
    return "".join(INDENT * d + line + "\n" for d, _, line in plain_lines(t, store, names, ascii))


# models and bindings

def render_model(m: PartialModel, store: ConstraintStore | None = None, names: dict | None = None, ascii: bool = False) -> str:
    p = TermPrinter(store, names, ascii)
    if not len(m):
        return "{ }"
    return "{ " + ", ".join(p.literal(lit) for lit in m) + " }"


def render_bindings(bindings: list) -> str:
    return ", ".join(bindings) if bindings else "true"


# natural language

def _match(pattern, term, mapping: dict, store: ConstraintStore) -> bool:
    term = store.deref(term)
    if isinstance(pattern, Var):
        if pattern.name == "_":
            return True
        if pattern in mapping:
            return store.resolve(mapping[pattern]) == store.resolve(term)
        mapping[pattern] = term
        return True
    if isinstance(pattern, Compound):
        return (
            isinstance(term, Compound)
            and term.functor == pattern.functor
            and len(term.args) == len(pattern.args)
            and all(_match(a, b, mapping, store) for a, b in zip(pattern.args, term.args))
        )
    return pattern == term


def find_pattern(patterns, lit: Literal, store: ConstraintStore | None = None):
    """First pattern matching ``lit``: (pattern, mapping, prefix) or None.

    A default-negated literal without its own pattern borrows the positive
    one behind "there is no evidence that".
    """
    store = store or ConstraintStore()
    tries = [(lit.naf, "")]
    if lit.naf:
        tries.append((False, "there is no evidence that "))
    for want_naf, prefix in tries:
        for pat in patterns:
            h = pat.head
            if h.naf != want_naf or h.classical != lit.classical:
                continue
            mapping: dict = {}
            if _match(h.atom, lit.atom, mapping, store):
                return pat, mapping, prefix
    return None


class Narrator:
    """Renders literals and nodes with #pred patterns or the built-in phrasing."""

    def __init__(self, patterns=(), store=None, names=None):
        self.patterns = list(patterns)
        self.p = TermPrinter(store, names)
        self.store = self.p.store
        self._warned: set = set()

    def value(self, t) -> str:
        return self.p.term(t, annotate=False)

    def constraint_phrase(self, v, op: str, val) -> str:
        return f"{self.value(v)} {OP_WORDS[op]} {self.value(val)}"

    def constraints_phrase(self, t) -> str:
        return " and ".join(self.constraint_phrase(v, op, val) for v, op, val in self.p.free_constraints(t))

    def mark(self, mark: Mark, mapping: dict) -> str:
        if mark.var not in mapping:
            if mark.var.name not in self._warned:
                self._warned.add(mark.var.name)
                log.warning("pattern mark @(%s) has no value; using the variable name", mark.var.name)
            return mark.var.name
        t = self.store.deref(mapping[mark.var])
        noun = mark.noun
        if isinstance(t, Var):
            cs = self.constraints_phrase(t)
            if cs:
                return f"a {noun} {cs}" if noun else cs
            return f"{self.value(t)}, a {noun}" if noun else self.value(t)
        if noun and is_ground(self.store.resolve(t)):
            return f"the {noun} {self.value(t)}"
        return self.value(t)

    def _args(self, lit: Literal) -> str:
        args = [self.value(a) for a in lit.args]
        if not args:
            return ""
        if len(args) == 1:
            return f" (for {args[0]})"
        return f" (for {', '.join(args[:-1])}, and {args[-1]})"

    def literal(self, lit: Literal, annotate: bool = True) -> str:
        if lit.is_helper:
            return self.helper(lit)
        found = find_pattern(self.patterns, lit, self.store)
        if found is not None:
            pat, mapping, prefix = found
            body = "".join(part if isinstance(part, str) else self.mark(part, mapping) for part in pat.template)
            return prefix + body
        text = f"'{lit.name}' holds{self._args(lit)}"
        if annotate:
            cs = self.constraints_phrase(lit.atom)
            if cs:
                text += f", with {cs}"
        if lit.classical:
            text = "it is not the case that " + text
        if lit.naf:
            text = "there is no evidence that " + text
        return text

    def helper(self, lit: Literal) -> str:
        name = lit.name
        if name == "global_constraint":
            return "the global constraints hold"
        if name == "o_chk":
            return "no global constraint is violated"
        if name.startswith("o_chk_"):
            label = f"'constraint {name[len('o_chk_'):]}' holds"
        else:
            label = f"'rule {name.rsplit('_', 1)[-1]}' holds"
        if not lit.naf:
            label = f"'{name}' holds"
        return label + self._args(lit)

    def item(self, item, annotate: bool = True) -> str:
        if isinstance(item, Literal):
            return self.literal(item, annotate)
        if isinstance(item, Constraint):
            return f"{self.value(item.lhs)} is {OP_WORDS[item.op]} {self.value(item.rhs)}"
        if isinstance(item, Forall):
            return f"for all {self.value(item.var)}, it holds that {self.item(item.goal, annotate)}"
        return str(item)

    def node(self, node: Node) -> str:
        if node.kind == "root":
            return "the query holds"
        text = self.item(node.item)
        if node.marker == "chs":
            text = "it is assumed that " + text
        elif node.marker == "proved":
            text += ", already justified"
        return text


def _nl_visible(t: Node) -> Node:
    """Drop the trivial global_constraint leaf, which carries no information."""
    if t.kind != "root":
        return t
    kids = tuple(c for c in t.children if not (c.kind == "global" and not c.children))
    return Node(t.item, t.marker, kids)


def nl_lines(t: Node, patterns=(), store=None, names=None):
    n = Narrator(patterns, store, names)
    return _tree_lines(_top(_nl_visible(t)), 0, n.node, NL_ENDS)


def render_nl(t: Node, patterns=(), store: ConstraintStore | None = None, names: dict | None = None) -> str:
    return "".join(INDENT * d + line + "\n" for d, _, line in nl_lines(t, patterns, store, names))


def nl_clause(clause: Clause, patterns=()) -> str:
    """One clause in English, with the neck read as "if"."""
    n = Narrator(patterns, names=clause_names(clause))
    body = " and ".join(n.item(i) for i in clause.body)
    if clause.head is None:
        return f"it cannot be that {body}."
    head = n.literal(clause.head)
    return f"{head} if {body}." if body else f"{head}."


# html

_CSS = """
body { font-family: monospace; }
details, .leaf { margin-left: 1.5em; }
summary { cursor: pointer; }
.bindings, .model { margin: 0.3em 0; }
"""


def _html_tree(children, depth: int, line_of, ends, counter: list) -> list[str]:
    out = []
    for i, child in enumerate(children):
        last = depth == 0 or i == len(children) - 1
        idx = counter[0]
        counter[0] += 1
        if child.children:
            text = html.escape(line_of(child) + ends[0])
            opened = ' open=""' if depth < 2 else ""
            out.append(f'<details{opened} id="n{idx}"><summary>{text}</summary>')
            out.extend(_html_tree(child.children, depth + 1, line_of, ends, counter))
            out.append("</details>")
        else:
            text = html.escape(line_of(child) + (ends[2] if last else ends[1]))
            out.append(f'<div class="leaf" id="n{idx}">{text}</div>')
    return out


def render_html(answers, title: str, config: RenderConfig = RenderConfig(), patterns=(), trees=None) -> str:
    """Self-contained document with one section per answer.

    ``answers`` are solver answers; ``trees`` optionally overrides each
    answer's tree (e.g. after filtering).
    """
    parts = [
        '<!DOCTYPE html>',
        '<html lang="en">',
        '<head><meta charset="utf-8"/>',
        f"<title>{html.escape(title)}</title>",
        f"<style>{_CSS}</style></head>",
        "<body>",
        f"<h1>{html.escape(title)}</h1>",
    ]
    for i, answer in enumerate(answers, 1):
        tree = trees[i - 1] if trees is not None else answer.tree
        store, names = answer.store, answer.names
        parts.append(f'<section id="answer-{i}">')
        parts.append(f"<h2>Answer {i}</h2>")
        parts.append(f'<p class="bindings">{html.escape(render_bindings(answer.bindings))}</p>')
        model = render_model(answer.model, store, names, config.ascii)
        parts.append(f'<p class="model">{html.escape(model)}</p>')
        parts.append('<div class="tree">')
        if config.mode == "human":
            n = Narrator(patterns, store, names)
            parts.extend(_html_tree(_top(_nl_visible(tree)), 0, n.node, NL_ENDS, [0]))
        else:
            p = TermPrinter(store, names, config.ascii)
            parts.extend(_html_tree(_top(tree), 0, lambda x: node_text(x, p), PLAIN_ENDS, [0]))
        parts.append("</div>")
        parts.append("</section>")
    parts.append("</body>")
    parts.append("</html>")
    return "\n".join(parts) + "\n"


def render_listing_html(text: str, title: str) -> str:
    return (
        '<!DOCTYPE html>\n<html lang="en">\n<head><meta charset="utf-8"/>\n'
        f"<title>{html.escape(title)}</title></head>\n<body>\n<pre>{html.escape(text)}</pre>\n</body>\n</html>\n"
    )
