"""Tokenizer and recursive-descent parser for constraint ASP programs.

Grammar::

    program   := (clause | denial | directive)*
    clause    := head (":-" body)? "."
    denial    := ":-" body "."
    directive := "#pred" literal "::" quoted "." | "#show" showlist "." | "?-" body "."
    item      := ("not")? ("-")? atom | term op term
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from .terms import (
    ORDER_OPS,
    Clause,
    Compound,
    Const,
    Constraint,
    Literal,
    Num,
    Var,
    item_vars,
    term_vars,
)


class ParseError(Exception):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Mark:
    var: Var
    noun: str | None = None


@dataclass(frozen=True)
class PredPattern:
    head: Literal
    template: tuple  # of str | Mark


@dataclass(frozen=True)
class Query:
    constraints: tuple = ()
    literals: tuple = ()

    @property
    def variables(self) -> list[Var]:
        seen = {}
        for item in self.constraints + self.literals:
            for v in item_vars(item):
                if v.name != "_":
                    seen.setdefault(v, None)
        return list(seen)

    def __str__(self) -> str:
        return "?- " + ", ".join(str(i) for i in self.constraints + self.literals) + "."


@dataclass
class Program:
    clauses: list = field(default_factory=list)
    denials: list = field(default_factory=list)
    pred_patterns: list = field(default_factory=list)
    show: list = field(default_factory=list)  # of ((name, arity | None), naf)
    query: Query | None = None

    def extend(self, other: "Program") -> "Program":
        show = dict(((ind, naf), None) for ind, naf in self.show)
        show.update(((ind, naf), None) for ind, naf in other.show)
        return Program(
            self.clauses + other.clauses,
            self.denials + other.denials,
            self.pred_patterns + other.pred_patterns,
            list(show),
            other.query if other.query is not None else self.query,
        )


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<num>\d+\.\d+|\d+)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<name>[a-z][A-Za-z0-9_]*)
  | (?P<string>'(?:[^'\\]|\\.|'')*')
  | (?P<punct>:-|\?-|::|\\=|=<|>=|[=<>(),.\#/+*\-])
    """,
    re.VERBOSE,
)

_COMPARISON = {"=", "\\=", "<", ">", "=<", ">="}
_ARITH = {"+", "*", "/"}


@dataclass
class Token:
    kind: str
    text: str
    pos: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            if source[pos] == "'":
                line, col = _line_col(source, pos)
                raise ParseError("unterminated quoted text", line, col)
            line, col = _line_col(source, pos)
            raise ParseError(f"unexpected character {source[pos]!r}", line, col)
        kind = m.lastgroup
        if kind != "ws":
            text = m.group()
            tokens.append(Token(kind if kind != "punct" else text, text, pos))
        pos = m.end()
    tokens.append(Token("eof", "", n))
    return tokens


def _line_col(source: str, pos: int) -> tuple[int, int]:
    line = source.count("\n", 0, pos) + 1
    col = pos - (source.rfind("\n", 0, pos) + 1) + 1
    return line, col


def parse_number(text: str) -> Fraction:
    # Fraction("0.35") is exact: 7/20
    return Fraction(text)


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.i = 0
        self.scope: dict[str, Var] = {}

    # token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        line, col = _line_col(self.source, tok.pos)
        return ParseError(message, line, col)

    def expect(self, kind: str, what: str | None = None) -> Token:
        if self.tok.kind != kind:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {what or repr(kind)}, found {found!r}")
        return self.advance()

    # terms
    def variable(self, name: str) -> Var:
        if name == "_":
            return Var("_")
        if name not in self.scope:
            self.scope[name] = Var(name)
        return self.scope[name]

    def term(self):
        t = self.tok
        if t.kind == "var":
            self.advance()
            return self.variable(t.text)
        if t.kind == "num":
            self.advance()
            return Num(parse_number(t.text))
        if t.kind == "-" and self.peek().kind == "num":
            self.advance()
            return Num(-parse_number(self.advance().text))
        if t.kind == "name":
            return self.atom()
        raise self.error(f"expected a term, found {t.text or 'end of input'!r}")

    def atom(self):
        name = self.expect("name", "a predicate or constant name").text
        if self.tok.kind != "(":
            return Const(name)
        self.advance()
        args = [self.term()]
        while self.tok.kind == ",":
            self.advance()
            args.append(self.term())
        self.expect(")", "')' or ','")
        return Compound(name, tuple(args))

    def literal(self, allow_naf: bool = True) -> Literal:
        naf = False
        if self.tok.kind == "name" and self.tok.text == "not" and self.peek().kind in ("name", "-"):
            if not allow_naf:
                raise self.error("default negation is not allowed here")
            self.advance()
            naf = True
        classical = False
        if self.tok.kind == "-":
            self.advance()
            classical = True
        return Literal(self.atom(), classical, naf)

    def body_item(self):
        t = self.tok
        if t.kind == "name" and t.text == "not" and self.peek().kind in ("name", "-"):
            return self.literal()
        if t.kind == "-" and self.peek().kind == "name":
            return self.literal()
        start = self.tok
        lhs = self.term()
        if self.tok.kind in _COMPARISON:
            op = self.advance().text
            rhs = self.term()
            self._reject_arith()
            if op in ORDER_OPS:
                for side in (lhs, rhs):
                    if not isinstance(side, (Num, Var)):
                        raise self.error(f"order comparison {op} needs numbers or variables", start)
            return Constraint(op, lhs, rhs)
        self._reject_arith()
        if isinstance(lhs, (Var, Num)):
            raise self.error("expected a literal or a comparison", start)
        return Literal(lhs)

    def _reject_arith(self):
        if self.tok.kind in _ARITH or (self.tok.kind == "-" and self.peek().kind in ("num", "var", "name")):
            raise self.error("arithmetic expressions are not supported")

    def body(self) -> list:
        items = [self.body_item()]
        while self.tok.kind == ",":
            self.advance()
            items.append(self.body_item())
        return items

    # statements
    def program(self) -> Program:
        prog = Program()
        show: dict = {}
        while self.tok.kind != "eof":
            self.scope = {}
            start = self.tok.pos
            kind = self.tok.kind
            if kind == ":-":
                self.advance()
                body = self.body()
                self.expect(".", "'.' or ','")
                prog.denials.append(Clause(None, tuple(body), (start, self.tokens[self.i - 1].pos + 1)))
            elif kind == "?-":
                if prog.query is not None:
                    warnings.warn("several ?- directives; the last one wins", stacklevel=3)
                prog.query = self.query_body()
            elif kind == "#":
                self.advance()
                directive = self.expect("name", "a directive name")
                if directive.text == "pred":
                    prog.pred_patterns.append(self.pred_rest())
                elif directive.text == "show":
                    for entry in self.show_rest():
                        if entry in show:
                            warnings.warn(f"duplicate #show for {entry}", stacklevel=3)
                            del show[entry]
                        show[entry] = None
                else:
                    raise self.error(f"unknown directive #{directive.text}", directive)
            else:
                head = self.literal(allow_naf=False)
                body = []
                if self.tok.kind == ":-":
                    self.advance()
                    body = self.body()
                self.expect(".", "'.', ',' or ':-'")
                prog.clauses.append(Clause(head, tuple(body), (start, self.tokens[self.i - 1].pos + 1)))
        prog.show = list(show)
        return prog

    def query_body(self) -> Query:
        if self.tok.kind == "?-":
            self.advance()
        if self.tok.kind in (".", "eof"):
            raise self.error("empty query")
        items = self.body()
        if self.tok.kind == ".":
            self.advance()
        constraints = tuple(i for i in items if isinstance(i, Constraint))
        literals = tuple(i for i in items if isinstance(i, Literal))
        if not literals and not constraints:
            raise self.error("empty query")
        return Query(constraints, literals)

    def show_rest(self) -> list:
        entries = [self.show_entry()]
        while self.tok.kind == ",":
            self.advance()
            entries.append(self.show_entry())
        self.expect(".", "'.' or ','")
        return entries

    def show_entry(self):
        naf = False
        if self.tok.kind == "name" and self.tok.text == "not" and self.peek().kind in ("name", "-"):
            self.advance()
            naf = True
        prefix = ""
        if self.tok.kind == "-":
            self.advance()
            prefix = "-"
        name = prefix + self.expect("name", "a predicate name").text
        arity = None
        if self.tok.kind == "/":
            self.advance()
            arity = int(self.expect("num", "an arity").text)
        return (name, arity), naf

    def pred_rest(self) -> PredPattern:
        head = self.literal()
        self.expect("::", "'::'")
        tok = self.expect("string", "a quoted pattern")
        text = tok.text[1:-1].replace("''", "'").replace("\\'", "'")
        template = self.template(text, head, tok)
        if self.tok.kind == ".":
            self.advance()
        elif self.tok.kind != "eof" and "\n" not in self.source[tok.pos:self.tok.pos]:
            raise self.error("expected '.' after #pred pattern")
        return PredPattern(head, template)

    def template(self, text: str, head: Literal, tok: Token) -> tuple:
        head_vars = {v.name: v for v in term_vars(head.atom)}
        parts: list = []
        pos = 0
        for m in re.finditer(r"@\(\s*([A-Z_][A-Za-z0-9_]*)\s*(?::\s*([^)]*?))?\s*\)", text):
            if m.start() > pos:
                parts.append(text[pos:m.start()])
            name = m.group(1)
            if name not in head_vars:
                raise self.error(f"mark @({name}) names a variable absent from the head", tok)
            noun = m.group(2).strip() if m.group(2) else None
            parts.append(Mark(head_vars[name], noun or None))
            pos = m.end()
        if pos < len(text):
            parts.append(text[pos:])
        return tuple(parts)


def parse_program(source: str) -> Program:
    """Parse program text into a :class:`Program`."""
    return _Parser(source).program()


def parse_query(source: str) -> Query:
    p = _Parser(source)
    q = p.query_body()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after query")
    return q


def parse_pred_directive(source: str) -> PredPattern:
    src = source.strip()
    if src.startswith("#pred"):
        src = src[len("#pred"):]
    p = _Parser(src)
    pattern = p.pred_rest()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after #pred directive")
    return pattern


# pretty printing

def format_item(item) -> str:
    return str(item)


def format_program(program: Program) -> str:
    """Render a program back to source text accepted by :func:`parse_program`."""
    lines = []
    for c in program.clauses + program.denials:
        lines.append(str(c))
    for pat in program.pred_patterns:
        text = "".join(
            part if isinstance(part, str) else f"@({part.var.name}{':' + part.noun if part.noun else ''})"
            for part in pat.template
        )
        lines.append(f"#pred {pat.head} :: '{text.replace(chr(39), chr(39) * 2)}'.")
    if program.show:
        entries = []
        for (name, arity), naf in program.show:
            entries.append(("not " if naf else "") + name + (f"/{arity}" if arity is not None else ""))
        lines.append("#show " + ", ".join(entries) + ".")
    if program.query is not None:
        lines.append(str(program.query))
    return "\n".join(lines) + ("\n" if lines else "")
