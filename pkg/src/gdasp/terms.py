"""Herbrand terms, literals, constraints and clauses."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Union

_var_ids = itertools.count(1)


def fresh_id() -> int:
    return next(_var_ids)


@dataclass(frozen=True, slots=True)
class Const:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Num:
    value: Fraction

    def __str__(self) -> str:
        return format_number(self.value)


@dataclass(frozen=True, slots=True)
class Var:
    name: str
    id: int = field(default_factory=fresh_id)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Compound:
    functor: str
    args: tuple

    def __post_init__(self):
        if not self.args:
            raise ValueError("compound terms need at least one argument; use Const")

    def __str__(self) -> str:
        return f"{self.functor}({','.join(str(a) for a in self.args)})"


Term = Union[Const, Num, Var, Compound]


def format_number(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{value.numerator}/{value.denominator}"
    digits = max(twos, fives)
    scaled = abs(value) * 10**digits
    whole, frac = divmod(int(scaled), 10**digits)
    sign = "-" if value < 0 else ""
    return f"{sign}{whole}.{frac:0{digits}d}"


def term_vars(t: Term) -> Iterator[Var]:
    """Variables of ``t`` in left-to-right order, with repetitions."""
    if isinstance(t, Var):
        yield t
    elif isinstance(t, Compound):
        for a in t.args:
            yield from term_vars(a)


def is_ground(t: Term) -> bool:
    return next(term_vars(t), None) is None


def substitute(t: Term, mapping: dict) -> Term:
    if isinstance(t, Var):
        return mapping.get(t, t)
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(substitute(a, mapping) for a in t.args))
    return t


def functor_of(t: Term) -> tuple[str, int]:
    if isinstance(t, Compound):
        return t.functor, len(t.args)
    if isinstance(t, Const):
        return t.name, 0
    raise TypeError(f"not an atom: {t!r}")


def atom_args(t: Term) -> tuple:
    return t.args if isinstance(t, Compound) else ()


def make_atom(name: str, args) -> Term:
    args = tuple(args)
    return Compound(name, args) if args else Const(name)


@dataclass(frozen=True, slots=True)
class Literal:
    """An atom with optional classical (``-``) and default (``not``) negation."""

    atom: Term
    classical: bool = False
    naf: bool = False

    @property
    def name(self) -> str:
        atom = self.atom
        return atom.functor if type(atom) is Compound else atom.name

    @property
    def args(self) -> tuple:
        return atom_args(self.atom)

    @property
    def pred(self) -> tuple[str, int]:
        """Predicate key; classical negation is a distinct predicate ``-p``."""
        name, arity = functor_of(self.atom)
        return ("-" + name if self.classical else name), arity

    @property
    def is_helper(self) -> bool:
        name = self.name
        return name.startswith("o_") or name == "global_constraint"

    def negate(self) -> "Literal":
        return Literal(self.atom, self.classical, not self.naf)

    def positive(self) -> "Literal":
        return Literal(self.atom, self.classical, False)

    def with_atom(self, atom: Term) -> "Literal":
        return Literal(atom, self.classical, self.naf)

    def __str__(self) -> str:
        return ("not " if self.naf else "") + ("-" if self.classical else "") + str(self.atom)


COMPLEMENT_OP = {"=": "\\=", "\\=": "=", "<": ">=", ">=": "<", ">": "=<", "=<": ">"}
ORDER_OPS = frozenset({"<", ">", "=<", ">="})


@dataclass(frozen=True, slots=True)
class Constraint:
    op: str
    lhs: Term
    rhs: Term

    def negate(self) -> "Constraint":
        return Constraint(COMPLEMENT_OP[self.op], self.lhs, self.rhs)

    def __str__(self) -> str:
        return f"{self.lhs} {self.op} {self.rhs}"


@dataclass(frozen=True, slots=True)
class Forall:
    """Constructive universal quantification of ``var`` over ``goal``."""

    var: Var
    goal: Union[Literal, "Forall"]

    def __str__(self) -> str:
        return f"forall({self.var}, {self.goal})"


BodyItem = Union[Literal, Constraint, Forall]


def item_vars(item) -> Iterator[Var]:
    if isinstance(item, Literal):
        yield from term_vars(item.atom)
    elif isinstance(item, Constraint):
        yield from term_vars(item.lhs)
        yield from term_vars(item.rhs)
    elif isinstance(item, Forall):
        yield item.var
        yield from item_vars(item.goal)


def substitute_item(item, mapping: dict):
    if isinstance(item, Literal):
        return item.with_atom(substitute(item.atom, mapping))
    if isinstance(item, Constraint):
        return Constraint(item.op, substitute(item.lhs, mapping), substitute(item.rhs, mapping))
    if isinstance(item, Forall):
        return Forall(mapping.get(item.var, item.var), substitute_item(item.goal, mapping))
    raise TypeError(item)


def unique(seq) -> list:
    return list(dict.fromkeys(seq))


@dataclass(frozen=True)
class Clause:
    head: Literal | None
    body: tuple = ()
    span: tuple[int, int] = (0, 0)

    @property
    def variables(self) -> list[Var]:
        out = list(term_vars(self.head.atom)) if self.head else []
        for item in self.body:
            out.extend(item_vars(item))
        return unique(out)

    def rename(self) -> "Clause":
        mapping = {v: Var(v.name) for v in self.variables}
        head = self.head.with_atom(substitute(self.head.atom, mapping)) if self.head else None
        return Clause(head, tuple(substitute_item(i, mapping) for i in self.body), self.span)

    def __str__(self) -> str:
        body = ", ".join(str(i) for i in self.body)
        if self.head is None:
            return f":- {body}."
        return f"{self.head} :- {body}." if body else f"{self.head}."
