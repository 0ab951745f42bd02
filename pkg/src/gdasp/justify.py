"""Justification trees, detail-level filtering and partial models."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .terms import Constraint, Forall, Literal, item_vars

ROOT = "query"


@dataclass(frozen=True)
class Node:
    item: object  # Literal | Constraint | Forall | ROOT
    marker: str | None = None  # None | "chs" | "proved"
    children: tuple = ()

    @property
    def kind(self) -> str:
        item = self.item
        if item == ROOT:
            return "root"
        if isinstance(item, Constraint):
            return "constraint"
        if isinstance(item, Forall):
            return "forall"
        if isinstance(item, Literal):
            if item.name == "global_constraint":
                return "global"
            return "helper" if item.is_helper else "user"
        return "builtin"

    def walk(self):
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def size(self) -> int:
        return sum(1 for _ in self.walk())


class Level(Enum):
    SHORT = "short"
    MID = "mid"
    LONG = "long"


@dataclass(frozen=True)
class DetailLevel:
    level: Level = Level.MID
    neg: bool = False


def _pattern_matches(patterns, lit: Literal) -> bool:
    from .render import find_pattern

    return find_pattern(patterns, lit) is not None


def _shown(lit: Literal, show, neg: bool) -> bool:
    name, arity = lit.pred
    for (sname, sarity), snaf in show:
        if sname != name or (sarity is not None and sarity != arity):
            continue
        if snaf == lit.naf or (neg and lit.naf and not snaf):
            return True
    return False


def _keep(node: Node, d: DetailLevel, show, patterns, human: bool) -> bool:
    kind = node.kind
    if kind in ("root", "global"):
        return True
    if kind != "user":
        return False
    lit = node.item
    if d.level is Level.MID and (d.neg or not lit.naf):
        return True
    # mid also keeps whatever short would, so views nest
    if human and patterns and _pattern_matches(patterns, lit):
        return True
    return _shown(lit, show, d.neg)


def filter_tree(t: Node, d: DetailLevel, show=(), patterns=(), human: bool = False) -> Node:
    """Drop nodes hidden at level ``d``, splicing their children into the parent."""
    if d.level is Level.LONG:
        return t
    return _filter(t, d, show, patterns, human)[0]


def _filter(node: Node, d, show, patterns, human) -> list[Node]:
    kids: list[Node] = []
    for child in node.children:
        kids.extend(_filter(child, d, show, patterns, human))
    kids = _dedupe_adjacent(kids)
    if _keep(node, d, show, patterns, human):
        return [Node(node.item, node.marker, tuple(kids))]
    return kids


def _dedupe_adjacent(nodes: list[Node]) -> list[Node]:
    out: list[Node] = []
    for n in nodes:
        if not out or out[-1] != n:
            out.append(n)
    return out


@dataclass(frozen=True)
class PartialModel:
    literals: tuple

    def __iter__(self):
        return iter(self.literals)

    def __len__(self) -> int:
        return len(self.literals)


def model_of(t: Node, hidden=frozenset()) -> PartialModel:
    """User literals of the tree in first-appearance order.

    Default-negated literals of predicates in ``hidden`` are left out unless
    they are query literals themselves.
    """
    seen: dict = {}
    top = {id(c) for c in t.children} if t.kind == "root" else set()
    for node in t.walk():
        if node.kind != "user":
            continue
        lit = node.item
        if lit.naf and lit.pred in hidden and id(node) not in top:
            continue
        seen.setdefault(lit, None)
    return PartialModel(tuple(seen))


def tree_literals(t: Node) -> set:
    return {n.item for n in t.walk() if n.kind == "user"}


def tree_vars(t: Node) -> list:
    """Variables in preorder of first appearance."""
    seen: dict = {}
    for node in t.walk():
        if node.kind in ("root", "global"):
            continue
        for v in item_vars(node.item):
            seen.setdefault(v, None)
    return list(seen)
