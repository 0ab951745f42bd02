"""Top-down evaluation over the original and dual programs.

Goals are solved by nested generators over one mutable
:class:`~gdasp.store.ConstraintStore`; each generator undoes its own store
changes before trying its next alternative, which gives chronological
backtracking. Every success carries the justification subtree of the goal.
"""

from __future__ import annotations

import logging
import string
import sys
import threading
from dataclasses import dataclass, field
from typing import Iterator

from .dual import DualProgram
from .justify import ROOT, Node, PartialModel, model_of, tree_vars
from .parser import Query
from .store import ConstraintStore, UnsupportedError
from .terms import (
    Compound,
    Const,
    Constraint,
    Forall,
    Literal,
    Var,
    is_ground,
    substitute_item,
)

log = logging.getLogger(__name__)

GLOBAL = Literal(Const("global_constraint"))


class DepthLimitError(Exception):
    pass


@dataclass
class Frame:
    literal: Literal
    flips: int  # polarity changes between the root and this call


@dataclass
class Answer:
    tree: Node
    store: ConstraintStore
    names: dict
    bindings: list
    model: PartialModel
    query: Query

    def name_of(self, v: Var) -> str:
        return self.names.get(v, v.name)


@dataclass
class Solver:
    dual: DualProgram
    depth: int | None = None
    occurs_check: bool = False
    diagnostics: list = field(default_factory=list)

    def __post_init__(self):
        self.store = ConstraintStore(self.occurs_check)
        self.stack: list[Frame] = []
        self._ancestors: dict = {}
        self._proved: dict = {}

    # public

    def solve(self, query: Query, limit: int = 0) -> Iterator[Answer]:
        """Answers to ``query`` in depth-first, clause-order; ``limit`` 0 means all."""
        store = self.store
        mark = store.mark()
        count = 0
        try:
            if not all(self._add_constraint(c) for c in query.constraints):
                return
            for children in self._solve_items(query.literals, False, 0, 0):
                for gnode in self._check_global():
                    tree = Node(ROOT, None, children + (gnode,))
                    if not self.founded(tree):
                        continue
                    yield self._answer(query, tree)
                    count += 1
                    if limit and count >= limit:
                        return
        finally:
            store.undo(mark)
            self.stack.clear()
            self._ancestors.clear()
            self._proved.clear()

    # bookkeeping

    def _diag(self, message: str) -> None:
        if message not in self.diagnostics:
            log.debug(message)
            self.diagnostics.append(message)

    def _push(self, frame: Frame) -> None:
        self.stack.append(frame)
        lit = frame.literal
        self._ancestors.setdefault((lit.naf, lit.pred), []).append(frame)

    def _pop(self) -> None:
        frame = self.stack.pop()
        lit = frame.literal
        self._ancestors[(lit.naf, lit.pred)].pop()

    def _record(self, lit: Literal) -> None:
        self._proved.setdefault((lit.naf, lit.pred), []).append(lit)

    def _unrecord(self, lit: Literal) -> None:
        self._proved[(lit.naf, lit.pred)].pop()

    def _is_proved(self, lit: Literal) -> bool:
        entries = self._proved.get((lit.naf, lit.pred))
        if not entries:
            return False
        resolve = self.store.resolve
        target = resolve(lit.atom)
        return any(resolve(e.atom) == target for e in entries)

    def _add_constraint(self, c: Constraint) -> bool:
        try:
            return self.store.add_constraint(c)
        except UnsupportedError as e:
            self._diag(f"unsupported: {e}")
            return False

    def _unify(self, a, b) -> bool:
        try:
            return self.store.unify(a, b)
        except UnsupportedError as e:
            self._diag(f"unsupported: {e}")
            return False

    # goals

    def _solve_items(self, items, naf: bool, flips: int, depth: int, i: int = 0):
        if i == len(items):
            yield ()
            return
        for node in self._solve_item(items[i], naf, flips, depth):
            for rest in self._solve_items(items, naf, flips, depth, i + 1):
                yield (node,) + rest

    def _solve_item(self, item, naf: bool, flips: int, depth: int):
        if isinstance(item, Literal):
            return self.solve_goal(item, naf, flips, depth)
        if isinstance(item, Forall):
            return self.eval_forall(item, naf, flips, depth)
        return self._solve_constraint(item)

    def _solve_constraint(self, c: Constraint):
        mark = self.store.mark()
        if self._add_constraint(c):
            yield Node(c)
        self.store.undo(mark)

    def solve_goal(self, lit: Literal, parent_naf: bool, parent_flips: int, depth: int):
        """Prove ``lit``; yields its justification node once per proof."""
        if self.depth is not None and depth > self.depth:
            self._diag(f"depth limit {self.depth} exceeded at {self.store.show(lit.atom)}")
            return
        flips = parent_flips + (lit.naf != parent_naf)
        if lit.is_helper:
            yield from self._expand(lit, flips, depth)
            return
        if self._is_proved(lit):
            yield Node(lit, "proved")
            return
        for _ in self._consistent(lit):
            yield from self._expand(lit, flips, depth)

    def _consistent(self, lit: Literal):
        """Make ``lit`` differ from every complementary literal already assumed."""
        key = (not lit.naf, lit.pred)
        entries = [f.literal for f in self._ancestors.get(key, ())] + list(self._proved.get(key, ()))
        return self._differ(lit, entries, 0)

    def _differ(self, lit: Literal, entries: list, k: int):
        if k == len(entries):
            yield
            return
        store = self.store
        try:
            cases = store.disunify_cases(entries[k].atom, lit.atom)
        except UnsupportedError as e:
            self._diag(f"unsupported: {e}")
            return
        if cases is None:
            yield from self._differ(lit, entries, k + 1)
            return
        for equalities, (v, t) in cases:
            mark = store.mark()
            try:
                ok = all(store.unify(a, b) for a, b in equalities) and store.disunify(v, t)
            except UnsupportedError as e:
                self._diag(f"unsupported: {e}")
                ok = False
            if ok:
                yield from self._differ(lit, entries, k + 1)
            store.undo(mark)

    def loop_check(self, lit: Literal, flips: int) -> tuple[str, Frame | None]:
        """Classify a call against its ancestors: no-loop, coinductive-success or fail-loop."""
        for frame in reversed(self._ancestors.get((lit.naf, lit.pred), ())):
            if self._variant(frame.literal.atom, lit.atom):
                distance = flips - frame.flips
                if lit.naf or (distance > 0 and distance % 2 == 0):
                    return "coinductive-success", frame
                return "fail-loop", frame
        return "no-loop", None

    def _variant(self, a, b) -> bool:
        a = self.store.resolve(a)
        b = self.store.resolve(b)
        fwd: dict = {}
        back: dict = {}

        def walk(x, y) -> bool:
            if isinstance(x, Var) or isinstance(y, Var):
                if not (isinstance(x, Var) and isinstance(y, Var)):
                    return False
                if fwd.setdefault(x, y) != y or back.setdefault(y, x) != x:
                    return False
                return True
            if isinstance(x, Compound) and isinstance(y, Compound):
                return (
                    x.functor == y.functor
                    and len(x.args) == len(y.args)
                    and all(walk(p, q) for p, q in zip(x.args, y.args))
                )
            return x == y

        return walk(a, b)

    def _expand(self, lit: Literal, flips: int, depth: int):
        status, frame = self.loop_check(lit, flips)
        if status == "fail-loop":
            return
        store = self.store
        if status == "coinductive-success":
            mark = store.mark()
            if self._unify(frame.literal.atom, lit.atom):
                yield Node(lit, "chs")
            store.undo(mark)
            return
        if lit.naf:
            clauses = self.dual.duals.get(lit.pred)
            if clauses is None:
                if not lit.is_helper and not self.dual.defines(lit.pred):
                    yield from self._succeed(lit, ())
                return
        else:
            clauses = self.dual.clauses.get(lit.pred, ())
        frame = Frame(lit, flips)
        self._push(frame)
        pushed = True
        try:
            for clause in clauses:
                c = clause.rename()
                mark = store.mark()
                if self._unify(c.head.atom, lit.atom):
                    for children in self._solve_items(c.body, lit.naf, flips, depth + 1):
                        # a finished goal is no longer an ancestor of what follows
                        self._pop()
                        pushed = False
                        yield from self._succeed(lit, children)
                        self._push(frame)
                        pushed = True
                store.undo(mark)
        finally:
            if pushed:
                self._pop()

    def _succeed(self, lit: Literal, children: tuple):
        if lit.is_helper:
            yield Node(lit, None, children)
            return
        self._record(lit)
        yield Node(lit, None, children)
        self._unrecord(lit)

    def eval_forall(self, f: Forall, naf: bool, flips: int, depth: int):
        """Constructive forall: a constrained proof plus one proof per excluded value."""
        store = self.store
        v = Var(f.var.name)
        goal = substitute_item(f.goal, {f.var: v})
        for node in self._solve_item(goal, naf, flips, depth):
            if store.deref(v) is not v or v in store.interval or v in store.pairs:
                continue
            excluded = store.diseq.get(v, ())
            if not excluded:
                yield Node(f, None, (node,))
                continue
            if not all(is_ground(t) for t in excluded):
                self._diag(f"unsupported: forall over non-ground exclusion for {f.var.name}")
                continue
            instances = [substitute_item(goal, {v: t}) for t in excluded]
            for rest in self._solve_all(instances, naf, flips, depth):
                yield Node(f, None, (node,) + rest)

    def _solve_all(self, goals, naf, flips, depth, i: int = 0):
        if i == len(goals):
            yield ()
            return
        for node in self._solve_item(goals[i], naf, flips, depth):
            for rest in self._solve_all(goals, naf, flips, depth, i + 1):
                yield (node,) + rest

    def check_global(self):
        """Prove every global constraint under the current store."""
        return self._check_global()

    def _check_global(self):
        entry = self.dual.global_constraints.entry
        if entry is None:
            yield Node(GLOBAL)
            return
        for node in self.solve_goal(entry, False, 0, 0):
            yield Node(GLOBAL, None, (node,))

    def founded(self, tree: Node) -> bool:
        """Every positive literal must have a derivation that does not rest on itself.

        A coinductive assumption reached through a negation may still close a
        purely positive cycle (``e :- not g, a.  a :- e.  g :- not a.``); such
        candidates are rejected.
        """
        resolve = self.store.resolve
        atoms = set()
        rules = []
        for node in tree.walk():
            if node.kind != "user" or node.item.naf:
                continue
            key = (node.item.classical, resolve(node.item.atom))
            atoms.add(key)
            if node.marker is None:
                deps = [
                    (c.item.classical, resolve(c.item.atom))
                    for c in node.children
                    if c.kind == "user" and not c.item.naf
                ]
                rules.append((key, deps))
        # counter-based least fixpoint
        waiting: dict = {}
        missing = []
        for i, (_key, deps) in enumerate(rules):
            deps = set(deps)
            missing.append(len(deps))
            for d in deps:
                waiting.setdefault(d, []).append(i)
        queue = [i for i, m in enumerate(missing) if m == 0]
        done: set = set()
        while queue:
            key = rules[queue.pop()][0]
            if key in done:
                continue
            done.add(key)
            for j in waiting.get(key, ()):
                missing[j] -= 1
                if missing[j] == 0:
                    queue.append(j)
        return atoms <= done

    # answers

    def _answer(self, query: Query, tree: Node) -> Answer:
        store = self.store
        resolved = resolve_tree(tree, store)
        snapshot = store.copy()
        names = assign_names(resolved, query.variables, store)
        bindings = store.project(query.variables, names)
        hidden = frozenset(self.dual.undefined) | {
            lit.pred for lit in query.literals if not self.dual.defines(lit.pred)
        }
        return Answer(resolved, snapshot, names, bindings, model_of(resolved, hidden), query)


def resolve_tree(node: Node, store: ConstraintStore) -> Node:
    item = node.item
    if isinstance(item, Literal):
        item = item.with_atom(store.resolve(item.atom))
    elif isinstance(item, Constraint):
        item = Constraint(item.op, store.resolve(item.lhs), store.resolve(item.rhs))
    elif isinstance(item, Forall):
        item = _resolve_forall(item, store)
    return Node(item, node.marker, tuple(resolve_tree(c, store) for c in node.children))


def _resolve_forall(f: Forall, store: ConstraintStore) -> Forall:
    goal = f.goal
    if isinstance(goal, Forall):
        goal = _resolve_forall(goal, store)
    else:
        goal = goal.with_atom(store.resolve(goal.atom))
    return Forall(f.var, goal)


def _letters():
    n = 0
    while True:
        for c in string.ascii_uppercase:
            yield c if n == 0 else f"{c}{n}"
        n += 1


def assign_names(tree: Node, query_vars: list, store: ConstraintStore) -> dict:
    """Printable names: query variables keep theirs, the rest get fresh letters in preorder."""
    names: dict = {}
    used: set = set()
    for v in query_vars:
        t = store.deref(v)
        names[v] = v.name
        used.add(v.name)
        if isinstance(t, Var) and t not in names:
            names[t] = v.name
    # quantified variables last, so the instances under a forall name first
    bound = {v for n in tree.walk() if n.kind == "forall" for v in _bound_vars(n.item)}
    ordered = tree_vars(tree)
    ordered = [v for v in ordered if v not in bound] + [v for v in ordered if v in bound]
    letters = _letters()
    for v in ordered:
        if v in names:
            continue
        name = next(letters)
        while name in used:
            name = next(letters)
        names[v] = name
        used.add(name)
    return names


def _bound_vars(f: Forall):
    while isinstance(f, Forall):
        yield f.var
        f = f.goal


def run_with_stack(fn, *args, stack_mb: int = 512, **kwargs):
    """Run ``fn`` in a thread with a large C stack; deep derivations nest generators."""
    result: dict = {}

    def target():
        try:
            result["value"] = fn(*args, **kwargs)
        except BaseException as e:  # re-raised in the caller
            result["error"] = e

    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 1_000_000))
    old_size = threading.stack_size()
    threading.stack_size(stack_mb * 1024 * 1024)
    try:
        t = threading.Thread(target=target)
        t.start()
        t.join()
    finally:
        threading.stack_size(old_size)
    if "error" in result:
        raise result["error"]
    return result.get("value")
