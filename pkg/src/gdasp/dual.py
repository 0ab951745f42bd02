"""Dual program synthesis and global-constraint assembly.

For a predicate ``p/n`` defined by clauses ``p_1 .. p_k`` the compiler
produces::

    not p(X) :- not o_p_1(X), ..., not o_p_k(X).
    not o_p_i(X) :- <clause j: items 1..j-1, negation of item j>.

Head arguments that are not fresh variables become equality guards, and
clauses with body-only variables get a ``forall`` wrapper around a wider
helper ``not o_p_i(X, Y)``.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field

import networkx as nx

from .parser import Program
from .terms import (
    Clause,
    Constraint,
    Forall,
    Literal,
    Var,
    item_vars,
    make_atom,
    substitute,
    substitute_item,
    unique,
)


def helper_name(pred: tuple[str, int], i: int) -> str:
    return f"o_{pred[0]}_{i}"


def canonical_vars(n: int) -> tuple:
    return tuple(Var(_letter(j)) for j in range(n))


def _letter(j: int) -> str:
    letters = string.ascii_uppercase
    return letters[j] if j < 26 else f"{letters[j % 26]}{j // 26}"


def negate_item(item):
    if isinstance(item, (Literal, Constraint)):
        return item.negate()
    raise TypeError(f"cannot negate {item!r}")


@dataclass
class GlobalConstraintSet:
    checks: list = field(default_factory=list)  # of (name, denial Clause, origin)
    clauses: list = field(default_factory=list)  # dual clauses for the checks

    @property
    def entry(self) -> Literal | None:
        return Literal(make_atom("o_chk", ()), naf=True) if self.checks else None


@dataclass
class DualProgram:
    program: Program
    clauses: dict  # pred -> list[Clause], source order
    duals: dict  # pred of the positive atom -> list[Clause] with naf heads
    order: list  # defined predicates, first-appearance order
    listing: dict  # pred -> its aggregate dual and helper clauses, in order
    undefined: list  # called but never defined
    global_constraints: GlobalConstraintSet
    raw: bool = False

    def defines(self, pred) -> bool:
        return pred in self.clauses


def _guard_items(clause: Clause, head_vars: tuple) -> tuple[list, list]:
    """Normalize a clause head onto ``head_vars``; returns (items, body-only vars)."""
    mapping: dict = {}
    guards = []
    for x, t in zip(head_vars, clause.head.args):
        if isinstance(t, Var) and t not in mapping:
            mapping[t] = x
        else:
            guards.append((x, t))
    items = [Constraint("=", x, substitute(t, mapping)) for x, t in guards]
    items += [substitute_item(i, mapping) for i in clause.body]
    local = [v for v in unique(v for i in items for v in item_vars(i)) if v not in head_vars]
    return items, local


def dual_of_body(name: str, head_vars: tuple, items: list, local: list, raw: bool = False) -> list[Clause]:
    """Dual clauses stating that no instance of ``items`` holds."""
    head = Literal(make_atom(name, head_vars), naf=True)
    if local:
        inner_vars = tuple(head_vars) + tuple(local)
        goal = Literal(make_atom(name, inner_vars), naf=True)
        for v in reversed(local):
            goal = Forall(v, goal)
        return [Clause(head, (goal,))] + dual_of_body(name, inner_vars, items, [], raw)
    out = []
    for j, item in enumerate(items):
        prefix = [] if raw else list(items[:j])
        out.append(Clause(head, tuple(prefix + [negate_item(item)])))
    return out


def compile_predicate(pred, clauses: list[Clause], raw: bool = False) -> list[Clause]:
    """Aggregate dual plus one helper definition per clause."""
    head_vars = canonical_vars(pred[1])
    classical = pred[0].startswith("-")
    base = pred[0][1:] if classical else pred[0]
    agg_head = Literal(make_atom(base, head_vars), classical=classical, naf=True)
    agg_body = tuple(
        Literal(make_atom(helper_name(pred, i), head_vars), naf=True) for i in range(1, len(clauses) + 1)
    )
    out = [Clause(agg_head, agg_body)]
    for i, clause in enumerate(clauses, 1):
        items, local = _guard_items(clause, head_vars)
        out.extend(dual_of_body(helper_name(pred, i), head_vars, items, local, raw))
    return out


def _dependency_graph(program: Program) -> nx.DiGraph:
    g = nx.DiGraph()
    for c in program.clauses:
        h = c.head.pred
        g.add_node(h)
        for item in c.body:
            if isinstance(item, Literal):
                b = item.pred
                sign = 1 if item.naf else 0
                prev = g.get_edge_data(h, b, {}).get("signs", frozenset())
                g.add_edge(h, b, signs=prev | {sign})
    return g


def _odd_components(g: nx.DiGraph) -> set:
    """Predicates lying in a strongly connected component with an odd cycle of negations."""
    odd = set()
    for comp in nx.strongly_connected_components(g):
        if len(comp) == 1:
            (p,) = comp
            signs = g.get_edge_data(p, p, {}).get("signs", frozenset())
            if 1 in signs:
                odd.add(p)
            continue
        parity: dict = {}
        start = next(iter(comp))
        parity[start] = 0
        stack = [start]
        conflict = False
        while stack and not conflict:
            u = stack.pop()
            for v in g.successors(u):
                if v not in comp:
                    continue
                for s in g[u][v]["signs"]:
                    want = parity[u] ^ s
                    if v not in parity:
                        parity[v] = want
                        stack.append(v)
                    elif parity[v] != want:
                        conflict = True
        if conflict:
            odd |= comp
    return odd


def detect_odd_loop_rules(program: Program) -> list[Clause]:
    """Denials ``:- B, not h`` for each rule ``h :- B`` on an odd loop over negation.

    For the direct form ``r :- q, not r`` this is ``:- q, not r``.
    """
    g = _dependency_graph(program)
    odd = _odd_components(g)
    comps = {}
    for comp in nx.strongly_connected_components(g):
        for p in comp:
            comps[p] = frozenset(comp)
    out = []
    for c in program.clauses:
        h = c.head.pred
        if h not in odd:
            continue
        if not any(isinstance(i, Literal) and i.pred in comps[h] for i in c.body):
            continue
        guard = c.head.negate()
        body = list(c.body)
        if guard not in body:
            body.append(guard)
        out.append(Clause(None, tuple(body), c.span))
    return out


def _occurring_preds(program: Program) -> list:
    preds = []
    for c in program.clauses + program.denials:
        if c.head is not None:
            preds.append(c.head.pred)
        preds.extend(i.pred for i in c.body if isinstance(i, Literal))
    if program.query is not None:
        preds.extend(i.pred for i in program.query.literals)
    return unique(preds)


def classical_negation_checks(program: Program) -> list[Clause]:
    """One denial ``:- p(X), -p(X)`` per predicate used with both polarities."""
    preds = set(_occurring_preds(program))
    out = []
    for name, arity in _occurring_preds(program):
        if name.startswith("-") and (name[1:], arity) in preds:
            xs = tuple(Var(v) for v in _var_names(arity))
            atom = make_atom(name[1:], xs)
            out.append(Clause(None, (Literal(atom), Literal(atom, classical=True))))
    return out


def _var_names(n: int) -> list[str]:
    base = ["X", "Y", "Z"]
    return base[:n] if n <= 3 else [f"X{i}" for i in range(1, n + 1)]


def assemble_global_constraint(denials: list, raw: bool = False) -> GlobalConstraintSet:
    """Number the checks ``o_chk_j`` and build their dual clauses.

    ``denials`` is a list of (Clause, origin) pairs, user denials first.
    """
    gcs = GlobalConstraintSet()
    if not denials:
        return gcs
    entry_body = []
    for j, (denial, origin) in enumerate(denials, 1):
        name = f"o_chk_{j}"
        gcs.checks.append((name, denial, origin))
        variables = [v for v in unique(v for i in denial.body for v in item_vars(i))]
        gcs.clauses.extend(dual_of_body(name, (), list(denial.body), variables, raw))
        entry_body.append(Literal(make_atom(name, ()), naf=True))
    gcs.clauses.insert(0, Clause(gcs.entry, tuple(entry_body)))
    return gcs


def compile_duals(program: Program, raw: bool = False) -> DualProgram:
    clauses: dict = {}
    for c in program.clauses:
        clauses.setdefault(c.head.pred, []).append(c)
    duals: dict = {}
    listing: dict = {}
    for pred, cs in clauses.items():
        listing[pred] = compile_predicate(pred, cs, raw)
        for d in listing[pred]:
            duals.setdefault(d.head.positive().pred, []).append(d)
    denials = [(d, "user") for d in program.denials]
    denials += [(d, "odd loop") for d in detect_odd_loop_rules(program)]
    denials += [(d, "classical negation") for d in classical_negation_checks(program)]
    gcs = assemble_global_constraint(denials, raw)
    for d in gcs.clauses:
        duals.setdefault(d.head.positive().pred, []).append(d)
    called = []
    for c in program.clauses + [d for d, _ in denials]:
        called.extend(i.pred for i in c.body if isinstance(i, Literal))
    undefined = [p for p in unique(called) if p not in clauses]
    return DualProgram(program, clauses, duals, list(clauses), listing, undefined, gcs, raw)


# listing

def emit_dual_text(dual: DualProgram, human: bool = False) -> str:
    """Original program, its dual and the global constraints as text."""
    from . import render

    sections = []
    originals = dual.program.clauses + dual.program.denials
    if originals:
        sections.append(("% original program", originals))
    dual_clauses = []
    for pred in dual.order:
        dual_clauses.extend(dual.listing[pred])
    if dual_clauses:
        sections.append(("% dual rules", dual_clauses))
    undefined = [Clause(Literal(make_atom(p[0].lstrip("-"), canonical_vars(p[1])), p[0].startswith("-"), True))
                 for p in dual.undefined]
    if undefined:
        sections.append(("% never defined", undefined))
    gc = []
    gcs = dual.global_constraints
    for name, denial, _origin in gcs.checks:
        vs = unique(v for i in denial.body for v in item_vars(i))
        gc.append(Clause(Literal(make_atom(name, tuple(vs))), denial.body))
    if gcs.checks:
        gc.append(Clause(Literal(make_atom("global_constraint", ())), (gcs.entry,)))
        gc.extend(gcs.clauses)
    else:
        gc.append(Clause(Literal(make_atom("global_constraint", ()))))
    sections.append(("% global constraints", gc))
    patterns = dual.program.pred_patterns
    lines = []
    for title, cs in sections:
        if lines:
            lines.append("")
        lines.append(title)
        for c in cs:
            lines.append(render.nl_clause(c, patterns) if human else render.format_clause(c))
    return "\n".join(lines) + "\n"
