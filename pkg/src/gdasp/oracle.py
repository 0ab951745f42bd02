"""Brute-force stable models for small function-free programs.

Naive grounding over every constant of the program, then guess-and-check:
guess which negated atoms are true, take the least model of the reduct and
keep it when it reproduces the guess and violates no denial. Meant for
cross-checking the solver on tiny programs only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .parser import Program
from .terms import (
    Compound,
    Const,
    Constraint,
    Literal,
    Num,
    format_number,
    substitute,
    term_vars,
)

MAX_GUESS_ATOMS = 24


class OutOfScope(Exception):
    """The program uses features the oracle does not ground."""


class TooLarge(Exception):
    pass


@dataclass
class GroundProgram:
    atoms: list = field(default_factory=list)  # printable ground atoms, "-p(a)" for classical
    index: dict = field(default_factory=dict)
    rules: list = field(default_factory=list)  # (head index | None, pos tuple, neg tuple)

    def atom(self, key: str) -> int:
        if key not in self.index:
            self.index[key] = len(self.atoms)
            self.atoms.append(key)
        return self.index[key]

    def names(self, model) -> frozenset:
        return frozenset(self.atoms[i] for i in model)


def _show(t) -> str:
    if isinstance(t, Num):
        return format_number(t.value)
    if isinstance(t, Const):
        return t.name
    raise OutOfScope(f"compound term {t.functor}/{len(t.args)}")


def atom_key(lit: Literal) -> str:
    """Printable key of a ground literal's atom, ignoring default negation."""
    atom = lit.atom
    if isinstance(atom, Compound):
        text = f"{atom.functor}({','.join(_show(a) for a in atom.args)})"
    else:
        text = atom.name
    return ("-" if lit.classical else "") + text


def _constants(program: Program) -> list:
    seen: dict = {}

    def visit(t):
        if isinstance(t, Compound):
            raise OutOfScope(f"compound term {t.functor}/{len(t.args)}")
        if isinstance(t, (Const, Num)):
            seen.setdefault(t, None)

    for c in program.clauses + program.denials:
        items = ([c.head] if c.head else []) + list(c.body)
        for item in items:
            if isinstance(item, Literal):
                atom = item.atom
                if isinstance(atom, Compound):
                    for a in atom.args:
                        visit(a)
            elif isinstance(item, Constraint):
                if item.op not in ("=", "\\="):
                    raise OutOfScope(f"order constraint {item.op}")
                visit(item.lhs)
                visit(item.rhs)
            else:
                raise OutOfScope("forall in source program")
    return list(seen)


def ground(program: Program, extra_constants=()) -> GroundProgram:
    """Instantiate every clause over all program constants."""
    consts = _constants(program)
    for c in extra_constants:
        if c not in consts:
            consts.append(c)
    g = GroundProgram()
    for clause in program.clauses + program.denials:
        variables = clause.variables
        for values in itertools.product(consts, repeat=len(variables)):
            mapping = dict(zip(variables, values))
            rule = _ground_rule(g, clause, mapping)
            if rule is not None:
                g.rules.append(rule)
    _add_classical_pairs(g)
    return g


def _ground_rule(g: GroundProgram, clause, mapping):
    pos, neg = [], []
    for item in clause.body:
        if isinstance(item, Constraint):
            lhs, rhs = substitute(item.lhs, mapping), substitute(item.rhs, mapping)
            if (lhs == rhs) != (item.op == "="):
                return None
            continue
        lit = item.with_atom(substitute(item.atom, mapping))
        (neg if lit.naf else pos).append(g.atom(atom_key(lit)))
    head = None
    if clause.head is not None:
        head = g.atom(atom_key(clause.head.with_atom(substitute(clause.head.atom, mapping))))
    return head, tuple(pos), tuple(neg)


def _add_classical_pairs(g: GroundProgram) -> None:
    for key in list(g.atoms):
        if key.startswith("-") and key[1:] in g.index:
            g.rules.append((None, (g.index[key[1:]], g.index[key]), ()))


def least_model(g: GroundProgram, excluded: frozenset) -> frozenset:
    """Least model of the reduct: rules whose negative body meets ``excluded`` are dropped."""
    model: set = set()
    rules = [(h, pos) for h, pos, neg in g.rules if h is not None and not excluded.intersection(neg)]
    changed = True
    while changed:
        changed = False
        for h, pos in rules:
            if h not in model and all(p in model for p in pos):
                model.add(h)
                changed = True
    return frozenset(model)


def violates_denial(g: GroundProgram, model: frozenset) -> bool:
    return any(
        h is None and all(p in model for p in pos) and not any(n in model for n in neg)
        for h, pos, neg in g.rules
    )


def is_stable(g: GroundProgram, model: frozenset) -> bool:
    return least_model(g, model) == model and not violates_denial(g, model)


def stable_models(g: GroundProgram) -> set:
    """All stable models, as frozensets of printable atoms."""
    guessed = sorted({n for _, _, neg in g.rules for n in neg})
    if len(guessed) > MAX_GUESS_ATOMS:
        raise TooLarge(f"{len(guessed)} atoms under negation exceed the bound of {MAX_GUESS_ATOMS}")
    out = set()
    for bits in itertools.product((False, True), repeat=len(guessed)):
        guess = frozenset(a for a, b in zip(guessed, bits) if b)
        model = least_model(g, guess)
        if model.intersection(guessed) != guess:
            continue
        if violates_denial(g, model):
            continue
        out.add(g.names(model))
    return out


def stable_models_by_subsets(g: GroundProgram) -> set:
    """Independent check: test every subset of the Herbrand base directly."""
    n = len(g.atoms)
    if n > 16:
        raise TooLarge(f"{n} atoms")
    out = set()
    for bits in itertools.product((False, True), repeat=n):
        model = frozenset(i for i, b in enumerate(bits) if b)
        if is_stable(g, model):
            out.add(g.names(model))
    return out


def program_models(program: Program, extra_constants=()) -> set:
    return stable_models(ground(program, extra_constants))


def satisfies_query(model: frozenset, query_literals) -> bool:
    """Ground query literals against one stable model."""
    for lit in query_literals:
        if any(True for _ in term_vars(lit.atom)):
            raise OutOfScope("non-ground query")
        holds = atom_key(lit) in model
        if holds == lit.naf:
            return False
    return True


def ground_instances(query_literals, consts) -> list[dict]:
    variables = list(dict.fromkeys(v for lit in query_literals for v in term_vars(lit.atom)))
    return [dict(zip(variables, vals)) for vals in itertools.product(consts, repeat=len(variables))]


def query_models(program: Program, query_literals) -> dict:
    """Map each ground instance of the query to the stable models satisfying it."""
    g = ground(program)
    models = stable_models(g)
    consts = _constants(program)
    out = {}
    for mapping in ground_instances(query_literals, consts):
        lits = [lit.with_atom(substitute(lit.atom, mapping)) for lit in query_literals]
        key = tuple(str(lit) for lit in lits)
        out[key] = {m for m in models if satisfies_query(m, lits)}
    return out


__all__ = [
    "GroundProgram",
    "OutOfScope",
    "TooLarge",
    "atom_key",
    "ground",
    "is_stable",
    "least_model",
    "program_models",
    "query_models",
    "stable_models",
    "stable_models_by_subsets",
]
