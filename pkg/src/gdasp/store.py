"""Unification and the per-variable constraint store.

Bindings, disequalities and numeric bounds live in plain dicts; every
mutation is recorded on a trail so that :meth:`ConstraintStore.undo` can
restore any earlier state during chronological backtracking.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .terms import Compound, Const, Constraint, Num, Term, Var, format_number, is_ground

_MISSING = object()


class UnsupportedError(Exception):
    """A constraint outside the supported fragment was requested."""


@dataclass(frozen=True)
class Interval:
    lower: Fraction | None = None
    lower_strict: bool = False
    upper: Fraction | None = None
    upper_strict: bool = False

    def contains(self, x: Fraction) -> bool:
        if self.lower is not None and (x < self.lower or (self.lower_strict and x == self.lower)):
            return False
        if self.upper is not None and (x > self.upper or (self.upper_strict and x == self.upper)):
            return False
        return True

    def is_empty(self) -> bool:
        if self.lower is None or self.upper is None:
            return False
        if self.lower < self.upper:
            return False
        return self.lower > self.upper or self.lower_strict or self.upper_strict

    def intersect(self, other: "Interval") -> "Interval":
        lo, lo_s = self.lower, self.lower_strict
        if other.lower is not None and (lo is None or other.lower > lo or (other.lower == lo and other.lower_strict)):
            lo, lo_s = other.lower, other.lower_strict
        hi, hi_s = self.upper, self.upper_strict
        if other.upper is not None and (hi is None or other.upper < hi or (other.upper == hi and other.upper_strict)):
            hi, hi_s = other.upper, other.upper_strict
        return Interval(lo, lo_s, hi, hi_s)

    def punch(self, x: Fraction) -> "Interval":
        """Exclude ``x`` when it sits on a closed endpoint."""
        iv = self
        if iv.lower is not None and iv.lower == x and not iv.lower_strict:
            iv = Interval(iv.lower, True, iv.upper, iv.upper_strict)
        if iv.upper is not None and iv.upper == x and not iv.upper_strict:
            iv = Interval(iv.lower, iv.lower_strict, iv.upper, True)
        return iv

    def __le__(self, other: "Interval") -> bool:
        """``self`` is contained in ``other``."""
        return self.intersect(other) == self


_FLIP = {"<": ">", ">": "<", "=<": ">=", ">=": "=<"}


def _bound(op: str, value: Fraction) -> Interval:
    if op == "<":
        return Interval(upper=value, upper_strict=True)
    if op == "=<":
        return Interval(upper=value)
    if op == ">":
        return Interval(lower=value, lower_strict=True)
    return Interval(lower=value)


def _compare(op: str, a: Fraction, b: Fraction) -> bool:
    return {"<": a < b, ">": a > b, "=<": a <= b, ">=": a >= b}[op]


class ConstraintStore:
    def __init__(self, occurs_check: bool = False):
        self.bindings: dict[Var, Term] = {}
        self.diseq: dict[Var, tuple] = {}
        self.interval: dict[Var, Interval] = {}
        self.pairs: dict[Var, frozenset] = {}
        self.trail: list = []
        self.occurs_check = occurs_check

    # trail

    def mark(self) -> int:
        return len(self.trail)

    def undo(self, mark: int) -> None:
        trail = self.trail
        while len(trail) > mark:
            table, key, old = trail.pop()
            if old is _MISSING:
                del table[key]
            else:
                table[key] = old

    def _set(self, table: dict, key, value) -> None:
        self.trail.append((table, key, table.get(key, _MISSING)))
        table[key] = value

    def _del(self, table: dict, key) -> None:
        if key in table:
            self.trail.append((table, key, table[key]))
            del table[key]

    def copy(self) -> "ConstraintStore":
        s = ConstraintStore(self.occurs_check)
        s.bindings = dict(self.bindings)
        s.diseq = dict(self.diseq)
        s.interval = dict(self.interval)
        s.pairs = dict(self.pairs)
        return s

    def snapshot(self) -> tuple:
        return (dict(self.bindings), dict(self.diseq), dict(self.interval), dict(self.pairs))

    # dereferencing

    def deref(self, t: Term) -> Term:
        bindings = self.bindings
        while isinstance(t, Var) and t in bindings:
            t = bindings[t]
        return t

    def resolve(self, t: Term) -> Term:
        t = self.deref(t)
        if isinstance(t, Compound):
            return Compound(t.functor, tuple(self.resolve(a) for a in t.args))
        return t

    def is_constrained(self, v: Var) -> bool:
        return v in self.diseq or v in self.interval or v in self.pairs

    # unification

    def unify(self, a: Term, b: Term) -> bool:
        """Unify ``a`` and ``b``; on failure the store is left unchanged."""
        mark = self.mark()
        try:
            if self._unify(a, b):
                return True
        except UnsupportedError:
            self.undo(mark)
            raise
        self.undo(mark)
        return False

    def _unify(self, a: Term, b: Term) -> bool:
        a = self.deref(a)
        b = self.deref(b)
        if a is b or a == b:
            return True
        if isinstance(a, Var):
            return self._bind(a, b)
        if isinstance(b, Var):
            return self._bind(b, a)
        if isinstance(a, Compound) and isinstance(b, Compound):
            if a.functor != b.functor or len(a.args) != len(b.args):
                return False
            return all(self._unify(x, y) for x, y in zip(a.args, b.args))
        return False

    def _occurs(self, v: Var, t: Term) -> bool:
        t = self.deref(t)
        if t == v:
            return True
        return isinstance(t, Compound) and any(self._occurs(v, a) for a in t.args)

    def _bind(self, v: Var, t: Term) -> bool:
        if self.occurs_check and isinstance(t, Compound) and self._occurs(v, t):
            return False
        excluded = self.diseq.get(v, ())
        interval = self.interval.get(v)
        partners = self.pairs.get(v, frozenset())
        self._set(self.bindings, v, t)
        self._del(self.diseq, v)
        self._del(self.interval, v)
        self._del(self.pairs, v)
        for w in partners:
            self._set(self.pairs, w, self.pairs[w] - {v})
            if not self.pairs[w]:
                self._del(self.pairs, w)
        if isinstance(t, Var):
            if t in partners:
                return False
            for g in excluded:
                if not self._add_diseq(t, g):
                    return False
            if interval is not None and not self._narrow(t, interval):
                return False
            return all(self._add_pair(t, w) for w in partners)
        if interval is not None:
            if not isinstance(t, Num) or not interval.contains(t.value):
                return False
        return all(self._disunify(t, g) for g in excluded) and all(self._disunify(t, w) for w in partners)

    # disequality

    def _add_diseq(self, v: Var, g: Term) -> bool:
        current = self.diseq.get(v, ())
        if g in current:
            return True
        iv = self.interval.get(v)
        if iv is not None and isinstance(g, Num):
            if not iv.contains(g.value):
                return True
            punched = iv.punch(g.value)
            if punched.is_empty():
                return False
            if punched != iv:
                self._set(self.interval, v, punched)
                return True
        self._set(self.diseq, v, current + (g,))
        return True

    def _add_pair(self, v: Var, w: Var) -> bool:
        if v == w:
            return False
        self._set(self.pairs, v, self.pairs.get(v, frozenset()) | {w})
        self._set(self.pairs, w, self.pairs.get(w, frozenset()) | {v})
        return True

    def _mgu(self, a: Term, b: Term) -> list | None:
        """Bindings needed to make ``a`` and ``b`` equal, or None if impossible."""
        mark = self.mark()
        try:
            ok = self._unify(a, b)
        except UnsupportedError:
            self.undo(mark)
            raise
        if not ok:
            self.undo(mark)
            return None
        made = [
            (key, self.bindings[key])
            for table, key, old in self.trail[mark:]
            if table is self.bindings and old is _MISSING
        ]
        self.undo(mark)
        return made

    def _disunify(self, a: Term, b: Term) -> bool:
        made = self._mgu(a, b)
        if made is None:
            return True
        if not made:
            return False
        if len(made) > 1:
            raise UnsupportedError(f"cannot constrain {self.show(a)} \\= {self.show(b)} without a disjunction")
        v, t = made[0]
        t = self.resolve(t)
        if isinstance(t, Var):
            return self._add_pair(v, t)
        if not is_ground(t):
            raise UnsupportedError(f"disequality against non-ground term {self.show(t)}")
        return self._add_diseq(v, t)

    def disunify(self, a: Term, b: Term) -> bool:
        """Constrain ``a`` and ``b`` to differ.

        Returns False when they are identical; raises
        :class:`UnsupportedError` when the disequality would need a
        disjunction or a non-ground excluded term.
        """
        mark = self.mark()
        try:
            ok = self._disunify(a, b)
        except UnsupportedError:
            self.undo(mark)
            raise
        if not ok:
            self.undo(mark)
        return ok

    def disunify_cases(self, a: Term, b: Term) -> list | None:
        """Split ``a \\= b`` into single-variable cases.

        Returns None if the terms cannot unify (nothing to do), an empty
        list if they are identical, else a list of (equalities, (var, term))
        alternatives: bind the equalities, then exclude term from var.
        """
        made = self._mgu(a, b)
        if made is None:
            return None
        return [(made[:i], made[i]) for i in range(len(made))]

    # numeric constraints

    def _narrow(self, v: Var, iv: Interval) -> bool:
        old = self.interval.get(v)
        new = iv if old is None else old.intersect(iv)
        for g in self.diseq.get(v, ()):
            if isinstance(g, Num):
                new = new.punch(g.value)
        if new.is_empty():
            return False
        if old != new:
            self._set(self.interval, v, new)
        return True

    def add_order_constraint(self, c: Constraint) -> bool:
        lhs = self.deref(c.lhs)
        rhs = self.deref(c.rhs)
        op = c.op
        for side in (lhs, rhs):
            if not isinstance(side, (Num, Var)):
                raise UnsupportedError(f"order comparison on non-numeric term {self.show(side)}")
        if isinstance(lhs, Num) and isinstance(rhs, Num):
            return _compare(op, lhs.value, rhs.value)
        if isinstance(lhs, Var) and isinstance(rhs, Var):
            raise UnsupportedError(f"comparison between two unbound variables: {self.show(c)}")
        if isinstance(lhs, Num):
            lhs, rhs, op = rhs, lhs, _FLIP[op]
        mark = self.mark()
        if self._narrow(lhs, _bound(op, rhs.value)):
            return True
        self.undo(mark)
        return False

    def add_constraint(self, c: Constraint) -> bool:
        if c.op == "=":
            return self.unify(c.lhs, c.rhs)
        if c.op == "\\=":
            return self.disunify(c.lhs, c.rhs)
        return self.add_order_constraint(c)

    # projection

    def constraints_of(self, v: Var) -> list[tuple[str, Term]]:
        """(op, value) pairs constraining the free variable ``v``."""
        out = []
        for g in sorted(self.diseq.get(v, ()), key=lambda t: self.show(t)):
            out.append(("\\=", g))
        for w in sorted(self.pairs.get(v, ()), key=lambda w: (w.name, w.id)):
            out.append(("\\=", w))
        iv = self.interval.get(v)
        if iv is not None:
            if iv.lower is not None:
                out.append((">" if iv.lower_strict else ">=", Num(iv.lower)))
            if iv.upper is not None:
                out.append(("<" if iv.upper_strict else "=<", Num(iv.upper)))
        return out

    def show(self, t, names: dict | None = None) -> str:
        if isinstance(t, Constraint):
            return f"{self.show(t.lhs, names)} {t.op} {self.show(t.rhs, names)}"
        t = self.resolve(t)
        return _show_term(t, names)

    def project(self, variables, names: dict | None = None) -> list[str]:
        """One rendered constraint list per query variable."""
        out = []
        for v in variables:
            name = (names or {}).get(v, v.name)
            t = self.resolve(v)
            if not isinstance(t, Var):
                out.append(f"{name} = {_show_term(t, names)}")
                continue
            cs = self.constraints_of(t)
            if t != v and (names or {}).get(t, t.name) != name:
                cs = [("=", t)] + cs
            if not cs:
                out.append(name)
            else:
                out.append(", ".join(f"{name} {op} {_show_term(val, names)}" for op, val in cs))
        return out


def _show_term(t: Term, names: dict | None = None) -> str:
    if isinstance(t, Var):
        return (names or {}).get(t, t.name)
    if isinstance(t, Num):
        return format_number(t.value)
    if isinstance(t, Const):
        return t.name
    return f"{t.functor}({','.join(_show_term(a, names) for a in t.args)})"
