"""Meta-types, terms and goals.

Terms are simply-typed lambda-terms over a signature of constants, with
de Bruijn indices for lambda-bound variables.  The clause/query language
(goals) is a separate layer whose atoms embed terms; a term of meta-type
`o` is always a wrapped goal (GoalTerm), never a bare application.

Kernel-generated eigenvariables are constants carrying a positive birth
timestamp; matching variables are Meta nodes around a mutable cell.
Everything else is immutable and freely shareable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .errors import StructuralError

# ---------------------------------------------------------------------------
# Meta-types
# ---------------------------------------------------------------------------

BASE_NAMES = ("tp", "tm", "pf", "o")


@dataclass(frozen=True)
class Base:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Arrow:
    dom: "MetaType"
    cod: "MetaType"

    def __str__(self):
        d = f"({self.dom})" if isinstance(self.dom, Arrow) else str(self.dom)
        return f"{d} -> {self.cod}"


@dataclass(frozen=True)
class SVar:
    """Type parameter of a polymorphic constant scheme (never ground)."""

    name: str

    def __str__(self):
        return self.name


MetaType = Union[Base, Arrow, SVar]

TP = Base("tp")
TM = Base("tm")
PF = Base("pf")
O = Base("o")


def arrow(*mts: MetaType) -> MetaType:
    """Right-associated arrow: arrow(a, b, c) is a -> (b -> c)."""
    out = mts[-1]
    for m in reversed(mts[:-1]):
        out = Arrow(m, out)
    return out


def arg_types(mt: MetaType) -> list:
    """Argument types of an arrow spine, outermost first."""
    out = []
    while isinstance(mt, Arrow):
        out.append(mt.dom)
        mt = mt.cod
    return out


def result_base(mt: MetaType) -> MetaType:
    while isinstance(mt, Arrow):
        mt = mt.cod
    return mt


def arity(mt: MetaType) -> int:
    n = 0
    while isinstance(mt, Arrow):
        n += 1
        mt = mt.cod
    return n


def mentions_o(mt: MetaType) -> bool:
    if isinstance(mt, Arrow):
        return mentions_o(mt.dom) or mentions_o(mt.cod)
    return mt == O


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

_cell_ids = itertools.count(1)


class MetaCell:
    """Mutable instantiation cell of a matching variable.

    `birth` orders the cell against eigenvariables: a binding may never
    contain an eigenvariable born after the cell (the freshness proviso
    for universally introduced variables, in checkable form).
    """

    __slots__ = ("uid", "mt", "birth", "value")

    def __init__(self, mt, birth):
        self.uid = next(_cell_ids)
        self.mt = mt
        self.birth = birth
        self.value = None

    def __repr__(self):
        return f"?{self.uid}" + ("*" if self.value is not None else "")


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Const(Term):
    name: str
    mt: MetaType
    birth: int = 0

    def __repr__(self):
        return self.name if self.birth == 0 else f"{self.name}#{self.birth}"


@dataclass(frozen=True)
class Bound(Term):
    index: int

    def __repr__(self):
        return f"'{self.index}"


@dataclass(frozen=True)
class Meta(Term):
    cell: MetaCell

    def __repr__(self):
        return repr(self.cell)


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term

    def __repr__(self):
        return f"({self.fn!r} {self.arg!r})"


@dataclass(frozen=True)
class Lam(Term):
    mt: Optional[MetaType]
    body: Term
    hint: Optional[str] = field(default=None, compare=False, repr=False)

    def __repr__(self):
        return f"(\\ {self.body!r})"


@dataclass(frozen=True)
class GoalTerm(Term):
    """A goal in term position (the only shape a term of meta-type o takes)."""

    goal: "Goal"

    def __repr__(self):
        return f"<{self.goal!r}>"


# ---------------------------------------------------------------------------
# Goals
# ---------------------------------------------------------------------------


class Goal:
    __slots__ = ()


@dataclass(frozen=True)
class Atom(Goal):
    pred: str
    args: tuple  # Term for ordinary arguments, Goal for o-typed ones

    def __repr__(self):
        return "(" + " ".join([self.pred] + [repr(a) for a in self.args]) + ")"


@dataclass(frozen=True)
class All(Goal):
    mt: Optional[MetaType]
    body: Goal
    hint: Optional[str] = field(default=None, compare=False, repr=False)

    def __repr__(self):
        return f"(pi\\ {self.body!r})"


@dataclass(frozen=True)
class Conj(Goal):
    left: Goal
    right: Goal

    def __repr__(self):
        return f"({self.left!r}, {self.right!r})"


@dataclass(frozen=True)
class Impl(Goal):
    """One clause/goal implication; covers both surface arrows.

    As a goal it means: push `clause`, solve `goal`.  Backchained as a
    clause it means: `goal` is the head, `clause` the body.
    """

    clause: Goal
    goal: Goal

    def __repr__(self):
        return f"({self.goal!r} <<== {self.clause!r})"


PRED_ARGS = {"proves": (PF, TM), "hastype": (TM, TP), "assump": (O,)}


# ---------------------------------------------------------------------------
# Dereferencing, shifting, substitution
# ---------------------------------------------------------------------------


def deref(t: Term) -> Term:
    while isinstance(t, Meta) and t.cell.value is not None:
        t = t.cell.value
    return t


def shift(t, by: int, cutoff: int = 0):
    """Shift free de Bruijn indices >= cutoff by `by` (terms and goals)."""
    if by == 0:
        return t
    return _shift(t, by, cutoff)


def _shift(t, by, c):
    if isinstance(t, Bound):
        return Bound(t.index + by) if t.index >= c else t
    if isinstance(t, App):
        fn, arg = _shift(t.fn, by, c), _shift(t.arg, by, c)
        return t if fn is t.fn and arg is t.arg else App(fn, arg)
    if isinstance(t, Lam):
        body = _shift(t.body, by, c + 1)
        return t if body is t.body else Lam(t.mt, body, t.hint)
    if isinstance(t, GoalTerm):
        g = _shift(t.goal, by, c)
        return t if g is t.goal else GoalTerm(g)
    if isinstance(t, Atom):
        args = tuple(_shift(a, by, c) for a in t.args)
        return t if all(a is b for a, b in zip(args, t.args)) else Atom(t.pred, args)
    if isinstance(t, All):
        body = _shift(t.body, by, c + 1)
        return t if body is t.body else All(t.mt, body, t.hint)
    if isinstance(t, Conj):
        l, r = _shift(t.left, by, c), _shift(t.right, by, c)
        return t if l is t.left and r is t.right else Conj(l, r)
    if isinstance(t, Impl):
        cl, g = _shift(t.clause, by, c), _shift(t.goal, by, c)
        return t if cl is t.clause and g is t.goal else Impl(cl, g)
    return t  # Const, Meta


def subst(body, arg):
    """Replace the outermost open binder of `body` by `arg`, capture-avoiding.

    Unchanged subtrees are returned as the same objects, so sharing in the
    input survives substitution.
    """
    return _subst(body, 0, arg)


def _subst(t, d, v):
    if isinstance(t, Bound):
        if t.index == d:
            return shift(v, d)
        return Bound(t.index - 1) if t.index > d else t
    if isinstance(t, App):
        fn, arg = _subst(t.fn, d, v), _subst(t.arg, d, v)
        return t if fn is t.fn and arg is t.arg else App(fn, arg)
    if isinstance(t, Lam):
        body = _subst(t.body, d + 1, v)
        return t if body is t.body else Lam(t.mt, body, t.hint)
    if isinstance(t, GoalTerm):
        g = _subst(t.goal, d, v)
        return t if g is t.goal else GoalTerm(g)
    if isinstance(t, Atom):
        args = tuple(_subst(a, d, v) for a in t.args)
        return t if all(a is b for a, b in zip(args, t.args)) else Atom(t.pred, args)
    if isinstance(t, All):
        body = _subst(t.body, d + 1, v)
        return t if body is t.body else All(t.mt, body, t.hint)
    if isinstance(t, Conj):
        l, r = _subst(t.left, d, v), _subst(t.right, d, v)
        return t if l is t.left and r is t.right else Conj(l, r)
    if isinstance(t, Impl):
        cl, g = _subst(t.clause, d, v), _subst(t.goal, d, v)
        return t if cl is t.clause and g is t.goal else Impl(cl, g)
    return t


def subst_goal(body: Goal, arg: Term) -> Goal:
    return _subst(body, 0, arg)


# ---------------------------------------------------------------------------
# Meta-type computation (terms must be annotated)
# ---------------------------------------------------------------------------


def meta_type_of(t: Term, env=()) -> MetaType:
    """Meta-type of an annotated term; env lists binder types, innermost first."""
    t0 = t
    if isinstance(t, Meta):
        return t.cell.mt
    if isinstance(t, Const):
        return t.mt
    if isinstance(t, Bound):
        if t.index >= len(env):
            raise StructuralError(f"unbound index {t.index} outside environment")
        return env[t.index]
    if isinstance(t, App):
        fmt = meta_type_of(t.fn, env)
        if not isinstance(fmt, Arrow):
            raise StructuralError(f"application of non-function in {t0!r}")
        return fmt.cod
    if isinstance(t, Lam):
        if t.mt is None:
            raise StructuralError("unannotated binder")
        return Arrow(t.mt, meta_type_of(t.body, (t.mt,) + tuple(env)))
    if isinstance(t, GoalTerm):
        return O
    raise StructuralError(f"not a term: {t0!r}")


# ---------------------------------------------------------------------------
# Normalization: beta-normal, eta-long
# ---------------------------------------------------------------------------


def spine(t: Term):
    """Head and arguments after top-level beta contraction and dereferencing."""
    args = []
    while True:
        t = deref(t)
        if isinstance(t, App):
            args.append(t.arg)
            t = t.fn
        elif isinstance(t, Lam) and args:
            t = subst(t.body, args.pop())
        else:
            break
    args.reverse()
    return t, args


def _rebuild(head, args):
    for a in args:
        head = App(head, a)
    return head


def normalize(t: Term, env=()) -> Term:
    """Beta-normal eta-long form.  Terminates on all well-annotated input."""
    return _norm(t, meta_type_of(t, env), tuple(env), {})


def _norm(t, mt, env, memo):
    # the memo entry pins the keyed node: id() of a dead temporary could
    # otherwise be recycled for a different node mid-normalization
    key = (id(t), mt, env)
    hit = memo.get(key)
    if hit is not None:
        return hit[1]
    if isinstance(mt, Arrow):
        h, args = spine(t)
        if isinstance(h, Lam) and not args:
            out = Lam(mt.dom, _norm(h.body, mt.cod, (mt.dom,) + env, memo), h.hint)
        else:
            # eta-expand a partially applied head
            body = App(shift(_rebuild(h, args), 1), Bound(0))
            out = Lam(mt.dom, _norm(body, mt.cod, (mt.dom,) + env, memo))
    elif mt == O:
        h, args = spine(t)
        if not isinstance(h, GoalTerm) or args:
            raise StructuralError(f"term of meta-type o is not a goal: {t!r}")
        out = GoalTerm(_norm_goal(h.goal, env, memo))
    else:
        h, args = spine(t)
        if not args:
            out = h
        else:
            hmt = meta_type_of(h, env)
            out = h
            for a in args:
                if not isinstance(hmt, Arrow):
                    raise StructuralError(f"over-applied head in {t!r}")
                out = App(out, _norm(a, hmt.dom, env, memo))
                hmt = hmt.cod
    memo[key] = (t, out)
    return out


def _norm_goal(g, env, memo):
    if isinstance(g, Atom):
        args = tuple(
            _norm_goal(a, env, memo)
            if isinstance(a, Goal)
            else _norm(a, meta_type_of(a, env), env, memo)
            for a in g.args
        )
        return Atom(g.pred, args)
    if isinstance(g, All):
        return All(g.mt, _norm_goal(g.body, (g.mt,) + env, memo), g.hint)
    if isinstance(g, Conj):
        return Conj(_norm_goal(g.left, env, memo), _norm_goal(g.right, env, memo))
    if isinstance(g, Impl):
        return Impl(_norm_goal(g.clause, env, memo), _norm_goal(g.goal, env, memo))
    raise StructuralError(f"not a goal: {g!r}")


def normalize_goal(g: Goal, env=()) -> Goal:
    return _norm_goal(g, tuple(env), {})


def alpha_beta_eq(a, b, env=()) -> bool:
    """Equality modulo beta/eta and binder renaming."""
    if isinstance(a, Goal) or isinstance(b, Goal):
        return isinstance(a, Goal) and isinstance(b, Goal) and (
            normalize_goal(a, env) == normalize_goal(b, env)
        )
    return normalize(a, env) == normalize(b, env)


# ---------------------------------------------------------------------------
# Walks and measurements
# ---------------------------------------------------------------------------


def children(t):
    if isinstance(t, App):
        return (t.fn, t.arg)
    if isinstance(t, Lam):
        return (t.body,)
    if isinstance(t, GoalTerm):
        return (t.goal,)
    if isinstance(t, Atom):
        return tuple(t.args)
    if isinstance(t, All):
        return (t.body,)
    if isinstance(t, Conj):
        return (t.left, t.right)
    if isinstance(t, Impl):
        return (t.clause, t.goal)
    return ()


def walk(t) -> Iterator:
    """All nodes of a term/goal tree, dereferencing bound meta cells."""
    if isinstance(t, Meta) and t.cell.value is not None:
        yield from walk(t.cell.value)
        return
    yield t
    for c in children(t):
        yield from walk(c)


def has_unbound_meta(t) -> bool:
    return any(isinstance(n, Meta) for n in walk(t))


def max_eigen_birth(t) -> int:
    return max((n.birth for n in walk(t) if isinstance(n, Const)), default=0)


def const_names(t) -> set:
    return {n.name for n in walk(t) if isinstance(n, Const)}


def replace_const(t, mapping, depth=0):
    """Replace constants by de Bruijn variables.

    `mapping` sends a constant name to the number of binders between the
    root of `t` and its binder; indices are adjusted under inner binders.
    """
    if isinstance(t, Const):
        if t.name in mapping:
            return Bound(mapping[t.name] + depth)
        return t
    if isinstance(t, App):
        return App(replace_const(t.fn, mapping, depth), replace_const(t.arg, mapping, depth))
    if isinstance(t, Lam):
        return Lam(t.mt, replace_const(t.body, mapping, depth + 1), t.hint)
    if isinstance(t, GoalTerm):
        return GoalTerm(replace_const(t.goal, mapping, depth))
    if isinstance(t, Atom):
        return Atom(t.pred, tuple(replace_const(a, mapping, depth) for a in t.args))
    if isinstance(t, All):
        return All(t.mt, replace_const(t.body, mapping, depth + 1), t.hint)
    if isinstance(t, Conj):
        return Conj(replace_const(t.left, mapping, depth), replace_const(t.right, mapping, depth))
    if isinstance(t, Impl):
        return Impl(replace_const(t.clause, mapping, depth), replace_const(t.goal, mapping, depth))
    return t
