"""Named lemma/definition registry, library checking, and proof packaging.

Nothing here is trusted: packaged proofs are re-checked by the kernel, so
a registry bug can make checking fail but never admit a bad proof.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import LibraryError
from .kernel import CheckReport, Session, def_to_eqclause, valid_clause
from .terms import (
    App,
    Arrow,
    Const,
    Lam,
    O,
    PF,
    TP,
    Term,
    const_names,
    normalize,
    replace_const,
    shift,
)


@dataclass
class LemmaEntry:
    name: str
    meta_type: object
    template: Term  # abstraction over the name; body of meta-type o
    proof: Term
    checked: bool = False


@dataclass
class DefinitionEntry:
    name: str
    meta_type: object
    result_tp: Term
    typeinf: Term  # abstraction over the name; body of meta-type o
    body: Term
    checked: bool = False


@dataclass
class Registry:
    entries: list = field(default_factory=list)
    by_name: dict = field(default_factory=dict)

    def add(self, entry):
        if entry.name in self.by_name:
            raise LibraryError(f"duplicate registry name '{entry.name}'")
        self.by_name[entry.name] = entry
        self.entries.append(entry)

    def names(self):
        return set(self.by_name)


def _statement_parts(entry):
    """The parts that must only reference earlier names (proofs excluded:
    they are verified by running them)."""
    if isinstance(entry, LemmaEntry):
        return (entry.template,)
    return (entry.result_tp, entry.typeinf, entry.body)


def load_library(source, registry: Registry = None) -> Registry:
    """Build a Registry from parsed def_lemma/def_definition statements.

    File order is the dependency order: a statement part may reference only
    names defined earlier (or constants outside the registry).
    """
    from .syntax import DefDefinition, DefLemma, InfixDecl, Solve, TypeDecl

    registry = registry if registry is not None else Registry()
    pending = []
    for st in source.statements:
        if isinstance(st, DefLemma):
            pending.append(LemmaEntry(st.name, st.meta_type, st.template, st.proof))
        elif isinstance(st, DefDefinition):
            pending.append(
                DefinitionEntry(st.name, st.meta_type, st.result_tp, st.typeinf, st.body)
            )
        elif isinstance(st, Solve):
            raise LibraryError("a library file may not contain goal statements")
        elif not isinstance(st, (TypeDecl, InfixDecl)):
            raise LibraryError(f"unsupported library statement: {st!r}")
    later = {e.name for e in pending}
    for entry in pending:
        later.discard(entry.name)
        for part in _statement_parts(entry):
            fwd = const_names(part) & (later | {entry.name})
            if fwd:
                raise LibraryError(
                    f"entry '{entry.name}' references not-yet-defined name(s): "
                    + ", ".join(sorted(fwd))
                )
        registry.add(entry)
    return registry


def name_const(entry) -> Const:
    return Const(entry.name, entry.meta_type)


def install_entry(entry, session: Session) -> CheckReport:
    """Check one entry in the current session and push its clause(s).

    Lemmas: validate the clause, check the proof, push the clause.
    Definitions: validate the typing clause, check the body's typing, push
    both the typing clause and the equality clause.  Pushed clauses stay
    for the rest of the session (library scope).
    """
    from .errors import ValidityError

    name = name_const(entry)
    if isinstance(entry, LemmaEntry):
        inst = normalize(App(entry.template, name)).goal
        if not valid_clause(inst):
            raise ValidityError(
                f"lemma '{entry.name}' clause outside the allowed grammar"
            )
        check = normalize(App(entry.template, entry.proof)).goal
        report = session.check_goal(check, augment=False)
        if report.ok:
            session.push_clause(inst)
            entry.checked = True
        return report
    inst = normalize(App(entry.typeinf, name)).goal
    if not valid_clause(inst):
        raise ValidityError(
            f"definition '{entry.name}' typing clause outside the allowed grammar"
        )
    check = normalize(App(entry.typeinf, entry.body)).goal
    report = session.check_goal(check, augment=False)
    if report.ok:
        session.push_clause(inst)
        session.push_clause(def_to_eqclause(entry.result_tp, name, entry.body))
        entry.checked = True
    return report


def check_library(registry: Registry, session: Session):
    """Check entries in order; stop at the first failure.

    Returns a list of (entry_name, CheckReport).  Clauses of successful
    entries persist in the session store.
    """
    results = []
    for entry in registry.entries:
        if entry.checked:
            continue
        report = install_entry(entry, session)
        results.append((entry.name, report))
        if not report.ok:
            break
    return results


# ---------------------------------------------------------------------------
# Packaging
# ---------------------------------------------------------------------------


def _entry_parts(entry):
    if isinstance(entry, LemmaEntry):
        return (entry.template, entry.proof)
    return (entry.result_tp, entry.typeinf, entry.body)


def dependencies(proof: Term, registry: Registry) -> list:
    """Transitive registry entries a proof depends on, by constant scanning."""
    needed = set()
    queue = [n for n in const_names(proof) if n in registry.by_name]
    while queue:
        n = queue.pop()
        if n in needed:
            continue
        needed.add(n)
        for part in _entry_parts(registry.by_name[n]):
            queue.extend(m for m in const_names(part) if m in registry.by_name)
    return [e for e in registry.entries if e.name in needed]


def package(goal_formula: Term, proof: Term, registry: Registry) -> Term:
    """Inline every registry entry the proof depends on.

    The result mentions no registry constant: definitions are wrapped
    first (registry order), then lemmas (registry order), each name
    becoming the binder of its wrapping node.  A proof with no registry
    references is returned unchanged.
    """
    for e in registry.entries:
        if not e.checked:
            raise LibraryError(f"registry entry '{e.name}' is not checked")
    stray = const_names(goal_formula) & registry.names()
    if stray:
        raise LibraryError(
            "goal formula references registry name(s): " + ", ".join(sorted(stray))
        )
    needed = dependencies(proof, registry)
    if not needed:
        return proof
    defs = [e for e in needed if isinstance(e, DefinitionEntry)]
    lemmas = [e for e in needed if isinstance(e, LemmaEntry)]
    order = defs + lemmas  # outermost first

    def emit(k):
        if k == len(order):
            # the core may reference binders of the enclosing goal; its free
            # variables cross every wrapper binder
            mapping = {e.name: len(order) - 1 - j for j, e in enumerate(order)}
            return replace_const(shift(proof, len(order)), mapping)
        entry = order[k]
        mapping = {e.name: k - 1 - j for j, e in enumerate(order[:k])}
        a = entry.meta_type
        rest = Lam(a, emit(k + 1), hint=entry.name)
        if isinstance(entry, LemmaEntry):
            head = Const(
                "lemma_pf",
                Arrow(Arrow(a, O), Arrow(a, Arrow(Arrow(a, PF), PF))),
            )
            return App(
                App(
                    App(head, replace_const(entry.template, mapping)),
                    replace_const(entry.proof, mapping),
                ),
                rest,
            )
        head = Const(
            "def_pf",
            Arrow(TP, Arrow(Arrow(a, O), Arrow(a, Arrow(Arrow(a, PF), PF)))),
        )
        return App(
            App(
                App(
                    App(head, replace_const(entry.result_tp, mapping)),
                    replace_const(entry.typeinf, mapping),
                ),
                replace_const(entry.body, mapping),
            ),
            rest,
        )

    return emit(0)
