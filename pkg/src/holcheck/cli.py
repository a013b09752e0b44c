"""Batch front end: check, expand, package, stats and fmt over `.hol` files.

Exit status: 0 all statements succeed; 1 a check failed; 2 a parse,
meta-type, validity or pattern error; 3 the step budget was exhausted.
Structural problems (2) take precedence over resource errors (3), which
take precedence over plain failures (1).
"""

from __future__ import annotations

import argparse
import sys

from .errors import (
    BudgetError,
    LibraryError,
    PatternError,
    SourceError,
    StructuralError,
    ValidityError,
)
from .kernel import DEFAULT_BUDGET, Session
from .library import (
    DefinitionEntry,
    LemmaEntry,
    Registry,
    check_library,
    install_entry,
    load_library,
    package,
)
from .signature import builtin_signature
from .syntax import (
    DefDefinition,
    DefLemma,
    InfixDecl,
    Solve,
    TypeDecl,
    apply_declarations,
    format_statement,
    parse_source,
)
from .terms import All, Atom, Conj, Impl
from .transform import expand_statement_goal, proof_stats

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_RESOURCE = 0, 1, 2, 3

_ERROR_EXIT = {
    None: EXIT_FAILED,
    "validity": EXIT_INVALID,
    "pattern": EXIT_INVALID,
    "structural": EXIT_INVALID,
    "budget": EXIT_RESOURCE,
}


def _read(path):
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def _combine(codes):
    codes = set(codes)
    for code in (EXIT_INVALID, EXIT_RESOURCE, EXIT_FAILED):
        if code in codes:
            return code
    return EXIT_OK


class Environment:
    """Signature + session + registry with the libraries loaded and checked."""

    def __init__(self, lib_paths, budget, trace="summary", out=None):
        self.sig = builtin_signature()
        self.session = Session(self.sig, budget)
        self.registry = Registry()
        self.trace = trace
        self.out = out
        self.codes = []
        for path in lib_paths:
            src = parse_source(_read(path), self.sig, path)
            apply_declarations(src.statements, self.sig)
            load_library(src, self.registry)
            for name, report in check_library(self.registry, self.session):
                if not report.ok:
                    message = (
                        f"{path}: library entry '{name}' failed: "
                        f"{report.message or 'proof check failed'}"
                    )
                    if report.error == "budget":
                        raise BudgetError(report.stats.steps)
                    raise LibraryError(message)

    def emit(self, line):
        if self.trace != "quiet":
            print(line, file=self.out or sys.stdout)

    def run_statement(self, st, path):
        loc = f"{path}:{st.pos[0]}"
        if isinstance(st, (TypeDecl, InfixDecl)):
            apply_declarations([st], self.sig)
            return
        if isinstance(st, DefLemma):
            entry = LemmaEntry(st.name, st.meta_type, st.template, st.proof)
            self._install(entry, loc)
            return
        if isinstance(st, DefDefinition):
            entry = DefinitionEntry(
                st.name, st.meta_type, st.result_tp, st.typeinf, st.body
            )
            self._install(entry, loc)
            return
        if isinstance(st, Solve):
            report = self.session.check_goal(st.goal, augment=True)
            self._report(report, loc, "goal")
            return
        raise StructuralError(f"unsupported statement at {loc}")

    def _install(self, entry, loc):
        self.registry.add(entry)
        report = install_entry(entry, self.session)
        self._report(report, loc, entry.name)

    def _report(self, report, loc, what):
        s = report.stats
        if report.ok:
            self.emit(
                f"{loc}: {what}: success "
                f"(steps={s.steps}, clauses={s.clauses_added}, depth={s.max_store_depth})"
            )
            self.codes.append(EXIT_OK)
            return
        kind = report.error or "failure"
        msg = f": {report.message}" if report.message else ""
        self.emit(f"{loc}: {what}: {kind}{msg} (steps={s.steps})")
        if self.trace == "trace" and report.failure_stack:
            for g in report.failure_stack:
                print(f"  | {g}", file=sys.stderr)
        self.codes.append(_ERROR_EXIT[report.error])


def _map_proofs(g, fn):
    """Rewrite the proof of every positive proves atom in a goal."""
    if isinstance(g, Atom):
        if g.pred == "proves":
            return Atom("proves", (fn(g.args[0], g.args[1]), g.args[1]))
        return g
    if isinstance(g, All):
        return All(g.mt, _map_proofs(g.body, fn), g.hint)
    if isinstance(g, Conj):
        return Conj(_map_proofs(g.left, fn), _map_proofs(g.right, fn))
    if isinstance(g, Impl):
        return Impl(g.clause, _map_proofs(g.goal, fn))
    return g


def _proofs_of(g):
    if isinstance(g, Atom):
        return [g.args[0]] if g.pred == "proves" else []
    if isinstance(g, All):
        return _proofs_of(g.body)
    if isinstance(g, Conj):
        return _proofs_of(g.left) + _proofs_of(g.right)
    if isinstance(g, Impl):
        return _proofs_of(g.goal)
    return []


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_check(args):
    codes = []
    for path in args.inputs:
        env = Environment(args.lib, args.budget, args.trace)
        src = parse_source(_read(path), env.sig, path)
        for st in src.statements:
            env.run_statement(st, path)
        codes.extend(env.codes)
    return _combine(codes)


def _rewrite_command(args, rewrite, keep_definitions):
    (path,) = args.inputs
    env = Environment(args.lib, args.budget, args.trace)
    src = parse_source(_read(path), env.sig, path)
    out_statements = []
    for st in src.statements:
        if isinstance(st, (TypeDecl, InfixDecl)):
            apply_declarations([st], env.sig)
            out_statements.append(st)
        elif isinstance(st, (DefLemma, DefDefinition)):
            if not keep_definitions:
                raise LibraryError(
                    "input for this command may not define lemmas; load them via --lib"
                )
            out_statements.append(st)
        elif isinstance(st, Solve):
            out_statements.append(Solve(rewrite(st.goal, env), st.pos))
    text = "\n".join(format_statement(st, env.sig) for st in out_statements) + "\n"
    with open(args.output, "w", encoding="utf-8") as f:
        f.write(text)
    return EXIT_OK


def cmd_expand(args):
    return _rewrite_command(
        args, lambda g, env: expand_statement_goal(g), keep_definitions=True
    )


def cmd_package(args):
    def rewrite(g, env):
        return _map_proofs(g, lambda p, a: package(a, p, env.registry))

    return _rewrite_command(args, rewrite, keep_definitions=False)


def cmd_fmt(args):
    return _rewrite_command(args, lambda g, env: g, keep_definitions=True)


def cmd_stats(args):
    codes = []
    for path in args.inputs:
        env = Environment(args.lib, args.budget, args.trace)
        src = parse_source(_read(path), env.sig, path)
        for st in src.statements:
            if isinstance(st, (TypeDecl, InfixDecl)):
                apply_declarations([st], env.sig)
            elif isinstance(st, Solve):
                for proof in _proofs_of(st.goal):
                    s = proof_stats(proof)
                    print(
                        f"{path}:{st.pos[0]}: nodes={s.shared_nodes} "
                        f"tree_nodes={s.tree_nodes} lemmas={s.lemma_count} "
                        f"defs={s.def_count} depth={s.max_depth}"
                    )
        codes.append(EXIT_OK)
    return _combine(codes)


def build_arg_parser():
    ap = argparse.ArgumentParser(
        prog="holcheck",
        description="Proof checker for a higher-order natural-deduction object logic.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, output=False):
        p.add_argument("inputs", nargs="+", help="input .hol file(s)")
        p.add_argument(
            "--lib",
            action="append",
            default=[],
            metavar="FILE",
            help="library file; repeatable, later files may use earlier ones",
        )
        p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, metavar="N")
        p.add_argument(
            "--trace", choices=("quiet", "summary", "trace"), default="summary"
        )
        if output:
            p.add_argument("-o", "--output", required=True, metavar="FILE")

    p = sub.add_parser("check", help="check every statement")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("expand", help="inline all lemma uses in the proofs")
    common(p, output=True)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("package", help="make proofs self-contained")
    common(p, output=True)
    p.set_defaults(func=cmd_package)

    p = sub.add_parser("stats", help="print proof size metrics")
    common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("fmt", help="parse and reprint")
    common(p, output=True)
    p.set_defaults(func=cmd_fmt)

    return ap


def main(argv=None) -> int:
    args = build_arg_parser().parse_args(argv)
    if args.command in ("expand", "package", "fmt") and len(args.inputs) != 1:
        print("holcheck: exactly one input file is required here", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except SourceError as e:
        print(f"holcheck: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (ValidityError, PatternError, StructuralError, LibraryError) as e:
        print(f"holcheck: {e}", file=sys.stderr)
        return EXIT_INVALID
    except BudgetError as e:
        print(f"holcheck: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except OSError as e:
        print(f"holcheck: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
