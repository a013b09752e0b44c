"""Lemma expansion and proof metrics."""

from conftest import load_corpus_goal

from holcheck.kernel import Session
from holcheck.signature import builtin_signature
from holcheck.syntax import parse_term
from holcheck.terms import Const, alpha_beta_eq, normalize, walk
from holcheck.transform import expand_lemmas, expand_statement_goal, proof_stats


def count_const(t, name):
    return sum(1 for n in walk(t) if isinstance(n, Const) and n.name == name)


def test_expansion_of_single_lemma_gives_direct_proof():
    with_lemma = load_corpus_goal("symm_lemma.hol")
    direct = load_corpus_goal("symm_basic.hol")
    expanded = expand_lemmas(with_lemma.args[0])
    assert normalize(expanded) == normalize(direct.args[0])
    assert alpha_beta_eq(expanded, direct.args[0])


def test_expansion_is_identity_on_lemma_free_proofs():
    direct = load_corpus_goal("symm_basic.hol")
    assert expand_lemmas(direct.args[0]) is direct.args[0]


def test_expansion_duplicates_reused_lemma_body():
    goal = load_corpus_goal("symm_trans.hol")
    proof = goal.args[0]
    expanded = expand_lemmas(proof)
    # one congruence node per stated lemma proof before; afterwards the
    # symmetry body appears twice (in the former transitivity body and in
    # the main body) next to the transitivity congruence
    assert count_const(proof, "congr") == 2
    assert count_const(expanded, "congr") == 3
    assert count_const(expanded, "lemma_pf") == 0


def test_expanded_proofs_recheck():
    for name in ("symm_lemma.hol", "symm_trans.hol", "poly_lemmas.hol", "assoc_def.hol"):
        goal = load_corpus_goal(name)
        expanded = expand_statement_goal(goal)
        report = Session(builtin_signature()).check_goal(expanded)
        assert report.ok, name


def test_expansion_idempotent():
    goal = load_corpus_goal("assoc_def.hol")
    e1 = expand_statement_goal(goal)
    e2 = expand_statement_goal(e1)
    assert e1 == e2


def test_definition_nodes_survive_expansion():
    goal = load_corpus_goal("assoc_def.hol")
    expanded = expand_statement_goal(goal)
    proof = expanded.body.body.goal.args[0]
    stats = proof_stats(proof)
    assert stats.def_count == 1 and stats.lemma_count == 0


def test_stats_on_single_constructor():
    sig = builtin_signature()
    s = proof_stats(parse_term("refl", sig))
    assert s.shared_nodes == s.tree_nodes == 1
    assert s.lemma_count == 0 and s.def_count == 0 and s.max_depth == 1


def test_lemma_and_definition_counts():
    trans_goal = load_corpus_goal("symm_trans.hol")
    assert proof_stats(trans_goal.args[0]).lemma_count == 2
    poly_goal = load_corpus_goal("poly_lemmas.hol")
    assert proof_stats(poly_goal.args[0]).lemma_count == 3
    assoc_goal = load_corpus_goal("assoc_def.hol")
    proof = assoc_goal.body.body.goal.args[0]
    s = proof_stats(proof)
    assert s.lemma_count == 5 and s.def_count == 1


def test_tree_size_grows_when_lemmas_are_reused():
    cases = {
        "symm_trans.hol": lambda g: g.args[0],
        "poly_lemmas.hol": lambda g: g.args[0],
        "assoc_def.hol": lambda g: g.body.body.goal.args[0],
    }
    for name, select in cases.items():
        goal = load_corpus_goal(name)
        before = proof_stats(select(goal))
        after = proof_stats(select(expand_statement_goal(goal)))
        assert after.tree_nodes > before.tree_nodes, name
        assert after.lemma_count == 0


def test_shared_count_never_exceeds_tree_count():
    for name in ("symm_trans.hol", "assoc_def.hol", "poly_lemmas.hol"):
        goal = load_corpus_goal(name)
        proof = goal.args[0] if hasattr(goal, "args") else None
        if proof is None:
            continue
        s = proof_stats(proof)
        assert s.shared_nodes <= s.tree_nodes
        expanded = expand_lemmas(proof)
        se = proof_stats(expanded)
        # expansion duplicates subproofs by reference, so the shared count
        # stays below the tree count
        assert se.shared_nodes <= se.tree_nodes


def test_expansion_inlines_specialized_definitions():
    # expanding the variants that introduce their definition through a
    # lemma substitutes the body for the defined name and the reflexivity
    # proof for its equality name; the result still checks
    from holcheck.terms import All, Impl

    for name in ("assoc_def_speclemma.hol", "assoc_def_atomic.hol"):
        goal = load_corpus_goal(name)
        expanded = expand_statement_goal(goal)
        report = Session(builtin_signature()).check_goal(expanded)
        assert report.ok, name
        g = expanded
        while isinstance(g, (All, Impl)):
            g = g.body if isinstance(g, All) else g.goal
        assert proof_stats(g.args[0]).lemma_count == 0
