import pathlib
import sys

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).parent))

from holcheck.kernel import Session
from holcheck.signature import builtin_signature
from holcheck.syntax import apply_declarations, parse_source

ROOT = pathlib.Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"

THEOREM_FILES = [
    "symm_basic.hol",
    "symm_lemma.hol",
    "symm_implicit.hol",
    "symm_trans.hol",
    "poly_lemmas.hol",
    "assoc_def.hol",
]

EXTRA_THEOREM_FILES = ["assoc_def_speclemma.hol", "assoc_def_atomic.hol", "and_def.hol"]


@pytest.fixture
def sig():
    return builtin_signature()


@pytest.fixture
def session(sig):
    return Session(sig)


@pytest.fixture(scope="session")
def corpus_dir():
    return CORPUS


def load_corpus_goal(name, sig=None):
    """Parse a single-statement corpus file, returning its goal."""
    sig = sig if sig is not None else builtin_signature()
    src = parse_source((CORPUS / name).read_text(), sig, name)
    (st,) = src.statements
    return st.goal


def load_full_library():
    """Signature, checked session, and registry for corpus/lib_full.hol."""
    from holcheck.library import check_library, load_library

    sig = builtin_signature()
    src = parse_source((CORPUS / "lib_full.hol").read_text(), sig, "lib_full.hol")
    apply_declarations(src.statements, sig)
    registry = load_library(src)
    ses = Session(sig)
    for name, report in check_library(registry, ses):
        assert report.ok, f"library entry {name} failed"
    return sig, ses, registry
