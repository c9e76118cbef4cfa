"""Order-sorted signature analyses: sensibility, regularity, least parse.

The three hand-built signatures pin down the classification behaviour on
the canonical overloaded-constant examples; the property tests compare
the analyses against independent brute-force oracles on random small
signatures.
"""

import pytest
from hypothesis import given, settings, strategies as st

from cafe.sig import (AmbiguousParse, NoParse, OpDecl, Signature, SortPoset,
                      SubsortCycle)
from util import (oracle_least_parse, oracle_regular, oracle_sensible)


def sig_of(sorts, edges, ranks):
    return Signature(SortPoset(sorts, edges),
                     [OpDecl((n,), w, s) for n, w, s in ranks])


# -- the three overloaded-zero signatures ----------------------------------

def test_disconnected_overload_is_not_sensible():
    # 0 : -> Bool and 0 : -> Nat with unrelated Bool, Nat
    sig = sig_of(["Bool", "Nat"], [],
                 [("0", (), "Bool"), ("0", (), "Nat")])
    assert sig.check_sensible()


def test_incomparable_overload_is_sensible_but_not_regular():
    # 2 : -> Nat and 2 : -> EvenInt, connected through Zero but with no
    # least result sort
    sig = sig_of(["Zero", "Nat", "EvenInt"],
                 [("Zero", "Nat"), ("Zero", "EvenInt")],
                 [("2", (), "Nat"), ("2", (), "EvenInt")])
    assert not sig.check_sensible()
    assert sig.check_regular()
    with pytest.raises(AmbiguousParse):
        sig.least_rank(("2",), [])


def test_least_coarity_makes_overload_regular():
    # adding 2 : -> EvenNat below both restores regularity, and the
    # constant parses at the least sort
    sig = sig_of(["EvenNat", "Nat", "EvenInt"],
                 [("EvenNat", "Nat"), ("EvenNat", "EvenInt")],
                 [("2", (), "EvenNat"), ("2", (), "Nat"),
                  ("2", (), "EvenInt")])
    assert not sig.check_sensible()
    assert not sig.check_regular()
    assert sig.least_rank(("2",), []).coarity == "EvenNat"


def test_no_applicable_rank_raises():
    sig = sig_of(["A", "B"], [], [("c", (), "A"), ("f", ("A",), "A")])
    with pytest.raises(NoParse):
        sig.least_rank(("f",), ["B"])


def test_subsort_cycle_rejected():
    with pytest.raises(SubsortCycle):
        SortPoset(["A", "B"], [("A", "B"), ("B", "A")])


# -- property tests against brute-force oracles ----------------------------

SORTS = ["S0", "S1", "S2", "S3"]
PAIRS = [(a, b) for i, a in enumerate(SORTS) for b in SORTS[i + 1:]]

edges_st = st.lists(st.sampled_from(PAIRS), unique=True, max_size=4)
sort_st = st.sampled_from(SORTS)


def ranks_st():
    consts = st.lists(
        st.tuples(st.just("c"), st.just(()), sort_st), min_size=1, max_size=3)
    unaries = st.lists(
        st.tuples(st.just("f"), st.tuples(sort_st), sort_st), max_size=3)
    return st.tuples(consts, unaries).map(lambda t: t[0] + t[1])


@settings(max_examples=300, deadline=None)
@given(edges=edges_st, ranks=ranks_st())
def test_sensibility_matches_oracle(edges, ranks):
    sig = sig_of(SORTS, edges, ranks)
    assert (not sig.check_sensible()) == oracle_sensible(SORTS, edges, ranks)


@settings(max_examples=300, deadline=None)
@given(edges=edges_st, ranks=ranks_st())
def test_regularity_matches_oracle(edges, ranks):
    sig = sig_of(SORTS, edges, ranks)
    assert (not sig.check_regular()) == oracle_regular(SORTS, edges, ranks)


@settings(max_examples=300, deadline=None)
@given(edges=edges_st, coarities=st.lists(sort_st, min_size=1, max_size=4))
def test_constant_parse_matches_oracle(edges, coarities):
    ranks = [("c", (), s) for s in coarities]
    sig = sig_of(SORTS, edges, ranks)
    want = oracle_least_parse(SORTS, edges, coarities)
    if want is None:
        with pytest.raises(AmbiguousParse):
            sig.least_rank(("c",), [])
    else:
        assert sig.least_rank(("c",), []).coarity == want
