"""Search predicates: one-step successor queries, breadth-first
reachability with reporting, symbolic-condition coverage, and the
visited-state limit."""

from util import flatten_output, run_source

RING = """mod! RING {
  [St]
  ops a b c : -> St .
  trans [t1] : a => b .
  trans [t2] : b => c .
}
"""


def test_one_step_successor():
    src = RING + """--> expect: true
red in RING : a =(1,1)=>+ b .
--> expect: false
red in RING : a =(1,1)=>+ c .
"""
    _, ok, _ = run_source(src)
    assert ok


def test_reachability_reports_matching_states():
    src = RING + """--> expect-block:
--> c
--> true
red in RING : a =(*,*)=>* X:St suchThat (X = c) .
"""
    session, ok, _ = run_source(src)
    assert ok
    assert session.stats["visited-states"] == 3


def test_reachability_false_when_unreachable():
    src = RING + """--> expect: false
red in RING : c =(*,*)=>* X:St suchThat (X = a) .
"""
    _, ok, _ = run_source(src)
    assert ok


def test_visited_count_stable_across_runs():
    src = RING + "red in RING : a =(*,*)=>* X:St suchThat false .\n"
    s1, _, _ = run_source(src, check=False)
    s2, _, _ = run_source(src, check=False)
    assert s1.stats["visited-states"] == s2.stats["visited-states"] == 3


def test_state_limit_raises():
    src = """mod! CNT {
  [N St] op 0 : -> N . op s_ : N -> N . op <_> : N -> St .
  var X : N .
  trans [t] : < X > => < s X > .
}
red in CNT : < 0 > =(*,*)=>* S:St suchThat false .
"""
    session, ok, _ = run_source(src, max_states=16)
    assert session.stats["errors"] == 1


COND = """mod! CSYS {
  [St]
  ops a b : -> St .
  op flag : -> Bool .
  ctr [t] : a => b if flag .
}
"""


def test_unresolved_condition_blocks_plain_search():
    # a conditional transition only counts as a step when its condition
    # reduces to true
    src = COND + """--> expect: false
red in CSYS : a =(1,1)=>+ b .
"""
    _, ok, _ = run_source(src)
    assert ok


def test_symbolic_condition_reported_by_covering_search():
    # the covering search form visits the transition anyway, binding the
    # condition variable to the reduced (still symbolic) condition
    src = COND + """--> expect-block:
--> flag [t]
--> true
red in CSYS : a =(*,1)=>+ SS:St if CC:Bool suchThat true { CC } .
"""
    _, ok, outputs = run_source(src)
    assert ok, flatten_output(outputs)
