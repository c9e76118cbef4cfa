"""Transition search: one-step successor enumeration and breadth-first
reachability, exposed as the three built-in search predicates.

Successor states come from matching transition rule left hand sides
against the reduced state at the top; a conditional rule contributes a
successor when its instantiated condition reduces to true.  The search
predicates are evaluated by the engine as special forms, so that a
predicate occurring under `not` or inside a defined operator still
searches when its state argument has become ground enough.
"""

from __future__ import annotations

from .sig import App, CafeError, Subst, Var
from .rewrite import match
from .syntax import render


class SearchLimit(CafeError):
    def __init__(self, limit):
        super().__init__("search state limit exceeded (%d)" % limit)


def successors(eng, state):
    """Yield (rule, theta, next_state, cond_instance) for every one-step
    transition out of the reduced state.  cond_instance is the reduced
    instantiated condition, true for unconditional rules."""
    flat = eng.flat
    true = flat.bool_const(True)
    for rule in flat.trans:
        for th in match(rule.lhs, state, flat.sig):
            if rule.cond is not None:
                c = eng.reduce(th.apply(rule.cond))
                if c != true:
                    continue
                cond = c
            else:
                cond = true
            yield rule, th, eng.reduce(th.apply(rule.rhs)), cond


def _emit(eng, line):
    sink = getattr(eng, "printouts", None)
    if sink is not None:
        sink.append(line)


def _bind(sig, base, pairs):
    th = Subst(sig)
    for v, t in pairs:
        if isinstance(v, Var):
            th.map[(v.name, v.vsort)] = t
    return th


def hook_one_plus(eng, t, depth):
    """S =(*,1)=>+ SS if CC suchThat P {Info}: visit every one-step
    successor, report Info for those where P holds, reduce to whether any
    did.  Unlike plain search, a conditional transition whose condition
    stays symbolic still counts; CC carries the reduced condition."""
    state = eng.reduce(t.args[0], depth)
    ss, cc, pred, info = t.args[1], t.args[2], t.args[3], t.args[4]
    flat = eng.flat
    false = flat.bool_const(False)
    found = False
    for rule in flat.trans:
        for th in match(rule.lhs, state, flat.sig):
            cond = flat.bool_const(True) if rule.cond is None \
                else eng.reduce(th.apply(rule.cond), depth)
            if cond == false:
                continue
            nxt = eng.reduce(th.apply(rule.rhs), depth)
            b = _bind(eng.sig, state, [(ss, nxt), (cc, cond)])
            if eng.reduce(b.apply(pred), depth) == flat.bool_const(True):
                found = True
                _emit(eng, "%s [%s]" % (render(b.apply(info)), rule.label()))
    return eng.flat.bool_const(found)


def hook_exists(eng, t, depth):
    """S =(1,1)=>+ P: is there a one-step successor matching pattern P."""
    state = eng.reduce(t.args[0], depth)
    pat = t.args[1]
    for rule, th, nxt, cond in successors(eng, state):
        if isinstance(pat, Var) or next(match(pat, nxt, eng.sig), None) is not None:
            return eng.flat.bool_const(True)
    return eng.flat.bool_const(False)


def hook_star(eng, t, depth):
    """S =(*,*)=>* P suchThat Pred: breadth-first reachability from S;
    report every reachable state matching P with Pred true."""
    start = eng.reduce(t.args[0], depth)
    pat, pred = t.args[1], t.args[2]
    limit = getattr(eng, "max_states", 1048576)
    true = eng.flat.bool_const(True)
    seen = {start}
    queue = [start]
    found = False
    while queue:
        state = queue.pop(0)
        for th in match(pat, state, eng.sig):
            if eng.reduce(th.apply(pred), depth) == true:
                found = True
                _emit(eng, render(state))
                break
        for rule, th, nxt, cond in successors(eng, state):
            if nxt not in seen:
                seen.add(nxt)
                if len(seen) > limit:
                    raise SearchLimit(limit)
                queue.append(nxt)
    eng.visited_count = len(seen)
    return eng.flat.bool_const(found)
