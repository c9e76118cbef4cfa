"""Matching modulo assoc/comm/identity and conditional reduction.

The reducer is leftmost-innermost with declaration-order rule preference.
Rules whose left hand side tops an assoc(+comm) operator are implicitly
extended: a match may leave over arguments which are re-wrapped around
the contractum.  Conditions are reduced in a nested computation under a
separate nesting budget, which is what turns the classic
"cq b = true if b" loop into a reported error instead of divergence.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

from .sig import App, CafeError, NoParse, Subst, Term, Var, mk_app, struct_key

# nested condition computations recurse a handful of frames per nesting
# level; keep room for the default nesting budget of 512
sys.setrecursionlimit(max(sys.getrecursionlimit(), 40000))


class BudgetExceeded(CafeError):
    def __init__(self, kind, detail=""):
        super().__init__("budget exceeded (%s)%s" % (kind, detail and ": " + detail))
        self.kind = kind


class Budget:
    def __init__(self, max_steps=1048576, max_nesting=512):
        self.max_steps = max_steps
        self.max_nesting = max_nesting
        self.steps = 0

    def tick(self):
        self.steps += 1
        if self.steps > self.max_steps:
            raise BudgetExceeded("steps")

    def check_nesting(self, depth):
        if depth > self.max_nesting:
            raise BudgetExceeded("nesting")


@dataclass
class Rule:
    kind: str                    # eq | tr
    labels: tuple
    lhs: Term
    rhs: Term
    cond: Term                   # None when unconditional
    nonexec: bool = False
    source: str = ""

    def label(self):
        return self.labels[0] if self.labels else ""

    def key(self):
        from .sig import term_key
        return (self.kind, term_key(self.lhs), term_key(self.rhs),
                term_key(self.cond) if self.cond is not None else None,
                self.nonexec)

    def executable(self):
        if self.nonexec:
            return False
        need = _free_vars(self.rhs) | (
            _free_vars(self.cond) if self.cond is not None else set())
        return need <= self.lhs.vars()


# search predicates bind the variables of their pattern, condition and
# report arguments; only their source state contributes free variables
_SEARCH_TOKENS = {"=>+", "=>*"}


def _free_vars(t):
    from .sig import App
    if isinstance(t, App):
        if any(x in _SEARCH_TOKENS for x in t.op.name):
            return _free_vars(t.args[0])
        out = set()
        for a in t.args:
            out |= _free_vars(a)
        return out
    return t.vars()


# ---------------------------------------------------------------------------
# matching


def match(pattern, subject, sig, theta=None, rest=False):
    """Yield substitutions t with t(pattern) =AC subject.  With rest=True
    the top operator may keep leftover arguments: yields (theta, leftover)
    pairs where leftover is a list (possibly empty)."""
    theta = theta if theta is not None else Subst(sig)
    if rest:
        if isinstance(pattern, App) and pattern.args and pattern.op.assoc \
                and isinstance(subject, App) and subject.op.name == pattern.op.name:
            yield from _match_flat(list(pattern.args), list(subject.args),
                                   pattern.op, sig, theta, allow_rest=True)
        else:
            for th in _match(pattern, subject, sig, theta):
                yield th, []
        return
    yield from _match(pattern, subject, sig, theta)


def _match(pat, sub, sig, theta):
    if isinstance(pat, Var):
        bound = theta.get(pat)
        if bound is not None:
            if bound == sub:
                yield theta
            return
        if sig.poset.le(sub.sort(), pat.vsort):
            th = theta.copy()
            th.map[(pat.name, pat.vsort)] = sub
            yield th
        return
    if isinstance(sub, Var):
        return
    if not pat.args:
        if pat == sub:
            yield theta
        return
    op = pat.op
    if isinstance(sub, App) and sub.op.name == op.name and sub.args:
        if op.assoc:
            yield from (th for th, _ in _match_flat(
                list(pat.args), list(sub.args), op, sig, theta, allow_rest=False))
        elif op.comm:
            a, b = pat.args
            x, y = sub.args
            for th in _match(a, x, sig, theta):
                yield from _match(b, y, sig, th)
            for th in _match(a, y, sig, theta):
                yield from _match(b, x, sig, th)
        else:
            def seq(i, th):
                if i == len(pat.args):
                    yield th
                    return
                for th2 in _match(pat.args[i], sub.args[i], sig, th):
                    yield from seq(i + 1, th2)
            if len(pat.args) == len(sub.args):
                yield from seq(0, theta)
        return
    # top operators differ: identity completion lets a collection pattern
    # match a lone element or the identity itself
    if op.ident is not None:
        elems = [] if sub == op.ident else [sub]
        yield from (th for th, _ in _match_flat(
            list(pat.args), elems, op, sig, theta, allow_rest=False))


def _can_bind(v, block, op, sig):
    """Build the term a collection variable takes for a block of arguments;
    None if the sorts do not allow it."""
    if not block:
        if op.ident is not None and sig.poset.le(op.ident.sort(), v.vsort):
            return op.ident
        return None
    if len(block) == 1:
        t = block[0]
        return t if sig.poset.le(t.sort(), v.vsort) else None
    try:
        t = mk_app(sig, op, block)
    except (NoParse, CafeError):
        return None
    return t if sig.poset.le(t.sort(), v.vsort) else None


def _match_flat(pats, subs, op, sig, theta, allow_rest):
    """Match flattened argument lists under an assoc (and maybe comm)
    operator.  Yields (theta, leftover)."""
    if op.comm:
        yield from _match_ac(pats, subs, op, sig, theta, allow_rest)
    else:
        starts = range(len(subs) + 1) if allow_rest else (0,)
        for start in starts:
            yield from _match_a(pats, subs, op, sig, theta, allow_rest, start)


def _match_ac(pats, subs, op, sig, theta, allow_rest):
    # non-variable pattern elements first, variables last
    order = sorted(range(len(pats)), key=lambda i: isinstance(pats[i], Var))
    pats = [pats[i] for i in order]

    def go(k, remaining, th):
        if k == len(pats):
            if not remaining or allow_rest:
                yield th, list(remaining)
            return
        p = pats[k]
        if isinstance(p, Var):
            bound = th.get(p)
            if bound is not None:
                # remove the bound value (a block or one element) from remaining
                want = list(bound.args) if isinstance(bound, App) \
                    and bound.op.name == op.name else [bound]
                rem = list(remaining)
                ok = True
                for w in want:
                    if w in rem:
                        rem.remove(w)
                    else:
                        ok = False
                        break
                if ok:
                    yield from go(k + 1, rem, th)
                return
            n = len(remaining)
            vars_left = sum(1 for q in pats[k + 1:] if isinstance(q, Var))
            for mask in range(1 << n):
                block = [remaining[i] for i in range(n) if mask >> i & 1]
                t = _can_bind(p, block, op, sig)
                if t is None:
                    continue
                th2 = th.copy()
                th2.map[(p.name, p.vsort)] = t
                rem = [remaining[i] for i in range(n) if not mask >> i & 1]
                yield from go(k + 1, rem, th2)
            return
        seen_keys = set()
        for i, s in enumerate(remaining):
            from .sig import term_key
            tk = term_key(s)
            if tk in seen_keys:
                continue
            seen_keys.add(tk)
            rem = remaining[:i] + remaining[i + 1:]
            for th2 in _match(p, s, sig, th):
                yield from go(k + 1, rem, th2)

    # argument lists are stored left-to-right but treated right-to-left,
    # matching the right-associated internal form used for output
    yield from go(0, list(reversed(subs)), theta)


def _match_a(pats, subs, op, sig, theta, allow_rest, start):
    """Associative (ordered) matching: each pattern element takes a
    contiguous block, variables may take several (or none with identity)."""

    def go(k, pos, th):
        if k == len(pats):
            if pos == len(subs):
                yield th, subs[:start]
            elif allow_rest:
                yield th, subs[:start] + ["|"] + subs[pos:]
            return
        p = pats[k]
        if isinstance(p, Var):
            bound = th.get(p)
            if bound is not None:
                want = list(bound.args) if isinstance(bound, App) \
                    and bound.op.name == op.name else [bound]
                if subs[pos:pos + len(want)] == want:
                    yield from go(k + 1, pos + len(want), th)
                return
            lo = 0 if op.ident is not None else 1
            for ln in range(lo, len(subs) - pos + 1):
                t = _can_bind(p, subs[pos:pos + ln], op, sig)
                if t is None:
                    continue
                th2 = th.copy()
                th2.map[(p.name, p.vsort)] = t
                yield from go(k + 1, pos + ln, th2)
            return
        if pos < len(subs):
            for th2 in _match(p, subs[pos], sig, th):
                yield from go(k + 1, pos + 1, th2)

    yield from go(0, start, theta)


def rewrap(op, sig, contractum, leftover):
    """Re-attach leftover arguments of an extended match around the
    contractum."""
    if not leftover:
        return contractum
    if "|" in leftover:                     # assoc-only: ordered pre/post parts
        cut = leftover.index("|")
        pre, post = leftover[:cut], leftover[cut + 1:]
        return mk_app(sig, op, pre + [contractum] + post)
    return mk_app(sig, op, [contractum] + list(leftover))


# ---------------------------------------------------------------------------
# traces


@dataclass
class Step:
    rule_label: str
    theta: object
    redex: Term
    contractum: Term
    before: Term
    after: Term
    cond_steps: list             # Step list reducing theta(cond) to true


@dataclass
class Trace:
    start: Term
    steps: list = field(default_factory=list)

    def result(self):
        return self.steps[-1].after if self.steps else self.start


def render_trace(trace, renderer):
    """t0 {c1} t1 {c2} t2 ... with {true} for unconditional steps and the
    nested sequence for condition computations."""
    parts = [renderer(trace.start)]
    for st in trace.steps:
        if st.cond_steps:
            sub = Trace(st.cond_steps[0].before, st.cond_steps)
            parts.append("{%s}" % render_trace(sub, renderer))
        else:
            parts.append("{true}")
        parts.append(renderer(st.after))
    return " ".join(parts)


# ---------------------------------------------------------------------------
# reduction engine


TRUE_NAME = ("true",)
FALSE_NAME = ("false",)


class Engine:
    """Reduces terms in one flat module.  Budget shared across nested
    condition computations; a fresh memo per module contents."""

    def __init__(self, flat, budget=None):
        self.flat = flat
        self.sig = flat.sig
        self.budget = budget or Budget()
        self.memo = {}
        self.hooks = dict(getattr(flat, "hooks", {}))

    # -- plain fast reduction ---------------------------------------------

    def reduce(self, t, depth=0):
        # the memo keys on exact structure: comm-equal terms may reduce to
        # the same class but must keep their own argument display order
        k = struct_key(t)
        r = self.memo.get(k)
        if r is not None:
            return r
        r = self._reduce(t, depth)
        self.memo[k] = r
        self.memo[struct_key(r)] = r
        return r

    def _reduce(self, t, depth):
        if isinstance(t, Var):
            return t
        if self._is_special(t):
            return self._special(t, depth)
        cur = t
        if cur.args:
            args = [self.reduce(a, depth) for a in cur.args]
            if any(a is not b for a, b in zip(args, cur.args)):
                cur = mk_app(self.sig, cur.op, args)
        nxt = self._root_rewrite(cur, depth)
        if nxt is None:
            return cur
        self.budget.tick()
        return self.reduce(nxt, depth)

    def _is_special(self, t):
        return t.op.name in self.hooks

    def _special(self, t, depth):
        return self.hooks[t.op.name](self, t, depth)

    def _root_rewrite(self, t, depth, record=None):
        if not isinstance(t, App):
            return None
        b = self._builtin(t, depth)
        if b is not None:
            if record is not None:
                record(b[1], None, t, b[0])
            return b[0]
        for rule in self.flat.rules_for(t):
            for th, leftover in match(rule.lhs, t, self.sig, rest=True):
                cond_steps = None
                if rule.cond is not None:
                    self.budget.check_nesting(depth + 1)
                    ok, cond_steps = self._condition(rule.cond, th, depth + 1,
                                                     record is not None)
                    if not ok:
                        continue
                contractum = th.apply(rule.rhs)
                out = rewrap(rule.lhs.op if isinstance(rule.lhs, App) else None,
                             self.sig, contractum, leftover)
                if record is not None:
                    record(rule.label(), th, t, out, cond_steps)
                return out
        return None

    def _condition(self, cond, th, depth, traced):
        c = th.apply(cond)
        if traced:
            tr = self.reduce_traced(c, depth)
            r = tr.result()
            return (isinstance(r, App) and r.op.name == TRUE_NAME), tr.steps
        r = self.reduce(c, depth)
        return (isinstance(r, App) and r.op.name == TRUE_NAME), None

    def _builtin(self, t, depth):
        name = t.op.name
        if name == ("_", "=", "_"):
            a, b = t.args
            if a == b:
                return self._true(), "builtin-eq"
            if {a.op.name if isinstance(a, App) else None,
                b.op.name if isinstance(b, App) else None} == {TRUE_NAME, FALSE_NAME}:
                return self._false(), "builtin-eq"
            return None
        if name == ("_", "==", "_"):
            a, b = t.args
            ra, rb = self.reduce(a, depth), self.reduce(b, depth)
            return (self._true() if ra == rb else self._false()), "builtin-=="
        if len(name) == 3 and name[0] == "_" and name[1] == ":is":
            a = self.reduce(t.args[0], depth)
            ok = self.sig.poset.le(a.sort(), name[2])
            return (self._true() if ok else self._false()), "builtin-:is"
        return None

    def _true(self):
        return self.flat.bool_const(True)

    def _false(self):
        return self.flat.bool_const(False)

    # -- traced reduction (positions via whole-term snapshots) -------------

    def reduce_traced(self, t, depth=0):
        trace = Trace(t)
        cur = t
        while True:
            step = self._one_step(cur, depth)
            if step is None:
                break
            self.budget.tick()
            trace.steps.append(step)
            cur = step.after
        return trace

    def _one_step(self, t, depth):
        """Leftmost-innermost single step on the whole term; returns a Step
        or None when t is reduced."""
        if isinstance(t, Var):
            return None
        if self._is_special(t):
            r = self._special(t, depth)
            if r == t:
                return None
            return Step("builtin", None, t, r, t, r, [])
        for i, a in enumerate(t.args):
            st = self._one_step(a, depth)
            if st is not None:
                args = list(t.args)
                args[i] = st.after
                whole = mk_app(self.sig, t.op, args)
                return Step(st.rule_label, st.theta, st.redex, st.contractum,
                            t, whole, st.cond_steps)
        holder = {}

        def record(label, th, before, after, cond_steps=None):
            holder["step"] = Step(label, th, before, after, before, after,
                                  cond_steps or [])

        out = self._root_rewrite(t, depth, record=record)
        if out is None:
            return None
        return holder["step"]


def one_step_reduce(t, flat, budget=None, depth=0):
    eng = Engine(flat, budget)
    return eng._one_step(t, depth)
