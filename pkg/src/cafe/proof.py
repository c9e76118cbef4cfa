"""Goal-directed proof trees over the rewrite engine.

A goal bundles a context module, a set of assumption equations and the
sentences still to be proved.  Tactics split goals by exhaustive case
analysis (csp, ctf) or instantiate a hypothesis rule (init); rd-
discharges a goal whose sentences reduce to identical normal forms, or
whose assumptions have become contradictory.
"""

from __future__ import annotations

from .sig import App, CafeError, Subst, Var, term_key
from .rewrite import Engine, Rule
from . import syntax
from .syntax import RawCsp, RawEq, RawInit, parse_term, render
from .modules import _elab_eq


class ProofError(CafeError):
    pass


def _is_bool(t, which):
    return isinstance(t, App) and t.op.name == (which,)


class Goal:
    def __init__(self, name, base, ina, stp, created_by=None, parent=None):
        self.name = name
        self.base = base            # context FlatModule (shared, not copied)
        self.ina = list(ina)        # assumption rules introduced on this path
        self.stp = list(stp)        # [(lhs, rhs)] sentences to prove
        self.created_by = created_by
        self.parent = parent
        self.children = []
        self.dcd = False
        self._flat = None

    def flat(self):
        if self._flat is None:
            self._flat = self.base.extended(self.ina, name=self.name)
        return self._flat

    def leaf(self):
        return not self.children

    def done(self):
        """Discharged, directly or through a fully discharged subtree."""
        if self.dcd:
            return True
        return bool(self.children) and all(c.done() for c in self.children)

    def child(self, tactic, ina_extra, suffix=None):
        name = "%s-%d" % (self.name, len(self.children) + 1)
        if self.name == "root":
            name = str(len(self.children) + 1)
        g = Goal(name, self.base, self.ina + list(ina_extra), self.stp,
                 created_by=tactic, parent=self)
        self.children.append(g)
        return g


class ProofTree:
    def __init__(self, base, stp, eng_for):
        self.root = Goal("root", base, [], stp)
        self.tactics = {}           # name -> RawCsp | RawInit
        self.selected = None
        self.eng_for = eng_for      # FlatModule -> Engine, session budgets

    def goals(self):
        out = []

        def walk(g):
            out.append(g)
            for c in g.children:
                walk(c)
        walk(self.root)
        return out

    def find(self, name):
        for g in self.goals():
            if g.name == name:
                return g
        raise ProofError("no goal named %s" % name)

    def ntg(self):
        """The next target goal: the selected one if still pending,
        otherwise the first undischarged leaf in tree order."""
        if self.selected is not None and self.selected.leaf() and not self.selected.dcd:
            return self.selected
        for g in self.goals():
            if g.leaf() and not g.dcd:
                return g
        return None

    # -- tactics -----------------------------------------------------------

    def define(self, name, tactic):
        self.tactics[name] = tactic

    def apply(self, names):
        scope = self.ntg()
        if scope is None:
            raise ProofError("no target goal")
        for name in names:
            targets = [g for g in self._subtree(scope) if g.leaf() and not g.dcd]
            if not targets:
                raise ProofError("no target goal for %s" % name)
            for g in targets:
                if name == "rd-":
                    self.discharge(g)
                else:
                    tac = self.tactics.get(name)
                    if tac is None:
                        raise ProofError("no tactic named %s" % name)
                    if isinstance(tac, RawCsp):
                        self.apply_csp(g, name, tac)
                    else:
                        self.apply_init(g, name, tac)
        self.selected = None

    def _subtree(self, top):
        out = []

        def walk(g):
            out.append(g)
            for c in g.children:
                walk(c)
        walk(top)
        return out

    def apply_csp(self, goal, name, tac):
        eqs = list(tac.eqs)
        if tac.ctf:
            if len(eqs) != 1:
                raise ProofError("%s: ctf takes one equation" % name)
            e = eqs[0]
            neg = RawEq("eq", (), False,
                        ["("] + list(e.lhs) + ["="] + list(e.rhs) + [")"],
                        ["false"], [], e.line)
            eqs = [e, neg]
        for raw in eqs:
            rule = _elab_eq(raw, goal.flat())
            rule = self._effective(goal, rule)
            goal.child(name, [rule] if rule is not None else [])

    def apply_init(self, goal, name, tac):
        flat = goal.flat()
        if isinstance(tac.eq, str):
            src = flat.labels.get(tac.eq)
            if src is None:
                raise ProofError("%s: no rule labelled %s" % (name, tac.eq))
        else:
            src = _elab_eq(tac.eq, flat)
        theta = Subst(flat.sig)
        scope = flat.scope()
        for var_toks, val_toks in tac.bindings:
            v = parse_term(_toks(var_toks), scope)
            val = parse_term(_toks(val_toks), scope)
            if not isinstance(v, Var):
                raise ProofError("%s: %s is not a variable" % (name, var_toks))
            if not isinstance(val, Var) or (val.name, val.vsort) != (v.name, v.vsort):
                theta.map[(v.name, v.vsort)] = val
        labels = (tac.as_name,) if tac.as_name else src.labels
        rule = Rule(src.kind, labels, theta.apply(src.lhs), theta.apply(src.rhs),
                    theta.apply(src.cond) if src.cond is not None else None,
                    False, flat.name)
        rule = self._effective(goal, rule)
        if rule is not None and not rule.nonexec and not rule.executable():
            raise ProofError("%s: instance is not executable" % name)
        goal.child(name, [rule] if rule is not None else [])

    def _effective(self, goal, rule):
        """Reduce the left-hand side in the goal context so the new rule
        fires on normal forms; drop it when it becomes trivial."""
        eng = self.eng_for(goal.flat())
        red = eng.reduce(rule.lhs)
        if term_key(red) == term_key(rule.rhs):
            return None
        cond, nonexec = rule.cond, rule.nonexec
        clash = ((_is_bool(red, "false") and _is_bool(rule.rhs, "true"))
                 or (_is_bool(red, "true") and _is_bool(rule.rhs, "false")))
        if clash:
            # a case assumption collapsing to a Boolean clash marks the
            # case contradictory; keep it as evidence but never rewrite
            # with it, and discard a condition that holds in this goal
            nonexec = True
            if cond is not None and _is_bool(eng.reduce(cond), "true"):
                cond = None
        if (term_key(red) != term_key(rule.lhs) or cond is not rule.cond
                or nonexec != rule.nonexec):
            rule = Rule(rule.kind, rule.labels, red, rule.rhs, cond,
                        nonexec, rule.source)
        return rule

    # -- discharge ---------------------------------------------------------

    def discharge(self, goal):
        if self._contradictory(goal):
            goal.dcd = True
            return True
        eng = self.eng_for(goal.flat())
        for lhs, rhs in goal.stp:
            if term_key(eng.reduce(lhs)) != term_key(eng.reduce(rhs)):
                return False
        goal.dcd = True
        return True

    def _contradictory(self, goal):
        for r in goal.ina:
            if r.cond is None and (
                (_is_bool(r.lhs, "false") and _is_bool(r.rhs, "true"))
                or (_is_bool(r.lhs, "true") and _is_bool(r.rhs, "false"))
            ):
                return True
        return False

    # -- display -----------------------------------------------------------

    def show(self):
        lines = []
        for g in self.goals():
            star = "*" if g.done() else ""
            if g.created_by is None:
                lines.append("%s%s" % (g.name, star))
            else:
                lines.append("%-5s %s%s" % ("[" + g.created_by + "]", g.name, star))
        return lines

    def describe(self):
        lines = []
        for g in self.goals():
            tag = ("[" + g.created_by + "] ") if g.created_by else ""
            lines.append("%s%s%s" % (tag, g.name, "*" if g.done() else ""))
            for r in g.ina:
                lines.append("  assume %s" % _render_rule(r))
            for lhs, rhs in g.stp:
                lines.append("  prove  %s = %s" % (render(lhs), render(rhs)))
        return lines


def _toks(texts):
    return [syntax.Tok(x, 0) for x in texts]


def _render_rule(r):
    s = "%s = %s" % (render(r.lhs), render(r.rhs))
    if r.cond is not None:
        s += " if %s" % render(r.cond)
    return s


def make_tree(base, raw_eqs, eng_for):
    """Build a proof tree from the :goal equations in the given module."""
    stp = []
    for raw in raw_eqs:
        rule = _elab_eq(raw, base)
        stp.append((rule.lhs, rule.rhs))
    return ProofTree(base, stp, eng_for)
