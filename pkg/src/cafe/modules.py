"""Module elaboration: imports, parameters, views, renamings, sums,
open...close overlays, and the builtin modules (BOOL, TRIV, NAT, RWL).

A module expression elaborates to a FlatModule: the union of every
imported or instantiated part, deduplicated by name/rank for sorts and
operators and structurally for rules.  Import modes (pr/ex/inc/us) are
recorded but all flatten the same way.
"""

from __future__ import annotations

from dataclasses import dataclass

from .sig import (App, CafeError, NoParse, OpDecl, Signature, SortPoset,
                  Subst, Term, Var, close_poset, mk_app)
from .rewrite import Rule, match
from . import syntax
from .syntax import (MInst, MName, MRename, MSum, ModuleUnit, RawEq, RawImport,
                     RawOp, RawSorts, RawVars, Scope, name_template, parse_term)


class ElaborationError(CafeError):
    pass


# ---------------------------------------------------------------------------
# flat modules


class FlatModule:
    def __init__(self, name=""):
        self.name = name
        self.sorts = {}              # name -> None, ordered
        self.edges = []
        self._edge_set = set()
        self.ops = []
        self._op_keys = {}           # (name, arity, coarity) -> OpDecl
        self.rules = []              # executable equations, declaration order
        self.all_rules = []          # including nonexec
        self._rule_keys = set()
        self.trans = []
        self.labels = {}
        self.module_vars = {}
        self.nat_literals = False
        self.hooks = {}
        self.warnings = []
        self.sig = None
        self._by_top = None

    # -- construction ------------------------------------------------------

    def add_sort(self, s):
        self.sorts.setdefault(s, None)
        self._by_top = None

    def add_edge(self, sub, sup):
        if (sub, sup) not in self._edge_set:
            self._edge_set.add((sub, sup))
            self.edges.append((sub, sup))

    def add_op(self, d):
        k = d.key()
        old = self._op_keys.get(k)
        if old is not None:
            if (old.assoc, old.comm, old.id_tokens) != (d.assoc, d.comm, d.id_tokens):
                raise ElaborationError(
                    "conflicting attributes for %s : %s -> %s"
                    % (d.display(), " ".join(x or "?" for x in d.arity), d.coarity))
            if d.constr and not old.constr:
                old.constr = True
            return old
        self._op_keys[k] = d
        self.ops.append(d)
        self._by_top = None
        return d

    def add_rule(self, r):
        k = r.key()
        if k in self._rule_keys:
            return
        self._rule_keys.add(k)
        self.all_rules.append(r)
        for lb in r.labels:
            self.labels[lb] = r
        if r.kind == "tr":
            self.trans.append(r)
        elif not r.nonexec:
            if not r.executable():
                raise ElaborationError(
                    "rule %s has right-hand-side or condition variables "
                    "missing from its left-hand side" % (r.labels or r.lhs,))
            self.rules.append(r)
        self._by_top = None

    def include(self, other):
        for s in other.sorts:
            self.add_sort(s)
        for e in other.edges:
            self.add_edge(*e)
        for d in other.ops:
            self.add_op(d)
        for r in other.all_rules:
            self.add_rule(r)
        self.nat_literals = self.nat_literals or other.nat_literals
        self.hooks.update(other.hooks)
        self.warnings.extend(w for w in other.warnings if w not in self.warnings)

    def build_sig(self):
        poset = close_poset(self.sorts.keys(), self.edges)
        ops = list(self.ops)
        # sort membership operators, one per sort
        for s in self.sorts:
            k = (("_", ":is", s), (None,), "Bool")
            if k not in self._op_keys:
                d = OpDecl(("_", ":is", s), (None,), "Bool", prec=51, source="BOOL")
                self._op_keys[k] = d
                self.ops.append(d)
                ops.append(d)
        self.sig = Signature(poset, self.ops)
        self._by_top = None
        return self.sig

    # -- queries -----------------------------------------------------------

    def scope(self, variables=None):
        return Scope(self.sig, variables, self.nat_literals, nat_const)

    def bool_const(self, b):
        d = self._op_keys.get((("true" if b else "false",), (), "Bool"))
        if d is None:
            raise ElaborationError("BOOL not in scope")
        return App(d, (), "Bool")

    def rules_for(self, t):
        if self._by_top is None:
            self._by_top = {}
        name = t.op.name
        got = self._by_top.get(name)
        if got is None:
            got = []
            for r in self.rules:
                if not isinstance(r.lhs, App):
                    continue
                if r.lhs.op.name == name or r.lhs.op.ident is not None:
                    got.append(r)
            self._by_top[name] = got
        return got

    def copy(self, name=None):
        f = FlatModule(name or self.name)
        f.include(self)
        f.module_vars = dict(self.module_vars)
        f.build_sig()
        return f

    def extended(self, rules, name=None):
        """A copy with extra rules appended (used for goal modules)."""
        f = self.copy(name)
        for r in rules:
            f.add_rule(r)
        return f


# ---------------------------------------------------------------------------
# Nat literals


_NAT_DECLS = {}


def nat_const(text):
    d = _NAT_DECLS.get(text)
    if d is None:
        d = OpDecl((text,), (), "Nat", constr=True, source="NAT")
        _NAT_DECLS[text] = d
    return App(d, (), "Nat")


# ---------------------------------------------------------------------------
# builtins


def _bool_flat():
    f = FlatModule("BOOL")
    f.add_sort("Bool")
    B = "Bool"

    def op(name, arity, coarity, **kw):
        return f.add_op(OpDecl(name_template([name]) if isinstance(name, str)
                               else name, tuple(arity), coarity,
                               source="BOOL", **kw))

    op("true", (), B, constr=True)
    op("false", (), B, constr=True)
    op("not_", (B,), B, prec=53)
    op("_and_", (B, B), B, assoc=True, comm=True, prec=55)
    op("_xor_", (B, B), B, assoc=True, comm=True, prec=57)
    op("_or_", (B, B), B, prec=59)
    op("_implies_", (B, B), B, prec=61)
    op("_iff_", (B, B), B, prec=63)
    op(("_", "=", "_"), (None, None), B, comm=True, prec=51)
    op(("_", "==", "_"), (None, None), B, prec=51)
    ite = f.add_op(OpDecl(("if", "_", "then", "_", "else", "_", "fi"),
                          (B, None, None), None, source="BOOL"))
    f.build_sig()

    src = """
    eq true and B:Bool = B .
    eq false and B:Bool = false .
    eq B:Bool and B:Bool = B .
    eq false xor B:Bool = B .
    eq B:Bool xor B:Bool = false .
    eq A:Bool and (B:Bool xor C:Bool) = (A and B) xor (A and C) .
    eq not A:Bool = true xor A .
    eq A:Bool or B:Bool = (A and B) xor (A xor B) .
    eq A:Bool implies B:Bool = true xor A xor (A and B) .
    eq A:Bool iff B:Bool = true xor A xor B .
    eq (B:Bool = true) = B .
    """
    for raw in _parse_raw_eqs(src):
        f.add_rule(_elab_eq(raw, f))

    def if_hook(eng, t, depth):
        c = eng.reduce(t.args[0], depth)
        if isinstance(c, App) and c.op.name == ("true",):
            return eng.reduce(t.args[1], depth)
        if isinstance(c, App) and c.op.name == ("false",):
            return eng.reduce(t.args[2], depth)
        return mk_app(eng.sig, t.op,
                      [c, eng.reduce(t.args[1], depth), eng.reduce(t.args[2], depth)])

    f.hooks[ite.name] = if_hook
    return f


def _triv_flat(bool_flat):
    f = FlatModule("TRIV")
    f.include(bool_flat)
    f.add_sort("Elt")
    f.build_sig()
    return f


def _nat_flat(bool_flat):
    f = FlatModule("NAT")
    f.include(bool_flat)
    f.add_sort("Nat")
    f.nat_literals = True
    f.build_sig()
    return f


SEARCH_ONE_PLUS = ("_", "=", "(", "*", ",", "1", ")", "=>+",
                   "_", "if", "_", "suchThat", "_", "{", "_", "}")
SEARCH_EXISTS = ("_", "=", "(", "1", ",", "1", ")", "=>+", "_")
SEARCH_STAR = ("_", "=", "(", "*", ",", "*", ")", "=>*", "_", "suchThat", "_")


def _rwl_flat(bool_flat):
    from . import search as search_mod
    f = FlatModule("RWL")
    f.include(bool_flat)
    f.add_op(OpDecl(SEARCH_ONE_PLUS, (None, None, "Bool", "Bool", None),
                    "Bool", source="RWL"))
    f.add_op(OpDecl(SEARCH_EXISTS, (None, None), "Bool", source="RWL"))
    f.add_op(OpDecl(SEARCH_STAR, (None, None, "Bool"), "Bool", source="RWL"))
    f.build_sig()
    f.hooks[SEARCH_ONE_PLUS] = search_mod.hook_one_plus
    f.hooks[SEARCH_EXISTS] = search_mod.hook_exists
    f.hooks[SEARCH_STAR] = search_mod.hook_star
    return f


def _parse_raw_eqs(src):
    toks = syntax.tokenize(src)
    p = syntax.UnitParser(toks)
    out = []
    while not p.eof():
        d = p.parse_decl()
        if not isinstance(d, RawEq):
            raise ElaborationError("expected equation")
        out.append(d)
    return out


def _elab_eq(raw, flat, variables=None):
    scope = flat.scope(dict(flat.module_vars, **(variables or {})))
    lhs = parse_term([syntax.Tok(x, raw.line) for x in raw.lhs], scope)
    rhs = parse_term([syntax.Tok(x, raw.line) for x in raw.rhs], scope)
    cond = None
    if raw.cond:
        cond = parse_term([syntax.Tok(x, raw.line) for x in raw.cond], scope)
    kind = "tr" if raw.kind in ("tr", "ctr") else "eq"
    return Rule(kind, raw.labels, lhs, rhs, cond, raw.nonexec, flat.name)


# ---------------------------------------------------------------------------
# environment / registry


class Env:
    """Module registry plus flattening cache."""

    def __init__(self):
        self.units = {}
        self.flats = {}
        bool_flat = _bool_flat()
        self.flats["BOOL"] = bool_flat
        self.flats["TRIV"] = _triv_flat(bool_flat)
        self.flats["NAT"] = _nat_flat(bool_flat)
        self.flats["RWL"] = _rwl_flat(bool_flat)

    def declare(self, unit):
        self.units[unit.name] = unit
        # drop cached flats that might mention it (cheap: clear derived cache)
        self.flats = {k: v for k, v in self.flats.items()
                      if k in ("BOOL", "TRIV", "NAT", "RWL")}

    def flatten(self, expr, bindings=None):
        bindings = bindings or {}
        key = expr.key() + "".join(sorted("<%s=%s>" % (k, v.name)
                                          for k, v in bindings.items()))
        if key in self.flats:
            return self.flats[key]
        flat = self._flatten(expr, bindings)
        self.flats[key] = flat
        return flat

    def _flatten(self, expr, bindings):
        if isinstance(expr, MName):
            if expr.name in bindings:
                return bindings[expr.name]
            if expr.name in self.flats:
                return self.flats[expr.name]
            unit = self.units.get(expr.name)
            if unit is None:
                raise ElaborationError("unresolved module %s" % expr.name)
            return self.elaborate(unit, bindings={})
        if isinstance(expr, MSum):
            f = FlatModule(expr.key())
            for p in expr.parts:
                f.include(self.flatten(p, bindings))
            f.build_sig()
            return f
        if isinstance(expr, MRename):
            base = self.flatten(expr.base, bindings)
            return rename_flat(base, expr.view, name=expr.key())
        if isinstance(expr, MInst):
            return self._instantiate(expr, bindings)
        raise ElaborationError("bad module expression %r" % (expr,))

    def _instantiate(self, expr, bindings):
        # elaborate the body over its formal parameters, rename by the
        # combined argument views, then union in the argument modules
        base = self.flatten(expr.base, bindings)
        view = {"sorts": {}, "ops": []}
        for argexpr, v in expr.args:
            if v:
                view["sorts"].update(v.get("sorts", {}))
                view["ops"].extend(v.get("ops", []))
            else:
                # default view: the parameter's element sort maps onto the
                # argument's principal sort when the names do not coincide
                argflat = self.flatten(argexpr, bindings)
                if "Elt" in base.sorts and "Elt" not in argflat.sorts:
                    fresh = [s for s in argflat.sorts
                             if s != "Bool" and s not in base.sorts]
                    if len(fresh) == 1:
                        view["sorts"]["Elt"] = fresh[0]
        out = FlatModule(expr.key())
        renamed = rename_flat(base, view, name=expr.key()) if (
            view["sorts"] or view["ops"]) else base
        out.include(renamed)
        for argexpr, v in expr.args:
            out.include(self.flatten(argexpr, bindings))
        out.build_sig()
        return out

    # -- module declarations ----------------------------------------------

    def elaborate(self, unit, bindings=None):
        bindings = dict(bindings or {})
        flat = FlatModule(unit.name)
        flat.include(self.flats["BOOL"])
        flat.include(self.flats["RWL"])
        for pname, reqexpr in unit.params:
            req = self.flatten(reqexpr, bindings)
            bindings[pname] = req
            flat.include(req)
        self.apply_decls(flat, unit.decls, bindings)
        check_transitions(flat)
        return flat

    def apply_decls(self, flat, decls, bindings=None):
        """Two passes: signature first, then rules."""
        eqs = []
        for d in decls:
            if isinstance(d, RawImport):
                flat.include(self.flatten(d.expr, bindings or {}))
            elif isinstance(d, RawSorts):
                for g in d.groups:
                    for s in g:
                        flat.add_sort(s)
                for lo, hi in zip(d.groups, d.groups[1:]):
                    for a in lo:
                        for b in hi:
                            flat.add_edge(a, b)
            elif isinstance(d, RawOp):
                pass
            elif isinstance(d, RawVars):
                for n in d.names:
                    flat.module_vars[n] = Var(n, d.sort)
            elif isinstance(d, RawEq):
                eqs.append(d)
            else:
                raise ElaborationError("unsupported declaration %r" % (d,))
        new_ops = []
        for d in decls:
            if isinstance(d, RawOp):
                for name_toks in d.names:
                    tpl = name_template(name_toks)
                    op = OpDecl(tpl, tuple(d.arity), d.coarity,
                                assoc=d.attrs.get("assoc", False),
                                comm=d.attrs.get("comm", False),
                                constr=d.constr,
                                id_tokens=tuple(d.attrs["id"]) if "id" in d.attrs else None,
                                prec=d.attrs.get("prec"),
                                source=flat.name)
                    new_ops.append(flat.add_op(op))
        flat.build_sig()
        for op in new_ops:
            if op.id_tokens and op.ident is None:
                scope = flat.scope()
                op.ident = parse_term([syntax.Tok(x, 0) for x in op.id_tokens], scope)
        for raw in eqs:
            flat.add_rule(_elab_eq(raw, flat))
        flat.build_sig()
        return flat


# ---------------------------------------------------------------------------
# renaming


def rename_flat(flat, view, name=""):
    smap = dict(view.get("sorts", {}))
    direct = {}
    patterns = []
    for lhs_toks, rhs_toks in view.get("ops", []):
        if any(syntax.split_var_token(t) for t in lhs_toks):
            patterns.append((lhs_toks, rhs_toks))
        else:
            direct[name_template(lhs_toks)] = name_template(rhs_toks)

    out = FlatModule(name or flat.name)
    out.nat_literals = flat.nat_literals
    out.hooks = dict(flat.hooks)
    out.module_vars = {}
    for s in flat.sorts:
        out.add_sort(smap.get(s, s))
    for a, b in flat.edges:
        out.add_edge(smap.get(a, a), smap.get(b, b))
    decl_map = {}
    for d in flat.ops:
        dname = direct.get(d.name, d.name)
        if len(dname) == 3 and dname[:2] == ("_", ":is"):
            dname = ("_", ":is", smap.get(dname[2], dname[2]))
        nd = OpDecl(dname,
                    tuple(a if a is None else smap.get(a, a) for a in d.arity),
                    None if d.coarity is None else smap.get(d.coarity, d.coarity),
                    assoc=d.assoc, comm=d.comm, constr=d.constr,
                    id_tokens=d.id_tokens, prec=d.prec, source=d.source)
        nd = out.add_op(nd)
        decl_map[id(d)] = nd
    out.build_sig()

    # resolve identity elements in the renamed signature
    for d in flat.ops:
        nd = decl_map[id(d)]
        if d.ident is not None and nd.ident is None:
            nd.ident = _rename_term(d.ident, out, smap, decl_map)

    pattern_rules = _elab_view_patterns(patterns, out, smap)

    for r in flat.all_rules:
        lhs = _rename_term(r.lhs, out, smap, decl_map)
        rhs = _rename_term(r.rhs, out, smap, decl_map)
        cond = _rename_term(r.cond, out, smap, decl_map) if r.cond is not None else None
        nr = Rule(r.kind, r.labels,
                  _apply_patterns(lhs, pattern_rules, out),
                  _apply_patterns(rhs, pattern_rules, out),
                  _apply_patterns(cond, pattern_rules, out) if cond is not None else None,
                  r.nonexec, r.source)
        out.add_rule(nr)
    for n, v in flat.module_vars.items():
        out.module_vars[n] = Var(n, smap.get(v.vsort, v.vsort))
    out.build_sig()
    return out


def _elab_view_patterns(patterns, renamed, smap):
    # term patterns relate a term of the source module (its variable sorts
    # still spelled in source names) to a term of the target; both sides are
    # read in the renamed signature, with the sort map applied to the
    # variable sorts on the left
    out = []
    for lhs_toks, rhs_toks in patterns:
        scope = renamed.scope()
        lt = []
        for x in lhs_toks:
            sv = syntax.split_var_token(x)
            if sv and sv[1] in smap:
                x = "%s:%s" % (sv[0], smap[sv[1]])
            lt.append(x)
        lhs = parse_term([syntax.Tok(x, 0) for x in lt], scope)
        rhs = parse_term([syntax.Tok(x, 0) for x in rhs_toks], scope)
        out.append((lhs, rhs))
    return out


def _apply_patterns(t, pattern_rules, flat):
    if not pattern_rules or t is None:
        return t
    if isinstance(t, Var):
        return t
    args = [_apply_patterns(a, pattern_rules, flat) for a in t.args]
    cur = mk_app(flat.sig, t.op, args) if t.args else t
    for lhs, rhs in pattern_rules:
        for th in match(lhs, cur, flat.sig):
            return th.apply(rhs)
    return cur


def _rename_term(t, out, smap, decl_map):
    if isinstance(t, Var):
        return Var(t.name, smap.get(t.vsort, t.vsort))
    nd = decl_map.get(id(t.op))
    if nd is None:
        # operator from outside the renamed flat (shared builtin decl)
        nd = out._op_keys.get((t.op.name, t.op.arity, t.op.coarity), t.op)
    if not t.args:
        return App(nd, (), nd.coarity)
    return mk_app(out.sig, nd, [_rename_term(a, out, smap, decl_map) for a in t.args])


# ---------------------------------------------------------------------------
# transition checks


def check_transitions(flat):
    if not flat.trans:
        return
    first = flat.trans[0]
    state = first.lhs.sort()
    for s in flat.sorts:
        if s != state and flat.sig.poset.le(state, s):
            raise ElaborationError(
                "state sort %s has a supersort %s" % (state, s))
    for r in flat.trans:
        for side in (r.lhs, r.rhs):
            if not flat.sig.poset.same_component(side.sort(), state):
                raise ElaborationError(
                    "transition %s is not on the state sort" % (r.labels,))
            for sub in _strict_subterms(side):
                if flat.sig.poset.same_component(sub.sort(), state) \
                        and flat.sig.poset.le(state, sub.sort()):
                    raise ElaborationError(
                        "transition %s has a state-sorted strict subterm"
                        % (r.labels,))
    # left-reducedness is only a warning: scratch modules may add equations
    from .rewrite import Engine
    eng = Engine(flat)
    for r in flat.trans:
        try:
            red = eng.reduce(r.lhs)
        except CafeError:
            continue
        if red != r.lhs:
            w = "transition %s left-hand side is not reduced" % (r.label() or "?")
            if w not in flat.warnings:
                flat.warnings.append(w)


def _strict_subterms(t):
    if isinstance(t, App):
        for a in t.args:
            yield a
            yield from _strict_subterms(a)


# ---------------------------------------------------------------------------
# open ... close


class Overlay:
    """A scratch module over a base flat; declarations accumulate and the
    effective flat is rebuilt on each addition."""

    def __init__(self, env, base_flat):
        self.env = env
        self.base = base_flat
        self.decls = []
        self.closed = False
        self.flat = base_flat.copy(base_flat.name + "+")

    def add(self, decl):
        if self.closed:
            raise ElaborationError("declaration after close")
        self.decls.append(decl)
        f = self.base.copy(self.base.name + "+")
        self.env.apply_decls(f, self.decls)
        check_transitions(f)
        self.flat = f

    def close(self):
        self.closed = True


def builtin_registry():
    return Env()
