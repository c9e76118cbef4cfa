"""Order-sorted signatures: sort posets, operator declarations, terms.

Sorts live in a poset built from declared subsort pairs.  Operators are
mixfix token templates with ranks.  Terms are flattened at construction
time: arguments of assoc operators are merged into one argument list and
identity elements are dropped.  Equality of terms (and their hash) is
modulo assoc/comm/identity via a canonical key in which commutative
argument lists are sorted by a fixed total term order.
"""

from __future__ import annotations

from dataclasses import dataclass


class CafeError(Exception):
    pass


class SubsortCycle(CafeError):
    pass


class NoParse(CafeError):
    pass


class AmbiguousParse(CafeError):
    pass


class SortViolation(CafeError):
    pass


# ---------------------------------------------------------------------------
# sort poset


class SortPoset:
    """Reflexive-transitive closure of the declared subsort pairs."""

    def __init__(self, sorts, edges):
        self.sorts = frozenset(sorts)
        self.edges = frozenset(edges)
        ups = {s: {s} for s in self.sorts}
        for sub, sup in edges:
            if sub not in self.sorts or sup not in self.sorts:
                raise CafeError("subsort declaration uses undeclared sort: %s < %s" % (sub, sup))
            ups[sub].add(sup)
        # transitive closure, iterate to fixpoint (tiny posets in practice)
        changed = True
        while changed:
            changed = False
            for s in self.sorts:
                grown = set(ups[s])
                for t in ups[s]:
                    grown |= ups[t]
                if grown != ups[s]:
                    ups[s] = grown
                    changed = True
        for a in self.sorts:
            for b in ups[a]:
                if a != b and a in ups[b]:
                    raise SubsortCycle("subsort cycle through %s and %s" % (a, b))
        self._ups = {s: frozenset(u) for s, u in ups.items()}
        # connected components: smallest equivalence containing <=
        self.component = {}
        cid = 0
        for s in sorted(self.sorts):
            if s in self.component:
                continue
            stack = [s]
            while stack:
                x = stack.pop()
                if x in self.component:
                    continue
                self.component[x] = cid
                for y in self.sorts:
                    if y not in self.component and (
                        y in self._ups[x] or x in self._ups[y]
                    ):
                        stack.append(y)
            cid += 1

    def le(self, a, b):
        return b in self._ups.get(a, ())

    def same_component(self, a, b):
        return self.component.get(a) == self.component.get(b)

    def ups(self, s):
        return self._ups[s]


def close_poset(sorts, edges):
    return SortPoset(sorts, edges)


# ---------------------------------------------------------------------------
# operator declarations


@dataclass
class OpDecl:
    """One rank of a (possibly overloaded, possibly mixfix) operator.

    name is the token template; "_" tokens are argument holes.  Polymorphic
    builtins use None entries in arity (any sort) and may use None coarity
    (result sort follows an argument).
    """

    name: tuple
    arity: tuple
    coarity: str
    assoc: bool = False
    comm: bool = False
    constr: bool = False
    id_tokens: tuple = None
    prec: int = None
    source: str = ""
    ident: "Term" = None          # resolved identity element, set at elaboration

    def __post_init__(self):
        holes = sum(1 for t in self.name if t == "_")
        if holes and holes != len(self.arity):
            raise CafeError("operator %s: %d holes for %d arguments"
                            % (self.display(), holes, len(self.arity)))

    def display(self):
        return " ".join(self.name) if any(t == "_" for t in self.name) else "".join(self.name)

    @property
    def is_mixfix(self):
        return any(t == "_" for t in self.name)

    def key(self):
        return (self.name, self.arity, self.coarity)


# ---------------------------------------------------------------------------
# terms


class Term:
    __slots__ = ("_hash",)

    def sort(self):
        raise NotImplementedError

    def vars(self):
        raise NotImplementedError


class Var(Term):
    __slots__ = ("name", "vsort")

    def __init__(self, name, vsort):
        self.name = name
        self.vsort = vsort
        self._hash = hash(("v", name, vsort))

    def sort(self):
        return self.vsort

    def vars(self):
        return {(self.name, self.vsort)}

    def __eq__(self, other):
        return (self is other) or (
            isinstance(other, Var) and self.name == other.name and self.vsort == other.vsort
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "%s:%s" % (self.name, self.vsort)


class App(Term):
    """Operator application.  Zero args means constant.

    Arguments of assoc operators are flattened (the list stands for any
    bracketing) and identity elements are removed, but the argument order
    of assoc+comm operators is kept as constructed; commutativity lives in
    the equality key, so displayed terms keep their source order while
    `==` on terms decides equality modulo the attributes.
    """

    __slots__ = ("op", "args", "_sort", "_vars", "_ckey", "_skey")

    def __init__(self, op, args, sort):
        self.op = op
        self.args = tuple(args)
        self._sort = sort
        self._vars = None
        self._ckey = None
        self._skey = None
        self._hash = None

    def sort(self):
        return self._sort

    def vars(self):
        if self._vars is None:
            vs = set()
            for a in self.args:
                vs |= a.vars()
            self._vars = frozenset(vs)
        return self._vars

    def is_ground(self):
        return not self.vars()

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, Term) and term_key(self) == term_key(other)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(term_key(self))
        return self._hash

    def __repr__(self):
        if not self.args:
            return "".join(self.op.name)
        return "%s(%s)" % (" ".join(self.op.name), ", ".join(map(repr, self.args)))


def term_key(t):
    """Equality-and-ordering key deciding =AC: variables first, then by
    operator name, rank and children; assoc+comm argument keys are sorted,
    comm-only pairs are sorted, assoc-only keep their order."""
    if isinstance(t, Var):
        return (0, t.vsort, t.name)
    if t._ckey is not None:
        return t._ckey
    ks = [term_key(a) for a in t.args]
    if t.op.comm:
        ks.sort()
    key = (1, t.op.name, tuple(a or "" for a in t.op.arity),
           t.op.coarity or "", tuple(ks))
    t._ckey = key
    return key


def struct_key(t):
    """Exact structural key, argument order preserved.  Distinguishes
    equal-modulo-comm terms that display differently."""
    if isinstance(t, Var):
        return (0, t.vsort, t.name)
    if t._skey is not None:
        return t._skey
    key = (1, t.op.name, tuple(a or "" for a in t.op.arity),
           t.op.coarity or "", tuple(struct_key(a) for a in t.args))
    t._skey = key
    return key


# ---------------------------------------------------------------------------
# signature


class Signature:
    def __init__(self, poset, ops):
        self.poset = poset
        self.ops = list(ops)
        self.by_name = {}
        for d in self.ops:
            self.by_name.setdefault(d.name, []).append(d)

    def decls(self, name):
        return self.by_name.get(name, [])

    # -- validity checks (report style: list of message strings) ----------

    def check_sensible(self):
        """Overloaded ranks with component-equivalent arities must have
        component-equivalent coarities."""
        out = []
        p = self.poset
        for name, ds in self.by_name.items():
            for i, a in enumerate(ds):
                for b in ds[i + 1:]:
                    if len(a.arity) != len(b.arity):
                        continue
                    if None in a.arity or None in b.arity:
                        continue
                    if all(p.same_component(x, y) for x, y in zip(a.arity, b.arity)):
                        if not p.same_component(a.coarity, b.coarity):
                            out.append("not sensible: %s : %s -> %s vs %s -> %s"
                                       % (a.display(), " ".join(a.arity), a.coarity,
                                          " ".join(b.arity), b.coarity))
        return out

    def check_regular(self):
        """For every rank (w1,s1) of f and every w0 <= w1 the applicable
        ranks of f must have a unique least element."""
        out = []
        p = self.poset
        le_w = lambda w, v: all(p.le(x, y) for x, y in zip(w, v))
        for name, ds in self.by_name.items():
            concrete = [d for d in ds if None not in d.arity and d.coarity]
            for d in concrete:
                for w0 in self._lower_arities(d.arity):
                    cands = [(e.arity, e.coarity) for e in concrete
                             if len(e.arity) == len(w0) and le_w(w0, e.arity)]
                    least = [c for c in cands
                             if all(le_w(c[0], o[0]) and p.le(c[1], o[1]) for o in cands)]
                    if not least:
                        out.append("not regular: %s has no least rank above %s"
                                   % (d.display(), " ".join(w0) or "()"))
        return out

    def _lower_arities(self, w):
        downs = []
        for s in w:
            downs.append([x for x in self.poset.sorts if self.poset.le(x, s)])
        if not w:
            return [()]
        out = [()]
        for d in downs:
            out = [pre + (x,) for pre in out for x in sorted(d)]
        return out

    # -- least rank / least sort ------------------------------------------

    def least_rank(self, name, arg_sorts):
        """The least applicable rank for argument sorts, per regularity."""
        p = self.poset
        cands = []
        for d in self.decls(name):
            if len(d.arity) != len(arg_sorts):
                continue
            if all(a is None or p.le(s, a) for s, a in zip(arg_sorts, d.arity)):
                cands.append(d)
        if not cands:
            raise NoParse("no rank of %s admits (%s)"
                          % ("".join(name), ", ".join(arg_sorts)))
        def le_rank(a, b):
            return all(
                (x is None) == (y is None) and (x is None or p.le(x, y))
                for x, y in zip(a.arity, b.arity)
            ) and (a.coarity is None or b.coarity is None or p.le(a.coarity, b.coarity))
        least = [a for a in cands if all(le_rank(a, b) for b in cands)]
        if not least:
            raise AmbiguousParse("no least rank of %s for (%s)"
                                 % ("".join(name), ", ".join(arg_sorts)))
        return least[0]


# ---------------------------------------------------------------------------
# canonical term construction


def _result_sort(sig, op, args):
    if op.coarity is None:
        # if_then_else_fi: result follows the branches
        sa, sb = args[1].sort(), args[2].sort()
        if sig.poset.le(sa, sb):
            return sb
        return sa
    if None in op.arity:
        return op.coarity
    return sig.least_rank(op.name, [a.sort() for a in args]).coarity


def mk_app(sig, op, args):
    """Build a canonical application: flatten assoc arguments, drop
    identity elements, sort assoc+comm arguments."""
    args = list(args)
    if op.assoc:
        flat = []
        for a in args:
            if isinstance(a, App) and a.op.name == op.name:
                flat.extend(a.args)
            else:
                flat.append(a)
        args = flat
    if op.ident is not None:
        args = [a for a in args if a != op.ident]
        if not args:
            return op.ident
        if len(args) == 1:
            return args[0]
    if op.assoc and len(args) > len(op.arity):
        # fold the rank computation pairwise over the flattened arguments
        s = args[0].sort()
        for a in args[1:]:
            s = sig.least_rank(op.name, [s, a.sort()]).coarity
        sort = s
    else:
        sort = _result_sort(sig, op, args)
    return App(op, args, sort)


def const(op):
    if op.arity:
        raise CafeError("%s is not a constant" % op.display())
    return App(op, (), op.coarity)


def least_sort(t):
    return t.sort()


# ---------------------------------------------------------------------------
# substitutions


class Subst:
    """Sort-respecting variable bindings.  Unbound variables pass through
    unchanged, which partial instantiations rely on."""

    def __init__(self, sig, bindings=None):
        self.sig = sig
        self.map = {}
        if bindings:
            for (name, vsort), t in dict(bindings).items():
                self.bind(name, vsort, t)

    def bind(self, name, vsort, t):
        if not self.sig.poset.le(t.sort(), vsort):
            raise SortViolation("cannot bind %s:%s to term of sort %s"
                                % (name, vsort, t.sort()))
        self.map[(name, vsort)] = t

    def get(self, v):
        return self.map.get((v.name, v.vsort))

    def __contains__(self, v):
        return (v.name, v.vsort) in self.map

    def __len__(self):
        return len(self.map)

    def items(self):
        return self.map.items()

    def copy(self):
        s = Subst(self.sig)
        s.map = dict(self.map)
        return s

    def apply(self, t):
        if isinstance(t, Var):
            return self.map.get((t.name, t.vsort), t)
        if not t.args:
            return t
        new = [self.apply(a) for a in t.args]
        if all(n is o for n, o in zip(new, t.args)):
            return t
        return mk_app(self.sig, t.op, new)

    def __repr__(self):
        return "{" + ", ".join("%s:%s <- %r" % (n, s, t) for (n, s), t in sorted(self.map.items())) + "}"
