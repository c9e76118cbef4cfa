"""Lexer, mixfix term parser, declaration/command parser, pretty printer.

Tokenization is whitespace driven.  The characters ( ) [ ] { } , . ; are
reserved single-character tokens; everything else is a maximal run of
non-whitespace characters, so operator and sort names may contain
@ $ # = < > - + | ^ ! and the like.  -- and --> start a comment that
runs to the end of the line and may start mid-line.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .sig import (App, AmbiguousParse, CafeError, NoParse, Var, mk_app)

RESERVED = set("()[]{},.;")


class ParseError(CafeError):
    pass


# ---------------------------------------------------------------------------
# lexer


@dataclass
class Tok:
    text: str
    line: int

    def __repr__(self):
        return self.text


def tokenize(text):
    toks = []
    for ln, line in enumerate(text.splitlines(), 1):
        # a comment starts at any whitespace-separated field beginning with --
        pos, cut = 0, None
        for field_ in line.split():
            at = line.find(field_, pos)
            if field_.startswith("--"):
                cut = at
                break
            pos = at + len(field_)
        if cut is not None:
            line = line[:cut]
        buf = ""
        for ch in line:
            if ch.isspace() or ch in RESERVED:
                if buf:
                    toks.append(Tok(buf, ln))
                    buf = ""
                if ch in RESERVED:
                    toks.append(Tok(ch, ln))
            else:
                buf += ch
        if buf:
            toks.append(Tok(buf, ln))
    return toks


def texts(toks):
    return [t.text for t in toks]


# ---------------------------------------------------------------------------
# operator name templates


def name_template(raw_tokens):
    """Expand declared operator name tokens into a template tuple where
    "_" marks an argument hole: ["_|_"] -> ("_", "|", "_")."""
    out = []
    for tok in raw_tokens:
        if "_" not in tok:
            out.append(tok)
            continue
        parts = tok.split("_")
        for i, p in enumerate(parts):
            if i:
                out.append("_")
            if p:
                out.append(p)
    return tuple(out)


def op_prec(op):
    if op.prec is not None:
        return op.prec
    if not op.is_mixfix or not op.arity:
        return 0
    first_hole = op.name[0] == "_"
    last_hole = op.name[-1] == "_"
    if not first_hole and not last_hole:
        return 0          # self delimiting, e.g. if_then_else_fi
    if not first_hole:
        return 15         # prefix style, e.g. s_
    return 41


def needs_parens(op):
    """Whether an application of op is wrapped when used as an argument
    or printed at top level."""
    if not op.is_mixfix or not op.arity:
        return False
    return op.name[0] == "_" or op.name[-1] == "_"


# ---------------------------------------------------------------------------
# term parsing scope


class Scope:
    """Everything a term parse needs: a signature, variables in scope and
    whether digit tokens denote Nat literals."""

    def __init__(self, sig, variables=None, nat_literals=False, nat_factory=None):
        self.sig = sig
        self.vars = dict(variables or {})
        self.nat_literals = nat_literals
        self.nat_factory = nat_factory   # digit string -> constant term

    def copy(self):
        return Scope(self.sig, self.vars, self.nat_literals, self.nat_factory)


def split_var_token(tok):
    """X:Sort on-line variable notation; None if tok has no colon."""
    if ":" not in tok or tok.startswith(":"):
        return None
    name, _, srt = tok.rpartition(":")
    if not name or not srt:
        return None
    return name, srt


# ---------------------------------------------------------------------------
# mixfix chart parser


class _TermParser:
    def __init__(self, toks, scope):
        self.toks = texts(toks)
        self.scope = scope
        self.memo = {}
        self.mixfix = [d for d in scope.sig.ops if d.is_mixfix and d.arity]
        self.prefix = {}
        for d in scope.sig.ops:
            if not d.is_mixfix and d.arity:
                self.prefix.setdefault(d.name[0] if len(d.name) == 1 else "".join(d.name), []).append(d)
        self.consts = {}
        for d in scope.sig.ops:
            if not d.arity and len(d.name) >= 1 and not d.is_mixfix:
                self.consts.setdefault("".join(d.name), []).append(d)

    def parse(self):
        n = len(self.toks)
        results = self.span(0, n)
        terms = {}
        for term, prec in results:
            terms.setdefault(term, prec)
        if not terms:
            raise NoParse("cannot parse: %s" % " ".join(self.toks))
        if len(terms) > 1:
            raise AmbiguousParse("ambiguous: %s  parses: %s"
                                 % (" ".join(self.toks),
                                    " | ".join(render(t) for t in terms)))
        return next(iter(terms))

    def span(self, i, j):
        key = (i, j)
        if key in self.memo:
            return self.memo[key]
        self.memo[key] = []   # cut recursion on cyclic spans
        out = []
        seen = set()

        def add(term, prec):
            k = (term, prec)
            if k not in seen:
                seen.add(k)
                out.append(k)

        toks = self.toks
        if j - i == 1:
            for t, p in self.atom(toks[i]):
                add(t, p)
        if j - i >= 2 and toks[i] == "(" and self.match_paren(i) == j - 1:
            for t, _ in self.span(i + 1, j - 1):
                add(t, 0)
        # prefix call  f(a1,...,ak)
        if j - i >= 3 and toks[i] in self.prefix and toks[i + 1] == "(" \
                and self.match_paren(i + 1) == j - 1:
            argspans = self.split_commas(i + 2, j - 1)
            for d in self.prefix[toks[i]]:
                if len(d.arity) != len(argspans):
                    continue
                for combo in self.arg_combos(argspans, d):
                    t = self.build(d, combo)
                    if t is not None:
                        add(t, 0)
        # mixfix templates
        if j - i >= 2:
            for d in self.mixfix:
                for combo in self.match_template(d, i, j):
                    t = self.build(d, combo, prec=op_prec(d))
                    if t is not None:
                        add(t, op_prec(d))
        self.memo[key] = out
        return out

    def atom(self, tok):
        out = []
        if tok in self.scope.vars:
            v = self.scope.vars[tok]
            out.append((v, 0))
        sv = split_var_token(tok)
        if sv and sv[1] in self.scope.sig.poset.sorts:
            name, srt = sv
            v = self.scope.vars.get(name)
            if v is not None and v.vsort != srt:
                raise ParseError("variable %s redeclared at sort %s" % (name, srt))
            if v is None:
                v = Var(name, srt)
                self.scope.vars[name] = v
            out.append((v, 0))
        for d in self.consts.get(tok, []):
            out.append((App(d, (), d.coarity), 0))
        if not out and tok.isdigit() and self.scope.nat_literals:
            out.append((self.scope.nat_factory(tok), 0))
        return out

    def match_paren(self, i):
        depth = 0
        pairs = {"(": ")", "[": "]", "{": "}"}
        close = {")", "]", "}"}
        opens = {"(", "[", "{"}
        stack = []
        for k in range(i, len(self.toks)):
            t = self.toks[k]
            if t in opens:
                stack.append(pairs[t])
            elif t in close:
                if not stack or stack[-1] != t:
                    return -1
                stack.pop()
                if not stack:
                    return k
        return -1

    def split_commas(self, i, j):
        spans, depth, start = [], 0, i
        for k in range(i, j):
            t = self.toks[k]
            if t in "([{":
                depth += 1
            elif t in ")]}":
                depth -= 1
            elif t == "," and depth == 0:
                spans.append((start, k))
                start = k + 1
        spans.append((start, j))
        return spans

    def arg_combos(self, argspans, d):
        """All tuples of argument parses for the given spans and rank."""
        lists = []
        for (a, b), want in zip(argspans, d.arity):
            cand = [t for t, p in self.span(a, b)
                    if want is None or self.scope.sig.poset.le(t.sort(), want)]
            if not cand:
                return
            lists.append(cand)
        combos = [()]
        for lst in lists:
            combos = [c + (x,) for c in combos for x in lst]
        yield from combos

    def match_template(self, d, i, j):
        """Yield argument tuples for matching d's template to span [i,j)."""
        tpl = d.name
        prec = op_prec(d)

        def walk(ti, pos, acc):
            if ti == len(tpl):
                if pos == j:
                    yield tuple(acc)
                return
            el = tpl[ti]
            if el != "_":
                if pos < j and self.toks[pos] == el:
                    yield from walk(ti + 1, pos + 1, acc)
                return
            want = d.arity[sum(1 for x in tpl[:ti] if x == "_")]
            # precedence only restricts open-ended holes (first or last slot)
            open_hole = ti == 0 or ti == len(tpl) - 1
            for end in range(pos + 1, j + 1):
                if ti == len(tpl) - 1 and end != j:
                    continue
                for t, p in self.span(pos, end):
                    if want is not None and not self.scope.sig.poset.le(t.sort(), want):
                        continue
                    if open_hole and prec > 0 and p > prec:
                        continue
                    yield from walk(ti + 1, end, acc + [t])

        yield from walk(0, i, [])

    def build(self, d, args, prec=0):
        try:
            return mk_app(self.scope.sig, d, args)
        except (NoParse, CafeError):
            return None


def parse_term(toks, scope):
    if not toks:
        raise ParseError("empty term")
    return _TermParser(toks, scope).parse()


# ---------------------------------------------------------------------------
# pretty printer


def render(t, top=True):
    if isinstance(t, Var):
        return t.name
    op = t.op
    if not t.args:
        return "".join(op.name)
    if not op.is_mixfix:
        return "%s(%s)" % ("".join(op.name), ",".join(render(a, top=False) for a in t.args))
    parts = []
    args = list(t.args)
    if op.assoc and (len(args) > len(op.arity) or op.comm):
        # flattened: a op b op c, or plain juxtaposition for __;
        # assoc+comm argument lists display right-to-left (internal lists
        # are built right-associated, so this matches the usual output)
        lits = [x for x in op.name if x != "_"]
        sep = (" " + " ".join(lits) + " ") if lits else " "
        shown = list(reversed(args)) if op.comm else args
        body = sep.join(_arg(a) for a in shown)
    else:
        ai = 0
        for el in op.name:
            if el == "_":
                parts.append(_arg(args[ai]))
                ai += 1
            else:
                parts.append(el)
        body = " ".join(parts)
        # prefix-style f_ juxtaposes a parenthesized argument: s(0 + 0);
        # chains of prefix applications stay bare: s s 0
        if len(op.name) == 2 and op.name[0] != "_" and parts[1].startswith("("):
            a0 = args[0]
            if (isinstance(a0, App) and a0.args and a0.op.is_mixfix
                    and a0.op.name[0] != "_"):
                body = parts[0] + " " + render(a0, top=True)
            else:
                body = parts[0] + parts[1]
    if not top and needs_parens(op):
        return "(" + body + ")"
    return body


def _arg(a):
    return render(a, top=False)


def render_result(t):
    """Reduction results: infix terms are wrapped even at top level,
    matching the usual display of equality and Boolean results; prefix
    style terms like s 0 stay bare."""
    if isinstance(t, App) and t.args and t.op.is_mixfix and t.op.name[0] == "_":
        return "(" + render(t, top=True) + ")"
    return render(t, top=True)


# ---------------------------------------------------------------------------
# source units


@dataclass
class RawEq:
    kind: str                   # eq | cq | tr | ctr
    labels: tuple
    nonexec: bool
    lhs: list                   # token lists
    rhs: list
    cond: list
    line: int = 0


@dataclass
class RawOp:
    names: list                 # list of raw name token lists
    arity: list
    coarity: str
    attrs: dict
    constr: bool
    line: int = 0


@dataclass
class RawSorts:
    groups: list                # [[sorts], [sorts], ...] linked by <
    line: int = 0


@dataclass
class RawVars:
    names: list
    sort: str
    line: int = 0


@dataclass
class RawImport:
    mode: str                   # pr | ex | inc | us
    expr: "ModExpr"
    line: int = 0


@dataclass
class ModuleUnit:
    kind: str                   # mod! | mod* | mod
    name: str
    params: list                # [(pname, ModExpr)]
    decls: list
    line: int = 0


@dataclass
class MakeUnit:
    name: str
    expr: "ModExpr"
    line: int = 0


@dataclass
class OpenUnit:
    expr: "ModExpr"
    line: int = 0


@dataclass
class CloseUnit:
    line: int = 0


@dataclass
class SelectUnit:
    expr: "ModExpr"
    line: int = 0


@dataclass
class RedUnit:
    expr: "ModExpr"             # None for current module
    term: list
    line: int = 0


@dataclass
class DeclUnit:
    """A declaration typed inside an open...close block."""
    decl: object
    line: int = 0


@dataclass
class GoalUnit:
    eqs: list                   # list of RawEq
    line: int = 0


@dataclass
class DefUnit:
    name: str
    tactic: object              # RawCsp | RawInit
    line: int = 0


@dataclass
class RawCsp:
    eqs: list
    ctf: bool = False


@dataclass
class RawInit:
    as_name: str
    eq: object                  # RawEq for inline, str for label reference
    bindings: list              # [(var_token, value_tokens)]


@dataclass
class ApplyUnit:
    names: list
    line: int = 0


@dataclass
class ShowUnit:
    what: str
    line: int = 0


@dataclass
class PRedUnit:
    term: list
    line: int = 0


@dataclass
class SelectGoalUnit:
    name: str
    line: int = 0


@dataclass
class SetUnit:
    args: list
    line: int = 0


# -- module expressions -----------------------------------------------------


@dataclass
class MName:
    name: str

    def key(self):
        return self.name


@dataclass
class MInst:
    base: "ModExpr"
    args: list                  # [(ModExpr, viewmap or None)]

    def key(self):
        return "%s(%s)" % (self.base.key(), ",".join(
            a.key() + (vkey(v) if v else "") for a, v in self.args))


@dataclass
class MRename:
    base: "ModExpr"
    view: dict

    def key(self):
        return "%s*%s" % (self.base.key(), vkey(self.view))


@dataclass
class MSum:
    parts: list

    def key(self):
        return "(" + " + ".join(p.key() for p in self.parts) + ")"


def vkey(view):
    s = ",".join("%s->%s" % kv for kv in sorted(view.get("sorts", {}).items()))
    o = ",".join(" ".join(a) + "->" + " ".join(b) for a, b in view.get("ops", []))
    return "{%s;%s}" % (s, o)


# ---------------------------------------------------------------------------
# unit parser


class UnitParser:
    def __init__(self, toks):
        self.toks = toks
        self.i = 0

    def eof(self):
        return self.i >= len(self.toks)

    def peek(self):
        return self.toks[self.i].text if not self.eof() else None

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text):
        t = self.next()
        if t.text != text:
            raise ParseError("line %d: expected %r, got %r" % (t.line, text, t.text))
        return t

    def until(self, stop, balanced=True):
        """Collect token texts until a top-level stop token (consumed)."""
        out, depth = [], 0
        while not self.eof():
            t = self.next()
            x = t.text
            if x in "([{":
                if depth == 0 and x in stop:
                    return out, x
                depth += 1
            elif x in ")]}":
                if depth == 0 and x in stop:
                    return out, x
                depth -= 1
            elif depth == 0 and x in stop:
                return out, x
            out.append(x)
        raise ParseError("unexpected end of input, wanted %s" % (stop,))

    # -- top level ---------------------------------------------------------

    def parse_units(self):
        units = []
        while not self.eof():
            units.append(self.parse_unit())
        return units

    def parse_unit(self):
        t = self.toks[self.i]
        w = t.text
        if w in ("mod!", "mod*", "mod"):
            return self.parse_module()
        if w == "make":
            self.next()
            name = self.next().text
            self.expect("(")
            expr = self.parse_modexpr(stop=(")",))
            self.expect(")")
            if self.peek() == ".":
                self.next()
            return MakeUnit(name, expr, t.line)
        if w == "open":
            self.next()
            expr = self.parse_modexpr(stop=(".",))
            self.expect(".")
            return OpenUnit(expr, t.line)
        if w == "close":
            self.next()
            return CloseUnit(t.line)
        if w == "select":
            self.next()
            expr = self.parse_modexpr(stop=(".",))
            self.expect(".")
            return SelectUnit(expr, t.line)
        if w in ("red", "reduce"):
            self.next()
            expr = None
            if self.peek() == "in":
                self.next()
                expr = self.parse_modexpr(stop=(":",))
                self.expect(":")
            term, _ = self.until((".",))
            return RedUnit(expr, term, t.line)
        if w == ":goal":
            self.next()
            self.expect("{")
            body, _ = self.until(("}",))
            return GoalUnit(split_eqs(body, t.line), t.line)
        if w == ":def":
            return self.parse_def()
        if w == ":apply":
            self.next()
            self.expect("(")
            names, _ = self.until((")",))
            return ApplyUnit(names, t.line)
        if w == ":show":
            self.next()
            what = self.next().text
            return ShowUnit(what, t.line)
        if w == ":describe":
            self.next()
            what = self.next().text
            return ShowUnit("describe-" + what, t.line)
        if w == ":red":
            self.next()
            term, _ = self.until((".",))
            return PRedUnit(term, t.line)
        if w == ":select":
            self.next()
            name = self.next().text
            if self.peek() == ".":
                self.next()
            return SelectGoalUnit(name, t.line)
        if w == ":set":
            self.next()
            args, _ = self.until((".",))
            return SetUnit(args, t.line)
        # inside open...close: plain declarations
        d = self.parse_decl()
        if d is None:
            raise ParseError("line %d: unknown command %r" % (t.line, w))
        return DeclUnit(d, t.line)

    # -- module declarations ----------------------------------------------

    def parse_module(self):
        t = self.next()
        kind = t.text
        name = self.next().text
        params = []
        if self.peek() == "(":
            self.next()
            while True:
                pname = self.next().text
                self.expect("::")
                expr = self.parse_modexpr(stop=(",", ")"), consume_stop=False)
                params.append((pname, expr))
                if self.peek() == ",":
                    self.next()
                    continue
                self.expect(")")
                break
        self.expect("{")
        decls = []
        while self.peek() != "}":
            d = self.parse_decl()
            if d is None:
                raise ParseError("line %d: bad declaration near %r"
                                 % (self.toks[self.i].line, self.peek()))
            decls.append(d)
        self.expect("}")
        return ModuleUnit(kind, name, params, decls, t.line)

    def parse_decl(self):
        t = self.toks[self.i]
        w = t.text
        if w == "[":
            self.next()
            body, _ = self.until(("]",), balanced=False)
            groups, cur = [], []
            for x in body:
                if x == "<":
                    groups.append(cur)
                    cur = []
                elif x == ",":
                    pass
                else:
                    cur.append(x)
            groups.append(cur)
            return RawSorts(groups, t.line)
        if w in ("op", "ops", "pred", "preds", "bop", "bpred"):
            return self.parse_op(w)
        if w in ("var", "vars"):
            self.next()
            names = []
            while self.peek() != ":":
                names.append(self.next().text)
            self.expect(":")
            srt = self.next().text
            if self.peek() == ".":
                self.next()
            return RawVars(names, srt, t.line)
        if w in ("eq", "cq", "ceq", "tr", "ctr", "trans", "rule") or (
            w.startswith(("eq", "cq", "ceq", "tr", "ctr"))
        ):
            return self.parse_eq()
        if w in ("pr", "ex", "inc", "us", "protecting", "extending", "including", "using"):
            self.next()
            self.expect("(")
            expr = self.parse_modexpr(stop=(")",))
            self.expect(")")
            if self.peek() == ".":
                self.next()
            mode = {"protecting": "pr", "extending": "ex", "including": "inc",
                    "using": "us"}.get(w, w)
            return RawImport(mode, expr, t.line)
        return None

    def parse_op(self, kw):
        t = self.next()
        is_pred = kw in ("pred", "preds", "bpred")
        multi = kw in ("ops", "preds")
        names = []
        if multi:
            # names are either bare tokens or parenthesized token groups
            while self.peek() != ":":
                if self.peek() == "(":
                    self.next()
                    grp, _ = self.until((")",))
                    names.append(grp)
                else:
                    names.append([self.next().text])
        else:
            grp = []
            while self.peek() != ":":
                tok = self.next()
                grp.append(tok.text)
            names.append(grp)
        self.expect(":")
        # the terminating period is optional, so a predicate arity runs
        # until something that cannot be a sort name
        enders = {".", "->", "{", "}", "[", "op", "ops", "pred", "preds",
                  "bop", "bpred", "var", "vars", "eq", "cq", "ceq", "tr",
                  "ctr", "trans", "pr", "ex", "inc", "us", None}
        arity = []
        while self.peek() not in enders:
            arity.append(self.next().text)
        coarity = "Bool"
        if self.peek() == "->":
            self.next()
            coarity = self.next().text
        attrs = {}
        constr = False
        if self.peek() == "{":
            self.next()
            body, _ = self.until(("}",))
            k = 0
            while k < len(body):
                a = body[k]
                if a == "constr":
                    constr = True
                elif a == "assoc":
                    attrs["assoc"] = True
                elif a == "comm":
                    attrs["comm"] = True
                elif a in ("id:", "id"):
                    if a == "id" and k + 1 < len(body) and body[k + 1] == ":":
                        k += 1
                    ident = []
                    k += 1
                    while k < len(body) and body[k] not in ("assoc", "comm", "constr", "prec:", "prec"):
                        ident.append(body[k])
                        k += 1
                    attrs["id"] = ident
                    continue
                elif a in ("prec:", "prec"):
                    if a == "prec" and k + 1 < len(body) and body[k + 1] == ":":
                        k += 1
                    k += 1
                    attrs["prec"] = int(body[k])
                k += 1
        if self.peek() == ".":
            self.next()
        return RawOp(names, arity, coarity, attrs, constr, t.line)

    def parse_eq(self):
        t = self.next()
        kind = t.text
        labels, nonexec = (), False
        base = kind
        for k in ("ceq", "eq", "ctr", "cq", "tr"):
            if kind.startswith(k):
                base = {"ceq": "cq", "trans": "tr"}.get(k, k)
                rest = kind[len(k):]
                break
        if self.peek() == "[":
            self.next()
            body, _ = self.until(("]",), balanced=False)
            labels = tuple(x for x in body if x != ":nonexec")
            nonexec = ":nonexec" in body
            if self.peek() == ":":
                self.next()
        elif kind.endswith(":"):
            base = base.rstrip(":")
        body, _ = self.until((".",))
        lhs, rhs, cond = split_rule(body, base in ("tr", "ctr"), base in ("cq", "ctr"))
        return RawEq(base, labels, nonexec, lhs, rhs, cond, t.line)

    # -- :def --------------------------------------------------------------

    def parse_def(self):
        t = self.next()
        name = self.next().text
        self.expect("=")
        w = self.peek()
        if w in (":csp", ":csp-", ":ctf", ":ctf-"):
            self.next()
            self.expect("{")
            body, _ = self.until(("}",))
            eqs = split_eqs(body, t.line)
            return DefUnit(name, RawCsp(eqs, ctf=w.startswith(":ctf")), t.line)
        if w == ":init":
            self.next()
            as_name = None
            if self.peek() == "as":
                self.next()
                as_name = self.next().text
            if self.peek() == "(":
                self.next()
                body, _ = self.until((")",))
                eqs = split_eqs(body, t.line)
                if len(eqs) != 1:
                    raise ParseError("line %d: :init takes one equation" % t.line)
                src = eqs[0]
            elif self.peek() == "[":
                self.next()
                body, _ = self.until(("]",), balanced=False)
                src = " ".join(body)
            else:
                raise ParseError("line %d: :init needs (eq ...) or [label]" % t.line)
            self.expect("by")
            self.expect("{")
            body, _ = self.until(("}",))
            bindings = []
            cur = []
            for x in body:
                if x == ";":
                    if cur:
                        bindings.append(cur)
                        cur = []
                else:
                    cur.append(x)
            if cur:
                bindings.append(cur)
            pairs = []
            for b in bindings:
                if "<-" not in b:
                    raise ParseError("line %d: bad substitution item %s" % (t.line, b))
                k = b.index("<-")
                pairs.append((b[:k], b[k + 1:]))
            return DefUnit(name, RawInit(as_name, src, pairs), t.line)
        raise ParseError("line %d: unknown tactic kind %r" % (t.line, w))

    # -- module expressions ------------------------------------------------

    def parse_modexpr(self, stop, consume_stop=False):
        parts = [self.parse_modterm(stop)]
        while self.peek() == "+":
            self.next()
            parts.append(self.parse_modterm(stop))
        expr = parts[0] if len(parts) == 1 else MSum(parts)
        return expr

    def parse_modterm(self, stop):
        if self.peek() == "(":
            self.next()
            inner = self.parse_modexpr(stop=(")",))
            self.expect(")")
            expr = inner
        else:
            expr = MName(self.next().text)
        if self.peek() == "(":
            self.next()
            args = []
            while True:
                a = self.parse_modterm((",", ")"))
                asum = [a]
                while self.peek() == "+":
                    self.next()
                    asum.append(self.parse_modterm((",", ")")))
                if len(asum) > 1:
                    a = MSum(asum)
                # ARG{sort A -> B, ...} as an argument is a view from the
                # parameter interface onto ARG, not a rename of ARG
                if isinstance(a, MRename):
                    args.append((a.base, a.view))
                else:
                    args.append((a, None))
                if self.peek() == ",":
                    self.next()
                    continue
                self.expect(")")
                break
            expr = MInst(expr, args)
        while self.peek() in ("*", "{"):
            if self.peek() == "*":
                self.next()
            self.expect("{")
            body, _ = self.until(("}",))
            expr = MRename(expr, parse_view(body))
        return expr

    def parse_modterm_postfix(self, expr):
        return expr


def parse_view(body):
    """sort A -> B, op lhs -> rhs items inside { }."""
    view = {"sorts": {}, "ops": []}
    items, cur, depth = [], [], 0
    for x in body:
        if x in "([{":
            depth += 1
        elif x in ")]}":
            depth -= 1
        if x == "," and depth == 0:
            items.append(cur)
            cur = []
        else:
            cur.append(x)
    if cur:
        items.append(cur)
    for it in items:
        if not it:
            continue
        if it[0] == "sort":
            k = it.index("->")
            view["sorts"][" ".join(it[1:k])] = " ".join(it[k + 1:])
        elif it[0] == "op":
            k = top_index(it, "->", 1)
            view["ops"].append((it[1:k], it[k + 1:]))
        else:
            raise ParseError("bad view item: %s" % " ".join(it))
    return view


def top_index(toks, want, start=0):
    depth = 0
    for k in range(start, len(toks)):
        x = toks[k]
        if x in "([{":
            depth += 1
        elif x in ")]}":
            depth -= 1
        elif x == want and depth == 0:
            return k
    raise ParseError("missing %r in %s" % (want, " ".join(toks)))


def split_eqs(body, line):
    """Split a { eq ... . eq ... . } block into RawEq items."""
    out, cur, depth = [], [], 0
    for x in body:
        if x in "([{":
            depth += 1
        elif x in ")]}":
            depth -= 1
        if x == "." and depth == 0:
            if cur:
                out.append(cur)
            cur = []
        else:
            cur.append(x)
    if cur:
        out.append(cur)
    eqs = []
    for toks in out:
        p = UnitParser([Tok(t, line) for t in toks] + [Tok(".", line)])
        eqs.append(p.parse_eq())
    return eqs


def split_rule(body, is_tr, conditional):
    """Split rule body tokens into lhs / rhs / cond at top level."""
    sep = "=>" if is_tr else "="
    k = top_index(body, sep)
    lhs = body[:k]
    rest = body[k + 1:]
    cond = []
    if conditional:
        # split at the last top-level `if`
        depth, at = 0, -1
        for idx, x in enumerate(rest):
            if x in "([{":
                depth += 1
            elif x in ")]}":
                depth -= 1
            elif x == "if" and depth == 0:
                at = idx
        if at < 0:
            raise ParseError("conditional rule without if: %s" % " ".join(body))
        cond = rest[at + 1:]
        rest = rest[:at]
    return lhs, rest, cond
