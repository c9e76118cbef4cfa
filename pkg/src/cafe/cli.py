"""Batch runner and REPL.

Executes command streams: module declarations, open/close scratch
sessions, reductions, and proof-tree commands.  Batch files may carry
expected-output directives in comments:

    --> expect: s 0
    --> expect-block:
    --> root*
    --> [st]  1*
    --> end-expect

attached to the next command; with --check, mismatches fail the run.
"""

from __future__ import annotations

import argparse
import os
import sys

from .sig import CafeError
from .rewrite import Budget, Engine, render_trace
from .syntax import (ApplyUnit, CloseUnit, DeclUnit, DefUnit, GoalUnit,
                     MakeUnit, ModuleUnit, OpenUnit, ParseError, PRedUnit,
                     RawImport, RedUnit, SelectGoalUnit, SelectUnit, SetUnit,
                     ShowUnit, Tok, UnitParser, parse_term, render,
                     render_result, tokenize)
from .modules import Env, Overlay
from .proof import ProofError, make_tree


class Expect:
    def __init__(self, lines, line_no, block):
        self.lines = lines
        self.line_no = line_no
        self.block = block


def scan_expects(text):
    """Collect expect directives and the source line each attaches to."""
    out = []
    lines = text.split("\n")
    i = 0
    while i < len(lines):
        s = lines[i].strip()
        if s.startswith("--> expect:"):
            out.append(Expect([s[len("--> expect:"):].strip()], i + 1, False))
        elif s.startswith("--> expect-block:"):
            body = []
            i += 1
            while i < len(lines) and lines[i].strip() != "--> end-expect":
                t = lines[i].strip()
                if t.startswith("--> "):
                    t = t[4:]
                elif t == "-->":
                    t = ""
                body.append(t)
                i += 1
            out.append(Expect(body, i + 1, True))
        i += 1
    return out


class Session:
    def __init__(self, max_steps=1048576, max_nesting=512, max_states=1048576,
                 trace=False):
        self.env = Env()
        self.current = None
        self.overlay = None
        self.tree = None
        self.max_steps = max_steps
        self.max_nesting = max_nesting
        self.max_states = max_states
        self.trace = trace
        self.stats = {"reductions": 0, "discharged": 0,
                      "expect-pass": 0, "expect-fail": 0, "errors": 0}

    def eng_for(self, flat):
        eng = Engine(flat, Budget(self.max_steps, self.max_nesting))
        eng.max_states = self.max_states
        eng.printouts = []
        return eng

    # -- command dispatch --------------------------------------------------

    def run_unit(self, unit):
        """Execute one unit, returning its printed lines."""
        if isinstance(unit, ModuleUnit):
            self.env.declare(unit)
            return []
        if isinstance(unit, MakeUnit):
            self.env.declare(ModuleUnit("mod!", unit.name, [],
                                        [RawImport("pr", unit.expr, unit.line)],
                                        unit.line))
            return []
        if isinstance(unit, OpenUnit):
            flat = self.env.flatten(unit.expr)
            self.overlay = Overlay(self.env, flat)
            self.current = self.overlay.flat
            return []
        if isinstance(unit, CloseUnit):
            if self.overlay is not None:
                self.overlay.close()
            self.overlay = None
            self.current = None
            return []
        if isinstance(unit, DeclUnit):
            if self.overlay is None:
                raise CafeError("line %d: no open module to declare into"
                                % unit.line)
            self.overlay.add(unit.decl)
            self.current = self.overlay.flat
            return []
        if isinstance(unit, SelectUnit):
            self.current = self.env.flatten(unit.expr)
            self.overlay = None
            return []
        if isinstance(unit, RedUnit):
            flat = self.env.flatten(unit.expr) if unit.expr else self.current
            if flat is None:
                raise CafeError("line %d: no module selected" % unit.line)
            return self.reduce_in(flat, unit.term, unit.line)
        if isinstance(unit, GoalUnit):
            if self.current is None:
                raise CafeError("line %d: no module selected" % unit.line)
            self.tree = make_tree(self.current, unit.eqs, self.eng_for)
            return []
        if isinstance(unit, DefUnit):
            self.need_tree(unit.line).define(unit.name, unit.tactic)
            return []
        if isinstance(unit, ApplyUnit):
            tree = self.need_tree(unit.line)
            before = sum(1 for g in tree.goals() if g.dcd)
            tree.apply(unit.names)
            self.stats["discharged"] += sum(
                1 for g in tree.goals() if g.dcd) - before
            out = []
            if tree.root.done():
                out.append("** proof of %s completed" % tree.root.base.name)
                for m in self.assumed_lemmas(tree):
                    out.append("** assumed lemma module: %s" % m)
            return out
        if isinstance(unit, ShowUnit):
            return self.show(unit)
        if isinstance(unit, PRedUnit):
            tree = self.need_tree(unit.line)
            goal = tree.ntg()
            if goal is None:
                raise ProofError("no target goal")
            return self.reduce_in(goal.flat(), unit.term, unit.line)
        if isinstance(unit, SelectGoalUnit):
            tree = self.need_tree(unit.line)
            tree.selected = tree.find(unit.name)
            return []
        if isinstance(unit, SetUnit):
            return []
        raise CafeError("unsupported command %r" % (unit,))

    def need_tree(self, line):
        if self.tree is None:
            raise ProofError("line %d: no proof in progress" % line)
        return self.tree

    def reduce_in(self, flat, term_toks, line):
        scope = flat.scope(dict(flat.module_vars))
        t = parse_term([Tok(x, line) for x in term_toks], scope)
        eng = self.eng_for(flat)
        out = []
        if self.trace:
            tr = eng.reduce_traced(t)
            out.extend(eng.printouts)
            out.append(render_trace(tr, render))
            result = tr.result()
        else:
            result = eng.reduce(t)
            out.extend(eng.printouts)
        out.append(render_result(result))
        self.stats["reductions"] += 1
        if hasattr(eng, "visited_count"):
            self.stats["visited-states"] = eng.visited_count
        return out

    def show(self, unit):
        if unit.what == "proof":
            return self.need_tree(unit.line).show()
        if unit.what == "describe-proof":
            return self.need_tree(unit.line).describe()
        if unit.what == "goal":
            tree = self.need_tree(unit.line)
            goal = tree.ntg()
            if goal is None:
                return ["(all goals discharged)"]
            from .syntax import render
            lines = ["goal %s" % goal.name]
            for r in goal.ina:
                s = "%s = %s" % (render(r.lhs), render(r.rhs))
                if r.cond is not None:
                    s += " if %s" % render(r.cond)
                lines.append("  assume %s" % s)
            for lhs, rhs in goal.stp:
                lines.append("  prove  %s = %s" % (render(lhs), render(rhs)))
            return lines
        raise CafeError("unknown :show target %r" % unit.what)

    def assumed_lemmas(self, tree):
        """Source modules that contribute equations but no operators: their
        equations function as assumed lemmas about imported operators."""
        flat = tree.root.base
        rule_srcs = {r.source for r in flat.rules}
        op_srcs = {d.source for d in flat.ops}
        skip = {"BOOL", "RWL", "NAT", "TRIV", flat.name, ""}
        return sorted(s for s in rule_srcs - op_srcs - skip)


# ---------------------------------------------------------------------------
# batch driving


def run_text(session, text, check=False, path="<input>", echo=None):
    """Run a command stream; returns (ok, outputs) where outputs is a list
    of (unit, lines)."""
    expects = scan_expects(text)
    units = UnitParser(tokenize(text)).parse_units()
    outputs = []
    ok = True
    for unit in units:
        attached = [e for e in expects if e.line_no <= unit.line]
        expects = [e for e in expects if e.line_no > unit.line]
        try:
            lines = session.run_unit(unit)
        except CafeError as e:
            session.stats["errors"] += 1
            msg = "%s:%d: error: %s" % (path, unit.line, e)
            if echo:
                echo(msg)
            outputs.append((unit, [msg]))
            return False, outputs
        outputs.append((unit, lines))
        if echo:
            for ln in lines:
                echo(ln)
        if check:
            for e in attached:
                want = [w.rstrip() for w in e.lines]
                got = [g.rstrip() for g in lines]
                if want != got:
                    ok = False
                    session.stats["expect-fail"] += 1
                    if echo:
                        echo("%s:%d: expectation failed" % (path, e.line_no))
                        echo("  expected: %s" % (want,))
                        echo("  actual:   %s" % (got,))
                else:
                    session.stats["expect-pass"] += 1
    return ok, outputs


def run_batch(paths, session, check=False, fail_fast=False, echo=print):
    all_ok = True
    for path in paths:
        with open(path) as fh:
            text = fh.read()
        ok, _ = run_text(session, text, check=check, path=path, echo=echo)
        if not ok:
            all_ok = False
            if fail_fast or session.stats["errors"]:
                if fail_fast:
                    break
    return all_ok


def repl(session):
    print("cafe interpreter; end commands with . or balanced braces")
    buf = ""
    while True:
        try:
            line = input("cafe> " if not buf else "    > ")
        except EOFError:
            break
        if not buf and not line.strip():
            continue
        buf += line + "\n"
        try:
            units = UnitParser(tokenize(buf)).parse_units()
        except ParseError as e:
            if "unexpected end of input" in str(e):
                continue
            print("error: %s" % e)
            buf = ""
            continue
        if units and _complete(buf, units):
            buf = ""
            for unit in units:
                try:
                    for ln in session.run_unit(unit):
                        print(ln)
                except CafeError as e:
                    print("error: %s" % e)
                    break


def _complete(buf, units):
    # a trailing bare word may be an unfinished command; require the
    # stream to end with a clear terminator
    s = buf.strip()
    return s.endswith((".", "}", ")", "close")) or s == "close"


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="cafe",
        description="algebraic specification interpreter and proof engine")
    ap.add_argument("--batch", nargs="+", metavar="FILE",
                    help="run files in order and exit")
    ap.add_argument("--max-steps", type=int,
                    default=int(os.environ.get("CAFE_MAX_STEPS", 1048576)))
    ap.add_argument("--max-nesting", type=int,
                    default=int(os.environ.get("CAFE_MAX_NESTING", 512)))
    ap.add_argument("--max-states", type=int,
                    default=int(os.environ.get("CAFE_MAX_STATES", 1048576)))
    ap.add_argument("--trace", action="store_true",
                    help="print one-step reduction traces")
    ap.add_argument("--fail-fast", action="store_true")
    ap.add_argument("--check", action="store_true",
                    help="enforce --> expect directives")
    args = ap.parse_args(argv)

    session = Session(max_steps=args.max_steps, max_nesting=args.max_nesting,
                      max_states=args.max_states, trace=args.trace)
    if args.batch:
        ok = run_batch(args.batch, session, check=args.check,
                       fail_fast=args.fail_fast)
        st = session.stats
        print("== %d reductions, %d goals discharged, "
              "%d expectations passed, %d failed, %d errors"
              % (st["reductions"], st["discharged"], st["expect-pass"],
                 st["expect-fail"], st["errors"]))
        if st["errors"]:
            return 2
        return 0 if ok else 1
    repl(session)
    return 0


if __name__ == "__main__":
    sys.exit(main())
