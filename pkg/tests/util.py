"""Shared test helpers: corpus locations, session drivers, and the
brute-force oracles the engine is cross-checked against."""

import itertools
import pathlib

from cafe.cli import Session, run_text
from cafe.rewrite import match
from cafe.sig import OpDecl, Signature, SortPoset, Var, const, mk_app, term_key

ROOT = pathlib.Path(__file__).resolve().parents[1]
CORPUS = ROOT / "corpus"
CORPUS_FILES = ["pnat.cafe", "list-append.cafe", "qlock-ots.cafe",
                "qlock-tsp.cafe", "qlock-wc.cafe"]


def corpus_text(name):
    return (CORPUS / name).read_text()


def run_corpus(name, **kw):
    session = Session(**kw)
    ok, outputs = run_text(session, corpus_text(name), check=True, path=name)
    return session, ok, outputs


def run_source(text, check=True, **kw):
    session = Session(**kw)
    ok, outputs = run_text(session, text, check=check)
    return session, ok, outputs


def flatten_output(outputs):
    lines = []
    for _unit, ls in outputs:
        lines.extend(ls)
    return lines


# ---------------------------------------------------------------------------
# sort poset oracles: independent reimplementations of the subsort closure,
# connected components, sensibility and regularity, used to cross-check the
# signature analyses on random inputs.


def oracle_closure(sorts, edges):
    """s -> set of sorts >= s, reflexive-transitive closure of the edges."""
    ups = {s: {s} for s in sorts}
    changed = True
    while changed:
        changed = False
        for a, b in edges:
            grown = ups[a] | ups[b]
            if grown != ups[a]:
                ups[a] = grown
                changed = True
    return ups


def oracle_components(sorts, edges):
    """s -> component id under the symmetric closure of the edges."""
    comp = {s: s for s in sorts}

    def find(x):
        while comp[x] != x:
            comp[x] = comp[comp[x]]
            x = comp[x]
        return x

    for a, b in edges:
        comp[find(a)] = find(b)
    return {s: find(s) for s in sorts}


def oracle_sensible(sorts, edges, ranks):
    """ranks: list of (name, arity tuple, coarity).  True when every pair
    of same-name, same-length, componentwise-equivalent arities also has
    component-equivalent coarities."""
    comp = oracle_components(sorts, edges)
    for (n1, w1, s1), (n2, w2, s2) in itertools.combinations(ranks, 2):
        if n1 != n2 or len(w1) != len(w2):
            continue
        if all(comp[x] == comp[y] for x, y in zip(w1, w2)) and comp[s1] != comp[s2]:
            return False
    return True


def oracle_regular(sorts, edges, ranks):
    """True when for every rank (w1,s1) of f and every arity w0 <= w1 the
    ranks of f applicable above w0 have a least element."""
    ups = oracle_closure(sorts, edges)
    le = lambda a, b: b in ups[a]
    le_w = lambda w, v: all(le(x, y) for x, y in zip(w, v))
    for name, w1, _s1 in ranks:
        lowers = [()]
        for s in w1:
            downs = [x for x in sorts if le(x, s)]
            lowers = [pre + (x,) for pre in lowers for x in downs]
        for w0 in lowers:
            cands = [(w, s) for n, w, s in ranks
                     if n == name and len(w) == len(w0) and le_w(w0, w)]
            if not any(all(le_w(c[0], o[0]) and le(c[1], o[1]) for o in cands)
                       for c in cands):
                return False
    return True


def oracle_least_parse(sorts, edges, coarities):
    """Least result sort of an overloaded constant, or None if there is no
    least one among the declared coarities."""
    ups = oracle_closure(sorts, edges)
    for c in coarities:
        if all(o in ups[c] for o in coarities):
            return c
    return None


# ---------------------------------------------------------------------------
# AC matching oracle: enumerate every way of assigning the subject's
# flattened arguments to the pattern's flattened arguments.


def ac_sig():
    """One sort, one assoc+comm binary op, four atomic constants."""
    poset = SortPoset(["S"], [])
    plus = OpDecl(("_", "+", "_"), ("S", "S"), "S", assoc=True, comm=True)
    consts = [OpDecl((c,), (), "S") for c in "abcd"]
    sig = Signature(poset, [plus] + consts)
    return sig, plus, [const(d) for d in consts]


def ac_oracle(sig, op, pat_elems, subj_elems):
    """All substitutions matching the AC term over pat_elems against the
    one over subj_elems, as frozensets of (var key, bound term key)."""
    sols = set()
    m = len(subj_elems)
    for assign in itertools.product(range(len(pat_elems)), repeat=m):
        groups = [[] for _ in pat_elems]
        for si, pi in enumerate(assign):
            groups[pi].append(subj_elems[si])
        binding = {}
        ok = True
        for pe, grp in zip(pat_elems, groups):
            if isinstance(pe, Var):
                if not grp:
                    ok = False
                    break
                val = grp[0] if len(grp) == 1 else mk_app(sig, op, grp)
                k = (pe.name, pe.vsort)
                key = term_key(val)
                if binding.get(k, key) != key:
                    ok = False
                    break
                binding[k] = key
            elif len(grp) != 1 or term_key(grp[0]) != term_key(pe):
                ok = False
                break
        if ok:
            sols.add(frozenset(binding.items()))
    return sols


def ac_engine(sig, op, pat_elems, subj_elems):
    pattern = mk_app(sig, op, pat_elems)
    subject = mk_app(sig, op, subj_elems)
    return {frozenset(((k, term_key(v)) for k, v in th.items()))
            for th in match(pattern, subject, sig)}


def ac_compare(n_pairs, seed):
    """Run n_pairs random pattern/subject comparisons; return mismatches."""
    import random
    rng = random.Random(seed)
    sig, plus, atoms = ac_sig()
    variables = [Var(v, "S") for v in ("X", "Y", "Z")]
    pool = atoms + variables
    bad = []
    for i in range(n_pairs):
        pat = [rng.choice(pool) for _ in range(rng.randint(2, 5))]
        subj = [rng.choice(atoms) for _ in range(rng.randint(2, 5))]
        want = ac_oracle(sig, plus, pat, subj)
        got = ac_engine(sig, plus, pat, subj)
        if want != got:
            bad.append((i, pat, subj, want, got))
    return bad
