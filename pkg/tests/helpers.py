"""Shared test helpers: a unification-based simple-type inferencer used as
an independent oracle, and a corpus of closed terms with solved decorated
skeletons."""

from __future__ import annotations

import random

from fskel.syntax import (
    Abs, App, Arrow, FreshSupply, QAbs, QApp, QEVar, QForall, QSub, QVar,
    Skeleton, TVar, Term, Type, TypeEnv, Var, fresh_name, ftv,
)
from fskel.typecheck import check_skeleton


# ---------------------------------------------------------------------------
# Simple-type inference by first-order unification (independent of fskel's
# typing engine: no skeletons, no constraints, just plain unification).


class SimplyUntypable(Exception):
    pass


def _walk(t, sub):
    while isinstance(t, str) and t in sub:
        t = sub[t]
    return t


def _occurs(v, t, sub):
    t = _walk(t, sub)
    if isinstance(t, str):
        return t == v
    return _occurs(v, t[0], sub) or _occurs(v, t[1], sub)


def _unify(t1, t2, sub):
    t1, t2 = _walk(t1, sub), _walk(t2, sub)
    if isinstance(t1, str):
        if t1 == t2:
            return
        if _occurs(t1, t2, sub):
            raise SimplyUntypable
        sub[t1] = t2
        return
    if isinstance(t2, str):
        _unify(t2, t1, sub)
        return
    _unify(t1[0], t2[0], sub)
    _unify(t1[1], t2[1], sub)


def infer_simple(m: Term) -> dict:
    """Infer a simple type for every subterm of a closed term, or raise.

    Returns a map from subterm path (a tuple of child indices) to a resolved
    type tree (either a metavariable name or a (dom, cod) pair)."""
    sub: dict = {}
    counter = [0]
    types: dict[tuple, object] = {}

    def fresh():
        counter[0] += 1
        return f"m{counter[0]}"

    def go(m: Term, env: dict, path: tuple) -> object:
        match m:
            case Var(x):
                t = env[x]
            case Abs(x, body):
                v = fresh()
                t = (v, go(body, env | {x: v}, path + (0,)))
            case App(f, a):
                tf = go(f, env, path + (0,))
                ta = go(a, env, path + (1,))
                v = fresh()
                _unify(tf, (ta, v), sub)
                t = v
        types[path] = t
        return t

    go(m, {}, ())

    def resolve(t):
        t = _walk(t, sub)
        if isinstance(t, str):
            return t
        return (resolve(t[0]), resolve(t[1]))

    return {k: resolve(v) for k, v in types.items()}


def _to_type(t, names: dict) -> Type:
    if isinstance(t, str):
        if t not in names:
            names[t] = f"c{len(names)}"
        return TVar(names[t])
    return Arrow(_to_type(t[0], names), _to_type(t[1], names))


def skeleton_for(m: Term) -> Skeleton:
    """A solved decorated skeleton for a closed, simply-typable term.

    Every constraint produced is trivial: function positions carry literal
    arrow types, so no subtyping steps are needed."""
    types = infer_simple(m)
    names: dict = {}

    def go(m: Term, env: tuple, path: tuple) -> Skeleton:
        match m:
            case Var(x):
                return QVar(x, TypeEnv(env))
            case Abs(x, body):
                dom = _to_type(types[path][0], names)
                env2 = tuple(e for e in env if e[0] != x) + ((x, dom),)
                return QAbs(x, go(body, env2, path + (0,)))
            case App(f, a):
                return QApp(go(f, env, path + (0,)), go(a, env, path + (1,)))
        raise TypeError(m)

    return go(m, (), ())


def decorate(q: Skeleton, rng: random.Random, rounds: int = 2) -> Skeleton:
    """Wrap a skeleton in random decorations that keep its constraint
    solved under one-step instantiation."""
    for _ in range(rng.randrange(rounds + 1)):
        j = check_skeleton(q)
        match rng.randrange(4):
            case 0:
                a = fresh_name("g", ftv(q))
                q = QForall(a, q)
            case 1:
                q = QEVar(f"w{rng.randrange(2)}", ftv(j.env), q)
            case 2:
                q = QSub(q, j.rtype)  # reflexive subtyping step
            case 3:
                # introduce a dummy quantifier, then eliminate it
                a = fresh_name("g", ftv(q))
                q = QSub(QForall(a, q), j.rtype)
    return q


def closed_corpus() -> list[Term]:
    """At least 50 closed, simply-typable terms."""
    I = Abs("z", Var("z"))
    K = Abs("x", Abs("y", Var("x")))
    terms: list[Term] = [
        App(Abs("x", Var("y")), Abs("z", Var("z"))),  # discards its argument
        I,
        K,
        App(I, I),
        App(K, I),
        App(App(K, I), K),
        Abs("f", Abs("x", App(Var("f"), Var("x")))),
        App(Abs("f", Abs("x", App(Var("f"), Var("x")))), I),
        App(App(Abs("f", Abs("x", App(Var("f"), Var("x")))), I), K),
        Abs("x", App(I, Var("x"))),
        App(Abs("x", App(I, Var("x"))), K),
        App(Abs("x", App(Var("x"), I)), I),
    ]
    # the first entry has a free variable; close it under an outer binder
    terms[0] = Abs("y", terms[0])
    # generate the rest systematically: nested applications of closed combinators
    seeds = [I, K, Abs("f", Abs("x", App(Var("f"), Var("x"))))]
    for a in seeds:
        for b in seeds:
            terms.append(App(Abs("u", Var("u")), App(Abs("v", a), b)))
            terms.append(Abs("w", App(a, App(b, Var("w"))))
                         if a is not K else App(a, b))
            terms.append(App(App(K, a), b))
            terms.append(Abs("p", App(App(K, Var("p")), a)))
            terms.append(App(Abs("q", App(Var("q"), a)), I))
    out = []
    for t in terms:
        try:
            infer_simple(t)
        except SimplyUntypable:
            continue
        out.append(t)
    assert len(out) >= 50
    return out
