"""Seeded random generators for property tests.

Every generator takes an explicit random.Random so test runs are
reproducible.
"""

from __future__ import annotations

import random

from .initial import initial_skeleton
from .reduction import (
    DummyElim, DummyIn, EVarCong, FunCong, Inst, NEVar, NEnvSub, NForall,
    NSub, NeqSkeleton, QuantComm, QuantCong, check_neq,
)
from .syntax import (
    Abs, App, Arrow, EVarApp, EVarIntro, Expansion, Forall, ForallIntro,
    FreshSupply, Id, QEVar, QForall, QSub, Skeleton, SubStep, Subst, TVar,
    Term, Type, Var, evars_of, fresh_name, ftv,
)
from .typecheck import check_skeleton


def random_term(rng: random.Random, size: int, free: list[str]) -> Term:
    """Random lambda term with at most `size` internal nodes."""
    if size <= 1 or (not free and size <= 2):
        if free and rng.random() < 0.7:
            return Var(rng.choice(free))
        x = f"x{rng.randrange(4)}"
        return Abs(x, Var(x) if rng.random() < 0.6 or not free
                   else Var(rng.choice(free)))
    match rng.randrange(3):
        case 0 if free:
            return Var(rng.choice(free))
        case 1:
            x = f"x{rng.randrange(4)}"
            return Abs(x, random_term(rng, size - 1, free + [x]))
        case _:
            left = rng.randrange(1, size)
            return App(random_term(rng, left, free),
                       random_term(rng, size - left, free))


def random_type(rng: random.Random, tvars: list[str], depth: int) -> Type:
    if depth <= 0 or rng.random() < 0.35:
        return TVar(rng.choice(tvars) if tvars else "t0")
    match rng.randrange(4):
        case 0 | 1:
            return Arrow(random_type(rng, tvars, depth - 1),
                         random_type(rng, tvars, depth - 1))
        case 2:
            a = f"t{rng.randrange(3)}"
            return Forall(a, random_type(rng, tvars + [a], depth - 1))
        case _:
            forbidden = frozenset(rng.sample(tvars, min(len(tvars), rng.randrange(3))))
            return EVarApp(f"u{rng.randrange(3)}", forbidden,
                           random_type(rng, tvars, depth - 1))


def random_expansion(rng: random.Random, tvars: list[str], depth: int) -> Expansion:
    if depth <= 0 or rng.random() < 0.3:
        return Id()
    match rng.randrange(4):
        case 0:
            a = f"t{rng.randrange(3)}"
            return ForallIntro(a, random_expansion(rng, tvars + [a], depth - 1))
        case 1:
            forbidden = frozenset(rng.sample(tvars, min(len(tvars), rng.randrange(3))))
            return EVarIntro(f"u{rng.randrange(3)}", forbidden,
                             random_expansion(rng, tvars, depth - 1))
        case _:
            return SubStep(random_expansion(rng, tvars, depth - 1),
                           random_type(rng, tvars, depth - 1))


def random_subst_for(rng: random.Random, q: Skeleton) -> Subst:
    """Random substitution over (a subset of) the variables of q."""
    tvars = sorted(ftv(q))
    evars = sorted(evars_of(q))
    bindings: list[tuple[str, Type | Expansion]] = []
    for a in tvars:
        if rng.random() < 0.6:
            bindings.append((a, random_type(rng, tvars, rng.randrange(3))))
    for s in evars:
        if rng.random() < 0.6:
            bindings.append((s, random_expansion(rng, tvars, rng.randrange(3))))
    rng.shuffle(bindings)
    return Subst(tuple(bindings))


def random_valid_skeleton(rng: random.Random, size: int = 4) -> Skeleton:
    """Random valid skeleton: the initial skeleton of a random term,
    optionally decorated at the root."""
    m = random_term(rng, rng.randrange(1, size + 1), [])
    if rng.random() < 0.4:
        m = random_term(rng, rng.randrange(1, size + 1),
                        [f"y{i}" for i in range(rng.randrange(1, 3))])
    q, _, _ = initial_skeleton(m, FreshSupply())
    for _ in range(rng.randrange(3)):
        j = check_skeleton(q)
        match rng.randrange(3):
            case 0:
                a = fresh_name("g", ftv(q))
                q = QForall(a, q)
            case 1:
                q = QEVar(f"u{rng.randrange(3)}",
                          ftv(j.env) | frozenset(rng.sample(sorted(ftv(q)) or ["t0"], 1)),
                          q)
            case _:
                q = QSub(q, random_type(rng, sorted(ftv(q)), 2))
    return q


def random_neq_decoration(rng: random.Random, n: NeqSkeleton) -> NeqSkeleton:
    """Wrap a valid proof-carrying skeleton in one random valid decoration."""
    _, env, t = check_neq(n)
    choices = ["dummy_in", "forall", "evar"]
    if isinstance(t, Forall) and t.binder not in ftv(t.body):
        choices.append("dummy_elim")
    if isinstance(t, Forall):
        choices += ["inst", "quant_cong"]
    if isinstance(t, Forall) and isinstance(t.body, Forall):
        choices.append("quant_comm")
    if isinstance(t, Arrow):
        choices.append("fun_cong")
    if isinstance(t, EVarApp):
        choices.append("evar_cong")
    if env.entries:
        choices.append("env_sub")
    avoid = _all_type_names(env, t)
    b = fresh_name("d", avoid)
    match rng.choice(choices):
        case "dummy_in":
            return NSub(n, DummyIn(b, t))
        case "dummy_elim":
            return NSub(n, DummyElim(t.binder, t.body))
        case "forall":
            return NForall(fresh_name("g", avoid | ftv(env)), n)
        case "evar":
            return NEVar(f"u{rng.randrange(3)}", ftv(env) | ftv(t), n)
        case "inst":
            x = random_type(rng, sorted(ftv(t)), rng.randrange(2))
            return NSub(n, Inst(t, x))
        case "quant_cong":
            return NSub(n, QuantCong(t.binder, DummyIn(b, t.body)))
        case "quant_comm":
            return NSub(n, QuantComm(t))
        case "fun_cong":
            return NSub(n, FunCong(DummyElim(b, t.dom), DummyIn(b, t.cod)))
        case "evar_cong":
            return NSub(n, EVarCong(t.evar, t.forbidden, DummyIn(b, t.body)))
        case "env_sub":
            y, ty = rng.choice(env.entries)
            return NEnvSub(n, y, DummyElim(b, ty))
    raise AssertionError


def _all_type_names(env, t) -> frozenset[str]:
    out = ftv(env) | ftv(t)
    # binder names inside t matter for freshness of dummy quantifiers
    def walk(t):
        match t:
            case Forall(a, body):
                return {a} | walk(body)
            case Arrow(d, c):
                return walk(d) | walk(c)
            case EVarApp(_, _, body):
                return walk(body)
            case _:
                return set()
    return out | frozenset(walk(t))
