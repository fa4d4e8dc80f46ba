"""Solvedness of constraints against pluggable subtyping relations, the
one-step quantifier-elimination relation of System F, and the erased
System F checker."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .syntax import (
    And, Arrow, Atomic, Constraint, EGuard, EVarApp, Exists, Forall, Omega,
    QAbs, QApp, QEVar, QForall, QSub, QVar, QWeak, Skeleton, Subst, TVar,
    Type, TypeEnv, canonical_type, fresh_name, ftv, type_eq,
)
from .expansion import apply_subst


# ---------------------------------------------------------------------------
# One-step quantifier elimination: all a. t1  <=  t1[a := t2]


def _subterms(t: Type) -> list[Type]:
    out = [t]
    match t:
        case TVar(_):
            pass
        case Arrow(d, c):
            out += _subterms(d) + _subterms(c)
        case Forall(_, body):
            out += _subterms(body)
        case EVarApp(_, _, body):
            out += _subterms(body)
    return out


def _witness_candidates(t1: Type, t2: Type) -> list[Type]:
    cands = _subterms(canonical_type(t2)) + [t2]
    cands += [TVar(v) for v in sorted(ftv(t1) | ftv(t2))]
    cands.append(TVar(fresh_name("w", ftv(t1) | ftv(t2))))
    return cands


def leq_f_witness(t1: Type, t2: Type) -> tuple[str, Type, Type] | None:
    """A triple (a, body, X) with canonical t1 = all a. body and
    body[a := X] equal to t2, when one exists and t1 is not already equal
    to t2. Returns None when no single elimination step works."""
    c1 = canonical_type(t1)
    binders: list[str] = []
    cur = c1
    while isinstance(cur, Forall):
        binders.append(cur.binder)
        cur = cur.body
    if not binders:
        return None
    cands = _witness_candidates(t1, t2)
    for i, a in enumerate(binders):
        rest = binders[:i] + binders[i + 1:]
        body = cur
        for b in reversed(rest):
            body = Forall(b, body)
        for x in cands:
            if ftv(x) & set(rest):
                continue  # would be captured by the remaining binders
            if type_eq(apply_subst(Subst(((a, x),)), body), t2):
                return a, body, x
    return None


def leq_f(t1: Type, t2: Type) -> bool:
    """One-step quantifier-elimination subtyping (reflexive via a dummy
    quantifier)."""
    if type_eq(t1, t2):
        return True
    return leq_f_witness(t1, t2) is not None


def leq_eq(t1: Type, t2: Type) -> bool:
    """Equality subtyping: the two types are equal in the equational theory."""
    return type_eq(t1, t2)


# ---------------------------------------------------------------------------
# Solvedness


@dataclass(frozen=True)
class SubtypingRelation:
    """A named, pure decision procedure for atomic constraints."""

    name: str
    decide: Callable[[Type, Type], bool]


REL_F = SubtypingRelation("F", leq_f)
REL_EQ = SubtypingRelation("EQ", leq_eq)
RELATIONS = {"F": REL_F, "EQ": REL_EQ}


def solved(c: Constraint, rel: SubtypingRelation) -> bool:
    """True iff every atom of c holds in the relation."""
    match c:
        case Omega():
            return True
        case Atomic(lhs, rhs):
            return rel.decide(lhs, rhs)
        case And(c1, c2):
            return solved(c1, rel) and solved(c2, rel)
        case Exists(_, body):
            return solved(body, rel)
        case EGuard(_, _, _, body):
            return solved(body, rel)
    raise TypeError(c)


# ---------------------------------------------------------------------------
# Erasure to System F and an independent System F checker


def erase_type(t: Type) -> Type:
    match t:
        case TVar(_):
            return t
        case Arrow(d, c):
            return Arrow(erase_type(d), erase_type(c))
        case Forall(a, body):
            return Forall(a, erase_type(body))
        case EVarApp(_, _, body):
            return erase_type(body)
    raise TypeError(t)


def erase_env(env: TypeEnv) -> TypeEnv:
    return TypeEnv(tuple((x, erase_type(t)) for x, t in env.entries))


def erase_evars(q: Skeleton) -> Skeleton:
    """Remove every E-variable node and wrapper from a skeleton."""
    match q:
        case QVar(x, env):
            return QVar(x, erase_env(env))
        case QAbs(x, body):
            return QAbs(x, erase_evars(body))
        case QApp(f, a):
            return QApp(erase_evars(f), erase_evars(a))
        case QForall(a, body):
            return QForall(a, erase_evars(body))
        case QEVar(_, _, body):
            return erase_evars(body)
        case QSub(body, target):
            return QSub(erase_evars(body), erase_type(target))
        case QWeak(body, extra):
            return QWeak(erase_evars(body), erase_env(extra))
    raise TypeError(q)


def check_system_f(q: Skeleton) -> bool:
    """Independent System F derivation checker over E-variable-free skeletons
    (subtyping nodes admit one quantifier elimination)."""

    def go(q: Skeleton) -> tuple[TypeEnv, Type] | None:
        match q:
            case QVar(x, env):
                if not env.well_formed():
                    return None
                t = env.lookup(x)
                return None if t is None else (env, t)
            case QAbs(x, body):
                r = go(body)
                if r is None:
                    return None
                env, t = r
                dom = env.lookup(x)
                if dom is None:
                    return None
                return env.remove(x), Arrow(dom, t)
            case QApp(f, a):
                rf, ra = go(f), go(a)
                if rf is None or ra is None:
                    return None
                envf, tf = rf
                enva, ta = ra
                if envf.supp() != enva.supp():
                    return None
                if not all(type_eq(t, enva.lookup(x)) for x, t in envf.entries):
                    return None
                if not isinstance(tf, Arrow) or not type_eq(tf.dom, ta):
                    return None
                return envf, tf.cod
            case QForall(a, body):
                r = go(body)
                if r is None:
                    return None
                env, t = r
                if a in ftv(env):
                    return None
                return env, Forall(a, t)
            case QSub(body, target):
                r = go(body)
                if r is None:
                    return None
                env, t = r
                if not leq_f(t, target):
                    return None
                return env, target
            case QWeak(body, extra):
                r = go(body)
                if r is None:
                    return None
                env, t = r
                if not extra.well_formed() or env.supp() & extra.supp():
                    return None
                return env.concat(extra), t
        return None  # E-variable nodes are not System F

    return go(q) is not None
