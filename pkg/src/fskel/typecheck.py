"""Skeleton validation: computes the unique judgement a skeleton encodes."""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import (
    Abs, And, App, Arrow, Atomic, Constraint, EGuard, EVarApp, Exists, Forall,
    Omega, QAbs, QApp, QEVar, QForall, QSub, QVar, QWeak, Skeleton, Term,
    TVar, Type, TypeEnv, Var, env_eq, ftv, fv, type_eq,
)


class SkeletonError(Exception):
    """A skeleton violates one of the typing rules."""


class UnboundVariable(SkeletonError):
    pass


class MalformedEnv(SkeletonError):
    pass


class NotAnArrow(SkeletonError):
    pass


class DomainMismatch(SkeletonError):
    pass


class EnvMismatch(SkeletonError):
    pass


class EscapingVariable(SkeletonError):
    pass


class ForbiddenSetTooSmall(SkeletonError):
    pass


class SupportOverlap(SkeletonError):
    pass


@dataclass(frozen=True)
class Judgement:
    """The term, environment, result type and constraint a skeleton encodes."""

    term: Term
    env: TypeEnv
    rtype: Type
    constraint: Constraint


def check_skeleton(q: Skeleton) -> Judgement:
    """Validate q against the typing rules and return its judgement."""
    match q:
        case QVar(x, env):
            if not env.well_formed():
                raise MalformedEnv(f"environment of {x} mentions a variable twice")
            t = env.lookup(x)
            if t is None:
                raise UnboundVariable(f"{x} not in its environment")
            return Judgement(Var(x), env, t, Omega())
        case QAbs(x, body):
            j = check_skeleton(body)
            t1 = j.env.lookup(x)
            if t1 is None:
                raise UnboundVariable(f"abstraction binder {x} not in the body environment")
            return Judgement(Abs(x, j.term), j.env.remove(x), Arrow(t1, j.rtype), j.constraint)
        case QApp(f, a):
            j1 = check_skeleton(f)
            j2 = check_skeleton(a)
            if not env_eq(j1.env, j2.env):
                raise EnvMismatch("application premises carry different environments")
            match j1.rtype:
                case Arrow(dom, cod):
                    if not type_eq(dom, j2.rtype):
                        raise DomainMismatch(
                            "argument type does not match the function domain")
                    return Judgement(App(j1.term, j2.term), j1.env, cod,
                                     And(j1.constraint, j2.constraint))
                case _:
                    raise NotAnArrow("function part does not have an arrow type")
        case QForall(a, body):
            j = check_skeleton(body)
            if a in ftv(j.env):
                raise EscapingVariable(f"{a} is free in the environment")
            return Judgement(j.term, j.env, Forall(a, j.rtype), Exists(a, j.constraint))
        case QEVar(s, forbidden, body):
            j = check_skeleton(body)
            if not ftv(j.env) <= forbidden:
                raise ForbiddenSetTooSmall(
                    f"{s}: environment variables {sorted(ftv(j.env) - forbidden)} "
                    "missing from the forbidden set")
            return Judgement(j.term, j.env, EVarApp(s, forbidden, j.rtype),
                             EGuard(s, forbidden, j.rtype, j.constraint))
        case QSub(body, target):
            j = check_skeleton(body)
            return Judgement(j.term, j.env, target,
                             And(j.constraint, Atomic(j.rtype, target)))
        case QWeak(body, extra):
            j = check_skeleton(body)
            if not extra.well_formed():
                raise MalformedEnv("weakening environment mentions a variable twice")
            if j.env.supp() & extra.supp():
                raise SupportOverlap(
                    f"weakening re-binds {sorted(j.env.supp() & extra.supp())}")
            return Judgement(j.term, j.env.concat(extra), j.rtype, j.constraint)
    raise TypeError(q)


def rtype(q: Skeleton) -> Type:
    """Result type of a valid skeleton."""
    return check_skeleton(q).rtype


def tenv(q: Skeleton) -> TypeEnv:
    """Type environment of a valid skeleton."""
    return check_skeleton(q).env


def relevant(q: Skeleton) -> bool:
    """True iff the free term variables equal the environment support."""
    j = check_skeleton(q)
    return fv(j.term) == j.env.supp()
