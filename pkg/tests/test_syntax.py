"""Core syntax: canonical forms, equalities, environments, free variables."""

import random

from fskel.syntax import (
    And, Arrow, Atomic, EGuard, EVarApp, Exists, Forall, FreshSupply, Omega,
    Subst, TVar, TypeEnv, canonical_constraint, canonical_type, constraint_eq,
    evars_of, fresh_name, ftv, type_eq,
)
from fskel.surface import parse_constraint, parse_type
from fskel.generators import random_type


def T(s):
    return parse_type(s)


def test_type_eq_alpha():
    assert type_eq(T("all a. a -> b"), T("all c. c -> b"))
    assert not type_eq(T("all a. a -> b"), T("all c. b -> c"))


def test_type_eq_quantifier_permutation():
    assert type_eq(T("all a. all b. a -> b"), T("all b. all a. a -> b"))
    assert type_eq(T("all a. all b. all c. a -> b -> c"),
                   T("all c. all a. all b. a -> b -> c"))


def test_type_eq_dummy_quantifiers():
    assert type_eq(T("all a. b -> b"), T("b -> b"))
    assert type_eq(T("all a. all c. a -> a"), T("all a. a -> a"))
    assert not type_eq(T("all a. a -> a"), T("b -> b"))


def test_quantifier_blocks_do_not_cross_arrows():
    assert not type_eq(T("all a. a -> all b. b"), T("all b. all a. a -> b"))


def test_shadowed_binder_is_dummy():
    assert type_eq(T("all a. all a. a -> a"), T("all a. a -> a"))


def test_forbidden_sets_in_equality():
    assert type_eq(T("s^{a,b} c"), T("s^{b,a} c"))
    assert not type_eq(T("s^{a} c"), T("s^{b} c"))
    assert not type_eq(T("s^{a} c"), T("t^{a} c"))


def test_canonical_type_idempotent_random():
    rng = random.Random(3)
    for _ in range(500):
        t = random_type(rng, ["a", "b"], 4)
        c = canonical_type(t)
        assert c == canonical_type(c)
        assert type_eq(t, c)


def test_ftv():
    assert ftv(T("all a. a -> b")) == {"b"}
    assert ftv(T("s^{a,b} c")) == {"a", "b", "c"}
    assert evars_of(T("s^{a} t^{} b")) == {"s", "t"}


def test_constraint_eq_reordering_and_omega():
    c1 = parse_constraint("a <= b & omega & b <= a")
    c2 = parse_constraint("b <= a & a <= b")
    assert constraint_eq(c1, c2)
    assert constraint_eq(parse_constraint("omega"), canonical_constraint(Omega()))


def test_constraint_eq_existential_alpha():
    c1 = parse_constraint("ex a. a <= b")
    c2 = parse_constraint("ex c. c <= b")
    assert constraint_eq(c1, c2)
    assert not constraint_eq(c1, parse_constraint("ex c. b <= c"))


def test_constraint_dummy_existential_dropped():
    assert constraint_eq(parse_constraint("ex a. b <= b"),
                         parse_constraint("b <= b"))


def test_guard_constraints():
    c1 = parse_constraint("s^{a; b} (b <= a)")
    c2 = parse_constraint("s^{a; b} (b <= a)")
    assert constraint_eq(c1, c2)
    assert not constraint_eq(c1, parse_constraint("s^{; b} (b <= a)"))


def test_type_env_first_binding_wins():
    env = TypeEnv((("x", TVar("a")), ("x", TVar("b"))))
    assert env.lookup("x") == TVar("a")
    assert not env.well_formed()
    assert TypeEnv((("x", TVar("a")), ("y", TVar("b")))).well_formed()


def test_subst_lookup_defaults():
    phi = Subst((("a", TVar("b")),))
    assert phi.lookup_tvar("a") == TVar("b")
    assert phi.lookup_tvar("c") == TVar("c")
    from fskel.syntax import EVarIntro, Id
    assert phi.lookup_evar("s") == EVarIntro("s", frozenset(), Id())


def test_fresh_supply_avoids():
    sup = FreshSupply(avoid=frozenset({"a0", "a1"}))
    name, sup = sup.fresh_tvar()
    assert name == "a2"
    assert fresh_name("x", {"x", "x_0"}) == "x_1"
    assert fresh_name("x", set()) == "x"
