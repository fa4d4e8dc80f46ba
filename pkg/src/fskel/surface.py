"""Surface syntax: tokenizer, parsers and printers for every category.

Grammar (ASCII):
    Term:       x | \\x. M | M @ N                      (@ left-assoc)
    Type:       a | T -> T | all a. T | s^{a,b} T       (-> right-assoc,
                `all` extends maximally right, s^{A} binds tightest)
    Expansion:  id | all a. I | s^{A} I | I |> T
    Subst:      [a := T, s := I]
    Constraint: omega | T <= T | C & C | ex a. C | s^{A; T} C
    TypeEnv:    {x: T, y: T}
    Skeleton:   x<x: T> | \\x. Q | Q @ Q | all a. Q | s^{A} Q
                | Q |> T | Q + {x: T}                   (+ = weakening)
"""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import (
    Abs, And, App, Arrow, Atomic, Constraint, EGuard, EVarApp, EVarIntro,
    Exists, Expansion, Forall, ForallIntro, Id, Omega, QAbs, QApp, QEVar,
    QForall, QSub, QVar, QWeak, Skeleton, SubStep, Subst, TVar, Term, Type,
    TypeEnv, Var,
)


class ParseError(Exception):
    """Syntax error with position information."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "keyword", or the symbol itself
    value: str
    line: int
    col: int


KEYWORDS = {"all", "ex", "id", "omega"}
SYMBOLS2 = {"->", "|>", ":=", "<="}
SYMBOLS1 = set("\\.@()^{},<>&[];:+")


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        two = text[i:i + 2]
        if two in SYMBOLS2:
            toks.append(Token(two, two, line, col))
            i += 2
            col += 2
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_'"):
                j += 1
            word = text[i:j]
            kind = "keyword" if word in KEYWORDS else "ident"
            toks.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        if ch in SYMBOLS1:
            toks.append(Token(ch, ch, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.pos = 0

    # -- token plumbing ----------------------------------------------------

    def peek(self) -> Token:
        return self.toks[self.pos]

    def next(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def at(self, kind: str, value: str | None = None) -> bool:
        t = self.peek()
        return t.kind == kind and (value is None or t.value == value)

    def expect(self, kind: str, value: str | None = None) -> Token:
        t = self.peek()
        if not self.at(kind, value):
            want = value or kind
            raise ParseError(f"expected {want!r}, found {t.value or 'end of input'!r}", t.line, t.col)
        return self.next()

    def fail(self, message: str):
        t = self.peek()
        raise ParseError(message, t.line, t.col)

    def done(self):
        if not self.at("eof"):
            self.fail(f"trailing input starting at {self.peek().value!r}")

    # -- shared pieces -----------------------------------------------------

    def ident(self) -> str:
        return self.expect("ident").value

    def var_set(self) -> frozenset[str]:
        """Comma-separated identifiers (possibly empty) after '{'."""
        names: list[str] = []
        if self.at("ident"):
            names.append(self.ident())
            while self.at(","):
                self.next()
                names.append(self.ident())
        return frozenset(names)

    def env_entries(self, close: str) -> TypeEnv:
        entries: list[tuple[str, Type]] = []
        if not self.at(close):
            while True:
                x = self.ident()
                self.expect(":")
                entries.append((x, self.type_()))
                if self.at(","):
                    self.next()
                    continue
                break
        self.expect(close)
        return TypeEnv(tuple(entries))

    # -- terms -------------------------------------------------------------

    def term(self) -> Term:
        if self.at("\\"):
            self.next()
            x = self.ident()
            self.expect(".")
            return Abs(x, self.term())
        m = self.term_atom()
        while self.at("@"):
            self.next()
            m = App(m, self.term_atom())
        return m

    def term_atom(self) -> Term:
        if self.at("("):
            self.next()
            m = self.term()
            self.expect(")")
            return m
        if self.at("\\"):
            return self.term()
        return Var(self.ident())

    # -- types -------------------------------------------------------------

    def type_(self) -> Type:
        if self.at("keyword", "all"):
            self.next()
            a = self.ident()
            self.expect(".")
            return Forall(a, self.type_())
        left = self.type_atom()
        if self.at("->"):
            self.next()
            return Arrow(left, self.type_())
        return left

    def type_atom(self) -> Type:
        if self.at("("):
            self.next()
            t = self.type_()
            self.expect(")")
            return t
        name = self.ident()
        if self.at("^"):
            self.next()
            self.expect("{")
            forbidden = self.var_set()
            self.expect("}")
            return EVarApp(name, forbidden, self.type_atom())
        return TVar(name)

    # -- expansions ----------------------------------------------------------

    def expansion(self) -> Expansion:
        if self.at("keyword", "all"):
            self.next()
            a = self.ident()
            self.expect(".")
            return ForallIntro(a, self.expansion())
        i = self.expansion_atom()
        while self.at("|>"):
            self.next()
            i = SubStep(i, self.type_())
        return i

    def expansion_atom(self) -> Expansion:
        if self.at("keyword", "id"):
            self.next()
            return Id()
        if self.at("("):
            self.next()
            i = self.expansion()
            self.expect(")")
            return i
        if self.at("keyword", "all"):
            return self.expansion()
        name = self.ident()
        self.expect("^")
        self.expect("{")
        forbidden = self.var_set()
        self.expect("}")
        return EVarIntro(name, forbidden, self.expansion_atom())

    # -- substitutions -------------------------------------------------------

    def subst(self) -> Subst:
        self.expect("[")
        bindings: list[tuple[str, Type | Expansion]] = []
        if not self.at("]"):
            while True:
                name = self.ident()
                self.expect(":=")
                mark = self.pos
                try:
                    val: Type | Expansion = self.expansion()
                    if not (self.at(",") or self.at("]")):
                        self.fail("incomplete expansion")
                except ParseError:
                    self.pos = mark
                    val = self.type_()
                bindings.append((name, val))
                if self.at(","):
                    self.next()
                    continue
                break
        self.expect("]")
        return Subst(tuple(bindings))

    # -- constraints ---------------------------------------------------------

    def constraint(self) -> Constraint:
        c = self.constraint_atom()
        while self.at("&"):
            self.next()
            c = And(c, self.constraint_atom())
        return c

    def constraint_atom(self) -> Constraint:
        if self.at("keyword", "omega"):
            self.next()
            return Omega()
        if self.at("keyword", "ex"):
            self.next()
            a = self.ident()
            self.expect(".")
            return Exists(a, self.constraint())
        # Try an atomic constraint "T <= T"; backtrack to guard / parens.
        mark = self.pos
        try:
            lhs = self.type_()
            if self.at("<="):
                self.next()
                return Atomic(lhs, self.type_())
            self.fail("expected '<='")
        except ParseError:
            self.pos = mark
        if self.at("("):
            self.next()
            c = self.constraint()
            self.expect(")")
            return c
        name = self.ident()
        self.expect("^")
        self.expect("{")
        forbidden = self.var_set()
        self.expect(";")
        witness = self.type_()
        self.expect("}")
        return EGuard(name, forbidden, witness, self.constraint_atom())

    # -- type environments -----------------------------------------------------

    def type_env(self) -> TypeEnv:
        self.expect("{")
        return self.env_entries("}")

    # -- skeletons ---------------------------------------------------------------

    def skeleton(self) -> Skeleton:
        q = self.skel_app()
        while self.at("|>") or self.at("+"):
            if self.next().kind == "|>":
                q = QSub(q, self.type_())
            else:
                q = QWeak(q, self.type_env())
        return q

    def skel_app(self) -> Skeleton:
        q = self.skel_atom()
        while self.at("@"):
            self.next()
            q = QApp(q, self.skel_atom())
        return q

    def skel_atom(self) -> Skeleton:
        if self.at("("):
            self.next()
            q = self.skeleton()
            self.expect(")")
            return q
        if self.at("\\"):
            self.next()
            x = self.ident()
            self.expect(".")
            return QAbs(x, self.skeleton())
        if self.at("keyword", "all"):
            self.next()
            a = self.ident()
            self.expect(".")
            return QForall(a, self.skeleton())
        name = self.ident()
        if self.at("^"):
            self.next()
            self.expect("{")
            forbidden = self.var_set()
            self.expect("}")
            return QEVar(name, forbidden, self.skel_atom())
        self.expect("<")
        return QVar(name, self.env_entries(">"))


def _entry(parse_method):
    def run(text: str):
        p = Parser(text)
        value = parse_method(p)
        p.done()
        return value
    return run


parse_term = _entry(Parser.term)
parse_type = _entry(Parser.type_)
parse_expansion = _entry(Parser.expansion)
parse_subst = _entry(Parser.subst)
parse_constraint = _entry(Parser.constraint)
parse_type_env = _entry(Parser.type_env)
parse_skeleton = _entry(Parser.skeleton)


# ---------------------------------------------------------------------------
# Printers


def print_term(m: Term) -> str:
    match m:
        case Var(x):
            return x
        case Abs(x, body):
            return f"\\{x}. {print_term(body)}"
        case App(f, a):
            fs = print_term(f)
            if isinstance(f, Abs):
                fs = f"({fs})"
            as_ = print_term(a)
            if isinstance(a, (Abs, App)):
                as_ = f"({as_})"
            return f"{fs} @ {as_}"
    raise TypeError(m)


def print_var_set(vs: frozenset[str]) -> str:
    return ",".join(sorted(vs))


def print_type(t: Type) -> str:
    match t:
        case TVar(a):
            return a
        case Arrow(d, c):
            ds = print_type(d)
            if isinstance(d, (Arrow, Forall)):
                ds = f"({ds})"
            return f"{ds} -> {print_type(c)}"
        case Forall(a, body):
            return f"all {a}. {print_type(body)}"
        case EVarApp(s, forbidden, body):
            bs = print_type(body)
            if isinstance(body, (Arrow, Forall)):
                bs = f"({bs})"
            return f"{s}^{{{print_var_set(forbidden)}}} {bs}"
    raise TypeError(t)


def print_expansion(i: Expansion) -> str:
    match i:
        case Id():
            return "id"
        case ForallIntro(a, rest):
            return f"all {a}. {print_expansion(rest)}"
        case EVarIntro(s, forbidden, rest):
            rs = print_expansion(rest)
            if isinstance(rest, (ForallIntro, SubStep)):
                rs = f"({rs})"
            return f"{s}^{{{print_var_set(forbidden)}}} {rs}"
        case SubStep(rest, target):
            rs = print_expansion(rest)
            if isinstance(rest, ForallIntro):
                rs = f"({rs})"
            return f"{rs} |> {print_type(target)}"
    raise TypeError(i)


def print_subst(phi: Subst) -> str:
    parts = []
    for name, val in phi.bindings:
        vs = print_type(val) if isinstance(val, Type) else print_expansion(val)
        parts.append(f"{name} := {vs}")
    return "[" + ", ".join(parts) + "]"


def print_constraint(c: Constraint) -> str:
    match c:
        case Omega():
            return "omega"
        case Atomic(lhs, rhs):
            return f"{print_type(lhs)} <= {print_type(rhs)}"
        case And(c1, c2):
            s1 = print_constraint(c1)
            if isinstance(c1, (Exists, EGuard)):
                s1 = f"({s1})"
            return f"{s1} & {print_constraint(c2)}"
        case Exists(a, body):
            return f"ex {a}. {print_constraint(body)}"
        case EGuard(s, forbidden, witness, body):
            bs = print_constraint(body)
            if isinstance(body, (And, Exists)):
                bs = f"({bs})"
            return f"{s}^{{{print_var_set(forbidden)}; {print_type(witness)}}} {bs}"
    raise TypeError(c)


def _print_entries(env: TypeEnv) -> str:
    return ", ".join(f"{x}: {print_type(t)}" for x, t in env.entries)


def print_type_env(env: TypeEnv) -> str:
    return "{" + _print_entries(env) + "}"


def print_skeleton(q: Skeleton) -> str:
    match q:
        case QVar(x, env):
            return f"{x}<{_print_entries(env)}>"
        case QAbs(x, body):
            return f"\\{x}. {print_skeleton(body)}"
        case QApp(f, a):
            fs = print_skeleton(f)
            if isinstance(f, (QAbs, QForall, QSub, QWeak)):
                fs = f"({fs})"
            as_ = print_skeleton(a)
            if isinstance(a, (QAbs, QForall, QSub, QWeak, QApp)):
                as_ = f"({as_})"
            return f"{fs} @ {as_}"
        case QForall(a, body):
            return f"all {a}. {print_skeleton(body)}"
        case QEVar(s, forbidden, body):
            bs = print_skeleton(body)
            if not isinstance(body, (QVar, QEVar)):
                bs = f"({bs})"
            return f"{s}^{{{print_var_set(forbidden)}}} {bs}"
        case QSub(body, target):
            bs = print_skeleton(body)
            if isinstance(body, (QAbs, QForall)):
                bs = f"({bs})"
            return f"{bs} |> {print_type(target)}"
        case QWeak(body, extra):
            bs = print_skeleton(body)
            if isinstance(body, (QAbs, QForall)):
                bs = f"({bs})"
            return f"{bs} + {print_type_env(extra)}"
    raise TypeError(q)
