"""Concrete syntax for formulas.

Precedence, loosest first: quantifiers and schemas (scope maximally), `=>`
(right associative), `\\/`, `/\\`, then the prefix operators `~` and
`box[j]`. Terms have `+`, `*` and `^`, with `add(..)`, `mul(..)` and
`pow(..)` as prefix spellings.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from lark import Lark, Token, Transformer
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken, VisitError

from toposforge.core.errors import FormulaSyntaxError, SortError, UnboundedQuantificationError
from toposforge.services.formula import (
    OMEGA, And, App, BigAnd, BigOr, Bot, Const, Eq, Exists, Forall, Formula, Implies, Member,
    Modal, Not, Or, Power, Pred, PropConst, SchemaAnd, SchemaOr, Sort, Term, Top, Var,
)

FORMULA_GRAMMAR = r"""
    ?start: formula

    ?formula: "forall" names ":" sort "." formula                 -> forall
            | "exists" names ":" sort "." formula                 -> exists
            | "bigvee" "[" NAME "=" INT ".." [INT] "]" formula    -> schema_or
            | "bigand" "[" NAME "=" INT ".." [INT] "]" formula    -> schema_and
            | implication

    ?implication: disjunction
                | disjunction "=>" formula     -> implies

    ?disjunction: conjunction
                | disjunction "\\/" conjunction  -> or_

    ?conjunction: unary
                | conjunction "/\\" unary        -> and_

    ?unary: "~" unary                          -> not_
          | "box" "[" NAME "]" unary           -> modal
          | primary

    ?primary: "(" formula ")"
            | "true"                           -> true
            | "false"                          -> false
            | term "=" term                    -> eq
            | term "in" NAME                   -> member
            | term                             -> bare
            | "bigvee" "{" (formula (";" formula)*)? "}" -> big_or
            | "bigand" "{" (formula (";" formula)*)? "}" -> big_and

    names: NAME ("," NAME)*

    sort: NAME                                 -> sort_name
        | NAME "(" sort ")"                    -> sort_app

    ?term: sum
    ?sum: product
        | sum "+" product                      -> add
    ?product: power
            | product "*" power                -> mul
    ?power: base
          | base "^" exponent                  -> power
    exponent: INT | NAME
    ?base: NAME                                -> name
         | INT                                 -> numeral
         | NAME "(" [args] ")"                 -> app
    args: term ("," term)*

    NAME: /[A-Za-z_][A-Za-z0-9_']*/

    %import common.INT
    %import common.WS
    %ignore WS
"""

UNBOUNDED_SORTS = {"Set", "Sh", "Type"}


@dataclass(frozen=True)
class _Bare:
    """A term standing alone as a formula, resolved once scopes are known"""

    term: Term


class _FormulaBuilder(Transformer):
    def _quantify(self, children, node):
        names, sort, body = children
        for name in reversed(names):
            body = node(name, sort, body)
        return body

    def forall(self, children):
        return self._quantify(children, Forall)

    def exists(self, children):
        return self._quantify(children, Exists)

    def _schema(self, children, node):
        index, lower, upper, body = children
        return node(str(index), int(lower), None if upper is None else int(upper), body)

    def schema_or(self, children):
        return self._schema(children, SchemaOr)

    def schema_and(self, children):
        return self._schema(children, SchemaAnd)

    def names(self, children):
        return [str(c) for c in children]

    def implies(self, children):
        return Implies(children[0], children[1])

    def or_(self, children):
        return Or(children[0], children[1])

    def and_(self, children):
        return And(children[0], children[1])

    def not_(self, children):
        return Not(children[0])

    def modal(self, children):
        return Modal(str(children[0]), children[1])

    def true(self, _):
        return Top()

    def false(self, _):
        return Bot()

    def eq(self, children):
        return Eq(children[0], children[1])

    def member(self, children):
        return Member(children[0], Const(str(children[1])))

    def bare(self, children):
        return _Bare(children[0])

    def big_or(self, children):
        return BigOr(tuple(children))

    def big_and(self, children):
        return BigAnd(tuple(children))

    def sort_name(self, children):
        name = str(children[0])
        if name in UNBOUNDED_SORTS:
            raise UnboundedQuantificationError(f"quantification over {name} is not supported")
        return OMEGA if name == "Omega" else Sort.sheaf(name)

    def sort_app(self, children):
        name, inner = str(children[0]), children[1]
        if name != "P":
            raise SortError(f"unknown sort constructor {name}")
        return Sort.power(inner)

    def add(self, children):
        return App("add", (children[0], children[1]))

    def mul(self, children):
        return App("mul", (children[0], children[1]))

    def power(self, children):
        return Power(children[0], children[1])

    def exponent(self, children):
        token: Token = children[0]
        return int(token) if token.type == "INT" else str(token)

    def name(self, children):
        return Const(str(children[0]))

    def numeral(self, children):
        return Const(str(children[0]))

    def app(self, children):
        fn, args = str(children[0]), children[1] or []
        if fn == "pow":
            if len(args) != 2 or not isinstance(args[1], Const):
                raise SortError("pow takes a term and an exponent")
            exponent = args[1].name
            return Power(args[0], int(exponent) if exponent.isdigit() else exponent)
        return App(fn, tuple(args))

    def args(self, children):
        return list(children)


def _is_numeral(name: str) -> bool:
    return name.isdigit()


class _Binder:
    """Turns names into variables according to the quantifiers in scope"""

    def __init__(self, constants: Optional[set[str]]):
        self.constants = constants

    def term(self, t: Term, scope: Mapping[str, Sort], indices: frozenset[str]) -> Term:
        match t:
            case Const(name) if _is_numeral(name):
                return t
            case Const(name) if name in scope:
                return Var(name, scope[name])
            case Const(name):
                if self.constants is not None and name not in self.constants:
                    raise SortError(f"unbound variable {name}")
                return t
            case App(fn, args):
                return App(fn, tuple(self.term(a, scope, indices) for a in args))
            case Power(base, exponent):
                if isinstance(exponent, str) and exponent not in indices:
                    raise SortError(f"exponent {exponent} is not a schema index in scope")
                return Power(self.term(base, scope, indices), exponent)
        return t

    def formula(self, f, scope: Mapping[str, Sort], indices: frozenset[str]) -> Formula:
        term = lambda t: self.term(t, scope, indices)
        sub = lambda g: self.formula(g, scope, indices)
        match f:
            case _Bare(value):
                return self._bare(value, scope, indices)
            case Eq(left, right):
                return Eq(term(left), term(right))
            case Member(element, Const(name)):
                container = term(Const(name))
                if isinstance(container, Var) and container.sort.kind != "power":
                    raise SortError(f"{name} has sort {container.sort}, not a power sort")
                return Member(term(element), container)
            case Top() | Bot():
                return f
            case And(a, b):
                return And(sub(a), sub(b))
            case Or(a, b):
                return Or(sub(a), sub(b))
            case Implies(a, b):
                return Implies(sub(a), sub(b))
            case BigAnd(parts):
                return BigAnd(tuple(sub(p) for p in parts))
            case BigOr(parts):
                return BigOr(tuple(sub(p) for p in parts))
            case SchemaAnd(index, lower, upper, body) | SchemaOr(index, lower, upper, body):
                return type(f)(index, lower, upper, self.formula(body, scope, indices | {index}))
            case Forall(var, sort, body) | Exists(var, sort, body):
                return type(f)(var, sort, self.formula(body, {**scope, var: sort}, indices))
            case Modal(nucleus, body):
                return Modal(nucleus, sub(body))
        raise TypeError(f"unexpected node {f!r}")

    def _bare(self, value: Term, scope: Mapping[str, Sort], indices: frozenset[str]) -> Formula:
        match value:
            case Const(name) if _is_numeral(name):
                raise SortError(f"numeral {name} is not a proposition")
            case Const(name) if name in scope:
                if scope[name] != OMEGA:
                    raise SortError(f"{name} has sort {scope[name]}, expected a proposition")
                return PropConst(Var(name, OMEGA))
            case Const():
                return PropConst(self.term(value, scope, indices))
            case App(fn, args):
                return Pred(fn, tuple(self.term(a, scope, indices) for a in args))
        raise SortError("a term is not a proposition")


class FormulaParser:
    """LALR parser for the formula language"""

    def __init__(self):
        self.parser = Lark(FORMULA_GRAMMAR, parser="lalr", maybe_placeholders=True)
        self.builder = _FormulaBuilder()

    def parse(
        self,
        text: str,
        declarations: Optional[Mapping[str, Sort]] = None,
        constants: Optional[Iterable[str]] = None,
    ) -> Formula:
        """Parse text; declared names become variables, others stay constants.

        When ``constants`` is given, any other free name is an unbound-variable
        SortError.
        """
        try:
            tree = self.parser.parse(text)
            raw = self.builder.transform(tree)
        except VisitError as e:
            raise e.orig_exc from None
        except (UnexpectedEOF, UnexpectedToken) as e:
            token = getattr(e, "token", None)
            at_end = isinstance(e, UnexpectedEOF) or token is None or token.type == "$END"
            position = len(text) if at_end else token.start_pos
            raise FormulaSyntaxError(_describe(e), position, text) from None
        except UnexpectedCharacters as e:
            raise FormulaSyntaxError(f"unexpected character {text[e.pos_in_stream]!r}", e.pos_in_stream, text) from None
        except UnexpectedInput as e:
            raise FormulaSyntaxError(str(e), getattr(e, "pos_in_stream", len(text)) or 0, text) from None
        known = None if constants is None else set(constants)
        return _Binder(known).formula(raw, dict(declarations or {}), frozenset())


def _describe(e: UnexpectedInput) -> str:
    token = getattr(e, "token", None)
    if token is None or token.type == "$END":
        return "unexpected end of input"
    return f"unexpected {token.value!r}"


_default_parser: Optional[FormulaParser] = None


def parse(
    text: str,
    declarations: Optional[Mapping[str, Sort]] = None,
    constants: Optional[Iterable[str]] = None,
) -> Formula:
    global _default_parser
    if _default_parser is None:
        _default_parser = FormulaParser()
    return _default_parser.parse(text, declarations, constants)


def parse_sort(text: str) -> Sort:
    """Parse a sort such as F, Omega or P(F)"""
    formula = parse(f"forall _s:{text.strip()}. true")
    return formula.sort
