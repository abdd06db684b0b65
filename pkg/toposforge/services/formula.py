"""Formula language: sorts, terms, formulas, substitution and translations.

All nodes are frozen dataclasses, so formulas hash and compare structurally
and can be used directly as memo keys by the forcing engine.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator, Optional, Union

from toposforge.core.errors import SortError, UnboundedSchemaError


@dataclass(frozen=True)
class Sort:
    kind: str  # "sheaf" | "omega" | "power"
    name: str = ""
    inner: Optional["Sort"] = None

    @classmethod
    def sheaf(cls, name: str) -> "Sort":
        return cls("sheaf", name)

    @classmethod
    def power(cls, inner: "Sort") -> "Sort":
        return cls("power", "", inner)

    def __str__(self) -> str:
        if self.kind == "omega":
            return "Omega"
        if self.kind == "power":
            return f"P({self.inner})"
        return self.name


OMEGA = Sort("omega")


# ===== Terms =====

@dataclass(frozen=True)
class Var:
    name: str
    sort: Sort


@dataclass(frozen=True)
class Const:
    """A named section of the environment; numerals are constants too"""

    name: str


@dataclass(frozen=True)
class App:
    fn: str
    args: tuple["Term", ...]


@dataclass(frozen=True)
class Power:
    """base^exponent, the exponent being a literal or a schema index"""

    base: "Term"
    exponent: Union[int, str]


Term = Union[Var, Const, App, Power]


# ===== Formulas =====

@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Member:
    element: Term
    container: Term


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class BigAnd:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class BigOr:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class SchemaAnd:
    index: str
    lower: int
    upper: Optional[int]
    body: "Formula"


@dataclass(frozen=True)
class SchemaOr:
    index: str
    lower: int
    upper: Optional[int]
    body: "Formula"


@dataclass(frozen=True)
class Implies:
    antecedent: "Formula"
    consequent: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    sort: Sort
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    sort: Sort
    body: "Formula"


@dataclass(frozen=True)
class Modal:
    nucleus: str
    body: "Formula"


@dataclass(frozen=True)
class PropConst:
    """A named open, or a term of sort Omega"""

    term: Term


@dataclass(frozen=True)
class Pred:
    """A predicate macro application such as inv(x)"""

    name: str
    args: tuple[Term, ...]


Formula = Union[
    Eq, Member, Top, Bot, And, Or, BigAnd, BigOr, SchemaAnd, SchemaOr,
    Implies, Forall, Exists, Modal, PropConst, Pred,
]

Quantifier = (Forall, Exists)
Schema = (SchemaAnd, SchemaOr)


def Not(f: Formula) -> Implies:
    return Implies(f, Bot())


def Iff(f: Formula, g: Formula) -> And:
    return And(Implies(f, g), Implies(g, f))


def is_negation(f: Formula) -> bool:
    return isinstance(f, Implies) and isinstance(f.consequent, Bot)


def exists_unique(var: str, sort: Sort, body: Formula) -> Exists:
    """∃x. φ(x) ∧ ∀x'. φ(x') ⇒ x' = x"""
    other = fresh_name(var, names_in(body) | {var})
    return Exists(var, sort, And(body, Forall(other, sort, Implies(
        substitute(body, var, Var(other, sort)), Eq(Var(other, sort), Var(var, sort))))))


@dataclass(frozen=True)
class TranslationResult:
    formula: Formula
    elided_gray_boxes: bool


# ===== Traversal =====

def term_vars(t: Term) -> frozenset[tuple[str, Sort]]:
    if isinstance(t, Var):
        return frozenset({(t.name, t.sort)})
    if isinstance(t, App):
        return frozenset().union(*(term_vars(a) for a in t.args))
    if isinstance(t, Power):
        return term_vars(t.base)
    return frozenset()


def free_vars(f: Formula) -> frozenset[tuple[str, Sort]]:
    match f:
        case Eq(left, right):
            return term_vars(left) | term_vars(right)
        case Member(element, container):
            return term_vars(element) | term_vars(container)
        case Top() | Bot():
            return frozenset()
        case And(a, b) | Or(a, b) | Implies(a, b):
            return free_vars(a) | free_vars(b)
        case BigAnd(parts) | BigOr(parts):
            return frozenset().union(*(free_vars(p) for p in parts))
        case SchemaAnd(body=body) | SchemaOr(body=body) | Modal(body=body):
            return free_vars(body)
        case Forall(var, sort, body) | Exists(var, sort, body):
            return free_vars(body) - {(var, sort)}
        case PropConst(term):
            return term_vars(term)
        case Pred(_, args):
            return frozenset().union(*(term_vars(a) for a in args))
    raise TypeError(f"not a formula: {f!r}")


def names_in(f: Formula) -> set[str]:
    """Every variable name occurring in f, free or bound"""
    names = {name for name, _ in free_vars(f)}
    for node in walk(f):
        if isinstance(node, Quantifier):
            names.add(node.var)
    return names


def _term_constants(t: Term) -> set[str]:
    match t:
        case Const(name) if not name.isdigit():
            return {name}
        case App(_, args):
            return set().union(*(_term_constants(a) for a in args))
        case Power(base, _):
            return _term_constants(base)
    return set()


def constants_in(f: Formula) -> set[str]:
    """Names of constants, subsheaves and propositional constants used by f"""
    found: set[str] = set()
    for node in walk(f):
        match node:
            case Eq(left, right):
                found |= _term_constants(left) | _term_constants(right)
            case Member(element, container):
                found |= _term_constants(element) | _term_constants(container)
            case PropConst(term):
                found |= _term_constants(term)
            case Pred(_, args):
                found |= set().union(*(_term_constants(a) for a in args))
    return found


def children(f: Formula) -> tuple[Formula, ...]:
    match f:
        case And(a, b) | Or(a, b) | Implies(a, b):
            return (a, b)
        case BigAnd(parts) | BigOr(parts):
            return parts
        case SchemaAnd(body=body) | SchemaOr(body=body) | Modal(body=body) | Forall(body=body) | Exists(body=body):
            return (body,)
    return ()


def walk(f: Formula) -> Iterator[Formula]:
    yield f
    for child in children(f):
        yield from walk(child)


def depth(f: Formula) -> int:
    kids = children(f)
    return 0 if not kids else 1 + max(depth(k) for k in kids)


def fresh_name(base: str, taken: set[str]) -> str:
    candidate = base + "'"
    while candidate in taken:
        candidate += "'"
    return candidate


# ===== Substitution =====

def substitute_term(t: Term, name: str, replacement: Term) -> Term:
    match t:
        case Var(n, _) if n == name:
            return replacement
        case App(fn, args):
            return App(fn, tuple(substitute_term(a, name, replacement) for a in args))
        case Power(base, exponent):
            return Power(substitute_term(base, name, replacement), exponent)
    return t


def _term_sort(t: Term) -> Optional[Sort]:
    return t.sort if isinstance(t, Var) else None


def substitute(f: Formula, name: str, replacement: Term) -> Formula:
    """Capture-avoiding f[replacement/name]"""
    expected = {sort for n, sort in free_vars(f) if n == name}
    actual = _term_sort(replacement)
    if actual is not None and expected and actual not in expected:
        raise SortError(f"cannot substitute {actual} term for {name}:{next(iter(expected))}")
    return _substitute(f, name, replacement, {n for n, _ in term_vars(replacement)})


def _substitute(f: Formula, name: str, t: Term, t_names: set[str]) -> Formula:
    sub = lambda g: _substitute(g, name, t, t_names)
    term = lambda s: substitute_term(s, name, t)
    match f:
        case Eq(left, right):
            return Eq(term(left), term(right))
        case Member(element, container):
            return Member(term(element), term(container))
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
        case SchemaAnd() | SchemaOr() | Modal():
            return replace(f, body=sub(f.body))
        case Forall(var, sort, body) | Exists(var, sort, body):
            if var == name or name not in {n for n, _ in free_vars(body)}:
                return f
            if var in t_names:
                fresh = fresh_name(var, names_in(body) | t_names | {name})
                body = _substitute(body, var, Var(fresh, sort), {fresh})
                var = fresh
            return type(f)(var, sort, sub(body))
        case PropConst(value):
            return PropConst(term(value))
        case Pred(pname, args):
            return Pred(pname, tuple(term(a) for a in args))
    raise TypeError(f"not a formula: {f!r}")


def _instantiate_term(t: Term, index: str, k: int) -> Term:
    match t:
        case App(fn, args):
            return App(fn, tuple(_instantiate_term(a, index, k) for a in args))
        case Power(base, exponent):
            return Power(_instantiate_term(base, index, k), k if exponent == index else exponent)
    return t


def instantiate_schema(body: Formula, index: str, k: int) -> Formula:
    """Replace the schema index by the literal k in every exponent"""
    term = lambda s: _instantiate_term(s, index, k)
    inst = lambda g: instantiate_schema(g, index, k)
    match body:
        case Eq(left, right):
            return Eq(term(left), term(right))
        case Member(element, container):
            return Member(term(element), term(container))
        case PropConst(value):
            return PropConst(term(value))
        case Pred(name, args):
            return Pred(name, tuple(term(a) for a in args))
        case SchemaAnd() | SchemaOr() if body.index == index:
            return body
        case And(a, b) | Or(a, b) | Implies(a, b):
            return type(body)(inst(a), inst(b))
        case BigAnd(parts) | BigOr(parts):
            return type(body)(tuple(inst(p) for p in parts))
        case SchemaAnd() | SchemaOr() | Modal() | Forall() | Exists():
            return replace(body, body=inst(body.body))
    return body


def unfold_schema(node: SchemaAnd | SchemaOr, bound: Optional[int] = None) -> BigAnd | BigOr:
    """The explicit finite conjunction/disjunction a schema stands for"""
    upper = node.upper if node.upper is not None else bound
    if upper is None:
        raise UnboundedSchemaError(f"schema over {node.index} has no bound")
    parts = tuple(instantiate_schema(node.body, node.index, k) for k in range(node.lower, upper + 1))
    return BigOr(parts) if isinstance(node, SchemaOr) else BigAnd(parts)


# ===== Classification =====

def is_geometric(f: Formula, macros: Optional[dict] = None) -> bool:
    """Built from =, ∈, ⊤, ⊥, ∧, ∨, ⋁ and ∃ only"""
    match f:
        case Eq() | Member() | Top() | Bot() | PropConst():
            return True
        case Pred(name, args):
            if macros and name in macros:
                return is_geometric(macros[name].expand(args), macros)
            return True
        case And(a, b) | Or(a, b):
            return is_geometric(a, macros) and is_geometric(b, macros)
        case BigOr(parts):
            return all(is_geometric(p, macros) for p in parts)
        case SchemaOr(body=body) | Exists(body=body):
            return is_geometric(body, macros)
    return False


def geometric_implication_shape(
    f: Formula, macros: Optional[dict] = None
) -> Optional[tuple[tuple[tuple[str, Sort], ...], Formula, Formula]]:
    """(∀-prefix, antecedent, consequent), with ⊤ antecedent for a bare geometric body"""
    prefix = []
    while isinstance(f, Forall):
        prefix.append((f.var, f.sort))
        f = f.body
    if isinstance(f, Implies) and is_geometric(f.antecedent, macros) and is_geometric(f.consequent, macros):
        return tuple(prefix), f.antecedent, f.consequent
    if is_geometric(f, macros):
        return tuple(prefix), Top(), f
    return None


def is_geometric_implication(f: Formula, macros: Optional[dict] = None) -> bool:
    return geometric_implication_shape(f, macros) is not None


def connectives_outside_modal(f: Formula) -> set[str]:
    """Names of ⇒/∀/⋀ nodes not below any Modal node"""
    found: set[str] = set()

    def visit(g: Formula) -> None:
        if isinstance(g, Modal):
            return
        if isinstance(g, Implies):
            found.add("implies")
        elif isinstance(g, Forall):
            found.add("forall")
        elif isinstance(g, (BigAnd, SchemaAnd)):
            found.add("bigand")
        for child in children(g):
            visit(child)

    visit(f)
    return found


def exposed_connectives(f: Formula) -> set[str]:
    """⇒/∀/⋀ nodes reachable from the root through ∧, ⇒, ∀ and ⋀ only

    These are the connectives an elided box translation leaves unboxed.
    Anything below ∨, ∃, ⋁, an atom or a Modal node ends up under a box.
    """
    match f:
        case And(a, b):
            return exposed_connectives(a) | exposed_connectives(b)
        case Implies(a, b):
            return {"implies"} | exposed_connectives(a) | exposed_connectives(b)
        case Forall(body=body):
            return {"forall"} | exposed_connectives(body)
        case BigAnd(parts):
            return {"bigand"}.union(*(exposed_connectives(p) for p in parts))
        case SchemaAnd(body=body):
            return {"bigand"} | exposed_connectives(body)
    return set()


# ===== Translations =====

def _box(f: Formula, j: str, elide: bool) -> Formula:
    gray = (lambda g: g) if elide else (lambda g: Modal(j, g))
    box = lambda g: _box(g, j, elide)
    match f:
        case Eq() | Member() | PropConst() | Pred() | Bot():
            return Modal(j, f)
        case Top():
            return f
        case And(a, b):
            return gray(And(box(a), box(b)))
        case Or(a, b):
            return Modal(j, Or(box(a), box(b)))
        case Implies(a, b):
            return gray(Implies(box(a), box(b)))
        case BigAnd(parts):
            return gray(BigAnd(tuple(box(p) for p in parts)))
        case BigOr(parts):
            return Modal(j, BigOr(tuple(box(p) for p in parts)))
        case SchemaAnd():
            return gray(replace(f, body=box(f.body)))
        case SchemaOr():
            return Modal(j, replace(f, body=box(f.body)))
        case Forall(var, sort, body):
            return gray(Forall(var, sort, box(body)))
        case Exists(var, sort, body):
            return Modal(j, Exists(var, sort, box(body)))
        case Modal(k, body):
            return Modal(j, Modal(k, box(body)))
    raise TypeError(f"not a formula: {f!r}")


def box_translate(f: Formula, nucleus: str, elide_gray: bool = False) -> TranslationResult:
    return TranslationResult(_box(f, nucleus, elide_gray), elide_gray)


def _expand_negneg(f: Formula) -> Formula:
    match f:
        case Modal("negneg", body):
            return Not(Not(_expand_negneg(body)))
        case Modal(k, body):
            return Modal(k, _expand_negneg(body))
        case And(a, b) | Or(a, b) | Implies(a, b):
            return type(f)(_expand_negneg(a), _expand_negneg(b))
        case BigAnd(parts) | BigOr(parts):
            return type(f)(tuple(_expand_negneg(p) for p in parts))
        case SchemaAnd() | SchemaOr() | Forall() | Exists():
            return replace(f, body=_expand_negneg(f.body))
    return f


def negneg_translate(f: Formula, elide_gray: bool = True) -> TranslationResult:
    """The double negation translation: the box translation for ¬¬, spelled out"""
    boxed = box_translate(f, "negneg", elide_gray)
    return TranslationResult(_expand_negneg(boxed.formula), elide_gray)


# ===== Printing =====

_ATOMIC = 5
_UNARY = 4
_CONJ = 3
_DISJ = 2
_IMPL = 1
_BINDER = 0


def _term_level(t: Term) -> int:
    """2 for an infix sum, 1 for an infix product, 0 for anything tighter"""
    if isinstance(t, App) and len(t.args) == 2 and t.fn in ("add", "mul"):
        left, right = t.args
        if t.fn == "add" and _term_level(left) <= 2 and _term_level(right) <= 1:
            return 2
        if t.fn == "mul" and _term_level(left) <= 1 and _term_level(right) == 0:
            return 1
    return 0


def format_term(t: Term) -> str:
    match t:
        case Var(name, _) | Const(name):
            return name
        case Power(base, exponent):
            return f"{_format_prefix(base)}^{exponent}"
        case App(fn, args):
            level = _term_level(t)
            if level == 2:
                return f"{format_term(args[0])} + {format_term(args[1])}"
            if level == 1:
                return f"{format_term(args[0])}*{format_term(args[1])}"
            return _format_prefix(t)
    raise TypeError(f"not a term: {t!r}")


def _format_prefix(t: Term) -> str:
    if isinstance(t, App):
        return f"{t.fn}(" + ", ".join(format_term(a) for a in t.args) + ")"
    if isinstance(t, Power):
        return f"pow({format_term(t.base)}, {t.exponent})"
    return format_term(t)


def _level(f: Formula) -> int:
    match f:
        case Forall() | Exists() | SchemaAnd() | SchemaOr():
            return _BINDER
        case Implies() if not is_negation(f):
            return _IMPL
        case Or():
            return _DISJ
        case And():
            return _CONJ
        case Implies() | Modal():
            return _UNARY
    return _ATOMIC


def _wrap(f: Formula, minimum: int) -> str:
    text = format_formula(f)
    return text if _level(f) >= minimum else f"({text})"


def _unary_operand(f: Formula) -> str:
    if _level(f) == _UNARY or isinstance(f, (Top, Bot, PropConst, Pred, BigAnd, BigOr)):
        return format_formula(f)
    return f"({format_formula(f)})"


def format_formula(f: Formula) -> str:
    """Canonical ASCII text; parse(format_formula(f)) == f"""
    match f:
        case Eq(left, right):
            return f"{format_term(left)} = {format_term(right)}"
        case Member(element, container):
            return f"{format_term(element)} in {format_term(container)}"
        case Top():
            return "true"
        case Bot():
            return "false"
        case And(a, b):
            return f"{_wrap(a, _CONJ)} /\\ {_wrap(b, _UNARY)}"
        case Or(a, b):
            return f"{_wrap(a, _DISJ)} \\/ {_wrap(b, _CONJ)}"
        case Implies(a, Bot()):
            return f"~{_unary_operand(a)}"
        case Implies(a, b):
            return f"{_wrap(a, _DISJ)} => {format_formula(b)}"
        case BigAnd(parts):
            return "bigand{" + "; ".join(format_formula(p) for p in parts) + "}"
        case BigOr(parts):
            return "bigvee{" + "; ".join(format_formula(p) for p in parts) + "}"
        case SchemaAnd(index, lower, upper, body) | SchemaOr(index, lower, upper, body):
            keyword = "bigand" if isinstance(f, SchemaAnd) else "bigvee"
            bound = "" if upper is None else str(upper)
            return f"{keyword}[{index}={lower}..{bound}] {format_formula(body)}"
        case Forall(var, sort, body):
            return f"forall {var}:{sort}. {format_formula(body)}"
        case Exists(var, sort, body):
            return f"exists {var}:{sort}. {format_formula(body)}"
        case Modal(nucleus, body):
            return f"box[{nucleus}] {_unary_operand(body)}"
        case PropConst(term):
            return format_term(term)
        case Pred(name, args):
            return f"{name}(" + ", ".join(format_term(a) for a in args) + ")"
    raise TypeError(f"not a formula: {f!r}")
