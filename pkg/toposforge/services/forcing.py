"""Kripke–Joyal forcing over sheaves on a finite space, plus meta-theorem checkers.

Disjunctions and existentials are decided pointwise on minimal open
neighbourhoods (``mode="minimal"``) or, as an oracle, by covering U with
opens on which a disjunct or witness exists (``mode="covers"``).
Implications and universal quantifiers range over every open V ⊆ U.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Iterable, Mapping, Optional, Sequence

from toposforge.core.errors import (
    NonGeometricError,
    ResolutionError,
    SortError,
    UnboundedSchemaError,
)
from toposforge.models.schemas import CheckResult
from toposforge.services.formula import (
    OMEGA, And, App, BigAnd, BigOr, Bot, Const, Eq, Exists, Forall, Formula, Implies,
    Member, Modal, Not, Or, Power, Pred, PropConst, SchemaAnd, SchemaOr, Sort, Term,
    Top, Var, box_translate, exists_unique, format_formula, free_vars, is_geometric,
    substitute, unfold_schema,
)
from toposforge.services.frame import FiniteSpace, Open, discrete, nucleus_negneg, open_key, sublocale_frame
from toposforge.services.sheaf import (
    ConstantBinding, Environment, Sheaf, comprehend, constant_ring_sheaf, constant_sheaf,
    power_member, sheafify, stalk,
)

logger = logging.getLogger(__name__)

MODES = ("minimal", "covers")


class _NeedsContext(Exception):
    """A numeral or overloaded constant whose sheaf is not yet known"""


@lru_cache(maxsize=None)
def _free_names(f: Formula) -> frozenset[str]:
    return frozenset(name for name, _ in free_vars(f))


@dataclass(frozen=True)
class ForcingQuery:
    space: FiniteSpace
    open: Open
    formula: Formula
    env: Environment = field(compare=False, hash=False)
    bindings: tuple = ()


@dataclass(frozen=True)
class TruthValue:
    open: Open
    label: str


class ForcingEngine:
    """Decides U ⊨ φ for an environment over a finite space"""

    def __init__(self, env: Environment, mode: str = "minimal"):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        self.env = env
        self.mode = mode
        self.space = env.space
        self._memo: dict[tuple, bool] = {}
        self._revision = env.revision

    # ----- public API -----

    def force(self, U: Iterable[int], phi: Formula, bindings: Optional[Mapping[str, Any]] = None) -> bool:
        U = frozenset(U)
        if not self.space.is_open(U):
            raise ResolutionError(f"{self.space.label(U, force_points=True)} is not open")
        assignment = self._bind(U, phi, bindings or {})
        try:
            return self._force(U, phi, assignment)
        except _NeedsContext as e:
            raise SortError(f"cannot determine the sort of {e.args[0]}") from None

    def truth_value(self, phi: Formula, bindings: Optional[Mapping[str, Any]] = None) -> TruthValue:
        """Largest open on which φ holds; bindings are global sections"""
        X = self.space
        assignment = self._bind(X.full, phi, bindings or {})
        try:
            points = frozenset(
                x for x in X.full
                if self._force(X.minimal_open(x), phi, self._restrict(assignment, X.full, X.minimal_open(x)))
            )
        except _NeedsContext as e:
            raise SortError(f"cannot determine the sort of {e.args[0]}") from None
        return TruthValue(points, X.label(points))

    def _bind(self, U: Open, phi: Formula, bindings: Mapping[str, Any]) -> dict[str, tuple[Sheaf, Any]]:
        assignment = {}
        for name, sort in sorted(free_vars(phi), key=lambda v: v[0]):
            if name not in bindings:
                raise SortError(f"unbound variable {name}")
            F = self.env.sheaf_for(sort)
            value = bindings[name]
            if value not in F.sections(U):
                raise SortError(f"value for {name} is not a section of {F.name} over {self.space.label(U)}")
            assignment[name] = (F, value)
        return assignment

    # ----- evaluation -----

    def _restrict(self, assignment: dict, U: Open, V: Open) -> dict:
        if U == V:
            return assignment
        return {name: (F, F.restrict(s, U, V)) for name, (F, s) in assignment.items()}

    def _force(self, U: Open, phi: Formula, assignment: dict) -> bool:
        if self.env.revision != self._revision:
            self._memo.clear()
            self._revision = self.env.revision
        relevant = _free_names(phi)
        key = (U, phi, tuple((n, F.name, s) for n, (F, s) in sorted(assignment.items(), key=lambda kv: kv[0]) if n in relevant))
        if key not in self._memo:
            self._memo[key] = self._evaluate(U, phi, assignment)
        return self._memo[key]

    def _pointwise(self, U: Open, assignment: dict, holds) -> bool:
        """holds(V, assignment|V) at every minimal open, or on a cover of U"""
        X = self.space
        if self.mode == "minimal":
            return all(holds(X.minimal_open(x), self._restrict(assignment, U, X.minimal_open(x))) for x in U)
        covered = frozenset().union(*[V for V in X.opens_below(U) if holds(V, self._restrict(assignment, U, V))])
        return covered == U

    def _evaluate(self, U: Open, phi: Formula, a: dict) -> bool:
        X = self.space
        match phi:
            case Top():
                return True
            case Bot():
                return not U
            case Eq(left, right):
                return self._equal(left, right, U, a)
            case Member(element, container):
                return self._member(element, container, U, a)
            case PropConst(term):
                return self._proposition(term, U, a)
            case Pred(name, args):
                macro = self.env.predicates.get(name)
                if macro is None:
                    raise ResolutionError(f"unknown predicate {name!r}")
                return self._force(U, macro.expand(args), a)
            case And(left, right):
                return self._force(U, left, a) and self._force(U, right, a)
            case BigAnd(parts):
                return all(self._force(U, p, a) for p in parts)
            case Or(left, right):
                return self._pointwise(U, a, lambda V, b: self._force(V, left, b) or self._force(V, right, b))
            case BigOr(parts):
                return self._pointwise(U, a, lambda V, b: any(self._force(V, p, b) for p in parts))
            case SchemaAnd() | SchemaOr():
                return self._force(U, unfold_schema(phi, self.env.schema_bound), a)
            case Implies(antecedent, consequent):
                return all(
                    not self._force(V, antecedent, b) or self._force(V, consequent, b)
                    for V in X.opens_below(U)
                    for b in (self._restrict(a, U, V),)
                )
            case Forall(var, sort, body):
                F = self.env.sheaf_for(sort)
                return all(
                    self._force(V, body, {**self._restrict(a, U, V), var: (F, s)})
                    for V in X.opens_below(U)
                    for s in F.sections(V)
                )
            case Exists(var, sort, body):
                F = self.env.sheaf_for(sort)
                return self._pointwise(
                    U, a, lambda V, b: any(self._force(V, body, {**b, var: (F, s)}) for s in F.sections(V))
                )
            case Modal(name, body):
                j = self.env.nucleus(name)
                holds = frozenset(
                    x for x in U
                    if self._force(X.minimal_open(x), body, self._restrict(a, U, X.minimal_open(x)))
                )
                return U <= j.on_open(holds)
        raise TypeError(f"not a formula: {phi!r}")

    def _proposition(self, term: Term, U: Open, a: dict) -> bool:
        match term:
            case Var(name, _):
                if name not in a:
                    raise SortError(f"unbound variable {name}")
                _, value = a[name]
                return value == U
            case Const("X"):
                return True
            case Const(name):
                if name not in self.env.propositions:
                    raise ResolutionError(f"unknown propositional constant {name!r}")
                return U <= self.env.propositions[name]
        raise SortError(f"{term!r} is not a proposition")

    def _member(self, element: Term, container: Term, U: Open, a: dict) -> bool:
        if isinstance(container, Const):
            sub = self.env.subsheaves.get(container.name)
            if sub is None:
                raise ResolutionError(f"unknown subsheaf {container.name!r}")
            F, s = self._term(element, U, a, sub.parent)
            if F is not sub.parent:
                raise SortError(f"{container.name} is a subsheaf of {sub.parent.name}, not {F.name}")
            return sub.contains(s, U)
        if isinstance(container, Var) and container.sort.kind == "power":
            inner = self.env.sheaf_for(container.sort.inner)
            _, A = a[container.name]
            F, s = self._term(element, U, a, inner)
            if F is not inner:
                raise SortError(f"{container.name} holds subsets of {inner.name}, not {F.name}")
            return power_member(inner, s, A, U)
        raise SortError(f"cannot test membership in {container!r}")

    def _equal(self, left: Term, right: Term, U: Open, a: dict) -> bool:
        try:
            F, s = self._term(left, U, a, None)
        except _NeedsContext:
            try:
                G, t = self._term(right, U, a, None)
            except _NeedsContext:
                G = self._only_ring()
                t = self._term(right, U, a, G)[1]
            F, s = self._term(left, U, a, G)
        else:
            G, t = self._term(right, U, a, F)
        if F is not G:
            raise SortError(f"cannot compare a section of {F.name} with one of {G.name}")
        return s == t

    def _only_ring(self) -> Sheaf:
        """Context for equations between numerals: O if present, else the only ring"""
        O = self.env.sheaves.get("O")
        if O is not None and O.is_ring:
            return O
        rings = [F for F in self.env.sheaves.values() if F.is_ring]
        if len(rings) != 1:
            raise _NeedsContext("numeral")
        return rings[0]

    def _term(self, t: Term, U: Open, a: dict, expected: Optional[Sheaf]) -> tuple[Sheaf, Any]:
        match t:
            case Var(name, _):
                if name not in a:
                    raise SortError(f"unbound variable {name}")
                return a[name]
            case Const(name) if name.isdigit():
                if expected is None:
                    raise _NeedsContext(name)
                return expected, expected.numeral(U, int(name))
            case Const(name):
                return self._constant(name, U, expected)
            case App(fn, args):
                return self._apply(fn, args, U, a, expected)
            case Power(base, exponent):
                if isinstance(exponent, str):
                    raise UnboundedSchemaError(f"exponent {exponent} used outside its schema")
                F, b = self._term(base, U, a, expected)
                result = F.one(U)
                for _ in range(exponent):
                    result = F.mul(result, b)
                return F, result
        raise TypeError(f"not a term: {t!r}")

    def _constant(self, name: str, U: Open, expected: Optional[Sheaf]) -> tuple[Sheaf, Any]:
        bindings: list[ConstantBinding] = self.env.constants.get(name, [])
        if not bindings:
            raise ResolutionError(f"unknown constant {name!r}")
        if expected is not None:
            bindings = [b for b in bindings if self.env.sheaves.get(b.sheaf) is expected] or bindings
        if len(bindings) > 1:
            raise _NeedsContext(name)
        binding = bindings[0]
        if not U <= binding.open:
            raise ResolutionError(f"constant {name} is not defined on {self.space.label(U)}")
        F = self.env.sheaves[binding.sheaf]
        return F, F.restrict(binding.section, binding.open, U)

    def _apply(self, fn: str, args: Sequence[Term], U: Open, a: dict, expected: Optional[Sheaf]):
        overloads = [f for f in self.env.functions.get(fn, []) if len(f.args) == len(args)]
        if not overloads:
            raise ResolutionError(f"unknown function {fn!r} with {len(args)} arguments")
        if expected is not None:
            overloads.sort(key=lambda f: self.env.sheaves.get(f.result) is not expected)
        failure: Optional[Exception] = None
        for symbol in overloads:
            try:
                values = []
                for arg, sheaf_name in zip(args, symbol.args):
                    target = self.env.sheaves[sheaf_name]
                    F, s = self._term(arg, U, a, target)
                    if F is not target:
                        raise SortError(f"{fn} expects {sheaf_name}, got {F.name}")
                    values.append(s)
            except (SortError, _NeedsContext) as e:
                failure = e
                continue
            return self.env.sheaves[symbol.result], symbol.apply(U, *values)
        if isinstance(failure, _NeedsContext):
            raise failure
        raise SortError(f"no overload of {fn} fits its arguments: {failure}")


def force(q: ForcingQuery) -> bool:
    return ForcingEngine(q.env).force(q.open, q.formula, dict(q.bindings))


def truth_value(phi: Formula, env: Environment, bindings: Optional[Mapping[str, Any]] = None) -> TruthValue:
    return ForcingEngine(env).truth_value(phi, bindings)


# ===== Inference rules =====

@dataclass(frozen=True)
class Sequent:
    """φ ⊢_ctx ψ, true on U when U ⊨ ∀ctx. φ ⇒ ψ"""

    context: tuple[tuple[str, Sort], ...]
    antecedent: Formula
    consequent: Formula

    def as_formula(self) -> Formula:
        body: Formula = Implies(self.antecedent, self.consequent)
        for name, sort in reversed(self.context):
            body = Forall(name, sort, body)
        return body


@dataclass(frozen=True)
class InferenceRule:
    name: str
    premises: tuple[Sequent, ...]
    conclusion: Sequent
    expected_failure: bool = False


def standard_rules(
    phi: Formula, psi: Formula, chi: Formula, sort: Optional[Sort] = None
) -> list[InferenceRule]:
    """Instances of the intuitionistic rules for the given formulas.

    With a sort, the quantifier, substitution and equality rules use the
    context variables x, y of that sort; φ, ψ, χ may mention them.
    """
    ctx: tuple[tuple[str, Sort], ...] = (("x", sort), ("y", sort)) if sort else ()
    S = lambda a, c, context=ctx: Sequent(context, a, c)
    rules = [
        InferenceRule("identity", (), S(phi, phi)),
        InferenceRule("cut", (S(phi, psi), S(psi, chi)), S(phi, chi)),
        InferenceRule("top-intro", (), S(phi, Top())),
        InferenceRule("and-intro", (S(phi, psi), S(phi, chi)), S(phi, And(psi, chi))),
        InferenceRule("and-elim-left", (S(phi, And(psi, chi)),), S(phi, psi)),
        InferenceRule("and-elim-right", (S(phi, And(psi, chi)),), S(phi, chi)),
        InferenceRule("bot-elim", (), S(Bot(), phi)),
        InferenceRule("or-intro-left", (), S(phi, Or(phi, psi))),
        InferenceRule("or-intro-right", (), S(psi, Or(phi, psi))),
        InferenceRule("or-elim", (S(phi, chi), S(psi, chi)), S(Or(phi, psi), chi)),
        InferenceRule("bigand-intro", (S(phi, psi), S(phi, chi), S(phi, Top())), S(phi, BigAnd((psi, chi, Top())))),
        InferenceRule("bigand-elim", (S(phi, BigAnd((psi, chi))),), S(phi, chi)),
        InferenceRule("bigvee-intro", (), S(psi, BigOr((phi, psi, chi)))),
        InferenceRule("bigvee-elim", (S(phi, chi), S(psi, chi)), S(BigOr((phi, psi)), chi)),
        InferenceRule("implies-intro", (S(And(phi, psi), chi),), S(phi, Implies(psi, chi))),
        InferenceRule("implies-elim", (S(phi, Implies(psi, chi)),), S(And(phi, psi), chi)),
        InferenceRule("excluded-middle", (), S(Top(), Or(phi, Not(phi))), expected_failure=True),
    ]
    if sort is None:
        return rules
    x, y = Var("x", sort), Var("y", sort)
    inner = (("x", sort),)
    free_in = lambda f, name: name in {n for n, _ in free_vars(f)}
    rules += [
        InferenceRule("substitution", (S(phi, psi),), S(substitute(phi, "x", y), substitute(psi, "x", y))),
        InferenceRule("equality-refl", (), S(Top(), Eq(x, x))),
        InferenceRule("equality-subst", (), S(And(Eq(x, y), phi), substitute(phi, "x", y))),
    ]
    if not free_in(psi, "y"):
        rules += [
            InferenceRule("exists-intro", (S(phi, psi),), S(Exists("y", sort, phi), psi, inner)),
            InferenceRule("exists-elim", (S(Exists("y", sort, phi), psi, inner),), S(phi, psi)),
        ]
    if not free_in(phi, "y"):
        rules += [
            InferenceRule("forall-intro", (S(phi, psi),), S(phi, Forall("y", sort, psi), inner)),
            InferenceRule("forall-elim", (S(phi, Forall("y", sort, psi), inner),), S(phi, psi)),
        ]
    return rules


def verify_inference_rules(env: Environment, rules: Sequence[InferenceRule]) -> list[CheckResult]:
    """Premises forced on U imply the conclusion forced on U, for every open U"""
    engine = ForcingEngine(env)
    X = env.space
    results = []
    for rule in rules:
        failing = None
        for U in X.opens:
            premises = all(engine.force(U, p.as_formula()) for p in rule.premises)
            if premises and not engine.force(U, rule.conclusion.as_formula()):
                failing = U
                break
        results.append(CheckResult(
            name=f"rule {rule.name}",
            passed=failing is None,
            location="" if failing is None else X.label(failing),
            counterexample="" if failing is None else format_formula(rule.conclusion.as_formula()),
            expected_failure=rule.expected_failure,
        ))
    return results


# ===== Meta-theorems =====

def check_locality(env: Environment, phi: Formula, cover: Sequence[Open], bindings: Optional[Mapping] = None) -> bool:
    """U ⊨ φ iff every member of the cover forces φ, U being the union of the cover"""
    engine = ForcingEngine(env)
    U = frozenset().union(*cover) if cover else frozenset()
    bindings = bindings or {}
    F_bind = engine._bind(U, phi, bindings)
    whole = engine._force(U, phi, F_bind)
    parts = all(engine._force(V, phi, engine._restrict(F_bind, U, V)) for V in cover)
    return whole == parts


def check_monotonicity(env: Environment, phi: Formula) -> bool:
    engine = ForcingEngine(env)
    X = env.space
    return all(
        not engine.force(U, phi) or all(engine.force(V, phi) for V in X.opens_below(U)) for U in X.opens
    )


def check_geometric_spreading(env: Environment, phi: Formula, bindings: Optional[Mapping] = None) -> bool:
    """φ holds at the stalk of x iff it holds on some open around x"""
    if not is_geometric(phi, env.predicates):
        raise NonGeometricError(f"not a geometric formula: {format_formula(phi)}")
    X = env.space
    stalkwise = ForcingEngine(env, "minimal")
    neighbourhoods = ForcingEngine(env, "covers")
    bindings = bindings or {}
    global_assignment = stalkwise._bind(X.full, phi, bindings)
    for x in X.full:
        Ux = X.minimal_open(x)
        at_stalk = stalkwise._force(Ux, phi, stalkwise._restrict(global_assignment, X.full, Ux))
        nearby = any(
            neighbourhoods._force(V, phi, neighbourhoods._restrict(global_assignment, X.full, V))
            for V in X.opens if x in V
        )
        if at_stalk != nearby:
            logger.warning("⚠️ spreading fails at %s for %s", X.points[x], format_formula(phi))
            return False
    return True


def equivalent_rewrites(phi: Formula) -> list[tuple[Formula, Formula]]:
    """Pairs forced equivalent on every open: φ against φ ∨ ⊥, φ ∧ ⊤, and ¬¬φ against □¬¬ φ"""
    return [
        (phi, Or(phi, Bot())),
        (phi, And(phi, Top())),
        (Not(Not(phi)), Modal("negneg", phi)),
        (Not(phi), Not(Not(Not(phi)))),
    ]


def check_comprehension_equivalence(
    env: Environment, sheaf: str, var: str, phi: Formula, psi: Formula
) -> bool:
    """{s | φ(s)} = {s | ψ(s)} whenever φ(s) ⇔ ψ(s) is forced for every section s"""
    env = env.copy()
    env.add_nucleus("negneg", nucleus_negneg(env.space))
    F = env.sheaves[sheaf]
    engine = ForcingEngine(env)
    both = And(Implies(phi, psi), Implies(psi, phi))
    if not all(engine.force(U, both, {var: s}) for U in env.space.opens for s in F.sections(U)):
        logger.warning("⚠️ %s and %s are not equivalent", format_formula(phi), format_formula(psi))
        return False
    return comprehend(F, phi, env, var).selected == comprehend(F, psi, env, var).selected


def check_comprehension_stalks(env: Environment, sheaf: str, var: str, phi: Formula) -> bool:
    """For geometric φ the stalk of {s | φ(s)} at x is the set of germs with a representative satisfying φ"""
    if not is_geometric(phi, env.predicates):
        raise NonGeometricError(f"not a geometric formula: {format_formula(phi)}")
    X = env.space
    F = env.sheaves[sheaf]
    subsheaf = comprehend(F, phi, env, var).as_sheaf()
    nearby = ForcingEngine(env, "covers")
    for x in X.full:
        Ux = X.minimal_open(x)
        germs = {
            F.restrict(s, V, Ux)
            for V in X.opens if x in V
            for s in F.sections(V) if nearby.force(V, phi, {var: s})
        }
        if germs != set(stalk(subsheaf, x)):
            logger.warning("⚠️ comprehension stalk differs at %s for %s", X.points[x], format_formula(phi))
            return False
    return True


def _transport_sheaf(F: Sheaf, name: str, sheafified: Sheaf, Y: FiniteSpace, opens_of: dict[int, Open], frame) -> Sheaf:
    parent_open = {opens_of[a]: frame.open_of(a) for a in opens_of}
    return Sheaf(
        name,
        Y,
        lambda O: sheafified.sections(parent_open[O]),
        lambda s, O, P: sheafified.restrict(s, parent_open[O], parent_open[P]),
        sheafified.label,
    )


def sublocale_environment(env: Environment, nucleus: str) -> Environment:
    """Parameters of env pulled back to the sublocale of the named nucleus.

    Sheaves are replaced by their sheafifications, global constants by their
    images under the unit and propositional constants U0 by j(U0). Function
    symbols, subsheaves and nuclei are not carried over.
    """
    j = env.nucleus(nucleus)
    frame = j.frame
    sub = sublocale_frame(j)
    Y, opens_of = sub.to_space()
    target = Environment(Y)
    units = {}
    for name, F in env.sheaves.items():
        sheafified, unit = sheafify(F, j)
        target.add_sheaf(name, _transport_sheaf(F, name, sheafified, Y, opens_of, frame))
        units[name] = unit
    X = env.space
    for cname, bindings in env.constants.items():
        for b in bindings:
            if b.open != X.full:
                raise ResolutionError(f"constant {cname} is not global and cannot be pulled back")
            target.add_constant(cname, b.sheaf, Y.full, units[b.sheaf](b.section, X.full))
    for pname, U0 in env.propositions.items():
        target.add_proposition(pname, opens_of[frame.element_of(j.on_open(U0))])
    for pname, macro in env.predicates.items():
        target.add_predicate(pname, macro)
    target.set_schema_bound(env.schema_bound)
    return target


def check_box_theorem(
    env: Environment, nucleus: str, phi: Formula, target: Optional[Environment] = None
) -> bool:
    """X ⊨ φ^□ iff the sublocale of □ forces φ with pulled-back parameters.

    ``target`` may carry a sublocale environment computed earlier for the
    same env and nucleus.
    """
    left = ForcingEngine(env).force(env.space.full, box_translate(phi, nucleus).formula)
    target = target or sublocale_environment(env, nucleus)
    right = ForcingEngine(target).force(target.space.full, phi)
    if left != right:
        logger.warning("⚠️ box theorem disagreement for %s along %s", format_formula(phi), nucleus)
    return left == right


def check_box_stability(env: Environment, nucleus: str, phi: Formula) -> bool:
    """Formulas in the image of the translation are □-stable"""
    engine = ForcingEngine(env)
    translated = box_translate(phi, nucleus).formula
    return all(engine.force(U, translated) == engine.force(U, Modal(nucleus, translated)) for U in env.space.opens)


def check_gray_elision(env: Environment, nucleus: str, phi: Formula) -> bool:
    engine = ForcingEngine(env)
    full = box_translate(phi, nucleus, elide_gray=False).formula
    elided = box_translate(phi, nucleus, elide_gray=True).formula
    return all(engine.force(U, full) == engine.force(U, elided) for U in env.space.opens)


def check_stalk_open(env: Environment, nucleus: str, phi: Formula) -> bool:
    """For geometric φ, φ^□ and □φ agree on every open"""
    if not is_geometric(phi, env.predicates):
        raise NonGeometricError(f"not a geometric formula: {format_formula(phi)}")
    engine = ForcingEngine(env)
    translated = box_translate(phi, nucleus).formula
    return all(engine.force(U, translated) == engine.force(U, Modal(nucleus, phi)) for U in env.space.opens)


def check_unique_existence(env: Environment, var: str, sort: Sort, body: Formula) -> bool:
    """U ⊨ ∃!s. φ(s) implies exactly one s ∈ F(U) with U ⊨ φ(s)"""
    engine = ForcingEngine(env)
    F = env.sheaf_for(sort)
    claim = exists_unique(var, sort, body)
    for U in env.space.opens:
        if engine.force(U, claim):
            witnesses = [s for s in F.sections(U) if engine.force(U, body, {var: s})]
            if len(witnesses) != 1:
                return False
    return True


def _classical_environment(env: Environment) -> Environment:
    """The same constant parameters over a one-point space"""
    point = discrete(1)
    classical = Environment(point)
    for name, F in env.sheaves.items():
        x = 0
        if F.ring_stalks is not None:
            classical.add_sheaf(name, constant_ring_sheaf(point, F.ring_stalks[x], name))
        else:
            germs = [s[0][1] for s in F.sections(F.space.minimal_open(x))]
            classical.add_sheaf(name, constant_sheaf(point, germs, name))
    for cname, bindings in env.constants.items():
        for b in bindings:
            germ = b.section[0][1]
            classical.add_constant(cname, b.sheaf, point.full, ((0, germ),))
    for pname, macro in env.predicates.items():
        classical.add_predicate(pname, macro)
    classical.set_schema_bound(env.schema_bound)
    return classical


def check_constant_transfer(env: Environment, phi: Formula) -> bool:
    """With constant parameters only: U ⊨ φ iff (U inhabited ⇒ φ holds in sets)"""
    classical = ForcingEngine(_classical_environment(env)).force(frozenset({0}), phi)
    engine = ForcingEngine(env)
    return all(engine.force(U, phi) == (not U or classical) for U in env.space.opens)


METAPROPERTIES = ("quasicompact", "local", "irreducible")


def _with_opens(env: Environment, opens: Sequence[Open], prefix: str) -> tuple[Environment, list[PropConst]]:
    extended = env.copy()
    constants = []
    for i, U in enumerate(opens):
        name = f"{prefix}{i}"
        extended.add_proposition(name, U)
        constants.append(PropConst(Const(name)))
    return extended, constants


def check_metaproperty(env: Environment, kind: str, instances: Sequence = ()) -> list[CheckResult]:
    """Compare a metaproperty of the internal language with the topology of X.

    quasicompact: instances are increasing families; X ⊨ ⋁φ_i gives some X ⊨ φ_i.
    local: instances are arbitrary families; the same conclusion holds for all of
    them (and for the canonical family of minimal opens) iff X is local.
    irreducible: instances are pairs (φ, ψ); X ⊨ ¬(φ∧ψ) splits iff X is irreducible.
    """
    X = env.space
    engine = ForcingEngine(env)
    results: list[CheckResult] = []
    if kind == "quasicompact":
        for i, family in enumerate(instances):
            increasing = all(
                not engine.force(U, a) or engine.force(U, b)
                for a, b in zip(family, family[1:]) for U in X.opens
            )
            holds = not engine.force(X.full, BigOr(tuple(family))) or any(engine.force(X.full, f) for f in family)
            results.append(CheckResult(
                name=f"quasicompact family {i}",
                passed=holds or not increasing,
                counterexample="" if holds else "; ".join(format_formula(f) for f in family),
            ))
        return results
    if kind == "local":
        minimal = sorted(set(X.minimal_opens), key=open_key)
        extended, canonical = _with_opens(env, minimal, "_min")
        engine = ForcingEngine(extended)
        families = list(instances) + [canonical]
        failures = [
            family for family in families
            if engine.force(X.full, BigOr(tuple(family))) and not any(engine.force(X.full, f) for f in family)
        ]
        results.append(CheckResult(
            name="disjunction property",
            passed=(not failures) == X.is_local,
            location=f"local={X.is_local}",
            counterexample="; ".join(format_formula(f) for f in failures[0]) if failures else "",
        ))
        return results
    if kind == "irreducible":
        disjoint = [
            (U, V) for U, V in itertools.combinations([W for W in X.opens if W], 2) if not U & V
        ]
        extended, constants = _with_opens(env, [W for pair in disjoint for W in pair], "_part")
        engine = ForcingEngine(extended)
        pairs = list(instances) + [(constants[2 * k], constants[2 * k + 1]) for k in range(len(disjoint))]
        failures = [
            (phi, psi) for phi, psi in pairs
            if engine.force(X.full, Not(And(phi, psi)))
            and not engine.force(X.full, Not(phi))
            and not engine.force(X.full, Not(psi))
        ]
        holds = not failures and not engine.force(X.full, Bot())
        results.append(CheckResult(
            name="negated-conjunction splitting",
            passed=holds == X.is_irreducible,
            location=f"irreducible={X.is_irreducible}",
            counterexample=(
                f"{format_formula(failures[0][0])} ; {format_formula(failures[0][1])}" if failures else ""
            ),
        ))
        a, b = Var("a", OMEGA), Var("b", OMEGA)
        de_morgan = Forall("a", OMEGA, Forall("b", OMEGA, Implies(
            Not(And(PropConst(a), PropConst(b))), Or(Not(PropConst(a)), Not(PropConst(b))))))
        forced = ForcingEngine(env).force(X.full, de_morgan)
        results.append(CheckResult(
            name="De Morgan on irreducible spaces",
            passed=forced or not X.is_irreducible,
            location=f"irreducible={X.is_irreducible}",
        ))
        return results
    raise ValueError(f"unknown metaproperty {kind!r}; expected one of {METAPROPERTIES}")


def check_witness_property(env: Environment, instances: Sequence[tuple[str, Sort, Formula]]) -> CheckResult:
    """X ⊨ ∃s. φ(s) gives a global s with X ⊨ φ(s); guaranteed on local spaces"""
    X = env.space
    engine = ForcingEngine(env)
    failing = None
    for var, sort, body in instances:
        if engine.force(X.full, Exists(var, sort, body)):
            F = env.sheaf_for(sort)
            if not any(engine.force(X.full, body, {var: s}) for s in F.global_sections):
                failing = format_formula(Exists(var, sort, body))
                break
    return CheckResult(
        name="global witnesses",
        passed=failing is None or not X.is_local,
        location=f"local={X.is_local}",
        counterexample=failing or "",
    )
