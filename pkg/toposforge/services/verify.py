"""Verification suites.

Each suite walks a deterministic corpus and returns a ``Report`` with one
``CheckResult`` per check. Library errors raised while checking an instance
are reported as failures of that check instead of aborting the suite.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

from toposforge.core.config import settings
from toposforge.core.errors import ResolutionError, RingError, ToposforgeError
from toposforge.models.schemas import CheckResult, Report
from toposforge.services import corpus
from toposforge.services.finring import (
    FinRing, RingMap, check_kronecker_identity, classical_krull_dimension, diagonal_map,
    enumerate_filters, enumerate_ideals, find_ring_isomorphism, identity_map, ideal_generated,
    inclusion_map, is_complementary, is_invertible, is_local, is_nilpotent, is_radical, krull_dim_leq,
    localize_at_prime, maximal_ideals, prime_ideals, projection_map, radical, radical_ideals,
    regular_module, scalar_map, search_filters, structure_map, submodules,
)
from toposforge.services.forcing import (
    ForcingEngine, check_box_stability, check_box_theorem, check_comprehension_equivalence,
    check_comprehension_stalks, check_constant_transfer, check_geometric_spreading, check_gray_elision,
    check_locality, check_metaproperty, check_monotonicity, check_stalk_open, check_unique_existence,
    check_witness_property, equivalent_rewrites,
    standard_rules, sublocale_environment, verify_inference_rules,
)
from toposforge.services.formula import (
    Const, Formula, Implies, Not, Or, PropConst, Sort, format_formula, is_geometric_implication,
)
from toposforge.services.frame import (
    FiniteSpace, Nucleus, check_nucleus, find_frame_isomorphism, frame_negneg, is_dense,
    nucleus_closed, nucleus_identity, nucleus_negneg, nucleus_open, nucleus_point, open_key,
    points_of_frame, points_of_frame_bruteforce, sublocale_frame,
)
from toposforge.services.sheaf import (
    Environment, check_sheaf, constant_sheaf, extension_by_empty, find_sheaf_isomorphism,
    is_box_separated, is_box_sheaf, is_flabby, plus_construction, sheafify,
)
from toposforge.services.spectrum import (
    check_generic_metaproperty, check_internal_quasicoherence, check_stronger_generic_statement,
    check_structure_sheaf, expected_ring_properties, filters_over_units, generic_filter,
    internal_ring_properties, local_spectrum_frame, prime_elimination_table, quasicoherator,
    sections_ring, spectrum, structure_sheaf, tilde,
)

logger = logging.getLogger(__name__)

Outcome = Union[bool, tuple[bool, str]]


@dataclass
class SuiteConfig:
    """Corpus parameters shared by all suites; unset fields come from settings"""

    seed: int = field(default_factory=lambda: settings.SEED)
    count: int = field(default_factory=lambda: settings.CORPUS_SIZE)
    max_points: int = field(default_factory=lambda: settings.MAX_POINTS)
    max_depth: int = field(default_factory=lambda: settings.MAX_DEPTH)
    spaces: Optional[list[FiniteSpace]] = None
    rings: Optional[list[FinRing]] = None

    def space_corpus(self, max_points: Optional[int] = None) -> list[FiniteSpace]:
        limit = min(self.max_points, max_points or self.max_points)
        if self.spaces is not None:
            return list(self.spaces)
        return corpus.corpus_spaces(self.seed, self.count, limit)

    def ring_corpus(self) -> list[FinRing]:
        return list(self.rings) if self.rings is not None else corpus.corpus_rings()

    def depth(self, cap: int = 3) -> int:
        return min(cap, self.max_depth)


def _check(name: str, location: str, fn: Callable[[], Outcome], expected_failure: bool = False) -> CheckResult:
    try:
        outcome = fn()
    except ToposforgeError as e:
        logger.warning("❌ %s @ %s raised %s", name, location, e)
        return CheckResult(name=name, passed=False, location=location, counterexample=f"{type(e).__name__}: {e}",
                           expected_failure=expected_failure)
    passed, detail = outcome if isinstance(outcome, tuple) else (outcome, "")
    return CheckResult(name=name, passed=bool(passed), location=location, counterexample="" if passed else detail,
                       expected_failure=expected_failure)


def _where(i: int, X: FiniteSpace) -> str:
    return f"space {i} ({len(X)} points)"


def _standard_nuclei(X: FiniteSpace) -> list[Nucleus]:
    """¬¬, the identity, and the open, closed and point nuclei of a chosen open"""
    proper = [U for U in X.opens if U and U != X.full]
    U = next((V for V in proper if V in X.names), proper[0] if proper else X.full)
    return [
        nucleus_negneg(X),
        nucleus_identity(X.frame),
        nucleus_open(X, U),
        nucleus_closed(X, X.full - U),
        nucleus_point(X, 0),
    ]


def _covers(X: FiniteSpace, U, limit: int = 6) -> list[tuple]:
    """The trivial cover, the minimal-open cover and a few two-element covers"""
    minimal = tuple(sorted({X.minimal_open(x) for x in U}, key=open_key))
    covers = [(U,), minimal]
    proper = [V for V in X.opens_below(U) if V and V != U]
    pairs = [(V, W) for V, W in itertools.combinations(proper, 2) if V | W == U]
    return covers + pairs[:limit]


# ===== Logic suites =====

def suite_inference_rules(config: SuiteConfig) -> Report:
    rng = corpus.make_rng(config.seed)
    checks: list[CheckResult] = []
    for i, X in enumerate(config.space_corpus()):
        env = corpus.random_environment(rng, X)
        sort = Sort.sheaf("F")
        generator = corpus.FormulaGenerator(rng, env)
        scope = (("x", sort), ("y", sort))
        phi, psi, chi = (generator.formula(config.depth(), scope) for _ in range(3))
        for result in verify_inference_rules(env, standard_rules(phi, psi, chi, sort)):
            location = f"{_where(i, X)} {result.location}".strip()
            checks.append(result.model_copy(update={"location": location}))

        # excluded middle for every open holds iff X is the only dense open
        extended = env.copy()
        for k, U in enumerate(X.opens):
            extended.add_proposition(f"_o{k}", U)
        engine = ForcingEngine(extended)
        boolean = all(
            engine.force(X.full, Or(PropConst(Const(f"_o{k}")), Not(PropConst(Const(f"_o{k}")))))
            for k in range(len(X.opens))
        )
        only_dense = [V for V in X.opens if is_dense(X, V)] == [X.full]
        checks.append(_check(
            "excluded middle iff X is the only dense open", _where(i, X),
            lambda: (boolean == only_dense, f"boolean={boolean} only-dense={only_dense}"),
        ))
    return Report(suite="inference-rules", seed=config.seed, checks=checks)


def suite_locality(config: SuiteConfig) -> Report:
    rng = corpus.make_rng(config.seed)
    checks: list[CheckResult] = []
    for i, X in enumerate(config.space_corpus()):
        env = corpus.random_environment(rng, X)
        for k, phi in enumerate(corpus.random_formulas(rng, env, 3, config.depth())):
            def local(phi: Formula = phi) -> Outcome:
                for U in X.opens:
                    for cover in _covers(X, U):
                        if not check_locality(env, phi, cover):
                            return False, f"{format_formula(phi)} on cover {', '.join(X.label(V) for V in cover)}"
                return True

            checks.append(_check(f"locality formula {k}", _where(i, X), local))
            checks.append(_check(
                f"monotonicity formula {k}", _where(i, X),
                lambda phi=phi: (check_monotonicity(env, phi), format_formula(phi)),
            ))
    return Report(suite="locality", seed=config.seed, checks=checks)


def suite_geometric_spreading(config: SuiteConfig) -> Report:
    rng = corpus.make_rng(config.seed)
    checks: list[CheckResult] = []
    for i, X in enumerate(config.space_corpus()):
        env = corpus.random_environment(rng, X)
        formulas = corpus.random_formulas(rng, env, 10, config.depth(), geometric=True)
        for k, phi in enumerate(formulas):
            checks.append(_check(
                f"spreading formula {k}", _where(i, X),
                lambda phi=phi: (check_geometric_spreading(env, phi), format_formula(phi)),
            ))
        engine = ForcingEngine(env)
        for k, (phi, psi) in enumerate(zip(formulas[::2], formulas[1::2])):
            implication = Implies(phi, psi)

            def pointwise(implication: Formula = implication, phi: Formula = phi, psi: Formula = psi) -> Outcome:
                if not is_geometric_implication(implication, env.predicates):
                    return False, f"not recognised as geometric: {format_formula(implication)}"
                internal = engine.force(X.full, implication)
                at_points = all(
                    not engine.force(X.minimal_open(x), phi) or engine.force(X.minimal_open(x), psi)
                    for x in X.full
                )
                return internal == at_points, format_formula(implication)

            checks.append(_check(f"geometric implication {k} pointwise", _where(i, X), pointwise))
    return Report(suite="geometric-spreading", seed=config.seed, checks=checks)


def suite_comprehension(config: SuiteConfig) -> Report:
    rng = corpus.make_rng(config.seed)
    checks: list[CheckResult] = []
    scope = (("x", Sort.sheaf("F")),)
    for i, X in enumerate(config.space_corpus(max_points=4)):
        env = corpus.random_environment(rng, X, max_stalk=2)
        generator = corpus.FormulaGenerator(rng, env)
        for k in range(3):
            phi = generator.formula(config.depth(), scope)
            for m, (left, right) in enumerate(equivalent_rewrites(phi)):
                checks.append(_check(
                    f"comprehension formula {k} rewrite {m}", _where(i, X),
                    lambda left=left, right=right: (
                        check_comprehension_equivalence(env, "F", "x", left, right),
                        f"{format_formula(left)} vs {format_formula(right)}",
                    ),
                ))
        geometric = corpus.FormulaGenerator(rng, env, geometric=True)
        for k in range(3):
            phi = geometric.formula(config.depth(), scope)
            checks.append(_check(
                f"comprehension stalks formula {k}", _where(i, X),
                lambda phi=phi: (check_comprehension_stalks(env, "F", "x", phi), format_formula(phi)),
            ))
    return Report(suite="comprehension", seed=config.seed, checks=checks)


def suite_box_theorem(config: SuiteConfig) -> Report:
    rng = corpus.make_rng(config.seed)
    checks: list[CheckResult] = []
    for i, X in enumerate(config.space_corpus(max_points=5)):
        j = corpus.random_nucleus(rng, X)
        env = corpus.random_environment(rng, X, max_stalk=2)
        env.add_nucleus("j", j)
        where = f"{_where(i, X)} {j.label}"
        try:
            target = sublocale_environment(env, "j")
        except ToposforgeError as e:
            checks.append(CheckResult(name="sublocale environment", passed=False, location=where,
                                      counterexample=f"{type(e).__name__}: {e}"))
            continue
        for k, phi in enumerate(corpus.random_formulas(rng, env, 5, config.depth())):
            text = format_formula(phi)
            checks.append(_check(f"box theorem formula {k}", where,
                                 lambda phi=phi: (check_box_theorem(env, "j", phi, target), text)))
            checks.append(_check(f"box stability formula {k}", where,
                                 lambda phi=phi: (check_box_stability(env, "j", phi), text)))
            checks.append(_check(f"gray elision formula {k}", where,
                                 lambda phi=phi: (check_gray_elision(env, "j", phi), text)))
        for k, phi in enumerate(corpus.random_formulas(rng, env, 2, config.depth(), geometric=True)):
            checks.append(_check(f"stalk-open formula {k}", where,
                                 lambda phi=phi: (check_stalk_open(env, "j", phi), format_formula(phi))))
    return Report(suite="box-theorem", seed=config.seed, checks=checks)


def suite_sheafification(config: SuiteConfig) -> Report:
    rng = corpus.make_rng(config.seed)
    checks: list[CheckResult] = []
    for i, X in enumerate(config.space_corpus(max_points=4)):
        F = corpus.random_sheaf(rng, X, max_stalk=4 if len(X) <= 3 else 2)
        checks.append(_check("sheaf condition", _where(i, X), lambda F=F: check_sheaf(F, exhaustive=True) is F))
        checks.append(_check("flabbiness conditions agree", _where(i, X), lambda F=F: is_flabby(F) in (True, False)))
        for j in _standard_nuclei(X):
            where = f"{_where(i, X)} {j.label}"

            def separated_plus(F=F, j=j) -> Outcome:
                plus, unit = plus_construction(F, j)
                if not is_box_separated(plus, j):
                    return False, f"{plus.name} is not separated"
                return unit.is_injective() == is_box_separated(F, j), "unit injectivity differs from separatedness"

            def sheaf_twice(F=F, j=j) -> Outcome:
                a, _ = sheafify(F, j)
                if not is_box_sheaf(a, j):
                    return False, f"{a.name} is not a sheaf"
                if len(X) <= 3:
                    again, _ = sheafify(a, j)
                    return find_sheaf_isomorphism(again, a) is not None, "sheafification is not idempotent"
                return True

            checks.append(_check("plus construction separated", where, separated_plus))
            checks.append(_check("sheafification is a sheaf", where, sheaf_twice))
    return Report(suite="sheafification", seed=config.seed, checks=checks)


def suite_nuclei(config: SuiteConfig) -> Report:
    checks: list[CheckResult] = []
    for i, X in enumerate(config.space_corpus()):
        where = _where(i, X)
        for j in _standard_nuclei(X):
            checks.append(_check(f"nucleus axioms {j.label}", where, lambda j=j: check_nucleus(j)))
        checks.append(_check(
            "negneg is interior of closure", where,
            lambda: nucleus_negneg(X).table == frame_negneg(X.frame).table,
        ))
        checks.append(_check(
            "dense iff negneg is X", where,
            lambda: all(is_dense(X, V) == (nucleus_negneg(X).on_open(V) == X.full) for V in X.opens),
        ))

        def open_subspaces() -> Outcome:
            for U in X.opens:
                sub = sublocale_frame(nucleus_open(X, U)).frame
                if find_frame_isomorphism(sub, X.subspace(U).frame) is None:
                    return False, X.label(U)
            return True

        def closed_subspaces() -> Outcome:
            for U in X.opens:
                A = X.full - U
                sub = sublocale_frame(nucleus_closed(X, A)).frame
                if find_frame_isomorphism(sub, X.subspace(A).frame) is None:
                    return False, X.label(A, force_points=True)
            return True

        checks.append(_check("open sublocales are open subspaces", where, open_subspaces))
        checks.append(_check("closed sublocales are closed subspaces", where, closed_subspaces))
        checks.append(_check(
            "frame points are the T0 points", where,
            lambda: len(points_of_frame(X.frame)) == len(set(X.minimal_opens)),
        ))
        checks.append(_check(
            "point enumeration agrees with brute force", where,
            lambda: set(points_of_frame(X.frame)) == set(points_of_frame_bruteforce(X.frame)),
        ))
    return Report(suite="nuclei", seed=config.seed, checks=checks)


def suite_metaproperties(config: SuiteConfig) -> Report:
    rng = corpus.make_rng(config.seed)
    checks: list[CheckResult] = []
    for i, X in enumerate(config.space_corpus()):
        where = _where(i, X)
        env = corpus.random_environment(rng, X)
        f = corpus.random_formulas(rng, env, 6, config.depth())
        families = [[f[0], Or(f[0], f[1]), Or(Or(f[0], f[1]), f[2])], [f[3], Or(f[3], f[4])]]
        for result in check_metaproperty(env, "quasicompact", families):
            checks.append(result.model_copy(update={"location": where}))
        for result in check_metaproperty(env, "local", [f[:2], f[2:5]]):
            checks.append(result.model_copy(update={"location": f"{where} {result.location}"}))
        for result in check_metaproperty(env, "irreducible", [(f[0], f[1]), (f[4], f[5])]):
            checks.append(result.model_copy(update={"location": f"{where} {result.location}"}))

        sort = Sort.sheaf("F")
        generator = corpus.FormulaGenerator(rng, env)
        bodies = [generator.formula(config.depth(), (("v0", sort),)) for _ in range(2)]
        witness = check_witness_property(env, [("v0", sort, body) for body in bodies])
        checks.append(witness.model_copy(update={"location": f"{where} {witness.location}"}))
        checks.append(_check(
            "unique existence gives one section", where,
            lambda: all(check_unique_existence(env, "v0", sort, body) for body in bodies),
        ))

        constant = Environment(X)
        C = constant_sheaf(X, (0, 1), "F")
        constant.add_sheaf("F", C)
        constant.add_constant("c", "F", X.full, C.global_sections[-1])
        for k, phi in enumerate(corpus.random_formulas(rng, constant, 2, config.depth())):
            checks.append(_check(
                f"constant transfer formula {k}", where,
                lambda phi=phi: (check_constant_transfer(constant, phi), format_formula(phi)),
            ))
    return Report(suite="metaproperties", seed=config.seed, checks=checks)


# ===== Ring suites =====

def suite_spectrum(config: SuiteConfig) -> Report:
    checks: list[CheckResult] = []
    for A in config.ring_corpus():
        try:
            spec = spectrum(A)
        except ToposforgeError as e:
            checks.append(CheckResult(name="spectrum", passed=False, location=A.name,
                                      counterexample=f"{type(e).__name__}: {e}"))
            continue
        size, points = spec.spec_frame.frame.size, len(spec.space)
        where = f"{A.name}: frame={size} elements, points={points}"
        checks.append(_check(
            "frame elements are the radical ideals", where,
            lambda: size == len({i.members for i in enumerate_ideals(A) if is_radical(A, i)}),
        ))
        checks.append(_check(
            "points are the filters", where,
            lambda: points == len(enumerate_filters(A)) == len(search_filters(A)),
        ))
        checks.append(_check(
            "filters are complements of primes", where,
            lambda: {frozenset(A.elements) - F.members for F in spec.filters} == {p.members for p in prime_ideals(A)},
        ))

        def global_sections() -> Outcome:
            problems = check_structure_sheaf(A)
            return not problems, "; ".join(problems)

        def stalks() -> Outcome:
            O = structure_sheaf(A)
            for x, F in enumerate(spec.filters):
                local = localize_at_prime(A, F.prime).ring
                if find_ring_isomorphism(sections_ring(O, spec.space.minimal_open(x)), local) is None:
                    return False, f"stalk at {spec.space.points[x]}"
                if not is_local(local) or len(maximal_ideals(local)) != 1:
                    return False, f"localization at {spec.space.points[x]} is not local"
            return True

        def closure_operator() -> Outcome:
            ideals = enumerate_ideals(A)
            for I in ideals:
                r = radical(A, I)
                if not I.members <= r.members or radical(A, r).members != r.members:
                    return False, f"radical of {sorted(I.members)}"
            for I, J in itertools.product(ideals, repeat=2):
                if I.members <= J.members and not radical(A, I).members <= radical(A, J).members:
                    return False, f"{sorted(I.members)} ⊆ {sorted(J.members)}"
            return True

        checks.append(_check("global sections of O are A", where, global_sections))
        checks.append(_check("stalks are classical localizations", where, stalks))
        checks.append(_check("radical is a closure operator", where, closure_operator))
        if A.name == "zmod 12":
            checks.append(_check("zmod 12 has 4 frame elements and 2 points", where, lambda: (size, points) == (4, 2)))
        if A.name == "zmod 4":
            checks.append(_check("zmod 4 is a one-point locale", where, lambda: points == 1))
    return Report(suite="spectrum", seed=config.seed, checks=checks)


def suite_generic_filter(config: SuiteConfig) -> Report:
    rng = corpus.make_rng(config.seed)
    checks: list[CheckResult] = []
    for A in config.ring_corpus():
        where = A.name

        def membership_law() -> Outcome:
            bad = generic_filter(A).law_violations()
            return not bad, ", ".join(f"f={A.label(f)} x={A.label(x)}" for f, x in bad[:3])

        checks.append(_check("filter axioms", where, lambda: not generic_filter(A).failing_axioms()))
        checks.append(_check("D(f) forces x in F iff f in rad(x)", where, membership_law))
        for g in A.elements:
            checks.append(_check(
                f"metaproperty for ({A.label(g)})", where,
                lambda g=g: check_generic_metaproperty(A, "exists b:A. a = b*g", "a", {"g": g}),
            ))
            expected = is_nilpotent(A, g) or is_invertible(A, g)
            checks.append(_check(
                f"stronger statement for ({A.label(g)}) holds iff nilpotent or invertible", where,
                lambda g=g, expected=expected: check_stronger_generic_statement(A, g) == expected,
            ))
        pairs = list(itertools.combinations(A.elements, 2))
        picks = rng.choice(len(pairs), size=min(3, len(pairs)), replace=False) if pairs else []
        for p in picks:
            g, h = pairs[int(p)]
            checks.append(_check(
                f"metaproperty for ({A.label(g)},{A.label(h)})", where,
                lambda g=g, h=h: check_generic_metaproperty(
                    A, "exists b:A. exists c:A. a = b*g + c*h", "a", {"g": g, "h": h}),
            ))
    return Report(suite="generic-filter", seed=config.seed, checks=checks)


def _local_instances(rings: Sequence[FinRing]) -> list[RingMap]:
    instances = []
    for R in rings:
        if not is_local(R):
            continue
        instances.append(identity_map(R))
        if R.size <= 4:
            instances.append(diagonal_map(R))
        for A in rings:
            if A is R or A.size > 16:
                continue
            try:
                instances.append(structure_map(R, A))
            except RingError:
                pass
    return instances


def suite_quasicoherator(config: SuiteConfig) -> Report:
    checks: list[CheckResult] = []
    rings = config.ring_corpus()
    for phi in _local_instances(rings):
        R, A = phi.source, phi.target
        where = f"{R.name} -> {A.name}"
        try:
            ctx = local_spectrum_frame(R, phi)
        except ToposforgeError as e:
            checks.append(CheckResult(name="local spectrum frame", passed=False, location=where,
                                      counterexample=f"{type(e).__name__}: {e}"))
            continue
        where = f"{where}: frame={ctx.frame.size} elements"
        ideals = radical_ideals(A)
        by_members = {I.members: I for I in ideals}
        q = {I.members: quasicoherator(ctx, I).members for I in ideals}

        def closure_laws() -> Outcome:
            for I in ideals:
                if not I.members <= q[I.members] or q[q[I.members]] != q[I.members]:
                    return False, f"at {sorted(I.members)}"
            for I, J in itertools.product(ideals, repeat=2):
                if I.members <= J.members and not q[I.members] <= q[J.members]:
                    return False, f"monotonicity at {sorted(I.members)} ⊆ {sorted(J.members)}"
                meet = by_members[I.members & J.members]
                if q[meet.members] != q[I.members] & q[J.members]:
                    return False, f"meet of {sorted(I.members)} and {sorted(J.members)}"
            return True

        checks.append(_check("quasicoherator is a meet-preserving closure", where, closure_laws))
        checks.append(_check(
            "fixed points pass the internal condition", where,
            lambda: {m for m, image in q.items() if image == m} == {I.members for I in ctx.ideals},
        ))
        checks.append(_check(
            "points lie over the filter of units", where,
            lambda: len(points_of_frame(ctx.frame)) == len(filters_over_units(R, phi)),
        ))
        if R.name == "zmod 4" and A is R:
            checks.append(_check("zmod 4 over itself has 2 elements", where, lambda: ctx.frame.size == 2))
        if R.name == "zmod 4" and A.name == "product (zmod 4) (zmod 4)":
            checks.append(_check(
                "diagonal of zmod 4 has 4 elements and 2 points", where,
                lambda: (ctx.frame.size, len(points_of_frame(ctx.frame))) == (4, 2),
            ))

    for A in rings:
        if A.size > 12:
            continue
        M = regular_module(A)
        for N in submodules(M):
            checks.append(_check(
                f"tilde of {sorted(N)} is quasicoherent", A.name,
                lambda N=N: check_internal_quasicoherence(A, M, N),
            ))
        if A.name == "zmod 12":
            U0 = spectrum(A).basic_open(A.element("2"))
            checks.append(_check(
                "extension by the empty set from D(2) is not quasicoherent", A.name,
                lambda: not check_internal_quasicoherence(A, M, extension_by_empty(tilde(M), U0)),
            ))
    return Report(suite="quasicoherator", seed=config.seed, checks=checks)


def suite_dimension(config: SuiteConfig) -> Report:
    checks: list[CheckResult] = []
    for A in config.ring_corpus():
        where = A.name
        result = krull_dim_leq(A, 0)
        checks.append(_check(
            "dimension 0 by complementary sequences", where,
            lambda: (result.holds == (classical_krull_dimension(A) <= 0), f"failure at {result.failure}"),
        ))
        checks.append(_check("dimension -1 iff trivial", where, lambda: krull_dim_leq(A, -1).holds == A.is_trivial))
        checks.append(_check(
            "witnesses are complementary", where,
            lambda: all(is_complementary(A, a, b) for a, b in result.witnesses.items()),
        ))

        def kronecker() -> Outcome:
            for (a,), (b,) in result.witnesses.items():
                bad = check_kronecker_identity(A, a, b)
                if bad:
                    return False, f"a={A.label(a)} b={A.label(b)} x={A.label(bad[0])}"
            return True

        checks.append(_check("Kronecker identity on witnesses", where, kronecker))
    return Report(suite="dimension", seed=config.seed, checks=checks)


def suite_prime_elimination(config: SuiteConfig) -> Report:
    checks: list[CheckResult] = []
    for A in config.ring_corpus():
        if A.size > 12:
            continue
        candidates = [a for a in A.elements if a != A.zero and not is_invertible(A, a)]
        g = candidates[0] if candidates else A.zero
        I = ideal_generated(A, [g])
        for alpha in (projection_map(A, I), inclusion_map(A, I), scalar_map(regular_module(A), g)):
            def agrees(alpha=alpha) -> Outcome:
                rows = prime_elimination_table(A, alpha.source, alpha.target, alpha)
                wrong = [row.statement for row in rows if not row.agrees]
                return not wrong, "; ".join(wrong[:3])

            checks.append(_check(f"elimination table for {alpha.name}", A.name, agrees))
    return Report(suite="prime-elimination", seed=config.seed, checks=checks)


def suite_ring_properties(config: SuiteConfig) -> Report:
    checks: list[CheckResult] = []
    for A in config.ring_corpus():
        try:
            internal = internal_ring_properties(A)
            expected = expected_ring_properties(A)
        except ToposforgeError as e:
            checks.append(CheckResult(name="ring properties", passed=False, location=A.name,
                                      counterexample=f"{type(e).__name__}: {e}"))
            continue
        for name in sorted(internal):
            checks.append(CheckResult(
                name=f"O {name}",
                passed=internal[name] == expected[name],
                location=A.name,
                counterexample=f"internal={internal[name]} classical={expected[name]}",
            ))
        checks.append(CheckResult(
            name="O local and almost a field",
            passed=internal["local"] and internal["almost-field"],
            location=A.name,
        ))
    return Report(suite="ring-properties", seed=config.seed, checks=checks)


SUITES: dict[str, Callable[[SuiteConfig], Report]] = {
    "inference-rules": suite_inference_rules,
    "locality": suite_locality,
    "geometric-spreading": suite_geometric_spreading,
    "comprehension": suite_comprehension,
    "box-theorem": suite_box_theorem,
    "sheafification": suite_sheafification,
    "nuclei": suite_nuclei,
    "metaproperties": suite_metaproperties,
    "spectrum": suite_spectrum,
    "generic-filter": suite_generic_filter,
    "quasicoherator": suite_quasicoherator,
    "dimension": suite_dimension,
    "prime-elimination": suite_prime_elimination,
    "ring-properties": suite_ring_properties,
}


def run_suite(name: str, config: Optional[SuiteConfig] = None) -> Report:
    try:
        suite = SUITES[name]
    except KeyError:
        raise ResolutionError(f"unknown suite {name!r}; expected one of {', '.join(SUITES)}") from None
    config = config or SuiteConfig()
    logger.info("🔄 Running suite %s (seed %d)", name, config.seed)
    report = suite(config)
    if report.ok:
        logger.info("✅ %s: %d checks passed", name, len(report.checks))
    else:
        logger.warning("⚠️ %s: %d of %d checks failed", name, len(report.failures), len(report.checks))
    return report
