"""Spectra of finite rings.

The spectrum is built from the frame of radical ideals; its points are the
filters of the ring and the opens are the sets D(I). The structure sheaf and
the tilde modules are presented by their stalks, the localizations at the
filters. Internal statements about them are decided by the forcing engine.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from toposforge.core.errors import (
    ConstantParameterError,
    InternalDisagreementError,
    NotLocalError,
    RingError,
)
from toposforge.models.schemas import SpecResponse
from toposforge.services.finring import (
    FinModule, FinRing, Filter, Ideal, Localization, ModuleLocalization, ModuleMap, RingMap,
    enumerate_filters, find_ring_isomorphism, generator_label, ideal_generated, is_invertible,
    is_local, is_nilpotent, is_reduced, krull_dim_leq, localize, localize_module, min_generators,
    principal_ideal, radical, radical_ideals, units,
)
from toposforge.services.formula import Bot, Const, Formula, Implies, Member, Pred, Sort, Top, Var, constants_in
from toposforge.services.frame import FiniteSpace, Frame, Open, find_frame_isomorphism, open_key, points_of_frame
from toposforge.services.parser import parse
from toposforge.services.sheaf import (
    Environment, FunctionSymbol, Macro, Sheaf, Subsheaf, comprehend, constant_ring_sheaf, from_stalks,
)

logger = logging.getLogger(__name__)

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")

O_SORT = Sort.sheaf("O")
A_SORT = Sort.sheaf("A")


# ===== Frame of radical ideals =====

@dataclass
class SpecFrame:
    """Radical ideals of a ring ordered by inclusion"""

    ring: FinRing
    ideals: tuple[Ideal, ...]
    frame: Frame

    def element_of(self, ideal: Ideal) -> int:
        for i, candidate in enumerate(self.ideals):
            if candidate.members == ideal.members:
                return i
        raise RingError(f"{generator_label(self.ring, ideal)} is not a radical ideal of {self.ring.name}")


def spec_frame(A: FinRing) -> SpecFrame:
    ideals = tuple(radical_ideals(A))
    frame = Frame.from_order(
        [generator_label(A, i) for i in ideals],
        lambda a, b: ideals[a].members <= ideals[b].members,
    )
    for a in frame.elements:
        for b in frame.elements:
            meet = ideals[a].members & ideals[b].members
            join = radical(A, ideal_generated(A, ideals[a].members | ideals[b].members)).members
            if ideals[frame.meet(a, b)].members != meet or ideals[frame.join(a, b)].members != join:
                raise InternalDisagreementError(
                    f"lattice operations on {frame.label(a)} and {frame.label(b)} differ from ∩ and √(+)"
                )
    return SpecFrame(A, ideals, frame)


def point_name(A: FinRing, prime: Ideal) -> str:
    return "p" + generator_label(A, prime)[1:-1]


class Spectrum:
    """Spec(A) as a finite space with its structure sheaf"""

    def __init__(self, A: FinRing):
        self.ring = A
        self.spec_frame = spec_frame(A)
        self.filters: list[Filter] = enumerate_filters(A)
        points = [point_name(A, F.prime) for F in self.filters]
        self.open_of_ideal: dict[int, Open] = {}
        names: dict[Open, str] = {}
        for i, ideal in enumerate(self.spec_frame.ideals):
            U = frozenset(x for x, F in enumerate(self.filters) if ideal.members & F.members)
            if U in self.open_of_ideal.values():
                raise InternalDisagreementError(f"two radical ideals of {A.name} give the open {sorted(U)}")
            self.open_of_ideal[i] = U
            if U and len(U) < len(points):
                names[U] = "D" + generator_label(A, ideal)
        self.space = FiniteSpace(points, self.open_of_ideal.values(), names)
        frame_points = points_of_frame(self.spec_frame.frame)
        if len(frame_points) != len(self.filters):
            raise InternalDisagreementError(
                f"{len(frame_points)} points of the frame but {len(self.filters)} filters of {A.name}"
            )
        if find_frame_isomorphism(self.space.frame, self.spec_frame.frame) is None:
            raise InternalDisagreementError(f"opens of Spec({A.name}) are not isomorphic to its radical ideals")
        self.localizations: dict[int, Localization] = {
            x: localize(A, F.members) for x, F in enumerate(self.filters)
        }
        self._module_localizations: dict[int, tuple[FinModule, dict[int, ModuleLocalization]]] = {}
        self.tildes: dict[int, Sheaf] = {}
        logger.info("✅ Spec(%s): %d frame elements, %d points", A.name, self.spec_frame.frame.size, len(points))

    def basic_open(self, f: int) -> Open:
        return self.open_of_ideal[self.spec_frame.element_of(radical(self.ring, principal_ideal(self.ring, f)))]

    def stalk_ring(self, x: int) -> FinRing:
        return self.localizations[x].ring

    def canonical_section(self, U: Open, a: int) -> tuple:
        """The image of a ∈ A in Õ(U)"""
        return tuple((x, self.localizations[x].canonical(a)) for x in sorted(U))

    def module_localizations(self, M: FinModule) -> dict[int, ModuleLocalization]:
        key = id(M)
        if key not in self._module_localizations:
            if M.ring is not self.ring:
                raise RingError(f"module {M.name} is not over {self.ring.name}")
            self._module_localizations[key] = (
                M, {x: localize_module(M, loc) for x, loc in self.localizations.items()}
            )
        return self._module_localizations[key][1]


@lru_cache(maxsize=64)
def spectrum(A: FinRing) -> Spectrum:
    return Spectrum(A)


def spec_space(A: FinRing) -> tuple[FiniteSpace, dict[int, Open]]:
    """The space of filters and the map from frame elements to opens"""
    spec = spectrum(A)
    return spec.space, dict(spec.open_of_ideal)


# ===== Structure sheaf and tilde =====

@lru_cache(maxsize=64)
def structure_sheaf(A: FinRing) -> Sheaf:
    """A̲ localized at the generic filter; the stalk at x is A[F_x⁻¹]"""
    spec = spectrum(A)
    X = spec.space
    loc = spec.localizations

    def germ_restrict(x: int, y: int, g: int) -> int:
        a, s = loc[x].representatives[g]
        return loc[y].fraction(a, s)

    O = from_stalks(
        "O",
        X,
        {x: tuple(loc[x].ring.elements) for x in range(len(X))},
        germ_restrict,
        lambda x, g: loc[x].ring.label(g),
    )
    O.ring_stalks = {x: loc[x].ring for x in range(len(X))}
    return O


def tilde(M: FinModule) -> Sheaf:
    """M̲ localized at the generic filter, a sheaf of Õ-modules"""
    spec = spectrum(M.ring)
    if id(M) not in spec.tildes:
        spec.tildes[id(M)] = _build_tilde(spec, M)
    return spec.tildes[id(M)]


def _build_tilde(spec: Spectrum, M: FinModule) -> Sheaf:
    X = spec.space
    mloc = spec.module_localizations(M)

    def germ_restrict(x: int, y: int, g: int) -> int:
        m, s = mloc[x].representatives[g]
        return mloc[y].class_of[(m, s)]

    sheaf = from_stalks(
        f"{M.name}~",
        X,
        {x: tuple(mloc[x].module.elements) for x in range(len(X))},
        germ_restrict,
        lambda x, g: mloc[x].module.label(g),
    )
    sheaf.module_stalks = {x: mloc[x].module for x in range(len(X))}
    sheaf.base = "O"
    return sheaf


def induced_map(alpha: ModuleMap) -> Callable[[Open, tuple], tuple]:
    """α~ on sections: the germ (m, s) goes to (α(m), s)"""
    spec = spectrum(alpha.source.ring)
    source = spec.module_localizations(alpha.source)
    target = spec.module_localizations(alpha.target)

    def apply(U: Open, section: tuple) -> tuple:
        image = []
        for x, g in section:
            m, s = source[x].representatives[g]
            image.append((x, target[x].class_of[(alpha(m), s)]))
        return tuple(image)

    return apply


def sections_ring(F: Sheaf, U: Open, name: str = "") -> FinRing:
    """F(U) with componentwise operations, for a sheaf of rings F"""
    elements = list(F.sections(U))
    index = {s: i for i, s in enumerate(elements)}
    n = len(elements)
    add = np.array([[index[F.add(s, t)] for t in elements] for s in elements], dtype=np.int64).reshape(n, n)
    mul = np.array([[index[F.mul(s, t)] for t in elements] for s in elements], dtype=np.int64).reshape(n, n)
    return FinRing(
        name or f"{F.name}({F.space.label(U)})",
        [F.label(s) for s in elements],
        add,
        mul,
        zero=index[F.zero(U)],
        one=index[F.one(U)],
    )


def check_structure_sheaf(A: FinRing) -> list[str]:
    """Problems found comparing Õ(U) with A[S_U⁻¹], S_U = {f : U ⊆ D(f)}"""
    spec = spectrum(A)
    O = structure_sheaf(A)
    problems = []
    for U in spec.space.opens:
        S = [f for f in A.elements if U <= spec.basic_open(f)]
        expected = localize(A, S).ring
        actual = sections_ring(O, U)
        if find_ring_isomorphism(actual, expected) is None:
            problems.append(f"O({spec.space.label(U)}) has {actual.size} elements, A[S^-1] has {expected.size}")
    return problems


# ===== Environments =====

def ring_macros(sort: Sort = O_SORT) -> dict[str, Macro]:
    s = {"s": sort}
    return {
        "inv": Macro((("s", sort),), parse(f"exists t:{sort.name}. s*t = 1", s)),
        "nilp": Macro((("s", sort),), parse("bigvee[n=0..] s^n = 0", s)),
    }


def constant_section(U: Open, a: int) -> tuple:
    return tuple((x, a) for x in sorted(U))


def generic_filter_subsheaf(A: FinRing, constant: Sheaf) -> Subsheaf:
    """Sections whose germ at every point x lies in the filter F_x"""
    spec = spectrum(A)
    selected = {
        U: frozenset(s for s in constant.sections(U) if all(g in spec.filters[x] for x, g in s))
        for U in spec.space.opens
    }
    return Subsheaf(constant, selected, "F")


def spectrum_environment(
    A: FinRing,
    modules: Optional[Mapping[str, FinModule]] = None,
    maps: Optional[Mapping[str, tuple[ModuleMap, str, str]]] = None,
) -> Environment:
    """O = Õ, A = A̲ with its generic filter F, macros inv/nilp, schema bound |A|"""
    spec = spectrum(A)
    X = spec.space
    env = Environment(X)
    env.add_sheaf("O", structure_sheaf(A))
    constant = constant_ring_sheaf(X, A, "A")
    env.add_sheaf("A", constant)
    env.add_subsheaf("F", generic_filter_subsheaf(A, constant))
    for name, macro in ring_macros().items():
        env.add_predicate(name, macro)
    for a in A.elements:
        label = A.label(a)
        if _NAME.fullmatch(label):
            env.add_constant(label, "O", X.full, spec.canonical_section(X.full, a))
            env.add_constant(label, "A", X.full, constant_section(X.full, a))
    for name, M in (modules or {}).items():
        env.add_sheaf(name, tilde(M))
    for name, (alpha, source, target) in (maps or {}).items():
        apply = induced_map(alpha)
        env.add_function(FunctionSymbol(name, (source,), target, apply))
    env.set_schema_bound(A.size)
    return env


# ===== Generic filter =====

FILTER_AXIOMS = {
    "zero": "~(0 in F)",
    "one": "1 in F",
    "product-down": "forall x:A. forall y:A. x*y in F => x in F /\\ y in F",
    "product-up": "forall x:A. forall y:A. x in F /\\ y in F => x*y in F",
    "sum": "forall x:A. forall y:A. x + y in F => x in F \\/ y in F",
}


@dataclass
class GenericFilter:
    spectrum: Spectrum
    constant: Sheaf
    subsheaf: Subsheaf
    env: Environment = field(repr=False)

    def forces(self, U: Open, x: int) -> bool:
        """U ⊨ x ∈ F for the constant section x"""
        from toposforge.services.forcing import ForcingEngine

        return ForcingEngine(self.env).force(U, Member(Var("s", A_SORT), Const("F")), {"s": constant_section(U, x)})

    def law_violations(self) -> list[tuple[int, int]]:
        """Pairs (f, x) where D(f) ⊨ x ∈ F disagrees with f ∈ √(x)"""
        A = self.spectrum.ring
        bad = []
        for f in A.elements:
            U = self.spectrum.basic_open(f)
            for x in A.elements:
                if self.forces(U, x) != (f in radical(A, principal_ideal(A, x))):
                    bad.append((f, x))
        return bad

    def failing_axioms(self) -> list[str]:
        from toposforge.services.forcing import ForcingEngine

        engine = ForcingEngine(self.env)
        return [
            name for name, text in FILTER_AXIOMS.items()
            if not engine.force(self.spectrum.space.full, parse(text))
        ]


def generic_filter(A: FinRing) -> GenericFilter:
    spec = spectrum(A)
    env = spectrum_environment(A)
    G = GenericFilter(spec, env.sheaves["A"], env.subsheaves["F"], env)
    failing = G.failing_axioms()
    if failing:
        raise InternalDisagreementError(f"generic filter of {A.name} violates {', '.join(failing)}")
    return G


def _ideal_environment(A: FinRing, formula: Formula, var: str, parameters: Mapping[str, int]) -> Environment:
    if "F" in constants_in(formula):
        raise ConstantParameterError("the ideal may only refer to constant sheaves")
    env = spectrum_environment(A)
    X = env.space
    for name, value in parameters.items():
        env.add_constant(name, "A", X.full, constant_section(X.full, value))
    env.add_subsheaf("I", comprehend(env.sheaves["A"], formula, env, var))
    return env


def _ideal_formula(formula: Formula | str, var: str) -> Formula:
    if isinstance(formula, str):
        return parse(formula, {var: A_SORT})
    return formula


def generic_metaproperty_counterexample(
    A: FinRing, formula: Formula | str, var: str = "a", parameters: Optional[Mapping[str, int]] = None
) -> Optional[int]:
    """An f with D(f) ⊨ "I ∩ F inhabited" but no n ≤ |A| with D(f) ⊨ fⁿ ∈ I"""
    from toposforge.services.forcing import ForcingEngine

    phi = _ideal_formula(formula, var)
    env = _ideal_environment(A, phi, var, parameters or {})
    engine = ForcingEngine(env)
    spec = spectrum(A)
    meets = parse("exists x:A. x in I /\\ x in F")
    member = Member(Var("s", A_SORT), Const("I"))
    for f in A.elements:
        U = spec.basic_open(f)
        if not engine.force(U, meets):
            continue
        if not any(engine.force(U, member, {"s": constant_section(U, A.power(f, n))}) for n in range(A.size + 1)):
            return f
    return None


def check_generic_metaproperty(
    A: FinRing, formula: Formula | str, var: str = "a", parameters: Optional[Mapping[str, int]] = None
) -> bool:
    return generic_metaproperty_counterexample(A, formula, var, parameters) is None


def check_stronger_generic_statement(A: FinRing, g: int, f: Optional[int] = None) -> bool:
    """D(f) ⊨ ("(g) ∩ F inhabited" ⇒ ⋁ₙ fⁿ ∈ (g)); fails when g is neither nilpotent nor invertible"""
    from toposforge.services.forcing import ForcingEngine

    f = A.one if f is None else f
    phi = parse("exists b:A. a = b*g", {"a": A_SORT})
    env = _ideal_environment(A, phi, "a", {"g": g, "f": f})
    statement = parse("(exists x:A. x in I /\\ x in F) => bigvee[n=0..] f^n in I")
    return ForcingEngine(env).force(spectrum(A).basic_open(f), statement)


# ===== Internal properties of Õ =====

RING_PROPERTIES = {
    "local": "~(1 = 0) /\\ (forall s:O. forall t:O. inv(s + t) => inv(s) \\/ inv(t))",
    "almost-field": "forall s:O. ~inv(s) => nilp(s)",
    "field": "forall s:O. ~inv(s) => s = 0",
    "reduced": "forall s:O. nilp(s) => s = 0",
    "dimension-0": "forall x:O. exists b:O. nilp(x*b) /\\ (exists u:O. exists v:O. u*x + v*b = 1)",
}


def internal_ring_properties(A: FinRing) -> dict[str, bool]:
    from toposforge.services.forcing import ForcingEngine

    env = spectrum_environment(A)
    engine = ForcingEngine(env)
    return {name: engine.force(env.space.full, parse(text)) for name, text in RING_PROPERTIES.items()}


def expected_ring_properties(A: FinRing) -> dict[str, bool]:
    """The classical side: stalks are local artinian, reduced iff A is"""
    spec = spectrum(A)
    stalks = [spec.stalk_ring(x) for x in range(len(spec.space))]
    return {
        "local": all(is_local(R) for R in stalks),
        "almost-field": all(all(is_invertible(R, s) or is_nilpotent(R, s) for s in R.elements) for R in stalks),
        "field": is_reduced(A),
        "reduced": is_reduced(A),
        "dimension-0": all(krull_dim_leq(R, 0).holds for R in stalks),
    }


# ===== Prime-ideal elimination =====

@dataclass(frozen=True)
class EliminationRow:
    statement: str
    internal: bool
    classical: bool

    @property
    def agrees(self) -> bool:
        return self.internal == self.classical


def _generated_formula(k: int) -> str:
    if k == 0:
        return "forall m:M. m = 0"
    gens = ", ".join(f"g{i}" for i in range(1, k + 1))
    coeffs = ", ".join(f"c{i}" for i in range(1, k + 1))
    combination = " + ".join(f"c{i}*g{i}" for i in range(1, k + 1))
    return f"exists {gens}:M. forall m:M. exists {coeffs}:O. m = {combination}"


def prime_elimination_table(A: FinRing, M: FinModule, N: FinModule, alpha: ModuleMap) -> list[EliminationRow]:
    """Internal statements about the generic filter against their classical meaning"""
    from toposforge.services.forcing import ForcingEngine

    spec = spectrum(A)
    env = spectrum_environment(A, {"M": M, "N": N}, {"alpha": (alpha, "M", "N")})
    engine = ForcingEngine(env)
    X = spec.space.full
    c_A = lambda a: constant_section(X, a)
    rows: list[EliminationRow] = []

    not_in = parse("~(x in F)", {"x": A_SORT})
    for x in A.elements:
        rows.append(EliminationRow(f"{A.label(x)} not in F", engine.force(X, not_in, {"x": c_A(x)}), is_nilpotent(A, x)))

    follows = parse("x in F => y in F", {"x": A_SORT, "y": A_SORT})
    for x in A.elements:
        for y in A.elements:
            rows.append(EliminationRow(
                f"{A.label(x)} in F => {A.label(y)} in F",
                engine.force(X, follows, {"x": c_A(x), "y": c_A(y)}),
                x in radical(A, principal_ideal(A, y)),
            ))

    regular = parse("forall s:O. c*s = 0 => s = 0", {"c": O_SORT})
    for x in A.elements:
        rows.append(EliminationRow(
            f"{A.label(x)} regular in O",
            engine.force(X, regular, {"c": spec.canonical_section(X, x)}),
            all(A.mul(x, a) != A.zero or a == A.zero for a in A.elements),
        ))

    rows.append(EliminationRow("O reduced", engine.force(X, parse(RING_PROPERTIES["reduced"])), is_reduced(A)))
    rows.append(EliminationRow("M~ = 0", engine.force(X, parse("forall m:M. m = 0")), M.size == 1))
    k = min_generators(M)
    if k <= 2:
        rows.append(EliminationRow(f"M~ generated by {k} elements", engine.force(X, parse(_generated_formula(k))), True))
    rows.append(EliminationRow(
        "alpha~ injective",
        engine.force(X, parse("forall m:M. alpha(m) = 0 => m = 0")),
        alpha.is_injective(),
    ))
    rows.append(EliminationRow(
        "alpha~ surjective",
        engine.force(X, parse("forall n:N. exists m:M. alpha(m) = n")),
        alpha.is_surjective(),
    ))
    return rows


# ===== Quasicoherence =====

QUASICOHERENCE = "forall f:O. forall s:M. (inv(f) => s in G) => bigvee[n=0..] f^n*s in G"


def check_internal_quasicoherence(A: FinRing, M: FinModule, G: Subsheaf | Sequence[int]) -> bool:
    """X ⊨ ∀f ∀s. (f inv ⇒ s ∈ G) ⇒ ⋁_{n≤|A|} fⁿs ∈ G for a subsheaf G of M~.

    A plain member list N ⊆ M stands for the subsheaf Ñ.
    """
    from toposforge.services.forcing import ForcingEngine

    env = spectrum_environment(A, {"M": M})
    if not isinstance(G, Subsheaf):
        G = tilde_submodule(M, G, env.sheaves["M"])
    env.add_subsheaf("G", G)
    return ForcingEngine(env).force(env.space.full, parse(QUASICOHERENCE))


def tilde_submodule(M: FinModule, members: Sequence[int], sheaf: Optional[Sheaf] = None) -> Subsheaf:
    """Ñ ⊆ M~: germs that have a representative (n, s) with n ∈ N"""
    spec = spectrum(M.ring)
    mloc = spec.module_localizations(M)
    sheaf = sheaf or tilde(M)
    members = frozenset(members)
    inside = {
        x: frozenset(mloc[x].class_of[(n, s)] for n in members for s in spec.localizations[x].multiplicative)
        for x in mloc
    }
    selected = {
        U: frozenset(s for s in sheaf.sections(U) if all(g in inside[x] for x, g in s))
        for U in spec.space.opens
    }
    return Subsheaf(sheaf, selected, "N~")


# ===== Local spectrum =====

@dataclass
class LocalSpecFrame:
    base: FinRing
    algebra: FinRing
    structure: RingMap
    ideals: tuple[Ideal, ...]
    frame: Frame
    env: Environment = field(repr=False)


def _condition_violation(ctx_env: Environment, phi: RingMap, ideal: frozenset[int]) -> Optional[tuple[int, int]]:
    """(f, s) with (f inv ⇒ s ∈ 𝔞) forced over Spec(base) but φ(f)s ∉ 𝔞"""
    from toposforge.services.forcing import ForcingEngine

    engine = ForcingEngine(ctx_env)
    R, A = phi.source, phi.target
    X = ctx_env.space.full
    invertible = Pred("inv", (Var("f", O_SORT),))
    spec = spectrum(R)
    for f in R.elements:
        section = {"f": spec.canonical_section(X, f)}
        for s in A.elements:
            premise = Implies(invertible, Top() if s in ideal else Bot())
            if engine.force(X, premise, section) and A.mul(phi(f), s) not in ideal:
                return f, s
    return None


def _base_environment(R: FinRing) -> Environment:
    env = Environment(spectrum(R).space)
    env.add_sheaf("O", structure_sheaf(R))
    for name, macro in ring_macros().items():
        env.add_predicate(name, macro)
    env.set_schema_bound(R.size)
    return env


def local_spectrum_frame(R: FinRing, phi: RingMap) -> LocalSpecFrame:
    """Radical ideals 𝔞 of A with (f inv ⇒ s ∈ 𝔞) ⇒ φ(f)s ∈ 𝔞 forced over Spec(R)"""
    if not is_local(R):
        raise NotLocalError(f"{R.name} is not a local ring")
    A = phi.target
    env = _base_environment(R)
    ideals = tuple(i for i in radical_ideals(A) if _condition_violation(env, phi, i.members) is None)
    frame = Frame.from_order(
        [generator_label(A, i) for i in ideals],
        lambda a, b: ideals[a].members <= ideals[b].members,
    )
    ctx = LocalSpecFrame(R, A, phi, ideals, frame, env)
    for a in frame.elements:
        for b in frame.elements:
            join = quasicoherator(ctx, radical(A, ideal_generated(A, ideals[a].members | ideals[b].members)))
            if ideals[frame.join(a, b)].members != join.members:
                raise InternalDisagreementError(
                    f"join of {frame.label(a)} and {frame.label(b)} is not the quasicoherator of their sum"
                )
            if ideals[frame.meet(a, b)].members != ideals[a].members & ideals[b].members:
                raise InternalDisagreementError(f"meet of {frame.label(a)} and {frame.label(b)} is not ∩")
    logger.info("✅ local spectrum of %s over %s: %d elements", A.name, R.name, frame.size)
    return ctx


def quasicoherator(ctx: LocalSpecFrame, ideal: Ideal) -> Ideal:
    """Least radical ideal containing I that satisfies the local-spectrum condition"""
    from toposforge.services.forcing import ForcingEngine

    A, phi = ctx.algebra, ctx.structure
    R = ctx.base
    engine = ForcingEngine(ctx.env)
    X = ctx.env.space.full
    spec = spectrum(R)
    invertible = Pred("inv", (Var("f", O_SORT),))
    current = radical(A, ideal_generated(A, ideal.members))
    steps = 0
    while True:
        extra = {
            A.mul(phi(f), s)
            for f in R.elements
            for s in A.elements
            if engine.force(X, Implies(invertible, Top() if s in current.members else Bot()),
                            {"f": spec.canonical_section(X, f)})
        }
        following = radical(A, ideal_generated(A, current.members | extra))
        steps += 1
        if following.members == current.members:
            logger.debug("quasicoherator reached its fixed point after %d steps", steps)
            return current
        current = following


def filters_over_units(R: FinRing, phi: RingMap) -> list[Filter]:
    """Filters G of A with φ⁻¹(G) equal to the units of R"""
    unit_set = units(R)
    return [
        G for G in enumerate_filters(phi.target)
        if frozenset(f for f in R.elements if phi(f) in G.members) == unit_set
    ]


# ===== Summary =====

def describe_spectrum(A: FinRing) -> SpecResponse:
    """Frame elements as generator lists, points with their stalks, section counts of Õ"""
    spec = spectrum(A)
    O = structure_sheaf(A)
    X = spec.space
    points = [
        f"{X.points[x]}: stalk {spec.stalk_ring(x).name} ({spec.stalk_ring(x).size} elements)"
        for x in range(len(X))
    ]
    sections = {X.label(U): len(O.sections(U)) for U in sorted(X.opens, key=open_key)}
    return SpecResponse(
        ring=A.name, size=A.size, frame=list(spec.spec_frame.frame.labels), points=points, sections=sections
    )
