"""Sheaves of finite sets on finite spaces, and the evaluation environment.

A sheaf is given by a function listing its sections over each open and a
restriction function. Sheaves presented by stalks store a section over U as
the tuple of its germs ``((x, germ), ...)`` at the points of U, which is how
constant sheaves, structure sheaves and plus constructions are built.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Mapping, Optional, Sequence

from toposforge.core.errors import (
    GluingError,
    InternalDisagreementError,
    NotFunctorialError,
    ResolutionError,
    SheafError,
    SortError,
)
from toposforge.services.finring import FinModule, FinRing
from toposforge.services.formula import (
    OMEGA, And, Eq, Exists, Forall, Formula, Implies, Member, Modal, Sort, Var,
    free_vars, fresh_name, names_in, substitute,
)
from toposforge.services.frame import FiniteSpace, Nucleus, Open, open_key

logger = logging.getLogger(__name__)

Section = Hashable


def section_key(s: Any) -> tuple:
    """Total order on section values that does not depend on hashing"""
    if isinstance(s, bool):
        return (0, int(s))
    if isinstance(s, int):
        return (0, s)
    if isinstance(s, str):
        return (1, s)
    if isinstance(s, frozenset):
        return (3, tuple(sorted(section_key(e) for e in s)))
    if isinstance(s, tuple):
        return (2, tuple(section_key(e) for e in s))
    return (4, repr(s))


class Sheaf:
    """A sheaf of finite sets on a finite space"""

    def __init__(
        self,
        name: str,
        space: FiniteSpace,
        sections_fn: Callable[[Open], Sequence[Section]],
        restrict_fn: Callable[[Section, Open, Open], Section],
        label_fn: Optional[Callable[[Section], str]] = None,
    ):
        self.name = name
        self.space = space
        self._sections_fn = sections_fn
        self._restrict_fn = restrict_fn
        self._label_fn = label_fn or str
        self._sections: dict[Open, tuple[Section, ...]] = {}
        self._restrict_cache: dict[tuple, Section] = {}
        # ring / module structure, only for sheaves presented by stalks
        self.ring_stalks: Optional[dict[int, FinRing]] = None
        self.module_stalks: Optional[dict[int, FinModule]] = None
        self.base: Optional[str] = None

    def __repr__(self) -> str:
        return f"Sheaf({self.name!r})"

    def sections(self, U: Open) -> tuple[Section, ...]:
        U = frozenset(U)
        if U not in self._sections:
            if not self.space.is_open(U):
                raise SheafError(f"{self.space.label(U, force_points=True)} is not open")
            self._sections[U] = tuple(self._sections_fn(U))
        return self._sections[U]

    @property
    def global_sections(self) -> tuple[Section, ...]:
        return self.sections(self.space.full)

    def restrict(self, s: Section, U: Open, V: Open) -> Section:
        if U == V:
            return s
        key = (s, U, V)
        if key not in self._restrict_cache:
            self._restrict_cache[key] = self._restrict_fn(s, U, V)
        return self._restrict_cache[key]

    def label(self, s: Section) -> str:
        return self._label_fn(s)

    def find_section(self, label: str, U: Open) -> Section:
        for s in self.sections(U):
            if self.label(s) == label:
                return s
        raise ResolutionError(f"{self.name} has no section {label!r} over {self.space.label(U)}")

    # ----- algebraic structure -----

    @property
    def is_ring(self) -> bool:
        return self.ring_stalks is not None

    @property
    def is_module(self) -> bool:
        return self.module_stalks is not None

    def _stalk_algebra(self, x: int):
        if self.ring_stalks is not None:
            return self.ring_stalks[x]
        if self.module_stalks is not None:
            return self.module_stalks[x]
        raise SortError(f"{self.name} carries no algebraic structure")

    def add(self, s: Section, t: Section) -> Section:
        return tuple((x, self._stalk_algebra(x).add(g, h)) for (x, g), (_, h) in zip(s, t))

    def mul(self, s: Section, t: Section) -> Section:
        if self.ring_stalks is None:
            raise SortError(f"{self.name} is not a sheaf of rings")
        return tuple((x, self.ring_stalks[x].mul(g, h)) for (x, g), (_, h) in zip(s, t))

    def act(self, r: Section, m: Section) -> Section:
        if self.module_stalks is None:
            raise SortError(f"{self.name} is not a sheaf of modules")
        return tuple((x, self.module_stalks[x].act(g, h)) for (x, g), (_, h) in zip(r, m))

    def neg(self, s: Section) -> Section:
        return tuple((x, self._stalk_algebra(x).neg(g)) for x, g in s)

    def numeral(self, U: Open, k: int) -> Section:
        if self.ring_stalks is not None:
            return tuple((x, self.ring_stalks[x].numeral(k)) for x in sorted(U))
        if self.module_stalks is not None and k == 0:
            return tuple((x, self.module_stalks[x].zero) for x in sorted(U))
        raise SortError(f"numeral {k} has no meaning in {self.name}")

    def zero(self, U: Open) -> Section:
        return self.numeral(U, 0)

    def one(self, U: Open) -> Section:
        return self.numeral(U, 1)


# ===== Builders =====

def from_tables(
    name: str,
    space: FiniteSpace,
    sections: Mapping[Open, Sequence[str]],
    restrictions: Mapping[tuple[Open, Open], Mapping[str, str]],
) -> Sheaf:
    """A presheaf given by explicit section lists and restriction tables.

    Restrictions that are not listed are composed from listed ones; restriction
    to ∅ goes to the unique section there. The result still has to pass
    ``check_sheaf``.
    """
    table = {frozenset(U): tuple(v) for U, v in sections.items()}
    for U in space.opens:
        table.setdefault(U, ())
    maps = {(frozenset(U), frozenset(V)): dict(m) for (U, V), m in restrictions.items()}

    def restrict(s: str, U: Open, V: Open) -> str:
        if (U, V) in maps:
            return maps[(U, V)][s]
        if not V and len(table[V]) == 1:
            return table[V][0]
        for (A, W), m in sorted(maps.items(), key=lambda item: open_key(item[0][1])):
            if A == U and V < W:
                return restrict(m[s], W, V)
        raise NotFunctorialError(
            f"{name}: no restriction from {space.label(U)} to {space.label(V)}"
        )

    return Sheaf(name, space, lambda U: table[U], restrict)


def from_stalks(
    name: str,
    space: FiniteSpace,
    stalks: Mapping[int, Sequence[Section]],
    germ_restrict: Callable[[int, int, Section], Section],
    germ_label: Optional[Callable[[int, Section], str]] = None,
) -> Sheaf:
    """Sheaf whose sections over U are the compatible families of germs.

    ``stalks[x]`` lists F(U_x); ``germ_restrict(x, y, g)`` restricts a germ at
    x to the smaller minimal open U_y ⊆ U_x.
    """
    germ_label = germ_label or (lambda x, g: str(g))

    def families(U: Open) -> list[tuple]:
        order = sorted(U, key=lambda x: (-len(space.minimal_open(x)), x))
        found: list[tuple] = []

        def extend(position: int, assigned: dict[int, Section]) -> None:
            if position == len(order):
                found.append(tuple(sorted(assigned.items())))
                return
            x = order[position]
            if x in assigned:
                extend(position + 1, assigned)
                return
            for g in stalks[x]:
                candidate = dict(assigned)
                for y in space.minimal_open(x):
                    h = g if y == x else germ_restrict(x, y, g)
                    if candidate.get(y, h) != h:
                        break
                    candidate[y] = h
                else:
                    extend(position + 1, candidate)

        extend(0, {})
        return found

    def restrict(s: tuple, U: Open, V: Open) -> tuple:
        return tuple(pair for pair in s if pair[0] in V)

    def label(s: tuple) -> str:
        labels = [germ_label(x, g) for x, g in s]
        if labels and len(set(labels)) == 1:
            return labels[0]
        return "{" + ",".join(f"{space.points[x]}:{lab}" for (x, _), lab in zip(s, labels)) + "}"

    return Sheaf(name, space, families, restrict, label)


def constant_sheaf(space: FiniteSpace, values: Sequence[Section], name: str = "M") -> Sheaf:
    """Locally constant functions with values in a finite set"""
    values = tuple(values)
    return from_stalks(name, space, {x: values for x in range(len(space))}, lambda x, y, g: g)


def constant_ring_sheaf(space: FiniteSpace, ring: FinRing, name: str = "R") -> Sheaf:
    F = from_stalks(
        name,
        space,
        {x: tuple(ring.elements) for x in range(len(space))},
        lambda x, y, g: g,
        lambda x, g: ring.label(g),
    )
    F.ring_stalks = {x: ring for x in range(len(space))}
    return F


def constant_module_sheaf(space: FiniteSpace, module: FinModule, base: str, name: str = "M") -> Sheaf:
    F = from_stalks(
        name,
        space,
        {x: tuple(module.elements) for x in range(len(space))},
        lambda x, y, g: g,
        lambda x, g: module.label(g),
    )
    F.module_stalks = {x: module for x in range(len(space))}
    F.base = base
    return F


def singleton_sheaf(space: FiniteSpace, name: str = "1") -> Sheaf:
    return constant_sheaf(space, ("*",), name)


def omega_sheaf(space: FiniteSpace) -> Sheaf:
    """Ω: sections over U are the opens contained in U"""
    return Sheaf(
        "Omega",
        space,
        lambda U: tuple(space.opens_below(U)),
        lambda s, U, V: s & V,
        space.label,
    )


def power_object(F: Sheaf) -> Sheaf:
    """P(F): sections over U are the subsheaves of F|U.

    A subsheaf is stored by its values A_x ⊆ F(U_x) on minimal opens, as the
    tuple ``((x, A_x), ...)``.
    """
    X = F.space

    def subsheaves(U: Open) -> list[tuple]:
        order = sorted(U, key=lambda x: (len(X.minimal_open(x)), x))
        found: list[tuple] = []

        def extend(position: int, chosen: dict[int, frozenset]) -> None:
            if position == len(order):
                found.append(tuple(sorted(chosen.items())))
                return
            x = order[position]
            W = X.minimal_open(x)
            twin = next((y for y in chosen if X.minimal_open(y) == W), None)
            if twin is not None:
                extend(position + 1, {**chosen, x: chosen[twin]})
                return
            below = [y for y in chosen if X.minimal_open(y) < W]
            allowed = [
                s for s in F.sections(W)
                if all(F.restrict(s, W, X.minimal_open(y)) in chosen[y] for y in below)
            ]
            for k in range(len(allowed) + 1):
                for subset in itertools.combinations(allowed, k):
                    extend(position + 1, {**chosen, x: frozenset(subset)})

        extend(0, {})
        return sorted(found, key=section_key)

    def restrict(A: tuple, U: Open, V: Open) -> tuple:
        return tuple(pair for pair in A if pair[0] in V)

    def label(A: tuple) -> str:
        parts = []
        for x, members in A:
            inner = ",".join(sorted(F.label(s) for s in members))
            parts.append(f"{X.points[x]}:{{{inner}}}")
        return "{" + ";".join(parts) + "}"

    return Sheaf(f"P({F.name})", X, subsheaves, restrict, label)


def power_member(F: Sheaf, s: Section, A: tuple, U: Open) -> bool:
    """s ∈ A over U, for A a section of P(F) over U"""
    X = F.space
    return all(F.restrict(s, U, X.minimal_open(x)) in members for x, members in A)


def principal_subsheaf(F: Sheaf, s: Section, U: Open) -> tuple:
    """The subsheaf {s} of F|U as a section of P(F)"""
    X = F.space
    return tuple((y, frozenset({F.restrict(s, U, X.minimal_open(y))})) for y in sorted(U))


def stalk(F: Sheaf, x: int) -> tuple[Section, ...]:
    return F.sections(F.space.minimal_open(x))


@dataclass
class SheafMap:
    """A morphism of sheaves, given sectionwise"""

    source: Sheaf
    target: Sheaf
    apply: Callable[[Section, Open], Section]

    def __call__(self, s: Section, U: Open) -> Section:
        return self.apply(s, U)

    def is_injective(self) -> bool:
        return all(
            len({self(s, U) for s in self.source.sections(U)}) == len(self.source.sections(U))
            for U in self.source.space.opens
        )

    def is_bijective(self) -> bool:
        return self.is_injective() and all(
            {self(s, U) for s in self.source.sections(U)} == set(self.target.sections(U))
            for U in self.source.space.opens
        )


# ===== Subsheaves =====

@dataclass
class Subsheaf:
    parent: Sheaf
    selected: dict[Open, frozenset]
    name: str = ""

    def contains(self, s: Section, U: Open) -> bool:
        return s in self.selected[frozenset(U)]

    def as_sheaf(self, name: Optional[str] = None) -> Sheaf:
        parent = self.parent
        return Sheaf(
            name or self.name or f"sub({parent.name})",
            parent.space,
            lambda U: tuple(s for s in parent.sections(U) if s in self.selected[U]),
            parent.restrict,
            parent.label,
        )

    def check(self) -> None:
        """Closed under restriction, and local along minimal opens"""
        X = self.parent.space
        for U in X.opens:
            for s in self.parent.sections(U):
                local = all(
                    self.parent.restrict(s, U, X.minimal_open(x)) in self.selected[X.minimal_open(x)] for x in U
                )
                if local != (s in self.selected[U]):
                    raise SheafError(
                        f"subsheaf {self.name} is not local at {self.parent.label(s)} over {X.label(U)}"
                    )


def comprehend(F: Sheaf, phi: Formula, env: "Environment", var: Optional[str] = None) -> Subsheaf:
    """{s : F | φ(s)} with selected(U) = {s ∈ F(U) | U ⊨ φ(s)}"""
    from toposforge.services.forcing import ForcingEngine

    candidates = sorted(free_vars(phi), key=lambda v: v[0])
    if var is None:
        if len(candidates) != 1:
            raise SortError(f"comprehension needs exactly one free variable, found {len(candidates)}")
        var = candidates[0][0]
    sorts = [sort for name, sort in candidates if name == var]
    if sorts and env.sheaf_for(sorts[0]) is not F:
        raise SortError(f"variable {var} has sort {sorts[0]}, not {F.name}")
    engine = ForcingEngine(env)
    selected = {
        U: frozenset(s for s in F.sections(U) if engine.force(U, phi, {var: s}))
        for U in F.space.opens
    }
    return Subsheaf(F, selected, f"{{{var}:{F.name} | ...}}")


def extension_by_empty(F: Sheaf, U0: Open) -> Subsheaf:
    """j_!(F|U0) = {x : F | U0}"""
    U0 = frozenset(U0)
    selected = {U: frozenset(F.sections(U)) if U <= U0 else frozenset() for U in F.space.opens}
    return Subsheaf(F, selected, f"j!({F.name})")


def extension_by_zero(F: Sheaf, U0: Open) -> Subsheaf:
    """{x : F | x = 0 ∨ U0} for a sheaf of modules or rings"""
    U0 = frozenset(U0)
    X = F.space

    def keep(s: Section, U: Open) -> bool:
        return all(
            x in U0 or F.restrict(s, U, X.minimal_open(x)) == F.zero(X.minimal_open(x)) for x in U
        )

    selected = {U: frozenset(s for s in F.sections(U) if keep(s, U)) for U in X.opens}
    return Subsheaf(F, selected, f"j!0({F.name})")


# ===== Validation =====

def matching_families(F: Sheaf, cover: Sequence[Open]) -> list[tuple]:
    """Families (s_i ∈ F(U_i)) agreeing on all pairwise overlaps"""
    found: list[tuple] = []

    def extend(position: int, chosen: list) -> None:
        if position == len(cover):
            found.append(tuple(chosen))
            return
        Ui = cover[position]
        for s in F.sections(Ui):
            if all(
                F.restrict(s, Ui, Ui & Uj) == F.restrict(t, Uj, Ui & Uj)
                for Uj, t in zip(cover, chosen)
            ):
                extend(position + 1, chosen + [s])

    extend(0, [])
    return found


def _covers(X: FiniteSpace, U: Open, exhaustive: bool) -> Iterable[tuple[Open, ...]]:
    minimal = tuple(sorted({X.minimal_open(x) for x in U}, key=open_key))
    yield minimal
    if exhaustive:
        proper = [V for V in X.opens_below(U) if V != U and V]
        for k in range(2, len(proper) + 1):
            for cover in itertools.combinations(proper, k):
                if frozenset().union(*cover) == U and cover != minimal:
                    yield cover


def check_sheaf(F: Sheaf, exhaustive: bool = False) -> Sheaf:
    """Validate the empty-section, functoriality and gluing conditions"""
    X = F.space
    if len(F.sections(X.empty)) != 1:
        raise SheafError(f"{F.name}: sections over the empty set must be a singleton")
    for U in X.opens:
        for s in F.sections(U):
            for V in X.opens_below(U):
                r = F.restrict(s, U, V)
                if r not in F.sections(V):
                    raise NotFunctorialError(f"{F.name}: restriction of {F.label(s)} to {X.label(V)} is not a section")
                for W in X.opens_below(V):
                    if F.restrict(r, V, W) != F.restrict(s, U, W):
                        raise NotFunctorialError(
                            f"{F.name}: restrictions {X.label(U)} -> {X.label(V)} -> {X.label(W)} do not compose"
                        )
    for U in X.opens:
        if not U:
            continue
        for cover in _covers(X, U, exhaustive):
            families = matching_families(F, cover)
            images = {}
            for s in F.sections(U):
                family = tuple(F.restrict(s, U, V) for V in cover)
                if family in images:
                    raise GluingError(
                        f"{F.name}: two sections over {X.label(U)} agree on the cover",
                        tuple(X.label(V) for V in cover),
                        tuple(F.label(t) for t in family),
                    )
                images[family] = s
            for family in families:
                if family not in images:
                    raise GluingError(
                        f"{F.name}: matching family over {X.label(U)} does not glue",
                        tuple(X.label(V) for V in cover),
                        tuple(F.label(t) for t, V in zip(family, cover)),
                    )
    return F


def find_sheaf_isomorphism(F: Sheaf, G: Sheaf) -> Optional[dict[Open, dict]]:
    """Bijections F(W) -> G(W) on minimal opens commuting with restriction"""
    X = F.space
    if G.space is not X and G.space.opens != X.opens:
        return None
    minimal = sorted(set(X.minimal_opens), key=open_key)
    chosen: dict[Open, dict] = {}

    def extend(position: int) -> bool:
        if position == len(minimal):
            return True
        W = minimal[position]
        source, target = F.sections(W), G.sections(W)
        if len(source) != len(target):
            return False
        below = [V for V in chosen if V < W]
        for image in itertools.permutations(target):
            bijection = dict(zip(source, image))
            if all(
                G.restrict(bijection[s], W, V) == chosen[V][F.restrict(s, W, V)]
                for s in source
                for V in below
            ):
                chosen[W] = bijection
                if extend(position + 1):
                    return True
                del chosen[W]
        return False

    return dict(chosen) if extend(0) else None


# ===== Internal conditions =====

def _singleton(S: Var, sort: Sort) -> Formula:
    x, y = Var("x", sort), Var("y", sort)
    return And(
        Exists("x", sort, Member(x, S)),
        Forall("x", sort, Forall("y", sort, Implies(And(Member(x, S), Member(y, S)), Eq(x, y)))),
    )


def _same_subset(S: Var, T: Var, sort: Sort) -> Formula:
    x = Var("x", sort)
    return Forall("x", sort, And(Implies(Member(x, S), Member(x, T)), Implies(Member(x, T), Member(x, S))))


def _scratch(F: Sheaf, j: Nucleus) -> tuple["Environment", Sort]:
    env = Environment(F.space)
    env.add_sheaf("F", F)
    env.add_nucleus("j", j)
    return env, Sort.sheaf("F")


def plus_construction(F: Sheaf, j: Nucleus) -> tuple[Sheaf, SheafMap]:
    """F⁺ = {S ⊆ F | □(S is a singleton)} / (S ~ T iff □(S = T)), with the unit F -> F⁺"""
    from toposforge.services.forcing import ForcingEngine

    X = F.space
    env, sort = _scratch(F, j)
    PF = env.sheaf_for(Sort.power(sort))
    engine = ForcingEngine(env)
    S, T = Var("S", Sort.power(sort)), Var("T", Sort.power(sort))
    boxed_singleton = Modal("j", _singleton(S, sort))
    boxed_equal = Modal("j", _same_subset(S, T, sort))

    classes: dict[Open, list[tuple]] = {}
    for W in sorted(set(X.minimal_opens), key=open_key):
        reps: list[tuple] = []
        for A in PF.sections(W):
            if not engine.force(W, boxed_singleton, {"S": A}):
                continue
            if not any(engine.force(W, boxed_equal, {"S": A, "T": r}) for r in reps):
                reps.append(A)
        classes[W] = reps

    cache: dict[tuple, tuple] = {}

    def class_of(A: tuple, W: Open) -> tuple:
        key = (A, W)
        if key not in cache:
            matches = [r for r in classes[W] if engine.force(W, boxed_equal, {"S": A, "T": r})]
            if len(matches) != 1:
                raise InternalDisagreementError(f"plus construction: {len(matches)} classes match over {X.label(W)}")
            cache[key] = matches[0]
        return cache[key]

    def germ_restrict(x: int, y: int, A: tuple) -> tuple:
        Wx, Wy = X.minimal_open(x), X.minimal_open(y)
        return class_of(PF.restrict(A, Wx, Wy), Wy)

    plus = from_stalks(
        f"{F.name}+",
        X,
        {x: tuple(classes[X.minimal_open(x)]) for x in range(len(X))},
        germ_restrict,
        lambda x, A: PF.label(A),
    )

    def unit(s: Section, U: Open) -> tuple:
        return tuple(
            (x, class_of(principal_subsheaf(F, F.restrict(s, U, X.minimal_open(x)), X.minimal_open(x)), X.minimal_open(x)))
            for x in sorted(U)
        )

    logger.debug("plus construction of %s along %s done", F.name, j.label)
    return plus, SheafMap(F, plus, unit)


def sheafify(F: Sheaf, j: Nucleus) -> tuple[Sheaf, SheafMap]:
    """F⁺⁺ with the composite unit F -> F⁺ -> F⁺⁺"""
    once, first = plus_construction(F, j)
    twice, second = plus_construction(once, j)
    twice.name = f"a({F.name})"
    return twice, SheafMap(F, twice, lambda s, U: second(first(s, U), U))


def _force_at_whole_space(F: Sheaf, j: Nucleus, phi: Formula) -> bool:
    from toposforge.services.forcing import ForcingEngine

    env, _ = _scratch(F, j)
    return ForcingEngine(env).force(F.space.full, phi)


def box_separated_formula(sort: Sort, nucleus: str = "j") -> Formula:
    x, y = Var("x", sort), Var("y", sort)
    return Forall("x", sort, Forall("y", sort, Implies(Modal(nucleus, Eq(x, y)), Eq(x, y))))


def box_sheaf_formula(sort: Sort, nucleus: str = "j") -> Formula:
    S = Var("S", Sort.power(sort))
    x = Var("x", sort)
    gluing = Forall("S", Sort.power(sort), Implies(
        Modal(nucleus, _singleton(S, sort)), Exists("x", sort, Modal(nucleus, Member(x, S)))))
    return And(box_separated_formula(sort, nucleus), gluing)


def is_box_separated(F: Sheaf, j: Nucleus) -> bool:
    return _force_at_whole_space(F, j, box_separated_formula(Sort.sheaf("F")))


def is_box_sheaf(F: Sheaf, j: Nucleus) -> bool:
    return _force_at_whole_space(F, j, box_sheaf_formula(Sort.sheaf("F")))


@dataclass
class FlabbinessReport:
    surjective_restrictions: bool
    locally_extendable: bool
    internal: bool


def flabby_formula(sort: Sort) -> Formula:
    """∀K ⊆ F. (K has at most one element) ⇒ ∃s. ((K inhabited) ⇒ s ∈ K)"""
    K = Var("K", Sort.power(sort))
    s, t = Var("s", sort), Var("t", sort)
    subsingleton = Forall("s", sort, Forall("t", sort, Implies(And(Member(s, K), Member(t, K)), Eq(s, t))))
    inhabited = Exists("t", sort, Member(t, K))
    return Forall("K", Sort.power(sort), Implies(subsingleton, Exists("s", sort, Implies(inhabited, Member(s, K)))))


def flabbiness(F: Sheaf) -> FlabbinessReport:
    from toposforge.services.forcing import ForcingEngine

    X = F.space
    surjective = all(
        {F.restrict(s, X.full, U) for s in F.global_sections} == set(F.sections(U)) for U in X.opens
    )
    extendable = all(
        any(F.restrict(t, U | X.minimal_open(x), U) == s for t in F.sections(U | X.minimal_open(x)))
        for U in X.opens
        for s in F.sections(U)
        for x in range(len(X))
    )
    env = Environment(X)
    env.add_sheaf("F", F)
    internal = ForcingEngine(env).force(X.full, flabby_formula(Sort.sheaf("F")))
    return FlabbinessReport(surjective, extendable, internal)


def is_flabby(F: Sheaf) -> bool:
    report = flabbiness(F)
    if not report.surjective_restrictions == report.locally_extendable == report.internal:
        raise InternalDisagreementError(f"flabbiness of {F.name}: {report}")
    return report.surjective_restrictions


# ===== Environment =====

@dataclass
class FunctionSymbol:
    name: str
    args: tuple[str, ...]
    result: str
    apply: Callable[..., Section]


@dataclass(frozen=True)
class Macro:
    """A predicate defined by a formula in its parameters"""

    params: tuple[tuple[str, Sort], ...]
    body: Formula

    def expand(self, args: Sequence) -> Formula:
        if len(args) != len(self.params):
            raise SortError(f"predicate expects {len(self.params)} arguments, got {len(args)}")
        taken = names_in(self.body) | {p for p, _ in self.params}
        body = self.body
        placeholders = []
        for name, sort in self.params:
            fresh = fresh_name(f"_{name}", taken)
            taken.add(fresh)
            body = substitute(body, name, Var(fresh, sort))
            placeholders.append(fresh)
        for fresh, arg in zip(placeholders, args):
            body = substitute(body, fresh, arg)
        return body


@dataclass
class ConstantBinding:
    sheaf: str
    open: Open
    section: Section


class Environment:
    """Names visible to the forcing engine: sheaves, subsheaves, functions,
    nuclei, propositional constants, constant sections and predicates"""

    def __init__(self, space: FiniteSpace):
        self.space = space
        self.sheaves: dict[str, Sheaf] = {}
        self.subsheaves: dict[str, Subsheaf] = {}
        self.functions: dict[str, list[FunctionSymbol]] = {}
        self.nuclei: dict[str, Nucleus] = {}
        self.propositions: dict[str, Open] = {}
        self.constants: dict[str, list[ConstantBinding]] = {}
        self.predicates: dict[str, Macro] = {}
        self.schema_bound: Optional[int] = None
        self.revision = 0
        self._derived: dict[Sort, Sheaf] = {}
        for U, name in space.names.items():
            self.propositions[name] = U

    def _touch(self) -> None:
        self.revision += 1
        self._derived.clear()

    def add_sheaf(self, name: str, F: Sheaf) -> None:
        self.sheaves[name] = F
        if F.is_ring:
            self.add_function(FunctionSymbol("add", (name, name), name, lambda U, s, t: F.add(s, t)))
            self.add_function(FunctionSymbol("mul", (name, name), name, lambda U, s, t: F.mul(s, t)))
            self.add_function(FunctionSymbol("neg", (name,), name, lambda U, s: F.neg(s)))
            self.add_function(FunctionSymbol("sub", (name, name), name, lambda U, s, t: F.add(s, F.neg(t))))
        if F.is_module:
            self.add_function(FunctionSymbol("add", (name, name), name, lambda U, s, t: F.add(s, t)))
            self.add_function(FunctionSymbol("neg", (name,), name, lambda U, s: F.neg(s)))
            if F.base is not None:
                self.add_function(FunctionSymbol("mul", (F.base, name), name, lambda U, r, m: F.act(r, m)))
        self._touch()

    def add_subsheaf(self, name: str, sub: Subsheaf) -> None:
        sub.name = name
        self.subsheaves[name] = sub
        self._touch()

    def add_function(self, symbol: FunctionSymbol) -> None:
        overloads = [f for f in self.functions.get(symbol.name, []) if f.args != symbol.args]
        self.functions[symbol.name] = overloads + [symbol]
        self._touch()

    def add_nucleus(self, name: str, j: Nucleus) -> None:
        self.nuclei[name] = j
        self._touch()

    def add_proposition(self, name: str, U: Open) -> None:
        self.propositions[name] = frozenset(U)
        self._touch()

    def add_constant(self, name: str, sheaf: str, U: Open, section: Section) -> None:
        bindings = [b for b in self.constants.get(name, []) if b.sheaf != sheaf]
        self.constants[name] = bindings + [ConstantBinding(sheaf, frozenset(U), section)]
        self._touch()

    def add_predicate(self, name: str, macro: Macro) -> None:
        self.predicates[name] = macro
        self._touch()

    def set_schema_bound(self, bound: Optional[int]) -> None:
        self.schema_bound = bound
        self._touch()

    # ----- resolution -----

    def sheaf_for(self, sort: Sort) -> Sheaf:
        if sort.kind == "sheaf":
            try:
                return self.sheaves[sort.name]
            except KeyError:
                raise ResolutionError(f"unknown sheaf {sort.name!r}") from None
        if sort not in self._derived:
            if sort == OMEGA:
                self._derived[sort] = omega_sheaf(self.space)
            else:
                self._derived[sort] = power_object(self.sheaf_for(sort.inner))
        return self._derived[sort]

    def sheaf_name(self, F: Sheaf) -> Optional[str]:
        for name, G in self.sheaves.items():
            if G is F:
                return name
        return None

    def nucleus(self, name: str) -> Nucleus:
        try:
            return self.nuclei[name]
        except KeyError:
            raise ResolutionError(f"unknown nucleus {name!r}") from None

    def known_names(self) -> set[str]:
        """Everything a formula may mention besides its own variables"""
        return (
            set(self.constants) | set(self.propositions) | set(self.subsheaves)
            | {"X"}
        )

    def copy(self) -> "Environment":
        other = Environment(self.space)
        other.sheaves = dict(self.sheaves)
        other.subsheaves = dict(self.subsheaves)
        other.functions = {k: list(v) for k, v in self.functions.items()}
        other.nuclei = dict(self.nuclei)
        other.propositions = dict(self.propositions)
        other.constants = {k: list(v) for k, v in self.constants.items()}
        other.predicates = dict(self.predicates)
        other.schema_bound = self.schema_bound
        return other
