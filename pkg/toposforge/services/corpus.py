"""Deterministic random corpora: spaces, sheaves, formulas, nuclei and rings.

Everything is driven by a ``numpy.random.Generator`` seeded from the
settings, so a suite run with the same seed sees the same instances.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from toposforge.core.config import settings
from toposforge.services.finring import FinRing, make_ring
from toposforge.services.formula import (
    And, BigOr, Bot, Const, Eq, Exists, Forall, Formula, Implies, Member, Not, Or, PropConst, Sort,
    Top, Var,
)
from toposforge.services.frame import (
    FiniteSpace, Nucleus, discrete, indiscrete, nucleus_closed, nucleus_identity, nucleus_negneg,
    nucleus_open, nucleus_point, sierpinski, validate_space,
)
from toposforge.services.sheaf import Environment, Sheaf, constant_sheaf, from_stalks

logger = logging.getLogger(__name__)

CORPUS_RINGS = (
    "zmod 2", "zmod 3", "zmod 4", "zmod 6", "zmod 8", "zmod 9", "zmod 12",
    "polyquot (zmod 2) x^2+x+1",
    "product (zmod 2) (zmod 4)",
    "product (zmod 3) (zmod 3)",
)


def make_rng(seed: Optional[int] = None) -> np.random.Generator:
    return np.random.default_rng(settings.SEED if seed is None else seed)


# ===== Spaces =====

def vee() -> FiniteSpace:
    """Two closed points specializing a common generic point"""
    return validate_space(["g", "a", "b"], [[], ["g"], ["g", "a"], ["g", "b"], ["g", "a", "b"]])


def random_space(rng: np.random.Generator, max_points: int) -> FiniteSpace:
    """A T0 Alexandrov space from a random partial order, with two named opens"""
    n = int(rng.integers(1, max_points + 1))
    below = np.triu(rng.random((n, n)) < 0.35, k=1)
    closure = below | np.eye(n, dtype=bool)
    for k in range(n):
        closure |= closure[:, [k]] & closure[[k], :]
    points = [f"x{i}" for i in range(n)]
    opens = []
    for mask in itertools.product((False, True), repeat=n):
        members = np.flatnonzero(mask)
        # closed under generization: x ∈ U and closure[y, x] give y ∈ U
        if all(np.array(mask)[np.flatnonzero(closure[:, x])].all() for x in members):
            opens.append([points[i] for i in members])
    proper = [U for U in opens if 0 < len(U) < n]
    names = {}
    if proper:
        picks = rng.choice(len(proper), size=min(2, len(proper)), replace=False)
        names = {name: proper[int(i)] for name, i in zip(("U", "V"), picks)}
    return validate_space(points, opens, names)


def corpus_spaces(seed: Optional[int] = None, count: Optional[int] = None, max_points: Optional[int] = None) -> list[FiniteSpace]:
    """Fixed small spaces followed by random ones"""
    rng = make_rng(seed)
    count = settings.CORPUS_SIZE if count is None else count
    max_points = settings.MAX_POINTS if max_points is None else max_points
    fixed = [sierpinski({"U": ["eta"]}), discrete(1), discrete(2), indiscrete(2), vee()]
    fixed = [X for X in fixed if len(X) <= max_points]
    spaces = fixed + [random_space(rng, max_points) for _ in range(max(0, count - len(fixed)))]
    logger.debug("corpus of %d spaces", len(spaces))
    return spaces


# ===== Sheaves =====

def truncation_sheaf(space: FiniteSpace, sizes: Sequence[int], name: str = "F") -> Sheaf:
    """Stalk {0..k_x-1} at x; restriction g ↦ min(g, k_y - 1).

    Requires k_y ≤ k_x whenever y lies in the minimal open of x.
    """
    return from_stalks(
        name, space, {x: tuple(range(sizes[x])) for x in range(len(space))},
        lambda x, y, g: min(g, sizes[y] - 1),
    )


def subconstant_sheaf(space: FiniteSpace, values: Sequence[frozenset], name: str = "F") -> Sheaf:
    """Locally constant functions taking values in V_x at x, with V_x ⊆ V_y for y ∈ U_x"""
    return from_stalks(
        name, space, {x: tuple(sorted(values[x])) for x in range(len(space))},
        lambda x, y, g: g,
    )


def random_sheaf(rng: np.random.Generator, space: FiniteSpace, max_stalk: int = 3, name: str = "F") -> Sheaf:
    n = len(space)
    kind = int(rng.integers(0, 3))
    if kind == 0 or n == 0:
        return constant_sheaf(space, tuple(range(int(rng.integers(1, max_stalk + 1)))), name)
    owners = [[w for w in range(n) if x in space.minimal_open(w)] for x in range(n)]
    if kind == 1:
        base = rng.integers(1, max_stalk + 1, size=n)
        sizes = [int(min(base[w] for w in owners[x])) for x in range(n)]
        return truncation_sheaf(space, sizes, name)
    pools = [frozenset(int(v) for v in np.flatnonzero(rng.random(max_stalk) < 0.7)) for _ in range(n)]
    values = [frozenset.intersection(*[pools[w] for w in space.minimal_open(x)]) for x in range(n)]
    return subconstant_sheaf(space, values, name)


def random_environment(rng: np.random.Generator, space: FiniteSpace, max_stalk: int = 3) -> Environment:
    """Sheaf F with a global constant c when F has global sections"""
    env = Environment(space)
    F = random_sheaf(rng, space, max_stalk)
    env.add_sheaf("F", F)
    sections = F.global_sections
    if sections:
        env.add_constant("c", "F", space.full, sections[int(rng.integers(0, len(sections)))])
    return env


def random_nucleus(rng: np.random.Generator, space: FiniteSpace) -> Nucleus:
    kind = int(rng.integers(0, 5))
    if kind == 0 or len(space) == 0:
        return nucleus_negneg(space)
    if kind == 1:
        return nucleus_open(space, space.opens[int(rng.integers(0, len(space.opens)))])
    if kind == 2:
        U = space.opens[int(rng.integers(0, len(space.opens)))]
        return nucleus_closed(space, space.full - U)
    if kind == 3:
        return nucleus_point(space, int(rng.integers(0, len(space))))
    return nucleus_identity(space.frame)


# ===== Formulas =====

@dataclass
class FormulaGenerator:
    """Random well-sorted formulas over an environment"""

    rng: np.random.Generator
    env: Environment
    geometric: bool = False
    quantify: bool = True

    def _atoms(self, scope: Sequence[tuple[str, Sort]]) -> list[Formula]:
        atoms: list[Formula] = [Top(), Bot()]
        atoms += [PropConst(Const(name)) for name in sorted(self.env.propositions)]
        for sheaf_name in sorted(self.env.sheaves):
            sort = Sort.sheaf(sheaf_name)
            terms = [Var(n, s) for n, s in scope if s == sort]
            terms += [Const(c) for c, bs in sorted(self.env.constants.items()) if any(b.sheaf == sheaf_name for b in bs)]
            atoms += [Eq(a, b) for a, b in itertools.combinations_with_replacement(terms, 2)]
            for sub_name, sub in sorted(self.env.subsheaves.items()):
                if sub.parent is self.env.sheaves[sheaf_name]:
                    atoms += [Member(t, Const(sub_name)) for t in terms]
        return atoms

    def formula(self, depth: int, scope: Sequence[tuple[str, Sort]] = ()) -> Formula:
        atoms = self._atoms(scope)
        if depth <= 0 or self.rng.random() < 0.2:
            return atoms[int(self.rng.integers(0, len(atoms)))]
        choices = ["and", "or", "bigor"]
        if not self.geometric:
            choices += ["implies", "not"]
        if self.quantify and self.env.sheaves:
            choices += ["exists"] if self.geometric else ["exists", "forall"]
        kind = choices[int(self.rng.integers(0, len(choices)))]
        sub = lambda: self.formula(depth - 1, scope)
        match kind:
            case "and":
                return And(sub(), sub())
            case "or":
                return Or(sub(), sub())
            case "bigor":
                return BigOr(tuple(sub() for _ in range(int(self.rng.integers(0, 3)))))
            case "implies":
                return Implies(sub(), sub())
            case "not":
                return Not(sub())
        sheaf_name = sorted(self.env.sheaves)[int(self.rng.integers(0, len(self.env.sheaves)))]
        var = f"v{len(scope)}"
        sort = Sort.sheaf(sheaf_name)
        body = self.formula(depth - 1, tuple(scope) + ((var, sort),))
        return Exists(var, sort, body) if kind == "exists" else Forall(var, sort, body)


def random_formulas(
    rng: np.random.Generator, env: Environment, count: int, depth: int, geometric: bool = False
) -> list[Formula]:
    generator = FormulaGenerator(rng, env, geometric=geometric)
    return [generator.formula(depth) for _ in range(count)]


# ===== Rings =====

def corpus_rings() -> list[FinRing]:
    return [make_ring(spec) for spec in CORPUS_RINGS]
