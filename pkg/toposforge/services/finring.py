"""Finite commutative rings with ideal, filter and localization machinery.

Rings are stored as numpy operation tables over element indices
``0..size-1``. Every structure that is derived from a ring (ideals, filters,
localizations, modules) refers to elements by those indices and renders
them through ``FinRing.label``.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Iterable, Optional, Sequence

import numpy as np
from lark import Lark, Transformer
from lark.exceptions import LarkError, VisitError

from toposforge.core.config import settings
from toposforge.core.errors import (
    ConfigError,
    InternalDisagreementError,
    NonMonicModulusError,
    ResolutionError,
    RingAxiomError,
    RingError,
)

logger = logging.getLogger(__name__)


class FinRing:
    """Finite commutative unital ring given by its operation tables"""

    def __init__(
        self,
        name: str,
        labels: Sequence[str],
        add: np.ndarray,
        mul: np.ndarray,
        zero: int = 0,
        one: int = 1,
        check: bool = True,
    ):
        self.name = name
        self.labels = tuple(labels)
        self.size = len(self.labels)
        self.add_table = np.asarray(add, dtype=np.int64)
        self.mul_table = np.asarray(mul, dtype=np.int64)
        self.zero = zero
        self.one = one
        self._index = {label: i for i, label in enumerate(self.labels)}
        if check:
            check_ring_axioms(self)

    def __repr__(self) -> str:
        return f"FinRing({self.name!r}, size={self.size})"

    @property
    def elements(self) -> range:
        return range(self.size)

    @property
    def is_trivial(self) -> bool:
        return self.size == 1

    def add(self, a: int, b: int) -> int:
        return int(self.add_table[a, b])

    def mul(self, a: int, b: int) -> int:
        return int(self.mul_table[a, b])

    @cached_property
    def neg_table(self) -> np.ndarray:
        return np.argmax(self.add_table == self.zero, axis=1)

    def neg(self, a: int) -> int:
        return int(self.neg_table[a])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def power(self, a: int, k: int) -> int:
        result = self.one
        for _ in range(k):
            result = self.mul(result, a)
        return result

    def numeral(self, k: int) -> int:
        """The element k·1"""
        result = self.zero
        for _ in range(k % max(self.size, 1) if self.size else 0):
            result = self.add(result, self.one)
        return result

    def label(self, a: int) -> str:
        return self.labels[a]

    def element(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise ResolutionError(f"{label!r} is not an element of {self.name}") from None

    @cached_property
    def power_sets(self) -> tuple[frozenset[int], ...]:
        """For each x the set {x^1, ..., x^n} with n = |A|"""
        result = []
        for x in self.elements:
            seen = set()
            current = x
            for _ in range(self.size):
                seen.add(current)
                current = self.mul(current, x)
            result.append(frozenset(seen))
        return tuple(result)


def check_ring_axioms(ring: FinRing) -> None:
    """Raise RingAxiomError unless the tables form a commutative unital ring"""
    n = ring.size
    A, M = ring.add_table, ring.mul_table
    idx = np.arange(n)
    if A.shape != (n, n) or M.shape != (n, n):
        raise RingAxiomError(f"{ring.name}: tables must be {n}x{n}")
    if n and ((A < 0).any() or (A >= n).any() or (M < 0).any() or (M >= n).any()):
        raise RingAxiomError(f"{ring.name}: table entry out of range")
    a, c = idx[:, None, None], idx[None, None, :]
    checks = [
        ("addition is commutative", (A == A.T).all()),
        ("multiplication is commutative", (M == M.T).all()),
        ("zero is neutral", (A[ring.zero] == idx).all()),
        ("one is neutral", (M[ring.one] == idx).all()),
        ("additive inverses exist", (A == ring.zero).any(axis=1).all()),
        ("addition is associative", (A[A[:, :, None], c] == A[a, A[None, :, :]]).all()),
        ("multiplication is associative", (M[M[:, :, None], c] == M[a, M[None, :, :]]).all()),
        ("multiplication distributes", (M[a, A[None, :, :]] == A[M[:, :, None], M[:, None, :]]).all()),
    ]
    for axiom, holds in checks:
        if not holds:
            raise RingAxiomError(f"{ring.name}: {axiom} fails")


# ===== Constructors =====

def zmod(n: int) -> FinRing:
    """The ring ℤ/n"""
    if n < 1:
        raise RingError("zmod needs a positive modulus")
    idx = np.arange(n)
    return FinRing(
        f"zmod {n}",
        [str(k) for k in range(n)],
        np.add.outer(idx, idx) % n,
        np.multiply.outer(idx, idx) % n,
        zero=0,
        one=1 % n,
    )


def product(left: FinRing, right: FinRing) -> FinRing:
    """Cartesian product ring; element (a, b) has index a·|B| + b"""
    nb = right.size
    idx = np.arange(left.size * nb)
    ia, ib = idx // nb, idx % nb
    add = left.add_table[np.ix_(ia, ia)] * nb + right.add_table[np.ix_(ib, ib)]
    mul = left.mul_table[np.ix_(ia, ia)] * nb + right.mul_table[np.ix_(ib, ib)]
    labels = [f"({left.label(a)},{right.label(b)})" for a, b in zip(ia, ib)]
    return FinRing(
        f"product ({left.name}) ({right.name})",
        labels,
        add,
        mul,
        zero=left.zero * nb + right.zero,
        one=left.one * nb + right.one,
    )


def _poly_label(base: FinRing, coeffs: Sequence[int]) -> str:
    terms = []
    for degree in range(len(coeffs) - 1, -1, -1):
        c = coeffs[degree]
        if c == base.zero:
            continue
        if degree == 0:
            terms.append(base.label(c))
            continue
        monomial = "x" if degree == 1 else f"x^{degree}"
        terms.append(monomial if c == base.one else f"{base.label(c)}{monomial}")
    return "+".join(terms) if terms else base.label(base.zero)


def polyquot(base: FinRing, modulus: dict[int, int]) -> FinRing:
    """base[x]/(f) for a monic f given as {degree: integer coefficient}"""
    coeffs = {d: base.numeral(c) for d, c in modulus.items()}
    coeffs = {d: c for d, c in coeffs.items() if c != base.zero}
    if not coeffs or max(coeffs) < 1:
        raise NonMonicModulusError("polyquot needs a modulus of degree at least 1")
    degree = max(coeffs)
    if coeffs[degree] != base.one:
        raise NonMonicModulusError(f"modulus must be monic, leading coefficient is {base.label(coeffs[degree])}")
    # x^degree = -(lower terms)
    reduction = [base.neg(coeffs.get(d, base.zero)) for d in range(degree)]

    vectors = list(itertools.product(range(base.size), repeat=degree))
    vectors = [tuple(reversed(v)) for v in vectors]
    vectors.sort(key=lambda v: sum(c * base.size**i for i, c in enumerate(v)))
    index = {v: i for i, v in enumerate(vectors)}

    def multiply(u: tuple[int, ...], v: tuple[int, ...]) -> tuple[int, ...]:
        full = [base.zero] * (2 * degree - 1)
        for i, a in enumerate(u):
            for j, b in enumerate(v):
                full[i + j] = base.add(full[i + j], base.mul(a, b))
        for k in range(len(full) - 1, degree - 1, -1):
            lead = full[k]
            full[k] = base.zero
            for d in range(degree):
                full[k - degree + d] = base.add(full[k - degree + d], base.mul(lead, reduction[d]))
        return tuple(full[:degree])

    n = len(vectors)
    add = np.zeros((n, n), dtype=np.int64)
    mul = np.zeros((n, n), dtype=np.int64)
    for u, v in itertools.product(vectors, repeat=2):
        add[index[u], index[v]] = index[tuple(base.add(a, b) for a, b in zip(u, v))]
        mul[index[u], index[v]] = index[multiply(u, v)]
    zero_vec = tuple([base.zero] * degree)
    one_vec = tuple([base.one] + [base.zero] * (degree - 1))
    modulus_label = _poly_label(base, [coeffs.get(d, base.zero) for d in range(degree + 1)])
    return FinRing(
        f"polyquot ({base.name}) {modulus_label}",
        [_poly_label(base, v) for v in vectors],
        add,
        mul,
        zero=index[zero_vec],
        one=index[one_vec],
    )


RING_GRAMMAR = r"""
    ?ring: "zmod" INT                 -> zmod
         | "product" atom atom        -> product
         | "polyquot" atom poly       -> polyquot
         | atom

    ?atom: "(" ring ")"

    poly: monomial ("+" monomial)*

    monomial: coefficient? "x" exponent?   -> power_term
            | INT                          -> constant_term

    coefficient: INT "*"?
    exponent: "^" INT

    %import common.INT
    %import common.WS
    %ignore WS
"""


class _RingBuilder(Transformer):
    def zmod(self, children):
        return zmod(int(children[0]))

    def product(self, children):
        return product(children[0], children[1])

    def polyquot(self, children):
        return polyquot(children[0], children[1])

    def poly(self, monomials):
        result: dict[int, int] = {}
        for degree, coefficient in monomials:
            result[degree] = result.get(degree, 0) + coefficient
        return result

    def constant_term(self, children):
        return 0, int(children[0])

    def power_term(self, children):
        coefficient, degree = 1, 1
        for kind, value in children:
            if kind == "coefficient":
                coefficient = value
            else:
                degree = value
        return degree, coefficient

    def coefficient(self, children):
        return "coefficient", int(children[0])

    def exponent(self, children):
        return "exponent", int(children[0])


_ring_parser = Lark(RING_GRAMMAR, start="ring", parser="lalr")


def make_ring(spec: str) -> FinRing:
    """Build a ring from `zmod n`, `product (A) (B)` or `polyquot (zmod p) f`"""
    try:
        tree = _ring_parser.parse(spec)
        ring = _RingBuilder().transform(tree)
    except VisitError as e:
        raise e.orig_exc from None
    except LarkError as e:
        raise ConfigError(f"malformed ring spec {spec!r}: {e}") from None
    if ring.size > settings.MAX_RING_SIZE:
        raise ConfigError(f"{ring.name} has {ring.size} elements, limit is {settings.MAX_RING_SIZE}")
    logger.info("✅ Built ring %s with %d elements", ring.name, ring.size)
    return ring


# ===== Elements =====

def is_nilpotent(A: FinRing, x: int) -> bool:
    return A.zero in A.power_sets[x]


def is_invertible(A: FinRing, x: int) -> bool:
    return bool((A.mul_table[x] == A.one).any())


def inverse(A: FinRing, x: int) -> Optional[int]:
    hits = np.flatnonzero(A.mul_table[x] == A.one)
    return int(hits[0]) if hits.size else None


def units(A: FinRing) -> frozenset[int]:
    return frozenset(x for x in A.elements if is_invertible(A, x))


def nilradical(A: FinRing) -> frozenset[int]:
    return frozenset(x for x in A.elements if is_nilpotent(A, x))


def is_reduced(A: FinRing) -> bool:
    return nilradical(A) == {A.zero}


# ===== Ideals =====

@dataclass(frozen=True)
class Ideal:
    """An ideal, identified by its member set"""

    members: frozenset[int]
    ring: FinRing = field(compare=False, hash=False, repr=False)

    @property
    def key(self) -> tuple:
        return ideal_key(self.members)

    def __contains__(self, x: int) -> bool:
        return x in self.members

    def __len__(self) -> int:
        return len(self.members)

    def is_unit(self) -> bool:
        return self.ring.one in self.members


def ideal_key(members: Iterable[int]) -> tuple:
    members = sorted(members)
    return len(members), tuple(members)


def principal_ideal(A: FinRing, a: int) -> frozenset[int]:
    return frozenset(int(v) for v in A.mul_table[:, a])


def ideal_sum(A: FinRing, I: Iterable[int], J: Iterable[int]) -> frozenset[int]:
    """I + J for additive subgroups I, J"""
    return frozenset(int(v) for v in A.add_table[np.ix_(sorted(I), sorted(J))].ravel())


def ideal_generated(A: FinRing, gens: Iterable[int]) -> Ideal:
    members = reduce(lambda acc, g: ideal_sum(A, acc, principal_ideal(A, g)), gens, frozenset({A.zero}))
    return Ideal(members, A)


def enumerate_ideals(A: FinRing) -> list[Ideal]:
    """All ideals, by closing I + (a) until no new ideal appears"""
    start = ideal_generated(A, [])
    seen = {start.members: start}
    frontier = [start]
    while frontier:
        ideal = frontier.pop()
        for a in A.elements:
            if a in ideal.members:
                continue
            bigger = Ideal(ideal_sum(A, ideal.members, principal_ideal(A, a)), A)
            if bigger.members not in seen:
                seen[bigger.members] = bigger
                frontier.append(bigger)
    return sorted(seen.values(), key=lambda i: i.key)


def is_ideal(A: FinRing, members: Iterable[int]) -> bool:
    members = frozenset(members)
    if A.zero not in members:
        return False
    rows = sorted(members)
    sums = A.add_table[np.ix_(rows, rows)]
    products = A.mul_table[:, rows]
    return bool(np.isin(sums, rows).all() and np.isin(products, rows).all())


def radical(A: FinRing, ideal: Ideal | Iterable[int]) -> Ideal:
    """√I = {x | x^k ∈ I for some 1 ≤ k ≤ |A|}"""
    members = ideal.members if isinstance(ideal, Ideal) else frozenset(ideal)
    return Ideal(frozenset(x for x in A.elements if A.power_sets[x] & members), A)


def is_radical(A: FinRing, ideal: Ideal) -> bool:
    return radical(A, ideal).members == ideal.members


def radical_ideals(A: FinRing) -> list[Ideal]:
    return [i for i in enumerate_ideals(A) if is_radical(A, i)]


def is_prime(A: FinRing, ideal: Ideal) -> bool:
    if A.one in ideal.members:
        return False
    inside = np.isin(np.arange(A.size), sorted(ideal.members))
    product_inside = np.isin(A.mul_table, sorted(ideal.members))
    violation = product_inside & ~inside[:, None] & ~inside[None, :]
    return not bool(violation.any())


def prime_ideals(A: FinRing) -> list[Ideal]:
    return [i for i in enumerate_ideals(A) if is_prime(A, i)]


def maximal_ideals(A: FinRing) -> list[Ideal]:
    proper = [i for i in enumerate_ideals(A) if A.one not in i.members]
    return [i for i in proper if not any(i.members < j.members for j in proper)]


def is_local(A: FinRing) -> bool:
    return len(maximal_ideals(A)) == 1


def generator_label(A: FinRing, ideal: Ideal) -> str:
    """Smallest generator list, rendered like (2) or (x,2)"""
    for count in range(0, 3):
        for gens in itertools.combinations(A.elements, count):
            if ideal_generated(A, gens).members == ideal.members:
                return "(" + ",".join(A.label(g) for g in gens) + ")" if gens else "(0)"
    return "(" + ",".join(A.label(g) for g in sorted(ideal.members)) + ")"


# ===== Filters =====

@dataclass(frozen=True)
class Filter:
    """A ring-theoretic filter (complement of a prime ideal)"""

    members: frozenset[int]
    ring: FinRing = field(compare=False, hash=False, repr=False)

    def __contains__(self, x: int) -> bool:
        return x in self.members

    @property
    def prime(self) -> Ideal:
        return Ideal(frozenset(self.ring.elements) - self.members, self.ring)


def is_filter(A: FinRing, members: Iterable[int]) -> bool:
    members = frozenset(members)
    if A.zero in members or A.one not in members:
        return False
    inside = np.isin(np.arange(A.size), sorted(members))
    product_inside = inside[A.mul_table]
    if not (product_inside == (inside[:, None] & inside[None, :])).all():
        return False
    sum_inside = inside[A.add_table]
    return not bool((sum_inside & ~inside[:, None] & ~inside[None, :]).any())


def enumerate_filters(A: FinRing) -> list[Filter]:
    """Filters as complements of prime ideals, each checked against the axioms"""
    result = []
    for p in prime_ideals(A):
        members = frozenset(A.elements) - p.members
        if not is_filter(A, members):
            raise InternalDisagreementError(f"complement of prime {sorted(p.members)} is not a filter")
        result.append(Filter(members, A))
    return result


def search_filters(A: FinRing) -> list[Filter]:
    """All subsets satisfying the filter axioms, by pruned backtracking"""
    forced_in = units(A)
    forced_out = nilradical(A)
    if forced_in & forced_out:
        return []
    free = [x for x in A.elements if x not in forced_in and x not in forced_out]
    found: list[Filter] = []

    def consistent(inside: set[int], outside: set[int]) -> bool:
        for x in inside:
            for y in inside:
                if A.mul(x, y) in outside:
                    return False
        for x in A.elements:
            for y in A.elements:
                xy = A.mul(x, y)
                if xy in inside and (x in outside or y in outside):
                    return False
                if A.add(x, y) in inside and x in outside and y in outside:
                    return False
        return True

    def extend(position: int, inside: set[int], outside: set[int]) -> None:
        if not consistent(inside, outside):
            return
        if position == len(free):
            if is_filter(A, inside):
                found.append(Filter(frozenset(inside), A))
            return
        x = free[position]
        extend(position + 1, inside | {x}, outside)
        extend(position + 1, inside, outside | {x})

    extend(0, set(forced_in), set(forced_out))
    return sorted(found, key=lambda f: ideal_key(frozenset(A.elements) - f.members))


# ===== Localization =====

def multiplicative_closure(A: FinRing, gens: Iterable[int]) -> frozenset[int]:
    closed = {A.one}
    frontier = list(gens)
    while frontier:
        g = frontier.pop()
        if g in closed:
            continue
        closed.add(g)
        frontier.extend(A.mul(g, h) for h in list(closed))
    return frozenset(closed)


@dataclass
class Localization:
    """A[S⁻¹] together with the class map on pairs (a, s)"""

    source: FinRing
    multiplicative: frozenset[int]
    ring: FinRing
    representatives: list[tuple[int, int]]
    class_of: dict[tuple[int, int], int]

    def canonical(self, a: int) -> int:
        return self.class_of[(a, self.source.one)]

    def fraction(self, a: int, s: int) -> int:
        return self.class_of[(a, s)]


def localize(A: FinRing, S: Iterable[int]) -> Localization:
    """A[S⁻¹] with (a,s) ~ (b,t) iff σ(at − bs) = 0 for σ the product of S"""
    S = multiplicative_closure(A, S)
    sigma = reduce(A.mul, sorted(S), A.one)
    ordered_s = sorted(S, key=lambda s: (s != A.one, s))
    representatives: list[tuple[int, int]] = []
    class_of: dict[tuple[int, int], int] = {}
    for s in ordered_s:
        for a in A.elements:
            for index, (b, t) in enumerate(representatives):
                if A.mul(sigma, A.sub(A.mul(a, t), A.mul(b, s))) == A.zero:
                    class_of[(a, s)] = index
                    break
            else:
                class_of[(a, s)] = len(representatives)
                representatives.append((a, s))
    n = len(representatives)
    add = np.zeros((n, n), dtype=np.int64)
    mul = np.zeros((n, n), dtype=np.int64)
    for i, (a, s) in enumerate(representatives):
        for j, (b, t) in enumerate(representatives):
            st = A.mul(s, t)
            add[i, j] = class_of[(A.add(A.mul(a, t), A.mul(b, s)), st)]
            mul[i, j] = class_of[(A.mul(a, b), st)]
    labels = [A.label(a) if s == A.one else f"{A.label(a)}/{A.label(s)}" for a, s in representatives]
    gens = ",".join(A.label(s) for s in sorted(S))
    ring = FinRing(
        f"{A.name}[{{{gens}}}^-1]",
        labels,
        add,
        mul,
        zero=class_of[(A.zero, A.one)],
        one=class_of[(A.one, A.one)],
    )
    return Localization(A, S, ring, representatives, class_of)


def localize_at_prime(A: FinRing, prime: Ideal) -> Localization:
    return localize(A, frozenset(A.elements) - prime.members)


# ===== Krull dimension =====

@dataclass
class KrullResult:
    """Outcome of the complementary-sequence test"""

    n: int
    holds: bool
    witnesses: dict[tuple[int, ...], tuple[int, ...]] = field(default_factory=dict)
    failure: Optional[tuple[int, ...]] = None


class _RadicalCache:
    def __init__(self, A: FinRing):
        self.A = A
        self._cache: dict[frozenset[int], frozenset[int]] = {}

    def __call__(self, gens: Iterable[int]) -> frozenset[int]:
        key = frozenset(gens)
        if key not in self._cache:
            self._cache[key] = radical(self.A, ideal_generated(self.A, key)).members
        return self._cache[key]


def is_complementary(A: FinRing, a: Sequence[int], b: Sequence[int], rad: Optional[_RadicalCache] = None) -> bool:
    """√(1) ⊆ √(a0,b0), √(a_{i-1}b_{i-1}) ⊆ √(a_i,b_i), √(a_n b_n) ⊆ √(0)"""
    rad = rad or _RadicalCache(A)
    if A.one not in rad((a[0], b[0])):
        return False
    for i in range(1, len(a)):
        if A.mul(a[i - 1], b[i - 1]) not in rad((a[i], b[i])):
            return False
    return is_nilpotent(A, A.mul(a[-1], b[-1]))


def krull_dim_leq(A: FinRing, n: int) -> KrullResult:
    """Constructive Krull dimension ≤ n via complementary sequences"""
    if n < -1:
        raise RingError("Krull dimension bound must be at least -1")
    if n == -1:
        return KrullResult(n, A.is_trivial)
    rad = _RadicalCache(A)
    result = KrullResult(n, True)

    def search(a: tuple[int, ...], prefix: tuple[int, ...]) -> Optional[tuple[int, ...]]:
        i = len(prefix)
        if i == len(a):
            return prefix if is_nilpotent(A, A.mul(a[-1], prefix[-1])) else None
        for b in A.elements:
            target = A.one if i == 0 else A.mul(a[i - 1], prefix[i - 1])
            if target not in rad((a[i], b)):
                continue
            found = search(a, prefix + (b,))
            if found is not None:
                return found
        return None

    for a in itertools.product(A.elements, repeat=n + 1):
        b = search(a, ())
        if b is None:
            return KrullResult(n, False, result.witnesses, a)
        result.witnesses[a] = b
    return result


def check_kronecker_identity(A: FinRing, a: int, b: int) -> list[int]:
    """Elements x violating √(x, a) = √(a − x·b) for a dimension-0 witness pair"""
    rad = _RadicalCache(A)
    return [x for x in A.elements if rad((x, a)) != rad((A.sub(a, A.mul(x, b)),))]


def classical_krull_dimension(A: FinRing) -> int:
    """Length of the longest chain of prime ideals, -1 for the zero ring"""
    primes = prime_ideals(A)
    if not primes:
        return -1
    longest = {p.members: 0 for p in primes}
    for p in sorted(primes, key=lambda q: -len(q)):
        above = [longest[q.members] + 1 for q in primes if p.members < q.members]
        longest[p.members] = max(above, default=0)
    return max(longest.values())


# ===== Ring maps =====

@dataclass(frozen=True)
class RingMap:
    source: FinRing
    target: FinRing
    table: tuple[int, ...]

    def __call__(self, a: int) -> int:
        return self.table[a]


def is_ring_map(phi: RingMap) -> bool:
    R, A = phi.source, phi.target
    if phi(R.one) != A.one:
        return False
    for a, b in itertools.product(R.elements, repeat=2):
        if phi(R.add(a, b)) != A.add(phi(a), phi(b)) or phi(R.mul(a, b)) != A.mul(phi(a), phi(b)):
            return False
    return True


def identity_map(A: FinRing) -> RingMap:
    return RingMap(A, A, tuple(A.elements))


def structure_map(R: FinRing, A: FinRing) -> RingMap:
    """The map k·1 ↦ k·1, defined when R is generated by its unit"""
    table = [None] * R.size
    for k in range(max(R.size, 1)):
        source = R.numeral(k)
        if table[source] is None:
            table[source] = A.numeral(k)
    if any(t is None for t in table):
        raise RingError(f"{R.name} is not generated by 1; give the structure map explicitly")
    phi = RingMap(R, A, tuple(table))
    if not is_ring_map(phi):
        raise RingError(f"no unital map {R.name} -> {A.name} sends k to k")
    return phi


def diagonal_map(R: FinRing) -> RingMap:
    """R -> R × R, r ↦ (r, r)"""
    target = product(R, R)
    return RingMap(R, target, tuple(r * R.size + r for r in R.elements))


def _invariants(A: FinRing, x: int) -> tuple:
    order, current = 1, x
    while current != A.zero:
        current = A.add(current, x)
        order += 1
    idempotent = A.mul(x, x) == x
    return order, is_invertible(A, x), is_nilpotent(A, x), idempotent


def find_ring_isomorphism(A: FinRing, B: FinRing) -> Optional[RingMap]:
    """Search for a ring isomorphism A -> B by backtracking"""
    if A.size != B.size:
        return None
    signature_b: dict[tuple, list[int]] = {}
    for y in B.elements:
        signature_b.setdefault(_invariants(B, y), []).append(y)
    candidates = {x: signature_b.get(_invariants(A, x), []) for x in A.elements}
    order = sorted(A.elements, key=lambda x: len(candidates[x]))
    mapping: dict[int, int] = {}
    used: set[int] = set()

    def compatible(x: int, y: int) -> bool:
        for u, v in mapping.items():
            for op_a, op_b in ((A.add, B.add), (A.mul, B.mul)):
                s = op_a(x, u)
                if s in mapping and mapping[s] != op_b(y, v):
                    return False
            if A.mul(x, x) in mapping and mapping[A.mul(x, x)] != B.mul(y, y):
                return False
        return True

    def extend(position: int) -> bool:
        if position == len(order):
            return True
        x = order[position]
        for y in candidates[x]:
            if y in used or not compatible(x, y):
                continue
            mapping[x] = y
            used.add(y)
            if extend(position + 1):
                return True
            del mapping[x]
            used.discard(y)
        return False

    if not extend(0):
        return None
    phi = RingMap(A, B, tuple(mapping[x] for x in A.elements))
    return phi if is_ring_map(phi) else None


# ===== Modules =====

class FinModule:
    """Finite module over a FinRing given by its addition and action tables"""

    def __init__(
        self,
        ring: FinRing,
        labels: Sequence[str],
        add: np.ndarray,
        act: np.ndarray,
        zero: int = 0,
        name: str = "M",
        check: bool = True,
    ):
        self.ring = ring
        self.labels = tuple(labels)
        self.size = len(self.labels)
        self.add_table = np.asarray(add, dtype=np.int64)
        self.act_table = np.asarray(act, dtype=np.int64)
        self.zero = zero
        self.name = name
        if check:
            check_module_axioms(self)

    def __repr__(self) -> str:
        return f"FinModule({self.name!r} over {self.ring.name}, size={self.size})"

    @property
    def elements(self) -> range:
        return range(self.size)

    def add(self, m: int, n: int) -> int:
        return int(self.add_table[m, n])

    def act(self, r: int, m: int) -> int:
        return int(self.act_table[r, m])

    def neg(self, m: int) -> int:
        return int(np.argmax(self.add_table[m] == self.zero))

    def label(self, m: int) -> str:
        return self.labels[m]


def check_module_axioms(M: FinModule) -> None:
    A = M.ring
    n = M.size
    P, S = M.add_table, M.act_table
    idx = np.arange(n)
    ridx = np.arange(A.size)
    checks = [
        ("addition is commutative", (P == P.T).all()),
        ("zero is neutral", (P[M.zero] == idx).all()),
        ("inverses exist", (P == M.zero).any(axis=1).all()),
        ("addition is associative", (P[P[:, :, None], idx[None, None, :]] == P[idx[:, None, None], P[None, :, :]]).all()),
        ("one acts trivially", (S[A.one] == idx).all()),
        ("action is associative", (S[A.mul_table[:, :, None], idx[None, None, :]] == S[ridx[:, None, None], S[None, :, :]]).all()),
        ("action distributes over module addition", (S[ridx[:, None, None], P[None, :, :]] == P[S[:, :, None], S[:, None, :]]).all()),
        ("action distributes over ring addition", (S[A.add_table[:, :, None], idx[None, None, :]] == P[S[:, None, :], S[None, :, :]]).all()),
    ]
    for axiom, holds in checks:
        if not holds:
            raise RingAxiomError(f"module {M.name}: {axiom} fails")


def regular_module(A: FinRing) -> FinModule:
    return FinModule(A, A.labels, A.add_table, A.mul_table, A.zero, name=A.name)


def zero_module(A: FinRing) -> FinModule:
    return FinModule(A, ["0"], np.zeros((1, 1)), np.zeros((A.size, 1)), 0, name="0")


def quotient_module(A: FinRing, ideal: Ideal) -> FinModule:
    """A/I as an A-module; classes are represented by their least member"""
    rep = {a: min(A.add(a, i) for i in ideal.members) for a in A.elements}
    reps = sorted(set(rep.values()))
    index = {r: k for k, r in enumerate(reps)}
    add = [[index[rep[A.add(a, b)]] for b in reps] for a in reps]
    act = [[index[rep[A.mul(r, a)]] for a in reps] for r in A.elements]
    return FinModule(A, [A.label(r) for r in reps], add, act, index[rep[A.zero]], name=f"{A.name}/{generator_label(A, ideal)}")


def ideal_module(A: FinRing, ideal: Ideal) -> FinModule:
    """The ideal I as a submodule of A"""
    members = sorted(ideal.members)
    index = {m: k for k, m in enumerate(members)}
    add = [[index[A.add(a, b)] for b in members] for a in members]
    act = [[index[A.mul(r, a)] for a in members] for r in A.elements]
    return FinModule(A, [A.label(m) for m in members], add, act, index[A.zero], name=generator_label(A, ideal))


def submodule_generated(M: FinModule, gens: Iterable[int]) -> frozenset[int]:
    members = frozenset({M.zero})
    for g in gens:
        cyclic = frozenset(int(v) for v in M.act_table[:, g])
        members = frozenset(int(v) for v in M.add_table[np.ix_(sorted(members), sorted(cyclic))].ravel())
    return members


def submodules(M: FinModule) -> list[frozenset[int]]:
    start = submodule_generated(M, [])
    seen = {start}
    frontier = [start]
    while frontier:
        current = frontier.pop()
        for m in M.elements:
            if m not in current:
                bigger = submodule_generated(M, sorted(current) + [m])
                if bigger not in seen:
                    seen.add(bigger)
                    frontier.append(bigger)
    return sorted(seen, key=ideal_key)


def min_generators(M: FinModule) -> int:
    everything = frozenset(M.elements)
    for k in range(0, M.size + 1):
        for gens in itertools.combinations(M.elements, k):
            if submodule_generated(M, gens) == everything:
                return k
    return M.size


@dataclass(frozen=True)
class ModuleMap:
    source: FinModule
    target: FinModule
    table: tuple[int, ...]
    name: str = "f"

    def __call__(self, m: int) -> int:
        return self.table[m]

    def is_injective(self) -> bool:
        return len(set(self.table)) == self.source.size

    def is_surjective(self) -> bool:
        return set(self.table) == set(self.target.elements)


def is_module_map(f: ModuleMap) -> bool:
    M, N = f.source, f.target
    for m, n in itertools.product(M.elements, repeat=2):
        if f(M.add(m, n)) != N.add(f(m), f(n)):
            return False
    return all(f(M.act(r, m)) == N.act(r, f(m)) for r in M.ring.elements for m in M.elements)


def projection_map(A: FinRing, ideal: Ideal) -> ModuleMap:
    """A -> A/I"""
    target = quotient_module(A, ideal)
    table = tuple(target.labels.index(A.label(min(A.add(a, i) for i in ideal.members))) for a in A.elements)
    return ModuleMap(regular_module(A), target, table, name="proj")


def inclusion_map(A: FinRing, ideal: Ideal) -> ModuleMap:
    """I -> A"""
    source = ideal_module(A, ideal)
    return ModuleMap(source, regular_module(A), tuple(sorted(ideal.members)), name="incl")


def scalar_map(M: FinModule, a: int) -> ModuleMap:
    """M -> M, m ↦ a·m"""
    return ModuleMap(M, M, tuple(M.act(a, m) for m in M.elements), name=f"mul{M.ring.label(a)}")


@dataclass
class ModuleLocalization:
    """M[S⁻¹] over a ring localization A[S⁻¹]"""

    source: FinModule
    localization: Localization
    module: FinModule
    representatives: list[tuple[int, int]]
    class_of: dict[tuple[int, int], int]

    def canonical(self, m: int) -> int:
        return self.class_of[(m, self.source.ring.one)]


def localize_module(M: FinModule, loc: Localization) -> ModuleLocalization:
    """(m,s) ~ (n,t) iff σ(t·m − s·n) = 0"""
    A = M.ring
    S = loc.multiplicative
    sigma = reduce(A.mul, sorted(S), A.one)
    ordered_s = sorted(S, key=lambda s: (s != A.one, s))
    representatives: list[tuple[int, int]] = []
    class_of: dict[tuple[int, int], int] = {}
    for s in ordered_s:
        for m in M.elements:
            for index, (n, t) in enumerate(representatives):
                difference = M.add(M.act(t, m), M.neg(M.act(s, n)))
                if M.act(sigma, difference) == M.zero:
                    class_of[(m, s)] = index
                    break
            else:
                class_of[(m, s)] = len(representatives)
                representatives.append((m, s))
    size = len(representatives)
    add = np.zeros((size, size), dtype=np.int64)
    for i, (m, s) in enumerate(representatives):
        for j, (n, t) in enumerate(representatives):
            add[i, j] = class_of[(M.add(M.act(t, m), M.act(s, n)), A.mul(s, t))]
    act = np.zeros((loc.ring.size, size), dtype=np.int64)
    for r, (a, u) in enumerate(loc.representatives):
        for j, (m, s) in enumerate(representatives):
            act[r, j] = class_of[(M.act(a, m), A.mul(u, s))]
    labels = [M.label(m) if s == A.one else f"{M.label(m)}/{A.label(s)}" for m, s in representatives]
    module = FinModule(loc.ring, labels, add, act, class_of[(M.zero, A.one)], name=f"{M.name}_loc")
    return ModuleLocalization(M, loc, module, representatives, class_of)
