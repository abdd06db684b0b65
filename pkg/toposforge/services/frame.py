"""Finite spaces, finite frames and nuclei.

Opens are frozensets of point indices. Every collection of opens is kept in
the canonical order (size, sorted indices) so that reports are stable.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from toposforge.core.errors import FrameError, InternalDisagreementError, NotATopologyError, ResolutionError

logger = logging.getLogger(__name__)

Open = frozenset


def open_key(U: Iterable[int]) -> tuple:
    members = sorted(U)
    return len(members), tuple(members)


class FiniteSpace:
    """A finite topological space"""

    def __init__(self, points: Sequence[str], opens: Iterable[Open], names: Optional[dict[Open, str]] = None):
        self.points = tuple(points)
        self.opens: tuple[Open, ...] = tuple(sorted({frozenset(U) for U in opens}, key=open_key))
        self.full: Open = frozenset(range(len(self.points)))
        self.empty: Open = frozenset()
        self.names: dict[Open, str] = dict(names or {})
        self._open_set = set(self.opens)
        self._point_index = {p: i for i, p in enumerate(self.points)}
        self._minimal = tuple(
            frozenset.intersection(*[U for U in self.opens if x in U]) for x in range(len(self.points))
        )

    def __repr__(self) -> str:
        return f"FiniteSpace(points={list(self.points)}, opens={len(self.opens)})"

    def __len__(self) -> int:
        return len(self.points)

    # ----- lookup -----

    def point_index(self, name: str) -> int:
        try:
            return self._point_index[name]
        except KeyError:
            raise ResolutionError(f"unknown point {name!r}") from None

    def open_of(self, names: Iterable[str]) -> Open:
        U = frozenset(self.point_index(n) for n in names)
        if U not in self._open_set:
            raise FrameError(f"{self.label(U, force_points=True)} is not open")
        return U

    def named_open(self, name: str) -> Open:
        if name == "X":
            return self.full
        for U, label in self.names.items():
            if label == name:
                return U
        raise ResolutionError(f"unknown open {name!r}")

    def label(self, U: Iterable[int], force_points: bool = False) -> str:
        U = frozenset(U)
        if not force_points:
            if U == self.full:
                return "X"
            if U in self.names:
                return self.names[U]
        if not U:
            return "{}"
        return "{" + ",".join(self.points[i] for i in sorted(U)) + "}"

    # ----- topology -----

    def is_open(self, S: Iterable[int]) -> bool:
        return frozenset(S) in self._open_set

    def minimal_open(self, x: int) -> Open:
        return self._minimal[x]

    @property
    def minimal_opens(self) -> tuple[Open, ...]:
        return self._minimal

    def opens_below(self, U: Open) -> list[Open]:
        return [V for V in self.opens if V <= U]

    def interior(self, S: Iterable[int]) -> Open:
        S = frozenset(S)
        return frozenset(x for x in range(len(self.points)) if self._minimal[x] <= S)

    def closure(self, S: Iterable[int]) -> frozenset[int]:
        return self.full - self.interior(self.full - frozenset(S))

    def heyting(self, U: Open, V: Open) -> Open:
        """Largest open W with W ∩ U ⊆ V"""
        return self.interior((self.full - U) | V)

    def negate(self, U: Open) -> Open:
        return self.heyting(U, self.empty)

    def subspace(self, S: Iterable[int]) -> "FiniteSpace":
        """Subspace topology on S, with points renumbered in their original order"""
        kept = sorted(frozenset(S))
        renumber = {old: new for new, old in enumerate(kept)}
        opens = {frozenset(renumber[i] for i in U if i in renumber) for U in self.opens}
        return FiniteSpace([self.points[i] for i in kept], opens)

    # ----- properties -----

    @cached_property
    def specialization(self) -> np.ndarray:
        """order[x, y] is true when x lies in every open containing y"""
        n = len(self.points)
        order = np.zeros((n, n), dtype=bool)
        for y in range(n):
            for x in self._minimal[y]:
                order[x, y] = True
        return order

    @property
    def is_T0(self) -> bool:
        return len(set(self._minimal)) == len(self._minimal)

    @property
    def is_local(self) -> bool:
        return any(U == self.full for U in self._minimal)

    @property
    def is_irreducible(self) -> bool:
        nonempty = [U for U in self.opens if U]
        return bool(self.points) and all(U & V for U, V in itertools.combinations(nonempty, 2))

    @property
    def is_discrete(self) -> bool:
        return all(len(U) == 1 for U in self._minimal)

    @cached_property
    def frame(self) -> "Frame":
        return Frame.from_space(self)


def validate_space(
    points: Sequence[str],
    opens: Iterable[Iterable[str]],
    names: Optional[dict[str, Iterable[str]]] = None,
) -> FiniteSpace:
    """Build a space from point names, raising NotATopologyError on bad data"""
    if len(set(points)) != len(points):
        raise NotATopologyError("duplicate point names")
    index = {p: i for i, p in enumerate(points)}
    candidate: set[Open] = set()
    for listed in opens:
        listed = list(listed)
        unknown = [p for p in listed if p not in index]
        if unknown:
            raise ResolutionError(f"open mentions unknown point {unknown[0]!r}")
        candidate.add(frozenset(index[p] for p in listed))
    full = frozenset(range(len(points)))
    if frozenset() not in candidate:
        raise NotATopologyError("empty set missing")
    if full not in candidate:
        raise NotATopologyError("full set missing")

    def show(U: Open) -> str:
        return "{" + ",".join(points[i] for i in sorted(U)) + "}"

    ordered = sorted(candidate, key=open_key)
    for U, V in itertools.combinations(ordered, 2):
        if U | V not in candidate:
            raise NotATopologyError(f"union of {show(U)} and {show(V)} is not open", (show(U), show(V)))
        if U & V not in candidate:
            raise NotATopologyError(f"intersection of {show(U)} and {show(V)} is not open", (show(U), show(V)))
    labels = {}
    for name, listed in (names or {}).items():
        U = frozenset(index[p] for p in listed)
        if U not in candidate:
            raise NotATopologyError(f"named set {name} = {show(U)} is not open")
        labels[U] = name
    return FiniteSpace(points, candidate, labels)


def sierpinski(names: Optional[dict[str, Iterable[str]]] = None) -> FiniteSpace:
    return validate_space(["eta", "sigma"], [[], ["eta"], ["eta", "sigma"]], names)


def discrete(n: int) -> FiniteSpace:
    points = [f"p{i}" for i in range(n)]
    subsets = itertools.chain.from_iterable(itertools.combinations(points, k) for k in range(n + 1))
    return validate_space(points, subsets)


def indiscrete(n: int) -> FiniteSpace:
    points = [f"p{i}" for i in range(n)]
    return validate_space(points, [[], points])


# ===== Frames =====

def _greatest(leq: np.ndarray, mask: np.ndarray) -> Optional[int]:
    candidates = np.flatnonzero(mask)
    for c in candidates:
        if leq[candidates, c].all():
            return int(c)
    return None


class Frame:
    """A finite frame given by its order matrix; meets, joins and ⇒ are tabulated"""

    def __init__(self, labels: Sequence[str], leq: np.ndarray, space: Optional[FiniteSpace] = None):
        self.labels = tuple(labels)
        self.size = len(self.labels)
        self.leq_matrix = np.asarray(leq, dtype=bool)
        self.space = space
        n = self.size
        if n == 0:
            raise FrameError("a frame has at least one element")
        if not (self.leq_matrix.diagonal().all() and not (self.leq_matrix & self.leq_matrix.T & ~np.eye(n, dtype=bool)).any()):
            raise FrameError("order relation is not antisymmetric and reflexive")
        self.meet_table = np.zeros((n, n), dtype=np.int64)
        self.join_table = np.zeros((n, n), dtype=np.int64)
        geq = self.leq_matrix.T
        for a, b in itertools.product(range(n), repeat=2):
            lower = _greatest(self.leq_matrix, self.leq_matrix[:, a] & self.leq_matrix[:, b])
            upper = _greatest(geq, self.leq_matrix[a, :] & self.leq_matrix[b, :])
            if lower is None or upper is None:
                raise FrameError(f"{self.labels[a]} and {self.labels[b]} have no meet or join")
            self.meet_table[a, b] = lower
            self.join_table[a, b] = upper
        self.bottom = int(np.flatnonzero(self.leq_matrix.all(axis=1))[0])
        self.top = int(np.flatnonzero(self.leq_matrix.all(axis=0))[0])
        self.heyting_table = np.zeros((n, n), dtype=np.int64)
        for a, b in itertools.product(range(n), repeat=2):
            c = _greatest(self.leq_matrix, self.leq_matrix[self.meet_table[:, a], b])
            self.heyting_table[a, b] = c
        for a, b, c in itertools.product(range(n), repeat=3):
            if self.meet(a, self.join(b, c)) != self.join(self.meet(a, b), self.meet(a, c)):
                raise FrameError("lattice is not distributive")
        if space is not None:
            self._element_of = {U: i for i, U in enumerate(space.opens)}

    @classmethod
    def from_order(cls, labels: Sequence[str], leq: Callable[[int, int], bool]) -> "Frame":
        n = len(labels)
        matrix = np.array([[bool(leq(a, b)) for b in range(n)] for a in range(n)], dtype=bool).reshape(n, n)
        return cls(labels, matrix)

    @classmethod
    def from_space(cls, space: FiniteSpace) -> "Frame":
        opens = space.opens
        matrix = np.array([[U <= V for V in opens] for U in opens], dtype=bool)
        return cls([space.label(U) for U in opens], matrix, space=space)

    def __repr__(self) -> str:
        return f"Frame(size={self.size})"

    @property
    def elements(self) -> range:
        return range(self.size)

    def leq(self, a: int, b: int) -> bool:
        return bool(self.leq_matrix[a, b])

    def meet(self, a: int, b: int) -> int:
        return int(self.meet_table[a, b])

    def join(self, a: int, b: int) -> int:
        return int(self.join_table[a, b])

    def heyting(self, a: int, b: int) -> int:
        return int(self.heyting_table[a, b])

    def negate(self, a: int) -> int:
        return self.heyting(a, self.bottom)

    def label(self, a: int) -> str:
        return self.labels[a]

    def open_of(self, a: int) -> Open:
        if self.space is None:
            raise FrameError("frame is not the frame of opens of a space")
        return self.space.opens[a]

    def element_of(self, U: Open) -> int:
        if self.space is None:
            raise FrameError("frame is not the frame of opens of a space")
        return self._element_of[frozenset(U)]

    def to_space(self, point_names: Optional[Sequence[str]] = None) -> tuple[FiniteSpace, dict[int, Open]]:
        """The space of points with opens {p | a ∈ p}, and the element-to-open map"""
        points = points_of_frame(self)
        names = list(point_names) if point_names is not None else [f"pt{i}" for i in range(len(points))]
        if len(names) != len(points):
            raise FrameError(f"frame has {len(points)} points, {len(names)} names given")
        opens_of = {a: frozenset(i for i, p in enumerate(points) if a in p) for a in self.elements}
        space = FiniteSpace(names, set(opens_of.values()))
        return space, opens_of


def points_of_frame(F: Frame) -> list[frozenset[int]]:
    """Completely prime filters, i.e. ↑p for join-prime p"""
    points = []
    for p in F.elements:
        if p == F.bottom:
            continue
        join_prime = all(
            F.leq(p, a) or F.leq(p, b)
            for a, b in itertools.product(F.elements, repeat=2)
            if F.leq(p, F.join(a, b))
        )
        if join_prime:
            points.append(frozenset(a for a in F.elements if F.leq(p, a)))
    return sorted(points, key=lambda K: open_key(K))


def points_of_frame_bruteforce(F: Frame) -> list[frozenset[int]]:
    """Every subset checked against the completely-prime-filter axioms"""
    found = []
    for k in range(F.size + 1):
        for subset in itertools.combinations(F.elements, k):
            K = frozenset(subset)
            if F.top not in K or F.bottom in K:
                continue
            if any(F.leq(a, b) and b not in K for a in K for b in F.elements):
                continue
            if any(F.meet(a, b) not in K for a in K for b in K):
                continue
            if any(F.join(a, b) in K and a not in K and b not in K for a in F.elements for b in F.elements):
                continue
            found.append(K)
    return sorted(found, key=open_key)


def find_frame_isomorphism(F: Frame, G: Frame) -> Optional[tuple[int, ...]]:
    """An order isomorphism F -> G, found by backtracking"""
    if F.size != G.size:
        return None

    def signature(H: Frame, a: int) -> tuple[int, int]:
        return int(H.leq_matrix[:, a].sum()), int(H.leq_matrix[a, :].sum())

    candidates = {a: [b for b in G.elements if signature(G, b) == signature(F, a)] for a in F.elements}
    order = sorted(F.elements, key=lambda a: len(candidates[a]))
    mapping: dict[int, int] = {}

    def extend(position: int) -> bool:
        if position == len(order):
            return True
        a = order[position]
        for b in candidates[a]:
            if b in mapping.values():
                continue
            if all(F.leq(a, c) == G.leq(b, d) and F.leq(c, a) == G.leq(d, b) for c, d in mapping.items()):
                mapping[a] = b
                if extend(position + 1):
                    return True
                del mapping[a]
        return False

    return tuple(mapping[a] for a in F.elements) if extend(0) else None


def is_dense(X: FiniteSpace, V: Open) -> bool:
    return X.closure(V) == X.full


# ===== Nuclei =====

@dataclass(frozen=True)
class Nucleus:
    """An endomap of a frame, tabulated on element indices"""

    frame: Frame = field(repr=False)
    table: tuple[int, ...]
    label: str

    def __call__(self, a: int) -> int:
        return self.table[a]

    def on_open(self, U: Open) -> Open:
        return self.frame.open_of(self.table[self.frame.element_of(U)])

    @classmethod
    def from_function(cls, frame: Frame, fn: Callable[[int], int], label: str) -> "Nucleus":
        return cls(frame, tuple(fn(a) for a in frame.elements), label)

    @classmethod
    def from_open_map(cls, space: FiniteSpace, fn: Callable[[Open], Open], label: str) -> "Nucleus":
        F = space.frame
        return cls(F, tuple(F.element_of(fn(U)) for U in space.opens), label)


def _require_open(X: FiniteSpace, U: Iterable[int], what: str) -> Open:
    U = frozenset(U)
    if not X.is_open(U):
        raise FrameError(f"{what} {X.label(U, force_points=True)} is not open")
    return U


def nucleus_open(X: FiniteSpace, U0: Iterable[int]) -> Nucleus:
    """j(V) = Int(U0ᶜ ∪ V)"""
    U0 = _require_open(X, U0, "open modality argument")
    return Nucleus.from_open_map(X, lambda V: X.interior((X.full - U0) | V), f"open_{X.label(U0)}")


def nucleus_closed(X: FiniteSpace, A: Iterable[int]) -> Nucleus:
    """j(V) = V ∪ Aᶜ for a closed set A"""
    A = frozenset(A)
    complement = _require_open(X, X.full - A, "complement of closed set")
    return Nucleus.from_open_map(X, lambda V: V | complement, f"closed_{X.label(A, force_points=True)}")


def nucleus_negneg(X: FiniteSpace) -> Nucleus:
    """j(V) = Int(Clos(V))"""
    return Nucleus.from_open_map(X, lambda V: X.interior(X.closure(V)), "negneg")


def nucleus_point(X: FiniteSpace, x: int) -> Nucleus:
    """j(V) = X if x ∈ V, else X minus the closure of x"""
    outside = X.full - X.closure({x})
    return Nucleus.from_open_map(X, lambda V: X.full if x in V else outside, f"point_{X.points[x]}")


def nucleus_identity(F: Frame) -> Nucleus:
    return Nucleus(F, tuple(F.elements), "id")


def frame_negneg(F: Frame) -> Nucleus:
    """a ↦ ¬¬a computed with the frame's own ⇒"""
    return Nucleus.from_function(F, lambda a: F.negate(F.negate(a)), "negneg")


def nucleus_violation(j: Nucleus) -> Optional[str]:
    """The first failing nucleus axiom, or None"""
    F = j.frame
    for a in F.elements:
        if not F.leq(a, j(a)):
            return f"not inflationary at {F.label(a)}"
        if j(j(a)) != j(a):
            return f"not idempotent at {F.label(a)}"
    for a, b in itertools.product(F.elements, repeat=2):
        if j(F.meet(a, b)) != F.meet(j(a), j(b)):
            return f"does not preserve the meet of {F.label(a)} and {F.label(b)}"
    return None


def check_nucleus(j: Nucleus) -> bool:
    return nucleus_violation(j) is None


@dataclass
class Sublocale:
    """The frame of fixed points of a nucleus"""

    parent: Frame
    nucleus: Nucleus
    fixed: tuple[int, ...]

    @cached_property
    def frame(self) -> Frame:
        F, j = self.parent, self.nucleus
        sub = Frame.from_order(
            [F.label(a) for a in self.fixed],
            lambda u, v: F.leq(self.fixed[u], self.fixed[v]),
        )
        for u, v in itertools.product(range(len(self.fixed)), repeat=2):
            a, b = self.fixed[u], self.fixed[v]
            if self.fixed[sub.join(u, v)] != j(F.join(a, b)):
                raise InternalDisagreementError(f"join of {F.label(a)} and {F.label(b)} is not j of the parent join")
            if self.fixed[sub.meet(u, v)] != F.meet(a, b):
                raise InternalDisagreementError(f"meet of {F.label(a)} and {F.label(b)} differs from the parent meet")
        return sub

    def to_space(self) -> tuple[FiniteSpace, dict[int, Open]]:
        """Points of the sublocale; the open map is keyed by parent elements"""
        space, opens_of = self.frame.to_space()
        return space, {a: opens_of[i] for i, a in enumerate(self.fixed)}


def sublocale_frame(j: Nucleus) -> Sublocale:
    fixed = tuple(a for a in j.frame.elements if j(a) == a)
    logger.debug("sublocale of %s has %d elements", j.label, len(fixed))
    return Sublocale(j.frame, j, fixed)
