"""Deck groups with exact arithmetic, Følner boxes and word-metric boundaries.

Elements are plain integer tuples:

* ``FreeAbelian(d)``: ``d`` integers.
* ``Heisenberg3``: ``(a, b, c)`` with product
  ``(a, b, c) * (a', b', c') = (a + a', b + b', c + c' + a * b')``.
* ``FreeGroup2``: a reduced word, letters ``1, -1, 2, -2`` standing for
  ``x, x^-1, y, y^-1``.  The identity is the empty tuple.

The Cayley graph joins ``g`` to ``g * s`` for every directed generator ``s``
(right multiplication), which is the convention the equivariant complexes
use for translates of cells.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable

GroupElement = tuple[int, ...]

FREE_ABELIAN = "FreeAbelian"
HEISENBERG3 = "Heisenberg3"
FREE_GROUP2 = "FreeGroup2"
FAMILIES = (FREE_ABELIAN, HEISENBERG3, FREE_GROUP2)


class InvalidElementError(ValueError):
    pass


@dataclass(frozen=True)
class GroupSpec:
    family: str
    rank: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown group family {self.family!r}")
        if self.family == FREE_ABELIAN and self.rank < 1:
            raise ValueError("FreeAbelian needs a positive rank")
        if self.family != FREE_ABELIAN and self.rank != 0:
            raise ValueError(f"{self.family} takes no rank parameter")

    def __str__(self):
        if self.family == FREE_ABELIAN:
            return f"{self.family}({self.rank})"
        return self.family

    @property
    def amenable(self) -> bool:
        return self.family != FREE_GROUP2

    @property
    def abelian(self) -> bool:
        return self.family == FREE_ABELIAN

    @property
    def identity(self) -> GroupElement:
        if self.family == FREE_ABELIAN:
            return (0,) * self.rank
        if self.family == HEISENBERG3:
            return (0, 0, 0)
        return ()

    @property
    def generators(self) -> tuple[GroupElement, ...]:
        """Directed generators: each standard generator followed by its inverse."""
        if self.family == FREE_ABELIAN:
            gens = []
            for i in range(self.rank):
                e = [0] * self.rank
                e[i] = 1
                gens.append(tuple(e))
                e[i] = -1
                gens.append(tuple(e))
            return tuple(gens)
        if self.family == HEISENBERG3:
            return ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0))
        return ((1,), (-1,), (2,), (-2,))

    def check(self, g) -> GroupElement:
        """Return ``g`` as a tuple, raising InvalidElementError if malformed."""
        try:
            g = tuple(int(v) for v in g)
        except TypeError as exc:
            raise InvalidElementError(f"not an integer tuple: {g!r}") from exc
        if self.family == FREE_ABELIAN:
            if len(g) != self.rank:
                raise InvalidElementError(
                    f"{self} element needs {self.rank} coordinates, got {len(g)}")
        elif self.family == HEISENBERG3:
            if len(g) != 3:
                raise InvalidElementError(
                    f"Heisenberg3 element needs 3 coordinates, got {len(g)}")
        else:
            for i, letter in enumerate(g):
                if letter not in (1, -1, 2, -2):
                    raise InvalidElementError(f"bad free-group letter {letter}")
                if i and g[i - 1] == -letter:
                    raise InvalidElementError(f"word {g} is not reduced")
        return g

    def multiply(self, g: GroupElement, h: GroupElement) -> GroupElement:
        if self.family == FREE_ABELIAN:
            if len(g) != self.rank or len(h) != self.rank:
                raise InvalidElementError(f"coordinate arity mismatch for {self}")
            return tuple(x + y for x, y in zip(g, h))
        if self.family == HEISENBERG3:
            if len(g) != 3 or len(h) != 3:
                raise InvalidElementError("coordinate arity mismatch for Heisenberg3")
            return (g[0] + h[0], g[1] + h[1], g[2] + h[2] + g[0] * h[1])
        word = list(g)
        for letter in h:
            if word and word[-1] == -letter:
                word.pop()
            else:
                word.append(letter)
        return tuple(word)

    def inverse(self, g: GroupElement) -> GroupElement:
        if self.family == FREE_ABELIAN:
            return tuple(-x for x in g)
        if self.family == HEISENBERG3:
            a, b, c = g
            return (-a, -b, -c + a * b)
        return tuple(-letter for letter in reversed(g))

    def neighbors(self, g: GroupElement) -> list[GroupElement]:
        return [self.multiply(g, s) for s in self.generators]

    def word_length(self, g: GroupElement) -> int:
        """Cayley-graph distance from the identity (BFS; small elements only)."""
        g = self.check(g)
        if self.family == FREE_ABELIAN:
            return sum(abs(x) for x in g)
        if self.family == FREE_GROUP2:
            return len(g)
        dist = bfs_distances(self, [self.identity], stop_at=g)
        return dist[g]


def free_abelian(d: int) -> GroupSpec:
    return GroupSpec(FREE_ABELIAN, d)


def heisenberg3() -> GroupSpec:
    return GroupSpec(HEISENBERG3)


def free_group2() -> GroupSpec:
    return GroupSpec(FREE_GROUP2)


def multiply(spec: GroupSpec, g: GroupElement, h: GroupElement) -> GroupElement:
    return spec.multiply(spec.check(g), spec.check(h))


def bfs_distances(spec: GroupSpec, sources: Iterable[GroupElement],
                  max_depth: int | None = None,
                  stop_at: GroupElement | None = None) -> dict[GroupElement, int]:
    """Multi-source BFS in the Cayley graph of the whole group."""
    dist = {}
    queue = deque()
    for s in sources:
        if s not in dist:
            dist[s] = 0
            queue.append(s)
    while queue:
        g = queue.popleft()
        if stop_at is not None and g == stop_at:
            break
        d = dist[g]
        if max_depth is not None and d >= max_depth:
            continue
        for h in spec.neighbors(g):
            if h not in dist:
                dist[h] = d + 1
                queue.append(h)
    return dist


@dataclass(frozen=True)
class FolnerSet:
    spec: GroupSpec
    elements: frozenset
    label: str

    def __len__(self):
        return len(self.elements)

    def __contains__(self, g):
        return g in self.elements

    def sorted_elements(self) -> list[GroupElement]:
        return sorted(self.elements)


def folner_set(spec: GroupSpec, elements: Iterable, label: str = "custom") -> FolnerSet:
    """Validate a user-supplied finite set: identity-containing and connected."""
    elems = frozenset(spec.check(g) for g in elements)
    if spec.identity not in elems:
        raise ValueError("Følner set must contain the identity")
    seen = {spec.identity}
    queue = deque([spec.identity])
    while queue:
        g = queue.popleft()
        for h in spec.neighbors(g):
            if h in elems and h not in seen:
                seen.add(h)
                queue.append(h)
    if len(seen) != len(elems):
        raise ValueError("Følner set is not connected in the Cayley graph")
    return FolnerSet(spec, elems, label)


def folner_box(spec: GroupSpec, L: int) -> FolnerSet:
    """Box ``[0, L)^d`` (FreeAbelian), ``[0,L)^2 x [0,L^2)`` (Heisenberg3),
    or the Cayley ball of radius ``L`` (FreeGroup2, negative control)."""
    if L < 1:
        raise ValueError("L must be >= 1")
    if spec.family == FREE_ABELIAN:
        import itertools
        elems = itertools.product(range(L), repeat=spec.rank)
        return FolnerSet(spec, frozenset(elems), f"box L={L}")
    if spec.family == HEISENBERG3:
        elems = ((a, b, c) for a in range(L) for b in range(L) for c in range(L * L))
        return FolnerSet(spec, frozenset(elems), f"box L={L}")
    ball = bfs_distances(spec, [spec.identity], max_depth=L)
    return FolnerSet(spec, frozenset(ball), f"ball r={L}")


def inner_boundary(F: FolnerSet) -> frozenset:
    """Elements of F having a generator translate outside F."""
    spec = F.spec
    return frozenset(g for g in F.elements
                     if any(h not in F.elements for h in spec.neighbors(g)))


def boundary_layer(F: FolnerSet, delta: int) -> frozenset:
    """Discrete ``delta``-neighbourhood of the boundary of F.

    Interior part: elements of F within distance ``delta - 1`` of the inner
    boundary.  Exterior part: elements outside F within distance ``delta``
    of F.
    """
    if delta < 1:
        raise ValueError("delta must be >= 1")
    spec = F.spec
    near_inner = bfs_distances(spec, inner_boundary(F), max_depth=delta - 1)
    inner = {g for g in near_inner if g in F.elements}
    outer = {g for g in bfs_distances(spec, F.elements, max_depth=delta)
             if g not in F.elements}
    return frozenset(inner | outer)


def distance_to_inner_boundary(F: FolnerSet) -> dict[GroupElement, int]:
    """Distance from each element of F to the inner boundary, walking inside F."""
    spec = F.spec
    dist = {g: 0 for g in inner_boundary(F)}
    queue = deque(dist)
    while queue:
        g = queue.popleft()
        for h in spec.neighbors(g):
            if h in F.elements and h not in dist:
                dist[h] = dist[g] + 1
                queue.append(h)
    return dist


def boundary_edge_count(F: FolnerSet) -> int:
    spec = F.spec
    return sum(1 for g in F.elements for h in spec.neighbors(g)
               if h not in F.elements)


def cheeger_ratio(F: FolnerSet) -> float:
    """Edges of the Cayley graph with exactly one endpoint in F, over |F|."""
    if len(F) == 0:
        raise ValueError("cheeger_ratio of an empty set")
    return boundary_edge_count(F) / len(F)
