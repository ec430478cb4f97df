"""Free cocompact Γ-CW complexes with boundary matrices over the group ring.

Chain groups are free left ZΓ-modules with one basis cell per orbit.  The
boundary of cell ``c`` in degree ``j`` is ``sum_r D_j[r][c] * e_r`` with
``D_j[r][c]`` in ZΓ, so the translate ``γ e_c`` has boundary
``sum_r sum_g n_g (γ g) e_r``.  Composition therefore reads

    (∂_j ∂_{j+1})[q][c] = sum_r D_{j+1}[r][c] * D_j[q][r]

with the higher-degree coefficient on the left, as in Fox calculus.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .groups import (GroupElement, GroupSpec, free_abelian, free_group2,
                     heisenberg3)


class GroupRingElement:
    """Finite integer combination of group elements, zero terms never stored."""

    __slots__ = ("spec", "terms")

    def __init__(self, spec: GroupSpec, terms: Mapping | Iterable = ()):
        acc: dict[GroupElement, int] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for g, n in items:
            g = spec.check(g)
            acc[g] = acc.get(g, 0) + int(n)
        self.spec = spec
        self.terms = {g: n for g, n in acc.items() if n != 0}

    @classmethod
    def zero(cls, spec):
        return cls(spec)

    @classmethod
    def unit(cls, spec, g=None, n=1):
        return cls(spec, {spec.identity if g is None else g: n})

    def is_zero(self) -> bool:
        return not self.terms

    def augmentation(self) -> int:
        return sum(self.terms.values())

    def support(self) -> list[GroupElement]:
        return sorted(self.terms)

    def __add__(self, other):
        acc = dict(self.terms)
        for g, n in other.terms.items():
            acc[g] = acc.get(g, 0) + n
        return GroupRingElement(self.spec, acc)

    def __neg__(self):
        return GroupRingElement(self.spec, {g: -n for g, n in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return GroupRingElement(self.spec, {g: n * other for g, n in self.terms.items()})
        acc: dict[GroupElement, int] = {}
        mul = self.spec.multiply
        for g, m in self.terms.items():
            for h, n in other.terms.items():
                gh = mul(g, h)
                acc[gh] = acc.get(gh, 0) + m * n
        return GroupRingElement(self.spec, acc)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, GroupRingElement):
            return NotImplemented
        return self.spec == other.spec and self.terms == other.terms

    def __hash__(self):
        return hash((self.spec, frozenset(self.terms.items())))

    def __repr__(self):
        return f"GroupRingElement({format_ring_element(self)})"


def format_ring_element(x: GroupRingElement) -> str:
    if x.is_zero():
        return "0"
    parts = []
    for g in x.support():
        n = x.terms[g]
        coords = ",".join(str(v) for v in g)
        parts.append(f"{'+' if n > 0 else '-'}{abs(n)}*g({coords})")
    text = " ".join(parts)
    return text[1:] if text.startswith("+") else text


Matrix = tuple[tuple[GroupRingElement, ...], ...]


@dataclass(frozen=True)
class EquivariantChainComplex:
    """``boundaries[j]`` has shape ``orbit_counts[j-1] x orbit_counts[j]``."""

    name: str
    spec: GroupSpec
    orbit_counts: tuple[int, ...]
    boundaries: Mapping[int, Matrix]
    euler: int
    poincare_duality: bool = False
    notes: str = field(default="", compare=False)

    @property
    def dim(self) -> int:
        return len(self.orbit_counts) - 1

    def boundary(self, j: int) -> Matrix:
        if j < 1 or j > self.dim:
            n_lo = self.orbit_counts[j - 1] if 1 <= j <= self.dim + 1 else 0
            n_hi = self.orbit_counts[j] if 0 <= j <= self.dim else 0
            zero = GroupRingElement.zero(self.spec)
            return tuple(tuple(zero for _ in range(n_hi)) for _ in range(n_lo))
        return self.boundaries[j]

    def max_word_length(self) -> int:
        return max((self.spec.word_length(g)
                    for D in self.boundaries.values() for row in D for x in row
                    for g in x.terms), default=0)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    message: str = "ok"
    degree: int | None = None
    row: int | None = None
    col: int | None = None

    def __bool__(self):
        return self.ok


def compose(spec: GroupSpec, lower: Matrix, upper: Matrix, n_mid: int) -> list[list[GroupRingElement]]:
    """Group-ring product ``∂_j ∂_{j+1}`` in the left-coefficient convention."""
    rows = len(lower)
    cols = len(upper[0]) if upper else 0
    out = []
    for q in range(rows):
        row = []
        for c in range(cols):
            acc = GroupRingElement.zero(spec)
            for r in range(n_mid):
                acc = acc + upper[r][c] * lower[q][r]
            row.append(acc)
        out.append(row)
    return out


def validate(X: EquivariantChainComplex) -> ValidationReport:
    """Shape consistency and exact ``∂∘∂ = 0``; positions reported 1-based."""
    n = X.orbit_counts
    if any(k < 0 for k in n):
        return ValidationReport(False, "negative orbit count")
    for j, D in X.boundaries.items():
        if not 1 <= j <= X.dim:
            return ValidationReport(False, f"boundary in degree {j} outside 1..{X.dim}", j)
        if len(D) != n[j - 1] or any(len(row) != n[j] for row in D):
            return ValidationReport(
                False, f"∂_{j} must have shape {n[j - 1]}x{n[j]}", j)
        for row in D:
            for x in row:
                if x.spec != X.spec:
                    return ValidationReport(False, f"∂_{j} entry over wrong group", j)
    for j in range(1, X.dim):
        if j not in X.boundaries or j + 1 not in X.boundaries:
            continue
        prod = compose(X.spec, X.boundaries[j], X.boundaries[j + 1], n[j])
        for q, row in enumerate(prod):
            for c, x in enumerate(row):
                if not x.is_zero():
                    return ValidationReport(
                        False,
                        f"∂_{j}∂_{j + 1} nonzero at (row {q + 1}, col {c + 1}): "
                        f"{format_ring_element(x)}", j, q + 1, c + 1)
    chi = sum((-1) ** j * k for j, k in enumerate(n))
    if chi != X.euler:
        return ValidationReport(False, f"alternating orbit count {chi} != stored χ {X.euler}")
    return ValidationReport(True)


class ComplexValidationError(ValueError):
    pass


def checked(X: EquivariantChainComplex) -> EquivariantChainComplex:
    report = validate(X)
    if not report:
        raise ComplexValidationError(f"{X.name}: {report.message}")
    return X


# Fox calculus -------------------------------------------------------------

Word = Sequence[tuple[int, int]]  # (letter index, ±1)


def fox_derivative(spec: GroupSpec, word: Word, letter: int,
                   images: Sequence[GroupElement]) -> GroupRingElement:
    """∂w/∂x for a word over letters mapped to group elements by ``images``."""
    acc: dict[GroupElement, int] = {}
    prefix = spec.identity
    for idx, sign in word:
        img = images[idx] if sign > 0 else spec.inverse(images[idx])
        if idx == letter:
            if sign > 0:
                acc[prefix] = acc.get(prefix, 0) + 1
            else:
                after = spec.multiply(prefix, img)
                acc[after] = acc.get(after, 0) - 1
        prefix = spec.multiply(prefix, img)
    if prefix != spec.identity:
        raise ValueError("relator does not evaluate to the identity")
    return GroupRingElement(spec, acc)


def presentation_boundaries(spec: GroupSpec, images: Sequence[GroupElement],
                            relators: Sequence[Word]) -> dict[int, Matrix]:
    """∂_1 and ∂_2 of the one-vertex presentation complex."""
    one = GroupRingElement.unit(spec)
    d1 = (tuple(GroupRingElement.unit(spec, g) - one for g in images),)
    d2 = tuple(tuple(fox_derivative(spec, rel, x, images) for rel in relators)
               for x in range(len(images)))
    out = {1: d1}
    if relators:
        out[2] = d2
    return out


def _commutator(i: int, j: int) -> list[tuple[int, int]]:
    return [(i, 1), (j, 1), (i, -1), (j, -1)]


def _ring(spec, terms):
    return GroupRingElement(spec, terms)


def circle() -> EquivariantChainComplex:
    spec = free_abelian(1)
    d = presentation_boundaries(spec, [(1,)], [])
    return checked(EquivariantChainComplex("circle_Z", spec, (1, 1), d, 0, True))


def torus2() -> EquivariantChainComplex:
    spec = free_abelian(2)
    d = presentation_boundaries(spec, [(1, 0), (0, 1)], [_commutator(0, 1)])
    return checked(EquivariantChainComplex("torus2_Z2", spec, (1, 2, 1), d, 0, True))


def torus3() -> EquivariantChainComplex:
    spec = free_abelian(3)
    x, y, z = (1, 0, 0), (0, 1, 0), (0, 0, 1)
    e = spec.identity
    d = presentation_boundaries(spec, [x, y, z],
                                [_commutator(0, 1), _commutator(0, 2), _commutator(1, 2)])
    # 3-cell: (1 - z) f_xy + (y - 1) f_xz + (1 - x) f_yz
    d[3] = ((_ring(spec, {e: 1, z: -1}),),
            (_ring(spec, {y: 1, e: -1}),),
            (_ring(spec, {e: 1, x: -1}),))
    return checked(EquivariantChainComplex("torus3_Z3", spec, (1, 3, 3, 1), d, 0, True))


def surface(genus: int) -> EquivariantChainComplex:
    """Closed orientable surface over its universal homology cover Z^{2g}."""
    if genus < 1:
        raise ValueError("genus must be >= 1")
    spec = free_abelian(2 * genus)
    images = []
    for i in range(2 * genus):
        v = [0] * (2 * genus)
        v[i] = 1
        images.append(tuple(v))
    relator = []
    for i in range(genus):
        relator += _commutator(2 * i, 2 * i + 1)
    d = presentation_boundaries(spec, images, [relator])
    name = f"surface_genus({genus})_Z{2 * genus}"
    return checked(EquivariantChainComplex(name, spec, (1, 2 * genus, 1), d,
                                           2 - 2 * genus, True))


def wedge2() -> EquivariantChainComplex:
    spec = free_group2()
    d = presentation_boundaries(spec, [(1,), (2,)], [])
    return checked(EquivariantChainComplex("wedge2_F2", spec, (1, 2), d, -1, False))


def heisenberg_manifold() -> EquivariantChainComplex:
    """Nilmanifold: letters a, b, c with c = [a, b] central.

    Relators b c b^-1 c^-1, a b a^-1 c^-1 b^-1, a c a^-1 c^-1; the 3-cell
    boundary (1 - a) f_1 + (1 - c) f_2 + (bc - 1) f_3 solves the Fox
    identity for these relators.
    """
    spec = heisenberg3()
    a, b, c = (1, 0, 0), (0, 1, 0), (0, 0, 1)
    e = spec.identity
    relators = [
        [(1, 1), (2, 1), (1, -1), (2, -1)],
        [(0, 1), (1, 1), (0, -1), (2, -1), (1, -1)],
        [(0, 1), (2, 1), (0, -1), (2, -1)],
    ]
    d = presentation_boundaries(spec, [a, b, c], relators)
    bc = spec.multiply(b, c)
    d[3] = ((_ring(spec, {e: 1, a: -1}),),
            (_ring(spec, {e: 1, c: -1}),),
            (_ring(spec, {bc: 1, e: -1}),))
    return checked(EquivariantChainComplex("heisenberg_manifold", spec, (1, 3, 3, 1),
                                           d, 0, True))


_SURFACE = re.compile(r"^surface_genus\(?(\d+)\)?(?:_Z(\d+))?$")

BUILTIN_NAMES = ("circle_Z", "torus2_Z2", "torus3_Z3", "surface_genus(g)_Z2g",
                 "wedge2_F2", "heisenberg_manifold")


def builtin_complex(name: str) -> EquivariantChainComplex:
    simple = {
        "circle_Z": circle,
        "torus2_Z2": torus2,
        "torus3_Z3": torus3,
        "wedge2_F2": wedge2,
        "heisenberg_manifold": heisenberg_manifold,
    }
    if name in simple:
        return simple[name]()
    m = _SURFACE.match(name)
    if m:
        g = int(m.group(1))
        if m.group(2) is not None and int(m.group(2)) != 2 * g:
            raise ValueError(f"surface of genus {g} is covered by Z^{2 * g}, not Z^{m.group(2)}")
        return surface(g)
    raise ValueError(f"unknown built-in complex {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
