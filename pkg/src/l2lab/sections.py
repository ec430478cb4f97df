"""Finite chain complexes cut out of an equivariant complex by a Følner set.

Absolute sections are the subcomplex generated by the top-degree cells over
F.  Relative sections keep the cells over F and drop boundary entries that
land outside, i.e. they are the quotient of the closure of the cells over F
by the subcomplex generated by its exterior cells.  For boxes and balls the
relative cell set is exactly ``{(c, γ) : γ ∈ F}`` in every degree.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .complexes import EquivariantChainComplex
from .groups import FolnerSet, GroupElement

Cell = tuple[int, GroupElement]


class BoundaryCondition(enum.Enum):
    RELATIVE = "relative"
    ABSOLUTE = "absolute"

    @classmethod
    def parse(cls, value) -> "BoundaryCondition":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"boundary condition must be 'relative' or 'absolute', got {value!r}")


class SectionError(ValueError):
    pass


@dataclass(eq=False)
class SectionComplex:
    condition: BoundaryCondition
    cells: tuple[tuple[Cell, ...], ...]
    boundaries: dict[int, sp.csr_matrix]
    complex_name: str
    folner: FolnerSet
    _index: list = field(default_factory=list, repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._index = [{cell: i for i, cell in enumerate(cs)} for cs in self.cells]

    @property
    def dim(self) -> int:
        return len(self.cells) - 1

    @property
    def folner_size(self) -> int:
        return len(self.folner)

    @property
    def provenance(self) -> tuple[str, str]:
        return (self.complex_name, self.folner.label)

    def index(self, j: int, cell: Cell) -> int:
        return self._index[j][cell]

    def has_cell(self, j: int, cell: Cell) -> bool:
        return cell in self._index[j]

    def boundary(self, j: int) -> sp.csr_matrix:
        """∂_j as a sparse integer matrix; zero-size at the ends."""
        if 1 <= j <= self.dim:
            return self.boundaries[j]
        lo = len(self.cells[j - 1]) if 0 <= j - 1 <= self.dim else 0
        hi = len(self.cells[j]) if 0 <= j <= self.dim else 0
        return sp.csr_matrix((lo, hi), dtype=np.int64)

    def size(self, j: int) -> int:
        return len(self.cells[j]) if 0 <= j <= self.dim else 0


def _translates(X: EquivariantChainComplex, j: int, cell: Cell):
    c, gamma = cell
    mul = X.spec.multiply
    for r, row in enumerate(X.boundary(j)):
        for g, n in row[c].terms.items():
            yield (r, mul(gamma, g)), n


def _close(X: EquivariantChainComplex, top: dict[int, set]) -> dict[int, set]:
    cells = {j: set(top.get(j, ())) for j in range(X.dim + 1)}
    for j in range(X.dim, 0, -1):
        for cell in cells[j]:
            for target, _ in _translates(X, j, cell):
                cells[j - 1].add(target)
    return cells


def _order(cells) -> tuple[Cell, ...]:
    return tuple(sorted(cells))


def build_section(X: EquivariantChainComplex, F: FolnerSet, bc) -> SectionComplex:
    bc = BoundaryCondition.parse(bc)
    if X.spec != F.spec:
        raise SectionError(f"complex over {X.spec} but Følner set over {F.spec}")
    elems = F.sorted_elements()
    over_F = {j: {(c, g) for c in range(X.orbit_counts[j]) for g in elems}
              for j in range(X.dim + 1)}
    if bc is BoundaryCondition.ABSOLUTE:
        cells = _close(X, {X.dim: over_F[X.dim]})
    else:
        hull = _close(X, over_F)
        exterior = {j: hull[j] - over_F[j] for j in hull}
        shell = _close(X, exterior)
        cells = {j: hull[j] - shell[j] for j in hull}
    ordered = tuple(_order(cells[j]) for j in range(X.dim + 1))
    index = [{cell: i for i, cell in enumerate(cs)} for cs in ordered]
    boundaries = {}
    for j in range(1, X.dim + 1):
        rows, cols, vals = [], [], []
        for col, cell in enumerate(ordered[j]):
            for target, n in _translates(X, j, cell):
                row = index[j - 1].get(target)
                if row is not None:
                    rows.append(row)
                    cols.append(col)
                    vals.append(n)
        shape = (len(ordered[j - 1]), len(ordered[j]))
        m = sp.coo_matrix((np.array(vals, dtype=np.int64), (rows, cols)), shape=shape)
        m = m.tocsr()
        m.sum_duplicates()
        m.eliminate_zeros()
        boundaries[j] = m
    S = SectionComplex(bc, ordered, boundaries, X.name, F)
    bad = first_nonzero_composite(S)
    if bad is not None:
        raise SectionError(f"∂∘∂ != 0 in section {S.provenance} ({bc.value}) at degree {bad}")
    return S


def first_nonzero_composite(S: SectionComplex) -> int | None:
    for j in range(1, S.dim):
        prod = S.boundary(j) @ S.boundary(j + 1)
        if prod.count_nonzero():
            return j
    return None


def cell_counts(S: SectionComplex) -> tuple[tuple[int, ...], int]:
    counts = tuple(len(cs) for cs in S.cells)
    return counts, sum((-1) ** j * n for j, n in enumerate(counts))
