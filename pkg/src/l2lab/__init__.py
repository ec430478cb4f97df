"""Finite-section approximations of L² invariants of amenable covers.

Chain complexes of free Z[Γ]-modules are cut down to Følner sets with
relative or absolute boundary conditions; Betti numbers, heat traces,
counting functions and zeta functions of the sections are compared with
von Neumann quantities computed from the Fourier symbol.
"""

from .complexes import EquivariantChainComplex, builtin_complex, validate
from .groups import folner_box, free_abelian, free_group2, heisenberg3
from .sections import BoundaryCondition, SectionComplex, build_section

__version__ = "0.1.0"

__all__ = [
    "BoundaryCondition", "EquivariantChainComplex", "SectionComplex", "build_section",
    "builtin_complex", "folner_box", "free_abelian", "free_group2", "heisenberg3",
    "validate",
]
