"""Text format for equivariant chain complexes.

Grammar (UTF-8, one statement per line, ``#`` starts a comment)::

    name  <identifier>                    optional
    group FreeAbelian <d> | Heisenberg3 | FreeGroup2
    euler <int>                           optional; defaults to Σ(-1)^j n_j
    poincare yes|no                       optional; default no
    cells <j> <n_j>                       one per degree, j = 0..dim
    d <j> <row> <col> = <sum>             rows/cols are 0-based

    sum  := term (('+' | '-') term)*  |  '0'
    term := ['+'|'-'] <int> '*' 'g(' [<int> (',' <int>)*] ')'

FreeGroup2 coordinates are the letters of a reduced word (1, -1, 2, -2).
Unlisted boundary entries are zero.  Repeated entries are an error.
"""

from __future__ import annotations

import re
from pathlib import Path

from .complexes import (ComplexValidationError, EquivariantChainComplex,
                        GroupRingElement, format_ring_element, validate)
from .groups import FAMILIES, FREE_ABELIAN, GroupSpec, InvalidElementError


class ComplexParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


_TERM = re.compile(r"\s*([+-]?)\s*(\d+)\s*\*\s*g\(\s*([-+\d\s,]*)\)\s*")


def parse_sum(spec: GroupSpec, text: str, lineno: int) -> GroupRingElement:
    text = text.strip()
    if text.count("(") != text.count(")"):
        raise ComplexParseError(lineno, "unbalanced parentheses")
    if text == "0":
        return GroupRingElement.zero(spec)
    terms = []
    pos = 0
    first = True
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos:
            raise ComplexParseError(lineno, f"cannot parse term at {text[pos:]!r}")
        sign, coeff, coords = m.groups()
        if not first and not sign:
            raise ComplexParseError(lineno, "terms must be joined by + or -")
        first = False
        n = int(coeff) * (-1 if sign == "-" else 1)
        coords = coords.strip()
        try:
            g = tuple(int(v) for v in coords.split(",")) if coords else ()
            g = spec.check(g)
        except (ValueError, InvalidElementError) as exc:
            raise ComplexParseError(lineno, f"bad group element g({coords}): {exc}") from exc
        terms.append((g, n))
        pos = m.end()
    return GroupRingElement(spec, terms)


def parse_complex(text: str, source: str = "<string>") -> EquivariantChainComplex:
    spec = None
    name = Path(source).stem if source != "<string>" else "loaded"
    euler = None
    poincare = False
    cells: dict[int, int] = {}
    entries: dict[tuple[int, int, int], GroupRingElement] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        if key == "name":
            if not rest:
                raise ComplexParseError(lineno, "name needs a value")
            name = rest
        elif key == "group":
            parts = rest.split()
            if not parts or parts[0] not in FAMILIES:
                raise ComplexParseError(lineno, f"unknown group {rest!r}")
            try:
                if parts[0] == FREE_ABELIAN:
                    if len(parts) != 2:
                        raise ValueError("FreeAbelian needs one rank parameter")
                    spec = GroupSpec(FREE_ABELIAN, int(parts[1]))
                else:
                    if len(parts) != 1:
                        raise ValueError(f"{parts[0]} takes no parameters")
                    spec = GroupSpec(parts[0])
            except ValueError as exc:
                raise ComplexParseError(lineno, str(exc)) from exc
        elif key == "euler":
            try:
                euler = int(rest)
            except ValueError as exc:
                raise ComplexParseError(lineno, "euler needs an integer") from exc
        elif key == "poincare":
            if rest not in ("yes", "no"):
                raise ComplexParseError(lineno, "poincare must be yes or no")
            poincare = rest == "yes"
        elif key == "cells":
            parts = rest.split()
            if len(parts) != 2 or not all(p.lstrip("-").isdigit() for p in parts):
                raise ComplexParseError(lineno, "expected 'cells <j> <n_j>'")
            j, nj = map(int, parts)
            if j < 0 or nj < 0 or j in cells:
                raise ComplexParseError(lineno, f"bad or repeated cells line for degree {j}")
            cells[j] = nj
        elif key == "d":
            if spec is None:
                raise ComplexParseError(lineno, "'group' must precede boundary entries")
            head, eq, body = rest.partition("=")
            parts = head.split()
            if not eq or len(parts) != 3 or not all(p.isdigit() for p in parts):
                raise ComplexParseError(lineno, "expected 'd <j> <row> <col> = <sum>'")
            j, r, c = map(int, parts)
            if (j, r, c) in entries:
                raise ComplexParseError(lineno, f"repeated entry d {j} {r} {c}")
            entries[(j, r, c)] = parse_sum(spec, body, lineno)
        else:
            raise ComplexParseError(lineno, f"unknown field {key!r}")
    if spec is None:
        raise ComplexParseError(0, "missing 'group' line")
    if sorted(cells) != list(range(len(cells))) or not cells:
        raise ComplexParseError(0, "cells lines must cover degrees 0..dim")
    counts = tuple(cells[j] for j in range(len(cells)))
    zero = GroupRingElement.zero(spec)
    boundaries = {}
    for j in range(1, len(counts)):
        rows = [[zero] * counts[j] for _ in range(counts[j - 1])]
        boundaries[j] = rows
    for (j, r, c), x in entries.items():
        if j not in boundaries or r >= counts[j - 1] or c >= counts[j]:
            raise ComplexParseError(0, f"entry d {j} {r} {c} outside the declared shape")
        boundaries[j][r][c] = x
    boundaries = {j: tuple(tuple(row) for row in D) for j, D in boundaries.items()}
    chi = sum((-1) ** j * k for j, k in enumerate(counts))
    X = EquivariantChainComplex(name, spec, counts, boundaries,
                                chi if euler is None else euler, poincare)
    report = validate(X)
    if not report:
        raise ComplexValidationError(f"{source}: {report.message}")
    return X


def load_complex(path) -> EquivariantChainComplex:
    path = Path(path)
    return parse_complex(path.read_text(encoding="utf-8"), str(path))


def dump_complex(X: EquivariantChainComplex) -> str:
    lines = [f"name {X.name}"]
    if X.spec.family == FREE_ABELIAN:
        lines.append(f"group {X.spec.family} {X.spec.rank}")
    else:
        lines.append(f"group {X.spec.family}")
    lines.append(f"euler {X.euler}")
    lines.append(f"poincare {'yes' if X.poincare_duality else 'no'}")
    for j, n in enumerate(X.orbit_counts):
        lines.append(f"cells {j} {n}")
    for j in range(1, X.dim + 1):
        for r, row in enumerate(X.boundary(j)):
            for c, x in enumerate(row):
                if not x.is_zero():
                    lines.append(f"d {j} {r} {c} = {format_ring_element(x)}")
    return "\n".join(lines) + "\n"
