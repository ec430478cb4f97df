import pytest

from l2lab.complex_io import ComplexParseError, dump_complex, load_complex, parse_complex
from l2lab.complexes import ComplexValidationError, builtin_complex, validate

from test_complexes import ALL_BUILTINS

CIRCLE = """\
# the circle over Z
name circle_Z
group FreeAbelian 1
euler 0
poincare yes
cells 0 1
cells 1 1
d 1 0 0 = 1*g(1) - 1*g(0)
"""


def test_circle_file_equals_builtin(tmp_path):
    path = tmp_path / "circle.cx"
    path.write_text(CIRCLE)
    assert load_complex(path) == builtin_complex("circle_Z")


@pytest.mark.parametrize("name", ALL_BUILTINS)
def test_round_trip(name):
    X = builtin_complex(name)
    assert parse_complex(dump_complex(X)) == X


def test_unbalanced_parentheses_reports_line():
    text = CIRCLE.replace("1*g(1) - 1*g(0)", "1*g(1 - 1*g(0)")
    with pytest.raises(ComplexParseError) as info:
        parse_complex(text)
    assert info.value.lineno == 8
    assert "line 8" in str(info.value)


def test_permuted_torus_generators_validate():
    X = builtin_complex("torus2_Z2")
    swapped = dump_complex(X)
    # relabel x <-> y by swapping coordinates in every term
    import re
    swapped = re.sub(r"g\((-?\d+),(-?\d+)\)", lambda m: f"g({m[2]},{m[1]})", swapped)
    Y = parse_complex(swapped)
    assert validate(Y).ok and Y != X


@pytest.mark.parametrize("text,match", [
    ("group FreeAbelian 1\ncells 0 1\nwibble 3\n", "unknown field"),
    ("cells 0 1\n", "group"),
    ("group Lamplighter\n", "unknown group"),
    ("group FreeAbelian 1\ncells 0 1\ncells 1 1\nd 1 0 0 = 1*g(1,2)\n", "bad group element"),
    ("group FreeAbelian 1\ncells 0 1\ncells 1 1\nd 1 0 0 = 1*g(1) 1*g(0)\n", "joined"),
    ("group FreeAbelian 1\ncells 0 1\ncells 1 1\nd 1 0 0 = 1*g(1)\nd 1 0 0 = 0\n", "repeated"),
    ("group FreeAbelian 1\ncells 0 1\ncells 1 1\nd 1 3 0 = 1*g(1)\n", "outside"),
    ("group FreeAbelian 1\ncells 0 1\ncells 2 1\n", "cover degrees"),
    ("group FreeGroup2\ncells 0 1\ncells 1 1\nd 1 0 0 = 1*g(1,-1)\n", "bad group element"),
])
def test_parse_errors(text, match):
    with pytest.raises(ComplexParseError, match=match):
        parse_complex(text)


def test_invalid_boundary_rejected():
    text = """\
group FreeAbelian 2
cells 0 1
cells 1 2
cells 2 1
d 1 0 0 = 1*g(1,0) - 1*g(0,0)
d 1 0 1 = 1*g(0,1) - 1*g(0,0)
d 2 0 0 = 1*g(0,0) - 1*g(0,1)
d 2 1 0 = 1*g(0,0) - 1*g(1,0)
"""
    with pytest.raises(ComplexValidationError, match="row 1, col 1"):
        parse_complex(text)
