from fractions import Fraction as F
import json
import pathlib

import pytest
from hypothesis import given, strategies as st

from eqsmooth import corpus
from eqsmooth.complex import SimplicialComplex
from eqsmooth.errors import ParseError, UnsupportedDimension
from eqsmooth.io import (CanonicalizationWarning, ComplexFile, export_off, parse_complex, plmap_block,
                         serialize_complex)

from conftest import boundary

SAMPLES = pathlib.Path(__file__).resolve().parent.parent / "samples"

TRIANGLE = b"""{
  "schema_version": 1,
  "ambient_dim": 2,
  "vertices": [
    ["0", "0"],
    ["1", "0"],
    ["0", "1"]
  ],
  "top_simplices": [
    [0, 1, 2]
  ]
}
"""


def test_minimal_triangle_round_trip():
    cf = parse_complex(TRIANGLE)
    assert cf.ambient_dim == 2 and cf.top_simplices == [[0, 1, 2]]
    assert serialize_complex(cf) == TRIANGLE
    assert len(cf.complex().facets) == 1


def test_non_canonical_rational_is_fixed_with_warning():
    data = TRIANGLE.replace(b'["1", "0"]', b'["2/4", "0"]')
    with pytest.warns(CanonicalizationWarning, match="vertices\\[1\\]\\[0\\]"):
        cf = parse_complex(data)
    assert cf.vertices[1] == (F(1, 2), 0)
    assert b'["1/2", "0"]' in serialize_complex(cf)


def test_errors_name_the_entry():
    with pytest.raises(ParseError, match=r"top_simplices\[0\]\[2\]"):
        parse_complex(TRIANGLE.replace(b"[0, 1, 2]", b"[0, 1, 7]"))
    with pytest.raises(ParseError, match="malformed JSON"):
        parse_complex(b"{not json")
    with pytest.raises(ParseError, match=r"vertices\[2\]"):
        parse_complex(TRIANGLE.replace(b'["0", "1"]', b'["0", "1", "5"]'))
    with pytest.raises(ParseError, match=r"vertices\[0\]\[1\]"):
        parse_complex(TRIANGLE.replace(b'["0", "0"]', b'["0", "x"]'))
    with pytest.raises(ParseError, match="zero denominator"):
        parse_complex(TRIANGLE.replace(b'["0", "0"]', b'["0", "1/0"]'))
    with pytest.raises(ParseError, match="missing field"):
        parse_complex(b'{"ambient_dim": 2, "vertices": []}')
    with pytest.raises(ParseError, match=r"group\[0\]"):
        parse_complex(TRIANGLE.replace(b'  "top_simplices"', b'  "group": [[0, 0, 1]],\n  "top_simplices"'))


def test_samples_round_trip_byte_identical():
    files = sorted(SAMPLES.glob("*.json"))
    assert len(files) >= 10
    for path in files:
        data = path.read_bytes()
        assert serialize_complex(parse_complex(data)) == data, path.name


def test_plmaps_survive_round_trip():
    K, g = corpus.rectangle_involution()
    cf = ComplexFile.from_complex(K, None, [plmap_block(g)])
    back = parse_complex(serialize_complex(cf))
    (h,) = back.maps()
    assert h.domain.same_as(g.domain)
    for p in g.domain.points:
        assert h(p) == g(p)


coord = st.fractions(min_value=-10, max_value=10, max_denominator=12)


@given(st.lists(st.tuples(coord, coord, coord), min_size=1, max_size=6, unique=True))
def test_serialize_parse_identity(points):
    cf = ComplexFile(3, points, [[i] for i in range(len(points))])
    data = serialize_complex(cf)
    back = parse_complex(data)
    assert back.vertices == [tuple(p) for p in points]
    assert serialize_complex(back) == data
    json.loads(data)


def test_export_off_examples():
    K = corpus.centered_tetrahedron_boundary()
    off = export_off(K).decode().splitlines()
    assert off[0] == "OFF" and off[1] == "4 4 0" and len(off) == 10
    lines = export_off(K, precision=2).decode().splitlines()
    assert lines[2] == "1.00 1.00 1.00"
    assert lines[-1].startswith("3 ")
    torus = export_off(corpus.seven_vertex_torus(), project=True).decode().splitlines()
    assert torus[1] == "7 14 0"
    with pytest.raises(UnsupportedDimension):
        export_off(boundary(4))
    flat = export_off(SimplicialComplex([(0, 0), (1, 0), (0, 1)], [(0, 1, 2)])).decode().splitlines()
    assert flat[2] == "0.000000 0.000000 0.000000" and flat[-1] == "3 0 1 2"
    assert export_off(K) == export_off(corpus.centered_tetrahedron_boundary())
    assert export_off(boundary(3), project=True).decode().splitlines()[1] == "4 4 0"
