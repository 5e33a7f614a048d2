"""Polytope kernel tests; scipy's hull is the independent oracle where it applies."""

import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial import ConvexHull

from cornercalc.geometry import (
    BoundaryComponent,
    GeometryError,
    OrientedPolytope,
    Polytope,
    boundary,
    box,
    corner_type,
    face_key,
    interval,
    octahedron,
    orientation_equal,
    second_boundary,
    sigma,
    standard_simplex,
)


def _op(p, frame=None, sign=1):
    return OrientedPolytope(p, frame, sign)


# ---------------------------------------------------------------------------
# Construction and face lattice
# ---------------------------------------------------------------------------

def test_vertex_validation():
    with pytest.raises(GeometryError):
        Polytope(1, [[0], [1], [0]])          # duplicate
    with pytest.raises(GeometryError):
        Polytope(1, [[0], [1], ["1/2"]])      # interior point is not extreme
    with pytest.raises(GeometryError):
        Polytope(2, [[0], [1]])               # wrong coordinate length


def test_from_points_drops_non_extreme():
    p = Polytope.from_points(2, [[0, 0], [1, 0], [0, 1], [1, 1], ["1/2", "1/2"]])
    assert len(p.vertices) == 4
    assert p.dim == 2


def test_octahedron_face_counts():
    """8 facets, 12 edges, 6 vertices; scipy is the oracle for the facet count."""
    p = octahedron()
    faces = p.faces()
    assert len(faces[2]) == 8
    assert len(faces[1]) == 12
    assert len(faces[0]) == 6
    hull = ConvexHull(np.array([[float(c) for c in v] for v in p.vertices]))
    assert len(hull.simplices) == 8  # triangular facets, so simplices == facets


def test_extreme_points_match_scipy_on_random_clouds():
    rng = random.Random(21)
    for _ in range(10):
        dim = rng.choice([2, 3])
        pts = [[rng.randint(-4, 4) for _ in range(dim)] for _ in range(rng.randint(4, 9))]
        uniq = sorted(set(map(tuple, pts)))
        if len(uniq) <= dim:
            continue
        arr = np.array(uniq, dtype=float)
        try:
            hull = ConvexHull(arr)
        except Exception:
            continue  # degenerate (lower-dimensional) cloud; scipy cannot be the oracle
        mine = Polytope.from_points(dim, uniq)
        oracle = sorted(tuple(Fraction(int(x)) for x in arr[i]) for i in hull.vertices)
        assert list(mine.vertices) == oracle


def test_cube_and_simplex_counts():
    c = box([(0, 1)] * 3)
    faces = c.faces()
    assert [len(faces[d]) for d in range(4)] == [8, 12, 6, 1]
    s = standard_simplex(3)
    faces = s.faces()
    assert [len(faces[d]) for d in range(4)] == [4, 6, 4, 1]


def test_euler_relation_on_stock_shapes():
    for p in [interval(), box([(0, 1)] * 2), box([(0, 1)] * 3),
              standard_simplex(2), standard_simplex(3), octahedron()]:
        assert p.euler_characteristic() == 1


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), min_size=3, max_size=7))
def test_euler_relation_random(pts):
    p = Polytope.from_points(2, [list(x) for x in set(pts)])
    assert p.euler_characteristic() == 1


def test_corner_types():
    sq = box([(0, 1)] * 2)
    vkey = face_key([[0, 0]])
    assert corner_type(sq, vkey) == "corner"           # 2 facets through a codim-2 vertex
    oc = octahedron()
    vkey = face_key([[1, 0, 0]])
    assert corner_type(oc, vkey) == "g-corner"         # 4 facets through a codim-3 vertex
    ekey = oc.faces()[1][0]
    assert corner_type(oc, ekey) == "corner"           # edges lie in exactly 2 facets
    cube = box([(0, 1)] * 3)
    assert corner_type(cube, face_key([[0, 0, 0]])) == "corner"


def test_minimal_face_containing():
    sq = box([(0, 1)] * 2)
    assert sq.minimal_face_containing([(Fraction(1, 2), Fraction(0))]) == face_key([[0, 0], [1, 0]])
    assert sq.minimal_face_containing([(Fraction(1, 2), Fraction(1, 2))]) == sq.vertices
    assert sq.minimal_face_containing([(Fraction(0), Fraction(0))]) == face_key([[0, 0]])


def test_facet_inequalities_valid():
    for p in [box([(0, 1)] * 2), octahedron(), standard_simplex(2)]:
        for f, c, key in p.facet_inequalities():
            for v in p.vertices:
                val = sum(a * b for a, b in zip(f, v))
                assert val <= c
                assert (val == c) == (v in key)


# ---------------------------------------------------------------------------
# Orientations and boundary
# ---------------------------------------------------------------------------

def test_orientation_frame_validation():
    sq = box([(0, 1)] * 2)
    with pytest.raises(GeometryError):
        OrientedPolytope(sq, [[1, 0]])                   # wrong frame length
    with pytest.raises(GeometryError):
        OrientedPolytope(sq, [[1, 0], [2, 0]])           # dependent frame
    p = interval()
    with pytest.raises(GeometryError):
        OrientedPolytope(p, [[1, 1]])                    # 2d vector for a 1d ambient


def test_orientation_equal_and_canonical():
    sq = box([(0, 1)] * 2)
    a = _op(sq, [[1, 0], [0, 1]], 1)
    b = _op(sq, [[0, 1], [1, 0]], 1)
    assert orientation_equal(a, b) == -1
    assert orientation_equal(a, b.reversed()) == 1
    assert orientation_equal(a.canonical(), a) == 1
    c = _op(sq, [[1, 1], [0, 2]], 1)     # det 2 > 0 relative to standard
    assert orientation_equal(a, c) == 1


def test_interval_boundary_signs():
    bd = boundary(_op(interval()))
    by_face = {bc.face: bc for bc in bd}
    plus = by_face[face_key([[1]])]
    minus = by_face[face_key([[0]])]
    assert plus.oriented.sign == 1
    assert minus.oriented.sign == -1


def test_square_boundary_signs():
    """Standard orientation: edges get +,-,-,+ in canonical frames (e2 or e1)."""
    sq = box([(0, 1)] * 2)
    bd = boundary(_op(sq, [[1, 0], [0, 1]], 1))
    signs = {}
    for bc in bd:
        o = bc.oriented.canonical()
        signs[bc.face] = o.sign
    left = face_key([[0, 0], [0, 1]])
    bottom = face_key([[0, 0], [1, 0]])
    top = face_key([[0, 1], [1, 1]])
    right = face_key([[1, 0], [1, 1]])
    assert signs[right] == 1 and signs[left] == -1
    assert signs[bottom] == 1 and signs[top] == -1


def test_second_boundary_pairing_square():
    sq = box([(0, 1)] * 2)
    flags = second_boundary(_op(sq, [[1, 0], [0, 1]], 1))
    assert len(flags) == 8  # 4 vertices x 2 orderings
    for c in flags:
        partner = sigma(c, flags)
        assert partner is not c
        assert sigma(partner, flags) == c
        assert orientation_equal(c.oriented, partner.oriented) == -1


def test_second_boundary_pairing_octahedron():
    oc = octahedron()
    flags = second_boundary(_op(oc))
    assert len(flags) == 24  # 12 edges x 2 orderings
    for c in flags:
        partner = sigma(c, flags)
        assert orientation_equal(c.oriented, partner.oriented) == -1


def test_second_boundary_pairing_simplex_3d():
    s = standard_simplex(3)
    flags = second_boundary(_op(s))
    assert len(flags) == 12  # 6 edges x 2
    for c in flags:
        assert orientation_equal(sigma(c, flags).oriented, c.oriented) == -1


def test_boundary_of_boundary_face_multiset():
    """Codim-2 faces seen through facets' boundaries equal the second boundary flags."""
    cube = box([(0, 1)] * 3)
    op = _op(cube)
    seen = []
    for bc in boundary(op):
        for bc2 in boundary(bc.oriented):
            seen.append((bc.face, bc2.face))
    flags = [(c.first_facet, c.face) for c in second_boundary(op)]
    assert sorted(seen) == sorted(flags)
