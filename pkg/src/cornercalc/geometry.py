"""Compact convex polytopes with exact rational vertices, orientations, boundaries.

A polytope is stored by its vertex set (the extreme points, verified at
construction). Faces are identified by their sorted vertex tuples, so face keys
are stable across sub-polytope constructions and canonicalization. Orientations
are frames: ordered bases of the direction space of the affine hull, together
with a sign. The induced orientation on a boundary facet puts the outward
normal first; the second boundary enumerates flags (codim-2 face, ordered pair
of facets) and carries the free involution that swaps the flag order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence

from ._linalg import (
    Mat,
    Vec,
    canonical_frame,
    change_of_basis_det,
    frac,
    in_span,
    kernel_basis,
    lp_feasible,
    mat,
    matvec,
    rref,
    solve,
    transpose,
    vec,
    vsub,
)

FaceKey = tuple[Vec, ...]  # sorted tuple of vertex coordinate tuples


class GeometryError(ValueError):
    """Raised for malformed polytopes, frames, or face queries."""


def _sorted_vertices(vertices: Iterable[Iterable]) -> tuple[Vec, ...]:
    return tuple(sorted(vec(v) for v in vertices))


def face_key(vertices: Iterable[Iterable]) -> FaceKey:
    return _sorted_vertices(vertices)


@lru_cache(maxsize=4096)
def _face_data(ambient_dim: int, vertices: tuple[Vec, ...]):
    """Shared face computations keyed by the canonical vertex tuple."""
    return _FaceData(ambient_dim, vertices)


class _FaceData:
    def __init__(self, ambient_dim: int, vertices: tuple[Vec, ...]):
        self.ambient_dim = ambient_dim
        self.vertices = vertices
        v0 = vertices[0]
        diffs = [vsub(v, v0) for v in vertices[1:]]
        if diffs:
            red, pivots = rref(mat(diffs))
            self.dir_basis: Mat = tuple(red[i] for i in range(len(pivots)))
        else:
            self.dir_basis = ()
        self.dim = len(self.dir_basis)
        self._local = None
        self._facets: Optional[list] = None
        self._faces_by_dim: Optional[dict] = None

    # -- affine-hull coordinates --------------------------------------------

    def local_matrix(self) -> Mat:
        """Matrix L with L(w) = coordinates of w in dir_basis, for w in the span."""
        if self._local is None:
            d = self.dir_basis
            if not d:
                self._local = ()
            else:
                gram = mat([[sum(a * b for a, b in zip(r1, r2)) for r2 in d] for r1 in d])
                # L = Gram^{-1} D ; solve Gram * row_i = D_i for each row
                rows = []
                for i in range(len(d)):
                    e = vec([1 if j == i else 0 for j in range(len(d))])
                    rows.append(solve(gram, e))
                ginv = mat(rows)
                self._local = tuple(
                    tuple(sum(ginv[i][k] * d[k][j] for k in range(len(d)))
                          for j in range(self.ambient_dim))
                    for i in range(len(d)))
        return self._local

    def local_coords(self, point: Vec) -> Vec:
        return matvec(self.local_matrix(), vsub(point, self.vertices[0]))

    # -- facets --------------------------------------------------------------

    def facets(self) -> list[tuple[FaceKey, Vec]]:
        """(face_key, outward vector in the direction space) for every facet."""
        if self._facets is not None:
            return self._facets
        d = self.dim
        out: dict[FaceKey, Vec] = {}
        if d > 0:
            pts = [self.local_coords(v) for v in self.vertices]
            n = len(pts)
            bary = tuple(sum(p[j] for p in pts) / n for j in range(d))
            for subset in itertools.combinations(range(n), d):
                base = pts[subset[0]]
                diffs = [vsub(pts[i], base) for i in subset[1:]]
                if diffs:
                    kb = kernel_basis(mat(diffs))
                else:
                    kb = kernel_basis(mat([[Fraction(0)] * d]))
                if len(kb) != 1:
                    continue
                a = kb[0]
                b = sum(x * y for x, y in zip(a, base))
                vals = [sum(x * y for x, y in zip(a, p)) - b for p in pts]
                if all(v >= 0 for v in vals):
                    inward = a
                elif all(v <= 0 for v in vals):
                    inward = tuple(-x for x in a)
                else:
                    continue
                members = tuple(sorted(self.vertices[i] for i in range(n) if vals[i] == 0))
                if members in out:
                    continue
                # outward ambient vector: -inward pulled back through dir_basis
                amb = tuple(
                    sum(-inward[i] * self.dir_basis[i][j] for i in range(d))
                    for j in range(self.ambient_dim))
                out[members] = amb
        self._facets = sorted(out.items())
        return self._facets

    def faces_by_dim(self) -> dict[int, list[FaceKey]]:
        """All nonempty faces, the polytope itself included, grouped by dimension."""
        if self._faces_by_dim is not None:
            return self._faces_by_dim
        levels: dict[int, set[FaceKey]] = {self.dim: {self.vertices}}
        frontier = [self]
        while frontier:
            nxt = []
            for fd in frontier:
                for key, _ in fd.facets():
                    lvl = levels.setdefault(fd.dim - 1, set())
                    if key not in lvl:
                        lvl.add(key)
                        nxt.append(_face_data(self.ambient_dim, key))
            frontier = nxt
        self._faces_by_dim = {k: sorted(v) for k, v in sorted(levels.items())}
        return self._faces_by_dim


@dataclass(frozen=True)
class Polytope:
    """Convex hull of finitely many exact rational points, stored by extreme points.

    The constructor insists that the given vertices are exactly the extreme
    points; use from_points to hull an arbitrary finite point set.
    """

    ambient_dim: int
    vertices: tuple[Vec, ...]

    def __init__(self, ambient_dim: int, vertices: Iterable[Iterable], _trusted: bool = False):
        vs = _sorted_vertices(vertices)
        if not vs:
            raise GeometryError("polytope needs at least one vertex")
        if any(len(v) != ambient_dim for v in vs):
            raise GeometryError("vertex dimension does not match ambient_dim")
        if len(set(vs)) != len(vs):
            raise GeometryError("duplicate vertices")
        if not _trusted:
            for i, v in enumerate(vs):
                others = vs[:i] + vs[i + 1:]
                if others and _in_hull(others, v):
                    raise GeometryError(f"vertex {v} is not an extreme point")
        object.__setattr__(self, "ambient_dim", ambient_dim)
        object.__setattr__(self, "vertices", vs)

    @staticmethod
    def from_points(ambient_dim: int, points: Iterable[Iterable]) -> "Polytope":
        pts = _sorted_vertices(points)
        if not pts:
            raise GeometryError("polytope needs at least one point")
        uniq = tuple(dict.fromkeys(pts))
        extreme = [p for i, p in enumerate(uniq)
                   if not _in_hull(uniq[:i] + uniq[i + 1:], p)]
        return Polytope(ambient_dim, extreme, _trusted=True)

    # -- cached shared data --------------------------------------------------

    @property
    def _fd(self) -> _FaceData:
        return _face_data(self.ambient_dim, self.vertices)

    @property
    def dim(self) -> int:
        return self._fd.dim

    @property
    def dir_basis(self) -> Mat:
        """Canonical (RREF) basis of the direction space of the affine hull."""
        return self._fd.dir_basis

    def local_coords(self, point: Sequence) -> Vec:
        return self._fd.local_coords(vec(point))

    def barycenter(self) -> Vec:
        n = len(self.vertices)
        return tuple(sum(v[j] for v in self.vertices) / n for j in range(self.ambient_dim))

    # -- faces ---------------------------------------------------------------

    def facets(self) -> list[tuple[FaceKey, Vec]]:
        return self._fd.facets()

    def faces(self) -> dict[int, list[FaceKey]]:
        return self._fd.faces_by_dim()

    def all_face_keys(self) -> list[FaceKey]:
        return [k for _, keys in sorted(self.faces().items()) for k in keys]

    def face_polytope(self, key: FaceKey) -> "Polytope":
        return Polytope(self.ambient_dim, key, _trusted=True)

    def minimal_face_containing(self, points: Sequence[Vec]) -> FaceKey:
        """Smallest face containing every given point of the polytope.

        Computed as the face cut out by the facet inequalities tight on all the
        points; the points must lie in the polytope.
        """
        tight = []
        for f, c, key in self.facet_inequalities():
            vals = [sum(a * b for a, b in zip(f, p)) for p in points]
            if any(v > c for v in vals):
                raise GeometryError("points not contained in the polytope")
            if all(v == c for v in vals):
                tight.append((f, c))
        if not tight:
            return self.vertices
        members = [v for v in self.vertices
                   if all(sum(a * b for a, b in zip(f, v)) == c for f, c in tight)]
        return tuple(sorted(members))

    def contains(self, point: Sequence) -> bool:
        return _in_hull(self.vertices, vec(point))

    # -- H-representation ----------------------------------------------------

    def affine_hull_equations(self) -> list[tuple[Vec, Fraction]]:
        """Pairs (e, c) with e . x = c on the polytope, spanning the hull's equations."""
        d = self.dir_basis
        if len(d) == self.ambient_dim:
            return []
        if not d:
            eqs = [tuple(Fraction(1 if j == i else 0) for j in range(self.ambient_dim))
                   for i in range(self.ambient_dim)]
        else:
            eqs = list(kernel_basis(mat(d)))
        v0 = self.vertices[0]
        return [(e, sum(a * b for a, b in zip(e, v0))) for e in eqs]

    def facet_inequalities(self) -> list[tuple[Vec, Fraction, FaceKey]]:
        """Triples (f, c, key): f . x <= c on the polytope, equality exactly on the facet."""
        out = []
        lm = self._fd.local_matrix()
        v0 = self.vertices[0]
        for key, outward in self.facets():
            # functional increasing in the outward direction
            local_out = matvec(lm, outward)
            f_amb = tuple(sum(local_out[i] * lm[i][j] for i in range(len(lm)))
                          for j in range(self.ambient_dim))
            c = max(sum(a * b for a, b in zip(f_amb, v)) for v in self.vertices)
            on_facet = [v for v in self.vertices
                        if sum(a * b for a, b in zip(f_amb, v)) == c]
            if tuple(sorted(on_facet)) != key:
                raise GeometryError("facet functional mismatch")
            out.append((f_amb, c, key))
        return out

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * len(keys) for d, keys in self.faces().items())


def _in_hull(points: Sequence[Vec], p: Vec) -> bool:
    """Exact membership p in conv(points) via LP feasibility."""
    if not points:
        return False
    n = len(points)
    dim = len(p)
    a = mat([[points[j][i] for j in range(n)] for i in range(dim)] + [[1] * n])
    b = vec(list(p) + [1])
    return lp_feasible(a, b)


# ---------------------------------------------------------------------------
# Orientations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrientedPolytope:
    """A polytope with an orientation: a frame spanning its direction space and a sign.

    A zero-dimensional polytope has the empty frame; its orientation is the sign.
    """

    polytope: Polytope
    frame: Mat
    sign: int

    def __init__(self, polytope: Polytope, frame: Iterable[Iterable] = None, sign: int = 1):
        fr = mat(frame) if frame is not None else polytope.dir_basis
        if sign not in (1, -1):
            raise GeometryError("sign must be +1 or -1")
        if len(fr) != polytope.dim:
            raise GeometryError("frame length must equal the polytope dimension")
        for v in fr:
            if len(v) != polytope.ambient_dim:
                raise GeometryError("frame vector dimension mismatch")
            if not in_span(polytope.dir_basis, v):
                raise GeometryError("frame vector outside the direction space")
        if fr:
            try:
                canonical_frame(fr)
            except ValueError:
                raise GeometryError("frame is linearly dependent")
        object.__setattr__(self, "polytope", polytope)
        object.__setattr__(self, "frame", fr)
        object.__setattr__(self, "sign", sign)

    @property
    def dim(self) -> int:
        return self.polytope.dim

    def canonical(self) -> "OrientedPolytope":
        """Same orientation, expressed over the canonical echelon frame."""
        if not self.frame:
            return OrientedPolytope(self.polytope, (), self.sign)
        basis, s = canonical_frame(self.frame)
        return OrientedPolytope(self.polytope, basis, s * self.sign)

    def reversed(self) -> "OrientedPolytope":
        return OrientedPolytope(self.polytope, self.frame, -self.sign)


def orientation_equal(a: OrientedPolytope, b: OrientedPolytope) -> int:
    """+1 if the orientations agree, -1 if opposite. Polytopes must coincide."""
    if a.polytope.vertices != b.polytope.vertices or a.polytope.ambient_dim != b.polytope.ambient_dim:
        raise GeometryError("orientation comparison requires the same polytope")
    if a.dim == 0:
        return a.sign * b.sign
    d = change_of_basis_det(a.frame, b.frame)
    return (1 if d > 0 else -1) * a.sign * b.sign


# ---------------------------------------------------------------------------
# Boundary and second boundary
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryComponent:
    """One facet with its induced (outward-normal-first) orientation."""

    parent_key: FaceKey
    face: FaceKey
    outward: Vec
    oriented: OrientedPolytope


@dataclass(frozen=True)
class CornerComponent:
    """One flag (codim-2 face, first facet, second facet) of the second boundary."""

    face: FaceKey
    first_facet: FaceKey
    second_facet: FaceKey
    oriented: OrientedPolytope


def boundary(op: OrientedPolytope) -> list[BoundaryComponent]:
    """Boundary components of an oriented polytope, one per facet, not glued.

    The induced orientation satisfies: (outward normal, induced frame) matches
    the parent orientation.
    """
    p = op.polytope
    out = []
    for key, outward in p.facets():
        fp = p.face_polytope(key)
        base = fp.dir_basis
        cand = (outward,) + base
        d = change_of_basis_det(cand, op.frame)
        s = (1 if d > 0 else -1) * op.sign
        out.append(BoundaryComponent(
            parent_key=p.vertices,
            face=key,
            outward=outward,
            oriented=OrientedPolytope(fp, base, s)))
    return out


def second_boundary(op: OrientedPolytope) -> list[CornerComponent]:
    """All flags (F, B1, B2): codim-2 face F with an ordered pair of facets through it.

    Each codim-2 face of a polytope lies in exactly two facets, so it
    contributes exactly two flags, swapped by sigma.
    """
    out = []
    for bc in boundary(op):
        if bc.oriented.dim == 0:
            continue
        for bc2 in boundary(bc.oriented):
            other = _other_facet(op.polytope, bc2.face, bc.face)
            out.append(CornerComponent(
                face=bc2.face,
                first_facet=bc.face,
                second_facet=other,
                oriented=bc2.oriented))
    return out


def _other_facet(p: Polytope, sub: FaceKey, first: FaceKey) -> FaceKey:
    holders = [key for key, _ in p.facets() if set(sub) <= set(key)]
    if len(holders) != 2:
        raise GeometryError(
            f"codim-2 face contained in {len(holders)} facets; polytope lattice broken")
    return holders[0] if holders[1] == first else holders[1]


def sigma(component: CornerComponent, components: Sequence[CornerComponent]) -> CornerComponent:
    """The flag-swap involution on the second boundary: (F,B1,B2) -> (F,B2,B1)."""
    for c in components:
        if (c.face == component.face
                and c.first_facet == component.second_facet
                and c.second_facet == component.first_facet):
            return c
    raise GeometryError("sigma partner not found; second boundary incomplete")


def corner_type(p: Polytope, key: FaceKey) -> str:
    """'corner' if the face lies in exactly codim many facets, else 'g-corner'."""
    fp = p.face_polytope(key)
    codim = p.dim - fp.dim
    holders = sum(1 for fkey, _ in p.facets() if set(key) <= set(fkey))
    if codim == 0:
        return "corner"
    return "corner" if holders == codim else "g-corner"


# ---------------------------------------------------------------------------
# Stock shapes
# ---------------------------------------------------------------------------

def interval(a=0, b=1) -> Polytope:
    return Polytope(1, [[a], [b]])


def box(bounds: Sequence[tuple]) -> Polytope:
    """Axis box with the given (lo, hi) bounds per coordinate."""
    pts = itertools.product(*[(frac(lo), frac(hi)) for lo, hi in bounds])
    return Polytope.from_points(len(bounds), [list(p) for p in pts])


def standard_simplex(k: int) -> Polytope:
    """Delta_k in R^(k+1): convex hull of the standard basis vectors."""
    verts = [[1 if j == i else 0 for j in range(k + 1)] for i in range(k + 1)]
    return Polytope(k + 1, verts, _trusted=True)


def octahedron() -> Polytope:
    verts = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]]
    return Polytope(3, verts, _trusted=True)
