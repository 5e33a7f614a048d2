"""Cells: compact pieces of the form (convex polytope) x (flat torus), with maps.

A cell P x T^s is the geometric atom for chains and cochains. The polytope part
carries the faces and the boundary; the torus factor is closed, so a cell with a
point polytope part has empty boundary. Maps into a target send (p, t) to
A p + M t + b, with M integral so the map descends to the torus factor; over a
torus target values are read modulo Z^m.

s = 0 recovers plain oriented polytopes. The torus factor exists because no
compact polytope admits a submersion onto a positive-dimensional flat target
from every face: circle covers and identity cochains need a closed direction.

Fibre products are computed exactly: the torus part by Hermite normal form and
coset enumeration, the polytope part by slicing the product polytope with the
resulting affine equations and enumerating basic feasible solutions.

Orientation conventions.  For oriented operands the fibre product is oriented by
lifting the first factor's frame and appending the kernel frame of the second
map's differential, the kernel oriented so that (lifts of the target frame,
kernel frame) matches the second factor; if only the first map is a submersion
the mirror recipe (kernel of the first map in front, lifted second frame behind)
is used.  Both agree with the convention T(Z) = Ker df1 + TY + Ker df2 when both
maps are submersions.  Coorientations are frames of Ker df with a sign; the
correspondence with orientations reads TX = f*(TY) + Ker df, target first.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from ._linalg import (
    IntMat,
    Mat,
    Vec,
    canonical_frame,
    change_of_basis_det,
    frac,
    hermite_column,
    in_span,
    integer_kernel_basis,
    integer_matrix_inverse,
    kernel_basis,
    mat,
    matvec,
    rref,
    solve,
    transpose,
    vec,
    vsub,
)
from .geometry import (
    FaceKey,
    GeometryError,
    OrientedPolytope,
    Polytope,
    face_key,
)


class MapError(ValueError):
    """Raised for malformed targets or affine maps."""


class FibreProductError(ValueError):
    """Raised when a fibre product's preconditions fail."""


# ---------------------------------------------------------------------------
# Targets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Target:
    """A point, Euclidean space Euclid(m), or the flat torus Torus(m) = R^m/Z^m."""

    kind: str
    dim: int = 0

    def __post_init__(self):
        if self.kind not in ("point", "euclid", "torus"):
            raise MapError(f"unknown target kind {self.kind!r}")
        if self.kind == "point" and self.dim != 0:
            raise MapError("point target has dimension 0")
        if self.kind != "point" and self.dim < 1:
            raise MapError("euclid/torus target needs positive dimension")

    @property
    def is_torus(self) -> bool:
        return self.kind == "torus"

    @property
    def compact(self) -> bool:
        return self.kind in ("point", "torus")

    def product(self, other: "Target") -> "Target":
        if self.kind == "point":
            return other
        if other.kind == "point":
            return self
        if self.kind != other.kind:
            raise MapError("product targets must have the same kind (or be a point)")
        return Target(self.kind, self.dim + other.dim)


POINT = Target("point", 0)


def euclid(m: int) -> Target:
    return Target("euclid", m)


def torus(m: int) -> Target:
    return Target("torus", m)


# ---------------------------------------------------------------------------
# Cells and cell maps
# ---------------------------------------------------------------------------

def _unit(n: int, i: int) -> Vec:
    return tuple(Fraction(1 if j == i else 0) for j in range(n))


def default_frame(polytope: Polytope, torus_rank: int) -> Mat:
    """Canonical frame of dir(P) + R^s inside R^(n+s)."""
    n = polytope.ambient_dim
    fr = [tuple(v) + (Fraction(0),) * torus_rank for v in polytope.dir_basis]
    fr += [(Fraction(0),) * n + _unit(torus_rank, i) for i in range(torus_rank)]
    return tuple(fr)


@dataclass(frozen=True)
class Cell:
    """Oriented cell P x T^s. Frame vectors live in R^(n+s), polytope part first."""

    polytope: Polytope
    torus_rank: int
    frame: Mat
    sign: int

    def __init__(self, polytope: Polytope, torus_rank: int = 0,
                 frame: Iterable[Iterable] = None, sign: int = 1):
        if torus_rank < 0:
            raise GeometryError("negative torus rank")
        if sign not in (1, -1):
            raise GeometryError("sign must be +1 or -1")
        fr = mat(frame) if frame is not None else default_frame(polytope, torus_rank)
        n = polytope.ambient_dim
        want = polytope.dim + torus_rank
        if len(fr) != want:
            raise GeometryError("frame length must equal cell dimension")
        span = default_frame(polytope, torus_rank)
        for v in fr:
            if len(v) != n + torus_rank:
                raise GeometryError("frame vector has wrong length")
            if not in_span(span, v):
                raise GeometryError("frame vector outside the cell's tangent space")
        if fr:
            try:
                canonical_frame(fr)
            except ValueError:
                raise GeometryError("frame is linearly dependent")
        object.__setattr__(self, "polytope", polytope)
        object.__setattr__(self, "torus_rank", torus_rank)
        object.__setattr__(self, "frame", fr)
        object.__setattr__(self, "sign", sign)

    @property
    def dim(self) -> int:
        return self.polytope.dim + self.torus_rank

    @property
    def ambient(self) -> int:
        return self.polytope.ambient_dim + self.torus_rank

    def tangent_basis(self) -> Mat:
        return default_frame(self.polytope, self.torus_rank)

    def canonical(self) -> "Cell":
        if not self.frame:
            return self
        basis, s = canonical_frame(self.frame)
        return Cell(self.polytope, self.torus_rank, basis, s * self.sign)

    def reversed(self) -> "Cell":
        return Cell(self.polytope, self.torus_rank, self.frame, -self.sign)

    def oriented_polytope(self) -> OrientedPolytope:
        if self.torus_rank != 0:
            raise GeometryError("cell has a torus factor")
        fr = tuple(v for v in self.frame)
        return OrientedPolytope(self.polytope, fr, self.sign)


def cell_from_oriented_polytope(op: OrientedPolytope) -> Cell:
    return Cell(op.polytope, 0, op.frame, op.sign)


def cell_orientation_equal(a: Cell, b: Cell) -> int:
    if (a.polytope.vertices != b.polytope.vertices
            or a.polytope.ambient_dim != b.polytope.ambient_dim
            or a.torus_rank != b.torus_rank):
        raise GeometryError("orientation comparison requires identical cells")
    if a.dim == 0:
        return a.sign * b.sign
    d = change_of_basis_det(a.frame, b.frame)
    return (1 if d > 0 else -1) * a.sign * b.sign


@dataclass(frozen=True)
class CellMap:
    """Affine map (p, t) -> A p + M t + b into a target; M integral."""

    target: Target
    a: Mat           # m x n over Q
    m_t: IntMat      # m x s over Z
    b: Vec           # length m

    def __init__(self, target: Target, a: Iterable[Iterable], m_t: Iterable[Iterable], b: Iterable):
        m = target.dim
        aa = mat(a)
        bb = vec(b)
        mt = tuple(tuple(int(x) for x in row) for row in m_t)
        if len(aa) != m or len(bb) != m or len(mt) != m:
            raise MapError("map rows must equal the target dimension")
        if m == 0:
            aa, mt, bb = (), (), ()
        if target.kind in ("point", "euclid"):
            if any(any(x != 0 for x in row) for row in mt):
                raise MapError("maps to euclid/point must kill the torus factor")
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "a", aa)
        object.__setattr__(self, "m_t", mt)
        object.__setattr__(self, "b", bb)

    @property
    def n_cols(self) -> int:
        return len(self.a[0]) if self.a else 0

    @property
    def s_cols(self) -> int:
        return len(self.m_t[0]) if self.m_t else 0

    def value(self, p: Vec, t: Vec = ()) -> Vec:
        out = []
        for i in range(self.target.dim):
            v = sum((self.a[i][j] * p[j] for j in range(len(p))), Fraction(0))
            v += sum(self.m_t[i][j] * frac(t[j]) for j in range(len(t)))
            v += self.b[i]
            if self.target.is_torus:
                v = v - (v.numerator // v.denominator)
            out.append(v)
        return tuple(out)

    def differential_on(self, cell: Cell) -> Mat:
        """Matrix of the differential on cell.tangent_basis(), shape m x (dim cell)."""
        basis = cell.tangent_basis()
        n = cell.polytope.ambient_dim
        cols = []
        for v in basis:
            p_part, t_part = v[:n], v[n:]
            col = []
            for i in range(self.target.dim):
                x = sum(self.a[i][j] * p_part[j] for j in range(n))
                x += sum(frac(self.m_t[i][j]) * t_part[j] for j in range(len(t_part)))
                col.append(x)
            cols.append(tuple(col))
        return transpose(mat(cols)) if cols else tuple(() for _ in range(self.target.dim))


def constant_map(target: Target, n: int, s: int, value: Iterable = None) -> CellMap:
    m = target.dim
    b = vec(value) if value is not None else vec([0] * m)
    return CellMap(target, [[0] * n for _ in range(m)], [[0] * s for _ in range(m)], b)


# ---------------------------------------------------------------------------
# Submersion conditions
# ---------------------------------------------------------------------------

def _span_is_full(differential_cols: Sequence[Vec], m: int) -> bool:
    if m == 0:
        return True
    if not differential_cols:
        return False
    return len(rref(mat(differential_cols))[1]) == m


def _face_differential_cols(cmap: CellMap, cell: Cell, key: FaceKey) -> list[Vec]:
    """Columns of the differential restricted to the face's direction space + torus."""
    n = cell.polytope.ambient_dim
    fp = cell.polytope.face_polytope(key)
    cols = []
    for d in fp.dir_basis:
        cols.append(tuple(sum(cmap.a[i][j] * d[j] for j in range(n))
                          for i in range(cmap.target.dim)))
    for j in range(cell.torus_rank):
        cols.append(tuple(frac(cmap.m_t[i][j]) for i in range(cmap.target.dim)))
    return cols


def is_interior_submersion(cell: Cell, cmap: CellMap) -> bool:
    """Differential surjective on the top-dimensional stratum."""
    cols = _face_differential_cols(cmap, cell, cell.polytope.vertices)
    return _span_is_full(cols, cmap.target.dim)


def is_strong_submersion(cell: Cell, cmap: CellMap) -> bool:
    """Differential surjective on every face's direction space (plus torus factor)."""
    for keys in cell.polytope.faces().values():
        for key in keys:
            if not _span_is_full(_face_differential_cols(cmap, cell, key), cmap.target.dim):
                return False
    return True


# ---------------------------------------------------------------------------
# Coorientations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Coorientation:
    """An oriented frame of Ker(df) inside the cell's tangent space, plus a sign."""

    frame: Mat
    sign: int

    def __init__(self, frame: Iterable[Iterable], sign: int = 1):
        fr = mat(frame)
        if sign not in (1, -1):
            raise MapError("sign must be +1 or -1")
        if fr:
            try:
                canonical_frame(fr)
            except ValueError:
                raise MapError("coorientation frame is linearly dependent")
        object.__setattr__(self, "frame", fr)
        object.__setattr__(self, "sign", sign)

    def canonical(self) -> "Coorientation":
        if not self.frame:
            return self
        basis, s = canonical_frame(self.frame)
        return Coorientation(basis, s * self.sign)

    def reversed(self) -> "Coorientation":
        return Coorientation(self.frame, -self.sign)


def validate_coorientation(cell: Cell, cmap: CellMap, co: Coorientation) -> None:
    """Check the frame is an exact basis of Ker(df) within the tangent space."""
    n = cell.polytope.ambient_dim
    expected = cell.dim - cmap.target.dim
    if len(co.frame) != expected:
        raise MapError(
            f"coorientation frame has {len(co.frame)} vectors, expected {expected}")
    span = cell.tangent_basis()
    for v in co.frame:
        if len(v) != cell.ambient:
            raise MapError("coorientation vector has wrong length")
        if not in_span(span, v):
            raise MapError("coorientation vector outside the tangent space")
        p_part, t_part = v[:n], v[n:]
        for i in range(cmap.target.dim):
            x = sum(cmap.a[i][j] * p_part[j] for j in range(n))
            x += sum(frac(cmap.m_t[i][j]) * t_part[j] for j in range(len(t_part)))
            if x != 0:
                raise MapError("coorientation vector not in the kernel of the differential")


def kernel_coorientation(cell: Cell, cmap: CellMap) -> Coorientation:
    """Kernel frame oriented by the second-factor rule TX = (lifts of TY) + Ker."""
    tb = cell.tangent_basis()
    dmat = cmap.differential_on(cell)
    m = cmap.target.dim
    kb = kernel_basis(dmat) if dmat and dmat[0] else tuple(
        _unit(cell.dim, i) for i in range(cell.dim))
    if len(kb) != cell.dim - m:
        raise FibreProductError("map is not an interior submersion")
    lifts = []
    for i in range(m):
        w = solve(dmat, _unit(m, i))
        if w is None:
            raise FibreProductError("map is not an interior submersion")
        lifts.append(w)
    def to_ambient(coords):
        return tuple(sum(c * tb[i][j] for i, c in enumerate(coords))
                     for j in range(cell.ambient))
    frame_vs = [to_ambient(w) for w in lifts] + [to_ambient(k) for k in kb]
    if frame_vs:
        d = change_of_basis_det(frame_vs, cell.frame)
        eps = (1 if d > 0 else -1) * cell.sign
    else:
        eps = cell.sign
    return Coorientation(tuple(to_ambient(k) for k in kb), eps)


def first_factor_kernel(cell: Cell, cmap: CellMap) -> Coorientation:
    """Kernel frame oriented by the first-factor rule TX = Ker + (lifts of TY)."""
    co = kernel_coorientation(cell, cmap)
    m = cmap.target.dim
    q = len(co.frame)
    flip = -1 if (m * q) % 2 else 1
    return Coorientation(co.frame, co.sign * flip)


def orientation_from_coorientation(cell: Cell, cmap: CellMap, co: Coorientation) -> Cell:
    """Orient the cell by TX = f*(TY) + Ker df, using the target's standard frame."""
    tb = cell.tangent_basis()
    dmat = cmap.differential_on(cell)
    m = cmap.target.dim
    lifts = []
    for i in range(m):
        w = solve(dmat, _unit(m, i))
        if w is None:
            raise FibreProductError("map is not an interior submersion")
        lifts.append(tuple(sum(c * tb[k][j] for k, c in enumerate(w))
                           for j in range(cell.ambient)))
    frame_vs = tuple(lifts) + tuple(co.frame)
    return Cell(cell.polytope, cell.torus_rank, frame_vs, co.sign).canonical()


def coorientation_from_orientation(cell: Cell, cmap: CellMap) -> Coorientation:
    """Inverse of orientation_from_coorientation for an oriented cell."""
    tb = cell.tangent_basis()
    dmat = cmap.differential_on(cell)
    m = cmap.target.dim
    kb = kernel_basis(dmat)
    if len(kb) != cell.dim - m:
        raise FibreProductError("map is not an interior submersion")
    def to_ambient(coords):
        return tuple(sum(c * tb[i][j] for i, c in enumerate(coords))
                     for j in range(cell.ambient))
    kframe = tuple(to_ambient(k) for k in kb)
    probe = orientation_from_coorientation(cell, cmap, Coorientation(kframe, 1))
    s = cell_orientation_equal(probe, cell)
    return Coorientation(kframe, s)


# ---------------------------------------------------------------------------
# Cell boundary
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CellBoundaryComponent:
    face: FaceKey
    cell: Cell                       # induced orientation, outward normal first
    outward: Vec                     # in R^(n+s), torus part zero


def cell_boundary(cell: Cell) -> list[CellBoundaryComponent]:
    """One component per facet of the polytope part; torus factors are closed."""
    p = cell.polytope
    s = cell.torus_rank
    out = []
    for key, outward in p.facets():
        fp = p.face_polytope(key)
        base = default_frame(fp, s)
        out_vec = tuple(outward) + (Fraction(0),) * s
        cand = (out_vec,) + base
        d = change_of_basis_det(cand, cell.frame)
        sgn = (1 if d > 0 else -1) * cell.sign
        out.append(CellBoundaryComponent(
            face=key,
            cell=Cell(fp, s, base, sgn),
            outward=out_vec))
    return out


def restrict_map(cmap: CellMap) -> CellMap:
    """Maps restrict to faces verbatim: same matrix data."""
    return cmap


def restrict_coorientation(cell: Cell, cmap: CellMap, co: Coorientation,
                           bc: CellBoundaryComponent) -> Coorientation:
    """Induced coorientation on a boundary facet, via the orientation dictionary.

    Convert to an orientation (target frame first), take the boundary
    orientation (outward normal first), convert back on the facet.
    """
    oriented = orientation_from_coorientation(cell, cmap, co)
    cand = (bc.outward,) + bc.cell.frame
    d = change_of_basis_det(cand, oriented.frame)
    sgn = (1 if d > 0 else -1) * oriented.sign
    facet_oriented = Cell(bc.cell.polytope, bc.cell.torus_rank, bc.cell.frame, sgn)
    return coorientation_from_orientation(facet_oriented, cmap)


# ---------------------------------------------------------------------------
# Fibre products
# ---------------------------------------------------------------------------

def _echelon_columns(h: Mat, u) -> tuple:
    """Sort columns by first nonzero row, zero columns last; permute u alike."""
    if not h or not h[0]:
        return h, u
    s = len(h[0])
    rows = len(h)

    def first_row(j):
        for i in range(rows):
            if h[i][j] != 0:
                return i
        return rows + 1

    order = sorted(range(s), key=first_row)
    hh = tuple(tuple(row[j] for j in order) for row in h)
    uu = tuple(tuple(row[j] for j in order) for row in u)
    return hh, uu


def _pivots_of(h: Mat) -> list[tuple[int, int, int]]:
    """(row, value, column) of each nonzero column's first entry; checks echelon."""
    if not h or not h[0]:
        return []
    rows, cols = len(h), len(h[0])
    out = []
    for j in range(cols):
        r = next((i for i in range(rows) if h[i][j] != 0), None)
        if r is None:
            break
        if out and r <= out[-1][0]:
            raise AssertionError("matrix is not column-echelon")
        if h[r][j] <= 0:
            raise AssertionError("pivot entries must be positive")
        out.append((r, int(h[r][j]), j))
    return out


def _slice_polytope(p1: Polytope, p2: Polytope,
                    equations: Sequence[tuple[Vec, Fraction]]) -> Optional[Polytope]:
    """(P1 x P2) cut by affine equations row.p = rhs; None when empty."""
    n1, n2 = p1.ambient_dim, p2.ambient_dim
    n = n1 + n2
    zero1, zero2 = (Fraction(0),) * n1, (Fraction(0),) * n2
    eq_rows: list[Vec] = []
    eq_rhs: list[Fraction] = []
    for row, rhs in p1.affine_hull_equations():
        eq_rows.append(tuple(row) + zero2)
        eq_rhs.append(rhs)
    for row, rhs in p2.affine_hull_equations():
        eq_rows.append(zero1 + tuple(row))
        eq_rhs.append(rhs)
    for row, rhs in equations:
        eq_rows.append(tuple(row))
        eq_rhs.append(rhs)
    ineqs: list[tuple[Vec, Fraction]] = []
    for f, c, _ in p1.facet_inequalities():
        ineqs.append((tuple(f) + zero2, c))
    for f, c, _ in p2.facet_inequalities():
        ineqs.append((zero1 + tuple(f), c))

    if eq_rows:
        x0 = solve(mat(eq_rows), vec(eq_rhs))
        if x0 is None:
            return None
        kb = kernel_basis(mat(eq_rows))
    else:
        x0 = (Fraction(0),) * n
        kb = tuple(_unit(n, i) for i in range(n))
    q = len(kb)

    def unparam(y):
        return tuple(x0[j] + sum(y[i] * kb[i][j] for i in range(q)) for j in range(n))

    def dot(a, b):
        return sum(x * y for x, y in zip(a, b))

    if q == 0:
        cands = [x0] if all(dot(f, x0) <= c for f, c in ineqs) else []
    else:
        red = [(tuple(dot(f, k) for k in kb), c - dot(f, x0)) for f, c in ineqs]
        seen = set()
        cands = []
        for subset in itertools.combinations(range(len(red)), q):
            rows = mat([red[i][0] for i in subset])
            if len(rref(rows)[1]) < q:
                continue
            y = solve(rows, vec([red[i][1] for i in subset]))
            if y is None:
                continue
            if all(dot(g, y) <= h for g, h in red):
                x = unparam(y)
                if x not in seen:
                    seen.add(x)
                    cands.append(x)
    if not cands:
        return None
    return Polytope.from_points(n, cands)


@dataclass
class FibreComponent:
    """One connected piece of a fibre product, with its projection to the target.

    The torus coordinates of the factors are affine in the component's own
    coordinates; the stored section data lets maps on either factor be composed
    with the inclusion, which is how iterated fibre products are built.
    """

    cell: Cell
    pmap: CellMap
    translate: tuple[int, ...]
    transverse: bool
    orientable: bool
    coorientation: Optional[Coorientation]
    face_pairs: dict
    split: tuple[int, int, int, int] = (0, 0, 0, 0)       # n1, s1, n2, s2
    t_rows: tuple = ()
    t_fcoefs: tuple = ()
    t_consts: tuple = ()

    def _compose(self, g: CellMap, offset_n: int, t_lo: int, t_hi: int) -> CellMap:
        n1, s1, n2, s2 = self.split
        n = n1 + n2
        s_z = self.cell.torus_rank
        mg = g.target.dim
        a_out, m_out, b_out = [], [], []
        for i in range(mg):
            row = [Fraction(0)] * n
            for j in range(g.n_cols):
                row[offset_n + j] = frac(g.a[i][j])
            fc = [0] * s_z
            const = g.b[i]
            for k in range(t_lo, t_hi):
                coef = g.m_t[i][k - t_lo]
                if coef:
                    row = [row[j] + coef * self.t_rows[k][j] for j in range(n)]
                    for l in range(s_z):
                        fc[l] += coef * self.t_fcoefs[k][l]
                    const += coef * self.t_consts[k]
            a_out.append(tuple(row))
            m_out.append(tuple(fc))
            b_out.append(const)
        return CellMap(g.target, a_out, m_out, b_out)

    def compose_on_first(self, g: CellMap) -> CellMap:
        """g on the first factor, composed with the inclusion of the component."""
        n1, s1, _, _ = self.split
        if g.target.dim and (g.n_cols != n1 or g.s_cols != s1):
            raise MapError("map shape does not match the first factor")
        return self._compose(g, 0, 0, s1)

    def compose_on_second(self, g: CellMap) -> CellMap:
        n1, s1, n2, s2 = self.split
        if g.target.dim and (g.n_cols != n2 or g.s_cols != s2):
            raise MapError("map shape does not match the second factor")
        return self._compose(g, n1, s1, s1 + s2)


def _differential_vec(cmap: CellMap, n: int, v: Vec) -> Vec:
    p_part, t_part = v[:n], v[n:]
    return tuple(
        sum(cmap.a[i][j] * p_part[j] for j in range(n))
        + sum(frac(cmap.m_t[i][j]) * t_part[j] for j in range(len(t_part)))
        for i in range(cmap.target.dim))


def fibre_product_cells(cell1: Cell, map1: CellMap, cell2: Cell, map2: CellMap, *,
                        coorient1: Optional[Coorientation] = None,
                        coorient2: Optional[Coorientation] = None,
                        ) -> list[FibreComponent]:
    """All components of the fibre product of two cells over a shared target.

    Orientation mode depends on which coorientations are supplied:
    none (oriented operands, kernel recipe on whichever map is an interior
    submersion, preferring the second), coorient2 only (first operand oriented),
    coorient1 only (mirror), or both (result carries a coorientation).
    """
    if map1.target != map2.target:
        raise FibreProductError("fibre product needs a common target")
    target = map1.target
    m = target.dim
    n1, s1 = cell1.polytope.ambient_dim, cell1.torus_rank
    n2, s2 = cell2.polytope.ambient_dim, cell2.torus_rank
    if m > 0 and (map1.n_cols != n1 or map1.s_cols != s1
                  or map2.n_cols != n2 or map2.s_cols != s2):
        raise MapError("map shapes do not match the cells")
    if coorient1 is not None:
        validate_coorientation(cell1, map1, coorient1)
    if coorient2 is not None:
        validate_coorientation(cell2, map2, coorient2)
    mode = ("cup" if coorient1 is not None and coorient2 is not None
            else "cap" if coorient2 is not None
            else "cap_mirror" if coorient1 is not None
            else "oriented")
    if mode == "oriented":
        if is_interior_submersion(cell2, map2):
            side = 2
        elif is_interior_submersion(cell1, map1):
            side = 1
        else:
            raise FibreProductError("neither map is an interior submersion")

    n = n1 + n2
    s = s1 + s2
    a_rows = tuple(tuple(map1.a[i]) + tuple(-x for x in map2.a[i]) for i in range(m))
    m_rows = tuple(tuple(map1.m_t[i]) + tuple(-x for x in map2.m_t[i]) for i in range(m))
    c_vec = tuple(map2.b[i] - map1.b[i] for i in range(m))

    if s > 0 and m > 0:
        h, u = hermite_column(m_rows)
        h, u = _echelon_columns(h, u)
    else:
        h = m_rows
        u = tuple(tuple(1 if i == j else 0 for j in range(s)) for i in range(s))
    pivots = _pivots_of(h)
    rho = len(pivots)
    s_z = s - rho
    pivot_rows = [pr for pr, _, _ in pivots]
    nonpivot_rows = [r for r in range(m) if r not in pivot_rows]
    expected_dim = cell1.dim + cell2.dim - m

    pairs = [(v1, v2) for v1 in cell1.polytope.vertices for v2 in cell2.polytope.vertices]

    if target.is_torus:
        pivot_choices = itertools.product(*[range(d) for _, d, _ in pivots])
    else:
        pivot_choices = [tuple(0 for _ in pivots)]

    components: list[FibreComponent] = []
    for piv_choice in pivot_choices:
        # tau_j as affine functions of p, solved row by row from the pivot rows
        tau_rows: list[Vec] = []
        tau_consts: list[Fraction] = []
        lam = [Fraction(0)] * m
        for (pr, _, _), val in zip(pivots, piv_choice):
            lam[pr] = Fraction(val)
        ok = True
        for jj, (pr, d, _) in enumerate(pivots):
            row = [-frac(a_rows[pr][k]) for k in range(n)]
            const = c_vec[pr] + lam[pr]
            for j2 in range(jj):
                coef = frac(h[pr][j2])
                if coef:
                    row = [row[k] - coef * tau_rows[j2][k] for k in range(n)]
                    const -= coef * tau_consts[j2]
            tau_rows.append(tuple(x / d for x in row))
            tau_consts.append(const / d)
        if not ok:
            continue

        # residual constraints on p from the non-pivot rows
        residuals = []
        for r in nonpivot_rows:
            row = [frac(a_rows[r][k]) for k in range(n)]
            const = Fraction(0)
            for j2 in range(rho):
                coef = frac(h[r][j2])
                if coef:
                    row = [row[k] + coef * tau_rows[j2][k] for k in range(n)]
                    const += coef * tau_consts[j2]
            # row.p + const = c_r + lambda_r
            residuals.append((r, tuple(row), const - c_vec[r]))

        if target.is_torus and residuals:
            ranges = []
            for _, row, shift in residuals:
                vals = [sum(row[k] * (v1 + v2)[k] for k in range(n)) + shift
                        for v1, v2 in pairs]
                lo, hi = min(vals), max(vals)
                ranges.append(range(math.ceil(lo), math.floor(hi) + 1))
            residual_choices = itertools.product(*ranges)
        else:
            residual_choices = [tuple(0 for _ in residuals)]

        for res_choice in residual_choices:
            lam_full = list(lam)
            equations = []
            for (r, row, shift), val in zip(residuals, res_choice):
                lam_full[r] = Fraction(val)
                equations.append((row, Fraction(val) - shift))
            poly = _slice_polytope(cell1.polytope, cell2.polytope, equations)
            if poly is None:
                continue
            comp = _build_component(
                cell1, map1, cell2, map2, poly, s_z, u, rho,
                tau_rows, tau_consts, tuple(int(x) for x in lam_full),
                expected_dim, mode, side if mode == "oriented" else 0,
                coorient1, coorient2)
            components.append(comp)

    components.sort(key=lambda fc: (fc.cell.polytope.vertices, fc.translate))
    return components


def _build_component(cell1, map1, cell2, map2, poly, s_z, u, rho,
                     tau_rows, tau_consts, translate, expected_dim, mode, side,
                     coorient1, coorient2) -> FibreComponent:
    n1, s1 = cell1.polytope.ambient_dim, cell1.torus_rank
    n2, s2 = cell2.polytope.ambient_dim, cell2.torus_rank
    n = n1 + n2
    s = s1 + s2
    m = map1.target.dim

    # t = U tau: affine data for each t coordinate
    t_rows = []
    t_fcoefs = []
    t_consts = []
    for k in range(s):
        row = [Fraction(0)] * n
        const = Fraction(0)
        for j in range(rho):
            coef = frac(u[k][j])
            if coef:
                row = [row[i] + coef * tau_rows[j][i] for i in range(n)]
                const += coef * tau_consts[j]
        t_rows.append(tuple(row))
        t_fcoefs.append(tuple(int(u[k][rho + i]) for i in range(s_z)))
        t_consts.append(const)

    # projection to the target through the first factor
    a_z = []
    m_z = []
    b_z = []
    for i in range(m):
        row = list(tuple(map1.a[i]) + (Fraction(0),) * n2)
        fc = [0] * s_z
        const = map1.b[i]
        for k in range(s1):
            coef = map1.m_t[i][k]
            if coef:
                row = [row[j] + coef * t_rows[k][j] for j in range(n)]
                for l in range(s_z):
                    fc[l] += coef * t_fcoefs[k][l]
                const += coef * t_consts[k]
        a_z.append(tuple(row))
        m_z.append(tuple(fc))
        b_z.append(const)
    pmap = CellMap(map1.target, a_z, m_z, b_z)

    # face pairs and transversality
    face_pairs = {}
    transverse = (poly.dim + s_z == expected_dim)
    for keys in poly.faces().values():
        for key in keys:
            pts1 = [v[:n1] for v in key]
            pts2 = [v[n1:] for v in key]
            f1 = cell1.polytope.minimal_face_containing(pts1)
            f2 = cell2.polytope.minimal_face_containing(pts2)
            face_pairs[key] = (f1, f2)
            fp = poly.face_polytope(key)
            f1p = cell1.polytope.face_polytope(f1)
            f2p = cell2.polytope.face_polytope(f2)
            if poly.dim - fp.dim != (cell1.polytope.dim - f1p.dim
                                     + cell2.polytope.dim - f2p.dim):
                transverse = False
            cols = _face_differential_cols(map1, cell1, f1)
            cols += _face_differential_cols(map2, cell2, f2)
            if not _span_is_full(cols, m):
                transverse = False

    # embedding J of the component's tangent space into T1 x T2,
    # coordinates ordered (p1, t1, p2, t2)
    def j_column(u_dir, phi_idx):
        if u_dir is not None:
            dtau = [sum(tau_rows[j][i] * u_dir[i] for i in range(n)) for j in range(rho)]
            dtau += [Fraction(0)] * s_z
        else:
            dtau = [Fraction(0)] * rho + [Fraction(1 if i == phi_idx else 0)
                                          for i in range(s_z)]
        dt = [sum(frac(u[k][j]) * dtau[j] for j in range(s)) for k in range(s)]
        if u_dir is None:
            u_dir = (Fraction(0),) * n
        return (tuple(u_dir[:n1]) + tuple(dt[:s1])
                + tuple(u_dir[n1:]) + tuple(dt[s1:]))

    dirb = poly.dir_basis
    j_cols = [j_column(d, None) for d in dirb] + [j_column(None, i) for i in range(s_z)]
    j_mat = transpose(mat(j_cols)) if j_cols else tuple(
        () for _ in range(n1 + s1 + n2 + s2))
    dim_z = poly.dim + s_z

    def pull_back(v):
        if not j_cols:
            return None if any(x != 0 for x in v) else ()
        x = solve(j_mat, v)
        return x

    def to_ambient(x):
        p_part = [Fraction(0)] * n
        for i, c in enumerate(x[:poly.dim]):
            p_part = [p_part[j] + c * dirb[i][j] for j in range(n)]
        return tuple(p_part) + tuple(x[poly.dim:])

    def assemble(vectors_t1t2):
        out = []
        for v in vectors_t1t2:
            x = pull_back(v)
            if x is None or len(x) != dim_z:
                return None
            out.append(to_ambient(x))
        return out

    def lift_through(cellk, mapk, other_map, other_n, v):
        """w in T(cellk) with dmapk(w) = d(other_map)(v); None if impossible."""
        if m == 0:
            return (Fraction(0),) * cellk.ambient
        dmat = mapk.differential_on(cellk)
        rhs = _differential_vec(other_map, other_n, v)
        w = solve(dmat, rhs)
        if w is None:
            return None
        tb = cellk.tangent_basis()
        return tuple(sum(w[i] * tb[i][j] for i in range(len(tb)))
                     for j in range(cellk.ambient))

    zero1 = (Fraction(0),) * (n1 + s1)
    zero2 = (Fraction(0),) * (n2 + s2)

    orientable = True
    coorientation = None
    frame = None
    sign = 1
    try:
        if mode == "oriented" and side == 2:
            kappa = kernel_coorientation(cell2, map2)
            vecs = []
            for v in cell1.frame:
                w = lift_through(cell2, map2, map1, n1, v)
                if w is None:
                    raise FibreProductError("lift failed")
                vecs.append(tuple(v) + tuple(w))
            vecs += [zero1 + tuple(k) for k in kappa.frame]
            frame = assemble(vecs)
            sign = cell1.sign * kappa.sign
        elif mode == "oriented":
            kappa = first_factor_kernel(cell1, map1)
            vecs = [tuple(k) + zero2 for k in kappa.frame]
            for v in cell2.frame:
                w = lift_through(cell1, map1, map2, n2, v)
                if w is None:
                    raise FibreProductError("lift failed")
                vecs.append(tuple(w) + tuple(v))
            frame = assemble(vecs)
            sign = kappa.sign * cell2.sign
        elif mode == "cap":
            vecs = []
            for v in cell1.frame:
                w = lift_through(cell2, map2, map1, n1, v)
                if w is None:
                    raise FibreProductError("lift failed")
                vecs.append(tuple(v) + tuple(w))
            vecs += [zero1 + tuple(k) for k in coorient2.frame]
            frame = assemble(vecs)
            sign = cell1.sign * coorient2.sign
        elif mode == "cap_mirror":
            vecs = [tuple(k) + zero2 for k in coorient1.frame]
            for v in cell2.frame:
                w = lift_through(cell1, map1, map2, n2, v)
                if w is None:
                    raise FibreProductError("lift failed")
                vecs.append(tuple(w) + tuple(v))
            frame = assemble(vecs)
            sign = coorient1.sign * cell2.sign
        else:  # cup
            vecs = [tuple(k) + zero2 for k in coorient1.frame]
            vecs += [zero1 + tuple(k) for k in coorient2.frame]
            co_frame = assemble(vecs)
            if co_frame is None or len(co_frame) != dim_z - m:
                raise FibreProductError("coorientation assembly failed")
            coorientation = Coorientation(tuple(co_frame),
                                          coorient1.sign * coorient2.sign)
            frame = None
    except FibreProductError:
        orientable = False
        frame = None
        if mode == "cup":
            coorientation = None

    if mode != "cup" and (frame is None or len(frame) != dim_z):
        orientable = False
        cell = Cell(poly, s_z)
    elif mode == "cup":
        cell = Cell(poly, s_z)
        if coorientation is not None:
            try:
                validate_coorientation(cell, pmap, coorientation)
            except MapError:
                coorientation = None
                orientable = False
    else:
        try:
            cell = Cell(poly, s_z, tuple(frame), sign)
        except GeometryError:
            orientable = False
            cell = Cell(poly, s_z)

    if not transverse and mode != "cup" and not orientable:
        cell = Cell(poly, s_z)

    return FibreComponent(
        cell=cell, pmap=pmap, translate=translate,
        transverse=transverse, orientable=orientable,
        coorientation=coorientation, face_pairs=face_pairs,
        split=(n1, s1, n2, s2),
        t_rows=tuple(t_rows), t_fcoefs=tuple(t_fcoefs), t_consts=tuple(t_consts))


# ---------------------------------------------------------------------------
# Canonical forms
# ---------------------------------------------------------------------------

def has_free_circle(cell: Cell, cmap: CellMap) -> bool:
    """True when some torus direction is killed by the map's differential.

    Such a direction admits an orientation-reversing self-map fixing the map,
    so over a field of characteristic zero the generator cancels to zero.
    """
    s = cell.torus_rank
    if s == 0:
        return False
    if cmap.target.dim == 0:
        return True
    cols = [tuple(frac(cmap.m_t[i][j]) for i in range(cmap.target.dim))
            for j in range(s)]
    return len(rref(mat(cols))[1]) < s


def canonical_cell_map(cell: Cell, cmap: CellMap,
                       coorient: Optional[Coorientation] = None):
    """Canonical representative of (cell, map) under cell isomorphism.

    Torus coordinates are reparametrized so the integral part of the map is in
    column Hermite form; the rational part is reduced modulo the affine hull of
    the polytope; the offset is reduced modulo the column space and, over a
    torus, modulo the image of the integer lattice; frames are echelonized with
    the orientation folded into the sign.
    """
    n = cell.polytope.ambient_dim
    s = cell.torus_rank
    m = cmap.target.dim

    if s > 0 and m > 0:
        h, uc = hermite_column(cmap.m_t)
        h, uc = _echelon_columns(h, uc)
        uci = integer_matrix_inverse(uc)
        if uci is None:
            raise AssertionError("hermite transform must be unimodular")

        def tchange(v):
            tpart = v[n:]
            new_t = tuple(sum(frac(uci[i][j]) * tpart[j] for j in range(s))
                          for i in range(s))
            return tuple(v[:n]) + new_t

        new_mt = h
    else:
        def tchange(v):
            return tuple(v)

        new_mt = cmap.m_t

    frame = tuple(tchange(v) for v in cell.frame)
    co_frame = tuple(tchange(v) for v in coorient.frame) if coorient else None

    new_a = [tuple(row) for row in cmap.a]
    new_b = list(cmap.b)
    if m > 0 and n > 0:
        hull = cell.polytope.affine_hull_equations()
        if hull:
            red, piv = rref(mat([tuple(row) + (rhs,) for row, rhs in hull]))
            if n in piv:
                raise AssertionError("affine hull equations are inconsistent")
            hull_rows = red[:len(piv)]
            int_rows = []
            for row, _ in hull:
                den = 1
                for x in row:
                    fx = frac(x)
                    den = den * fx.denominator // math.gcd(den, fx.denominator)
                int_rows.append([int(frac(x) * den) for x in row])
            d_basis = integer_kernel_basis(int_rows)
        else:
            hull_rows, piv = (), ()
            d_basis = tuple(tuple(1 if i == j else 0 for j in range(n))
                            for i in range(n))
        free = [c for c in range(n) if c not in piv]
        v0 = min(cell.polytope.vertices)
        val0 = [new_b[i] + sum(new_a[i][c] * frac(v0[c]) for c in range(n))
                for i in range(m)]
        mvals = [[sum(frac(new_a[i][c]) * frac(d[c]) for c in range(n))
                  for i in range(m)] for d in d_basis]

        # The shear (x, t) -> (x, t + Lx) with integer L is a cell isomorphism
        # shifting the torus part of frames and the map's derivative on the
        # direction lattice by the m_t column lattice; reduce modulo it.
        shear = [[0] * s for _ in d_basis]
        if s > 0 and d_basis:
            for j, x in enumerate(mvals):
                for t in range(s):
                    p = next((i for i in range(m) if new_mt[i][t] != 0), None)
                    if p is None:
                        continue
                    q = x[p] // frac(new_mt[p][t])
                    if q:
                        for i in range(m):
                            x[i] -= q * frac(new_mt[i][t])
                        shear[j][t] = q

        dmat_t = mat(tuple(tuple(frac(d[r]) for d in d_basis)
                           for r in range(n)))
        beta = {}
        for c in free:
            w = [Fraction(0)] * n
            w[c] = Fraction(1)
            for hrow, p in zip(hull_rows, piv):
                w[p] = -frac(hrow[c])
            sol = solve(dmat_t, tuple(w))
            if sol is None:
                raise AssertionError("direction lattice must span the hull")
            beta[c] = sol
        k = len(d_basis)
        rebuilt = []
        for i in range(m):
            row = [Fraction(0)] * n
            for c in free:
                row[c] = sum(beta[c][j] * mvals[j][i] for j in range(k))
            rebuilt.append(tuple(row))
        new_a = rebuilt
        new_b = [val0[i] - sum(new_a[i][c] * frac(v0[c]) for c in range(n))
                 for i in range(m)]
        if any(any(l) for l in shear):
            def shear_vec(v):
                vp = tuple(frac(x) for x in v[:n])
                bv = solve(dmat_t, vp)
                if bv is None:
                    raise AssertionError("frame leaves the direction space")
                return vp + tuple(frac(v[n + t])
                                  + sum(bv[j] * shear[j][t] for j in range(k))
                                  for t in range(s))
            frame = tuple(shear_vec(v) for v in frame)
            if co_frame is not None:
                co_frame = tuple(shear_vec(v) for v in co_frame)

    if m > 0:
        mt_cols = [tuple(frac(new_mt[i][j]) for i in range(m)) for j in range(s)]
        mt_cols = [c for c in mt_cols if any(x != 0 for x in c)]
        if mt_cols:
            vred, vpiv = rref(mat(mt_cols))
            vrows = vred[:len(vpiv)]
        else:
            vrows, vpiv = (), ()

        def project(x):
            y = list(x)
            for vrow, pc in zip(vrows, vpiv):
                coef = y[pc]
                if coef:
                    y = [y[k] - coef * vrow[k] for k in range(m)]
            return y

        new_b = project(new_b)
        if cmap.target.is_torus:
            npiv = [k for k in range(m) if k not in vpiv]
            if npiv:
                gens = []
                for k in range(m):
                    e = [Fraction(0)] * m
                    e[k] = Fraction(1)
                    gens.append(tuple(project(e)[j] for j in npiv))
                denom = 1
                for g in gens:
                    for x in g:
                        denom = denom * x.denominator // math.gcd(denom, x.denominator)
                gmat = [[int(g[i] * denom) for g in gens] for i in range(len(npiv))]
                hb, _ = hermite_column(gmat)
                hb, _ = _echelon_columns(hb, tuple(
                    tuple(1 if i == j else 0 for j in range(len(gens)))
                    for i in range(len(gens))))
                pivs = _pivots_of(hb)
                if len(pivs) != len(npiv) or [p[0] for p in pivs] != list(range(len(npiv))):
                    raise AssertionError("translate lattice must have full rank")
                x = [new_b[j] * denom for j in npiv]
                for i in range(len(npiv)):
                    d = hb[i][i]
                    q = math.floor(x[i] / d)
                    if q:
                        for k2 in range(i, len(npiv)):
                            x[k2] -= q * hb[k2][i]
                for idx, j in enumerate(npiv):
                    new_b[j] = x[idx] / denom

    ccell = Cell(cell.polytope, s, frame, cell.sign).canonical()
    cmap2 = CellMap(cmap.target, new_a, new_mt, tuple(new_b))
    cco = Coorientation(co_frame, coorient.sign).canonical() if coorient else None
    return ccell, cmap2, cco


def canonical_key(cell: Cell, cmap: CellMap):
    """Hashable identity of (cell, map) up to cell isomorphism, orientation aside."""
    c2, m2, _ = canonical_cell_map(cell, cmap)
    return (m2.target, c2.polytope.ambient_dim, c2.polytope.vertices,
            c2.torus_rank, m2.a, m2.m_t, m2.b)


def permute_cell_coords(cell: Cell, cmap: CellMap, perm: Sequence[int],
                        coorient: Optional[Coorientation] = None):
    """Relabel polytope coordinates: new coordinate i reads old coordinate perm[i]."""
    n = cell.polytope.ambient_dim
    if sorted(perm) != list(range(n)):
        raise GeometryError("perm must be a permutation of the coordinates")
    verts = [tuple(v[j] for j in perm) for v in cell.polytope.vertices]
    poly = Polytope(n, verts, _trusted=True)

    def pv(v):
        return tuple(v[j] for j in perm) + tuple(v[n:])

    new_cell = Cell(poly, cell.torus_rank, tuple(pv(v) for v in cell.frame), cell.sign)
    if cmap.target.dim:
        new_a = tuple(tuple(row[j] for j in perm) for row in cmap.a)
    else:
        new_a = cmap.a
    new_map = CellMap(cmap.target, new_a, cmap.m_t, cmap.b)
    new_co = (Coorientation(tuple(pv(v) for v in coorient.frame), coorient.sign)
              if coorient else None)
    return new_cell, new_map, new_co
