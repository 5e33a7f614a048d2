"""Affine maps on polytopes, fibre products, and the oriented identity checks.

This is the user-facing layer over the cell machinery: plain polytopes with
affine maps into a point, a Euclidean space, or a torus. Fibre products return
one component per integer translate (a single translate over Euclidean
targets), each an oriented polytope cut out of the product space, flagged when
it fails transversality or the expected dimension.

The check functions verify, exactly and with no tolerance, the boundary
formula for fibre products, the swap sign, associativity, and the interchange
sign, by constructing both sides independently and comparing canonical forms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from ._linalg import Mat, Vec, frac, mat, vec
from .cells import (
    POINT,
    Cell,
    CellBoundaryComponent,
    CellMap,
    Coorientation,
    FibreComponent,
    FibreProductError,
    MapError,
    Target,
    canonical_cell_map,
    cell_boundary,
    cell_from_oriented_polytope,
    cell_orientation_equal,
    constant_map,
    euclid,
    fibre_product_cells,
    is_interior_submersion,
    is_strong_submersion,
    kernel_coorientation,
    torus,
)
from .geometry import GeometryError, OrientedPolytope, Polytope


@dataclass(frozen=True)
class AffineMap:
    """p -> matrix p + offset from a polytope into a target; torus values mod 1."""

    source: Polytope
    target: Target
    matrix: Mat
    offset: Vec

    def __init__(self, source: Polytope, target: Target,
                 matrix: Iterable[Iterable], offset: Iterable):
        mx = mat(matrix)
        off = vec(offset)
        if len(mx) != target.dim or len(off) != target.dim:
            raise MapError("matrix and offset rows must equal the target dimension")
        if target.dim and any(len(row) != source.ambient_dim for row in mx):
            raise MapError("matrix columns must equal the source's ambient dimension")
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "matrix", mx)
        object.__setattr__(self, "offset", off)

    def value(self, point: Sequence) -> Vec:
        return self.cell_map().value(vec(point))

    def cell_map(self) -> CellMap:
        return CellMap(self.target, self.matrix,
                       tuple(() for _ in range(self.target.dim)), self.offset)


def constant_affine_map(source: Polytope, target: Target = POINT,
                        value: Iterable = None) -> AffineMap:
    m = target.dim
    val = vec(value) if value is not None else vec([0] * m)
    return AffineMap(source, target,
                     [[0] * source.ambient_dim for _ in range(m)], val)


def is_strongly_smooth(f: AffineMap) -> bool:
    """Affine maps extend smoothly to the ambient space, so always true."""
    return True


def is_submersion(f: AffineMap) -> bool:
    """Surjective differential on the direction space of every face."""
    return is_strong_submersion(Cell(f.source), f.cell_map())


def is_interior_surjective(f: AffineMap) -> bool:
    """Surjective differential on the top stratum only."""
    return is_interior_submersion(Cell(f.source), f.cell_map())


# ---------------------------------------------------------------------------
# Fibre products of oriented polytopes
# ---------------------------------------------------------------------------

@dataclass
class FibrePiece:
    """One component of a polytope-level fibre product."""

    oriented: OrientedPolytope
    translate: tuple[int, ...]
    transverse: bool
    orientable: bool
    component: FibreComponent

    def project_first(self, point: Sequence) -> Vec:
        n1 = self.component.split[0]
        return tuple(vec(point)[:n1])

    def project_second(self, point: Sequence) -> Vec:
        n1 = self.component.split[0]
        return tuple(vec(point)[n1:])

    def projection_to_target(self) -> CellMap:
        return self.component.pmap


def fibre_product(x1: OrientedPolytope, f1: AffineMap,
                  x2: OrientedPolytope, f2: AffineMap) -> list[FibrePiece]:
    """Components of {(p, p') : f1(p) = f2(p')}, oriented, one per translate.

    At least one map must have surjective differential on its top stratum.
    """
    if f1.target != f2.target:
        raise FibreProductError("fibre product needs a common target")
    c1 = cell_from_oriented_polytope(x1)
    c2 = cell_from_oriented_polytope(x2)
    comps = fibre_product_cells(c1, f1.cell_map(), c2, f2.cell_map())
    return [FibrePiece(oriented=fc.cell.oriented_polytope(),
                       translate=fc.translate,
                       transverse=fc.transverse,
                       orientable=fc.orientable,
                       component=fc)
            for fc in comps]


# ---------------------------------------------------------------------------
# Check reports and canonical comparison
# ---------------------------------------------------------------------------

@dataclass
class CheckReport:
    ok: bool
    checked: int = 0
    precondition: bool = True
    details: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def stack_cell_maps(f: CellMap, g: CellMap) -> CellMap:
    """Map into the product target, first block from f, second from g."""
    if f.target.dim == 0:
        return g
    if g.target.dim == 0:
        return f
    target = f.target.product(g.target)
    return CellMap(target, f.a + g.a, f.m_t + g.m_t, f.b + g.b)


def _canonical_signed(cell: Cell, cmap: CellMap):
    ccell, cm, _ = canonical_cell_map(cell, cmap)
    key = (cm.target, ccell.polytope.ambient_dim, ccell.polytope.vertices,
           ccell.torus_rank, cm.a, cm.m_t, cm.b)
    return key, ccell.sign


def _compare_signed_families(lhs, rhs, predicted: int) -> CheckReport:
    """Both families as {canonical key: sign}; every match must have the sign."""
    lmap = {}
    for cell, cmap in lhs:
        key, sgn = _canonical_signed(cell, cmap)
        if key in lmap:
            return CheckReport(False, 0, details=("duplicate component on the left",))
        lmap[key] = sgn
    rmap = {}
    for cell, cmap in rhs:
        key, sgn = _canonical_signed(cell, cmap)
        if key in rmap:
            return CheckReport(False, 0, details=("duplicate component on the right",))
        rmap[key] = sgn
    if set(lmap) != set(rmap):
        return CheckReport(False, 0, details=("component sets differ",))
    for key, sgn in lmap.items():
        if sgn != predicted * rmap[key]:
            return CheckReport(False, 0, details=("orientation sign mismatch",))
    return CheckReport(True, len(lmap))


# ---------------------------------------------------------------------------
# Boundary of a fibre product
# ---------------------------------------------------------------------------

def check_boundary_of_fibre_product_cells(cell1: Cell, map1: CellMap,
                                          cell2: Cell, map2: CellMap) -> CheckReport:
    """Boundary components of the product vs the two boundary-of-factor terms.

    Matching is by (translate, polytope); each matched pair must agree in
    orientation, the second family carrying the sign (-1)^(dim X1 + dim Y).
    """
    comps = fibre_product_cells(cell1, map1, cell2, map2)
    if not all(c.transverse and c.orientable for c in comps):
        return CheckReport(False, 0, precondition=False,
                           details=("non-transverse component",))
    m = map1.target.dim
    d1 = cell1.dim
    sign2 = -1 if (d1 + m) % 2 else 1

    lhs = {}
    for comp in comps:
        for bc in cell_boundary(comp.cell):
            key = (comp.translate, bc.cell.polytope)
            if key in lhs:
                return CheckReport(False, 0, details=("duplicate boundary face",))
            lhs[key] = bc.cell

    rhs = {}

    def add_rhs(fc_list, sgn):
        for c in fc_list:
            if not c.orientable:
                return False
            key = (c.translate, c.cell.polytope)
            if key in rhs:
                return False
            rhs[key] = (c.cell, sgn)
        return True

    for bc in cell_boundary(cell1):
        if not add_rhs(fibre_product_cells(bc.cell, map1, cell2, map2), 1):
            return CheckReport(False, 0, precondition=False,
                               details=("boundary term not orientable",))
    for bc in cell_boundary(cell2):
        if not add_rhs(fibre_product_cells(cell1, map1, bc.cell, map2), sign2):
            return CheckReport(False, 0, precondition=False,
                               details=("boundary term not orientable",))

    if set(lhs) != set(rhs):
        return CheckReport(False, 0, details=("boundary component sets differ",))
    for key, lcell in lhs.items():
        rcell, sgn = rhs[key]
        if cell_orientation_equal(lcell, rcell) != sgn:
            return CheckReport(False, 0, details=(f"sign mismatch at {key[0]}",))
    return CheckReport(True, len(lhs))


def check_boundary_of_fibre_product(x1: OrientedPolytope, f1: AffineMap,
                                    x2: OrientedPolytope, f2: AffineMap) -> CheckReport:
    return check_boundary_of_fibre_product_cells(
        cell_from_oriented_polytope(x1), f1.cell_map(),
        cell_from_oriented_polytope(x2), f2.cell_map())


# ---------------------------------------------------------------------------
# Swap sign
# ---------------------------------------------------------------------------

def _has_winding(*cmaps: CellMap) -> bool:
    return any(any(x for x in row) for cm in cmaps for row in cm.m_t)


def check_swap_sign_cells(cell1: Cell, map1: CellMap,
                          cell2: Cell, map2: CellMap) -> CheckReport:
    """X1 x_Y X2 vs X2 x_Y X1 under the block swap of coordinates.

    Without torus equations the product's circle factors concatenate in
    order, so the exchange contributes an extra transposition determinant
    (-1)^(s1 s2) on top of the dimension sign.  With torus equations the
    surviving circle coordinates are unimodular mixtures of both blocks;
    canonical charts only track the exchange when each factor contributes
    at most one circle, so larger wound blocks are out of scope.
    """
    from .cells import permute_cell_coords
    if not (is_interior_submersion(cell1, map1)
            and is_interior_submersion(cell2, map2)):
        return CheckReport(False, 0, precondition=False,
                           details=("both maps must be submersions",))
    m = map1.target.dim
    d1, d2 = cell1.dim, cell2.dim
    s1, s2 = cell1.torus_rank, cell2.torus_rank
    predicted = -1 if ((d1 - m) * (d2 - m)) % 2 else 1
    if _has_winding(map1, map2):
        if min(s1, s2) >= 1 and max(s1, s2) >= 2:
            return CheckReport(False, 0, precondition=False,
                               details=("wound torus blocks of rank two are "
                                        "not chart-comparable",))
    elif (s1 * s2) % 2:
        predicted = -predicted

    fwd = fibre_product_cells(cell1, map1, cell2, map2)
    bwd = fibre_product_cells(cell2, map2, cell1, map1)
    if not all(c.transverse and c.orientable for c in fwd + bwd):
        return CheckReport(False, 0, precondition=False,
                           details=("non-transverse component",))
    n1 = cell1.polytope.ambient_dim
    n2 = cell2.polytope.ambient_dim
    perm = list(range(n2, n2 + n1)) + list(range(n2))
    lhs = [(c.cell, c.pmap) for c in fwd]
    rhs = []
    for c in bwd:
        pc, pm, _ = permute_cell_coords(c.cell, c.pmap, perm)
        rhs.append((pc, pm))
    return _compare_signed_families(lhs, rhs, predicted)


def check_swap_sign(x1: OrientedPolytope, f1: AffineMap,
                    x2: OrientedPolytope, f2: AffineMap) -> CheckReport:
    return check_swap_sign_cells(
        cell_from_oriented_polytope(x1), f1.cell_map(),
        cell_from_oriented_polytope(x2), f2.cell_map())


# ---------------------------------------------------------------------------
# Associativity and interchange
# ---------------------------------------------------------------------------

def check_associativity_cells(cell1: Cell, map1: CellMap,
                              cell2: Cell, map2a: CellMap, map2b: CellMap,
                              cell3: Cell, map3: CellMap) -> CheckReport:
    """(X1 x_{Y1} X2) x_{Y2} X3 vs X1 x_{Y1} (X2 x_{Y2} X3), compared over Y1 x Y2.

    map2a: X2 -> Y1 pairs with map1; map2b: X2 -> Y2 pairs with map3.
    The two nestings run the torus elimination in different orders, which
    agrees on canonical charts only while every factor contributes at most
    one circle; wound rank-two blocks are out of scope.
    """
    if (_has_winding(map1, map2a, map2b, map3)
            and max(cell1.torus_rank, cell2.torus_rank,
                    cell3.torus_rank) >= 2):
        return CheckReport(False, 0, precondition=False,
                           details=("wound torus blocks of rank two are "
                                    "not chart-comparable",))
    lhs = []
    for z in fibre_product_cells(cell1, map1, cell2, map2a):
        if not (z.transverse and z.orientable):
            return CheckReport(False, 0, precondition=False,
                               details=("inner product not transverse",))
        g = z.compose_on_second(map2b)
        for w in fibre_product_cells(z.cell, g, cell3, map3):
            if not (w.transverse and w.orientable):
                return CheckReport(False, 0, precondition=False,
                                   details=("outer product not transverse",))
            cmp_map = stack_cell_maps(w.compose_on_first(z.pmap), w.pmap)
            lhs.append((w.cell, cmp_map))
    rhs = []
    for z in fibre_product_cells(cell2, map2b, cell3, map3):
        if not (z.transverse and z.orientable):
            return CheckReport(False, 0, precondition=False,
                               details=("inner product not transverse",))
        g = z.compose_on_first(map2a)
        for w in fibre_product_cells(cell1, map1, z.cell, g):
            if not (w.transverse and w.orientable):
                return CheckReport(False, 0, precondition=False,
                                   details=("outer product not transverse",))
            cmp_map = stack_cell_maps(w.pmap, w.compose_on_second(z.pmap))
            rhs.append((w.cell, cmp_map))
    return _compare_signed_families(lhs, rhs, 1)


def check_associativity(x1: OrientedPolytope, f1: AffineMap,
                        x2: OrientedPolytope, f2a: AffineMap, f2b: AffineMap,
                        x3: OrientedPolytope, f3: AffineMap) -> CheckReport:
    return check_associativity_cells(
        cell_from_oriented_polytope(x1), f1.cell_map(),
        cell_from_oriented_polytope(x2), f2a.cell_map(), f2b.cell_map(),
        cell_from_oriented_polytope(x3), f3.cell_map())


def check_interchange_cells(cell1: Cell, map1a: CellMap, map1b: CellMap,
                            cell2: Cell, map2: CellMap,
                            cell3: Cell, map3: CellMap) -> CheckReport:
    """X1 x_{Y1 x Y2} (X2 x X3) vs (X1 x_{Y1} X2) x_{Y2} X3.

    map1a: X1 -> Y1 pairs with map2; map1b: X1 -> Y2 pairs with map3.
    The right side carries the sign (-1)^(dim Y2 (dim Y1 + dim X2)).
    """
    my1 = map2.target.dim
    my2 = map3.target.dim
    predicted = -1 if (my2 * (my1 + cell2.dim)) % 2 else 1

    f1 = stack_cell_maps(map1a, map1b)
    lhs = []
    n2, s2 = cell2.polytope.ambient_dim, cell2.torus_rank
    n3, s3 = cell3.polytope.ambient_dim, cell3.torus_rank
    prods = fibre_product_cells(cell2, constant_map(POINT, n2, s2),
                                cell3, constant_map(POINT, n3, s3))
    for p23 in prods:
        if not (p23.transverse and p23.orientable):
            return CheckReport(False, 0, precondition=False,
                               details=("product not orientable",))
        g23 = stack_cell_maps(p23.compose_on_first(map2),
                              p23.compose_on_second(map3))
        for w in fibre_product_cells(cell1, f1, p23.cell, g23):
            if not (w.transverse and w.orientable):
                return CheckReport(False, 0, precondition=False,
                                   details=("left product not transverse",))
            lhs.append((w.cell, w.pmap))
    rhs = []
    for z in fibre_product_cells(cell1, map1a, cell2, map2):
        if not (z.transverse and z.orientable):
            return CheckReport(False, 0, precondition=False,
                               details=("inner product not transverse",))
        g = z.compose_on_first(map1b)
        for w in fibre_product_cells(z.cell, g, cell3, map3):
            if not (w.transverse and w.orientable):
                return CheckReport(False, 0, precondition=False,
                                   details=("right product not transverse",))
            cmp_map = stack_cell_maps(w.compose_on_first(z.pmap), w.pmap)
            rhs.append((w.cell, cmp_map))
    return _compare_signed_families(lhs, rhs, predicted)


def check_interchange(x1: OrientedPolytope, f1a: AffineMap, f1b: AffineMap,
                      x2: OrientedPolytope, f2: AffineMap,
                      x3: OrientedPolytope, f3: AffineMap) -> CheckReport:
    return check_interchange_cells(
        cell_from_oriented_polytope(x1), f1a.cell_map(), f1b.cell_map(),
        cell_from_oriented_polytope(x2), f2.cell_map(),
        cell_from_oriented_polytope(x3), f3.cell_map())
