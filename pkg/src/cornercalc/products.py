"""Cup and cap products, the identity cochain, pullback, and duality.

Cochains multiply by fibring over the common target; the coorientation of the
projection is assembled from the factor coorientations, and face labels pair
by multiset merge.  Chains are a module over cochains via the same fibre
construction with one factor oriented.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from ._linalg import mat, rank
from .cells import (
    Cell,
    CellMap,
    Coorientation,
    Target,
    coorientation_from_orientation,
    fibre_product_cells,
    orientation_from_coorientation,
    permute_cell_coords,
)
from .chains import (
    Chain,
    Generator,
    Tag,
    TargetMap,
    boundary,
    pair_tags,
    pushforward,
)
from .geometry import Polytope
from .maps import CheckReport


class ProductError(ValueError):
    pass


def _require_cochain(c: Chain, what: str) -> None:
    for _, g in c.terms():
        if not g.is_cochain:
            raise ProductError(f"{what} needs cochain generators")


def _require_chain(c: Chain, what: str) -> None:
    for _, g in c.terms():
        if g.is_cochain:
            raise ProductError(f"{what} needs oriented chain generators")


def _common_target(c: Chain) -> Target | None:
    targets = {g.cmap.target for _, g in c.terms()}
    if len(targets) > 1:
        raise ProductError("generators share no common target")
    return targets.pop() if targets else None


# ---------------------------------------------------------------------------
# Cup and cap
# ---------------------------------------------------------------------------

def _cup_pair(g1: Generator, g2: Generator) -> list:
    comps = fibre_product_cells(g1.cell, g1.cmap, g2.cell, g2.cmap,
                                coorient1=g1.coorientation,
                                coorient2=g2.coorientation)
    out = []
    for comp in comps:
        if not comp.transverse or comp.coorientation is None:
            raise ProductError("cup hit a non-transverse component; "
                               "cochain operands must be submersions")
        tag = pair_tags(g1.tag, g2.tag, comp.face_pairs)
        out.append((Fraction(1),
                    Generator(comp.cell, comp.pmap, tag,
                              coorientation=comp.coorientation)))
    return out


def cup(c1: Chain, c2: Chain) -> Chain:
    """Product of cochains over a shared target; bilinear and canonical."""
    _require_cochain(c1, "cup")
    _require_cochain(c2, "cup")
    t1, t2 = _common_target(c1), _common_target(c2)
    if t1 is not None and t2 is not None and t1 != t2:
        raise ProductError("cup factors live over different targets")
    if c1.ring != c2.ring:
        raise ProductError("cup factors use different coefficient rings")
    terms = []
    for a1, g1 in c1.terms():
        for a2, g2 in c2.terms():
            for factor, g in _cup_pair(g1, g2):
                terms.append((a1 * a2 * factor, g))
    return Chain(terms, ring=c1.ring)


def _cap_pair(g: Generator, d: Generator) -> list:
    comps = fibre_product_cells(g.cell, g.cmap, d.cell, d.cmap,
                                coorient2=d.coorientation)
    out = []
    for comp in comps:
        if not comp.transverse or not comp.orientable:
            raise ProductError("cap hit a non-transverse component; "
                               "the cochain operand must be a submersion")
        tag = pair_tags(g.tag, d.tag, comp.face_pairs)
        out.append((Fraction(1), Generator(comp.cell, comp.pmap, tag)))
    return out


def cap(c: Chain, delta: Chain) -> Chain:
    """Chain-by-cochain product; the result is an oriented chain."""
    _require_chain(c, "cap")
    _require_cochain(delta, "cap")
    t1, t2 = _common_target(c), _common_target(delta)
    if t1 is not None and t2 is not None and t1 != t2:
        raise ProductError("cap factors live over different targets")
    if c.ring != delta.ring:
        raise ProductError("cap factors use different coefficient rings")
    terms = []
    for a1, g in c.terms():
        for a2, d in delta.terms():
            for factor, gg in _cap_pair(g, d):
                terms.append((a1 * a2 * factor, gg))
    return Chain(terms, ring=c.ring)


# ---------------------------------------------------------------------------
# Identity cochain
# ---------------------------------------------------------------------------

_POINT_POLYTOPE = Polytope.from_points(0, [[]])


def identity_generator(y: Target) -> Generator:
    """The unit generator: a point times the target torus, mapping by identity."""
    if not y.compact:
        raise ProductError("no compact identity model over a euclidean target")
    m = y.dim
    cell = Cell(_POINT_POLYTOPE, m)
    eye = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    cmap = CellMap(y, [() for _ in range(m)], eye, [0] * m)
    tag = Tag({((),): ()})
    return Generator(cell, cmap, tag, coorientation=Coorientation((), 1))


def identity_cochain(y: Target, ring: str = "Q") -> Chain:
    """The cup/cap unit; its differential vanishes (the cell has no facets)."""
    return Chain([(Fraction(1), identity_generator(y))], ring=ring)


# ---------------------------------------------------------------------------
# Degree bookkeeping and transport witnesses
# ---------------------------------------------------------------------------

def homogeneous_degree(c: Chain) -> int | None:
    degrees = {g.grade for _, g in c.terms()}
    if len(degrees) > 1:
        raise ProductError("chain is not homogeneous")
    return degrees.pop() if degrees else None


def _sign(exponent: int) -> int:
    return -1 if exponent % 2 else 1


def _permute_generator(gen: Generator, perm: Sequence[int]) -> Generator:
    """Coordinate-permutation witness: cell, map, coorientation, and labels."""
    cell, cmap, co = permute_cell_coords(gen.cell, gen.cmap, perm,
                                         gen.coorientation)
    vmap = {v: tuple(v[j] for j in perm) for v in gen.cell.polytope.vertices}
    tag = Tag({tuple(sorted(vmap[v] for v in key)): label
               for key, label in gen.tag.labels})
    return Generator(cell, cmap, tag, coorientation=co)


def _block_swap_perm(n_first: int, n_second: int) -> list:
    return list(range(n_first, n_first + n_second)) + list(range(n_first))


# ---------------------------------------------------------------------------
# DGA checks
# ---------------------------------------------------------------------------

def check_cup_supercommutative(c1: Chain, c2: Chain) -> CheckReport:
    """cup(c1, c2) equals the sign-weighted swap, transported by the
    coordinate-exchange witness per generator pair."""
    lhs = cup(c1, c2)
    rhs = Chain(ring=c1.ring)
    for a1, g1 in c1.terms():
        for a2, g2 in c2.terms():
            sign = _sign(g1.grade * g2.grade)
            n1 = g1.cell.polytope.ambient_dim
            n2 = g2.cell.polytope.ambient_dim
            perm = _block_swap_perm(n2, n1)
            moved = [(coeff, _permute_generator(g, perm))
                     for coeff, g in _cup_pair(g2, g1)]
            rhs = rhs + Chain([(sign * a1 * a2 * coeff, g)
                               for coeff, g in moved], ring=c1.ring)
    checked = len(lhs.terms())
    if lhs == rhs:
        return CheckReport(True, checked, True)
    return CheckReport(False, checked, True, ("swap comparison failed",))


def check_cup_associative(c1: Chain, c2: Chain, c3: Chain) -> CheckReport:
    lhs = cup(cup(c1, c2), c3)
    rhs = cup(c1, cup(c2, c3))
    if lhs == rhs:
        return CheckReport(True, len(lhs.terms()), True)
    return CheckReport(False, 0, True, ("associativity failed",))


def check_cup_leibniz(c1: Chain, c2: Chain) -> CheckReport:
    k = homogeneous_degree(c1)
    if k is None:
        return CheckReport(True, 0, True)
    lhs = boundary(cup(c1, c2))
    rhs = cup(boundary(c1), c2) + cup(c1, boundary(c2)).scale(_sign(k))
    if lhs == rhs:
        return CheckReport(True, len(lhs.terms()), True)
    return CheckReport(False, 0, True, ("cochain Leibniz failed",))


def check_cup_identity(c: Chain) -> CheckReport:
    t = _common_target(c)
    if t is None:
        return CheckReport(True, 0, True)
    e = identity_cochain(t, ring=c.ring)
    left = cup(e, c)
    right = cup(c, e)
    if left == c and right == c:
        return CheckReport(True, len(c.terms()), True)
    return CheckReport(False, 0, True, ("identity law failed",))


def check_dga(c1: Chain, c2: Chain, c3: Chain) -> CheckReport:
    """Supercommutativity, Leibniz, associativity, and the unit laws."""
    reports = {
        "supercommutativity": check_cup_supercommutative(c1, c2),
        "leibniz": check_cup_leibniz(c1, c2),
        "associativity": check_cup_associative(c1, c2, c3),
        "identity": check_cup_identity(c1),
    }
    bad = tuple(name for name, rep in reports.items() if not rep.ok)
    checked = sum(rep.checked for rep in reports.values())
    return CheckReport(not bad, checked, True, bad)


# ---------------------------------------------------------------------------
# Cap module checks
# ---------------------------------------------------------------------------

def check_cap_module(c: Chain, d1: Chain, d2: Chain) -> CheckReport:
    """(c cap d1) cap d2 equals c cap (d1 cup d2)."""
    lhs = cap(cap(c, d1), d2)
    rhs = cap(c, cup(d1, d2))
    if lhs == rhs:
        return CheckReport(True, len(lhs.terms()), True)
    return CheckReport(False, 0, True, ("cap module axiom failed",))


def check_cap_leibniz(c: Chain, d: Chain) -> CheckReport:
    """Boundary of a cap: (bd c) cap d plus the sign-weighted c cap (bd d).

    The sign is (-1) to the target dimension minus the chain grade.
    """
    t = _common_target(c)
    k = homogeneous_degree(c)
    if t is None or k is None:
        return CheckReport(True, 0, True)
    sign = _sign(t.dim - k)
    lhs = boundary(cap(c, d))
    rhs = cap(boundary(c), d) + cap(c, boundary(d)).scale(sign)
    if lhs == rhs:
        return CheckReport(True, len(lhs.terms()), True)
    return CheckReport(False, 0, True, ("cap Leibniz failed",))


def check_cap_identity(c: Chain) -> CheckReport:
    t = _common_target(c)
    if t is None:
        return CheckReport(True, 0, True)
    if cap(c, identity_cochain(t, ring=c.ring)) == c:
        return CheckReport(True, len(c.terms()), True)
    return CheckReport(False, 0, True, ("cap identity law failed",))


# ---------------------------------------------------------------------------
# Pullback
# ---------------------------------------------------------------------------

def _identity_cell_map(y: Target) -> CellMap:
    eye = [[1 if i == j else 0 for j in range(y.dim)] for i in range(y.dim)]
    return CellMap(y, [() for _ in range(y.dim)], eye, [0] * y.dim)


def pullback(h: TargetMap, delta: Chain) -> Chain:
    """Pull a cochain back along a proper map of targets; grade is preserved.

    Properness is automatic for compact sources.  For a euclidean source the
    affine map must be injective; even then the fibre has no compact model
    here, so only the zero cochain pulls back over euclidean sources.
    """
    _require_cochain(delta, "pullback")
    t = _common_target(delta)
    if t is not None and t != h.target:
        raise ProductError("cochain does not live over the map's target")
    if not h.source.compact:
        if rank(mat(h.matrix)) < h.source.dim:
            raise ProductError("pullback needs a proper map; an affine map "
                               "from a euclidean target must be injective")
        if t is None:
            return Chain(ring=delta.ring)
        raise ProductError("no compact identity model over a euclidean target")
    if t is None:
        return Chain(ring=delta.ring)
    unit = identity_generator(h.source)
    cell_h = Cell(_POINT_POLYTOPE, h.source.dim)
    map_h = CellMap(h.target,
                    [() for _ in range(h.target.dim)],
                    [[int(x) for x in row] for row in h.matrix],
                    h.offset)
    id_map = _identity_cell_map(h.source)
    terms = []
    for coeff, g in delta.terms():
        comps = fibre_product_cells(cell_h, map_h, g.cell, g.cmap,
                                    coorient2=g.coorientation)
        for comp in comps:
            if not comp.transverse or not comp.orientable:
                raise ProductError("pullback hit a non-transverse component")
            pmap = comp.compose_on_first(id_map)
            co = coorientation_from_orientation(comp.cell, pmap)
            tag = pair_tags(unit.tag, g.tag, comp.face_pairs)
            terms.append((coeff,
                          Generator(comp.cell, pmap, tag, coorientation=co)))
    return Chain(terms, ring=delta.ring)


def check_pullback_functorial(h1: TargetMap, h2: TargetMap,
                              delta: Chain) -> CheckReport:
    """(h1 after h2) pulled back equals pulling back along h1 then h2."""
    lhs = pullback(h1.compose(h2), delta)
    rhs = pullback(h2, pullback(h1, delta))
    if lhs == rhs:
        return CheckReport(True, len(lhs.terms()), True)
    return CheckReport(False, 0, True, ("pullback functoriality failed",))


def check_pullback_cup(h: TargetMap, d1: Chain, d2: Chain) -> CheckReport:
    lhs = pullback(h, cup(d1, d2))
    rhs = cup(pullback(h, d1), pullback(h, d2))
    if lhs == rhs:
        return CheckReport(True, len(lhs.terms()), True)
    return CheckReport(False, 0, True, ("pullback of a cup failed",))


def check_pullback_d(h: TargetMap, delta: Chain) -> CheckReport:
    lhs = boundary(pullback(h, delta))
    rhs = pullback(h, boundary(delta))
    if lhs == rhs:
        return CheckReport(True, len(lhs.terms()), True)
    return CheckReport(False, 0, True, ("pullback does not commute with d",))


def projection_formula(alpha: Chain, beta: Chain, h: TargetMap) -> CheckReport:
    """Push alpha cap (pulled-back beta) forward equals pushing then capping."""
    lhs = pushforward(h, cap(alpha, pullback(h, beta)))
    rhs = cap(pushforward(h, alpha), beta)
    if lhs == rhs:
        return CheckReport(True, len(lhs.terms()), True)
    return CheckReport(False, 0, True, ("projection formula failed",))


# ---------------------------------------------------------------------------
# Duality: cochains as oriented chains
# ---------------------------------------------------------------------------

def duality_KchToKh(delta: Chain, orientation: int = 1) -> Chain:
    """Reinterpret a cochain over an oriented target as an oriented chain.

    The coorientation and the target's orientation compose to an orientation;
    reversing the target's orientation negates the result.
    """
    if orientation not in (1, -1):
        raise ProductError("orientation must be +1 or -1")
    _require_cochain(delta, "duality")
    terms = []
    for coeff, g in delta.terms():
        oriented = orientation_from_coorientation(g.cell, g.cmap,
                                                  g.coorientation)
        terms.append((coeff * orientation, Generator(oriented, g.cmap, g.tag)))
    return Chain(terms, ring=delta.ring)


def check_duality_chain_map(delta: Chain) -> CheckReport:
    lhs = boundary(duality_KchToKh(delta))
    rhs = duality_KchToKh(boundary(delta))
    if lhs == rhs:
        return CheckReport(True, len(lhs.terms()), True)
    return CheckReport(False, 0, True, ("duality is not a chain map",))
