"""Chain groups over a fixed target: labelled generators, relations, homology.

A generator is an oriented cell with an affine map to the target and an
injective labelling of its face lattice.  Chains are finite rational
combinations of generator classes, kept in a normal form where orientation
reversal folds into the coefficient, quotient markers expand to 1/|group|
times their cover, and cells carrying a circle direction that neither the
map nor the polytope constrains are dropped (such a cell has an
orientation-reversing self-map fixing all data, so its class is 2-torsion
and dies over the rationals).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from ._linalg import (
    Mat,
    Vec,
    frac,
    invariant_factors,
    mat,
    rank,
    solve,
)
from .cells import (
    POINT,
    Cell,
    CellMap,
    Coorientation,
    Target,
    canonical_cell_map,
    cell_boundary,
    cell_orientation_equal,
    constant_map,
    default_frame,
    has_free_circle,
    is_strong_submersion,
    restrict_coorientation,
    restrict_map,
    validate_coorientation,
)
from .geometry import FaceKey, Polytope, standard_simplex
from .maps import CheckReport


class TagError(ValueError):
    pass


class ChainError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Labels and tags
# ---------------------------------------------------------------------------
# A label is a sorted tuple of atoms; an atom is an int, a string, or a tuple
# of atoms.  Tags built from single atoms use one-element labels; label
# pairing (products) concatenates and re-sorts, so the empty label is a unit.

def _term_key(x):
    """Total order on ints, Fractions, strings, None and nested tuples."""
    if x is None:
        return (0,)
    if isinstance(x, bool):
        return (1, int(x))
    if isinstance(x, (int, Fraction)):
        return (1, Fraction(x))
    if isinstance(x, str):
        return (2, x)
    if isinstance(x, tuple):
        return (3, tuple(_term_key(e) for e in x))
    raise TypeError(f"unorderable label component: {x!r}")


def atom_label(atom) -> tuple:
    """The one-atom label."""
    _term_key(atom)
    return (atom,)


EMPTY_LABEL: tuple = ()


def merge_labels(*labels: tuple) -> tuple:
    """Combine labels as a sorted multiset of atoms; the empty label is a unit."""
    combined = tuple(itertools.chain.from_iterable(labels))
    return tuple(sorted(combined, key=_term_key))


class Tag:
    """Labelling of a cell's face lattice, one label per face key."""

    __slots__ = ("labels",)

    def __init__(self, labels: Mapping[FaceKey, tuple] | Iterable):
        items = labels.items() if isinstance(labels, Mapping) else labels
        pairs = []
        for key, label in items:
            if not isinstance(label, tuple):
                raise TagError("labels must be tuples of atoms")
            for a in label:
                _term_key(a)
            pairs.append((tuple(key), tuple(label)))
        pairs.sort(key=lambda kv: kv[0])
        if len({k for k, _ in pairs}) != len(pairs):
            raise TagError("duplicate face key in tag")
        self.labels = tuple(pairs)

    @classmethod
    def from_atoms(cls, atoms: Mapping[FaceKey, object]) -> "Tag":
        return cls({k: atom_label(v) for k, v in atoms.items()})

    @property
    def face_keys(self) -> tuple:
        return tuple(k for k, _ in self.labels)

    def label_of(self, face_key: FaceKey) -> tuple:
        for k, label in self.labels:
            if k == tuple(face_key):
                return label
        raise TagError(f"face {face_key} not labelled")

    def mapping(self) -> dict:
        return dict(self.labels)

    def is_injective(self) -> bool:
        vals = [label for _, label in self.labels]
        return len(set(vals)) == len(vals)

    def restrict(self, face_keys: Sequence[FaceKey]) -> "Tag":
        """The induced labelling on a sub-lattice (a facet's faces)."""
        want = {tuple(k) for k in face_keys}
        have = {k for k, _ in self.labels}
        if not want <= have:
            raise TagError("restriction target is not a sub-lattice of the tag")
        return Tag({k: label for k, label in self.labels if k in want})

    def relabel(self, dictionary: Mapping[tuple, tuple]) -> "Tag":
        return Tag({k: dictionary[label] for k, label in self.labels})

    def __eq__(self, other):
        return isinstance(other, Tag) and self.labels == other.labels

    def __hash__(self):
        return hash(self.labels)

    def __repr__(self):
        return f"Tag({len(self.labels)} faces)"


def _cell_face_keys(cell: Cell) -> list:
    faces = cell.polytope.faces()
    return [key for _, keys in sorted(faces.items()) for key in keys]


def pair_tags(tag1: Tag, tag2: Tag, face_pairs: Mapping[FaceKey, tuple]) -> Tag:
    """Tag a fibre product: each face inherits the merged labels of its pair.

    face_pairs maps a face key of the product cell to the matched pair of
    operand face keys.  Merging is a sorted concatenation, so the pairing is
    symmetric and associative after canonicalization, with the empty label
    acting as a unit.
    """
    out = {}
    for key, (k1, k2) in face_pairs.items():
        out[tuple(key)] = merge_labels(tag1.label_of(k1), tag2.label_of(k2))
    tag = Tag(out)
    if not tag.is_injective():
        raise TagError("label collision while pairing tags; use disjoint atom pools")
    return tag


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuotientMarker:
    """A finite-group quotient presented by its cover.

    The generator holding the marker is the class of cover/group; its tag is
    constant on each orbit and injective across orbits.  orbits is a partition
    of the cover's face keys.
    """

    order: int
    orbits: tuple

    def __post_init__(self):
        if self.order < 1:
            raise ChainError("group order must be positive")
        object.__setattr__(self, "orbits",
                           tuple(tuple(sorted(tuple(tuple(f) for f in orbit)))
                                 for orbit in self.orbits))


class Generator:
    """One labelled cell with a map to the target.

    Chain generators carry an orientation on the cell; cochain generators
    instead carry a coorientation of the map (which must then restrict to a
    submersion on every face), and the cell's own orientation is normalized
    away.
    """

    __slots__ = ("cell", "cmap", "tag", "coorientation", "quotient")

    def __init__(self, cell: Cell, cmap: CellMap, tag: Tag,
                 coorientation: Optional[Coorientation] = None,
                 quotient: Optional[QuotientMarker] = None):
        m = cmap.target.dim
        if m > 0 and (cmap.n_cols != cell.polytope.ambient_dim
                      or cmap.s_cols != cell.torus_rank):
            raise ChainError("map shape does not match the cell")
        keys = _cell_face_keys(cell)
        if set(tag.face_keys) != set(tuple(k) for k in keys):
            raise TagError("tag must label exactly the faces of the cell")
        if coorientation is not None:
            if quotient is not None:
                raise ChainError("cochain generators cannot carry quotient markers")
            if not is_strong_submersion(cell, cmap):
                raise ChainError("cochain generators need a submersion on every face")
            validate_coorientation(cell, cmap, coorientation)
            cell = Cell(cell.polytope, cell.torus_rank,
                        default_frame(cell.polytope, cell.torus_rank), 1)
        if quotient is not None:
            self._validate_marker(cell, tag, quotient)
        elif not tag.is_injective():
            raise TagError("tag labels must be injective")
        self.cell = cell
        self.cmap = cmap
        self.tag = tag
        self.coorientation = coorientation
        self.quotient = quotient

    @staticmethod
    def _validate_marker(cell: Cell, tag: Tag, marker: QuotientMarker):
        keys = {tuple(k) for k in _cell_face_keys(cell)}
        seen = set()
        orbit_labels = []
        for orbit in marker.orbits:
            if marker.order % len(orbit) != 0:
                raise ChainError("orbit size must divide the group order")
            labels = {tag.label_of(f) for f in orbit}
            if len(labels) != 1:
                raise TagError("marker tag must be constant on each orbit")
            orbit_labels.append(labels.pop())
            for f in orbit:
                if f in seen:
                    raise ChainError("orbits must be disjoint")
                seen.add(f)
        if seen != keys:
            raise ChainError("orbits must cover every face of the cell")
        if len(set(orbit_labels)) != len(orbit_labels):
            raise TagError("marker tag must separate orbits")

    @property
    def grade(self) -> int:
        if self.coorientation is not None:
            return self.cmap.target.dim - self.cell.dim
        return self.cell.dim

    @property
    def is_cochain(self) -> bool:
        return self.coorientation is not None

    def reversed(self) -> "Generator":
        if self.is_cochain:
            return Generator(self.cell, self.cmap, self.tag,
                             self.coorientation.reversed())
        return Generator(self.cell.reversed(), self.cmap, self.tag,
                         quotient=self.quotient)

    def __repr__(self):
        kind = "cochain" if self.is_cochain else "chain"
        return (f"Generator({kind}, dim {self.cell.dim}, "
                f"{len(self.cell.polytope.vertices)} vertices, "
                f"-> {self.cmap.target.kind}({self.cmap.target.dim}))")


def expand_quotient(gen: Generator) -> tuple[Fraction, Generator]:
    """Replace a marked generator by 1/order times its cover.

    Faces in a shared orbit get the orbit label extended by a position atom,
    keeping the cover tag injective; the position depends only on the face and
    its orbit, so expansion commutes with boundary restriction.
    """
    marker = gen.quotient
    if marker is None:
        return Fraction(1), gen
    new_labels = {}
    for orbit in marker.orbits:
        base = gen.tag.label_of(orbit[0])
        if len(orbit) == 1:
            new_labels[orbit[0]] = base
        else:
            for j, fk in enumerate(orbit):
                new_labels[fk] = merge_labels(base, (("q", j),))
    cover = Generator(gen.cell, gen.cmap, Tag(new_labels))
    return Fraction(1, marker.order), cover


def _orbit_position(marker: QuotientMarker, face_key) -> tuple:
    fk = tuple(face_key)
    for orbit in marker.orbits:
        if fk in orbit:
            if len(orbit) == 1:
                return EMPTY_LABEL
            return (("q", orbit.index(fk)),)
    raise ChainError(f"face {face_key} not in any orbit")


# ---------------------------------------------------------------------------
# Normal form and chains
# ---------------------------------------------------------------------------

def _target_key(t: Target):
    return (t.kind, t.dim)


def _normal_form(gen: Generator):
    """(key, sign, normalized generator), or None when the class is zero."""
    cell, cmapc, coo = canonical_cell_map(gen.cell, gen.cmap, gen.coorientation)
    if has_free_circle(cell, cmapc):
        return None
    if gen.is_cochain:
        sign = coo.sign
        coo = Coorientation(coo.frame, 1)
        norm_cell = Cell(cell.polytope, cell.torus_rank, cell.frame, 1)
        cofr = coo.frame
    else:
        sign = cell.sign
        coo = None
        norm_cell = Cell(cell.polytope, cell.torus_rank, cell.frame, 1)
        cofr = None
    key = (_target_key(cmapc.target), norm_cell.polytope.ambient_dim,
           norm_cell.polytope.vertices, norm_cell.torus_rank,
           cmapc.a, cmapc.m_t, cmapc.b, gen.tag.labels, cofr)
    return key, sign, Generator(norm_cell, cmapc, gen.tag, coo)


class Chain:
    """Finite rational combination of generator classes, kept canonical."""

    __slots__ = ("ring", "_terms")

    def __init__(self, terms: Iterable = (), ring: str = "Q"):
        if ring not in ("Q", "Z"):
            raise ChainError("ring must be 'Q' or 'Z'")
        self.ring = ring
        self._terms: dict = {}
        for coeff, gen in terms:
            self._accumulate(frac(coeff), gen)
        self._prune()

    def _accumulate(self, coeff: Fraction, gen: Generator):
        if coeff == 0:
            return
        if gen.quotient is not None:
            if self.ring != "Q":
                raise ChainError("quotient markers require a Q-algebra")
            factor, gen = expand_quotient(gen)
            coeff *= factor
        nf = _normal_form(gen)
        if nf is None:
            return
        key, sign, norm = nf
        if key in self._terms:
            self._terms[key][0] += sign * coeff
        else:
            self._terms[key] = [sign * coeff, norm]

    def _prune(self):
        for key in [k for k, (c, _) in self._terms.items() if c == 0]:
            del self._terms[key]

    def terms(self) -> list:
        """Deterministically ordered list of (coefficient, generator)."""
        items = sorted(self._terms.items(), key=lambda kv: _term_key(kv[0]))
        return [(c, g) for _, (c, g) in items]

    def coefficient(self, gen: Generator) -> Fraction:
        """Coefficient of the generator's class; 1/|group| folds back out."""
        factor, gen = expand_quotient(gen)
        nf = _normal_form(gen)
        if nf is None:
            return Fraction(0)
        key, sign, _ = nf
        return sign * self._terms.get(key, (Fraction(0), None))[0] / factor

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def grades(self) -> set:
        return {g.grade for _, g in self._terms.values()}

    def scale(self, r) -> "Chain":
        out = Chain(ring=self.ring)
        for key, (c, g) in self._terms.items():
            if frac(r) * c != 0:
                out._terms[key] = [frac(r) * c, g]
        return out

    def __add__(self, other: "Chain") -> "Chain":
        if self.ring != other.ring:
            raise ChainError("cannot mix coefficient rings")
        out = Chain(ring=self.ring)
        out._terms = {k: [c, g] for k, (c, g) in self._terms.items()}
        for key, (c, g) in other._terms.items():
            if key in out._terms:
                out._terms[key][0] += c
            else:
                out._terms[key] = [c, g]
        out._prune()
        return out

    def __sub__(self, other: "Chain") -> "Chain":
        return self + other.scale(-1)

    def __neg__(self) -> "Chain":
        return self.scale(-1)

    def __eq__(self, other):
        return (isinstance(other, Chain) and self.ring == other.ring
                and {k: c for k, (c, _) in self._terms.items()}
                == {k: c for k, (c, _) in other._terms.items()})

    def __hash__(self):
        raise TypeError("chains are mutable-by-construction; not hashable")

    def __repr__(self):
        return f"Chain({len(self._terms)} terms over {self.ring})"


def chain(*terms, ring: str = "Q") -> Chain:
    """Build a chain from (coefficient, generator) pairs or bare generators."""
    prepared = []
    for t in terms:
        if isinstance(t, Generator):
            prepared.append((Fraction(1), t))
        else:
            prepared.append(t)
    return Chain(prepared, ring=ring)


def disjoint_union(gens: Sequence[Generator]) -> Chain:
    """The class of a disjoint union is the sum of its component classes."""
    labels = [label for g in gens for _, label in g.tag.labels]
    if len(set(labels)) != len(labels):
        raise TagError("components of a disjoint union need disjoint labels")
    return Chain([(Fraction(1), g) for g in gens])


# ---------------------------------------------------------------------------
# Boundary
# ---------------------------------------------------------------------------

def generator_boundary(gen: Generator) -> list:
    """Signed facet generators of one generator; marked generators expand."""
    out = []
    marker = gen.quotient
    for bc in cell_boundary(gen.cell):
        sub_keys = _cell_face_keys(Cell(bc.cell.polytope, 0))
        if marker is None:
            tag = gen.tag.restrict(sub_keys)
        else:
            tag = Tag({tuple(k): merge_labels(gen.tag.label_of(k),
                                              _orbit_position(marker, k))
                       for k in sub_keys})
        cmap = restrict_map(gen.cmap)
        if gen.is_cochain:
            parent = Cell(gen.cell.polytope, gen.cell.torus_rank,
                          gen.cell.frame, 1)
            co = restrict_coorientation(parent, gen.cmap, gen.coorientation, bc)
            cell = Cell(bc.cell.polytope, bc.cell.torus_rank, bc.cell.frame, 1)
            out.append((Fraction(1), Generator(cell, cmap, tag, co)))
        else:
            coeff = Fraction(1, marker.order) if marker is not None else Fraction(1)
            out.append((coeff, Generator(bc.cell, cmap, tag)))
    return out


def boundary(c: Chain) -> Chain:
    """The boundary operator: restrict each generator to its facets."""
    out = Chain(ring=c.ring)
    for coeff, gen in c.terms():
        for factor, sub in generator_boundary(gen):
            out._accumulate(coeff * factor, sub)
    out._prune()
    return out


# ---------------------------------------------------------------------------
# Second boundary and the corner pairing
# ---------------------------------------------------------------------------

@dataclass
class CornerTerm:
    """One flag of the second boundary: a corner reached through two facets."""

    corner: FaceKey
    first_facet: FaceKey
    second_facet: FaceKey
    cell: Cell
    tag: Tag


def corner_terms(gen: Generator) -> list[CornerTerm]:
    """All ordered flags (corner, facet entered first, other facet)."""
    if gen.quotient is not None:
        _, gen = expand_quotient(gen)
    out = []
    p = gen.cell.polytope
    facet_keys = [key for key, _ in p.facets()]
    for bc1 in cell_boundary(gen.cell):
        sub_keys = _cell_face_keys(Cell(bc1.cell.polytope, 0))
        tag1 = gen.tag.restrict(sub_keys)
        for bc2 in cell_boundary(bc1.cell):
            corner = bc2.face
            holders = [k for k in facet_keys if set(corner) <= set(k)]
            if len(holders) != 2:
                raise ChainError("corner contained in other than two facets")
            other = holders[0] if holders[1] == bc1.face else holders[1]
            corner_keys = _cell_face_keys(Cell(bc2.cell.polytope, 0))
            out.append(CornerTerm(
                corner=corner,
                first_facet=bc1.face,
                second_facet=other,
                cell=bc2.cell,
                tag=tag1.restrict(corner_keys)))
    return out


@dataclass
class PairingReport:
    ok: bool
    corners_checked: int
    details: tuple = ()

    def __bool__(self):
        return self.ok


def check_sigma_pairing(terms: Sequence[CornerTerm]) -> PairingReport:
    """Each flag must have a swapped partner carrying the opposite orientation."""
    index = {}
    for i, t in enumerate(terms):
        key = (t.corner, t.first_facet, t.second_facet)
        if key in index:
            return PairingReport(False, 0, ("duplicate flag",))
        index[key] = i
    seen = set()
    pairs = 0
    for i, t in enumerate(terms):
        if i in seen:
            continue
        partner_key = (t.corner, t.second_facet, t.first_facet)
        j = index.get(partner_key)
        if j is None or j in seen:
            return PairingReport(False, pairs,
                                 (f"unpaired flag at corner {t.corner}",))
        partner = terms[j]
        if t.tag != partner.tag:
            return PairingReport(False, pairs,
                                 (f"tag mismatch at corner {t.corner}",))
        if cell_orientation_equal(t.cell, partner.cell) != -1:
            return PairingReport(False, pairs,
                                 (f"orientations at corner {t.corner} do not cancel",))
        seen.add(i)
        seen.add(j)
        pairs += 1
    return PairingReport(True, pairs)


def verify_dd_zero(c: Chain) -> PairingReport:
    """Check that the double boundary vanishes and why: corners cancel in pairs."""
    total = 0
    for _, gen in c.terms():
        report = check_sigma_pairing(corner_terms(gen))
        if not report.ok:
            return report
        total += report.corners_checked
    if not boundary(boundary(c)).is_zero:
        return PairingReport(False, total, ("double boundary is nonzero",))
    return PairingReport(True, total)


# ---------------------------------------------------------------------------
# Automorphisms
# ---------------------------------------------------------------------------

@dataclass
class AutReport:
    vertex_maps: list
    torus_translations: int
    verdict: str

    @property
    def order(self) -> Optional[int]:
        if self.verdict != "finite":
            return None
        return len(self.vertex_maps) * self.torus_translations


def aut_finite(cell: Cell, cmap: CellMap, tag: Tag, *, cap: int = 12) -> AutReport:
    """Affine self-isomorphisms preserving the map and the labels.

    Returns the vertex permutations realized by affine self-maps of the
    polytope part, together with the count of torus translations commuting
    with the map.  Injective labels force the polytope part to be trivial.
    """
    if has_free_circle(cell, cmap):
        return AutReport([], 0, "infinite")
    p = cell.polytope
    verts = list(p.vertices)
    if len(verts) > cap:
        return AutReport([], 0, "undecided")
    n, d = p.ambient_dim, p.dim
    # affine basis of the hull
    basis_idx = [0]
    dirs: list = []
    for i in range(1, len(verts)):
        cand = dirs + [tuple(frac(a) - frac(b) for a, b in zip(verts[i], verts[0]))]
        if rank(mat(cand)) == len(cand):
            dirs = cand
            basis_idx.append(i)
        if len(basis_idx) == d + 1:
            break
    vertex_labels = {}
    vert_face = {}
    for key, label in tag.labels:
        if len(key) == 1:
            vertex_labels[key[0]] = label
    for v in verts:
        vert_face[v] = vertex_labels.get(tuple(v))

    def image_of(lam, images):
        base = images[0]
        return tuple(frac(base[j]) + sum(lam[t] * (frac(images[t + 1][j]) - frac(base[j]))
                                         for t in range(d))
                     for j in range(n))

    # barycentric-style coordinates of every vertex in the chosen basis
    coords = []
    dm = mat(dirs)
    for v in verts:
        rhs = tuple(frac(a) - frac(b) for a, b in zip(v, verts[basis_idx[0]]))
        lam = solve(tuple(tuple(dm[i][j] for i in range(d)) for j in range(n)), rhs)
        if lam is None:
            raise ChainError("vertex outside its own affine hull")
        coords.append(lam)

    # translations c with M c integral, counted modulo the lattice; the free
    # circle check above guarantees M has full column rank, so this is finite
    torus_part = 1
    if cell.torus_rank:
        for f in invariant_factors(cmap.m_t):
            torus_part *= int(f)

    found = []
    vset = {tuple(v) for v in verts}
    candidates = [v for v in verts]
    for images in itertools.permutations(candidates, d + 1):
        if vert_face.get(tuple(images[0])) != vert_face.get(tuple(verts[basis_idx[0]])):
            continue
        perm = {}
        ok = True
        for v, lam in zip(verts, coords):
            w = image_of(lam, images)
            if w not in vset:
                ok = False
                break
            perm[tuple(v)] = w
        if not ok or len(set(perm.values())) != len(verts):
            continue
        # the map must fix the affine map's values and every face label
        for v in verts:
            if cmap.value(v, (0,) * cell.torus_rank) != cmap.value(perm[tuple(v)], (0,) * cell.torus_rank):
                ok = False
                break
        if not ok:
            continue
        for key, label in tag.labels:
            image_key = tuple(sorted(perm[v] for v in key))
            try:
                if tag.label_of(image_key) != label:
                    ok = False
                    break
            except TagError:
                ok = False
                break
        if ok and perm not in found:
            found.append(perm)
    return AutReport(found, torus_part, "finite")


# ---------------------------------------------------------------------------
# Pushforward along target maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TargetMap:
    """Affine map between targets; torus sources need an integer matrix."""

    source: Target
    target: Target
    matrix: tuple
    offset: tuple

    def __init__(self, source: Target, target: Target, matrix, offset):
        mm = tuple(tuple(frac(x) for x in row) for row in matrix)
        bb = tuple(frac(x) for x in offset)
        if len(mm) != target.dim or len(bb) != target.dim:
            raise ChainError("target map rows must match the target dimension")
        for row in mm:
            if len(row) != source.dim:
                raise ChainError("target map columns must match the source dimension")
        if source.is_torus:
            if target.is_torus:
                if any(x.denominator != 1 for row in mm for x in row):
                    raise ChainError("torus-to-torus maps need integer matrices")
            elif any(x != 0 for row in mm for x in row):
                raise ChainError("a torus only maps to a euclidean space by a constant")
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "matrix", mm)
        object.__setattr__(self, "offset", bb)

    def value(self, y: Sequence) -> Vec:
        out = [self.offset[i] + sum(self.matrix[i][j] * frac(y[j])
                                    for j in range(self.source.dim))
               for i in range(self.target.dim)]
        if self.target.is_torus:
            out = [x - (x.numerator // x.denominator) for x in out]
        return tuple(out)

    def compose(self, other: "TargetMap") -> "TargetMap":
        """self after other."""
        if other.target != self.source:
            raise ChainError("composition needs matching targets")
        mm = [[sum(self.matrix[i][k] * other.matrix[k][j]
                   for k in range(self.source.dim))
               for j in range(other.source.dim)]
              for i in range(self.target.dim)]
        bb = [self.offset[i] + sum(self.matrix[i][k] * other.offset[k]
                                   for k in range(self.source.dim))
              for i in range(self.target.dim)]
        return TargetMap(other.source, self.target, mm, bb)


def identity_target_map(t: Target) -> TargetMap:
    eye = [[1 if i == j else 0 for j in range(t.dim)] for i in range(t.dim)]
    return TargetMap(t, t, eye, [0] * t.dim)


def push_generator(h: TargetMap, gen: Generator) -> Generator:
    if gen.is_cochain:
        raise ChainError("pushforward acts on chains; cochains pull back")
    if gen.cmap.target != h.source:
        raise ChainError("generator target does not match the map source")
    m_old = h.source.dim
    n = gen.cell.polytope.ambient_dim
    s = gen.cell.torus_rank
    a_new = [[sum(h.matrix[i][k] * gen.cmap.a[k][j] for k in range(m_old))
              for j in range(n)]
             for i in range(h.target.dim)]
    mt_new = [[sum(int(h.matrix[i][k]) * int(gen.cmap.m_t[k][j]) for k in range(m_old))
               for j in range(s)]
              for i in range(h.target.dim)]
    b_new = [h.offset[i] + sum(h.matrix[i][k] * gen.cmap.b[k] for k in range(m_old))
             for i in range(h.target.dim)]
    cmap = CellMap(h.target, a_new, mt_new, b_new)
    return Generator(gen.cell, cmap, gen.tag, quotient=gen.quotient)


def pushforward(h: TargetMap, c: Chain) -> Chain:
    return Chain([(coeff, push_generator(h, gen)) for coeff, gen in c.terms()],
                 ring=c.ring)


# ---------------------------------------------------------------------------
# Chart transport (explicit witnesses)
# ---------------------------------------------------------------------------

def transport_generator(gen: Generator, linear: Sequence[Sequence],
                        offset: Sequence) -> Generator:
    """Push a generator through an affine map injective on its polytope's hull.

    Vertices, frames, labels, and any coorientation move along; the affine
    map to the target is re-solved in the new chart, which is possible and
    unique up to the hull exactly when the transport is injective on the hull.
    """
    if gen.quotient is not None:
        raise ChainError("transport a marked generator after expanding it")
    lin = tuple(tuple(frac(x) for x in row) for row in linear)
    off = tuple(frac(x) for x in offset)
    n_old = gen.cell.polytope.ambient_dim
    n_new = len(lin)
    s = gen.cell.torus_rank

    def phi(v):
        return tuple(off[i] + sum(lin[i][j] * frac(v[j]) for j in range(n_old))
                     for i in range(n_new))

    old_verts = gen.cell.polytope.vertices
    new_verts = [phi(v) for v in old_verts]
    if len(set(new_verts)) != len(new_verts):
        raise ChainError("transport map is not injective on the vertices")
    poly = Polytope.from_points(n_new, [list(v) for v in new_verts])
    if set(poly.vertices) != set(new_verts):
        raise ChainError("transport map does not preserve the vertex set")
    vmap = {tuple(o): nv for o, nv in zip(old_verts, new_verts)}

    def push_vec(w):
        head = tuple(sum(lin[i][j] * frac(w[j]) for j in range(n_old))
                     for i in range(n_new))
        return head + tuple(w[n_old:])

    frame = tuple(push_vec(w) for w in gen.cell.frame)
    cell = Cell(poly, s, frame, gen.cell.sign)

    # re-solve the affine part on the new chart
    base = old_verts[0]
    dirs = [tuple(frac(a) - frac(b) for a, b in zip(v, base)) for v in old_verts[1:]]
    pushed = [tuple(sum(lin[i][j] * d[j] for j in range(n_old)) for i in range(n_new))
              for d in dirs]
    m = gen.cmap.target.dim
    a_new = []
    for i in range(m):
        if dirs:
            rhs = tuple(sum(gen.cmap.a[i][j] * d[j] for j in range(n_old))
                        for d in dirs)
            row = solve(mat(pushed), rhs)
            if row is None:
                raise ChainError("transport map is not injective on the hull")
        else:
            row = (Fraction(0),) * n_new
        a_new.append(tuple(row))
    b_new = [sum(gen.cmap.a[i][j] * frac(base[j]) for j in range(n_old))
             + gen.cmap.b[i]
             - sum(a_new[i][j] * phi(base)[j] for j in range(n_new))
             for i in range(m)]
    cmap = CellMap(gen.cmap.target, a_new, gen.cmap.m_t, b_new)

    tag = Tag({tuple(sorted(vmap[v] for v in key)): label
               for key, label in gen.tag.labels})
    co = gen.coorientation
    if co is not None:
        co = Coorientation(tuple(push_vec(w) for w in co.frame), co.sign)
    return Generator(cell, cmap, tag, co)


# ---------------------------------------------------------------------------
# Simplices and the singular bridge
# ---------------------------------------------------------------------------

def simplex(k: int) -> Polytope:
    return standard_simplex(k)


def simplex_cell(k: int) -> Cell:
    """The standard simplex with the edge frame out of its first vertex."""
    p = standard_simplex(k)
    e = [tuple(Fraction(1 if j == i else 0) for j in range(k + 1))
         for i in range(k + 1)]
    frame = tuple(tuple(e[i + 1][j] - e[0][j] for j in range(k + 1))
                  for i in range(k))
    return Cell(p, 0, frame, 1)


def face_inclusion(k: int, j: int) -> tuple:
    """Linear data (matrix, offset) of the j-th facet inclusion of the simplex.

    Inserts a zero at position j: the image is the facet where coordinate j
    vanishes.
    """
    if not 0 <= j <= k:
        raise ChainError("facet index out of range")
    rows = []
    for i in range(k + 1):
        if i == j:
            rows.append(tuple(Fraction(0) for _ in range(k)))
        else:
            src = i if i < j else i - 1
            rows.append(tuple(Fraction(1 if t == src else 0) for t in range(k)))
    return tuple(rows), tuple(Fraction(0) for _ in range(k + 1))


def standard_simplex_tag(k: int) -> Tag:
    """Deterministic labels for the faces of the standard simplex."""
    p = standard_simplex(k)
    keys = [key for _, keys in sorted(p.faces().items()) for key in keys]
    return Tag.from_atoms({key: ("dx", k, i) for i, key in enumerate(keys)})


@dataclass(frozen=True)
class SingularSimplex:
    """An affine map from the standard simplex into the target."""

    degree: int
    target: Target
    matrix: tuple
    offset: tuple

    def __init__(self, degree: int, target: Target, matrix, offset):
        mm = tuple(tuple(frac(x) for x in row) for row in matrix)
        bb = tuple(frac(x) for x in offset)
        if len(mm) != target.dim or len(bb) != target.dim:
            raise ChainError("singular simplex rows must match the target dimension")
        for row in mm:
            if len(row) != degree + 1:
                raise ChainError("singular simplex columns must be degree + 1")
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "matrix", mm)
        object.__setattr__(self, "offset", bb)

    def face(self, j: int) -> "SingularSimplex":
        lin, _ = face_inclusion(self.degree, j)
        mm = [[sum(self.matrix[i][r] * lin[r][t] for r in range(self.degree + 1))
               for t in range(self.degree)]
              for i in range(self.target.dim)]
        return SingularSimplex(self.degree - 1, self.target, mm, self.offset)


def singular_boundary(terms: Sequence) -> list:
    """Alternating-sum boundary of a formal sum of singular simplices."""
    out = []
    for coeff, sx in terms:
        if sx.degree == 0:
            continue
        for j in range(sx.degree + 1):
            out.append((frac(coeff) * (-1) ** j, sx.face(j)))
    return out


def singular_generator(sx: SingularSimplex) -> Generator:
    cell = simplex_cell(sx.degree)
    m = sx.target.dim
    cmap = CellMap(sx.target, sx.matrix, tuple(() for _ in range(m)), sx.offset)
    return Generator(cell, cmap, standard_simplex_tag(sx.degree))


def singular_to_kuranishi(terms: Sequence) -> Chain:
    """Formal sums of affine singular simplices become chains with fixed tags."""
    return Chain([(frac(coeff), singular_generator(sx)) for coeff, sx in terms])


def _facet_label_dictionary(k: int, j: int) -> dict:
    """Translate standard labels of the small simplex to facet-restricted ones."""
    lin, _ = face_inclusion(k, j)
    small = standard_simplex_tag(k - 1)
    big = standard_simplex_tag(k)
    out = {}
    for key, label in small.labels:
        image = tuple(sorted(tuple(sum(lin[i][t] * v[t] for t in range(k))
                                   for i in range(k + 1))
                             for v in key))
        out[label] = big.label_of(image)
    return out


def check_singular_chain_map(terms: Sequence):
    """Boundary commutes with the singular bridge, via facet re-charting.

    The geometric boundary of a bridged simplex lives on facets of the big
    simplex; the bridged simplicial boundary lives on small simplices.  Each
    small term is transported through its facet inclusion, with the fixed
    label dictionary, and the resulting chains must agree exactly.
    """
    lhs = boundary(singular_to_kuranishi(terms))
    rhs = Chain()
    for coeff, sx in terms:
        k = sx.degree
        if k == 0:
            continue
        for j in range(k + 1):
            small = singular_generator(sx.face(j))
            mu = _facet_label_dictionary(k, j)
            relabeled = Generator(small.cell, small.cmap, small.tag.relabel(mu))
            lin, off = face_inclusion(k, j)
            moved = transport_generator(relabeled, lin, off)
            rhs = rhs + Chain([(frac(coeff) * (-1) ** j, moved)])
    if lhs == rhs:
        return CheckReport(True, len(lhs.terms()), True, ())
    return CheckReport(False, 0, True, ("boundary does not match the bridged boundary",))


# ---------------------------------------------------------------------------
# Cylinders
# ---------------------------------------------------------------------------

def cylinder(gen: Generator, alt_tag: Tag) -> Generator:
    """A prism witnessing that two labellings give the same class up to boundary.

    The boundary of the prism is the relabelled generator minus the original,
    plus prisms over the generator's own facets.
    """
    if gen.quotient is not None:
        raise ChainError("cylinders need unmarked generators")
    if gen.is_cochain:
        raise ChainError("cylinders are chain-level witnesses")
    if set(alt_tag.face_keys) != set(gen.tag.face_keys):
        raise TagError("alternative tag must label the same faces")
    if not alt_tag.is_injective():
        raise TagError("alternative tag must be injective")
    p = gen.cell.polytope
    n, s = p.ambient_dim, gen.cell.torus_rank
    pts = [[0] + list(v) for v in p.vertices] + [[1] + list(v) for v in p.vertices]
    prism = Polytope.from_points(n + 1, pts)
    frame = ((Fraction(1),) + (Fraction(0),) * (n + s),) + tuple(
        (Fraction(0),) + tuple(w) for w in gen.cell.frame)
    cell = Cell(prism, s, frame, gen.cell.sign)
    a_new = [(Fraction(0),) + tuple(row) for row in gen.cmap.a]
    cmap = CellMap(gen.cmap.target, a_new, gen.cmap.m_t, gen.cmap.b)

    labels = {}
    for key in _cell_face_keys(Cell(prism, 0)):
        ts = {v[0] for v in key}
        base = tuple(sorted({tuple(v[1:]) for v in key}))
        if ts == {Fraction(0)}:
            labels[key] = gen.tag.label_of(base)
        elif ts == {Fraction(1)}:
            labels[key] = alt_tag.label_of(base)
        else:
            labels[key] = merge_labels(gen.tag.label_of(base),
                                       alt_tag.label_of(base), (("cyl",),))
    tag = Tag(labels)
    if not tag.is_injective():
        raise TagError("cylinder labels collide; the two tags must use disjoint atoms")
    return Generator(cell, cmap, tag)


def check_cylinder_witness(gen: Generator, alt_tag: Tag):
    """The prism boundary equals new-minus-old plus terms over the facets."""
    wit = cylinder(gen, alt_tag)
    b = boundary(chain(wit))
    n = gen.cell.polytope.ambient_dim
    drop = tuple(tuple(Fraction(1 if j == i + 1 else 0) for j in range(n + 1))
                 for i in range(n))
    ends = Chain()
    sides = Chain()
    for coeff, term in b.terms():
        ts = {v[0] for v in term.cell.polytope.vertices}
        if ts == {Fraction(0)} or ts == {Fraction(1)}:
            moved = transport_generator(term, drop, (Fraction(0),) * n)
            ends = ends + Chain([(coeff, moved)])
        else:
            sides = sides + Chain([(coeff, term)])
    want = chain((1, Generator(gen.cell, gen.cmap, alt_tag)),
                 (-1, Generator(gen.cell, gen.cmap, gen.tag)))
    if ends == want:
        return CheckReport(True, len(b.terms()), True,
                           (f"{len(sides.terms())} side terms",))
    return CheckReport(False, 0, True, ("prism ends do not give the tag difference",))


# ---------------------------------------------------------------------------
# Complexes and homology
# ---------------------------------------------------------------------------

class ChainComplex:
    """A finite generator set closed under the boundary, graded by dimension."""

    def __init__(self, gens: Sequence[Generator]):
        self.basis: dict = {}
        reps: dict = {}
        for g in gens:
            _, gg = expand_quotient(g)
            nf = _normal_form(gg)
            if nf is None:
                continue
            key, _, norm = nf
            if key not in reps:
                reps[key] = norm
                self.basis.setdefault(norm.grade, []).append((key, norm))
        for grade in self.basis:
            self.basis[grade].sort(key=lambda kv: _term_key(kv[0]))
        self._key_index = {key: (grade, i)
                           for grade, items in self.basis.items()
                           for i, (key, _) in enumerate(items)}
        self.matrices: dict = {}
        for grade, items in sorted(self.basis.items()):
            rows = len(self.basis.get(grade - 1, []))
            cols = len(items)
            m = [[Fraction(0)] * cols for _ in range(rows)]
            for col, (_, gen) in enumerate(items):
                for coeff, sub in generator_boundary(gen):
                    nf = _normal_form(sub)
                    if nf is None:
                        continue
                    key, sign, _ = nf
                    if key not in self._key_index:
                        raise ChainError("generator set is not closed under boundary")
                    g2, row = self._key_index[key]
                    if g2 != grade - 1:
                        raise ChainError("boundary term lands in the wrong grade")
                    m[row][col] += coeff * sign
            self.matrices[grade] = tuple(tuple(r) for r in m)

    def boundary_matrix(self, grade: int) -> Mat:
        return self.matrices.get(grade, ())

    def betti(self) -> dict:
        out = {}
        for grade, items in sorted(self.basis.items()):
            r_out = rank(self.matrices.get(grade, ()))
            r_in = rank(self.matrices.get(grade + 1, ()))
            out[grade] = len(items) - r_out - r_in
        return out


def simplex_face_complex(k: int) -> list:
    """Every face of the standard simplex as a point-target generator."""
    p = standard_simplex(k)
    big = standard_simplex_tag(k)
    gens = []
    for dim, keys in sorted(p.faces().items()):
        for key in keys:
            fp = p.face_polytope(key)
            cell = Cell(fp, 0)
            sub_keys = _cell_face_keys(cell)
            gens.append(Generator(cell, constant_map(POINT, k + 1, 0),
                                  big.restrict(sub_keys)))
    return gens
