"""Exact linear algebra over Fraction, plus integer normal forms for torus factors.

Everything works on tuples of tuples of Fraction (rows). No floats anywhere:
orientation signs, face incidences and lattice kernels are decided by exact
pivoting, and a single rounding error would corrupt downstream sign bookkeeping.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional, Sequence

Vec = tuple[Fraction, ...]
Mat = tuple[Vec, ...]


def frac(x) -> Fraction:
    """Coerce ints, strings like '3/4', and Fractions; reject floats."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"expected exact rational, got {type(x).__name__}: {x!r}")


def vec(xs: Iterable) -> Vec:
    return tuple(frac(x) for x in xs)


def mat(rows: Iterable[Iterable]) -> Mat:
    out = tuple(vec(r) for r in rows)
    if out and any(len(r) != len(out[0]) for r in out):
        raise ValueError("ragged matrix")
    return out


def zeros(n: int) -> Vec:
    return (Fraction(0),) * n


def identity(n: int) -> Mat:
    return tuple(tuple(Fraction(1 if i == j else 0) for j in range(n)) for i in range(n))


def vadd(a: Vec, b: Vec) -> Vec:
    return tuple(x + y for x, y in zip(a, b))


def vsub(a: Vec, b: Vec) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def vscale(c: Fraction, a: Vec) -> Vec:
    return tuple(c * x for x in a)


def dot(a: Vec, b: Vec) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def matvec(m: Mat, v: Vec) -> Vec:
    return tuple(dot(row, v) for row in m)


def matmul(a: Mat, b: Mat) -> Mat:
    bt = transpose(b)
    return tuple(tuple(dot(row, col) for col in bt) for row in a)


def transpose(m: Mat) -> Mat:
    if not m:
        return ()
    return tuple(tuple(row[j] for row in m) for j in range(len(m[0])))


def is_zero_vec(v: Vec) -> bool:
    return all(x == 0 for x in v)


# ---------------------------------------------------------------------------
# Row reduction, rank, kernels, solving
# ---------------------------------------------------------------------------

def rref(m: Mat) -> tuple[Mat, tuple[int, ...]]:
    """Reduced row echelon form and the pivot column indices."""
    rows = [list(r) for r in m]
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = Fraction(1) / rows[r][c]
        rows[r] = [inv * x for x in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return tuple(tuple(row) for row in rows), tuple(pivots)


def rank(m: Mat) -> int:
    return len(rref(m)[1])


def kernel_basis(m: Mat) -> tuple[Vec, ...]:
    """Basis of {x : m x = 0} in column space, via RREF back-substitution."""
    if not m:
        return ()
    ncols = len(m[0])
    red, pivots = rref(m)
    pivset = set(pivots)
    free = [c for c in range(ncols) if c not in pivset]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -red[i][f]
        basis.append(tuple(v))
    return tuple(basis)


def solve(m: Mat, b: Vec) -> Optional[Vec]:
    """One solution of m x = b, or None if inconsistent."""
    if not m:
        return () if all(x == 0 for x in b) else None
    ncols = len(m[0])
    aug = tuple(row + (bb,) for row, bb in zip(m, b))
    red, pivots = rref(aug)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for i, p in enumerate(pivots):
        x[p] = red[i][ncols]
    return tuple(x)


def in_span(vectors: Sequence[Vec], v: Vec) -> bool:
    if not vectors:
        return is_zero_vec(v)
    return solve(transpose(mat(vectors)), v) is not None


def independent_subset(vectors: Sequence[Vec]) -> tuple[int, ...]:
    """Indices of a maximal linearly independent subset, greedy from the front."""
    chosen: list[int] = []
    current: list[Vec] = []
    for i, v in enumerate(vectors):
        if not in_span(current, v):
            chosen.append(i)
            current.append(v)
    return tuple(chosen)


def det(m: Mat) -> Fraction:
    """Exact determinant by fraction-free-ish Gaussian elimination."""
    n = len(m)
    if n == 0:
        return Fraction(1)
    if any(len(r) != n for r in m):
        raise ValueError("det of non-square matrix")
    rows = [list(r) for r in m]
    result = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if rows[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            rows[c], rows[piv] = rows[piv], rows[c]
            result = -result
        result *= rows[c][c]
        inv = Fraction(1) / rows[c][c]
        for i in range(c + 1, n):
            if rows[i][c] != 0:
                f = rows[i][c] * inv
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[c])]
    return result


def change_of_basis_det(frame_a: Sequence[Vec], frame_b: Sequence[Vec]) -> Fraction:
    """det C where frame_a[i] = sum_j C[i][j] frame_b[j]; frames must span one space."""
    if len(frame_a) != len(frame_b):
        raise ValueError("frames of different length")
    if not frame_a:
        return Fraction(1)
    bt = transpose(mat(frame_b))
    coords = []
    for v in frame_a:
        c = solve(bt, v)
        if c is None:
            raise ValueError("frames do not span the same space")
        coords.append(c)
    return det(mat(coords))


# ---------------------------------------------------------------------------
# Canonical echelon frames
# ---------------------------------------------------------------------------

def canonical_frame(frame: Sequence[Vec]) -> tuple[tuple[Vec, ...], int]:
    """Unique RREF basis of span(frame), and the sign of the change of basis.

    Returns (echelon_basis, sign) with sign = sign(det C) for frame = C * basis.
    The echelon basis depends only on the span, so two frames of the same space
    canonicalize to the same basis and their relative orientation lives in the sign.
    """
    if not frame:
        return (), 1
    red, pivots = rref(mat(frame))
    basis = tuple(red[i] for i in range(len(pivots)))
    if len(basis) != len(frame):
        raise ValueError("frame is linearly dependent")
    d = change_of_basis_det(frame, basis)
    return basis, (1 if d > 0 else -1)


# ---------------------------------------------------------------------------
# Linear programming: exact feasibility of {x >= 0 : A x = b}
# ---------------------------------------------------------------------------

def lp_feasible(a: Mat, b: Vec) -> bool:
    """Phase-1 simplex with Bland's rule, all arithmetic exact."""
    m = len(a)
    if m == 0:
        return True
    n = len(a[0])
    rows = [list(r) for r in a]
    rhs = list(b)
    for i in range(m):
        if rhs[i] < 0:
            rows[i] = [-x for x in rows[i]]
            rhs[i] = -rhs[i]
    # tableau with artificial basis; minimize sum of artificials
    ncols = n + m
    tab = [rows[i] + [Fraction(1 if j == i else 0) for j in range(m)] + [rhs[i]]
           for i in range(m)]
    basis = [n + i for i in range(m)]
    cost = [Fraction(0)] * (ncols + 1)
    for i in range(m):
        for j in range(ncols + 1):
            cost[j] += tab[i][j]
    # artificial columns start as basis columns: zero their reduced costs
    for i in range(m):
        cost[n + i] -= Fraction(1)

    while True:
        enter = next((j for j in range(ncols) if cost[j] > 0), None)
        if enter is None:
            break
        best: Optional[tuple[Fraction, int]] = None
        for i in range(m):
            if tab[i][enter] > 0:
                ratio = tab[i][ncols] / tab[i][enter]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            raise ArithmeticError("phase-1 objective unbounded; inconsistent tableau")
        _, leave = best
        piv = tab[leave][enter]
        tab[leave] = [x / piv for x in tab[leave]]
        for i in range(m):
            if i != leave and tab[i][enter] != 0:
                f = tab[i][enter]
                tab[i] = [x - f * y for x, y in zip(tab[i], tab[leave])]
        f = cost[enter]
        if f != 0:
            for j in range(ncols + 1):
                cost[j] -= f * tab[leave][j]
        basis[leave] = enter
    return cost[ncols] == 0


# ---------------------------------------------------------------------------
# Integer forms: Hermite, Smith, integer kernels and solves
# ---------------------------------------------------------------------------

IntVec = tuple[int, ...]
IntMat = tuple[IntVec, ...]


def _as_int_rows(m: Sequence[Sequence[int]]) -> list[list[int]]:
    out = []
    for r in m:
        row = []
        for x in r:
            if isinstance(x, Fraction):
                if x.denominator != 1:
                    raise ValueError("integer matrix expected")
                x = x.numerator
            if not isinstance(x, int):
                raise TypeError("integer matrix expected")
            row.append(x)
        out.append(row)
    return out


def hermite_column(m: Sequence[Sequence[int]]) -> tuple[IntMat, IntMat]:
    """Column-style Hermite normal form: returns (H, U) with H = M U, U in GL_s(Z).

    H has its pivot in each successive row strictly below the previous pivot row,
    pivots positive, entries left of a pivot reduced into [0, pivot), and zero
    columns at the end. H is the canonical representative of M under right
    multiplication by GL_s(Z).
    """
    rows = _as_int_rows(m)
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    u = [[1 if i == j else 0 for j in range(ncols)] for i in range(ncols)]

    def colop_swap(j, k):
        for i in range(nrows):
            rows[i][j], rows[i][k] = rows[i][k], rows[i][j]
        for i in range(ncols):
            u[i][j], u[i][k] = u[i][k], u[i][j]

    def colop_neg(j):
        for i in range(nrows):
            rows[i][j] = -rows[i][j]
        for i in range(ncols):
            u[i][j] = -u[i][j]

    def colop_addmul(j, k, c):
        # col_j += c * col_k
        for i in range(nrows):
            rows[i][j] += c * rows[i][k]
        for i in range(ncols):
            u[i][j] += c * u[i][k]

    pivot_col = 0
    for r in range(nrows):
        if pivot_col >= ncols:
            break
        if all(rows[r][j] == 0 for j in range(pivot_col, ncols)):
            continue
        # gcd out the row tail into pivot_col
        while True:
            nz = [j for j in range(pivot_col, ncols) if rows[r][j] != 0]
            if len(nz) == 1:
                if nz[0] != pivot_col:
                    colop_swap(pivot_col, nz[0])
                break
            jmin = min(nz, key=lambda j: abs(rows[r][j]))
            if jmin != pivot_col:
                colop_swap(pivot_col, jmin)
            p = rows[r][pivot_col]
            for j in range(pivot_col + 1, ncols):
                if rows[r][j] != 0:
                    colop_addmul(j, pivot_col, -(rows[r][j] // p))
        if rows[r][pivot_col] < 0:
            colop_neg(pivot_col)
        p = rows[r][pivot_col]
        for j in range(pivot_col):
            q = rows[r][j] // p  # floor division reduces into [0, p)
            if q != 0:
                colop_addmul(j, pivot_col, -q)
        pivot_col += 1

    h = tuple(tuple(r) for r in rows)
    ut = tuple(tuple(r) for r in u)
    return h, ut


def integer_kernel_basis(m: Sequence[Sequence[int]]) -> IntMat:
    """Z-basis of {x in Z^s : M x = 0}; the kernel lattice is automatically saturated."""
    rows = _as_int_rows(m)
    ncols = len(rows[0]) if rows else 0
    if ncols == 0:
        return ()
    h, u = hermite_column(rows)
    zero_cols = [j for j in range(ncols) if all(h[i][j] == 0 for i in range(len(h)))]
    return tuple(tuple(u[i][j] for i in range(ncols)) for j in zero_cols)


def smith_normal_form(m: Sequence[Sequence[int]]) -> tuple[IntMat, IntMat, IntMat]:
    """(D, U, V) with U M V = D diagonal, d1 | d2 | ..., U, V unimodular."""
    a = _as_int_rows(m)
    nrows = len(a)
    ncols = len(a[0]) if a else 0
    u = [[1 if i == j else 0 for j in range(nrows)] for i in range(nrows)]
    v = [[1 if i == j else 0 for j in range(ncols)] for i in range(ncols)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in v:
            r[i], r[j] = r[j], r[i]

    def addmul_row(i, j, c):
        a[i] = [x + c * y for x, y in zip(a[i], a[j])]
        u[i] = [x + c * y for x, y in zip(u[i], u[j])]

    def addmul_col(i, j, c):
        for r in a:
            r[i] += c * r[j]
        for r in v:
            r[i] += c * r[j]

    def neg_row(i):
        a[i] = [-x for x in a[i]]
        u[i] = [-x for x in u[i]]

    t = 0
    while t < min(nrows, ncols):
        # find nonzero pivot in the remaining block
        piv = None
        for i in range(t, nrows):
            for j in range(t, ncols):
                if a[i][j] != 0:
                    if piv is None or abs(a[i][j]) < abs(a[piv[0]][piv[1]]):
                        piv = (i, j)
        if piv is None:
            break
        swap_rows(t, piv[0])
        swap_cols(t, piv[1])
        while True:
            # clear column t
            done = True
            for i in range(t + 1, nrows):
                if a[i][t] != 0:
                    q = a[i][t] // a[t][t]
                    addmul_row(i, t, -q)
                    if a[i][t] != 0:
                        swap_rows(t, i)
                        done = False
            for j in range(t + 1, ncols):
                if a[t][j] != 0:
                    q = a[t][j] // a[t][t]
                    addmul_col(j, t, -q)
                    if a[t][j] != 0:
                        swap_cols(t, j)
                        done = False
            if done:
                break
        if a[t][t] < 0:
            neg_row(t)
        t += 1

    # enforce divisibility chain
    changed = True
    while changed:
        changed = False
        for i in range(t - 1):
            if a[i][i] != 0 and a[i + 1][i + 1] % a[i][i] != 0:
                # standard trick: add col i+1 to col i, re-clear the 2x2 block
                addmul_col(i, i + 1, 1)
                while True:
                    if a[i + 1][i] == 0:
                        break
                    q = a[i + 1][i] // a[i][i] if a[i][i] != 0 else 0
                    if a[i][i] != 0:
                        addmul_row(i + 1, i, -q)
                    if a[i + 1][i] != 0:
                        swap_rows(i, i + 1)
                        # re-clear row i
                        qq = a[i][i + 1] // a[i][i] if a[i][i] != 0 else 0
                        if a[i][i] != 0 and a[i][i + 1] != 0:
                            addmul_col(i + 1, i, -qq)
                if a[i][i + 1] != 0:
                    q = a[i][i + 1] // a[i][i]
                    addmul_col(i + 1, i, -q)
                if a[i][i] < 0:
                    neg_row(i)
                if a[i + 1][i + 1] < 0:
                    neg_row(i + 1)
                changed = True
    d = tuple(tuple(r) for r in a)
    return d, tuple(tuple(r) for r in u), tuple(tuple(r) for r in v)


def invariant_factors(m: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Nonzero diagonal entries of the Smith form, in divisibility order."""
    d, _, _ = smith_normal_form(m)
    out = []
    for i in range(min(len(d), len(d[0]) if d else 0)):
        if d[i][i] != 0:
            out.append(abs(d[i][i]))
    return tuple(out)


def solve_integer(m: Sequence[Sequence[int]], c: Sequence[int]) -> Optional[IntVec]:
    """One x in Z^s with M x = c, or None."""
    rows = _as_int_rows(m)
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    cc = _as_int_rows([list(c)])[0]
    if nrows == 0:
        return (0,) * ncols
    d, u, v = smith_normal_form(rows)
    uc = [sum(u[i][j] * cc[j] for j in range(nrows)) for i in range(nrows)]
    y = [0] * ncols
    for i in range(nrows):
        di = d[i][i] if i < min(nrows, ncols) else 0
        if di == 0:
            if uc[i] != 0:
                return None
        else:
            if uc[i] % di != 0:
                return None
            if i < ncols:
                y[i] = uc[i] // di
    return tuple(sum(v[i][j] * y[j] for j in range(ncols)) for i in range(ncols))


def integer_matrix_inverse(m: Sequence[Sequence[int]]) -> Optional[IntMat]:
    """Inverse of a unimodular integer matrix, or None if not unimodular."""
    rows = _as_int_rows(m)
    n = len(rows)
    if n == 0:
        return ()
    if any(len(r) != n for r in rows):
        return None
    dm = det(mat(rows))
    if dm not in (1, -1):
        return None
    inv = []
    for j in range(n):
        e = tuple(Fraction(1 if i == j else 0) for i in range(n))
        col = solve(mat(rows), e)
        inv.append(col)
    # columns solved: inv currently holds columns of M^{-1}
    out = tuple(tuple(int(inv[j][i]) for j in range(n)) for i in range(n))
    return out
