"""Graded matrix factorizations over sign-commutative rings.

Conventions.  A generator is recorded by its *twist* ``t`` (a summand
``O[t]``).  The entry ``d[i][j]`` maps generator ``j`` to generator ``i``
and has degree ``gens[i] + chi - gens[j]``.  Matrices act on the left of
coefficient columns (right modules), so products are ordinary matrix
products with entries multiplied in ring order.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence, Union

from oddmf.ring import ANY_DEGREE, DegreeVector, Ring, RingElem, RingError, RingMap

Matrix = List[List[RingElem]]


class MfError(ValueError):
    pass


# plain matrix helpers ----------------------------------------------------


def zero_matrix(ring: Ring, rows: int, cols: int) -> Matrix:
    z = ring.zero()
    return [[z] * cols for _ in range(rows)]


def identity_matrix(ring: Ring, n: int) -> Matrix:
    m = zero_matrix(ring, n, n)
    for i in range(n):
        m[i][i] = ring.one()
    return m


def mat_mul(a: Matrix, b: Matrix, ring: Ring) -> Matrix:
    rows, inner = len(a), len(b)
    cols = len(b[0]) if b else 0
    out = zero_matrix(ring, rows, cols)
    for i in range(rows):
        ai = a[i]
        for k in range(inner):
            if not ai[k]:
                continue
            bk = b[k]
            for j in range(cols):
                if bk[j]:
                    out[i][j] = out[i][j] + ai[k] * bk[j]
    return out


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(a: Matrix, c) -> Matrix:
    return [[x.scale(c) if isinstance(c, (int, Fraction)) else c * x for x in row] for row in a]


def block_matrix(blocks: Sequence[Sequence[Matrix]], ring: Ring, row_sizes, col_sizes) -> Matrix:
    out = zero_matrix(ring, sum(row_sizes), sum(col_sizes))
    r0 = 0
    for bi, rs in enumerate(row_sizes):
        c0 = 0
        for bj, cs in enumerate(col_sizes):
            blk = blocks[bi][bj]
            if blk is not None:
                for i in range(rs):
                    for j in range(cs):
                        out[r0 + i][c0 + j] = blk[i][j]
            c0 += cs
        r0 += rs
    return out


def _freeze(m: Matrix):
    return tuple(tuple(r) for r in m)


def _coerce_matrix(ring: Ring, m) -> Matrix:
    return [[ring(x) for x in row] for row in m]


# objects -------------------------------------------------------------------


class MatrixFactorization:
    """A free graded module with a curved differential.

    ``gens`` are generator twists, ``diff`` a square matrix of ring elements
    (strings are parsed), ``curvature`` the element ``w`` with ``d^2 = w``.
    Construction validates unless ``check=False``.
    """

    def __init__(self, ring: Ring, gens: Sequence[DegreeVector], diff, curvature, name: str = "", check: bool = True):
        self.ring = ring
        self.gens = tuple(gens)
        self.diff = _freeze(_coerce_matrix(ring, diff))
        self.curvature = ring(curvature)
        self.name = name
        if len(self.diff) != len(self.gens) or any(len(r) != len(self.gens) for r in self.diff):
            raise MfError("differential must be square of size rank")
        if check:
            problems = validate_mf(self)
            if problems:
                raise MfError(f"invalid matrix factorization {name or ''}: {problems[0]}")

    @property
    def rank(self) -> int:
        return len(self.gens)

    def matrix(self) -> Matrix:
        return [list(r) for r in self.diff]

    def entry_degree(self, i: int, j: int) -> DegreeVector:
        return self.gens[i] + self.ring.chi - self.gens[j]

    def __eq__(self, other):
        return (
            isinstance(other, MatrixFactorization)
            and self.ring is other.ring
            and self.gens == other.gens
            and self.diff == other.diff
            and self.curvature == other.curvature
        )

    def __hash__(self):
        return hash((self.gens, self.diff))

    def __repr__(self):
        twists = [str(self.ring.coh_value(g)) for g in self.gens]
        return f"MatrixFactorization({self.name or '?'}, rank {self.rank}, twists {twists}, w = {self.curvature})"

    def pretty(self) -> str:
        rows = [" [" + ", ".join(str(x) for x in r) + "]" for r in self.diff]
        return repr(self) + "\n" + "\n".join(rows)


def validate_mf(E: MatrixFactorization) -> List[str]:
    """Exact check of the object invariants. Returns a list of violations (empty = ok)."""
    ring = E.ring
    out = []
    two = ring.chi.scaled(2)
    if not E.curvature.is_homogeneous_of(two):
        out.append(f"curvature {E.curvature} is not homogeneous of degree 2 with aux 0")
    for i in range(E.rank):
        for j in range(E.rank):
            x = E.diff[i][j]
            if x and not x.is_homogeneous_of(E.entry_degree(i, j)):
                out.append(f"entry d[{i}][{j}] = {x} has degree {x.degree()}, expected {E.entry_degree(i, j)}")
    sq = mat_mul(E.diff, E.diff, ring)
    for i in range(E.rank):
        for j in range(E.rank):
            want = E.curvature if i == j else ring.zero()
            if sq[i][j] != want:
                out.append(f"d^2 != w*id at entry [{i}][{j}]: got {sq[i][j]}, expected {want}")
    return out


# morphisms ----------------------------------------------------------------


class MfMorphism:
    """A homogeneous map of underlying graded modules, ``source -> target``.

    Entry ``[i][j]`` has degree ``target.gens[i] + degree - source.gens[j]``.
    """

    def __init__(self, source: MatrixFactorization, target: MatrixFactorization, matrix, degree: DegreeVector = None, check: bool = True):
        if source.ring is not target.ring:
            raise MfError("morphism between objects over different rings")
        self.source, self.target = source, target
        self.ring = source.ring
        self.degree = degree if degree is not None else self.ring.zero_degree()
        self.matrix = _freeze(_coerce_matrix(self.ring, matrix))
        if len(self.matrix) != target.rank or any(len(r) != source.rank for r in self.matrix):
            raise MfError("morphism matrix has the wrong shape")
        if check:
            problems = self.violations()
            if problems:
                raise MfError(problems[0])

    def entry_degree(self, i: int, j: int) -> DegreeVector:
        return self.target.gens[i] + self.degree - self.source.gens[j]

    def violations(self) -> List[str]:
        out = []
        if not self.degree.aux_zero:
            out.append("morphisms must have aux degree 0")
        for i, row in enumerate(self.matrix):
            for j, x in enumerate(row):
                if x and not x.is_homogeneous_of(self.entry_degree(i, j)):
                    out.append(f"morphism entry [{i}][{j}] = {x} is not of degree {self.entry_degree(i, j)}")
        return out

    @property
    def coh(self) -> Fraction:
        return self.ring.coh_value(self.degree)

    def is_zero(self) -> bool:
        return not any(x for r in self.matrix for x in r)

    def __eq__(self, other):
        return (
            isinstance(other, MfMorphism)
            and self.source == other.source
            and self.target == other.target
            and self.matrix == other.matrix
            and (self.degree == other.degree or self.is_zero())
        )

    def __hash__(self):
        return hash(self.matrix)

    def __add__(self, other: "MfMorphism") -> "MfMorphism":
        if other.degree != self.degree and not other.is_zero() and not self.is_zero():
            raise MfError("adding morphisms of different degrees")
        deg = self.degree if not self.is_zero() else other.degree
        return MfMorphism(self.source, self.target, mat_add(self.matrix, other.matrix), deg, check=False)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "MfMorphism":
        return MfMorphism(self.source, self.target, mat_scale(self.matrix, Fraction(c)), self.degree, check=False)

    def __matmul__(self, other: "MfMorphism") -> "MfMorphism":
        """Composition ``self o other``."""
        if other.target.gens != self.source.gens:
            raise MfError("morphisms are not composable")
        return MfMorphism(other.source, self.target, mat_mul(self.matrix, other.matrix, self.ring), self.degree + other.degree, check=False)

    def differential(self) -> "MfMorphism":
        """Hom differential ``d_F f - (-1)^{|f|} f d_E``."""
        sign = -1 if self.ring.parity(self.degree) else 1
        left = mat_mul(self.target.diff, self.matrix, self.ring)
        right = mat_mul(self.matrix, self.source.diff, self.ring)
        return MfMorphism(self.source, self.target, mat_add(left, mat_scale(right, -sign)), self.degree + self.ring.chi, check=False)

    def is_closed(self) -> bool:
        return self.differential().is_zero()

    def __repr__(self):
        return f"MfMorphism(degree {self.coh}, {[[str(x) for x in r] for r in self.matrix]})"


def identity(E: MatrixFactorization) -> MfMorphism:
    return MfMorphism(E, E, identity_matrix(E.ring, E.rank), check=False)


def zero_morphism(E: MatrixFactorization, F: MatrixFactorization, degree: DegreeVector = None) -> MfMorphism:
    return MfMorphism(E, F, zero_matrix(E.ring, F.rank, E.rank), degree, check=False)


# constructors --------------------------------------------------------------


def _twist(ring: Ring, t) -> DegreeVector:
    if t is None:
        return ring.zero_degree()
    if isinstance(t, DegreeVector):
        return t
    return ring.degree(t)


def loop_factorization(f: Union[RingElem, str], gen_degree=None, ring: Ring = None, name: str = "") -> MatrixFactorization:
    """Rank one object with ``d = [f]`` and curvature ``f^2``."""
    if isinstance(f, str):
        if ring is None:
            raise MfError("a ring is needed to parse the loop entry")
        f = ring(f)
    ring = f.ring
    if not f.is_homogeneous_of(ring.chi):
        raise MfError(f"loop entry {f} must be homogeneous of degree 1 with aux 0")
    return MatrixFactorization(ring, [_twist(ring, gen_degree)], [[f]], f * f, name=name)


def koszul_factorization(f: RingElem, g: RingElem, twist=None, f_degree: Optional[DegreeVector] = None, name: str = "") -> MatrixFactorization:
    """Rank two object ``O[t] <-> O[t+1-|f|]`` with entries ``f`` (up) and ``g`` (down).

    ``d = [[0, f], [g, 0]]`` and the curvature is ``f g`` (which must be
    central, i.e. equal to ``g f``).  ``f_degree`` is only needed when
    ``f`` is zero.
    """
    ring = f.ring
    t = _twist(ring, twist)
    deg = f.degree()
    if deg is ANY_DEGREE:
        gd = g.degree()
        if f_degree is None and gd not in (ANY_DEGREE,) and isinstance(gd, DegreeVector):
            f_degree = ring.chi.scaled(2) - gd
        if f_degree is None:
            raise MfError("cannot infer generator twists for f = g = 0; pass f_degree")
        deg = f_degree
    elif not isinstance(deg, DegreeVector):
        raise MfError(f"{f} is not homogeneous")
    w = f * g
    if w != g * f:
        raise MfError("f*g != g*f; the curvature would not be central")
    gens = [t, t + ring.chi - deg]
    return MatrixFactorization(ring, gens, [[ring.zero(), f], [g, ring.zero()]], w, name=name)


def trivial_mf(w: RingElem, name: str = "") -> MatrixFactorization:
    """The contractible object ``O[-1] <-> O`` with entries 1 and ``w``."""
    ring = w.ring
    return koszul_factorization(ring.one(), w, twist=-ring.chi, name=name or "trivial")


def standard_contraction(w: RingElem) -> MfMorphism:
    """The degree -1 homotopy ``h`` on :func:`trivial_mf` with ``dh + hd = 1``."""
    E = trivial_mf(w)
    ring = w.ring
    h = MfMorphism(E, E, [[ring.zero(), ring.zero()], [ring.one(), ring.zero()]], -ring.chi)
    dh = mat_add(mat_mul(E.diff, h.matrix, ring), mat_mul(h.matrix, E.diff, ring))
    if dh != identity_matrix(ring, 2):
        raise MfError("standard contraction failed to verify")
    return h


def shift(E: MatrixFactorization, k: int = 1) -> MatrixFactorization:
    """``E[k]``: twists raised by ``k chi`` and the differential multiplied by ``(-1)^k``."""
    ring = E.ring
    gens = [g + ring.chi.scaled(k) for g in E.gens]
    d = E.matrix() if k % 2 == 0 else mat_scale(E.diff, -1)
    return MatrixFactorization(ring, gens, d, E.curvature, name=f"{E.name}[{k}]" if E.name else "", check=False)


def direct_sum(*objs: MatrixFactorization, name: str = "") -> MatrixFactorization:
    if not objs:
        raise MfError("direct_sum needs at least one object")
    ring = objs[0].ring
    w = objs[0].curvature
    for E in objs[1:]:
        if E.ring is not ring:
            raise MfError("direct_sum of objects over different rings")
        if E.curvature != w:
            raise MfError("direct_sum of objects with different curvatures")
    sizes = [E.rank for E in objs]
    blocks = [[E.diff if a == b else None for b in range(len(objs))] for a, E in enumerate(objs)]
    gens = [g for E in objs for g in E.gens]
    return MatrixFactorization(ring, gens, block_matrix(blocks, ring, sizes, sizes), w, name=name, check=False)


def cone(phi: MfMorphism, name: str = "") -> MatrixFactorization:
    """Cone of a closed degree 0 map ``E -> F`` as ``E[1] (+) F`` with ``d = [[-d_E, 0], [phi, d_F]]``."""
    E, F = phi.source, phi.target
    if E.curvature != F.curvature:
        raise MfError("cone of a map between objects of different curvature")
    if phi.degree != E.ring.zero_degree() and not phi.is_zero():
        raise MfError("cone needs a degree 0 morphism")
    if not phi.is_closed():
        raise MfError("cone of a morphism that is not closed")
    return totalize([shift(E), F], [MfMorphism(shift(E), F, phi.matrix, E.ring.chi, check=False)], name=name)


def totalize(objects: Sequence[MatrixFactorization], maps: Sequence[MfMorphism], name: str = "") -> MatrixFactorization:
    """Collapse ``E_0 -> E_1 -> ...`` (maps of degree 1) into one object with ``d = sum(d_i + f_i)``."""
    if len(maps) != len(objects) - 1:
        raise MfError("need exactly one map between consecutive objects")
    ring = objects[0].ring
    w = objects[0].curvature
    for E in objects:
        if E.curvature != w:
            raise MfError("totalize needs a common curvature")
    for i, f in enumerate(maps):
        if f.source.gens != objects[i].gens or f.target.gens != objects[i + 1].gens:
            raise MfError(f"map {i} does not connect objects {i} and {i + 1}")
        if f.degree != ring.chi and not f.is_zero():
            raise MfError(f"map {i} must have degree 1")
        a = mat_mul(objects[i + 1].diff, f.matrix, ring)
        b = mat_mul(f.matrix, objects[i].diff, ring)
        if mat_add(a, b) != [list(r) for r in zero_matrix(ring, objects[i + 1].rank, objects[i].rank)]:
            raise MfError(f"map {i} does not anticommute with the differentials")
    for i in range(len(maps) - 1):
        comp = mat_mul(maps[i + 1].matrix, maps[i].matrix, ring)
        if any(x for r in comp for x in r):
            raise MfError(f"maps {i + 1} and {i} do not compose to zero")
    sizes = [E.rank for E in objects]
    n = len(objects)
    blocks = [[None] * n for _ in range(n)]
    for a, E in enumerate(objects):
        blocks[a][a] = E.diff
    for i, f in enumerate(maps):
        blocks[i + 1][i] = f.matrix
    gens = [g for E in objects for g in E.gens]
    return MatrixFactorization(ring, gens, block_matrix(blocks, ring, sizes, sizes), w, name=name)


def map_ring(E: MatrixFactorization, phi: RingMap, name: str = "") -> MatrixFactorization:
    """Apply a graded ring map entrywise (pullback along the dual morphism of spaces)."""
    if E.ring is not phi.source:
        raise MfError("ring map source does not match the object")
    tgt = phi.target
    gens = [tgt.degree(E.ring.coh_value(g), g.aux) for g in E.gens]
    d = [[phi(x) for x in row] for row in E.diff]
    return MatrixFactorization(tgt, gens, d, phi(E.curvature), name=name or E.name)


def map_morphism(f: MfMorphism, phi: RingMap, source: MatrixFactorization, target: MatrixFactorization) -> MfMorphism:
    deg = phi.target.degree(f.ring.coh_value(f.degree), f.degree.aux)
    return MfMorphism(source, target, [[phi(x) for x in row] for row in f.matrix], deg)


def _entry_parity(ring: Ring, x: RingElem) -> int:
    d = x.degree()
    if not isinstance(d, DegreeVector):
        raise MfError(f"entry {x} is inhomogeneous")
    return ring.parity(d)


def tensor(E: MatrixFactorization, F: MatrixFactorization, joint: Ring, name: str = "") -> MatrixFactorization:
    """Tensor product over the ground field inside a joint ring.

    Generators are pairs ``(e_j, f_l)`` (E-index major).  The differential is

        (-1)^{|a| |f_l|} a  (x)  1   +   (-1)^{|e_j|} 1 (x) b

    for entries ``a`` of ``d_E`` and ``b`` of ``d_F``.  The first sign is the
    Koszul sign of moving ``a`` past the generator ``f_l``; it is trivial
    whenever the entries of ``d_E`` are even or the twists of ``F`` are.
    The cross-variable commutation signs of ``joint`` must be
    ``(-1)^{parity product}``.
    """
    mE = RingMap.by_name(E.ring, joint)
    mF = RingMap.by_name(F.ring, joint)
    for a in E.ring.variables:
        for b in F.ring.variables:
            if a.name == b.name:
                continue
            want = -1 if E.ring.parity(a.degree) and F.ring.parity(b.degree) else 1
            if joint.eps[joint.index[a.name]][joint.index[b.name]] != want:
                raise MfError(f"joint ring sign between {a.name} and {b.name} is not the Koszul sign")

    def lift(R, g):
        return joint.degree(R.coh_value(g), g.aux)

    eg = [lift(E.ring, g) for g in E.gens]
    fg = [lift(F.ring, g) for g in F.gens]
    n, m = E.rank, F.rank
    d = zero_matrix(joint, n * m, n * m)
    for i in range(n):
        for j in range(n):
            a = E.diff[i][j]
            if not a:
                continue
            pa = _entry_parity(E.ring, a)
            ja = mE(a)
            for l in range(m):
                s = -1 if pa and joint.parity(fg[l]) else 1
                d[i * m + l][j * m + l] = d[i * m + l][j * m + l] + ja.scale(s)
    for j in range(n):
        s = -1 if joint.parity(eg[j]) else 1
        for k in range(m):
            for l in range(m):
                b = F.diff[k][l]
                if b:
                    d[j * m + k][j * m + l] = d[j * m + k][j * m + l] + mF(b).scale(s)
    gens = [eg[j] + fg[l] for j in range(n) for l in range(m)]
    return MatrixFactorization(joint, gens, d, mE(E.curvature) + mF(F.curvature), name=name)


def invert_matrix(U: Matrix, ring: Ring) -> Matrix:
    """Inverse of a constant or unipotent (``1 + nilpotent``) square matrix over the ring."""
    n = len(U)
    const = all(not x or set(x.terms) <= {(0,) * ring.nvars} for r in U for x in r)
    if const:
        A = [[Fraction(x.constant_term()) for x in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(U)]
        for c in range(n):
            p = next((r for r in range(c, n) if A[r][c]), None)
            if p is None:
                raise MfError("base change matrix is not invertible")
            A[c], A[p] = A[p], A[c]
            piv = A[c][c]
            A[c] = [v / piv for v in A[c]]
            for r in range(n):
                if r != c and A[r][c]:
                    k = A[r][c]
                    A[r] = [a - k * b for a, b in zip(A[r], A[c])]
        return [[ring.const(A[i][n + j]) for j in range(n)] for i in range(n)]
    I = identity_matrix(ring, n)
    N = mat_add(U, mat_scale(I, -1))
    inv, power = I, I
    for _ in range(n):
        power = mat_scale(mat_mul(power, N, ring), -1)
        inv = mat_add(inv, power)
    if mat_mul(U, inv, ring) != I or mat_mul(inv, U, ring) != I:
        raise MfError("base change matrix is neither constant nor unipotent; pass its inverse")
    return inv


def base_change(E: MatrixFactorization, U, gens: Optional[Sequence[DegreeVector]] = None, U_inv=None, name: str = "") -> MatrixFactorization:
    """Conjugate the differential: ``d' = U d U^{-1}``.

    ``U`` is a degree 0 iso from ``E`` onto a module with generators
    ``gens`` (default: those of ``E``).
    """
    ring = E.ring
    U = _coerce_matrix(ring, U)
    if U_inv is None:
        U_inv = invert_matrix(U, ring)
    else:
        U_inv = _coerce_matrix(ring, U_inv)
        I = identity_matrix(ring, E.rank)
        if mat_mul(U, U_inv, ring) != I or mat_mul(U_inv, U, ring) != I:
            raise MfError("supplied inverse does not invert U")
    gens = list(gens) if gens is not None else list(E.gens)
    d = mat_mul(mat_mul(U, E.diff, ring), U_inv, ring)
    F = MatrixFactorization(ring, gens, d, E.curvature, name=name)
    MfMorphism(E, F, U)  # degree check of the change of basis
    return F


def find_iso(E: MatrixFactorization, F: MatrixFactorization, poly_bound: int = 10, **kw):
    """See :func:`oddmf.homalg.find_iso`."""
    from oddmf.homalg import find_iso as _find_iso

    return _find_iso(E, F, poly_bound, **kw)


__all__ = [
    "MfError",
    "MatrixFactorization",
    "MfMorphism",
    "validate_mf",
    "loop_factorization",
    "koszul_factorization",
    "trivial_mf",
    "standard_contraction",
    "shift",
    "direct_sum",
    "cone",
    "totalize",
    "tensor",
    "base_change",
    "map_ring",
    "map_morphism",
    "identity",
    "zero_morphism",
    "find_iso",
    "RingError",
]
