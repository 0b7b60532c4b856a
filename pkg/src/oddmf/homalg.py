"""Hom complexes, truncation and certificates.

The Hom complex ``Hom(E, F)`` is infinite dimensional, so it is cut down
to finite pieces.  When possible we pick positive rational weights on the
variables (and on generators) making every differential entry weight
homogeneous.  The *adjusted weight* of a basis element ``(i, j, m)`` in
degree ``n``,

    wt(m) - gF[i] + gE[j] - n c,

is then preserved by the Hom differential, so the complex splits into
finite-dimensional pieces and cohomology may be computed piece by piece.
A piece enters the computation at degree ``n`` only when all of its
monomials at ``n - 1, n, n + 1`` are below the polynomial bound.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from oddmf import linalg
from oddmf.mf import (
    MatrixFactorization,
    MfError,
    MfMorphism,
    cone,
    identity,
    identity_matrix,
    mat_add,
    mat_mul,
)
from oddmf.ring import DegreeVector, Ring, RingElem, degrevlex_key, graded_piece_basis

Key = Tuple[int, int, tuple]


# weights -------------------------------------------------------------------


@dataclass(frozen=True)
class Weights:
    var: Tuple[Fraction, ...]
    gens: Tuple[Tuple[Fraction, ...], ...]  # one tuple per object
    c: Fraction

    def mono(self, exps) -> Fraction:
        return sum((w * e for w, e in zip(self.var, exps)), Fraction(0))


def _weight_equations(ring: Ring, objects: Sequence[MatrixFactorization]):
    nv = ring.nvars
    offsets, pos = [], nv
    for E in objects:
        offsets.append(pos)
        pos += E.rank
    cidx = pos
    rows = []
    for k, E in enumerate(objects):
        o = offsets[k]
        for i in range(E.rank):
            for j in range(E.rank):
                for m in E.diff[i][j].terms:
                    row = {v: Fraction(e) for v, e in enumerate(m) if e}
                    row[o + i] = row.get(o + i, 0) - 1
                    row[o + j] = row.get(o + j, 0) + 1
                    row[cidx] = row.get(cidx, 0) - 1
                    rows.append({a: b for a, b in row.items() if b})
    for v, rhs in enumerate(ring.rewrites):
        if rhs is None:
            continue
        for m in rhs.terms:
            row = {u: Fraction(-e) for u, e in enumerate(m) if e}
            row[v] = row.get(v, 0) + 2
            rows.append({a: b for a, b in row.items() if b})
    return rows, offsets, cidx + 1


def _weights_from_vector(ring, objects, x, offsets) -> Weights:
    nv = ring.nvars
    gens = tuple(tuple(x[o + i] for i in range(E.rank)) for E, o in zip(objects, offsets))
    return Weights(tuple(x[:nv]), gens, x[-1])


def find_weights(objects: Sequence[MatrixFactorization]) -> Optional[Weights]:
    """Positive variable weights making every differential entry weight homogeneous.

    Uncapped variables get weight >= 1, capped ones (with a square rewrite)
    weight >= 0.  Returns None when no such grading exists.
    """
    ring = objects[0].ring
    rows, offsets, ncols = _weight_equations(ring, objects)
    caps = ring.caps()

    def ok(x):
        return all(sum(v * x[k] for k, v in r.items()) == 0 for r in rows) and all(
            x[v] >= (0 if caps[v] else 1) for v in range(ring.nvars)
        )

    # all-ones first: solve for generator weights and c exactly
    ones = [Fraction(1)] * ring.nvars
    sub_rows, rhs = [], []
    for r in rows:
        rhs.append(-sum(v * ones[k] for k, v in r.items() if k < ring.nvars))
        sub_rows.append({k - ring.nvars: v for k, v in r.items() if k >= ring.nvars})
    sol = linalg.solve(sub_rows, rhs, ncols - ring.nvars) if rows else {}
    if sol is not None:
        x = ones + [sol.get(k, Fraction(0)) for k in range(ncols - ring.nvars)]
        if ok(x):
            return _weights_from_vector(ring, objects, x, offsets)
    try:
        import numpy as np
        from scipy.optimize import linprog
    except ImportError:  # pragma: no cover
        return None
    A = np.zeros((len(rows), ncols))
    for r_i, r in enumerate(rows):
        for k, v in r.items():
            A[r_i, k] = float(v)
    cost = np.zeros(ncols)
    cost[: ring.nvars] = 1.0
    bounds = [((0 if caps[v] else 1), None) for v in range(ring.nvars)] + [(None, None)] * (ncols - ring.nvars)
    res = linprog(cost, A_eq=A if rows else None, b_eq=np.zeros(len(rows)) if rows else None, bounds=bounds, method="highs")
    if not res.success:
        return None
    x = [Fraction(float(v)).limit_denominator(10**4) for v in res.x]
    return _weights_from_vector(ring, objects, x, offsets) if ok(x) else None


# the truncated complex ---------------------------------------------------


def _elem(ring: Ring, exps) -> RingElem:
    return RingElem(ring, {tuple(exps): Fraction(1)})


def hom_degree(E: MatrixFactorization, F: MatrixFactorization, i: int, j: int, n: int) -> DegreeVector:
    """Degree of the monomial in component ``(i, j)`` of a degree ``n`` morphism ``E -> F``."""
    return F.gens[i] + E.ring.chi.scaled(n) - E.gens[j]


def hom_basis(E: MatrixFactorization, F: MatrixFactorization, n: int, poly_bound: int) -> List[Key]:
    ring = E.ring
    out = []
    for i in range(F.rank):
        for j in range(E.rank):
            for m in graded_piece_basis(ring, hom_degree(E, F, i, j, n), poly_bound):
                out.append((i, j, m))
    out.sort(key=lambda k: (degrevlex_key(k[2]), k[0], k[1]))
    return out


def apply_d(E: MatrixFactorization, F: MatrixFactorization, key: Key, n: int) -> Dict[Key, Fraction]:
    """Hom differential of the basis element ``key`` (a degree ``n`` morphism), exactly."""
    ring = E.ring
    i, j, m = key
    x = _elem(ring, m)
    out: Dict[Key, Fraction] = {}

    def acc(k, v):
        nv = out.get(k, 0) + v
        if nv:
            out[k] = nv
        else:
            out.pop(k, None)

    for k in range(F.rank):
        a = F.diff[k][i]
        if a:
            for mm, c in (a * x).terms.items():
                acc((k, j, mm), c)
    s = 1 if n % 2 else -1  # -(-1)^n
    for l in range(E.rank):
        b = E.diff[j][l]
        if b:
            for mm, c in (x * b).terms.items():
                acc((i, l, mm), s * c)
    return out


def morphism_from_vector(E, F, n: int, vec: Dict[Key, Fraction]) -> MfMorphism:
    ring = E.ring
    mat = [[ring.zero() for _ in range(E.rank)] for _ in range(F.rank)]
    for (i, j, m), c in vec.items():
        mat[i][j] = mat[i][j] + RingElem(ring, {m: Fraction(c)})
    return MfMorphism(E, F, mat, ring.chi.scaled(n), check=False)


def vector_from_morphism(f: MfMorphism) -> Dict[Key, Fraction]:
    out = {}
    for i, row in enumerate(f.matrix):
        for j, x in enumerate(row):
            for m, c in x.terms.items():
                out[(i, j, m)] = c
    return out


class TruncatedComplex:
    """Degreewise finite model of ``Hom(E, F)`` over a window of integral degrees.

    ``basis[n]`` lists ``(i, j, monomial)`` triples with total exponent at
    most ``poly_bound``; ``matrix[n]`` holds the columns of the differential
    into degree ``n + 1`` (terms leaving the basis are dropped and the
    column is listed in ``truncated[n]``).
    """

    def __init__(self, E: MatrixFactorization, F: MatrixFactorization, window=(-6, 6), poly_bound: int = 10, weights: Optional[Weights] = "auto"):
        if E.ring is not F.ring:
            raise MfError("Hom complex between objects over different rings")
        if E.curvature != F.curvature:
            raise MfError("Hom complex needs equal curvatures")
        self.E, self.F, self.ring = E, F, E.ring
        self.window = (int(window[0]), int(window[1]))
        self.poly_bound = int(poly_bound)
        same = E is F
        if weights == "auto":
            weights = find_weights([E] if same else [E, F])
        self.weights = weights
        if weights is not None:
            self.gE = weights.gens[0]
            self.gF = weights.gens[0] if same else weights.gens[1]
        lo, hi = self.window
        self.degrees = list(range(lo - 1, hi + 2))
        self.basis: Dict[int, List[Key]] = {}
        self.index: Dict[int, Dict[Key, int]] = {}
        self.piece: Dict[int, List[Fraction]] = {}
        for n in self.degrees:
            b = hom_basis(E, F, n, self.poly_bound)
            self.basis[n] = b
            self.index[n] = {k: t for t, k in enumerate(b)}
            self.piece[n] = [self.adjusted_weight(k, n) for k in b]
        self._complete: Dict[Tuple[int, Fraction], bool] = {}
        self._fit_cache: Dict[tuple, bool] = {}
        self.matrix: Dict[int, List[Dict[int, Fraction]]] = {}
        self.truncated: Dict[int, set] = {}
        for n in self.degrees[:-1]:
            cols, lost = [], set()
            idx = self.index[n + 1]
            for t, k in enumerate(self.basis[n]):
                img = apply_d(E, F, k, n)
                col = {}
                for kk, c in img.items():
                    if kk in idx:
                        col[idx[kk]] = c
                    else:
                        lost.add(t)
                cols.append(col)
            self.matrix[n] = cols
            self.truncated[n] = lost

    # pieces -------------------------------------------------------------

    def adjusted_weight(self, key: Key, n: int) -> Optional[Fraction]:
        if self.weights is None:
            return None
        i, j, m = key
        return self.weights.mono(m) - self.gF[i] + self.gE[j] - n * self.weights.c

    def _fits(self, d: DegreeVector, W: Fraction) -> bool:
        """True when every monomial of degree ``d`` and weight ``W`` has exponent <= bound."""
        key = (d, W)
        if key in self._fit_cache:
            return self._fit_cache[key]
        ring, wv, caps = self.ring, self.weights.var, self.ring.caps()
        nv = ring.nvars
        B = self.poly_bound
        found_bad = False

        def rec(v, rem, acc):
            nonlocal found_bad
            if found_bad:
                return
            if v == nv:
                if rem == 0 and sum(acc) > B and ring.mono_degree(tuple(acc)) == d:
                    found_bad = True
                return
            if caps[v]:
                top = 1
            elif wv[v] > 0:
                top = int(rem / wv[v]) if rem >= 0 else -1
            else:
                top = 0
            for e in range(max(top, -1) + 1):
                r = rem - wv[v] * e
                if r < 0:
                    break
                acc.append(e)
                rec(v + 1, r, acc)
                acc.pop()

        if W >= 0:
            rec(0, W, [])
        self._fit_cache[key] = not found_bad
        return not found_bad

    def piece_complete(self, a: Fraction, n: int) -> bool:
        if self.weights is None:
            return False
        key = (n, a)
        if key not in self._complete:
            ok = True
            for i in range(self.F.rank):
                for j in range(self.E.rank):
                    W = a + self.gF[i] - self.gE[j] + n * self.weights.c
                    if not self._fits(hom_degree(self.E, self.F, i, j, n), W):
                        ok = False
                        break
                if not ok:
                    break
            self._complete[key] = ok
        return self._complete[key]

    def usable(self, n: int, t: int, centre: int) -> bool:
        """Whether basis element ``t`` of degree ``n`` enters the computation of ``H^centre``."""
        if self.weights is None:
            return True
        a = self.piece[n][t]
        return all(self.piece_complete(a, k) for k in (centre - 1, centre, centre + 1))

    def component_finite(self, n: int) -> bool:
        """All monomials of every component in degree ``n`` fit under the bound."""
        ring = self.ring
        caps = ring.caps()
        cohs = [ring.coh_value(v.degree) for v, cp in zip(ring.variables, caps) if not cp]
        if any(c <= 0 for c in cohs):
            return False
        capped = [ring.coh_value(v.degree) for v, cp in zip(ring.variables, caps) if cp]
        slack = sum(-c for c in capped if c < 0)
        mn = min(cohs) if cohs else None
        for i in range(self.F.rank):
            for j in range(self.E.rank):
                T = ring.coh_value(hom_degree(self.E, self.F, i, j, n)) + slack
                top = (int(T / mn) if T >= 0 else 0) if mn else 0
                if top + len(capped) > self.poly_bound:
                    return False
        return True

    def trusted(self, n: int) -> bool:
        lo, hi = self.window
        if not (lo <= n and n + 1 <= hi) or self.weights is None:
            return False
        return all(self.component_finite(k) for k in (n - 1, n, n + 1))

    # linear algebra ---------------------------------------------------------

    def _selected(self, n: int, centre: int) -> List[int]:
        return [t for t in range(len(self.basis[n])) if self.usable(n, t, centre)]

    def cocycles(self, n: int) -> Tuple[List[int], List[Dict[int, Fraction]]]:
        cols = self._selected(n, n)
        mat = self.matrix[n]
        rel = linalg.kernel_of_columns([mat[t] for t in cols])
        return cols, [{cols[k]: v for k, v in r.items()} for r in rel]

    def coboundaries(self, n: int) -> List[Dict[int, Fraction]]:
        prev = self._selected(n - 1, n)
        mat = self.matrix[n - 1]
        return [dict(mat[t]) for t in prev if mat[t]]

    def cohomology_basis(self, n: int) -> List[Dict[int, Fraction]]:
        """Cocycles (as index vectors in degree ``n``) whose classes form a basis of ``H^n``."""
        _, Z = self.cocycles(n)
        ech = linalg.Echelon()
        for b in self.coboundaries(n):
            ech.add(b)
        out = []
        for z in Z:
            if ech.add(z):
                out.append(z)
        return out

    def dimension(self, n: int) -> int:
        _, Z = self.cocycles(n)
        return len(Z) - linalg.rank(self.coboundaries(n))

    def element(self, n: int, vec: Dict[int, Fraction]) -> MfMorphism:
        return morphism_from_vector(self.E, self.F, n, {self.basis[n][t]: c for t, c in vec.items()})

    def coordinates(self, n: int, f: MfMorphism) -> Optional[Dict[int, Fraction]]:
        idx = self.index[n]
        out = {}
        for k, c in vector_from_morphism(f).items():
            if k not in idx:
                return None
            out[idx[k]] = c
        return out


def hom_complex(E, F, window=(-6, 6), poly_bound: int = 10, weights="auto") -> TruncatedComplex:
    return TruncatedComplex(E, F, window, poly_bound, weights)


@dataclass
class ExtTable:
    dims: Dict[int, int]
    trusted: Dict[int, bool]
    window: Tuple[int, int]
    poly_bound: int

    def total(self, trusted_only: bool = False) -> int:
        return sum(d for n, d in self.dims.items() if self.trusted[n] or not trusted_only)

    def nonzero(self) -> Dict[int, int]:
        return {n: d for n, d in self.dims.items() if d}

    def to_json(self) -> dict:
        return {
            "window": list(self.window),
            "poly_bound": self.poly_bound,
            "dims": {str(n): d for n, d in sorted(self.dims.items())},
            "trusted": [n for n in sorted(self.dims) if self.trusted[n]],
        }


def cohomology_dims(C: TruncatedComplex) -> ExtTable:
    lo, hi = C.window
    dims, trust = {}, {}
    for n in range(lo, hi + 1):
        dims[n] = C.dimension(n)
        trust[n] = C.trusted(n)
    return ExtTable(dims, trust, C.window, C.poly_bound)


# certificates ---------------------------------------------------------------


@dataclass
class NotFound:
    poly_bound: int
    reason: str = "no solution below the polynomial bound"

    def __bool__(self):
        return False


@dataclass
class ContractionCertificate:
    h: MfMorphism

    def verify(self) -> bool:
        E = self.h.source
        ring = E.ring
        s = mat_add(mat_mul(E.diff, self.h.matrix, ring), mat_mul(self.h.matrix, E.diff, ring))
        return s == identity_matrix(ring, E.rank) and self.h.degree == -ring.chi

    def to_json(self) -> dict:
        return {"h": [[str(x) for x in r] for r in self.h.matrix]}


def _solve_keys(columns: Sequence[Dict], target: Dict) -> Optional[Dict[int, Fraction]]:
    keys = {}
    for col in columns:
        for k in col:
            keys.setdefault(k, len(keys))
    for k in target:
        keys.setdefault(k, len(keys))
    cols = [{keys[k]: v for k, v in col.items()} for col in columns]
    tgt = {keys[k]: v for k, v in target.items()}
    return linalg.solve_columns(cols, tgt)


def find_contraction(E: MatrixFactorization, poly_bound: int = 10) -> "ContractionCertificate | NotFound":
    """Search for ``h`` of degree -1 with ``dh + hd = 1`` among monomials up to the bound."""
    if E.rank == 0:
        return ContractionCertificate(MfMorphism(E, E, [], -E.ring.chi, check=False))
    basis = hom_basis(E, E, -1, poly_bound)
    w = find_weights([E])
    if w is not None:
        g = w.gens[0]
        basis = [k for k in basis if w.mono(k[2]) - g[k[0]] + g[k[1]] + w.c == 0]
    cols = [apply_d(E, E, k, -1) for k in basis]
    zero = (0,) * E.ring.nvars
    target = {(i, i, zero): Fraction(1) for i in range(E.rank)}
    sol = _solve_keys(cols, target)
    if sol is None:
        return NotFound(poly_bound)
    h = morphism_from_vector(E, E, -1, {basis[t]: c for t, c in sol.items()})
    cert = ContractionCertificate(h)
    if not cert.verify():  # pragma: no cover - defensive
        raise MfError("contraction failed exact re-verification")
    return cert


def closed_morphisms(E: MatrixFactorization, F: MatrixFactorization, n: int, poly_bound: int) -> List[MfMorphism]:
    """Basis of closed degree ``n`` morphisms with monomials up to the bound (exact, untruncated)."""
    basis = hom_basis(E, F, n, poly_bound)
    cols = [apply_d(E, F, k, n) for k in basis]
    keys = {}
    for col in cols:
        for k in col:
            keys.setdefault(k, len(keys))
    rel = linalg.kernel_of_columns([{keys[k]: v for k, v in c.items()} for c in cols])
    return [morphism_from_vector(E, F, n, {basis[t]: c for t, c in r.items()}) for r in rel]


@dataclass
class IsoCertificate:
    phi: MfMorphism
    psi: Optional[MfMorphism] = None
    contraction: Optional[ContractionCertificate] = None
    kind: str = "strict"

    def verify(self) -> bool:
        if not self.phi.is_closed():
            return False
        if self.kind == "strict":
            E, F = self.phi.source, self.phi.target
            return (self.psi @ self.phi).matrix == identity(E).matrix and (self.phi @ self.psi).matrix == identity(F).matrix
        return self.contraction is not None and self.contraction.verify()

    def to_json(self) -> dict:
        out = {"kind": self.kind, "phi": [[str(x) for x in r] for r in self.phi.matrix]}
        if self.psi is not None:
            out["psi"] = [[str(x) for x in r] for r in self.psi.matrix]
        return out


def _random_combination(mors: Sequence[MfMorphism], rng: random.Random) -> MfMorphism:
    out = mors[0].scale(0)
    for f in mors:
        out = out + f.scale(rng.randint(-5, 5) or 1)
    return out


def _strict_inverse(phi: MfMorphism, poly_bound: int) -> Optional[MfMorphism]:
    E, F = phi.source, phi.target
    basis = hom_basis(F, E, 0, poly_bound)
    cols = []
    for k in basis:
        psi = morphism_from_vector(F, E, 0, {k: Fraction(1)})
        col = {("L",) + kk: v for kk, v in vector_from_morphism(psi @ phi).items()}
        col.update({("R",) + kk: v for kk, v in vector_from_morphism(phi @ psi).items()})
        cols.append(col)
    zero = (0,) * E.ring.nvars
    target = {("L", i, i, zero): Fraction(1) for i in range(E.rank)}
    target.update({("R", i, i, zero): Fraction(1) for i in range(F.rank)})
    sol = _solve_keys(cols, target)
    if sol is None:
        return None
    return morphism_from_vector(F, E, 0, {basis[t]: c for t, c in sol.items()})


def find_iso(E: MatrixFactorization, F: MatrixFactorization, poly_bound: int = 10, seed: int = 0, tries: int = 4, homotopy: bool = False):
    """Look for an isomorphism ``E -> F``.

    First a closed degree 0 map with a strict two-sided inverse.  With
    ``homotopy=True`` a closed map whose cone contracts is also accepted
    (an isomorphism in the homotopy category, i.e. up to contractible
    summands).  Candidates are seeded random combinations of a basis of
    closed maps.
    """
    if E.ring is not F.ring or E.curvature != F.curvature:
        return NotFound(poly_bound, "different rings or curvatures")
    if E == F:
        return IsoCertificate(identity(E), identity(E))
    rng = random.Random(seed)
    cands = []
    # low exponents first: isomorphisms usually have constant leading parts
    for b in sorted({0, 1, 2, poly_bound}):
        if b > poly_bound:
            continue
        closed = closed_morphisms(E, F, 0, b)
        if closed:
            cands += [_random_combination(closed, rng) for _ in range(tries)]
    if not cands:
        return NotFound(poly_bound, "no closed degree 0 maps")
    if E.rank == F.rank:
        for phi in cands:
            psi = _strict_inverse(phi, poly_bound)
            if psi is not None:
                cert = IsoCertificate(phi, psi)
                if cert.verify():
                    return cert
    if homotopy:
        for phi in cands:
            c = find_contraction(cone(phi), poly_bound)
            if c:
                return IsoCertificate(phi, None, c, kind="homotopy")
    return NotFound(poly_bound)


def is_quasi_iso(phi: MfMorphism, poly_bound: int = 10):
    """Contractibility of the cone; returns its certificate or NotFound."""
    if not phi.is_closed():
        raise MfError("is_quasi_iso needs a closed morphism")
    return find_contraction(cone(phi), poly_bound)


# exact sequences of free modules ---------------------------------------------


@dataclass
class ExactnessReport:
    ok: bool
    failures: List[dict] = field(default_factory=list)
    checked: int = 0
    window: Tuple[int, int] = (0, 0)
    poly_bound: int = 0

    def to_json(self) -> dict:
        return {"ok": self.ok, "checked": self.checked, "failures": self.failures, "window": list(self.window), "poly_bound": self.poly_bound}


def _module_gens(M) -> List[DegreeVector]:
    return list(M.gens) if isinstance(M, MatrixFactorization) else list(M)


def _map_image(ring: Ring, mat, key) -> Dict[tuple, Fraction]:
    j, m = key
    x = _elem(ring, m)
    out = {}
    for i in range(len(mat)):
        a = mat[i][j]
        if a:
            for mm, c in (a * x).terms.items():
                out[(i, mm)] = out.get((i, mm), 0) + c
    return {k: v for k, v in out.items() if v}


def check_exact_sequence(ring: Ring, modules: Sequence, maps: Sequence, window=(-6, 6), poly_bound: int = 10) -> ExactnessReport:
    """Degreewise exactness of ``0 -> M_0 -> M_1 -> ... -> M_k`` of free graded modules.

    ``maps[p]`` is a matrix ``M_p -> M_{p+1}`` of degree 0 (entry ``[i][j]``
    of degree ``t_i - t_j`` for twists ``t``).  At each interior spot and
    internal degree in the window, every cycle of total exponent at most
    ``poly_bound - e`` (``e`` the largest entry exponent of the incoming
    map) must be the image of a chain of exponent at most ``poly_bound``;
    at ``M_0`` the map must be injective.  The last module is not checked.
    """
    gens = [_module_gens(M) for M in modules]
    mats = [[[ring(x) for x in row] for row in mp] for mp in maps]
    lo, hi = window
    report = ExactnessReport(True, window=(lo, hi), poly_bound=poly_bound)
    for p, mp in enumerate(mats):
        for i, row in enumerate(mp):
            for j, x in enumerate(row):
                if x and not x.is_homogeneous_of(gens[p + 1][i] - gens[p][j]):
                    raise MfError(f"map {p} entry [{i}][{j}] has the wrong degree")
    for p in range(len(mats) - 1):
        comp = mat_mul(mats[p + 1], mats[p], ring)
        if any(x for r in comp for x in r):
            raise MfError(f"maps {p + 1} and {p} do not compose to zero")

    def chains(p, bound):
        by_deg: Dict[DegreeVector, List[tuple]] = {}
        for j, t in enumerate(gens[p]):
            for m in ring.monomials_up_to(bound):
                d = ring.mono_degree(m) - t
                c = ring.coh_value(d)
                if c.denominator == 1 and lo <= c <= hi:
                    by_deg.setdefault(d, []).append((j, m))
        return by_deg

    for p in range(len(mats)):
        e_in = max((x.max_exponent() for r in mats[p - 1] for x in r), default=0) if p > 0 else 0
        cyc = chains(p, max(poly_bound - e_in, 0))
        src = chains(p - 1, poly_bound) if p > 0 else {}
        for d in sorted(cyc, key=lambda d: (d.coh, d.aux)):
            keys = cyc[d]
            imgs = [_map_image(ring, mats[p], k) for k in keys]
            allk = {}
            for col in imgs:
                for k in col:
                    allk.setdefault(k, len(allk))
            Z = linalg.kernel_of_columns([{allk[k]: v for k, v in c.items()} for c in imgs])
            report.checked += 1
            if not Z:
                continue
            if p == 0:
                report.ok = False
                report.failures.append({"position": 0, "degree": str(ring.coh_value(d)), "aux": list(d.aux), "kind": "not injective"})
                continue
            bnd = [_map_image(ring, mats[p - 1], k) for k in src.get(d, [])]
            ech = linalg.Echelon()
            kidx = {}
            for col in bnd:
                ech.add({kidx.setdefault(k, len(kidx)): v for k, v in col.items()})
            missing = 0
            for z in Z:
                vec = {}
                for t, c in z.items():
                    j, m = keys[t]
                    vec[(j, m)] = c
                if any(k not in kidx for k in vec) or not ech.contains({kidx[k]: v for k, v in vec.items()}):
                    missing += 1
            if missing:
                report.ok = False
                report.failures.append({"position": p, "degree": str(ring.coh_value(d)), "aux": list(d.aux), "kind": "cycle not a boundary", "count": missing})
    return report


# Ext algebra ------------------------------------------------------------------


@dataclass
class ExtAlgebra:
    """Chosen cohomology bases and the multiplication table on them."""

    basis: Dict[int, List[MfMorphism]]
    table: Dict[Tuple[Tuple[int, int], Tuple[int, int]], Optional[Dict[int, Fraction]]]
    dims: Dict[int, int]

    def product(self, a: Tuple[int, int], b: Tuple[int, int]):
        return self.table.get((a, b))

    def to_json(self) -> dict:
        out = {}
        for (a, b), v in sorted(self.table.items()):
            key = f"e{a[0]}_{a[1]}*e{b[0]}_{b[1]}"
            out[key] = None if v is None else {f"e{a[0] + b[0]}_{k}": str(c) for k, c in sorted(v.items())}
        return {"dims": {str(k): v for k, v in sorted(self.dims.items())}, "table": out}


def class_coordinates(C: TruncatedComplex, n: int, f: MfMorphism, hbasis: Optional[List[Dict[int, Fraction]]] = None) -> Optional[Dict[int, Fraction]]:
    """Coordinates of the class of cocycle ``f`` on the chosen basis of ``H^n``."""
    vec = C.coordinates(n, f)
    if vec is None:
        return None
    if not f.differential().is_zero():
        raise MfError("not a cocycle")
    hb = C.cohomology_basis(n) if hbasis is None else hbasis
    cols = list(hb) + C.coboundaries(n)
    sol = linalg.solve_columns(cols, vec)
    if sol is None:
        return None
    return {k: v for k, v in sol.items() if k < len(hb) and v}


def ext_product(C: TruncatedComplex, degrees: Optional[Sequence[int]] = None) -> ExtAlgebra:
    """Multiplication table of ``Ext(E, E)`` on chosen cocycle representatives.

    Products ``a o b`` are reduced modulo coboundaries by exact solving;
    entries whose product degree falls outside the window are ``None``.
    """
    if C.E is not C.F:
        raise MfError("ext_product needs an End complex")
    lo, hi = C.window
    degrees = list(range(lo, hi + 1)) if degrees is None else list(degrees)
    hb = {n: C.cohomology_basis(n) for n in degrees}
    basis = {n: [C.element(n, v) for v in hb[n]] for n in degrees}
    table = {}
    for p in degrees:
        for q in degrees:
            for a, fa in enumerate(basis[p]):
                for b, fb in enumerate(basis[q]):
                    r = p + q
                    if r not in hb:
                        table[((p, a), (q, b))] = None
                        continue
                    table[((p, a), (q, b))] = class_coordinates(C, r, fa @ fb, hb[r])
    return ExtAlgebra(basis, table, {n: len(hb[n]) for n in degrees})
