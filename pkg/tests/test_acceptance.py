"""Acceptance criteria 1-10, one test each.

Every test prints a single ``ACCEPTANCE <k> PASS|FAIL`` line (also when run
as a script: ``python tests/test_acceptance.py``).
"""

import random
import sys
import time
from fractions import Fraction

import pytest

sys.path.insert(0, __file__.rsplit("/", 1)[0])

from randomobjects import joint_ring, random_object, renamed_copy, seeds_for  # noqa: E402

from oddmf.cover import (  # noqa: E402
    CoverSpec,
    apply_fm_forward,
    check_counit,
    check_generators,
    check_involution,
    check_unit,
    regular_object,
)
from oddmf.homalg import (  # noqa: E402
    apply_d,
    cohomology_dims,
    ext_product,
    find_contraction,
    find_iso,
    hom_basis,
    hom_complex,
)
from oddmf.mf import (  # noqa: E402
    cone,
    direct_sum,
    identity,
    koszul_factorization,
    loop_factorization,
    map_ring,
    mat_add,
    mat_mul,
    standard_contraction,
    tensor,
    trivial_mf,
    validate_mf,
)
from oddmf.ring import Ring, RingMap  # noqa: E402
from oddmf.scenarios import catalogue, load_builtin, loop_search  # noqa: E402

WINDOW, BOUND, BIG = (-6, 6), 10, 14
ORACLE_LOOPS = 4  # ±(p+q), ±(p-q)


def Qx():
    return Ring([("x", 1)])


def loops(R):
    return loop_factorization(R("x")), loop_factorization(R("-x"))


def point_spec():
    return CoverSpec(Ring([]), f=1, w=0)


def line_spec():
    return CoverSpec(Ring([("a", 0)]), f="a", w=0)


def trusted_dims(t):
    return {n: d for n, d in t.dims.items() if t.trusted[n]}


# 1 ---------------------------------------------------------------------------


def criterion_1(bound=BOUND):
    R = Qx()
    Lp, Lm = loops(R)
    end = cohomology_dims(hom_complex(Lp, Lp, WINDOW, bound))
    cross = cohomology_dims(hom_complex(Lp, Lm, WINDOW, bound))
    te, tc = trusted_dims(end), trusted_dims(cross)
    ok = end.trusted[0] and te == {n: int(n == 0) for n in te} and all(d == 0 for d in tc.values()) and len(tc) >= 12
    return ok, f"End(L+) trusted {dict((n, d) for n, d in te.items() if d)}; Hom(L+,L-) zero on {len(tc)} trusted degrees", (end, cross)


# 2 ---------------------------------------------------------------------------


def criterion_2():
    R = Qx()
    Lp, _ = loops(R)
    C = hom_complex(Lp, Lp, (-1, 10), 12)
    bad = []
    for n in range(-1, 10):
        if n < 0:
            if C.basis[n]:
                bad.append(n)
            continue
        want_basis = [(0, 0, (n,))]
        want_col = [{0: Fraction(2)}] if n % 2 else [{}]
        direct = apply_d(Lp, Lp, (0, 0, (n,)), n)
        want_direct = {(0, 0, (n + 1,)): Fraction(2)} if n % 2 else {}
        if C.basis[n] != want_basis or C.basis[n + 1] != [(0, 0, (n + 1,))] or C.matrix[n] != want_col or direct != want_direct:
            bad.append(n)
    return not bad, "x^n -> 0 (n even), 2x^(n+1) (n odd) for n <= 9" + (f"; mismatches at {bad}" if bad else ""), None


# 3 ---------------------------------------------------------------------------


def criterion_3(count=20, seed=2024):
    cases = [
        (Ring([("x", 1)]), "x^2"),
        (CoverSpec(Ring([("a", 0)]), f="a").A, "a*q^2"),
        (Ring([("x", "1/2"), ("y", 1)], coh_denominator=2), "y^2 - x^4"),
    ]
    triv_ok = True
    for R, w in cases:
        w = R(w)
        E = trivial_mf(w)
        h = standard_contraction(w)
        expected_h = ((R.zero(), R.zero()), (R.one(), R.zero()))
        one = [[R.one() if i == j else R.zero() for j in range(2)] for i in range(2)]
        triv_ok &= h.matrix == expected_h and mat_add(mat_mul(E.diff, h.matrix, R), mat_mul(h.matrix, E.diff, R)) == one
        triv_ok &= validate_mf(E) == []
    rng = random.Random(seed)
    pools = _seed_pools()
    contracted = 0
    for _ in range(count):
        R, seeds = rng.choice(pools)
        E = random_object(rng, seeds, max_rank=4, steps=2)
        cert = find_contraction(cone(identity(E)), BOUND)
        contracted += bool(cert) and cert.verify()
    ok = triv_ok and contracted == count
    return ok, f"trivial_mf h verified for 3 potentials: {triv_ok}; cone(id) contracted {contracted}/{count}", None


def _seed_pools():
    R = Qx()
    kp = Ring([("p", 1), ("q", 1)], signs={("p", "q"): -1})
    pools = [
        (R, [*loops(R), koszul_factorization(R("x"), R("x"))]),
        (kp, [loop_factorization(kp("p + q")), loop_factorization(kp("p - q")), trivial_mf(kp("p^2 + q^2"))]),
    ]
    for name in ("a2-kernel", "z2z2-quadric"):
        sf = load_builtin(name)
        for E in sf.objects.values():
            pools.append((E.ring, seeds_for(E.ring, E.curvature, sf.objects.values())))
            break
    return pools


# 4 ---------------------------------------------------------------------------


def criterion_4():
    R = Qx()
    K = koszul_factorization(R("x"), R("x"))
    S = direct_sum(*loops(R))
    cert = find_iso(K, S, BOUND)
    ok = bool(cert) and cert.kind == "strict" and cert.verify()
    return ok, f"find_iso(koszul(x,x), L+ (+) L-): {cert.kind if cert else 'not found'} certificate", None


# 5 ---------------------------------------------------------------------------


def criterion_5(bound=BOUND):
    out = {}
    for label, spec in (("point", point_spec()), ("line", line_spec())):
        unit = check_unit(spec, WINDOW, bound)
        counit = check_counit(spec, bound, WINDOW)
        out[label] = (unit.ok, counit.ok and counit.details["kernel_contraction"] is not None)
    gen = check_generators(point_spec(), bound)
    ok = all(a and b for a, b in out.values()) and gen.ok
    detail = "; ".join(f"{k}: unit {a}, counit {b}" for k, (a, b) in out.items()) + f"; Phi(B) ~ loop(+q) (+) loop(-q): {gen.ok}"
    return ok, detail, None


# 6 ---------------------------------------------------------------------------


def criterion_6():
    res = {}
    for label, spec in (("point", point_spec()), ("line", line_spec())):
        rep = check_involution(spec, [regular_object(spec)], BOUND)
        res[label] = rep.ok
    return all(res.values()), ", ".join(f"{k}: {v}" for k, v in res.items()), None


# 7 ---------------------------------------------------------------------------


def criterion_7():
    kp = Ring([("p", 1), ("q", 1)], signs={("p", "q"): -1})
    found = loop_search(kp, [kp("p"), kp("q")], kp("p^2 + q^2"), 3)
    objs = [loop_factorization(f) for f in found]
    orth = True
    for i, E in enumerate(objs):
        for j, F in enumerate(objs):
            t = trusted_dims(cohomology_dims(hom_complex(E, F, WINDOW, BOUND)))
            want = {n: int(i == j and n == 0) for n in t}
            orth &= t == want
    ok = len(found) == ORACLE_LOOPS and orth
    return ok, f"{len(found)} loops found ({', '.join(map(str, found))}); pairwise orthogonal exceptional: {orth}", None


# 8 ---------------------------------------------------------------------------

ALGEBRAS = {"a2-kernel": 3, "a3-kernel": 4}


def ext_algebra_check(E, nilpotency, window, bound):
    degrees = list(range(nilpotency + 1))
    C = hom_complex(E, E, window, bound)
    alg = ext_product(C, degrees)
    dims_ok = all(alg.dims[k] == 1 for k in range(nilpotency)) and alg.dims[nilpotency] == 0
    trusted_ok = all(C.trusted(k) for k in degrees)
    powers = []
    if dims_ok:
        for k in range(1, nilpotency):
            prod = alg.product((1, 0), (k, 0))
            powers.append(bool(prod))
    table_ok = dims_ok and powers == [True] * (nilpotency - 2) + [False]
    return dims_ok and table_ok, trusted_ok, cohomology_dims(C)


def criterion_8(bound=BOUND):
    rows, ok, tables = [], True, {}
    for name, n in ALGEBRAS.items():
        sf = load_builtin(name)
        pb, win = sf.bounds()
        for obj in ("G", "PhiG"):
            good, trusted, table = ext_algebra_check(sf.objects[obj], n, win, bound)
            tables[(name, obj)] = table
            ok &= good
            rows.append(f"{name}/{obj}: Q[t]/t^{n} {'yes' if good else 'no'}{'' if trusted else ' (untrusted degrees)'}")
    return ok, "; ".join(rows), tables


# 9 ---------------------------------------------------------------------------


def _cover_tables(bound):
    out = {}
    for label, spec in (("point", point_spec()), ("line", line_spec())):
        P = apply_fm_forward(spec, regular_object(spec))
        out[label] = cohomology_dims(hom_complex(P, P, WINDOW, bound))
    return out


def criterion_9():
    changed = []

    def compare(tag, a, b, every_degree=False):
        for n in a.dims:
            if (every_degree or (a.trusted[n] and b.trusted.get(n))) and a.dims[n] != b.dims[n]:
                changed.append(f"{tag}@{n}")

    _, _, (e10, c10) = criterion_1(BOUND)
    ok1, _, (e14, c14) = criterion_1(BIG)
    compare("End(L+)", e10, e14)
    compare("Hom(L+,L-)", c10, c14)
    ok5, _, _ = criterion_5(BIG)
    t10, t14 = _cover_tables(BOUND), _cover_tables(BIG)
    for k in t10:
        compare(f"End(Phi(B)) {k}", t10[k], t14[k])
    _, _, a10 = criterion_8(BOUND)
    ok8, _, a14 = criterion_8(BIG)
    # the chart algebras have no provably trusted degree, so compare every degree
    for k in a10:
        compare("/".join(k), a10[k], a14[k], every_degree=True)
    ok = not changed and ok1 and ok5 and ok8
    detail = f"bound {BOUND} -> {BIG}: items 1/5/8 still pass: {ok1 and ok5 and ok8}; changed dimensions: {changed or 'none'} (item 8 compared in every degree)"
    return ok, detail, None


# 10 --------------------------------------------------------------------------


def scenario_rings():
    """(label, ring, curvature, seed objects) for every ring used by a catalogue scenario."""
    out = []
    for name in catalogue():
        sf = load_builtin(name)
        groups = {}
        for E in sf.objects.values():
            groups.setdefault(id(E.ring), (E.ring, E.curvature, []))[2].append(E)
        for R, w, objs in groups.values():
            out.append((f"{name}:{','.join(R.names) or 'pt'}", R, w, seeds_for(R, w, objs)))
    return out


def d_squared_zero(E, F, degrees=(-1, 0, 1), bound=3):
    """D(D(f)) = 0 on every basis element, computed without truncation."""
    memo = {}

    def d(key, n):
        if (key, n) not in memo:
            memo[key, n] = apply_d(E, F, key, n)
        return memo[key, n]

    for n in degrees:
        for key in hom_basis(E, F, n, bound):
            img = d(key, n)
            total = {}
            for k, c in img.items():
                for kk, cc in d(k, n + 1).items():
                    total[kk] = total.get(kk, 0) + c * cc
            if any(total.values()):
                return False
    return True


def criterion_10(pairs=100, seed=7):
    rng = random.Random(seed)
    bad, rings = [], scenario_rings()
    for label, R, w, seeds in rings:
        R2, ren = renamed_copy(R, "_2")
        J = joint_ring(R, R2)
        for _ in range(pairs):
            E = random_object(rng, seeds, max_rank=4, steps=2)
            F = random_object(rng, seeds, max_rank=4, steps=2)
            if not d_squared_zero(E, F):
                bad.append(f"{label}: D^2")
                break
            F2 = map_ring(F, ren)
            T = tensor(E, F2, J)
            wE = RingMap.by_name(R, J)(E.curvature)
            wF = RingMap.by_name(R2, J)(F2.curvature)
            if T.curvature != wE + wF or validate_mf(T):
                bad.append(f"{label}: tensor")
                break
    return not bad, f"{pairs} random pairs on each of {len(rings)} scenario rings" + (f"; failures {bad}" if bad else ""), None


# pytest glue -----------------------------------------------------------------

CRITERIA = {
    1: ("odd Knoerrer point: two orthogonal exceptional loops", criterion_1),
    2: ("Hom differential on End(loop(+x)) entrywise, n <= 9", criterion_2),
    3: ("contraction certificates: trivial_mf and 20 random cones of identity", criterion_3),
    4: ("Clifford splitting certificate", criterion_4),
    5: ("cover unit/counit and generator recovery (point, line)", criterion_5),
    6: ("involution compatibility (point, line)", criterion_6),
    7: ("anticommuting iterated cover: four orthogonal exceptional loops", criterion_7),
    8: ("kernel Ext algebras Q[x]/x^3 and Q[zeta]/zeta^4", criterion_8),
    9: ("truncation stability at poly_bound 14", criterion_9),
    10: ("D^2 = 0 and tensor curvature additivity on random pairs", criterion_10),
}


def evaluate(k):
    title, fn = CRITERIA[k]
    t0 = time.perf_counter()
    ok, detail, _ = fn()
    dt = time.perf_counter() - t0
    ok = ok and dt < 60
    line = f"ACCEPTANCE {k:>2} {'PASS' if ok else 'FAIL'}  {title}  [{detail}] ({dt:.1f}s)"
    return ok, line


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_acceptance(k, capsys):
    ok, line = evaluate(k)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(k) for k in sorted(CRITERIA)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
