import random
from fractions import Fraction

import pytest

from oddmf.homalg import (
    ContractionCertificate,
    apply_d,
    check_exact_sequence,
    class_coordinates,
    cohomology_dims,
    ext_product,
    find_contraction,
    find_weights,
    hom_basis,
    hom_complex,
    is_quasi_iso,
    morphism_from_vector,
    vector_from_morphism,
)
from oddmf.linalg import combine
from oddmf.mf import (
    MatrixFactorization,
    MfError,
    MfMorphism,
    base_change,
    direct_sum,
    identity,
    koszul_factorization,
    loop_factorization,
    trivial_mf,
    zero_morphism,
)
from oddmf.ring import Ring


def loop(R, text):
    return loop_factorization(R(text), R.degree(0))


@pytest.mark.parametrize("n", range(-3, 10))
def test_end_differential_of_loop(Qx, n):
    # End(loop(+x)): x^n -> 0 for n even, 2 x^(n+1) for n odd
    E = loop(Qx, "x")
    if n < 0:
        assert hom_basis(E, E, n, 10) == []
        return
    got = apply_d(E, E, (0, 0, (n,)), n)
    want = {(0, 0, (n + 1,)): Fraction(2)} if n % 2 else {}
    assert got == want


@pytest.mark.parametrize("n", range(0, 10))
def test_cross_differential_of_loops(Qx, n):
    E, F = loop(Qx, "x"), loop(Qx, "-x")
    got = apply_d(E, F, (0, 0, (n,)), n)
    want = {} if n % 2 else {(0, 0, (n + 1,)): Fraction(-2)}
    assert got == want


def test_truncated_matrix_matches_apply_d(Qx):
    E = loop(Qx, "x")
    C = hom_complex(E, E, (-2, 6), 10)
    for n in range(0, 6):
        col = C.matrix[n][0]
        assert col == ({0: Fraction(2)} if n % 2 else {})


def test_hom_differential_matches_morphism_differential():
    R = Ring([("x", 1), ("s", -1)])
    E = koszul_factorization(R("s"), R("x^3"))
    F = koszul_factorization(R("s*x^2"), R("x"))
    for n in range(-2, 4):
        for key in hom_basis(E, F, n, 5):
            f = morphism_from_vector(E, F, n, {key: Fraction(1)})
            assert vector_from_morphism(f.differential()) == apply_d(E, F, key, n)


@pytest.mark.parametrize("pair", ["end", "cross", "trivial", "zero"])
def test_cohomology_examples(Qx, pair):
    Lp, Lm = loop(Qx, "x"), loop(Qx, "-x")
    if pair == "end":
        C = hom_complex(Lp, Lp)
        want = {0: 1}
    elif pair == "cross":
        C = hom_complex(Lp, Lm)
        want = {}
    elif pair == "trivial":
        T = trivial_mf(Qx("x^2"))
        C = hom_complex(T, T)
        want = {}
    else:
        Z = MatrixFactorization(Qx, [], [], Qx("x^2"))
        C = hom_complex(Z, Z)
        want = {}
    t = cohomology_dims(C)
    for n, d in t.dims.items():
        if t.trusted[n]:
            assert d == want.get(n, 0), (n, d)
    assert t.trusted[0]


def test_d_squared_zero(Qx):
    K = koszul_factorization(Qx("x"), Qx("x"))
    L = loop(Qx, "x")
    for E, F in [(K, L), (L, K), (K, K)]:
        C = hom_complex(E, F, (-4, 4), 8)
        for n in range(-4, 4):
            for col in C.matrix[n]:
                assert combine(C.matrix[n + 1], col) == {}


def test_weights_exist_for_loops(Qx):
    assert find_weights([loop(Qx, "x")]) is not None


def test_trusted_window_is_inside(Qx):
    L = loop(Qx, "x")
    t = cohomology_dims(hom_complex(L, L, (-3, 3), 10))
    assert not t.trusted[3]
    assert all(t.trusted[n] for n in range(-3, 3))


def test_stability_under_bound(Qx):
    K = koszul_factorization(Qx("x"), Qx("x"))
    a = cohomology_dims(hom_complex(K, K, (-4, 4), 8))
    b = cohomology_dims(hom_complex(K, K, (-4, 4), 12))
    for n in a.dims:
        if a.trusted[n] and b.trusted[n]:
            assert a.dims[n] == b.dims[n]


def test_contraction_examples(Qx):
    w = Qx("x^2")
    T = trivial_mf(w)
    cert = find_contraction(T, 10)
    assert isinstance(cert, ContractionCertificate) and cert.verify()
    assert cert.h.matrix == ((Qx.zero(), Qx.zero()), (Qx.one(), Qx.zero()))
    nf = find_contraction(loop(Qx, "x"), 10)
    assert not nf and nf.poly_bound == 10


def test_is_quasi_iso(Qx):
    L, M = loop(Qx, "x"), loop(Qx, "-x")
    assert is_quasi_iso(identity(L), 4)
    assert not is_quasi_iso(zero_morphism(L, M), 6)
    K = koszul_factorization(Qx("x"), Qx("x"))
    S = base_change(K, [["1", "1"], ["1", "-1"]])
    split = MfMorphism(K, S, [["1", "1"], ["1", "-1"]], Qx.degree(0))
    assert is_quasi_iso(split, 4)
    with pytest.raises(MfError):
        is_quasi_iso(MfMorphism(K, K, [["1", "0"], ["0", "0"]], Qx.degree(0)))


def test_exact_sequence_identity(Qx):
    g = [Qx.degree(0), Qx.degree(1)]
    rep = check_exact_sequence(Qx, [g, g], [[["1", "0"], ["0", "1"]]], (-3, 3), 6)
    assert rep.ok


def test_exact_sequence_failure_is_localized(Qx):
    # 0 -> R --x--> R(1) --0--> R(1): the constants of the middle term are not boundaries
    mods = [[Qx.degree(0)], [Qx.degree(1)], [Qx.degree(1)]]
    rep = check_exact_sequence(Qx, mods, [[["x"]], [["0"]]], (-3, 3), 6)
    assert not rep.ok
    assert rep.failures == [{"position": 1, "degree": "-1", "aux": [], "kind": "cycle not a boundary", "count": 1}]


def test_exact_sequence_rejects_nonzero_composite(Qx):
    mods = [[Qx.degree(0)], [Qx.degree(1)], [Qx.degree(2)]]
    with pytest.raises(MfError):
        check_exact_sequence(Qx, mods, [[["x"]], [["x"]]], (-3, 3), 6)


def test_ext_product_unit(Qx):
    L = loop(Qx, "x")
    C = hom_complex(L, L, (-2, 2), 8)
    alg = ext_product(C, [0])
    assert alg.dims[0] == 1
    assert alg.product((0, 0), (0, 0)) == {0: Fraction(1)}


def test_identity_is_a_two_sided_unit(Qx):
    K = koszul_factorization(Qx("x"), Qx("x"))
    C = hom_complex(K, K, (-2, 2), 8)
    alg = ext_product(C, [0])
    assert alg.dims[0] == 2
    one = class_coordinates(C, 0, identity(K))
    for a in range(2):
        ea = {a: Fraction(1)}
        left = {}
        right = {}
        for u, cu in one.items():
            for k, v in alg.product((0, u), (0, a)).items():
                left[k] = left.get(k, 0) + cu * v
            for k, v in alg.product((0, a), (0, u)).items():
                right[k] = right.get(k, 0) + cu * v
        strip = lambda d: {k: v for k, v in d.items() if v}
        assert strip(left) == ea == strip(right)


def test_class_coordinates_rejects_non_cocycle(Qx):
    K = koszul_factorization(Qx("x"), Qx("x"))
    C = hom_complex(K, K, (-2, 2), 8)
    with pytest.raises(MfError):
        class_coordinates(C, 0, MfMorphism(K, K, [["1", "0"], ["0", "0"]], Qx.degree(0)))


def test_random_sums_have_additive_ext(Qx):
    rng = random.Random(3)
    objs = [loop(Qx, "x"), loop(Qx, "-x")]
    for _ in range(3):
        parts = [rng.choice(objs) for _ in range(rng.randint(1, 3))]
        S = direct_sum(*parts)
        tot = cohomology_dims(hom_complex(S, S, (-3, 3), 8)).dims[0]
        plus = parts.count(objs[0])
        minus = len(parts) - plus
        assert tot == plus * plus + minus * minus
