import pytest

from oddmf.cover import (
    CoverError,
    CoverSpec,
    apply_fm_back,
    apply_fm_forward,
    build_adjoint_N,
    build_kernel_M,
    build_sides,
    check_counit,
    check_generators,
    check_involution,
    check_unit,
    counit_object,
    fm_forward_morphism,
    left_action,
    multiplication,
    regular_object,
    unit_complex,
)
from oddmf.homalg import closed_morphisms, cohomology_dims, find_iso, hom_complex
from oddmf.mf import (
    MatrixFactorization,
    direct_sum,
    koszul_factorization,
    loop_factorization,
    mat_mul,
    validate_mf,
)
from oddmf.ring import Ring


@pytest.fixture(scope="module")
def point():
    return CoverSpec(Ring([]), f=1, w=0)


@pytest.fixture(scope="module")
def line():
    return CoverSpec(Ring([("a", 0)]), f="a", w=0)


def test_sides_point(point):
    (A, wA), (B, wB) = build_sides(point)
    assert wA == A("q^2") and wB.is_zero()
    assert B("y*y") == B.one()


def test_sides_line(line):
    (A, wA), (B, wB) = build_sides(line)
    assert wA == A("a*q^2")
    assert B("y^3") == B("a*y")


def test_odd_base_rejected():
    with pytest.raises(CoverError):
        CoverSpec(Ring([("x", 1)]), f="1", w="x^2")


def test_odd_base_allowed_with_matching_z2():
    spec = CoverSpec(Ring([("x", 1, [1])], aux_moduli=[2]), f=1, w="x^2", q=("q", 1, (1,)), y=("y", 0, (1,)))
    assert spec.wA == spec.A("x^2 + q^2")


@pytest.mark.parametrize("f, w", [("a + b", "0"), ("a", "a"), ("0", "0")])
def test_degree_illegal_spec_rejected(f, w):
    with pytest.raises(CoverError):
        CoverSpec(Ring([("a", 0), ("b", 2)]), f=f, w=w)


def test_fibre_degrees_must_add_to_one():
    with pytest.raises(CoverError):
        CoverSpec(Ring([]), f=1, q=("q", 1, ()), y=("y", 1, ()))


def test_kernel_M(point, line):
    M = build_kernel_M(point)
    A = point.A
    assert M.diff == ((A.zero(), A("q")), (A("q"), A.zero()))
    Ml = build_kernel_M(line)
    Al = line.A
    assert Ml.diff == ((Al.zero(), Al("a*q")), (Al("q"), Al.zero()))
    assert validate_mf(Ml) == [] and Ml.curvature == Al("a*q^2")


def test_adjoint_N(point, line):
    N = build_adjoint_N(point)
    A = point.A
    assert N.diff == ((A.zero(), A("-q")), (A("-q"), A.zero()))
    assert validate_mf(build_adjoint_N(line)) == []
    cert = find_iso(build_kernel_M(point), N, 4)
    assert cert and cert.verify()


def test_enveloping_cross_sign():
    spec = CoverSpec(Ring([("c", 2), ("s", -2)]), f="-c", w="c^2*s", q=("chi", 0, ()), y=("zeta", 1, ()))
    E = spec.enveloping
    assert E.eps[E.index["chi"]][E.index["zeta"]] == 1
    assert spec.B("zeta^2") == spec.B("c")  # y^2 = -f for odd y


def test_left_action_is_multiplicative(line):
    B = line.B
    for u, v in [("y", "y"), ("a + y", "a*y - 1"), ("y", "a^2")]:
        Lu, Lv = left_action(line, B(u)), left_action(line, B(v))
        assert mat_mul(Lu, Lv, line.A) == [list(r) for r in left_action(line, B(u) * B(v))]


def test_fm_of_zero_object(point):
    Z = MatrixFactorization(point.B, [], [], 0)
    assert apply_fm_forward(point, Z).rank == 0


@pytest.mark.parametrize("which", ["point", "line"])
def test_fm_forward_additive_and_functorial(which, point, line):
    spec = point if which == "point" else line
    B = spec.B
    y = B.var("y")
    objs = [regular_object(spec), koszul_factorization(y, B.zero(), f_degree=B.degree(0))]
    S = direct_sum(*objs)
    assert apply_fm_forward(spec, S) == direct_sum(*[apply_fm_forward(spec, E) for E in objs])
    for E in objs:
        assert validate_mf(apply_fm_forward(spec, E)) == []
    maps = {}
    for s in objs:
        for t in objs:
            maps[(id(s), id(t))] = closed_morphisms(s, t, 0, 2)[:3]
    for a in objs:
        for b in objs:
            for c in objs:
                for f in maps[(id(a), id(b))]:
                    Ff = fm_forward_morphism(spec, f)
                    assert Ff.is_closed()
                    for g in maps[(id(b), id(c))]:
                        assert fm_forward_morphism(spec, g @ f) == fm_forward_morphism(spec, g) @ Ff


@pytest.mark.parametrize("which", ["point", "line"])
def test_unit_and_counit(which, point, line):
    spec = point if which == "point" else line
    assert check_unit(spec, (-6, 6), 10).ok
    rep = check_counit(spec, 10)
    assert rep.ok, rep.details
    assert rep.details["kernel_contraction"] is not None


def test_unit_complex_composites_vanish(line):
    modules, maps = unit_complex(line, 4)
    R = line.base
    for p in range(len(maps) - 1):
        comp = mat_mul([[R(x) for x in r] for r in maps[p + 1]], maps[p], R)
        assert all(x.is_zero() for r in comp for x in r)


def test_unit_detects_a_corrupted_complex(line):
    modules, maps = unit_complex(line, 3)
    from oddmf.homalg import check_exact_sequence

    R = line.base
    # drop the unit: 0 -> T_0 -> T_1 is not injective
    rep = check_exact_sequence(R, modules[1:], maps[1:], (-3, 3), 6)
    assert not rep.ok and rep.failures[0]["position"] == 0


def test_counit_object_is_koszul(point):
    K = counit_object(point)
    assert validate_mf(K) == []


def test_multiplication_sign(point):
    from oddmf.cover import enveloping_A

    Ae = enveloping_A(point)
    q1, q2 = Ae.var("q1"), Ae.var("q2")
    A = point.A
    # q1 q1 q2 -> (-1)^1 q^3 and q2 q1 = -q1 q2 -> -q^2
    assert multiplication(point, q1 * q1 * q2) == A("-q^3")
    assert multiplication(point, q2 * q1) == A("-q^2")
    assert multiplication(point, q2 - q1) == A.zero()


@pytest.mark.parametrize("which", ["point", "line"])
def test_involution(which, point, line):
    spec = point if which == "point" else line
    rep = check_involution(spec, [regular_object(spec)], 6)
    assert rep.ok and rep.details["exploratory"] is False


def test_involution_of_zero_object(point):
    Z = MatrixFactorization(point.B, [], [], 0)
    assert check_involution(point, [Z], 4).ok


def test_generators(point):
    assert check_generators(point, 6).ok


def test_generators_are_orthogonal(point):
    A = point.A
    Lp = loop_factorization(A("q"))
    Lm = loop_factorization(A("-q"), gen_degree=A.degree(0))
    assert cohomology_dims(hom_complex(Lp, Lm)).nonzero() == {}
    assert cohomology_dims(hom_complex(Lp, Lp)).nonzero() == {0: 1}


def test_generators_need_unit_f(line):
    with pytest.raises(CoverError):
        check_generators(line)


def test_fm_back_round_trip_on_point(point):
    PhiB = apply_fm_forward(point, regular_object(point))
    back = apply_fm_back(point, PhiB, window=(-2, 2), poly_bound=8)
    assert back.ext().nonzero() == {0: 2}


def test_fm_back_needs_zero_w():
    spec = CoverSpec(Ring([("x", 1, [1])], aux_moduli=[2]), f=1, w="x^2", q=("q", 1, (1,)), y=("y", 0, (1,)))
    g = spec.A("x + q")
    E = koszul_factorization(g, g)
    with pytest.raises(CoverError):
        apply_fm_back(spec, E)
