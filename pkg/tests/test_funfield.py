import pytest
from hypothesis import given, settings, strategies as st

from ffiwasawa.funfield import (
    BadReduction,
    CurveData,
    NotImplementedMinimalization,
    PrecisionTooLow,
    classify_reduction,
    crt_approximate,
    enumerate_places,
    infinity,
    necklace_count,
    parse_place,
    place,
    point_count,
    tate_parameter,
)


def brute_trace(p, f):
    """p + 1 - #E(F_p) for y^2 = f(x) over a prime field, counted by hand."""
    squares = {}
    for y in range(p):
        squares[y * y % p] = squares.get(y * y % p, 0) + 1
    affine = sum(squares.get(f(x) % p, 0) for x in range(p))
    return p + 1 - (affine + 1)


def power_sums(a, q, k):
    s = [2, a]
    for _ in range(k):
        s.append(a * s[-1] - q * s[-2])
    return s[k]


def test_enumerate_small_fields():
    places = enumerate_places(3, 2)
    by_deg = {}
    for v in places:
        by_deg.setdefault(v.degree, []).append(v.label())
    assert sorted(by_deg[1]) == sorted(["t", "t+1", "t+2", "inf"])
    assert len(by_deg[2]) == 3
    assert len(enumerate_places(5, 1)) == 6


def test_enumerate_degenerate_bound():
    assert enumerate_places(3, 0) == []
    with pytest.raises(ValueError):
        enumerate_places(3, 0, strict=True)


@pytest.mark.parametrize("q,B", [(3, 4), (5, 3), (9, 2)])
def test_enumerate_matches_necklace_formula(q, B):
    places = enumerate_places(q, B)
    for d in range(1, B + 1):
        finite = [v for v in places if not v.is_infinite and v.degree == d]
        assert len(finite) == necklace_count(q, d)
        assert len(set(finite)) == len(finite)
    assert sum(v.degree == 1 for v in places) == q + 1


def test_point_count_constant_curve(constant_curve):
    lam = brute_trace(5, lambda x: x ** 3 + x + 1)
    assert lam == -3
    for c in range(5):
        assert point_count(constant_curve, place(5, [c, 1])) == lam
    # irreducible quadratic t^2 + 2
    assert point_count(constant_curve, place(5, [2, 0, 1])) == -1


def test_point_count_constant_curve_by_degree(constant_curve):
    for v in enumerate_places(5, 3):
        if v.is_infinite:
            continue
        assert point_count(constant_curve, v) == power_sums(-3, 5, v.degree)


def test_point_count_legendre(legendre_curve):
    assert brute_trace(5, lambda x: x * (x - 1) * (x - 2)) == -2
    assert point_count(legendre_curve, parse_place(5, "t-2")) == -2
    for c in range(2, 5):
        expected = brute_trace(5, lambda x, c=c: x * (x - 1) * (x - c))
        assert point_count(legendre_curve, place(5, [-c, 1])) == expected


def test_point_count_rejects_bad_place(legendre_curve):
    with pytest.raises(BadReduction):
        point_count(legendre_curve, place(5, [0, 1]))


@pytest.mark.parametrize("name", ["legendre_curve", "fx3_curve"])
def test_hasse_bound(name, request):
    curve = request.getfixturevalue(name)
    for v in enumerate_places(curve.q, 2):
        pd = classify_reduction(curve, v)
        if pd.is_good:
            assert pd.lam ** 2 <= 4 * v.qv
        elif pd.is_multiplicative:
            assert pd.lam in (1, -1)


def test_classify_examples(constant_curve, legendre_curve):
    pd = classify_reduction(constant_curve, place(5, [1, 1]))
    assert (pd.reduction, pd.m) == ("good-ordinary", 1)
    assert classify_reduction(legendre_curve, place(5, [0, 1])).reduction == "split-mult"
    inf = classify_reduction(legendre_curve, infinity(5))
    assert (inf.reduction, inf.lam) == ("additive", 0)
    # over F_3 the node at t has slopes sqrt(-1), not rational
    leg3 = CurveData.from_int_lists(3, [[0], [-1, -1], [0], [0, 1], [0]])
    assert classify_reduction(leg3, place(3, [0, 1])).reduction == "nonsplit-mult"


def test_classify_alpha_is_unit_root(legendre_curve):
    v = place(5, [3, 1])
    pd = classify_reduction(legendre_curve, v, 6)
    a = int(pd.alpha)
    assert (a * a - pd.lam * a + v.qv) % 5 ** 6 == 0 and a % 5


def test_fx3_bad_places(fx3_curve):
    got = {v.label(): (classify_reduction(fx3_curve, v).reduction, classify_reduction(fx3_curve, v).m)
           for v in fx3_curve.bad_places()}
    assert got == {"t": ("split-mult", 5), "t^2+t+2": ("nonsplit-mult", 1), "inf": ("split-mult", 5)}
    assert fx3_curve.deg_disc % 12 == 0


def test_non_minimal_model_rejected():
    scaled = CurveData.from_int_lists(5, [[0], [0], [0], [0, 0, 0, 0, 1], [0, 0, 0, 0, 0, 0, 1]])
    with pytest.raises(NotImplementedMinimalization):
        classify_reduction(scaled, place(5, [0, 1]))


def test_override_mismatch_is_error():
    curve = CurveData.from_int_lists(5, [[0], [-1, -1], [0], [0, 1], [0]], {"t": {"reduction": "nonsplit-mult"}})
    with pytest.raises(ValueError):
        classify_reduction(curve, place(5, [0, 1]))


def _inv_j_mod(curve, v, digits):
    R = curve.R
    M = R.pow(v.poly, digits)
    return R.mod(R.mul(curve.disc, R.inverse_mod(R.pow(curve.c4, 3), M)), M)


def test_tate_parameter_leading_terms(fx3_curve):
    R = fx3_curve.R
    v = place(3, [0, 1])
    k, unit = tate_parameter(fx3_curve, v, 1)
    assert k == 5 == classify_reduction(fx3_curve, v).ord_disc
    # Q = j^-1 to first order: compare unit parts mod t
    J = _inv_j_mod(fx3_curve, v, k + 1)
    lead, rem = R.divmod(J, R.pow(v.poly, k))
    assert not rem
    assert R.mod(lead, v.poly) == R.mod(unit, v.poly)


def test_tate_parameter_second_order(fx3_curve):
    R = fx3_curve.R
    v = parse_place(3, "t^2+t+2")
    k, unit = tate_parameter(fx3_curve, v, 2)
    assert k == 1
    J = _inv_j_mod(fx3_curve, v, 3)
    series = R.add(J, R.scale(fx3_curve.F.from_int(744), R.mul(J, J)))
    expect, rem = R.divmod(R.mod(series, R.pow(v.poly, 3)), v.poly)
    assert not rem
    assert R.mod(expect, R.pow(v.poly, 2)) == unit


def test_tate_parameter_precision(fx3_curve):
    with pytest.raises(PrecisionTooLow):
        tate_parameter(fx3_curve, place(3, [0, 1]), 0)


def test_crt_examples():
    t, t1 = place(3, [0, 1]), place(3, [-1, 1])
    f = crt_approximate(3, [(t, 1, [1]), (t1, 1, [2])])
    assert f == (1, 1)
    assert crt_approximate(3, [(t, 2, [1])]) == (1,)
    assert crt_approximate(3, []) == (1,)


@settings(max_examples=100)
@given(st.data())
def test_crt_solves_congruences(data):
    q = data.draw(st.sampled_from([3, 5]))
    finite = [v for v in enumerate_places(q, 2) if not v.is_infinite]
    chosen = data.draw(st.lists(st.sampled_from(finite), min_size=1, max_size=3, unique=True))
    from ffiwasawa.funfield import PolyRing, get_field
    R = PolyRing(get_field(q))
    congr = []
    for v in chosen:
        e = data.draw(st.integers(1, 2))
        width = e * v.degree
        target = data.draw(st.lists(st.integers(0, q - 1), min_size=width, max_size=width))
        congr.append((v, e, target))
    f = crt_approximate(q, congr)
    total = sum(e * v.degree for v, e, _ in congr)
    assert R.deg(f) < total
    for v, e, target in congr:
        M = R.pow(v.poly, e)
        assert R.mod(f, M) == R.mod(R.from_ints(target), M)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from([3, 5]), st.integers(1, 3))
def test_parse_place_roundtrip(q, d):
    for v in enumerate_places(q, d):
        assert parse_place(q, v.label()) == v


def test_necklace_small():
    assert [necklace_count(3, d) for d in (1, 2, 3)] == [3, 3, 8]
    assert necklace_count(5, 2) == (25 - 5) // 2
