from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ffiwasawa.padic import (
    CycloElt,
    NotOrdinary,
    PadicNum,
    Valuation,
    cyclo_normalize,
    cyclo_valuation,
    galois_act,
    hensel_unit_root,
    phi_pm,
    rational_reconstruction,
)


def brute_unit_roots(lam, qv, p, N):
    mod = p ** N
    return [x for x in range(mod) if x % p and (x * x - lam * x + qv) % mod == 0]


@pytest.mark.parametrize("lam,qv,p,expected", [(-3, 5, 5, 7), (3, 7, 7, 17)])
def test_hensel_examples(lam, qv, p, expected):
    alpha = hensel_unit_root(lam, qv, p, 2)
    assert int(alpha) == expected
    assert brute_unit_roots(lam, qv, p, 2) == [expected]


def test_hensel_rejects_supersingular():
    with pytest.raises(NotOrdinary):
        hensel_unit_root(5, 5, 5, 2)


@given(st.sampled_from([3, 5, 7]), st.integers(1, 3), st.integers(-40, 40), st.integers(1, 8))
def test_hensel_root_properties(p, k, lam, N):
    qv = p ** k
    if lam % p == 0:
        with pytest.raises(NotOrdinary):
            hensel_unit_root(lam, qv, p, N)
        return
    alpha = hensel_unit_root(lam, qv, p, N)
    mod = p ** N
    a = int(alpha)
    assert (a * a - lam * a + qv) % mod == 0
    assert (a - lam) % p == 0
    beta = (lam - a) % mod
    assert (a * beta - qv) % mod == 0
    # beta carries the whole p-part of qv (within precision)
    assert beta % p ** min(k, N) == 0


def test_padic_valuation_and_arithmetic():
    x = PadicNum(50, 5, 4)
    assert x.valuation() == Valuation.of(2)
    y = PadicNum(3, 5, 4)
    assert (x * y).valuation() == Valuation.of(2)
    assert int(y * y.inverse()) == 1
    assert PadicNum(0, 5, 4, exact_zero=True).valuation().is_infinite


@pytest.mark.parametrize("p,m", [(3, 1), (3, 2), (5, 1)])
def test_normalize_root_of_unity_power(p, m):
    raw = [0] * p ** m + [1]
    assert cyclo_normalize(raw, m, p, 10).equals(CycloElt.from_int(1, p, m))


@pytest.mark.parametrize("p,m", [(3, 1), (3, 2), (5, 1)])
def test_normalize_cyclotomic_polynomial_is_zero(p, m):
    step = p ** (m - 1)
    raw = [0] * (p ** m)
    for i in range(p):
        raw[i * step] = 1
    assert cyclo_normalize(raw[: (p - 1) * step + 1], m, p, 10).is_zero()


def test_normalize_square_of_one_plus_zeta():
    # schoolbook: (1+x)^2 = 1 + 2x + x^2, then x^2 = -1 - x
    got = cyclo_normalize([1, 2, 1], 1, 3, 10)
    assert got.equals(cyclo_normalize([0, 1], 1, 3, 10))
    z = CycloElt.zeta_power(1, 3, 1)
    assert got.equals((1 + z) * (1 + z))


def test_valuation_examples():
    assert cyclo_valuation(CycloElt.from_int(5, 5, 1, 10)) == Valuation.of(1)
    for p in (3, 5):
        pi = CycloElt.zeta_power(1, p, 1, 10) - 1
        assert cyclo_valuation(pi) == Valuation.of(Fraction(1, p - 1))
    assert cyclo_valuation(CycloElt.from_int(0, 5, 1)).is_infinite


def test_galois_examples():
    z = CycloElt.zeta_power(1, 3, 1)
    assert galois_act(1, z).equals(z)
    assert galois_act(2, z).equals(CycloElt.zeta_power(2, 3, 1))
    assert (z + galois_act(2, z)).equals(CycloElt.from_int(-1, 3, 1))


cyclo_params = st.sampled_from([(3, 1), (3, 2), (5, 1)])


@st.composite
def cyclo_elts(draw, params=None, lo=-30, hi=30):
    p, m = params if params is not None else draw(cyclo_params)
    n = phi_pm(p, m)
    coeffs = draw(st.lists(st.integers(lo, hi), min_size=n, max_size=n))
    return CycloElt(coeffs, p, m)


@settings(max_examples=200)
@given(st.data())
def test_normalize_idempotent(data):
    p, m = data.draw(cyclo_params)
    raw = data.draw(st.lists(st.integers(-50, 50), min_size=1, max_size=3 * p ** m))
    once = cyclo_normalize(raw, m, p, 8)
    twice = cyclo_normalize(list(once.coeffs), m, p, 8)
    assert once.equals(twice)
    assert all(0 <= c < p ** 8 for c in once.coeffs)


@settings(max_examples=100)
@given(st.data())
def test_valuation_additive(data):
    params = data.draw(cyclo_params)
    x = data.draw(cyclo_elts(params))
    y = data.draw(cyclo_elts(params))
    if x.is_zero() or y.is_zero():
        return
    vx, vy, vxy = cyclo_valuation(x), cyclo_valuation(y), cyclo_valuation(x * y)
    assert vxy == vx + vy
    p, m = params
    assert (phi_pm(p, m) * vxy.value).denominator == 1


@settings(max_examples=100)
@given(st.data())
def test_galois_is_action_and_ring_map(data):
    p, m = params = data.draw(cyclo_params)
    P = p ** m
    units = [a for a in range(1, P) if a % p]
    a, b = data.draw(st.sampled_from(units)), data.draw(st.sampled_from(units))
    x = data.draw(cyclo_elts(params))
    y = data.draw(cyclo_elts(params))
    assert galois_act(a, galois_act(b, x)).equals(galois_act(a * b % P, x))
    assert galois_act(a, x * y).equals(galois_act(a, x) * galois_act(a, y))
    assert galois_act(a, x + y).equals(galois_act(a, x) + galois_act(a, y))
    assert cyclo_valuation(galois_act(a, x)) == cyclo_valuation(x)


@settings(max_examples=100)
@given(st.data())
def test_orbit_sum_is_rational(data):
    p, m = params = data.draw(cyclo_params)
    x = data.draw(cyclo_elts(params))
    total = CycloElt.from_int(0, p, m)
    for a in range(1, p ** m):
        if a % p:
            total = total + galois_act(a, x)
    assert total.is_rational()


def test_rational_reconstruction_recovers_small_fractions():
    x = CycloElt.from_fraction(Fraction(5, 81), 5, 1, 30)
    assert x.reconstruct_rational() == Fraction(5, 81)
    assert rational_reconstruction(0, 5 ** 4) == 0


@given(st.integers(-200, 200), st.integers(1, 200).filter(lambda s: s % 5))
def test_rational_reconstruction_inverts_reduction(r, s):
    m = 5 ** 12
    a = r * pow(s, -1, m) % m
    assert rational_reconstruction(a, m) == Fraction(r, s)
