import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ffiwasawa.funfield import PolyRing, enumerate_places, get_field, infinity, place
from ffiwasawa.rayclass import (
    NotCoprime,
    TowerCoordinate,
    TowerSpec,
    artin_class,
    characters_of,
    conductor_of,
    element_order,
    get_level_group,
    subgroup_span,
)

T3 = place(3, [0, 1])
T3m1 = place(3, [-1, 1])


def polys_below(q, deg):
    for k in range(deg):
        for cs in itertools.product(range(q), repeat=k):
            yield tuple(cs) + (1,)


def test_level_group_examples():
    assert get_level_group(3, {T3: 2}, 3, 1).structure() == (3, 3)
    assert get_level_group(5, {}, 5, 2).structure() == (25,)
    assert get_level_group(3, {T3: 1}, 3, 1).structure() == (3,)


def test_level_group_unit_oracle():
    # 1-units of F_3[t]/t^3 form a group of order 9; mod cubes that is (Z/3)^2 or Z/9 -> Z/3
    G = get_level_group(3, {T3: 3}, 3, 1)
    R = PolyRing(get_field(3))
    units = [(1, a, b) for a in range(3) for b in range(3)]
    cubes = {R.mod(R.pow(R.trim(u), 3), R.pow(T3.poly, 3)) for u in units}
    local_order = G.order // 3
    assert local_order == 9 // len(cubes)


def test_artin_examples():
    G = get_level_group(3, {T3: 2}, 3, 1)
    assert artin_class((1, 0, 2, 1), G) == G.identity()
    assert artin_class((1,), G) == G.identity()
    # t - 1 = -(1 - t) = -(1 + 2t): unit part 1 + 2t, degree 1
    cls = artin_class((-1 % 3, 1), G)
    assert cls[0] == 1
    assert cls[1:] == G.class_of_poly((1, 2), degree=0)[1:]
    assert cls[1:] != (0,)
    with pytest.raises(NotCoprime):
        artin_class(T3, G)


@settings(max_examples=100)
@given(st.data())
def test_artin_is_multiplicative(data):
    q, D = data.draw(st.sampled_from([(3, {T3: 2}), (3, {T3: 3, T3m1: 2}), (5, {place(5, [-1, 1]): 2})]))
    n = data.draw(st.integers(1, 2))
    G = get_level_group(q, D, q, n)
    R = PolyRing(get_field(q))
    rng = random.Random(data.draw(st.integers(0, 10 ** 6)))

    def rand_coprime():
        while True:
            f = R.trim([rng.randrange(q) for _ in range(rng.randrange(0, 6))] + [1])
            if all(R.mod(f, v.poly) for v, _ in G.D):
                return f

    f, g = rand_coprime(), rand_coprime()
    assert artin_class(R.mul(f, g), G) == G.add(artin_class(f, G), artin_class(g, G))


def test_place_class_degree_component():
    G = get_level_group(3, {T3: 2}, 3, 2)
    for v in enumerate_places(3, 3):
        if v == T3:
            continue
        assert G.class_of_place(v)[0] == v.degree % 9
        if not v.is_infinite:
            assert G.class_of_place(v) == artin_class(v.poly, G)


def test_character_counts_and_orders():
    G = get_level_group(3, {T3: 3}, 3, 2)
    chars = characters_of(G)
    assert len(chars) == G.order
    for w in chars[:20]:
        assert 9 % w.order() == 0
        a, b = G.class_of_place(place(3, [1, 1])), G.class_of_place(place(3, [1, 0, 1]))
        assert w.value(G.add(a, b)).equals(w.value(a) * w.value(b))


def test_conductor_examples():
    G = get_level_group(3, {T3: 2}, 3, 1)
    for w in characters_of(G):
        cond = conductor_of(w)
        if w.is_trivial():
            assert cond == ()
        elif all(x == 0 for x in w.exps[1:]):
            assert cond == ()  # degree-only: unramified
        else:
            assert cond == ((T3, 2),)


def _factors_through(w, G, Dp):
    """Brute oracle: w kills every (0, u) with u constant modulo D'."""
    R = G.R
    modp = (1,)
    for v, e in Dp:
        modp = R.mul(modp, R.pow(v.poly, e))
    full = 0
    for v, e in G.D:
        full += e * v.degree
    for u in polys_below(G.q, full + 1):
        for c in range(1, G.q):
            uu = R.scale(c, u)
            if any(not R.mod(uu, v.poly) for v, _ in G.D):
                continue
            if R.deg(R.mod(uu, modp)) > 0:
                continue
            if w.exponent(G.class_of_poly(uu, degree=0)) != 0:
                return False
    return True


@pytest.mark.parametrize("q,D", [(3, {T3: 3}), (3, {T3: 2, T3m1: 2})])
def test_conductor_is_minimal(q, D):
    G = get_level_group(q, D, q, 1)
    for w in characters_of(G):
        cond = dict(conductor_of(w))
        support = {v: e for v, e in G.D}
        full = tuple((v, cond.get(v, 1)) for v in support)
        assert _factors_through(w, G, full)
        for v in cond:
            smaller = tuple((u, cond.get(u, 1) - (u == v)) for u in support)
            assert not _factors_through(w, G, smaller)


def test_conductor_stable_under_level_change():
    q = 3
    D = {T3: 3}
    lo, hi = get_level_group(q, D, 3, 1), get_level_group(q, D, 3, 2)
    probes = [f for f in polys_below(q, 5) if f[0] != 0]
    lo_cls = [lo.class_of_poly(f) for f in probes]
    hi_cls = [hi.class_of_poly(f) for f in probes]
    for w in characters_of(lo):
        matches = [u for u in characters_of(hi)
                   if all(u.exponent(h) == 3 * w.exponent(g) % 9 for g, h in zip(lo_cls, hi_cls))]
        assert len(matches) == 1
        assert conductor_of(matches[0]) == conductor_of(w)


def test_constant_tower_classes():
    T = TowerSpec.constant(5, 5)
    lvl = T.level(2)
    assert lvl.group.structure() == (25,)
    for v in enumerate_places(5, 2):
        assert T.place_class(v, 2) == (v.degree % 25,)


def test_cyclotomic_tower_generated_by_decomposition():
    T = TowerSpec.cyclotomic(3, 3, T3)
    for n in (1, 2):
        gens = T.decomposition_group(T3, n)
        assert len(subgroup_span(gens, T.group_moduli(n))) == 3 ** n
    assert T.check_compatibility(1)


def test_projection_to_base_is_trivial():
    T = TowerSpec(3, 3, [TowerCoordinate("constant"), TowerCoordinate("cyclotomic", T3)])
    T.level(1)
    base = T.sub_tower(np.zeros((0, 2), dtype=np.int64))
    assert base.d == 0
    assert base.place_class(place(3, [1, 1]), 1) == ()


def test_product_tower_compatibility():
    T = TowerSpec(3, 3, [TowerCoordinate("constant"), TowerCoordinate("cyclotomic", T3)])
    assert T.check_compatibility(1, samples=60)
    assert T.place_class(infinity(3), 2)[1] == 0


def test_element_order():
    assert element_order((0, 0), 3, 2) == 1
    assert element_order((3, 0), 3, 2) == 3
    assert element_order((1, 3), 3, 2) == 9
